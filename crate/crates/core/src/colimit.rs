//! Colimits of purely monic diagrams.
//!
//! Over a componentwise 1-connected crown the colimit is assembled one
//! element at a time along a peel sequence, using only direct sums and
//! pushouts. Over a general poset it is read off from the ind-crown.
//! [`brute_force_colimit`] is the textbook coequalizer and serves as an
//! independent check.

use thiserror::Error;

use crate::crown::{connectedness_check, CrownError, PeelCase};
use crate::diagram::{CheckLevel, Prediagram};
use crate::modcat::system::{Compare, LinearSystem, Term};
use crate::modcat::{cokernel, inclusions, is_mono, pushout, ModMorphism, ModObject};
use crate::poset::CrownKind;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ColimitError {
    #[error(transparent)]
    Crown(#[from] CrownError),
    #[error("the crown is not componentwise 1-connected")]
    NotOneConnected,
    #[error("the diagram is not strictly commutative")]
    NotStrictlyCommutative,
    #[error("the diagram is not purely monic")]
    NotPurelyMonic,
    #[error("leg at {0} is not a pure monomorphism")]
    PurityViolation(String),
    #[error("transition map at {0} depends on the chosen maximal element")]
    IllDefinedTransition(String),
    #[error("test legs do not form a cocone")]
    NoSolution,
    #[error("induced map is not unique")]
    NotUnique,
}

#[derive(Debug, Clone)]
pub struct Cocone {
    pub diagram: Prediagram,
    pub apex: ModObject,
    pub legs: Vec<ModMorphism>,
}

impl Cocone {
    /// Pairs `(a, b)` where `ξ_{a,b} leg_b != leg_a`.
    pub fn failures(&self) -> Vec<(usize, usize)> {
        self.diagram
            .arrows
            .iter()
            .filter(|(&(a, b), f)| f.then(&self.legs[b]) != self.legs[a])
            .map(|(&k, _)| k)
            .collect()
    }

    pub fn is_cocone(&self) -> bool {
        self.legs.len() == self.diagram.len()
            && self.legs.iter().all(|l| l.target() == &self.apex)
            && self.failures().is_empty()
    }

    pub fn legs_mono(&self) -> bool {
        self.legs.iter().all(is_mono)
    }
}

fn require_monic(x: &Prediagram) -> Result<(), ColimitError> {
    if !x.check(CheckLevel::StrictlyCommutative).passed() {
        return Err(ColimitError::NotStrictlyCommutative);
    }
    if !x.is_purely_monic() {
        return Err(ColimitError::NotPurelyMonic);
    }
    Ok(())
}

/// Colimit over a componentwise 1-connected crown; every leg is a pure mono.
pub fn crown_colimit(x: &Prediagram) -> Result<Cocone, ColimitError> {
    let c = &x.shape;
    let report = connectedness_check(c)?;
    let Some(peel) = report.peel_sequence else {
        return Err(ColimitError::NotOneConnected);
    };
    require_monic(x)?;

    let n = c.len();
    let mut apex = ModObject::zero(x.ring);
    let mut legs: Vec<Option<ModMorphism>> = vec![None; n];
    let mut present = vec![false; n];
    for &(el, case) in peel.iter().rev() {
        match case {
            PeelCase::Isolated => {
                let mut inc = inclusions(&[apex.clone(), x.objects[el].clone()], x.ring);
                let new_leg = inc.pop().unwrap();
                let old = inc.pop().unwrap();
                for l in legs.iter_mut().flatten() {
                    *l = l.then(&old);
                }
                legs[el] = Some(new_leg);
                apex = old.target().clone();
            }
            PeelCase::I => {
                let d = (0..n).find(|&d| present[d] && c.lt(d, el)).expect("peel case I");
                let leg_d = legs[d].clone().unwrap();
                let po = pushout(&leg_d, x.arrow(d, el)).expect("common source");
                for l in legs.iter_mut().flatten() {
                    *l = l.then(&po.from_left);
                }
                legs[el] = Some(po.from_right);
                apex = po.object;
            }
            PeelCase::II => {
                let e = (0..n).find(|&e| present[e] && c.lt(el, e)).expect("peel case II");
                legs[el] = Some(x.arrow(el, e).then(legs[e].as_ref().unwrap()));
            }
        }
        present[el] = true;
    }
    let legs: Vec<ModMorphism> = legs.into_iter().map(Option::unwrap).collect();
    for (i, l) in legs.iter().enumerate() {
        if !is_mono(l) {
            return Err(ColimitError::PurityViolation(c.name(i).into()));
        }
    }
    let cocone = Cocone { diagram: x.clone(), apex, legs };
    debug_assert!(cocone.is_cocone());
    Ok(cocone)
}

/// Colimit over a poset whose ind-crown is componentwise 1-connected.
pub fn poset_colimit_via_crown(x: &Prediagram) -> Result<Cocone, ColimitError> {
    let p = &x.shape;
    require_monic(x)?;
    let emb = p.crown_of(CrownKind::Ind);
    let on_crown = crown_colimit(&x.restrict_along(&emb))?;
    let mut crown_leg: Vec<Option<&ModMorphism>> = vec![None; p.len()];
    for (i, &m) in emb.map.iter().enumerate() {
        crown_leg[m] = Some(&on_crown.legs[i]);
    }
    let maxima = p.maxima();
    let mut legs = Vec::with_capacity(p.len());
    for q in 0..p.len() {
        let mut theta: Option<ModMorphism> = None;
        for &c in maxima.iter().filter(|&&c| p.le(q, c)) {
            let t = x.arrow_le(q, c).then(crown_leg[c].expect("maxima lie in the ind-crown"));
            match &theta {
                None => theta = Some(t),
                Some(prev) if *prev != t => {
                    return Err(ColimitError::IllDefinedTransition(p.name(q).into()));
                }
                Some(_) => {}
            }
        }
        let theta = theta.expect("every element lies below a maximum");
        if !is_mono(&theta) {
            return Err(ColimitError::PurityViolation(p.name(q).into()));
        }
        legs.push(theta);
    }
    Ok(Cocone { diagram: x.clone(), apex: on_crown.apex, legs })
}

/// The coequalizer presentation over the cover relations.
pub fn brute_force_colimit(x: &Prediagram) -> Result<Cocone, ColimitError> {
    if !x.is_strictly_commutative() {
        return Err(ColimitError::NotStrictlyCommutative);
    }
    let ring = x.ring;
    let total = ModObject::sum_of(ring, &x.objects);
    let slots = inclusions(&x.objects, ring);
    let covers = x.shape.covers();
    let rels: Vec<ModMorphism> = covers
        .iter()
        .map(|&(a, b)| x.arrow(a, b).then(&slots[b]).sub(&slots[a]))
        .collect();
    let sources: Vec<ModObject> = covers.iter().map(|&(a, _)| x.objects[a].clone()).collect();
    let rel = if rels.is_empty() {
        ModMorphism::zero(&ModObject::zero(ring), &total)
    } else {
        ModMorphism::from_sum(&total, &rels)
    };
    debug_assert_eq!(rel.source(), &ModObject::sum_of(ring, &sources));
    let ck = cokernel(&rel);
    let legs = slots.iter().map(|s| s.then(&ck.projection)).collect();
    Ok(Cocone { diagram: x.clone(), apex: ck.object, legs })
}

/// The unique `ζ` with `leg_c ζ = test_c` for all `c`.
pub fn induced_map(colimit: &Cocone, test: &Cocone) -> Result<ModMorphism, ColimitError> {
    let ring = colimit.diagram.ring;
    let mut sys = LinearSystem::new(ring);
    let z = sys.unknown(&colimit.apex, &test.apex);
    for (leg, t) in colimit.legs.iter().zip(&test.legs) {
        let terms = [Term { left: Some(leg.matrix()), unknown: &z, right: None, sign: 1 }];
        sys.add_map_equation(leg.source(), &test.apex, &terms, Some(t.matrix()), Compare::Exact);
    }
    let sol = sys.solve().ok_or(ColimitError::NoSolution)?;
    if sol.kernel.iter().any(|k| !z.read(k).is_zero()) {
        return Err(ColimitError::NotUnique);
    }
    Ok(z.read(&sol.values))
}

/// Checks that two colimit cocones of one diagram are canonically isomorphic
/// and returns the two comparison maps.
pub fn compare_colimits(a: &Cocone, b: &Cocone) -> Result<(ModMorphism, ModMorphism), ColimitError> {
    let ab = induced_map(a, b)?;
    let ba = induced_map(b, a)?;
    if ab.then(&ba) != ModMorphism::identity(&a.apex) || ba.then(&ab) != ModMorphism::identity(&b.apex) {
        return Err(ColimitError::NotUnique);
    }
    Ok((ab, ba))
}

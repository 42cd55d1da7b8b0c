//! Prediagrams of `Z/p^k`-modules over finite posets, morphisms between them
//! and the verifiers used throughout the lifting code.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::modcat::{
    is_epi, is_mono, is_stable_iso, is_stably_zero, ModMorphism, ModObject, RingParams,
};
use crate::poset::{Poset, PosetError, SubposetEmbedding};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DiagramError {
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error("expected {expected} objects, got {found}")]
    ObjectCount { expected: usize, found: usize },
    #[error("no arrow for relation {0} < {1}")]
    MissingArrow(String, String),
    #[error("arrow {0} -> {1} does not correspond to a strict relation")]
    ExtraArrow(String, String),
    #[error("arrow {0} -> {1} has the wrong source or target")]
    WrongType(String, String),
    #[error("objects live over different rings")]
    RingMismatch,
    #[error("diagrams or families over different shapes")]
    ShapeMismatch,
    #[error("morphism is not strictly natural at {0} < {1}")]
    IllFormed(String, String),
}

/// Objects on the elements of a poset and one arrow per strict relation.
///
/// Nothing forces the arrows to compose; see [`CheckLevel`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prediagram {
    pub shape: Poset,
    pub ring: RingParams,
    pub objects: Vec<ModObject>,
    pub arrows: BTreeMap<(usize, usize), ModMorphism>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckLevel {
    Typed,
    StablyCommutative,
    StrictlyCommutative,
    PurelyMonic,
    PurelyEpic,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CheckFailure {
    MissingArrow { a: usize, b: usize },
    WrongType { a: usize, b: usize },
    /// `ξ_{a,b} ξ_{b,c} - ξ_{a,c}`
    Triple { a: usize, b: usize, c: usize, defect: ModMorphism },
    NotMono { a: usize, b: usize },
    NotEpi { a: usize, b: usize },
}

#[derive(Debug, Clone)]
pub struct CheckReport {
    pub level: CheckLevel,
    pub failures: Vec<CheckFailure>,
}

impl CheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

impl Prediagram {
    pub fn new(
        shape: Poset,
        ring: RingParams,
        objects: Vec<ModObject>,
        arrows: BTreeMap<(usize, usize), ModMorphism>,
    ) -> Result<Self, DiagramError> {
        if objects.len() != shape.len() {
            return Err(DiagramError::ObjectCount { expected: shape.len(), found: objects.len() });
        }
        if objects.iter().any(|x| x.ring != ring) {
            return Err(DiagramError::RingMismatch);
        }
        let d = Prediagram { shape, ring, objects, arrows };
        for &(a, b) in d.arrows.keys() {
            if a >= d.shape.len() || b >= d.shape.len() || !d.shape.lt(a, b) {
                let n = |i: usize| if i < d.shape.len() { d.shape.name(i).to_string() } else { i.to_string() };
                return Err(DiagramError::ExtraArrow(n(a), n(b)));
            }
        }
        if let Some(f) = d.check(CheckLevel::Typed).failures.first() {
            return Err(match *f {
                CheckFailure::MissingArrow { a, b } => {
                    DiagramError::MissingArrow(d.shape.name(a).into(), d.shape.name(b).into())
                }
                CheckFailure::WrongType { a, b } => {
                    DiagramError::WrongType(d.shape.name(a).into(), d.shape.name(b).into())
                }
                _ => unreachable!(),
            });
        }
        Ok(d)
    }

    /// Arrow-free prediagram over a discrete or empty shape, or the zero
    /// prediagram when `objects` are all zero.
    pub fn constant_zero(shape: Poset, ring: RingParams) -> Self {
        let objects = vec![ModObject::zero(ring); shape.len()];
        let arrows = shape
            .strict_relations()
            .into_iter()
            .map(|(a, b)| ((a, b), ModMorphism::zero(&objects[a], &objects[b])))
            .collect();
        Prediagram { shape, ring, objects, arrows }
    }

    pub fn len(&self) -> usize {
        self.shape.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shape.is_empty()
    }

    pub fn object(&self, a: usize) -> &ModObject {
        &self.objects[a]
    }

    /// `ξ_{a,b}` for `a < b`.
    pub fn arrow(&self, a: usize, b: usize) -> &ModMorphism {
        self.arrows
            .get(&(a, b))
            .unwrap_or_else(|| panic!("no arrow {} -> {}", self.shape.name(a), self.shape.name(b)))
    }

    /// `ξ_{a,b}` for `a <= b`, with `ξ_{a,a}` the identity.
    pub fn arrow_le(&self, a: usize, b: usize) -> ModMorphism {
        if a == b {
            ModMorphism::identity(&self.objects[a])
        } else {
            self.arrow(a, b).clone()
        }
    }

    pub fn check(&self, level: CheckLevel) -> CheckReport {
        let mut failures = Vec::new();
        let rels = self.shape.strict_relations();
        for &(a, b) in &rels {
            match self.arrows.get(&(a, b)) {
                None => failures.push(CheckFailure::MissingArrow { a, b }),
                Some(f) if f.source() != &self.objects[a] || f.target() != &self.objects[b] => {
                    failures.push(CheckFailure::WrongType { a, b })
                }
                Some(_) => {}
            }
        }
        if !failures.is_empty() || level == CheckLevel::Typed {
            return CheckReport { level, failures };
        }
        match level {
            CheckLevel::Typed => {}
            CheckLevel::StablyCommutative | CheckLevel::StrictlyCommutative => {
                for (a, b, c, defect) in self.defects() {
                    let bad = match level {
                        CheckLevel::StrictlyCommutative => !defect.is_zero(),
                        _ => is_stably_zero(&defect).is_none(),
                    };
                    if bad {
                        failures.push(CheckFailure::Triple { a, b, c, defect });
                    }
                }
            }
            CheckLevel::PurelyMonic => {
                for &(a, b) in &rels {
                    if !is_mono(self.arrow(a, b)) {
                        failures.push(CheckFailure::NotMono { a, b });
                    }
                }
            }
            CheckLevel::PurelyEpic => {
                for &(a, b) in &rels {
                    if !is_epi(self.arrow(a, b)) {
                        failures.push(CheckFailure::NotEpi { a, b });
                    }
                }
            }
        }
        CheckReport { level, failures }
    }

    /// All composable triples `a < b < c` with their defect.
    pub fn defects(&self) -> Vec<(usize, usize, usize, ModMorphism)> {
        let n = self.shape.len();
        let mut out = Vec::new();
        for (&(a, b), f) in &self.arrows {
            for c in 0..n {
                if self.shape.lt(b, c) {
                    let defect = f.then(self.arrow(b, c)).sub(self.arrow(a, c));
                    out.push((a, b, c, defect));
                }
            }
        }
        out
    }

    pub fn is_strictly_commutative(&self) -> bool {
        self.check(CheckLevel::StrictlyCommutative).passed()
    }

    pub fn is_stably_commutative(&self) -> bool {
        self.check(CheckLevel::StablyCommutative).passed()
    }

    pub fn is_purely_monic(&self) -> bool {
        self.check(CheckLevel::PurelyMonic).passed()
    }

    pub fn is_purely_epic(&self) -> bool {
        self.check(CheckLevel::PurelyEpic).passed()
    }

    /// Restriction along a subposet embedding into `self.shape`. The
    /// embedding need not be full; only its own relations receive arrows.
    pub fn restrict_along(&self, emb: &SubposetEmbedding) -> Prediagram {
        assert_eq!(emb.target, self.shape, "embedding targets a different shape");
        let objects = emb.map.iter().map(|&i| self.objects[i].clone()).collect();
        let arrows = emb
            .source
            .strict_relations()
            .into_iter()
            .map(|(a, b)| ((a, b), self.arrow(emb.map[a], emb.map[b]).clone()))
            .collect();
        Prediagram { shape: emb.source.clone(), ring: self.ring, objects, arrows }
    }

    /// Restriction to the full subposet on `subset` (in the given order).
    pub fn restrict(&self, subset: &[usize]) -> Prediagram {
        self.restrict_along(&self.shape.full_subposet(subset))
    }

    pub fn restrict_by_names(&self, names: &[&str]) -> Result<Prediagram, DiagramError> {
        let emb = self.shape.full_subposet_by_names(names)?;
        Ok(self.restrict_along(&emb))
    }

    /// Opposite shape with every arrow replaced by its dual.
    pub fn dual(&self) -> Prediagram {
        let arrows = self.arrows.iter().map(|(&(a, b), f)| ((b, a), f.dual())).collect();
        Prediagram { shape: self.shape.opposite(), ring: self.ring, objects: self.objects.clone(), arrows }
    }
}

fn same_shape(x: &Prediagram, y: &Prediagram) -> bool {
    x.shape == y.shape && x.ring == y.ring
}

fn typed_components(
    source: &Prediagram,
    target: &Prediagram,
    components: &[ModMorphism],
) -> Result<(), DiagramError> {
    if !same_shape(source, target) || components.len() != source.len() {
        return Err(DiagramError::ShapeMismatch);
    }
    for (a, f) in components.iter().enumerate() {
        if f.source() != source.object(a) || f.target() != target.object(a) {
            let n = source.shape.name(a).to_string();
            return Err(DiagramError::WrongType(n.clone(), n));
        }
    }
    Ok(())
}

/// `f_a ξ'_{a,b} - ξ_{a,b} f_b` for each strict relation.
fn naturality_defects(
    source: &Prediagram,
    target: &Prediagram,
    components: &[ModMorphism],
) -> Vec<(usize, usize, ModMorphism)> {
    source
        .arrows
        .iter()
        .map(|(&(a, b), xi)| {
            let d = components[a].then(target.arrow(a, b)).sub(&xi.then(&components[b]));
            (a, b, d)
        })
        .collect()
}

/// A family of component maps commuting strictly with all arrows.
#[derive(Debug, Clone)]
pub struct DiagramMorphism {
    pub source: Prediagram,
    pub target: Prediagram,
    pub components: Vec<ModMorphism>,
}

impl DiagramMorphism {
    pub fn new(
        source: Prediagram,
        target: Prediagram,
        components: Vec<ModMorphism>,
    ) -> Result<Self, DiagramError> {
        typed_components(&source, &target, &components)?;
        let m = DiagramMorphism { source, target, components };
        if let Some((a, b, _)) = m.naturality_failures().into_iter().next() {
            return Err(DiagramError::IllFormed(m.source.shape.name(a).into(), m.source.shape.name(b).into()));
        }
        Ok(m)
    }

    pub fn identity(x: &Prediagram) -> Self {
        let components = x.objects.iter().map(ModMorphism::identity).collect();
        DiagramMorphism { source: x.clone(), target: x.clone(), components }
    }

    pub fn naturality_failures(&self) -> Vec<(usize, usize, ModMorphism)> {
        naturality_defects(&self.source, &self.target, &self.components)
            .into_iter()
            .filter(|(_, _, d)| !d.is_zero())
            .collect()
    }

    /// `self` followed by `next`, pointwise.
    pub fn then(&self, next: &DiagramMorphism) -> Result<DiagramMorphism, DiagramError> {
        if self.target != next.source {
            return Err(DiagramError::ShapeMismatch);
        }
        let components = self.components.iter().zip(&next.components).map(|(f, g)| f.then(g)).collect();
        Ok(DiagramMorphism { source: self.source.clone(), target: next.target.clone(), components })
    }

    pub fn as_family(&self) -> StableIsoFamily {
        StableIsoFamily {
            source: self.source.clone(),
            target: self.target.clone(),
            components: self.components.clone(),
        }
    }
}

/// True iff every component is a stable isomorphism.
pub fn verify_homotopism(f: &DiagramMorphism) -> Result<bool, DiagramError> {
    if let Some((a, b, _)) = f.naturality_failures().into_iter().next() {
        return Err(DiagramError::IllFormed(f.source.shape.name(a).into(), f.source.shape.name(b).into()));
    }
    Ok(f.components.iter().all(is_stable_iso))
}

/// Component maps that are stable isomorphisms and natural up to maps
/// factoring through bijective objects.
#[derive(Debug, Clone)]
pub struct StableIsoFamily {
    pub source: Prediagram,
    pub target: Prediagram,
    pub components: Vec<ModMorphism>,
}

#[derive(Debug, Clone, Default)]
pub struct FamilyReport {
    pub non_iso: Vec<usize>,
    pub non_natural: Vec<(usize, usize, ModMorphism)>,
}

impl FamilyReport {
    pub fn holds(&self) -> bool {
        self.non_iso.is_empty() && self.non_natural.is_empty()
    }
}

impl StableIsoFamily {
    pub fn new(
        source: Prediagram,
        target: Prediagram,
        components: Vec<ModMorphism>,
    ) -> Result<Self, DiagramError> {
        typed_components(&source, &target, &components)?;
        Ok(StableIsoFamily { source, target, components })
    }

    pub fn identity(x: &Prediagram) -> Self {
        DiagramMorphism::identity(x).as_family()
    }

    pub fn report(&self) -> FamilyReport {
        let non_iso = (0..self.components.len()).filter(|&a| !is_stable_iso(&self.components[a])).collect();
        let non_natural = naturality_defects(&self.source, &self.target, &self.components)
            .into_iter()
            .filter(|(_, _, d)| is_stably_zero(d).is_none())
            .collect();
        FamilyReport { non_iso, non_natural }
    }

    pub fn is_strictly_natural(&self) -> bool {
        naturality_defects(&self.source, &self.target, &self.components).iter().all(|(_, _, d)| d.is_zero())
    }

    /// `self` followed by `next`, pointwise.
    pub fn then(&self, next: &StableIsoFamily) -> Result<StableIsoFamily, DiagramError> {
        if self.target != next.source {
            return Err(DiagramError::ShapeMismatch);
        }
        let components = self.components.iter().zip(&next.components).map(|(f, g)| f.then(g)).collect();
        Ok(StableIsoFamily { source: self.source.clone(), target: next.target.clone(), components })
    }

    /// Pointwise duals; a family `X -> Y` becomes `Y* -> X*`.
    pub fn dual(&self) -> StableIsoFamily {
        StableIsoFamily {
            source: self.target.dual(),
            target: self.source.dual(),
            components: self.components.iter().map(ModMorphism::dual).collect(),
        }
    }
}

pub fn verify_stable_iso(f: &StableIsoFamily) -> Result<bool, DiagramError> {
    if !same_shape(&f.source, &f.target) {
        return Err(DiagramError::ShapeMismatch);
    }
    Ok(f.report().holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modcat::Mat;

    fn ring() -> RingParams {
        RingParams::new(3, 2).unwrap()
    }

    fn delta2_example() -> Prediagram {
        let r = ring();
        let shape = Poset::chain(2);
        let objects = vec![
            ModObject::new(r, vec![1]).unwrap(),
            ModObject::new(r, vec![1]).unwrap(),
            ModObject::new(r, vec![2]).unwrap(),
        ];
        let mut arrows = BTreeMap::new();
        arrows.insert((0, 1), ModMorphism::zero(&objects[0], &objects[1]));
        arrows.insert((1, 2), ModMorphism::zero(&objects[1], &objects[2]));
        arrows.insert(
            (0, 2),
            ModMorphism::new(objects[0].clone(), objects[2].clone(), Mat::from_rows(&[vec![3]])).unwrap(),
        );
        Prediagram::new(shape, r, objects, arrows).unwrap()
    }

    #[test]
    fn stably_but_not_strictly_commutative() {
        let x = delta2_example();
        assert!(x.is_stably_commutative());
        let rep = x.check(CheckLevel::StrictlyCommutative);
        assert_eq!(rep.failures.len(), 1);
        assert!(matches!(rep.failures[0], CheckFailure::Triple { a: 0, b: 1, c: 2, .. }));
        assert!(!x.is_purely_monic());
    }

    #[test]
    fn construction_errors() {
        let x = delta2_example();
        let mut arrows = x.arrows.clone();
        arrows.remove(&(0, 2));
        assert!(matches!(
            Prediagram::new(x.shape.clone(), x.ring, x.objects.clone(), arrows),
            Err(DiagramError::MissingArrow(..))
        ));
        let mut arrows = x.arrows.clone();
        arrows.insert((2, 0), ModMorphism::zero(&x.objects[2], &x.objects[0]));
        assert!(matches!(
            Prediagram::new(x.shape.clone(), x.ring, x.objects.clone(), arrows),
            Err(DiagramError::ExtraArrow(..))
        ));
    }

    #[test]
    fn restriction_and_identity() {
        let x = delta2_example();
        assert_eq!(x.restrict(&[0, 1, 2]), x);
        let y = x.restrict(&[0, 2]);
        assert_eq!(y.arrows.len(), 1);
        assert!(y.is_strictly_commutative());
        let id = DiagramMorphism::identity(&x);
        assert!(verify_homotopism(&id).unwrap());
        assert!(verify_stable_iso(&id.as_family()).unwrap());
    }

    #[test]
    fn zero_family_is_not_stable_iso() {
        let x = delta2_example();
        let comps = x.objects.iter().map(|o| ModMorphism::zero(o, o)).collect();
        let f = DiagramMorphism::new(x.clone(), x, comps).unwrap();
        assert!(!verify_homotopism(&f).unwrap());
    }

    #[test]
    fn dual_round_trip() {
        let x = delta2_example();
        assert_eq!(x.dual().dual(), x);
        assert!(x.dual().is_stably_commutative());
    }
}

//! Replacing prediagrams by strictly commutative diagrams of pure
//! monomorphisms, and lifting morphisms of stable diagrams over quasitrees.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::colimit::{poset_colimit_via_crown, ColimitError};
use crate::crown::{connectedness_check, PeelCase};
use crate::diagram::{
    verify_homotopism, CheckLevel, DiagramError, DiagramMorphism, Prediagram, StableIsoFamily,
};
use crate::flatness::{is_ind_flat, is_pro_flat, quasitree_check};
use crate::modcat::system::{Compare, LinearSystem, Term};
use crate::modcat::{
    bijective_embedding, is_mono, is_stably_zero, solve, stable_iso_witness, ModMorphism, ModObject, Side,
};
use crate::poset::{ConeMode, CrownKind};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("shape is not ind-flat")]
    NotIndFlat,
    #[error("shape is not pro-flat")]
    NotProFlat,
    #[error("shape is not a quasitree")]
    NotQuasitree,
    #[error("prediagram is not stably commutative")]
    NotStablyCommutative,
    #[error("representatives are not stably natural at {0} < {1}")]
    NotStablyNatural(String, String),
    #[error("replacement summand is not free")]
    NotFree,
    #[error("ill-typed replacement data at {0}")]
    IllTyped(String),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("defect does not factor through the bijective embedding")]
    FactorizationFailed,
    #[error(transparent)]
    Colimit(#[from] ColimitError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("internal invariant broken: {0}")]
    Internal(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StepKind {
    /// Diagram re-attached at a maximal element after the recursive lift.
    Reattach,
    /// Free summand added to make the arrows into an element monic.
    Purify,
    /// Free summand added at an element to force one triangle to commute.
    AddCommutativity,
    /// An arrow into the top element redefined as a composite.
    Redirect,
    /// Arrows into the top element replaced by composites through maxima.
    Collapse,
    /// Free summand added while lifting a morphism.
    MorphismReplacement,
}

impl fmt::Display for StepKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            StepKind::Reattach => "reattach",
            StepKind::Purify => "purify",
            StepKind::AddCommutativity => "add-commutativity",
            StepKind::Redirect => "redirect",
            StepKind::Collapse => "collapse",
            StepKind::MorphismReplacement => "morphism-replacement",
        })
    }
}

/// One replacement step; element names refer to the input shape.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub element: String,
    pub kind: StepKind,
    pub via: Vec<String>,
    pub added_free: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    Monic,
    Epic,
}

#[derive(Debug, Clone)]
pub struct LiftResult {
    pub lifted: Prediagram,
    /// Stable isomorphism from `lifted` to the input.
    pub iso: StableIsoFamily,
    pub trace: Vec<TraceStep>,
    pub orientation: Orientation,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LiftVerdict {
    pub pure: bool,
    pub strictly_commutative: bool,
    pub stable_iso: bool,
}

impl LiftVerdict {
    pub fn passed(&self) -> bool {
        self.pure && self.strictly_commutative && self.stable_iso
    }
}

impl LiftResult {
    pub fn verify(&self) -> LiftVerdict {
        let level = match self.orientation {
            Orientation::Monic => CheckLevel::PurelyMonic,
            Orientation::Epic => CheckLevel::PurelyEpic,
        };
        LiftVerdict {
            pure: self.lifted.check(level).passed(),
            strictly_commutative: self.lifted.is_strictly_commutative(),
            stable_iso: self.iso.target.shape == self.lifted.shape && self.iso.report().holds(),
        }
    }

    pub fn added_free_rank(&self) -> usize {
        self.trace.iter().map(|t| t.added_free).sum()
    }
}

/// Replacement at `a`: `X'_a = X_a ⊕ N`, arrows out of `a` become
/// `[ξ_{a,c}; η_c]` and arrows into `a` become `(ξ_{b,a} | ζ_b)`. Missing
/// entries of `eta` and `zeta` are zero. The returned family is the identity
/// away from `a` and the projection onto `X_a` at `a`.
pub fn replace_at(
    x: &Prediagram,
    a: usize,
    eta: &BTreeMap<usize, ModMorphism>,
    zeta: &BTreeMap<usize, ModMorphism>,
    n: &ModObject,
) -> Result<(Prediagram, StableIsoFamily), LiftError> {
    if !n.is_free() || n.ring != x.ring {
        return Err(LiftError::NotFree);
    }
    let shape = &x.shape;
    let name = |i: usize| shape.name(i).to_string();
    for (&c, f) in eta {
        if !shape.lt(a, c) || f.source() != n || f.target() != x.object(c) {
            return Err(LiftError::IllTyped(name(c)));
        }
    }
    for (&b, f) in zeta {
        if !shape.lt(b, a) || f.source() != x.object(b) || f.target() != n {
            return Err(LiftError::IllTyped(name(b)));
        }
    }
    let xa = x.object(a).clone();
    let mut y = x.clone();
    y.objects[a] = xa.direct_sum(n);
    for (&(s, t), f) in x.arrows.iter() {
        if s == a {
            let e = eta.get(&t).cloned().unwrap_or_else(|| ModMorphism::zero(n, x.object(t)));
            y.arrows.insert((s, t), ModMorphism::from_sum(x.object(t), &[f.clone(), e]));
        } else if t == a {
            let z = zeta.get(&s).cloned().unwrap_or_else(|| ModMorphism::zero(x.object(s), n));
            y.arrows.insert((s, t), ModMorphism::into_sum(x.object(s), &[f.clone(), z]));
        }
    }
    let mut comps: Vec<ModMorphism> = x.objects.iter().map(ModMorphism::identity).collect();
    comps[a] = ModMorphism::from_sum(&xa, &[ModMorphism::identity(&xa), ModMorphism::zero(n, &xa)]);
    let fam = StableIsoFamily::new(y.clone(), x.clone(), comps)?;
    Ok((y, fam))
}

fn strict_down(x: &Prediagram, c: usize) -> Vec<usize> {
    x.shape.cone_indices(c, ConeMode::StrictDown)
}

/// Colimit over `Λ^0(c)` with its legs indexed by elements of the shape.
fn lower_colimit(x: &Prediagram, c: usize) -> Result<(ModObject, BTreeMap<usize, ModMorphism>), LiftError> {
    let below = strict_down(x, c);
    let cone = x.restrict(&below);
    let colim = poset_colimit_via_crown(&cone)?;
    let legs = below.iter().copied().zip(colim.legs).collect();
    Ok((colim.apex, legs))
}

fn purify_at_max_inner(
    x: &Prediagram,
    c: usize,
    trace: &mut Vec<TraceStep>,
) -> Result<(Prediagram, DiagramMorphism), LiftError> {
    let below = strict_down(x, c);
    if below.iter().all(|&b| is_mono(x.arrow(b, c))) {
        return Ok((x.clone(), DiagramMorphism::identity(x)));
    }
    let (l, eta) = lower_colimit(x, c)?;
    let (n, iota) = bijective_embedding(&l);
    let zeta: BTreeMap<usize, ModMorphism> = eta.iter().map(|(&b, e)| (b, e.then(&iota))).collect();
    let (y, fam) = replace_at(x, c, &BTreeMap::new(), &zeta, &n)?;
    trace.push(TraceStep {
        element: x.shape.name(c).to_string(),
        kind: StepKind::Purify,
        via: Vec::new(),
        added_free: n.rank(),
    });
    let hom = DiagramMorphism::new(fam.source, fam.target, fam.components)?;
    Ok((y, hom))
}

/// Makes the arrows into the maximal element `c` purely monic by adding a
/// free summand at `c`, assuming the rest of the diagram already is.
pub fn purify_at_max(x: &Prediagram, c: usize) -> Result<(Prediagram, DiagramMorphism), LiftError> {
    if !x.shape.maxima().contains(&c) {
        return Err(LiftError::PreconditionViolated(format!("{} is not maximal", x.shape.name(c))));
    }
    if !x.is_strictly_commutative() {
        return Err(LiftError::PreconditionViolated("diagram is not strictly commutative".into()));
    }
    let rest: Vec<usize> = (0..x.len()).filter(|&i| i != c).collect();
    if !x.restrict(&rest).is_purely_monic() {
        return Err(LiftError::PreconditionViolated("restriction away from the top is not purely monic".into()));
    }
    let cone = x.shape.cone(c, ConeMode::StrictDown).source;
    let crown = cone.crown_of(CrownKind::Ind).source;
    if connectedness_check(&crown).map(|r| !r.one_connected).unwrap_or(true) {
        return Err(LiftError::PreconditionViolated("ind-crown below the top is not 1-connected".into()));
    }
    purify_at_max_inner(x, c, &mut Vec::new())
}

/// Extends a prediagram on `D \ {c}` (listed as `rest`) to `D` by putting
/// `x_c` at the maximal element `c` with the given arrows into it.
fn extend_at_max(
    sub: &Prediagram,
    parent: &Prediagram,
    c: usize,
    rest: &[usize],
    x_c: ModObject,
    mut into_c: impl FnMut(usize, usize) -> ModMorphism,
) -> Prediagram {
    let n = parent.len();
    let mut objects = vec![x_c; n];
    for (i, &p) in rest.iter().enumerate() {
        objects[p] = sub.objects[i].clone();
    }
    let mut arrows = BTreeMap::new();
    for (&(a, b), f) in &sub.arrows {
        arrows.insert((rest[a], rest[b]), f.clone());
    }
    for (i, &p) in rest.iter().enumerate() {
        if parent.shape.lt(p, c) {
            arrows.insert((p, c), into_c(i, p));
        }
    }
    Prediagram { shape: parent.shape.clone(), ring: parent.ring, objects, arrows }
}

fn extend_components(sub: &[ModMorphism], rest: &[usize], at_c: ModMorphism) -> Vec<ModMorphism> {
    let mut comps = vec![at_c; rest.len() + 1];
    for (i, &p) in rest.iter().enumerate() {
        comps[p] = sub[i].clone();
    }
    comps
}

fn first_max(x: &Prediagram) -> (usize, Vec<usize>) {
    let c = x.shape.maxima()[0];
    (c, (0..x.len()).filter(|&i| i != c).collect())
}

fn purify_rec(x: &Prediagram, trace: &mut Vec<TraceStep>) -> Result<(Prediagram, DiagramMorphism), LiftError> {
    if x.is_empty() {
        return Ok((x.clone(), DiagramMorphism::identity(x)));
    }
    let (c, rest) = first_max(x);
    let sub = x.restrict(&rest);
    let (y, g) = purify_rec(&sub, trace)?;
    let x2 = extend_at_max(&y, x, c, &rest, x.object(c).clone(), |i, p| g.components[i].then(x.arrow(p, c)));
    let comps = extend_components(&g.components, &rest, ModMorphism::identity(x.object(c)));
    let f = DiagramMorphism::new(x2.clone(), x.clone(), comps)?;
    let (x3, h) = purify_at_max_inner(&x2, c, trace)?;
    Ok((x3, h.then(&f)?))
}

/// Homotopic replacement of a strictly commutative diagram over an ind-flat
/// shape by a purely monic one.
pub fn purify(x: &Prediagram) -> Result<(Prediagram, DiagramMorphism, Vec<TraceStep>), LiftError> {
    if !is_ind_flat(&x.shape) {
        return Err(LiftError::NotIndFlat);
    }
    if !x.is_strictly_commutative() {
        return Err(LiftError::PreconditionViolated("diagram is not strictly commutative".into()));
    }
    let mut trace = Vec::new();
    let (y, h) = purify_rec(x, &mut trace)?;
    Ok((y, h, trace))
}

fn add_commutativity_inner(
    x: &Prediagram,
    c: usize,
    d: usize,
    e: usize,
) -> Result<(Prediagram, StableIsoFamily, usize), LiftError> {
    let defect = x.arrow(e, c).sub(&x.arrow(e, d).then(x.arrow(d, c)));
    if defect.is_zero() {
        return Ok((x.clone(), StableIsoFamily::identity(x), 0));
    }
    let (l, eta) = lower_colimit(x, d)?;
    let (n, iota) = bijective_embedding(&l);
    let into_n = eta[&e].then(&iota);
    let theta = solve(&into_n, &defect, Side::ThroughSource)
        .map_err(|_| LiftError::FactorizationFailed)?
        .ok_or(LiftError::FactorizationFailed)?;
    let zeta: BTreeMap<usize, ModMorphism> = eta.iter().map(|(&b, h)| (b, h.then(&iota))).collect();
    let mut out = BTreeMap::new();
    out.insert(c, theta);
    let (y, fam) = replace_at(x, d, &out, &zeta, &n)?;
    Ok((y, fam, n.rank()))
}

/// Replacement at `d` after which `ξ'_{e,c} = ξ'_{e,d} ξ'_{d,c}` holds exactly.
pub fn add_commutativity(
    x: &Prediagram,
    c: usize,
    d: usize,
    e: usize,
) -> Result<(Prediagram, StableIsoFamily), LiftError> {
    let shape = &x.shape;
    let pre = |m: &str| Err(LiftError::PreconditionViolated(m.to_string()));
    if !shape.maxima().contains(&c) {
        return pre("c is not maximal");
    }
    let below_c = strict_down(x, c);
    let cone = shape.full_subposet(&below_c);
    if !cone.source.maxima().iter().any(|&i| below_c[i] == d) {
        return pre("d is not maximal below c");
    }
    if !shape.lt(e, d) {
        return pre("e is not below d");
    }
    let d_cone = shape.cone(d, ConeMode::StrictDown).source;
    if connectedness_check(&d_cone.crown_of(CrownKind::Ind).source).map(|r| !r.one_connected).unwrap_or(true) {
        return pre("ind-crown below d is not 1-connected");
    }
    let rest: Vec<usize> = (0..x.len()).filter(|&i| i != c).collect();
    if !x.restrict(&rest).is_strictly_commutative() {
        return pre("restriction away from c is not strictly commutative");
    }
    if !x.restrict(&below_c).is_purely_monic() {
        return pre("restriction below c is not purely monic");
    }
    let defect = x.arrow(e, c).sub(&x.arrow(e, d).then(x.arrow(d, c)));
    if is_stably_zero(&defect).is_none() {
        return Err(LiftError::FactorizationFailed);
    }
    let (y, fam, _) = add_commutativity_inner(x, c, d, e)?;
    if !y.restrict(&rest).is_strictly_commutative() {
        return Err(LiftError::Internal("replacement broke commutativity away from c".into()));
    }
    if !y.restrict(&below_c).is_purely_monic() {
        return Err(LiftError::Internal("replacement is not purely monic below c".into()));
    }
    if *y.arrow(e, c) != y.arrow(e, d).then(y.arrow(d, c)) {
        return Err(LiftError::Internal("triangle e < d < c still does not commute".into()));
    }
    let away: Vec<usize> = (0..x.len()).filter(|&i| i != d).collect();
    if x.restrict(&away) != y.restrict(&away) {
        return Err(LiftError::Internal("replacement changed the diagram away from d".into()));
    }
    Ok((y, fam))
}

fn lift_rec(x: &Prediagram, trace: &mut Vec<TraceStep>) -> Result<(Prediagram, StableIsoFamily), LiftError> {
    if x.is_empty() {
        return Ok((x.clone(), StableIsoFamily::identity(x)));
    }
    let (c, rest) = first_max(x);
    let sub = x.restrict(&rest);
    let (y, g) = lift_rec(&sub, trace)?;
    let name = |i: usize| x.shape.name(i).to_string();

    // re-attach X_c on top of the lifted restriction
    let mut cur = extend_at_max(&y, x, c, &rest, x.object(c).clone(), |i, p| g.components[i].then(x.arrow(p, c)));
    let comps = extend_components(&g.components, &rest, ModMorphism::identity(x.object(c)));
    let mut total = StableIsoFamily::new(cur.clone(), x.clone(), comps)?;
    if !cur.is_stably_commutative() {
        return Err(LiftError::Internal("re-attached prediagram is not stably commutative".into()));
    }
    trace.push(TraceStep { element: name(c), kind: StepKind::Reattach, via: Vec::new(), added_free: 0 });

    // commutant induction over the ind-crown below c
    let cone = x.shape.cone(c, ConeMode::StrictDown);
    let crown = cone.source.crown_of(CrownKind::Ind);
    let to_d: Vec<usize> = crown.map.iter().map(|&i| cone.map[i]).collect();
    let report = connectedness_check(&crown.source).map_err(|e| LiftError::Internal(e.to_string()))?;
    let peel = report.peel_sequence.ok_or(LiftError::NotIndFlat)?;
    let cr = &crown.source;
    let mut present = vec![false; cr.len()];
    for &(u, case) in peel.iter().rev() {
        match case {
            PeelCase::Isolated => {}
            PeelCase::I => {
                let v = (0..cr.len()).find(|&v| present[v] && cr.lt(v, u)).expect("peel case I");
                let (du, dv) = (to_d[u], to_d[v]);
                let (next, fam, added) = add_commutativity_inner(&cur, c, du, dv)?;
                total = fam.then(&total)?;
                cur = next;
                trace.push(TraceStep {
                    element: name(du),
                    kind: StepKind::AddCommutativity,
                    via: vec![name(dv), name(c)],
                    added_free: added,
                });
            }
            PeelCase::II => {
                let v = (0..cr.len()).find(|&v| present[v] && cr.lt(u, v)).expect("peel case II");
                let (du, dv) = (to_d[u], to_d[v]);
                let redirected = cur.arrow(du, dv).then(cur.arrow(dv, c));
                cur.arrows.insert((du, c), redirected);
                total = StableIsoFamily::new(cur.clone(), total.target.clone(), total.components.clone())?;
                trace.push(TraceStep {
                    element: name(du),
                    kind: StepKind::Redirect,
                    via: vec![name(dv), name(c)],
                    added_free: 0,
                });
            }
        }
        present[u] = true;
    }

    // collapse arrows into c through the maxima below it
    let top: Vec<usize> = cone.source.maxima().iter().map(|&i| cone.map[i]).collect();
    let mut collapsed = cur.clone();
    for &b in &cone.map {
        let mut value: Option<ModMorphism> = None;
        for &t in top.iter().filter(|&&t| x.shape.le(b, t)) {
            let via_t = cur.arrow_le(b, t).then(cur.arrow(t, c));
            match &value {
                None => value = Some(via_t),
                Some(v) if *v != via_t => {
                    return Err(LiftError::Internal(format!("collapse at {} depends on the maximum", name(b))));
                }
                Some(_) => {}
            }
        }
        collapsed.arrows.insert((b, c), value.expect("every element lies below a maximum"));
    }
    total = StableIsoFamily::new(collapsed.clone(), total.target.clone(), total.components.clone())?;
    trace.push(TraceStep { element: name(c), kind: StepKind::Collapse, via: Vec::new(), added_free: 0 });

    let mut sub_trace = Vec::new();
    let (lifted, h) = purify_rec(&collapsed, &mut sub_trace)?;
    trace.extend(sub_trace);
    let total = h.as_family().then(&total)?;
    Ok((lifted, total))
}

/// Strictly commutative purely monic diagram stably isomorphic to a stably
/// commutative prediagram over an ind-flat shape.
pub fn lift_diagram(x: &Prediagram) -> Result<LiftResult, LiftError> {
    if !is_ind_flat(&x.shape) {
        return Err(LiftError::NotIndFlat);
    }
    if !x.is_stably_commutative() {
        return Err(LiftError::NotStablyCommutative);
    }
    let mut trace = Vec::new();
    let (lifted, iso) = lift_rec(x, &mut trace)?;
    Ok(LiftResult { lifted, iso, trace, orientation: Orientation::Monic })
}

/// The dual construction: a strictly commutative purely epic diagram over a
/// pro-flat shape, obtained by lifting the dual prediagram.
pub fn lift_diagram_dual(x: &Prediagram) -> Result<LiftResult, LiftError> {
    if !is_pro_flat(&x.shape) {
        return Err(LiftError::NotProFlat);
    }
    if !x.is_stably_commutative() {
        return Err(LiftError::NotStablyCommutative);
    }
    let xd = x.dual();
    let mut trace = Vec::new();
    let (lifted_d, iso_d) = lift_rec(&xd, &mut trace)?;
    let lifted = lifted_d.dual();
    // iso_d: lifted_d -> x*, so its dual runs x -> lifted; invert pointwise
    let back = iso_d.dual();
    let mut comps = Vec::with_capacity(back.components.len());
    for f in &back.components {
        let w = stable_iso_witness(f).ok_or_else(|| LiftError::Internal("dual component is not a stable iso".into()))?;
        comps.push(w.inverse);
    }
    let iso = StableIsoFamily::new(lifted.clone(), x.clone(), comps)?;
    Ok(LiftResult { lifted, iso, trace, orientation: Orientation::Epic })
}

fn check_stably_natural(x: &Prediagram, y: &Prediagram, fhat: &[ModMorphism]) -> Result<(), LiftError> {
    if x.shape != y.shape || fhat.len() != x.len() {
        return Err(LiftError::Diagram(DiagramError::ShapeMismatch));
    }
    for (a, f) in fhat.iter().enumerate() {
        if f.source() != x.object(a) || f.target() != y.object(a) {
            return Err(LiftError::IllTyped(x.shape.name(a).into()));
        }
    }
    for &(a, b) in x.arrows.keys() {
        let d = fhat[a].then(y.arrow(a, b)).sub(&x.arrow(a, b).then(&fhat[b]));
        if is_stably_zero(&d).is_none() {
            return Err(LiftError::NotStablyNatural(x.shape.name(a).into(), x.shape.name(b).into()));
        }
    }
    Ok(())
}

/// Looks for a strict morphism `X -> Y` whose components agree with `fhat`
/// up to maps factoring through bijective objects.
pub fn strict_lift_of_stable_morphism(
    x: &Prediagram,
    y: &Prediagram,
    fhat: &[ModMorphism],
) -> Result<Option<DiagramMorphism>, LiftError> {
    check_stably_natural(x, y, fhat)?;
    let mut sys = LinearSystem::new(x.ring);
    let corr: Vec<_> = (0..x.len()).map(|a| sys.stably_zero_unknown(x.object(a), y.object(a))).collect();
    for (&(a, b), xi) in &x.arrows {
        let eta = y.arrow(a, b);
        let rhs = xi.then(&fhat[b]).sub(&fhat[a].then(eta));
        let terms = [
            Term { left: None, unknown: &corr[a], right: Some(eta.matrix()), sign: 1 },
            Term { left: Some(xi.matrix()), unknown: &corr[b], right: None, sign: -1 },
        ];
        sys.add_map_equation(x.object(a), y.object(b), &terms, Some(rhs.matrix()), Compare::Exact);
    }
    let Some(sol) = sys.solve() else { return Ok(None) };
    let comps = fhat.iter().zip(&corr).map(|(f, u)| f.add(&u.read(&sol.values))).collect();
    Ok(Some(DiagramMorphism::new(x.clone(), y.clone(), comps)?))
}

#[derive(Debug, Clone)]
pub struct MorphismLiftResult {
    pub replaced: Prediagram,
    /// Homotopism `X' -> X`.
    pub g_prime: DiagramMorphism,
    /// Strict morphism `X' -> Y`.
    pub g: DiagramMorphism,
    /// `h_a` with `g'_a f̂_a - g_a = ι h_a`.
    pub certificate: Vec<ModMorphism>,
    pub trace: Vec<TraceStep>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MorphismVerdict {
    pub homotopism: bool,
    pub natural: bool,
    pub purely_monic: bool,
    pub certified: bool,
}

impl MorphismVerdict {
    pub fn passed(&self) -> bool {
        self.homotopism && self.natural && self.purely_monic && self.certified
    }
}

impl MorphismLiftResult {
    pub fn verify(&self, fhat: &[ModMorphism]) -> MorphismVerdict {
        let homotopism = verify_homotopism(&self.g_prime).unwrap_or(false);
        let natural = self.g.naturality_failures().is_empty() && self.g_prime.naturality_failures().is_empty();
        let purely_monic = self.replaced.is_purely_monic() && self.replaced.is_strictly_commutative();
        let certified = fhat.len() == self.certificate.len()
            && (0..fhat.len()).all(|a| {
                let diff = self.g_prime.components[a].then(&fhat[a]).sub(&self.g.components[a]);
                let (_, iota) = bijective_embedding(diff.source());
                iota.then(&self.certificate[a]) == diff
            });
        MorphismVerdict { homotopism, natural, purely_monic, certified }
    }
}

fn lift_morphism_rec(
    x: &Prediagram,
    y: &Prediagram,
    fhat: &[ModMorphism],
    trace: &mut Vec<TraceStep>,
) -> Result<(Prediagram, DiagramMorphism, DiagramMorphism), LiftError> {
    if x.is_empty() {
        return Ok((x.clone(), DiagramMorphism::identity(x), DiagramMorphism::new(x.clone(), y.clone(), Vec::new())?));
    }
    let (c, rest) = first_max(x);
    let xs = x.restrict(&rest);
    let ys = y.restrict(&rest);
    let fs: Vec<ModMorphism> = rest.iter().map(|&p| fhat[p].clone()).collect();
    let (x1, hp, h) = lift_morphism_rec(&xs, &ys, &fs, trace)?;

    let x2 = extend_at_max(&x1, x, c, &rest, x.object(c).clone(), |i, p| hp.components[i].then(x.arrow(p, c)));
    let pos = |p: usize| rest.iter().position(|&q| q == p).unwrap();

    let cone = x.shape.cone(c, ConeMode::StrictDown);
    let tops: Vec<usize> = cone.source.maxima().iter().map(|&i| cone.map[i]).collect();
    let sum = ModObject::sum_of(x.ring, &tops.iter().map(|&a| x2.object(a).clone()).collect::<Vec<_>>());
    let (n, iota) = bijective_embedding(&sum);
    let mut offsets = Vec::with_capacity(tops.len());
    let mut off = 0;
    for &a in &tops {
        offsets.push(off);
        off += x2.object(a).rank();
    }
    let i_a: Vec<ModMorphism> =
        tops.iter().zip(&offsets).map(|(&a, &o)| iota.restrict_rows(o, x2.object(a).rank())).collect();
    let rhs_parts: Vec<ModMorphism> = tops
        .iter()
        .map(|&a| h.components[pos(a)].then(y.arrow(a, c)).sub(&x2.arrow(a, c).then(&fhat[c])))
        .collect();
    let rhs = ModMorphism::from_sum(y.object(c), &rhs_parts);
    let s = solve(&iota, &rhs, Side::ThroughSource)
        .map_err(|e| LiftError::Internal(e.to_string()))?
        .ok_or_else(|| LiftError::PreconditionViolated("representatives are not stably natural".into()))?;

    let xc = x.object(c).clone();
    let mut xp = x2.clone();
    xp.objects[c] = xc.direct_sum(&n);
    for &b in &cone.map {
        let k = tops.iter().position(|&t| x.shape.le(b, t)).expect("quasitree: a maximum above b");
        let a = tops[k];
        let xi_ba = x2.arrow_le(b, a);
        let arrow = ModMorphism::into_sum(x2.object(b), &[xi_ba.then(x2.arrow(a, c)), xi_ba.then(&i_a[k])]);
        xp.arrows.insert((b, c), arrow);
    }
    trace.push(TraceStep {
        element: x.shape.name(c).to_string(),
        kind: StepKind::MorphismReplacement,
        via: tops.iter().map(|&a| x.shape.name(a).to_string()).collect(),
        added_free: n.rank(),
    });

    let proj = ModMorphism::from_sum(&xc, &[ModMorphism::identity(&xc), ModMorphism::zero(&n, &xc)]);
    let gp_comps = extend_components(&hp.components, &rest, proj);
    let g_prime = DiagramMorphism::new(xp.clone(), x.clone(), gp_comps)?;
    let gc = ModMorphism::from_sum(y.object(c), &[fhat[c].clone(), s]);
    let g_comps = extend_components(&h.components, &rest, gc);
    let g = DiagramMorphism::new(xp.clone(), y.clone(), g_comps)?;
    Ok((xp, g_prime, g))
}

/// Given purely monic diagrams `X`, `Y` over a quasitree and stably natural
/// representatives `fhat`, builds a homotopism `g': X' -> X` and a strict
/// morphism `g: X' -> Y` with `g' fhat = g` in the stable category.
pub fn lift_morphism(
    x: &Prediagram,
    y: &Prediagram,
    fhat: &[ModMorphism],
) -> Result<MorphismLiftResult, LiftError> {
    if !quasitree_check(&x.shape).map_err(|e| LiftError::Internal(e.to_string()))? {
        return Err(LiftError::NotQuasitree);
    }
    for (d, label) in [(x, "source"), (y, "target")] {
        if !d.is_strictly_commutative() || !d.is_purely_monic() {
            return Err(LiftError::PreconditionViolated(format!("{label} is not a purely monic diagram")));
        }
    }
    check_stably_natural(x, y, fhat)?;
    let mut trace = Vec::new();
    let (replaced, g_prime, g) = lift_morphism_rec(x, y, fhat, &mut trace)?;
    let mut certificate = Vec::with_capacity(fhat.len());
    for a in 0..fhat.len() {
        let diff = g_prime.components[a].then(&fhat[a]).sub(&g.components[a]);
        certificate.push(is_stably_zero(&diff).ok_or_else(|| LiftError::Internal("uncertified component".into()))?);
    }
    Ok(MorphismLiftResult { replaced, g_prime, g, certificate, trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen;
    use proptest::prelude::*;
    use crate::diagram::verify_stable_iso;
    use crate::modcat::{Mat, RingParams};
    use crate::poset::Poset;

    fn ring() -> RingParams {
        RingParams::new(3, 2).unwrap()
    }

    fn obj(e: &[u32]) -> ModObject {
        ModObject::new(ring(), e.to_vec()).unwrap()
    }

    fn scalar(a: &ModObject, b: &ModObject, m: i64) -> ModMorphism {
        ModMorphism::new(a.clone(), b.clone(), Mat::from_rows(&[vec![m]])).unwrap()
    }

    fn delta2() -> Prediagram {
        let objects = vec![obj(&[1]), obj(&[1]), obj(&[2])];
        let mut arrows = BTreeMap::new();
        arrows.insert((0, 1), ModMorphism::zero(&objects[0], &objects[1]));
        arrows.insert((1, 2), ModMorphism::zero(&objects[1], &objects[2]));
        arrows.insert((0, 2), scalar(&objects[0], &objects[2], 3));
        Prediagram::new(Poset::chain(2), ring(), objects, arrows).unwrap()
    }

    #[test]
    fn replacement_with_zero_summand_is_identity() {
        let x = delta2();
        let (y, fam) = replace_at(&x, 1, &BTreeMap::new(), &BTreeMap::new(), &ModObject::zero(ring())).unwrap();
        assert_eq!(y, x);
        assert!(fam.is_strictly_natural());
    }

    #[test]
    fn replacement_at_interior_is_only_stably_natural() {
        let x = delta2();
        let n = ModObject::free(ring(), 1);
        let mut eta = BTreeMap::new();
        eta.insert(2, scalar(&n, x.object(2), 1));
        let (_, fam) = replace_at(&x, 1, &eta, &BTreeMap::new(), &n).unwrap();
        assert!(verify_stable_iso(&fam).unwrap());
        assert!(!fam.is_strictly_natural());
        let (_, fam) = replace_at(&x, 2, &BTreeMap::new(), &BTreeMap::new(), &n).unwrap();
        assert!(fam.is_strictly_natural());
    }

    #[test]
    fn purify_single_arrow() {
        let objects = vec![obj(&[1]), ModObject::zero(ring())];
        let mut arrows = BTreeMap::new();
        arrows.insert((0, 1), ModMorphism::zero(&objects[0], &objects[1]));
        let x = Prediagram::new(Poset::chain(1), ring(), objects, arrows).unwrap();
        let (y, h) = purify_at_max(&x, 1).unwrap();
        assert_eq!(y.object(1), &obj(&[2]));
        assert_eq!(y.arrow(0, 1).matrix().get(0, 0), 3);
        assert!(y.is_purely_monic());
        assert!(verify_homotopism(&h).unwrap());
    }

    #[test]
    fn add_commutativity_on_chain() {
        let objects = vec![obj(&[1]), obj(&[2]), obj(&[2])];
        let mut arrows = BTreeMap::new();
        arrows.insert((0, 1), scalar(&objects[0], &objects[1], 3));
        arrows.insert((1, 2), scalar(&objects[1], &objects[2], 1));
        arrows.insert((0, 2), scalar(&objects[0], &objects[2], 6));
        let x = Prediagram::new(Poset::chain(2), ring(), objects, arrows).unwrap();
        assert!(x.is_stably_commutative() && !x.is_strictly_commutative());
        let (y, fam) = add_commutativity(&x, 2, 1, 0).unwrap();
        assert_eq!(*y.arrow(0, 2), y.arrow(0, 1).then(y.arrow(1, 2)));
        assert!(verify_stable_iso(&fam).unwrap());
    }

    #[test]
    fn lift_chain_example() {
        let x = delta2();
        let res = lift_diagram(&x).unwrap();
        assert!(res.verify().passed(), "{:?}", res.verify());
        let dual = lift_diagram_dual(&x).unwrap();
        assert!(dual.verify().passed(), "{:?}", dual.verify());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn strict_monic_input_is_fixed(seed in any::<u64>()) {
            let mut r = gen::rng(seed);
            let shape = gen::random_ind_flat_poset(&mut r, 6);
            let ring = gen::random_ring(&mut r, &[2, 3], &[2, 3]);
            let x = gen::random_monic_diagram(&mut r, &shape, ring, 3);
            let res = lift_diagram(&x).unwrap();
            prop_assert_eq!(res.added_free_rank(), 0);
            prop_assert_eq!(&res.lifted, &x);
            prop_assert!(res.iso.is_strictly_natural());
        }

        #[test]
        fn lifting_is_idempotent(seed in any::<u64>()) {
            let mut r = gen::rng(seed);
            let shape = gen::random_ind_flat_poset(&mut r, 6);
            let ring = gen::random_ring(&mut r, &[2, 3], &[2, 3]);
            let x = gen::random_stable_prediagram(&mut r, &shape, ring, 3);
            let once = lift_diagram(&x).unwrap();
            prop_assert!(once.verify().passed());
            let twice = lift_diagram(&once.lifted).unwrap();
            prop_assert_eq!(&twice.lifted, &once.lifted);
        }

        #[test]
        fn dual_lift_of_dual_input(seed in any::<u64>()) {
            let mut r = gen::rng(seed);
            let shape = gen::random_ind_flat_poset(&mut r, 5);
            let ring = gen::random_ring(&mut r, &[2, 3], &[2, 3]);
            let x = gen::random_stable_prediagram(&mut r, &shape, ring, 2);
            let res = lift_diagram_dual(&x.dual()).unwrap();
            prop_assert!(res.verify().passed());
            prop_assert!(res.lifted.dual().is_purely_monic());
        }
    }
}

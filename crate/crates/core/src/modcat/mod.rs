//! Finitely generated `Z/p^k`-modules and the exact linear algebra on them.
//!
//! An object is a list of cyclic exponents `e_i`, standing for
//! `Z/p^{e_1} ⊕ ... ⊕ Z/p^{e_r}`. Elements are row vectors and a morphism
//! acts on the right, so `f.compose(&g)` has matrix `M_f · M_g`.
//! Column `j` of a morphism matrix is kept reduced modulo `p^{f_j}`, where
//! `f_j` is the exponent of the `j`-th target generator.

pub mod matrix;
pub mod snf;
pub(crate) mod system;

use std::fmt;

use num_integer::Integer;
use thiserror::Error;

pub use matrix::Mat;
pub use snf::{normal_form, NormalForm};

use system::{Compare, LinearSystem, Term};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ModError {
    #[error("{0} is not a prime")]
    InvalidPrime(u64),
    #[error("exponent cap must be at least 1")]
    InvalidExponent,
    #[error("modulus {p}^{k} does not fit the 31-bit arithmetic budget")]
    ModulusTooLarge { p: u64, k: u32 },
    #[error("cyclic exponent {exponent} outside [1, {k}]")]
    ExponentOutOfRange { exponent: u32, k: u32 },
    #[error("objects live over different rings")]
    RingMismatch,
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("entry ({row}, {col}) = {entry} is not divisible by p^{need}")]
    IllTyped { row: usize, col: usize, entry: i64, need: u32 },
}

/// The coefficient ring `Z/p^k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct RingParams {
    pub p: u64,
    pub k: u32,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2;
    while d * d <= p {
        if p.is_multiple_of(d) {
            return false;
        }
        d += 1;
    }
    true
}

impl RingParams {
    pub fn new(p: u64, k: u32) -> Result<Self, ModError> {
        if !is_prime(p) {
            return Err(ModError::InvalidPrime(p));
        }
        if k == 0 {
            return Err(ModError::InvalidExponent);
        }
        match p.checked_pow(k) {
            Some(q) if q <= 1 << 31 => Ok(RingParams { p, k }),
            _ => Err(ModError::ModulusTooLarge { p, k }),
        }
    }

    #[inline]
    pub fn modulus(&self) -> i64 {
        self.pow_p(self.k)
    }

    #[inline]
    pub fn pow_p(&self, e: u32) -> i64 {
        (self.p as i64).pow(e)
    }

    #[inline]
    pub fn reduce(&self, x: i64) -> i64 {
        x.rem_euclid(self.modulus())
    }

    /// `p`-adic valuation of `x` in `Z/p^k`; zero has valuation `k`.
    pub fn valuation(&self, x: i64) -> u32 {
        let mut x = self.reduce(x);
        if x == 0 {
            return self.k;
        }
        let p = self.p as i64;
        let mut v = 0;
        while x % p == 0 {
            x /= p;
            v += 1;
        }
        v
    }

    /// Inverse of a unit. Panics on non-units.
    pub fn inverse_unit(&self, u: i64) -> i64 {
        let q = self.modulus();
        let g = self.reduce(u).extended_gcd(&q);
        assert_eq!(g.gcd, 1, "{u} is not a unit mod {q}");
        g.x.rem_euclid(q)
    }

    pub fn is_invertible(&self, m: &Mat) -> bool {
        m.rows() == m.cols() && normal_form(*self, m).diag_exponents.iter().all(|&d| d == 0)
    }
}

impl fmt::Display for RingParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.k)
    }
}

/// `⊕_i Z/p^{e_i}`; the empty list is the zero module.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ModObject {
    pub ring: RingParams,
    pub exponents: Vec<u32>,
}

impl ModObject {
    pub fn new(ring: RingParams, exponents: Vec<u32>) -> Result<Self, ModError> {
        if let Some(&e) = exponents.iter().find(|&&e| e == 0 || e > ring.k) {
            return Err(ModError::ExponentOutOfRange { exponent: e, k: ring.k });
        }
        Ok(ModObject { ring, exponents })
    }

    pub fn zero(ring: RingParams) -> Self {
        ModObject { ring, exponents: Vec::new() }
    }

    pub fn free(ring: RingParams, rank: usize) -> Self {
        ModObject { ring, exponents: vec![ring.k; rank] }
    }

    pub fn cyclic(ring: RingParams, e: u32) -> Result<Self, ModError> {
        Self::new(ring, vec![e])
    }

    pub fn rank(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_zero(&self) -> bool {
        self.exponents.is_empty()
    }

    /// Bijective objects are exactly the free ones.
    pub fn is_free(&self) -> bool {
        self.exponents.iter().all(|&e| e == self.ring.k)
    }

    /// `log_p` of the number of elements.
    pub fn length(&self) -> u32 {
        self.exponents.iter().sum()
    }

    pub fn direct_sum(&self, other: &ModObject) -> ModObject {
        assert_eq!(self.ring, other.ring, "ring mismatch");
        let mut exponents = self.exponents.clone();
        exponents.extend_from_slice(&other.exponents);
        ModObject { ring: self.ring, exponents }
    }

    pub fn sum_of(ring: RingParams, parts: &[ModObject]) -> ModObject {
        let mut exponents = Vec::new();
        for x in parts {
            exponents.extend_from_slice(&x.exponents);
        }
        ModObject { ring, exponents }
    }

    pub fn invariants(&self) -> Vec<u32> {
        let mut e = self.exponents.clone();
        e.sort_unstable();
        e
    }

    /// Finite abelian `p`-groups are classified by their sorted exponents.
    pub fn isomorphic(&self, other: &ModObject) -> bool {
        self.ring == other.ring && self.invariants() == other.invariants()
    }
}

impl fmt::Display for ModObject {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exponents.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> =
            self.exponents.iter().map(|&e| format!("Z/{}", self.ring.pow_p(e))).collect();
        write!(f, "{}", parts.join("+"))
    }
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct ModMorphism {
    source: ModObject,
    target: ModObject,
    matrix: Mat,
}

impl fmt::Debug for ModMorphism {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {} {:?}", self.source, self.target, self.matrix)
    }
}

fn normalized(target: &ModObject, m: Mat) -> Mat {
    let ring = target.ring;
    m.map(|_, j, x| x.rem_euclid(ring.pow_p(target.exponents[j])))
}

impl ModMorphism {
    pub fn new(source: ModObject, target: ModObject, matrix: Mat) -> Result<Self, ModError> {
        if source.ring != target.ring {
            return Err(ModError::RingMismatch);
        }
        if matrix.rows() != source.rank() || matrix.cols() != target.rank() {
            return Err(ModError::ShapeMismatch(format!(
                "matrix is {}x{}, objects need {}x{}",
                matrix.rows(),
                matrix.cols(),
                source.rank(),
                target.rank()
            )));
        }
        let f = ModMorphism { matrix: normalized(&target, matrix), source, target };
        f.validate()?;
        Ok(f)
    }

    pub fn from_rows(source: ModObject, target: ModObject, rows: &[Vec<i64>]) -> Result<Self, ModError> {
        let m = if rows.is_empty() { Mat::zeros(0, target.rank()) } else { Mat::from_rows(rows) };
        Self::new(source, target, m)
    }

    /// For matrices that are well defined by construction.
    pub(crate) fn from_mat_unchecked(source: ModObject, target: ModObject, matrix: Mat) -> Self {
        let f = ModMorphism { matrix: normalized(&target, matrix), source, target };
        debug_assert!(f.validate().is_ok(), "ill-typed morphism {f:?}");
        f
    }

    /// Checks the divisibility invariant.
    pub fn validate(&self) -> Result<(), ModError> {
        let ring = self.source.ring;
        for (i, &e) in self.source.exponents.iter().enumerate() {
            for (j, &f) in self.target.exponents.iter().enumerate() {
                let need = f.saturating_sub(e);
                let x = self.matrix.get(i, j);
                if x % ring.pow_p(need) != 0 {
                    return Err(ModError::IllTyped { row: i, col: j, entry: x, need });
                }
            }
        }
        Ok(())
    }

    pub fn identity(x: &ModObject) -> Self {
        ModMorphism { source: x.clone(), target: x.clone(), matrix: Mat::identity(x.rank()) }
    }

    pub fn zero(source: &ModObject, target: &ModObject) -> Self {
        ModMorphism {
            source: source.clone(),
            target: target.clone(),
            matrix: Mat::zeros(source.rank(), target.rank()),
        }
    }

    pub fn source(&self) -> &ModObject {
        &self.source
    }

    pub fn target(&self) -> &ModObject {
        &self.target
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn ring(&self) -> RingParams {
        self.source.ring
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.is_zero()
    }

    /// `self` followed by `next`.
    pub fn compose(&self, next: &ModMorphism) -> Result<ModMorphism, ModError> {
        if self.ring() != next.ring() {
            return Err(ModError::RingMismatch);
        }
        if self.target != next.source {
            return Err(ModError::ShapeMismatch(format!(
                "cannot compose {} -> {} with {} -> {}",
                self.source, self.target, next.source, next.target
            )));
        }
        Ok(self.then(next))
    }

    /// Panicking form of [`compose`](Self::compose) for internal use.
    pub fn then(&self, next: &ModMorphism) -> ModMorphism {
        assert_eq!(self.target, next.source, "composition of mismatched morphisms");
        let m = self.matrix.mul_mod(&next.matrix, self.ring().modulus());
        ModMorphism::from_mat_unchecked(self.source.clone(), next.target.clone(), m)
    }

    fn same_shape(&self, other: &ModMorphism) {
        assert!(
            self.source == other.source && self.target == other.target,
            "morphisms {self:?} and {other:?} are not parallel"
        );
    }

    pub fn add(&self, other: &ModMorphism) -> ModMorphism {
        self.same_shape(other);
        let m = self.matrix.map(|i, j, x| x + other.matrix.get(i, j));
        ModMorphism::from_mat_unchecked(self.source.clone(), self.target.clone(), m)
    }

    pub fn sub(&self, other: &ModMorphism) -> ModMorphism {
        self.same_shape(other);
        let m = self.matrix.map(|i, j, x| x - other.matrix.get(i, j));
        ModMorphism::from_mat_unchecked(self.source.clone(), self.target.clone(), m)
    }

    pub fn neg(&self) -> ModMorphism {
        self.scale(-1)
    }

    pub fn scale(&self, c: i64) -> ModMorphism {
        let q = self.ring().modulus();
        let c = c.rem_euclid(q);
        let m = self.matrix.map(|_, _, x| x * c % q);
        ModMorphism::from_mat_unchecked(self.source.clone(), self.target.clone(), m)
    }

    pub fn direct_sum(&self, other: &ModMorphism) -> ModMorphism {
        ModMorphism::from_mat_unchecked(
            self.source.direct_sum(&other.source),
            self.target.direct_sum(&other.target),
            self.matrix.block_diag(&other.matrix),
        )
    }

    /// `(f_1 | ... | f_n): A -> B_1 ⊕ ... ⊕ B_n` for maps with a common source.
    pub fn into_sum(source: &ModObject, parts: &[ModMorphism]) -> ModMorphism {
        let ring = source.ring;
        let mut m = Mat::zeros(source.rank(), 0);
        let mut targets = Vec::with_capacity(parts.len());
        for f in parts {
            assert_eq!(&f.source, source, "into_sum: differing sources");
            m = m.hcat(&f.matrix);
            targets.push(f.target.clone());
        }
        ModMorphism::from_mat_unchecked(source.clone(), ModObject::sum_of(ring, &targets), m)
    }

    /// `[f_1; ...; f_n]: A_1 ⊕ ... ⊕ A_n -> B` for maps with a common target.
    pub fn from_sum(target: &ModObject, parts: &[ModMorphism]) -> ModMorphism {
        let ring = target.ring;
        let mut m = Mat::zeros(0, target.rank());
        let mut sources = Vec::with_capacity(parts.len());
        for f in parts {
            assert_eq!(&f.target, target, "from_sum: differing targets");
            m = m.vcat(&f.matrix);
            sources.push(f.source.clone());
        }
        ModMorphism::from_mat_unchecked(ModObject::sum_of(ring, &sources), target.clone(), m)
    }

    /// Rows `start..start+len` as a map out of the corresponding summand.
    pub fn restrict_rows(&self, start: usize, len: usize) -> ModMorphism {
        let src = ModObject { ring: self.ring(), exponents: self.source.exponents[start..start + len].to_vec() };
        ModMorphism::from_mat_unchecked(src, self.target.clone(), self.matrix.sub_rows(start, len))
    }

    /// Columns `start..start+len` as a map into the corresponding summand.
    pub fn restrict_cols(&self, start: usize, len: usize) -> ModMorphism {
        let tgt = ModObject { ring: self.ring(), exponents: self.target.exponents[start..start + len].to_vec() };
        ModMorphism::from_mat_unchecked(self.source.clone(), tgt, self.matrix.sub_cols(start, len))
    }

    /// The Pontryagin dual `Y* -> X*`, identifying `(Z/p^e)*` with `Z/p^e`.
    pub fn dual(&self) -> ModMorphism {
        let ring = self.ring();
        let m = Mat::from_fn(self.target.rank(), self.source.rank(), |j, i| {
            let (e, f) = (self.source.exponents[i], self.target.exponents[j]);
            let x = self.matrix.get(i, j);
            let y = if e >= f { x * ring.pow_p(e - f) } else { x / ring.pow_p(f - e) };
            y.rem_euclid(ring.pow_p(e))
        });
        ModMorphism::from_mat_unchecked(self.target.clone(), self.source.clone(), m)
    }
}

/// Canonical injections into `⊕ parts`.
pub fn inclusions(parts: &[ModObject], ring: RingParams) -> Vec<ModMorphism> {
    let total = ModObject::sum_of(ring, parts);
    let mut off = 0;
    parts
        .iter()
        .map(|x| {
            let m = Mat::from_fn(x.rank(), total.rank(), |i, j| (j == off + i) as i64);
            off += x.rank();
            ModMorphism::from_mat_unchecked(x.clone(), total.clone(), m)
        })
        .collect()
}

/// Canonical projections out of `⊕ parts`.
pub fn projections(parts: &[ModObject], ring: RingParams) -> Vec<ModMorphism> {
    let total = ModObject::sum_of(ring, parts);
    let mut off = 0;
    parts
        .iter()
        .map(|x| {
            let m = Mat::from_fn(total.rank(), x.rank(), |i, j| (i == off + j) as i64);
            off += x.rank();
            ModMorphism::from_mat_unchecked(total.clone(), x.clone(), m)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    /// Find `x` with `f · x = target`.
    ThroughSource,
    /// Find `x` with `x · f = target`.
    ThroughTarget,
}

/// Solves a one-sided factorization problem; the returned solution has the
/// lexicographically smallest entries.
pub fn solve(f: &ModMorphism, target: &ModMorphism, side: Side) -> Result<Option<ModMorphism>, ModError> {
    if f.ring() != target.ring() {
        return Err(ModError::RingMismatch);
    }
    let ring = f.ring();
    let mut sys = LinearSystem::new(ring);
    let x = match side {
        Side::ThroughSource => {
            if f.source != target.source {
                return Err(ModError::ShapeMismatch("solve: sources differ".into()));
            }
            let x = sys.unknown(&f.target, &target.target);
            let terms = [Term { left: Some(&f.matrix), unknown: &x, right: None, sign: 1 }];
            sys.add_map_equation(&target.source, &target.target, &terms, Some(&target.matrix), Compare::Exact);
            x
        }
        Side::ThroughTarget => {
            if f.target != target.target {
                return Err(ModError::ShapeMismatch("solve: targets differ".into()));
            }
            let x = sys.unknown(&target.source, &f.source);
            let terms = [Term { left: None, unknown: &x, right: Some(&f.matrix), sign: 1 }];
            sys.add_map_equation(&target.source, &target.target, &terms, Some(&target.matrix), Compare::Exact);
            x
        }
    };
    Ok(sys.solve().map(|s| x.read(&s.values)))
}

#[derive(Debug, Clone)]
pub struct Cokernel {
    pub object: ModObject,
    pub projection: ModMorphism,
}

pub fn cokernel(f: &ModMorphism) -> Cokernel {
    let ring = f.ring();
    let tgt = &f.target;
    let rels = Mat::from_fn(tgt.rank(), tgt.rank(), |i, j| {
        if i == j {
            ring.pow_p(tgt.exponents[i]) % ring.modulus()
        } else {
            0
        }
    });
    let stacked = f.matrix.vcat(&rels);
    let red = snf::reduce(ring, stacked, false, true, Vec::new());
    let v = red.right.expect("right transform requested");
    let keep: Vec<usize> = (0..tgt.rank()).filter(|&t| red.diag[t] >= 1).collect();
    let object = ModObject { ring, exponents: keep.iter().map(|&t| red.diag[t]).collect() };
    let m = Mat::from_fn(tgt.rank(), keep.len(), |i, c| v.get(i, keep[c]));
    let projection = ModMorphism::from_mat_unchecked(tgt.clone(), object.clone(), m);
    Cokernel { object, projection }
}

pub fn is_epi(f: &ModMorphism) -> bool {
    cokernel(f).object.is_zero()
}

/// Injectivity via `|image| = |target| / |coker|`.
pub fn is_mono(f: &ModMorphism) -> bool {
    f.source.length() + cokernel(f).object.length() == f.target.length()
}

pub fn is_iso(f: &ModMorphism) -> bool {
    is_mono(f) && is_epi(f)
}

#[derive(Debug, Clone)]
pub struct Pushout {
    pub object: ModObject,
    pub from_left: ModMorphism,
    pub from_right: ModMorphism,
}

/// Pushout of `f: W -> L` and `g: W -> Y`.
pub fn pushout(f: &ModMorphism, g: &ModMorphism) -> Result<Pushout, ModError> {
    if f.source != g.source {
        return Err(ModError::ShapeMismatch("pushout: sources differ".into()));
    }
    if f.source.is_zero() {
        let mut inc = inclusions(&[f.target.clone(), g.target.clone()], f.ring());
        let from_right = inc.pop().unwrap();
        let from_left = inc.pop().unwrap();
        return Ok(Pushout { object: from_left.target.clone(), from_left, from_right });
    }
    if *f == ModMorphism::identity(&f.source) {
        return Ok(Pushout {
            object: g.target.clone(),
            from_left: g.clone(),
            from_right: ModMorphism::identity(&g.target),
        });
    }
    if *g == ModMorphism::identity(&g.source) {
        return Ok(Pushout {
            object: f.target.clone(),
            from_left: ModMorphism::identity(&f.target),
            from_right: f.clone(),
        });
    }
    let joint = ModMorphism::into_sum(&f.source, &[f.clone(), g.neg()]);
    let ck = cokernel(&joint);
    let (l, y) = (f.target.rank(), g.target.rank());
    Ok(Pushout {
        from_left: ck.projection.restrict_rows(0, l),
        from_right: ck.projection.restrict_rows(l, y),
        object: ck.object,
    })
}

/// `X ↣ ⊕ Z/p^k` given by `p^{k - e_i}` on each generator.
pub fn bijective_embedding(x: &ModObject) -> (ModObject, ModMorphism) {
    let ring = x.ring;
    let n = ModObject::free(ring, x.rank());
    let m = Mat::from_fn(x.rank(), x.rank(), |i, j| {
        if i == j {
            ring.pow_p(ring.k - x.exponents[i])
        } else {
            0
        }
    });
    let iota = ModMorphism::from_mat_unchecked(x.clone(), n.clone(), m);
    (n, iota)
}

/// A factorization `f = ι_X · h` through the canonical bijective embedding.
pub fn is_stably_zero(f: &ModMorphism) -> Option<ModMorphism> {
    let ring = f.ring();
    let (n, _) = bijective_embedding(&f.source);
    let mut h = Mat::zeros(n.rank(), f.target.rank());
    for (i, &e) in f.source.exponents.iter().enumerate() {
        let s = ring.k - e;
        for (j, &t) in f.target.exponents.iter().enumerate() {
            let x = f.matrix.get(i, j);
            if x % ring.pow_p(s.min(t)) != 0 {
                return None;
            }
            if s < t {
                h.set(i, j, x / ring.pow_p(s));
            }
        }
    }
    Some(ModMorphism::from_mat_unchecked(n, f.target.clone(), h))
}

pub fn stably_equal(f: &ModMorphism, g: &ModMorphism) -> bool {
    is_stably_zero(&f.sub(g)).is_some()
}

#[derive(Debug, Clone)]
pub struct StableIsoWitness {
    /// `g: Y -> X`
    pub inverse: ModMorphism,
    /// `f g - 1 = ι_X h_source`
    pub h_source: ModMorphism,
    /// `g f - 1 = ι_Y h_target`
    pub h_target: ModMorphism,
}

/// Searches for a stable inverse of `f: X -> Y`.
pub fn stable_iso_witness(f: &ModMorphism) -> Option<StableIsoWitness> {
    let ring = f.ring();
    let (x, y) = (&f.source, &f.target);
    let mut sys = LinearSystem::new(ring);
    let g = sys.unknown(y, x);
    let id_x = Mat::identity(x.rank());
    let id_y = Mat::identity(y.rank());
    sys.add_map_equation(
        x,
        x,
        &[Term { left: Some(&f.matrix), unknown: &g, right: None, sign: 1 }],
        Some(&id_x),
        Compare::Stably,
    );
    sys.add_map_equation(
        y,
        y,
        &[Term { left: None, unknown: &g, right: Some(&f.matrix), sign: 1 }],
        Some(&id_y),
        Compare::Stably,
    );
    let sol = sys.solve()?;
    let inverse = g.read(&sol.values);
    let h_source = is_stably_zero(&f.then(&inverse).sub(&ModMorphism::identity(x)))?;
    let h_target = is_stably_zero(&inverse.then(f).sub(&ModMorphism::identity(y)))?;
    Some(StableIsoWitness { inverse, h_source, h_target })
}

pub fn is_stable_iso(f: &ModMorphism) -> bool {
    stable_iso_witness(f).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::collection::vec;
    use proptest::prelude::*;
    use std::collections::BTreeSet;

    fn ring(p: u64, k: u32) -> RingParams {
        RingParams::new(p, k).unwrap()
    }

    fn obj(r: RingParams, e: &[u32]) -> ModObject {
        ModObject::new(r, e.to_vec()).unwrap()
    }

    fn hom(a: &ModObject, b: &ModObject, rows: &[Vec<i64>]) -> ModMorphism {
        ModMorphism::from_rows(a.clone(), b.clone(), rows).unwrap()
    }

    /// Every well-typed morphism `a -> b`, by brute force.
    fn all_morphisms(a: &ModObject, b: &ModObject) -> Vec<ModMorphism> {
        let r = a.ring;
        let mut choices: Vec<Vec<i64>> = Vec::new();
        for &e in &a.exponents {
            for &f in &b.exponents {
                let step = r.pow_p(f.saturating_sub(e));
                choices.push((0..r.pow_p(f)).step_by(step as usize).collect());
            }
        }
        let mut out = Vec::new();
        let mut idx = vec![0usize; choices.len()];
        loop {
            let vals: Vec<i64> = idx.iter().zip(&choices).map(|(&i, c)| c[i]).collect();
            let m = Mat::from_fn(a.rank(), b.rank(), |i, j| vals[i * b.rank() + j]);
            out.push(ModMorphism::new(a.clone(), b.clone(), m).unwrap());
            let mut t = 0;
            while t < idx.len() {
                idx[t] += 1;
                if idx[t] < choices[t].len() {
                    break;
                }
                idx[t] = 0;
                t += 1;
            }
            if t == idx.len() {
                break;
            }
        }
        out
    }

    #[test]
    fn ring_validation() {
        assert_eq!(RingParams::new(4, 2), Err(ModError::InvalidPrime(4)));
        assert_eq!(RingParams::new(3, 0), Err(ModError::InvalidExponent));
        assert!(RingParams::new(2, 31).is_ok());
        assert!(matches!(RingParams::new(2, 32), Err(ModError::ModulusTooLarge { .. })));
        let r = ring(3, 3);
        assert_eq!(r.valuation(18), 2);
        assert_eq!(r.valuation(0), 3);
        assert_eq!(r.inverse_unit(2) * 2 % 27, 1);
    }

    #[test]
    fn ill_typed_rejected() {
        let r = ring(3, 2);
        let (a, b) = (obj(r, &[1]), obj(r, &[2]));
        assert!(matches!(ModMorphism::from_rows(a.clone(), b.clone(), &[vec![1]]), Err(ModError::IllTyped { .. })));
        assert!(ModMorphism::from_rows(a, b, &[vec![3]]).is_ok());
        assert!(ModObject::new(r, vec![3]).is_err());
    }

    #[test]
    fn identity_law() {
        let r = ring(3, 2);
        let (a, b) = (obj(r, &[1, 2]), obj(r, &[2]));
        let f = hom(&a, &b, &[vec![3], vec![5]]);
        assert_eq!(ModMorphism::identity(&a).then(&f), f);
        assert_eq!(f.then(&ModMorphism::identity(&b)), f);
    }

    #[test]
    fn z27_arithmetic() {
        let r = ring(3, 3);
        let (c, z) = (obj(r, &[2]), obj(r, &[3]));
        let a = hom(&c, &c, &[vec![2]]);
        let u = hom(&c, &z, &[vec![3]]);
        let v = hom(&z, &c, &[vec![1]]);
        let at = hom(&z, &z, &[vec![2]]);
        assert_eq!(a.then(&u), u.then(&at));
        assert_eq!(a.then(&u).matrix().get(0, 0), 6);
        assert!(v.then(&a).sub(&at.then(&v)).is_zero());
        let lhs = at.then(&at).sub(&ModMorphism::identity(&z)).sub(&v.then(&u));
        assert!(lhs.is_zero());
    }

    #[test]
    fn solve_examples() {
        let r = ring(3, 2);
        let x = obj(r, &[2]);
        let f = hom(&x, &x, &[vec![3]]);
        let t = hom(&x, &x, &[vec![6]]);
        let s = solve(&f, &t, Side::ThroughSource).unwrap().unwrap();
        assert_eq!(s.matrix().get(0, 0), 2);
        let brute: Vec<i64> =
            all_morphisms(&x, &x).into_iter().filter(|c| f.then(c) == t).map(|c| c.matrix().get(0, 0)).collect();
        assert_eq!(brute, vec![2, 5, 8]);
        let one = ModMorphism::identity(&x);
        assert!(solve(&f, &one, Side::ThroughSource).unwrap().is_none());
        assert!(all_morphisms(&x, &x).iter().all(|c| f.then(c) != one));
        assert_eq!(solve(&one, &t, Side::ThroughTarget).unwrap().unwrap(), t);
    }

    #[test]
    fn mono_epi() {
        let r = ring(3, 3);
        let (a, b) = (obj(r, &[2]), obj(r, &[3]));
        let iota = hom(&a, &b, &[vec![3]]);
        assert!(is_mono(&iota) && !is_epi(&iota));
        let id = ModMorphism::identity(&a);
        assert!(is_mono(&id) && is_epi(&id));
        let r2 = ring(3, 2);
        let (x, xx) = (obj(r2, &[2]), obj(r2, &[2, 2]));
        assert!(is_mono(&hom(&x, &xx, &[vec![2, 1]])));
        assert!(!is_mono(&hom(&x, &xx, &[vec![3, 0]])));
    }

    #[test]
    fn cokernel_examples() {
        let r = ring(3, 2);
        let (x, xx) = (obj(r, &[2]), obj(r, &[2, 2]));
        let ck = cokernel(&hom(&x, &xx, &[vec![1, 4]]));
        assert_eq!(ck.object.exponents, vec![2]);
        assert!(is_epi(&ck.projection));
        let z = ModMorphism::zero(&x, &xx);
        assert!(cokernel(&z).object.isomorphic(&xx));
        assert!(cokernel(&ModMorphism::identity(&xx)).object.is_zero());
    }

    #[test]
    fn pushout_example() {
        let r = ring(3, 2);
        let (w, l) = (obj(r, &[1]), obj(r, &[2]));
        let f = hom(&w, &l, &[vec![3]]);
        let po = pushout(&f, &f).unwrap();
        assert_eq!(po.object.invariants(), vec![1, 2]);
        assert_eq!(f.then(&po.from_left), f.then(&po.from_right));
    }

    #[test]
    fn stably_zero_examples() {
        let r = ring(3, 2);
        let x = obj(r, &[1]);
        let id = ModMorphism::identity(&x);
        assert!(is_stably_zero(&id).is_none());
        let (n, iota) = bijective_embedding(&x);
        assert!(all_morphisms(&n, &x).iter().all(|h| iota.then(h) != id));
        assert!(stable_iso_witness(&ModMorphism::zero(&x, &x)).is_none());
        let h = is_stably_zero(&ModMorphism::zero(&x, &x)).unwrap();
        assert!(h.is_zero());
        let free = obj(r, &[2, 2]);
        let f = hom(&free, &x, &[vec![1], vec![2]]);
        let h = is_stably_zero(&f).unwrap();
        assert_eq!(bijective_embedding(&free).1.then(&h), f);
    }

    #[test]
    fn projection_off_free_summand_is_stable_iso() {
        let r = ring(2, 3);
        let x = obj(r, &[1, 2]);
        let n = ModObject::free(r, 2);
        let xn = x.direct_sum(&n);
        let pr = projections(&[x.clone(), n], r).remove(0);
        let w = stable_iso_witness(&pr).expect("stable iso");
        assert_eq!(w.inverse.source(), &x);
        assert_eq!(w.inverse.target(), &xn);
        assert!(stable_iso_witness(&ModMorphism::identity(&x)).unwrap().h_source.is_zero());
    }

    #[test]
    fn dual_is_involutive() {
        let r = ring(3, 3);
        let (a, b) = (obj(r, &[1, 3]), obj(r, &[2, 3]));
        for f in all_morphisms(&a, &b).iter().step_by(37) {
            assert_eq!(f.dual().dual(), *f);
        }
        let f = hom(&a, &b, &[vec![3, 9], vec![1, 2]]);
        let g = hom(&b, &a, &[vec![1, 9], vec![2, 5]]);
        assert_eq!(f.then(&g).dual(), g.dual().then(&f.dual()));
    }

    /// Every element of `x` as a coordinate vector.
    fn elements(x: &ModObject) -> Vec<Vec<i64>> {
        let mut out = vec![Vec::new()];
        for &e in &x.exponents {
            out = out
                .into_iter()
                .flat_map(|v| {
                    (0..x.ring.pow_p(e)).map(move |c| {
                        let mut w = v.clone();
                        w.push(c);
                        w
                    })
                })
                .collect();
        }
        out
    }

    fn apply(f: &ModMorphism, v: &[i64]) -> Vec<i64> {
        let r = f.ring();
        (0..f.target.rank())
            .map(|j| {
                let s: i64 = v.iter().enumerate().map(|(i, &c)| c * f.matrix.get(i, j)).sum();
                s.rem_euclid(r.pow_p(f.target.exponents[j]))
            })
            .collect()
    }

    fn image_size(f: &ModMorphism) -> usize {
        elements(&f.source).iter().map(|v| apply(f, v)).collect::<BTreeSet<_>>().len()
    }

    fn order(x: &ModObject) -> usize {
        x.ring.pow_p(x.length()) as usize
    }

    /// Subgroup of `(Z/q)^c` generated by the rows, by closure.
    fn row_span_size(m: &Mat, q: i64) -> usize {
        let mut span: BTreeSet<Vec<i64>> = BTreeSet::from([vec![0; m.cols()]]);
        let mut frontier: Vec<Vec<i64>> = span.iter().cloned().collect();
        while let Some(v) = frontier.pop() {
            for i in 0..m.rows() {
                let w: Vec<i64> = v.iter().zip(m.row(i)).map(|(a, b)| (a + b).rem_euclid(q)).collect();
                if span.insert(w.clone()) {
                    frontier.push(w);
                }
            }
        }
        span.len()
    }

    prop_compose! {
        fn small_pair()(p in prop_oneof![Just(2u64), Just(3u64)], k in 1u32..=2)
            (a in vec(1..=k, 0..=2), b in vec(1..=k, 0..=2), seed in any::<u64>(), p in Just(p), k in Just(k))
            -> (ModObject, ModObject, u64)
        {
            let r = RingParams::new(p, k).unwrap();
            (ModObject::new(r, a).unwrap(), ModObject::new(r, b).unwrap(), seed)
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(96))]

        #[test]
        fn normal_form_matches_row_span(
            p in prop_oneof![Just(2u64), Just(3u64)],
            k in 1u32..=3,
            rows in 0usize..=4,
            cols in 1usize..=3,
            entries in vec(any::<u16>(), 12),
        ) {
            let r = RingParams::new(p, k).unwrap();
            let q = r.modulus();
            let m = Mat::from_fn(rows, cols, |i, j| entries[i * cols + j] as i64 % q);
            let nf = normal_form(r, &m);
            prop_assert_eq!(nf.left.mul_mod(&m, q).mul_mod(&nf.right, q), nf.diagonal(r, rows, cols));
            prop_assert!(r.is_invertible(&nf.left) && r.is_invertible(&nf.right));
            prop_assert!(nf.diag_exponents.windows(2).all(|w| w[0] <= w[1]));
            let predicted: i64 = nf.diag_exponents.iter().map(|&d| r.pow_p(k - d)).product();
            prop_assert_eq!(row_span_size(&m, q), predicted as usize);
        }

        #[test]
        fn mono_epi_cokernel_match_enumeration((a, b, seed) in small_pair()) {
            let f = crate::gen::random_morphism(&mut crate::gen::rng(seed), &a, &b);
            let img = image_size(&f);
            prop_assert_eq!(is_mono(&f), img == order(&a));
            prop_assert_eq!(is_epi(&f), img == order(&b));
            let ck = cokernel(&f);
            prop_assert_eq!(order(&ck.object) * img, order(&b));
            prop_assert!(f.then(&ck.projection).is_zero());
            prop_assert!(is_epi(&ck.projection));
        }

        #[test]
        fn solve_matches_enumeration((a, b, seed) in small_pair(), c in vec(1u32..=2, 0..=2)) {
            let r = a.ring;
            let c = ModObject::new(r, c.into_iter().map(|e| e.min(r.k)).collect()).unwrap();
            let mut g = crate::gen::rng(seed);
            let f = crate::gen::random_morphism(&mut g, &a, &b);
            let t = crate::gen::random_morphism(&mut g, &a, &c);
            let found = solve(&f, &t, Side::ThroughSource).unwrap();
            let brute = all_morphisms(&b, &c).into_iter().find(|x| f.then(x) == t);
            prop_assert_eq!(found.is_some(), brute.is_some());
            if let Some(x) = found {
                prop_assert_eq!(f.then(&x), t);
            }
        }

        #[test]
        fn stably_zero_matches_enumeration((a, b, seed) in small_pair()) {
            let f = crate::gen::random_morphism(&mut crate::gen::rng(seed), &a, &b);
            let (n, iota) = bijective_embedding(&a);
            let brute = all_morphisms(&n, &b).iter().any(|h| iota.then(h) == f);
            let h = is_stably_zero(&f);
            prop_assert_eq!(h.is_some(), brute);
            if let Some(h) = h {
                prop_assert_eq!(iota.then(&h), f);
            }
        }

        #[test]
        fn pushout_commutes_with_expected_order((w, l, seed) in small_pair(), y in vec(1u32..=2, 0..=2)) {
            let r = w.ring;
            let y = ModObject::new(r, y.into_iter().map(|e| e.min(r.k)).collect()).unwrap();
            let mut g = crate::gen::rng(seed);
            let f = crate::gen::random_morphism(&mut g, &w, &l);
            let h = crate::gen::random_morphism(&mut g, &w, &y);
            let po = pushout(&f, &h).unwrap();
            prop_assert_eq!(f.then(&po.from_left), h.then(&po.from_right));
            let joint = ModMorphism::into_sum(&w, &[f.clone(), h.neg()]);
            prop_assert_eq!(order(&po.object) * image_size(&joint), order(&l) * order(&y));
        }
    }
}

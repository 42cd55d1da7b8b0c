//! Linear systems over `Z/p^k` whose unknowns are morphism matrices.
//!
//! Each equation carries its own modulus `p^m` (`m <= k`). The solver splits
//! the system into independent blocks, solves each block through the
//! diagonal normal form and then walks the coordinates in order, pushing each
//! one to its smallest representative within the affine solution set. The
//! result is the lexicographically smallest solution.

use std::collections::BTreeMap;

use petgraph::unionfind::UnionFind;

use super::matrix::Mat;
use super::snf::reduce;
use super::{ModMorphism, ModObject, RingParams};

#[derive(Debug, Clone)]
struct Equation {
    terms: Vec<(usize, i64)>,
    rhs: i64,
    modexp: u32,
}

/// Handle to a block of variables describing a morphism `source -> target`.
///
/// Entry `(i, j)` equals `p^{scale[i][j]} * y` for a free variable `y`.
#[derive(Debug, Clone)]
pub(crate) struct Unknown {
    pub source: ModObject,
    pub target: ModObject,
    offset: usize,
    scale: Vec<u32>,
}

impl Unknown {
    fn var(&self, i: usize, j: usize) -> usize {
        self.offset + i * self.target.rank() + j
    }

    fn scale_at(&self, i: usize, j: usize) -> u32 {
        self.scale[i * self.target.rank() + j]
    }

    pub fn read(&self, values: &[i64]) -> ModMorphism {
        let ring = self.source.ring;
        let m = Mat::from_fn(self.source.rank(), self.target.rank(), |i, j| {
            ring.pow_p(self.scale_at(i, j)) * values[self.var(i, j)] % ring.modulus()
        });
        ModMorphism::from_mat_unchecked(self.source.clone(), self.target.clone(), m)
    }
}

/// How entries of a map equation are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Compare {
    /// Equal as morphisms.
    Exact,
    /// Equal modulo maps that factor through a bijective object.
    Stably,
}

/// One summand `sign * left * X * right` of a map equation.
pub(crate) struct Term<'a> {
    pub left: Option<&'a Mat>,
    pub unknown: &'a Unknown,
    pub right: Option<&'a Mat>,
    pub sign: i64,
}

#[derive(Debug, Clone)]
pub(crate) struct LinearSystem {
    ring: RingParams,
    nvars: usize,
    eqs: Vec<Equation>,
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub values: Vec<i64>,
    /// Generators of the homogeneous solution module.
    pub kernel: Vec<Vec<i64>>,
}

impl LinearSystem {
    pub fn new(ring: RingParams) -> Self {
        LinearSystem { ring, nvars: 0, eqs: Vec::new() }
    }

    /// Allocates a well-typed unknown morphism.
    pub fn unknown(&mut self, source: &ModObject, target: &ModObject) -> Unknown {
        self.unknown_with(source, target, |e, f| f.saturating_sub(e))
    }

    /// Allocates an unknown restricted to maps that factor through a bijective.
    pub fn stably_zero_unknown(&mut self, source: &ModObject, target: &ModObject) -> Unknown {
        let k = self.ring.k;
        self.unknown_with(source, target, |e, f| (k - e).min(f))
    }

    fn unknown_with(
        &mut self,
        source: &ModObject,
        target: &ModObject,
        scale: impl Fn(u32, u32) -> u32,
    ) -> Unknown {
        let mut s = Vec::with_capacity(source.rank() * target.rank());
        for &e in &source.exponents {
            for &f in &target.exponents {
                s.push(scale(e, f));
            }
        }
        let u = Unknown { source: source.clone(), target: target.clone(), offset: self.nvars, scale: s };
        self.nvars += source.rank() * target.rank();
        u
    }

    /// `sum(terms) == rhs` as maps `source -> target`; a missing `rhs` is zero.
    pub fn add_map_equation(
        &mut self,
        source: &ModObject,
        target: &ModObject,
        terms: &[Term<'_>],
        rhs: Option<&Mat>,
        compare: Compare,
    ) {
        let ring = self.ring;
        let q = ring.modulus();
        let (a, b) = (source.rank(), target.rank());
        for i in 0..a {
            for j in 0..b {
                let modexp = match compare {
                    Compare::Exact => target.exponents[j],
                    Compare::Stably => target.exponents[j].min(ring.k - source.exponents[i]),
                };
                if modexp == 0 {
                    continue;
                }
                let mut coeffs: BTreeMap<usize, i64> = BTreeMap::new();
                for term in terms {
                    let u = term.unknown;
                    let (pr, qr) = (u.source.rank(), u.target.rank());
                    for p in 0..pr {
                        let l = match term.left {
                            Some(m) => m.get(i, p),
                            None => (i == p) as i64,
                        };
                        if l == 0 {
                            continue;
                        }
                        for qq in 0..qr {
                            let r = match term.right {
                                Some(m) => m.get(qq, j),
                                None => (qq == j) as i64,
                            };
                            if r == 0 {
                                continue;
                            }
                            let c = term.sign * l % q * r % q * ring.pow_p(u.scale_at(p, qq)) % q;
                            *coeffs.entry(u.var(p, qq)).or_insert(0) += c;
                        }
                    }
                }
                let rhs = rhs.map_or(0, |c| c.get(i, j));
                let terms: Vec<(usize, i64)> = coeffs
                    .into_iter()
                    .map(|(v, c)| (v, c.rem_euclid(q)))
                    .filter(|&(_, c)| c != 0)
                    .collect();
                self.eqs.push(Equation { terms, rhs: rhs.rem_euclid(q), modexp });
            }
        }
    }

    /// Lexicographically smallest solution, or `None`.
    pub fn solve(&self) -> Option<Solution> {
        let ring = self.ring;
        let q = ring.modulus();
        let k = ring.k;
        let n = self.nvars;

        // everything scaled to modulus p^k
        let eqs: Vec<Equation> = self
            .eqs
            .iter()
            .filter(|e| e.modexp > 0)
            .map(|e| {
                let s = ring.pow_p(k - e.modexp);
                Equation {
                    terms: e
                        .terms
                        .iter()
                        .map(|&(v, c)| (v, c * s % q))
                        .filter(|&(_, c)| c != 0)
                        .collect(),
                    rhs: e.rhs * s % q,
                    modexp: k,
                }
            })
            .collect();

        let mut uf = UnionFind::<usize>::new(n.max(1));
        for e in &eqs {
            if let Some(&(v0, _)) = e.terms.first() {
                for &(v, _) in &e.terms[1..] {
                    uf.union(v0, v);
                }
            }
        }
        let mut blocks: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for v in 0..n {
            blocks.entry(uf.find(v)).or_default().push(v);
        }
        let mut block_eqs: BTreeMap<usize, Vec<&Equation>> = BTreeMap::new();
        for e in &eqs {
            match e.terms.first() {
                Some(&(v, _)) => block_eqs.entry(uf.find(v)).or_default().push(e),
                None => {
                    if e.rhs != 0 {
                        return None;
                    }
                }
            }
        }

        let mut values = vec![0i64; n];
        let mut kernel = Vec::new();
        for (root, vars) in &blocks {
            let local: BTreeMap<usize, usize> = vars.iter().enumerate().map(|(i, &v)| (v, i)).collect();
            let beqs = block_eqs.get(root).map(Vec::as_slice).unwrap_or(&[]);
            let mut a = Mat::zeros(beqs.len(), vars.len());
            let mut b = Vec::with_capacity(beqs.len());
            for (r, e) in beqs.iter().enumerate() {
                for &(v, c) in &e.terms {
                    a.set(r, local[&v], c);
                }
                b.push(e.rhs);
            }
            let (x, gens) = solve_block(ring, a, b)?;
            for (i, &v) in vars.iter().enumerate() {
                values[v] = x[i];
            }
            for g in gens {
                let mut full = vec![0i64; n];
                for (i, &v) in vars.iter().enumerate() {
                    full[v] = g[i];
                }
                kernel.push(full);
            }
        }
        Some(Solution { values, kernel })
    }
}

/// Solves `a x = b` over `Z/p^k`; returns the lexicographically smallest
/// solution together with kernel generators.
fn solve_block(ring: RingParams, a: Mat, b: Vec<i64>) -> Option<(Vec<i64>, Vec<Vec<i64>>)> {
    let q = ring.modulus();
    let k = ring.k;
    let (r, c) = (a.rows(), a.cols());
    let red = reduce(ring, a, false, true, vec![b]);
    let v = red.right.unwrap();
    let ub = &red.rhs[0];

    let mut z = vec![0i64; c];
    let mut zgens: Vec<(usize, i64)> = Vec::new();
    for t in 0..c {
        if t < r {
            let d = red.diag[t];
            let val = ring.valuation(ub[t]);
            if val < d {
                return None;
            }
            if d < k {
                z[t] = ub[t] / ring.pow_p(d);
                if d > 0 {
                    zgens.push((t, ring.pow_p(k - d)));
                }
            } else {
                zgens.push((t, 1));
            }
        } else {
            zgens.push((t, 1));
        }
    }
    for &x in ub.iter().skip(c) {
        if x != 0 {
            return None;
        }
    }

    let mut x = vec![0i64; c];
    for i in 0..c {
        let mut s = 0i64;
        for t in 0..c {
            s = (s + v.get(i, t) * z[t]) % q;
        }
        x[i] = s;
    }
    let mut gens: Vec<Vec<i64>> = zgens
        .iter()
        .map(|&(t, m)| (0..c).map(|i| v.get(i, t) * m % q).collect())
        .collect();
    let kernel = gens.clone();

    for i in 0..c {
        let best = gens
            .iter()
            .enumerate()
            .filter(|(_, g)| g[i] != 0)
            .min_by_key(|(_, g)| ring.valuation(g[i]))
            .map(|(idx, g)| (idx, ring.valuation(g[i])));
        let Some((gi, vv)) = best else { continue };
        let pv = ring.pow_p(vv);
        let g = gens.swap_remove(gi);
        let unit_inv = ring.inverse_unit(g[i] / pv);
        let target = x[i].rem_euclid(pv);
        let coef = ((x[i] - target) / pv % q * unit_inv).rem_euclid(q);
        for (xj, &gj) in x.iter_mut().zip(&g) {
            *xj = (*xj - coef * gj % q).rem_euclid(q);
        }
        debug_assert_eq!(x[i], target);
        for h in gens.iter_mut() {
            if h[i] != 0 {
                let f = (h[i] / pv % q * unit_inv).rem_euclid(q);
                for (hj, &gj) in h.iter_mut().zip(&g) {
                    *hj = (*hj - f * gj % q).rem_euclid(q);
                }
            }
        }
        let mult = ring.pow_p(ring.k - vv);
        let reduced: Vec<i64> = g.iter().map(|&gj| gj * mult % q).collect();
        if reduced.iter().any(|&e| e != 0) {
            gens.push(reduced);
        }
        gens.retain(|h| h.iter().any(|&e| e != 0));
    }
    Some((x, kernel))
}

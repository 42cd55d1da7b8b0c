//! Isomorphism classes of small posets and their flatness profile.

use std::collections::BTreeMap;
use std::fmt;

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use thiserror::Error;

use crate::crown::{forest_method, is_crown, peel_method, rank_method};
use crate::flatness::{is_ind_flat, is_pro_flat, local_crown, mitchell_check, quasitree_by_crowns, quasitree_by_intervals};
use crate::poset::{CrownKind, Poset};

pub const MAX_CENSUS_SIZE: usize = 8;

/// Labeled posets on `n` points for `n = 0..=7`, computed once by direct
/// enumeration.
pub const LABELED_POSETS: [u64; 8] = [1, 1, 3, 19, 219, 4231, 130023, 6129859];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CensusError {
    #[error("census size {0} out of range 1..={MAX_CENSUS_SIZE}")]
    SizeOutOfRange(usize),
    #[error("thread pool: {0}")]
    ThreadPool(String),
}

/// Row-major leq matrix of the canonical labeling, first entry most
/// significant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalCode {
    pub n: u8,
    pub bits: u64,
}

impl CanonicalCode {
    fn bit(&self, i: usize, j: usize) -> bool {
        let n = self.n as usize;
        self.bits >> (n * n - 1 - (i * n + j)) & 1 == 1
    }

    /// The poset in canonical labeling, elements `p0, p1, ...`.
    pub fn to_poset(&self) -> Poset {
        let n = self.n as usize;
        let leq = (0..n * n).map(|x| self.bit(x / n, x % n)).collect();
        Poset::from_closed((0..n).map(|i| format!("p{i}")).collect(), leq)
    }
}

impl fmt::Display for CanonicalCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{:x}", self.n, self.bits)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CanonicalForm {
    pub code: CanonicalCode,
    /// Number of labelings attaining the code, i.e. the automorphism count.
    pub automorphisms: u64,
}

fn encode(p: &Poset, perm: &[usize]) -> u64 {
    let n = perm.len();
    let mut bits = 0u64;
    for &a in perm {
        for &b in perm {
            bits = bits << 1 | p.le(a, b) as u64;
        }
    }
    debug_assert!(n * n <= 64);
    bits
}

/// Lexicographically smallest leq matrix over relabelings that list the
/// elements by increasing `(#below, #above)`.
pub fn canonical_form(p: &Poset) -> CanonicalForm {
    let n = p.len();
    assert!(n <= MAX_CENSUS_SIZE, "canonical form supports at most {MAX_CENSUS_SIZE} elements");
    let sig = p.degree_signature();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| sig[i]);
    let mut cells: Vec<(usize, usize)> = Vec::new();
    let mut start = 0;
    for i in 1..=n {
        if i == n || sig[order[i]] != sig[order[start]] {
            cells.push((start, i));
            start = i;
        }
    }
    let mut best = u64::MAX;
    let mut count = 0u64;
    let mut perm = order.clone();
    permute_cells(&mut perm, &cells, 0, &mut |perm| {
        let c = encode(p, perm);
        match c.cmp(&best) {
            std::cmp::Ordering::Less => {
                best = c;
                count = 1;
            }
            std::cmp::Ordering::Equal => count += 1,
            std::cmp::Ordering::Greater => {}
        }
    });
    CanonicalForm { code: CanonicalCode { n: n as u8, bits: if n == 0 { 0 } else { best } }, automorphisms: count }
}

fn permute_cells(perm: &mut [usize], cells: &[(usize, usize)], c: usize, visit: &mut dyn FnMut(&[usize])) {
    if c == cells.len() {
        visit(perm);
        return;
    }
    let (lo, hi) = cells[c];
    heap_permute(perm, lo, hi - lo, &mut |perm| permute_cells(perm, cells, c + 1, visit));
}

fn heap_permute(perm: &mut [usize], lo: usize, k: usize, visit: &mut dyn FnMut(&mut [usize])) {
    if k <= 1 {
        visit(perm);
        return;
    }
    for i in 0..k - 1 {
        heap_permute(perm, lo, k - 1, visit);
        if k.is_multiple_of(2) {
            perm.swap(lo + i, lo + k - 1);
        } else {
            perm.swap(lo, lo + k - 1);
        }
    }
    heap_permute(perm, lo, k - 1, visit);
}

/// Down-closed subsets of `p`, as membership vectors.
fn down_sets(p: &Poset) -> Vec<Vec<bool>> {
    let n = p.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << n) {
        let inside = |i: usize| mask >> i & 1 == 1;
        if (0..n).all(|i| !inside(i) || (0..n).all(|j| !p.le(j, i) || inside(j))) {
            out.push((0..n).map(inside).collect());
        }
    }
    out
}

fn add_maximal(p: &Poset, below: &[bool]) -> Poset {
    let n = p.len();
    let m = n + 1;
    let mut leq = vec![false; m * m];
    for i in 0..n {
        for j in 0..n {
            leq[i * m + j] = p.le(i, j);
        }
        leq[i * m + n] = below[i];
    }
    leq[n * m + n] = true;
    Poset::from_closed((0..m).map(|i| format!("p{i}")).collect(), leq)
}

/// One representative per isomorphism class of posets on `n` points, in
/// canonical labeling and sorted by code. Every poset arises from one with
/// a maximal element removed, so classes are grown one element at a time.
pub fn enumerate_classes(n: usize) -> Result<Vec<(CanonicalCode, u64)>, CensusError> {
    enumerate_classes_with(n, Execution::Sequential)
}

pub fn enumerate_classes_with(n: usize, exec: Execution) -> Result<Vec<(CanonicalCode, u64)>, CensusError> {
    if n > MAX_CENSUS_SIZE {
        return Err(CensusError::SizeOutOfRange(n));
    }
    let empty = canonical_form(&Poset::empty());
    let mut level = vec![(empty.code, empty.automorphisms)];
    for _ in 0..n {
        let candidates: Vec<Poset> = level
            .iter()
            .flat_map(|(code, _)| {
                let p = code.to_poset();
                down_sets(&p).into_iter().map(move |d| add_maximal(&p, &d))
            })
            .collect();
        let forms = map_exec(&candidates, exec, canonical_form)?;
        let next: BTreeMap<CanonicalCode, u64> = forms.into_iter().map(|f| (f.code, f.automorphisms)).collect();
        level = next.into_iter().collect();
    }
    Ok(level)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRecord {
    pub code: CanonicalCode,
    pub automorphisms: u64,
    pub crown: bool,
    /// Only meaningful for crowns.
    pub one_connected: Option<bool>,
    pub ind_flat: bool,
    pub pro_flat: bool,
    pub quasitree: bool,
    pub mitchell_dim_le_2: bool,
    /// Condition (ii) under the reading "every SC_2 copy is unmediated".
    pub mitchell_ii_every_copy: bool,
    /// Crowns on which the three connectedness tests disagree.
    pub method_disagreements: usize,
    /// Crowns examined for method agreement.
    pub crowns_checked: usize,
    pub quasitree_disagreement: bool,
}

impl CensusRecord {
    pub fn n(&self) -> usize {
        self.code.n as usize
    }

    pub fn flat(&self) -> bool {
        self.ind_flat && self.pro_flat
    }

    /// Ind-flat yet containing a suspended crown pattern.
    pub fn mitchell_candidate(&self) -> bool {
        self.ind_flat && !self.mitchell_dim_le_2
    }
}

fn methods_agree(c: &Poset) -> bool {
    match (rank_method(c), peel_method(c), forest_method(c)) {
        (Ok(a), Ok(b), Ok(f)) => a == b.is_some() && a == f,
        _ => false,
    }
}

pub fn classify(code: CanonicalCode, automorphisms: u64) -> CensusRecord {
    let p = code.to_poset();
    let crown = is_crown(&p);
    let mut crowns = vec![p.crown_of(CrownKind::Ind).source, p.crown_of(CrownKind::Pro).source];
    for d in 0..p.len() {
        crowns.push(local_crown(&p, d, CrownKind::Ind).source);
        crowns.push(local_crown(&p, d, CrownKind::Pro).source);
    }
    if crown {
        crowns.push(p.clone());
    }
    let method_disagreements = crowns.iter().filter(|c| !methods_agree(c)).count();
    let intervals = quasitree_by_intervals(&p);
    let mitchell = mitchell_check(&p);
    CensusRecord {
        code,
        automorphisms,
        crown,
        one_connected: crown.then(|| rank_method(&p).unwrap_or(false)),
        ind_flat: is_ind_flat(&p),
        pro_flat: is_pro_flat(&p),
        quasitree: intervals,
        mitchell_dim_le_2: mitchell.dimension_le_2,
        mitchell_ii_every_copy: mitchell.condition_ii_all_embeddings(),
        method_disagreements,
        crowns_checked: crowns.len(),
        quasitree_disagreement: intervals != quasitree_by_crowns(&p),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Worker threads; `None` uses the default pool. Falls back to
    /// sequential execution without the `parallel` feature.
    Parallel(Option<usize>),
}

fn map_exec<T: Sync, U: Send>(items: &[T], exec: Execution, f: impl Fn(&T) -> U + Sync + Send) -> Result<Vec<U>, CensusError> {
    match exec {
        Execution::Sequential => Ok(items.iter().map(f).collect()),
        #[cfg(feature = "parallel")]
        Execution::Parallel(jobs) => {
            let run = || items.par_iter().map(&f).collect();
            match jobs {
                None => Ok(run()),
                Some(j) => rayon::ThreadPoolBuilder::new()
                    .num_threads(j)
                    .build()
                    .map(|pool| pool.install(run))
                    .map_err(|e| CensusError::ThreadPool(e.to_string())),
            }
        }
        #[cfg(not(feature = "parallel"))]
        Execution::Parallel(_) => Ok(items.iter().map(f).collect()),
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SizeSummary {
    pub n: usize,
    pub classes: usize,
    /// Sum of `n! / |Aut|` over classes.
    pub labeled: u64,
    pub crowns: usize,
    pub one_connected_crowns: usize,
    pub ind_flat: usize,
    pub pro_flat: usize,
    pub flat: usize,
    pub quasitrees: usize,
    pub mitchell_dim_le_2: usize,
    pub mitchell_candidates: usize,
    pub mitchell_candidates_every_copy: usize,
    pub method_disagreements: usize,
    pub crowns_checked: usize,
    pub quasitree_disagreements: usize,
    pub non_flat_quasitrees: usize,
}

#[derive(Debug, Clone)]
pub struct Census {
    pub records: Vec<CensusRecord>,
    pub summaries: Vec<SizeSummary>,
}

impl Census {
    pub fn run(max_n: usize, exec: Execution) -> Result<Census, CensusError> {
        if max_n == 0 || max_n > MAX_CENSUS_SIZE {
            return Err(CensusError::SizeOutOfRange(max_n));
        }
        let mut records = Vec::new();
        let mut summaries = Vec::new();
        for n in 1..=max_n {
            let classes = enumerate_classes_with(n, exec)?;
            let recs = map_exec(&classes, exec, |&(c, a)| classify(c, a))?;
            summaries.push(summarize(n, &recs));
            records.extend(recs);
        }
        Ok(Census { records, summaries })
    }

    pub fn mitchell_candidates(&self) -> impl Iterator<Item = &CensusRecord> {
        self.records.iter().filter(|r| r.mitchell_candidate())
    }
}

fn factorial(n: usize) -> u64 {
    (1..=n as u64).product()
}

pub fn summarize(n: usize, recs: &[CensusRecord]) -> SizeSummary {
    let count = |f: &dyn Fn(&CensusRecord) -> bool| recs.iter().filter(|r| f(r)).count();
    SizeSummary {
        n,
        classes: recs.len(),
        labeled: recs.iter().map(|r| factorial(n) / r.automorphisms).sum(),
        crowns: count(&|r| r.crown),
        one_connected_crowns: count(&|r| r.one_connected == Some(true)),
        ind_flat: count(&|r| r.ind_flat),
        pro_flat: count(&|r| r.pro_flat),
        flat: count(&|r| r.flat()),
        quasitrees: count(&|r| r.quasitree),
        mitchell_dim_le_2: count(&|r| r.mitchell_dim_le_2),
        mitchell_candidates: count(&|r| r.mitchell_candidate()),
        mitchell_candidates_every_copy: count(&|r| r.ind_flat && r.mitchell_ii_every_copy),
        method_disagreements: recs.iter().map(|r| r.method_disagreements).sum(),
        crowns_checked: recs.iter().map(|r| r.crowns_checked).sum(),
        quasitree_disagreements: count(&|r| r.quasitree_disagreement),
        non_flat_quasitrees: count(&|r| r.quasitree && !r.flat()),
    }
}

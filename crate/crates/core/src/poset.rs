//! Finite posets stored as closed order matrices.
//!
//! Elements are addressed by their position in the input order; names are
//! plain strings and carry no structure of their own. All "pick an element"
//! steps elsewhere in the crate scan positions in increasing order.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PosetError {
    #[error("duplicate element name `{0}`")]
    DuplicateName(String),
    #[error("unknown element name `{0}`")]
    UnknownName(String),
    #[error("relations contain a cycle through `{0}`")]
    CycleDetected(String),
}

/// A finite partially ordered set.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Poset {
    names: Vec<String>,
    // row-major, leq[i * n + j] <=> i <= j
    leq: Vec<bool>,
}

/// Which cone of an element to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConeMode {
    /// `{q : q <= p}`
    Down,
    /// `{q : q < p}`
    StrictDown,
    /// `{q : q >= p}`
    Up,
    /// `{q : q > p}`
    StrictUp,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Extremum {
    Max,
    Min,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CrownKind {
    Ind,
    Pro,
}

impl fmt::Display for CrownKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CrownKind::Ind => f.write_str("ind"),
            CrownKind::Pro => f.write_str("pro"),
        }
    }
}

/// An injective order-preserving map `source -> target`.
///
/// `map[i]` is the position in `target` of the `i`-th element of `source`.
/// When `full` is set the map also reflects the order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubposetEmbedding {
    pub source: Poset,
    pub target: Poset,
    pub map: Vec<usize>,
    pub full: bool,
}

impl SubposetEmbedding {
    /// Checks injectivity, monotonicity and (if claimed) fullness.
    pub fn is_valid(&self) -> bool {
        let n = self.source.len();
        if self.map.len() != n || self.map.iter().any(|&m| m >= self.target.len()) {
            return false;
        }
        let distinct: BTreeSet<_> = self.map.iter().collect();
        if distinct.len() != n {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                let s = self.source.le(i, j);
                let t = self.target.le(self.map[i], self.map[j]);
                if s && !t {
                    return false;
                }
                if self.full && t && !s {
                    return false;
                }
            }
        }
        true
    }

    /// Names of the image elements in `target`, in source order.
    pub fn image_names(&self) -> Vec<&str> {
        self.map.iter().map(|&m| self.target.name(m)).collect()
    }
}

/// Standard poset constructions.
#[derive(Debug, Clone)]
pub enum Construction {
    /// `[0, n]` with the usual order.
    Chain(usize),
    Product(Poset, Poset),
    /// All subsets of `[1, m]` ordered by inclusion.
    Powerset(usize),
    Opposite(Poset),
    FullSubposet(Poset, Vec<String>),
}

pub fn build(kind: Construction) -> Result<Poset, PosetError> {
    match kind {
        Construction::Chain(n) => Ok(Poset::chain(n)),
        Construction::Product(p, q) => Ok(Poset::product(&p, &q)),
        Construction::Powerset(m) => Ok(Poset::powerset(m)),
        Construction::Opposite(p) => Ok(p.opposite()),
        Construction::FullSubposet(p, s) => {
            let names: Vec<&str> = s.iter().map(String::as_str).collect();
            Ok(p.full_subposet_by_names(&names)?.source)
        }
    }
}

impl Poset {
    pub fn empty() -> Self {
        Poset { names: Vec::new(), leq: Vec::new() }
    }

    /// Builds the reflexive-transitive closure of `covers`.
    pub fn from_cover_relations<S: AsRef<str>>(
        names: &[S],
        covers: &[(S, S)],
    ) -> Result<Self, PosetError> {
        let names: Vec<String> = names.iter().map(|s| s.as_ref().to_string()).collect();
        let mut index = HashMap::new();
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(PosetError::DuplicateName(name.clone()));
            }
        }
        let n = names.len();
        let mut rel = vec![false; n * n];
        for (a, b) in covers {
            let ia = *index
                .get(a.as_ref())
                .ok_or_else(|| PosetError::UnknownName(a.as_ref().to_string()))?;
            let ib = *index
                .get(b.as_ref())
                .ok_or_else(|| PosetError::UnknownName(b.as_ref().to_string()))?;
            rel[ia * n + ib] = true;
        }
        Self::close(names, rel)
    }

    /// Reflexive-transitive closure of an arbitrary relation matrix.
    pub fn from_relation(names: Vec<String>, rel: &[bool]) -> Result<Self, PosetError> {
        let mut seen = BTreeSet::new();
        for name in &names {
            if !seen.insert(name.as_str()) {
                return Err(PosetError::DuplicateName(name.clone()));
            }
        }
        Self::close(names, rel.to_vec())
    }

    fn close(names: Vec<String>, mut rel: Vec<bool>) -> Result<Self, PosetError> {
        let n = names.len();
        for i in 0..n {
            rel[i * n + i] = true;
        }
        // Warshall
        for k in 0..n {
            for i in 0..n {
                if rel[i * n + k] {
                    for j in 0..n {
                        if rel[k * n + j] {
                            rel[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if rel[i * n + j] && rel[j * n + i] {
                    return Err(PosetError::CycleDetected(names[i].clone()));
                }
            }
        }
        Ok(Poset { names, leq: rel })
    }

    /// Wraps a matrix that is already known to be a closed partial order.
    pub(crate) fn from_closed(names: Vec<String>, leq: Vec<bool>) -> Self {
        debug_assert_eq!(leq.len(), names.len() * names.len());
        Poset { names, leq }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn require(&self, name: &str) -> Result<usize, PosetError> {
        self.index_of(name).ok_or_else(|| PosetError::UnknownName(name.to_string()))
    }

    #[inline]
    pub fn le(&self, i: usize, j: usize) -> bool {
        self.leq[i * self.names.len() + j]
    }

    #[inline]
    pub fn lt(&self, i: usize, j: usize) -> bool {
        i != j && self.le(i, j)
    }

    pub fn comparable(&self, i: usize, j: usize) -> bool {
        self.le(i, j) || self.le(j, i)
    }

    pub fn leq_matrix(&self) -> &[bool] {
        &self.leq
    }

    /// All pairs `(a, b)` with `a < b`, sorted by source then target.
    pub fn strict_relations(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        let mut out = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if self.lt(a, b) {
                    out.push((a, b));
                }
            }
        }
        out
    }

    /// Hasse diagram edges, sorted by source then target.
    pub fn covers(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        self.strict_relations()
            .into_iter()
            .filter(|&(a, b)| !(0..n).any(|m| self.lt(a, m) && self.lt(m, b)))
            .collect()
    }

    pub fn cone_indices(&self, p: usize, mode: ConeMode) -> Vec<usize> {
        (0..self.len())
            .filter(|&q| match mode {
                ConeMode::Down => self.le(q, p),
                ConeMode::StrictDown => self.lt(q, p),
                ConeMode::Up => self.le(p, q),
                ConeMode::StrictUp => self.lt(p, q),
            })
            .collect()
    }

    /// The full subposet on a cone of `p`, with its embedding.
    pub fn cone(&self, p: usize, mode: ConeMode) -> SubposetEmbedding {
        self.full_subposet(&self.cone_indices(p, mode))
    }

    pub fn cone_by_name(&self, p: &str, mode: ConeMode) -> Result<SubposetEmbedding, PosetError> {
        Ok(self.cone(self.require(p)?, mode))
    }

    pub fn maxima(&self) -> Vec<usize> {
        let n = self.len();
        (0..n).filter(|&q| !(0..n).any(|r| self.lt(q, r))).collect()
    }

    pub fn minima(&self) -> Vec<usize> {
        let n = self.len();
        (0..n).filter(|&q| !(0..n).any(|r| self.lt(r, q))).collect()
    }

    pub fn extrema(&self, mode: Extremum) -> Vec<usize> {
        match mode {
            Extremum::Max => self.maxima(),
            Extremum::Min => self.minima(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        self.strict_relations().is_empty()
    }

    pub fn is_chain(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| (0..n).all(|j| self.comparable(i, j)))
    }

    /// Restriction of the order to `subset` (positions, kept in the given order).
    pub fn full_subposet(&self, subset: &[usize]) -> SubposetEmbedding {
        let names: Vec<String> = subset.iter().map(|&i| self.names[i].clone()).collect();
        let m = subset.len();
        let mut leq = vec![false; m * m];
        for (a, &i) in subset.iter().enumerate() {
            for (b, &j) in subset.iter().enumerate() {
                leq[a * m + b] = self.le(i, j);
            }
        }
        SubposetEmbedding {
            source: Poset::from_closed(names, leq),
            target: self.clone(),
            map: subset.to_vec(),
            full: true,
        }
    }

    pub fn full_subposet_by_names(&self, names: &[&str]) -> Result<SubposetEmbedding, PosetError> {
        let idx = names
            .iter()
            .map(|n| self.require(n))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(self.full_subposet(&idx))
    }

    /// Full subposet on everything except `removed`.
    pub fn without(&self, removed: &[usize]) -> SubposetEmbedding {
        let keep: Vec<usize> = (0..self.len()).filter(|i| !removed.contains(i)).collect();
        self.full_subposet(&keep)
    }

    /// The ind- or pro-crown as a (generally non-full) subposet.
    pub fn crown_of(&self, kind: CrownKind) -> SubposetEmbedding {
        let n = self.len();
        let ext = match kind {
            CrownKind::Ind => self.maxima(),
            CrownKind::Pro => self.minima(),
        };
        let is_ext: Vec<bool> = (0..n).map(|i| ext.contains(&i)).collect();
        let mut members = vec![false; n];
        for &p in &ext {
            for &q in &ext {
                // common lower (upper) bounds of p and q, then their maxima (minima)
                let common: Vec<usize> = (0..n)
                    .filter(|&r| match kind {
                        CrownKind::Ind => self.le(r, p) && self.le(r, q),
                        CrownKind::Pro => self.le(p, r) && self.le(q, r),
                    })
                    .collect();
                for &r in &common {
                    let extremal = !common.iter().any(|&s| match kind {
                        CrownKind::Ind => self.lt(r, s),
                        CrownKind::Pro => self.lt(s, r),
                    });
                    if extremal {
                        members[r] = true;
                    }
                }
            }
        }
        let subset: Vec<usize> = (0..n).filter(|&i| members[i]).collect();
        let m = subset.len();
        let mut leq = vec![false; m * m];
        for (a, &i) in subset.iter().enumerate() {
            for (b, &j) in subset.iter().enumerate() {
                leq[a * m + b] = a == b
                    || match kind {
                        CrownKind::Ind => self.lt(i, j) && !is_ext[i] && is_ext[j],
                        CrownKind::Pro => self.lt(i, j) && is_ext[i] && !is_ext[j],
                    };
            }
        }
        let names = subset.iter().map(|&i| self.names[i].clone()).collect();
        SubposetEmbedding {
            source: Poset::from_closed(names, leq),
            target: self.clone(),
            map: subset,
            full: false,
        }
    }

    pub fn opposite(&self) -> Poset {
        let n = self.len();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = self.le(j, i);
            }
        }
        Poset::from_closed(self.names.clone(), leq)
    }

    /// `Δ_n = [0, n]`.
    pub fn chain(n: usize) -> Poset {
        let m = n + 1;
        let names = (0..m).map(|i| i.to_string()).collect();
        let mut leq = vec![false; m * m];
        for i in 0..m {
            for j in i..m {
                leq[i * m + j] = true;
            }
        }
        Poset::from_closed(names, leq)
    }

    /// Componentwise order; element `(a,b)` is at position `ia * |Q| + ib`.
    pub fn product(p: &Poset, q: &Poset) -> Poset {
        let (np, nq) = (p.len(), q.len());
        let n = np * nq;
        let mut names = Vec::with_capacity(n);
        for a in 0..np {
            for b in 0..nq {
                names.push(format!("({},{})", p.name(a), q.name(b)));
            }
        }
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = p.le(i / nq, j / nq) && q.le(i % nq, j % nq);
            }
        }
        Poset::from_closed(names, leq)
    }

    /// Subsets of `[1, m]` by inclusion, listed by size and then lexicographically.
    pub fn powerset(m: usize) -> Poset {
        let mut sets: Vec<Vec<u32>> = (0u32..(1 << m))
            .map(|mask| (1..=m as u32).filter(|i| mask & (1 << (i - 1)) != 0).collect())
            .collect();
        sets.sort_by(|a: &Vec<u32>, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Poset::of_sets(&sets)
    }

    /// A family of finite sets ordered by inclusion, in the given order.
    pub fn of_sets(sets: &[Vec<u32>]) -> Poset {
        let n = sets.len();
        let names = sets.iter().map(|s| set_name(s)).collect();
        let mut leq = vec![false; n * n];
        for i in 0..n {
            for j in 0..n {
                leq[i * n + j] = sets[i].iter().all(|x| sets[j].contains(x));
            }
        }
        Poset::from_closed(names, leq)
    }

    /// Checks the three order axioms; useful for matrices from outside.
    pub fn is_valid_order(&self) -> bool {
        let n = self.len();
        for i in 0..n {
            if !self.le(i, i) {
                return false;
            }
            for j in 0..n {
                if i != j && self.le(i, j) && self.le(j, i) {
                    return false;
                }
                for k in 0..n {
                    if self.le(i, j) && self.le(j, k) && !self.le(i, k) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Number of strict predecessors and successors of each element.
    pub fn degree_signature(&self) -> Vec<(usize, usize)> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let down = (0..n).filter(|&j| self.lt(j, i)).count();
                let up = (0..n).filter(|&j| self.lt(i, j)).count();
                (down, up)
            })
            .collect()
    }
}

/// `{1,2}` style name for a set; the empty set is `{}`.
pub fn set_name(s: &[u32]) -> String {
    let inner: Vec<String> = s.iter().map(|x| x.to_string()).collect();
    format!("{{{}}}", inner.join(","))
}

impl fmt::Debug for Poset {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let covers: Vec<String> = self
            .covers()
            .into_iter()
            .map(|(a, b)| format!("{}<{}", self.names[a], self.names[b]))
            .collect();
        write!(f, "Poset[{}; {}]", self.names.join(" "), covers.join(" "))
    }
}

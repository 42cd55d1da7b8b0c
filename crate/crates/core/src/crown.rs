//! Crowns and their componentwise 1-connectedness.
//!
//! Three independent decision procedures are provided: the rank of the
//! boundary map over the rationals, recursive peeling of leaves, and a
//! forest test on the underlying graph. [`connectedness_check`] runs all
//! three and refuses to answer if they disagree.

use num_integer::Integer;
use num_rational::Ratio;
use petgraph::unionfind::UnionFind;
use thiserror::Error;

use crate::poset::Poset;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrownError {
    #[error("poset is not a crown: {0} < {1} < {2}")]
    NotACrown(String, String, String),
    #[error("connectedness methods disagree (rank: {rank}, peeling: {peeling}, forest: {forest})")]
    MethodDisagreement { rank: bool, peeling: bool, forest: bool },
}

/// True iff there is no chain `c < c' < c''`.
pub fn is_crown(p: &Poset) -> bool {
    long_chain(p).is_none()
}

fn long_chain(p: &Poset) -> Option<(usize, usize, usize)> {
    let n = p.len();
    for b in 0..n {
        let below = (0..n).find(|&a| p.lt(a, b));
        let above = (0..n).find(|&c| p.lt(b, c));
        if let (Some(a), Some(c)) = (below, above) {
            return Some((a, b, c));
        }
    }
    None
}

fn require_crown(c: &Poset) -> Result<(), CrownError> {
    match long_chain(c) {
        None => Ok(()),
        Some((a, b, d)) => Err(CrownError::NotACrown(
            c.name(a).to_string(),
            c.name(b).to_string(),
            c.name(d).to_string(),
        )),
    }
}

/// Matrix of `(c -> d) |-> d - c`, one row per strict relation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BoundaryMatrix {
    pub crown: Poset,
    pub rows: Vec<(usize, usize)>,
    pub cols: Vec<usize>,
    pub entries: Vec<Vec<i64>>,
}

impl BoundaryMatrix {
    pub fn row_labels(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|&(a, b)| format!("{}->{}", self.crown.name(a), self.crown.name(b)))
            .collect()
    }

    /// `v * entries`, i.e. the image of a formal combination of relations.
    pub fn apply_left(&self, v: &[i64]) -> Vec<i64> {
        let mut out = vec![0i64; self.cols.len()];
        for (row, &coef) in self.entries.iter().zip(v) {
            for (o, &e) in out.iter_mut().zip(row) {
                *o += coef * e;
            }
        }
        out
    }
}

pub fn boundary_matrix(c: &Poset) -> Result<BoundaryMatrix, CrownError> {
    require_crown(c)?;
    let rows = c.strict_relations();
    let n = c.len();
    let entries = rows
        .iter()
        .map(|&(a, b)| {
            let mut r = vec![0i64; n];
            r[a] = -1;
            r[b] = 1;
            r
        })
        .collect();
    Ok(BoundaryMatrix { crown: c.clone(), rows, cols: (0..n).collect(), entries })
}

/// How an element was removed while peeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeelCase {
    /// Maximal with at most one element below (and at least one).
    I,
    /// Minimal with at most one element above (and at least one).
    II,
    /// No strict relations at all.
    Isolated,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CrownReport {
    pub is_crown: bool,
    pub one_connected: bool,
    pub kernel_dim: usize,
    pub peel_sequence: Option<Vec<(usize, PeelCase)>>,
    pub cycle_witness: Option<Vec<i64>>,
}

/// Rank of an integer matrix by fraction-free (Bareiss) elimination.
pub fn integer_rank(m: &[Vec<i64>]) -> usize {
    if m.is_empty() {
        return 0;
    }
    let mut a: Vec<Vec<i128>> = m.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let (rows, cols) = (a.len(), a[0].len());
    let mut prev = 1i128;
    let mut rank = 0;
    for col in 0..cols {
        if rank == rows {
            break;
        }
        let Some(piv) = (rank..rows).find(|&r| a[r][col] != 0) else { continue };
        a.swap(rank, piv);
        for r in (rank + 1)..rows {
            for c in (col + 1)..cols {
                a[r][c] = (a[rank][col] * a[r][c] - a[r][col] * a[rank][c]) / prev;
            }
            a[r][col] = 0;
        }
        prev = a[rank][col];
        rank += 1;
    }
    rank
}

/// Method (a): `δ_C` injective iff its rank equals the number of relations.
pub fn rank_method(c: &Poset) -> Result<bool, CrownError> {
    let b = boundary_matrix(c)?;
    Ok(integer_rank(&b.entries) == b.rows.len())
}

/// Method (b): repeatedly remove a leaf; `Some(sequence)` if everything peels off.
pub fn peel_method(c: &Poset) -> Result<Option<Vec<(usize, PeelCase)>>, CrownError> {
    require_crown(c)?;
    let n = c.len();
    let mut alive = vec![true; n];
    let mut seq = Vec::with_capacity(n);
    for _ in 0..n {
        let mut chosen = None;
        for x in 0..n {
            if !alive[x] {
                continue;
            }
            let below = (0..n).filter(|&y| alive[y] && c.lt(y, x)).count();
            let above = (0..n).filter(|&y| alive[y] && c.lt(x, y)).count();
            let case = if below == 0 && above == 0 {
                Some(PeelCase::Isolated)
            } else if above == 0 && below <= 1 {
                Some(PeelCase::I)
            } else if below == 0 && above <= 1 {
                Some(PeelCase::II)
            } else {
                None
            };
            if let Some(case) = case {
                chosen = Some((x, case));
                break;
            }
        }
        match chosen {
            Some((x, case)) => {
                alive[x] = false;
                seq.push((x, case));
            }
            None => return Ok(None),
        }
    }
    Ok(Some(seq))
}

/// Method (c): the undirected comparability graph is a forest.
pub fn forest_method(c: &Poset) -> Result<bool, CrownError> {
    require_crown(c)?;
    let mut uf = UnionFind::<usize>::new(c.len());
    for (a, b) in c.strict_relations() {
        if !uf.union(a, b) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A basis vector of the left kernel of `m` (rows x cols), scaled to
/// integers with content 1 and positive leading entry.
fn left_kernel_vector(m: &[Vec<i64>], cols: usize) -> Option<Vec<i64>> {
    let rows = m.len();
    // solve w * m = 0  <=>  m^T w^T = 0
    let mut a: Vec<Vec<Ratio<i128>>> = (0..cols)
        .map(|j| (0..rows).map(|i| Ratio::from_integer(m[i][j] as i128)).collect())
        .collect();
    let mut pivots = Vec::new();
    let mut r = 0;
    for col in 0..rows {
        let Some(p) = (r..cols).find(|&i| a[i][col] != Ratio::from_integer(0)) else { continue };
        a.swap(r, p);
        let inv = Ratio::from_integer(1) / a[r][col];
        for x in a[r].iter_mut() {
            *x *= inv;
        }
        for i in 0..cols {
            if i != r && a[i][col] != Ratio::from_integer(0) {
                let f = a[i][col];
                for j in 0..rows {
                    let t = a[r][j] * f;
                    a[i][j] -= t;
                }
            }
        }
        pivots.push(col);
        r += 1;
        if r == cols {
            break;
        }
    }
    let free = (0..rows).find(|c| !pivots.contains(c))?;
    let mut w = vec![Ratio::from_integer(0); rows];
    w[free] = Ratio::from_integer(1);
    for (i, &pc) in pivots.iter().enumerate() {
        w[pc] = -a[i][free];
    }
    let lcm = w.iter().fold(1i128, |acc, x| acc.lcm(x.denom()));
    let mut ints: Vec<i128> = w.iter().map(|x| (x * lcm).to_integer()).collect();
    let g = ints.iter().fold(0i128, |acc, x| acc.gcd(x));
    let lead = ints.iter().find(|x| **x != 0).copied().unwrap_or(1);
    let sign = if lead < 0 { -1 } else { 1 };
    for x in ints.iter_mut() {
        *x = *x / g * sign;
    }
    Some(ints.into_iter().map(|x| x as i64).collect())
}

/// Runs all three methods and cross-checks them.
pub fn connectedness_check(c: &Poset) -> Result<CrownReport, CrownError> {
    let b = boundary_matrix(c)?;
    let rank = integer_rank(&b.entries);
    let by_rank = rank == b.rows.len();
    let peel = peel_method(c)?;
    let by_forest = forest_method(c)?;
    if by_rank != peel.is_some() || by_rank != by_forest {
        return Err(CrownError::MethodDisagreement {
            rank: by_rank,
            peeling: peel.is_some(),
            forest: by_forest,
        });
    }
    let cycle_witness = if by_rank { None } else { left_kernel_vector(&b.entries, b.cols.len()) };
    if !by_rank {
        match &cycle_witness {
            Some(w) if b.apply_left(w).iter().all(|&x| x == 0) && w.iter().any(|&x| x != 0) => {}
            _ => {
                return Err(CrownError::MethodDisagreement {
                    rank: by_rank,
                    peeling: peel.is_some(),
                    forest: by_forest,
                })
            }
        }
    }
    Ok(CrownReport {
        is_crown: true,
        one_connected: by_rank,
        kernel_dim: b.rows.len() - rank,
        peel_sequence: peel,
        cycle_witness,
    })
}

/// Shorthand: the crown is componentwise 1-connected.
pub fn is_one_connected(c: &Poset) -> Result<bool, CrownError> {
    Ok(connectedness_check(c)?.one_connected)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poset::CrownKind;

    fn hollow_cube_crown() -> Poset {
        let p = Poset::powerset(3);
        let top = p.index_of("{1,2,3}").unwrap();
        p.without(&[top]).source.crown_of(CrownKind::Ind).source
    }

    #[test]
    fn crown_predicate() {
        let ex6 = Poset::of_sets(&[vec![1], vec![2], vec![1, 2], vec![2, 3]]);
        assert!(is_crown(&ex6));
        let ex5 = Poset::of_sets(&[vec![], vec![1], vec![2], vec![2, 3], vec![2, 4]]);
        assert!(!is_crown(&ex5));
        assert!(is_crown(&Poset::empty()));
        assert!(matches!(boundary_matrix(&ex5), Err(CrownError::NotACrown(..))));
    }

    #[test]
    fn boundary_matrix_shapes() {
        let b = boundary_matrix(&hollow_cube_crown()).unwrap();
        assert_eq!(b.rows.len(), 6);
        assert_eq!(b.cols.len(), 6);
        assert_eq!(b.entries[0], vec![-1, 0, 0, 1, 0, 0]);
        for row in &b.entries {
            assert_eq!(row.iter().filter(|&&x| x == 1).count(), 1);
            assert_eq!(row.iter().filter(|&&x| x == -1).count(), 1);
        }

        let discrete = Poset::from_cover_relations(&["a", "b", "c"], &[]).unwrap();
        let b = boundary_matrix(&discrete).unwrap();
        assert!(b.entries.is_empty());
        assert_eq!(b.cols.len(), 3);

        let one = Poset::from_cover_relations(&["a", "b"], &[("a", "b")]).unwrap();
        assert_eq!(boundary_matrix(&one).unwrap().entries, vec![vec![-1, 1]]);
    }

    #[test]
    fn hollow_cube_crown_kernel() {
        let r = connectedness_check(&hollow_cube_crown()).unwrap();
        assert!(!r.one_connected);
        assert_eq!(r.kernel_dim, 1);
        assert!(r.peel_sequence.is_none());
        assert_eq!(r.cycle_witness, Some(vec![1, -1, -1, 1, 1, -1]));
    }

    #[test]
    fn empty_crown_is_connected() {
        let r = connectedness_check(&Poset::empty()).unwrap();
        assert!(r.one_connected);
        assert_eq!(r.peel_sequence, Some(vec![]));
        assert_eq!(r.kernel_dim, 0);
    }

    #[test]
    fn square_crown_is_not_connected() {
        let c = Poset::from_cover_relations(
            &["a", "b", "u", "v"],
            &[("a", "u"), ("a", "v"), ("b", "u"), ("b", "v")],
        )
        .unwrap();
        let r = connectedness_check(&c).unwrap();
        assert!(!r.one_connected);
        assert_eq!(r.kernel_dim, 1);
    }

    #[test]
    fn peel_order_is_deterministic() {
        // a < u, b < u, b < v
        let c = Poset::from_cover_relations(&["a", "b", "u", "v"], &[("a", "u"), ("b", "u"), ("b", "v")])
            .unwrap();
        let seq = peel_method(&c).unwrap().unwrap();
        assert_eq!(seq[0], (0, PeelCase::II));
        assert_eq!(seq.len(), 4);
        assert_eq!(seq.last().unwrap().1, PeelCase::Isolated);
    }

    #[test]
    fn opposite_has_same_verdict() {
        let c = hollow_cube_crown();
        assert_eq!(is_one_connected(&c).unwrap(), is_one_connected(&c.opposite()).unwrap());
    }
}

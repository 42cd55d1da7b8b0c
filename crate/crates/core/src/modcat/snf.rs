//! Diagonal normal form over the local ring `Z/p^k`.
//!
//! Every pivot is an entry of minimal `p`-valuation in the remaining block,
//! so the diagonal comes out as ascending powers of `p` and all eliminations
//! are exact divisions.

use super::matrix::Mat;
use super::RingParams;

/// `left * m * right = diag(p^{diag_exponents[t]})`, padded with zeros.
///
/// An exponent equal to `k` stands for a zero diagonal entry.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalForm {
    pub diag_exponents: Vec<u32>,
    pub left: Mat,
    pub right: Mat,
}

impl NormalForm {
    pub fn diagonal(&self, ring: RingParams, rows: usize, cols: usize) -> Mat {
        let mut d = Mat::zeros(rows, cols);
        for (t, &e) in self.diag_exponents.iter().enumerate() {
            d.set(t, t, ring.pow_p(e) % ring.modulus());
        }
        d
    }

    pub fn rank(&self, k: u32) -> usize {
        self.diag_exponents.iter().filter(|&&e| e < k).count()
    }
}

pub(crate) struct Reduction {
    pub diag: Vec<u32>,
    pub left: Option<Mat>,
    pub right: Option<Mat>,
    /// Right-hand sides after the same row operations.
    pub rhs: Vec<Vec<i64>>,
}

/// Reduces `a` in place to diagonal form.
pub(crate) fn reduce(
    ring: RingParams,
    mut a: Mat,
    want_left: bool,
    want_right: bool,
    mut rhs: Vec<Vec<i64>>,
) -> Reduction {
    let q = ring.modulus();
    let k = ring.k;
    let (r, c) = (a.rows(), a.cols());
    let mut left = want_left.then(|| Mat::identity(r));
    let mut right = want_right.then(|| Mat::identity(c));
    let n = r.min(c);
    let mut diag = Vec::with_capacity(n);

    for t in 0..n {
        let mut best: Option<(u32, usize, usize)> = None;
        'search: for i in t..r {
            for j in t..c {
                let x = a.get(i, j);
                if x == 0 {
                    continue;
                }
                let v = ring.valuation(x);
                if best.is_none_or(|(bv, _, _)| v < bv) {
                    best = Some((v, i, j));
                    if v == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((v, pi, pj)) = best else {
            diag.extend(std::iter::repeat_n(k, n - t));
            break;
        };
        a.swap_rows(t, pi);
        if let Some(l) = left.as_mut() {
            l.swap_rows(t, pi);
        }
        for b in rhs.iter_mut() {
            b.swap(t, pi);
        }
        a.swap_cols(t, pj);
        if let Some(rt) = right.as_mut() {
            rt.swap_cols(t, pj);
        }

        let pv = ring.pow_p(v);
        let unit = a.get(t, t) / pv;
        let inv = ring.inverse_unit(unit);
        a.scale_row(t, inv, q);
        if let Some(l) = left.as_mut() {
            l.scale_row(t, inv, q);
        }
        for b in rhs.iter_mut() {
            b[t] = (b[t] * inv).rem_euclid(q);
        }

        for i in 0..r {
            if i == t {
                continue;
            }
            let x = a.get(i, t);
            if x == 0 {
                continue;
            }
            let f = x / pv;
            a.row_axpy(i, t, f, q);
            if let Some(l) = left.as_mut() {
                l.row_axpy(i, t, f, q);
            }
            for b in rhs.iter_mut() {
                b[i] = (b[i] - f * b[t] % q).rem_euclid(q);
            }
        }
        for j in (t + 1)..c {
            let x = a.get(t, j);
            if x == 0 {
                continue;
            }
            let f = x / pv;
            a.set(t, j, 0);
            if let Some(rt) = right.as_mut() {
                rt.col_axpy(j, t, f, q);
            }
        }
        diag.push(v);
    }
    Reduction { diag, left, right, rhs }
}

/// Normal form of a matrix over `Z/p^k` (entries are reduced first).
pub fn normal_form(ring: RingParams, m: &Mat) -> NormalForm {
    let q = ring.modulus();
    let a = m.map(|_, _, x| x.rem_euclid(q));
    let red = reduce(ring, a, true, true, Vec::new());
    NormalForm { diag_exponents: red.diag, left: red.left.unwrap(), right: red.right.unwrap() }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ring(p: u64, k: u32) -> RingParams {
        RingParams::new(p, k).unwrap()
    }

    fn check_roundtrip(ring: RingParams, m: &Mat) -> NormalForm {
        let nf = normal_form(ring, m);
        let q = ring.modulus();
        let prod = nf.left.mul_mod(m, q).mul_mod(&nf.right, q);
        assert_eq!(prod, nf.diagonal(ring, m.rows(), m.cols()));
        assert!(ring.is_invertible(&nf.left));
        assert!(ring.is_invertible(&nf.right));
        nf
    }

    #[test]
    fn identity_is_trivial() {
        let r = ring(3, 2);
        let nf = check_roundtrip(r, &Mat::identity(3));
        assert_eq!(nf.diag_exponents, vec![0, 0, 0]);
        assert_eq!(nf.left, Mat::identity(3));
        assert_eq!(nf.right, Mat::identity(3));
    }

    #[test]
    fn sorted_diagonal() {
        let r = ring(3, 3);
        let nf = check_roundtrip(r, &Mat::from_rows(&[vec![3, 0], vec![0, 1]]));
        assert_eq!(nf.diag_exponents, vec![0, 1]);
    }

    #[test]
    fn p_multiples() {
        // [[p, p], [p, 2p]] over Z/9; brute force over GL2(Z/9) gives (1, 1)
        let r = ring(3, 2);
        let nf = check_roundtrip(r, &Mat::from_rows(&[vec![3, 3], vec![3, 6]]));
        assert_eq!(nf.diag_exponents, vec![1, 1]);
    }

    #[test]
    fn zero_and_rectangular() {
        let r = ring(2, 3);
        let nf = check_roundtrip(r, &Mat::zeros(2, 3));
        assert_eq!(nf.diag_exponents, vec![3, 3]);
        let nf = check_roundtrip(r, &Mat::from_rows(&[vec![4, 2, 6], vec![0, 4, 4], vec![2, 2, 0], vec![1, 1, 1]]));
        assert_eq!(nf.diag_exponents.len(), 3);
        assert!(nf.diag_exponents.windows(2).all(|w| w[0] <= w[1]));
    }
}

//! Ind-/pro-flatness, quasitrees, suspended crowns and Mitchell's criterion.

use thiserror::Error;

use crate::crown::{connectedness_check, CrownError, CrownReport};
use crate::poset::{ConeMode, CrownKind, Poset, SubposetEmbedding};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FlatnessError {
    #[error("suspended crown needs n >= 2, got {0}")]
    BadParameter(usize),
    #[error("quasitree characterizations disagree (intervals: {intervals}, crowns: {crowns})")]
    CharacterizationDisagreement { intervals: bool, crowns: bool },
    #[error(transparent)]
    Crown(#[from] CrownError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatnessFailure {
    pub element: usize,
    pub direction: CrownKind,
    pub report: CrownReport,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FlatnessReport {
    pub ind_flat: bool,
    pub pro_flat: bool,
    pub flat: bool,
    pub failures: Vec<FlatnessFailure>,
}

impl FlatnessReport {
    pub fn failing_elements(&self, direction: CrownKind) -> Vec<usize> {
        self.failures.iter().filter(|f| f.direction == direction).map(|f| f.element).collect()
    }
}

/// The crown whose 1-connectedness decides flatness at `d`.
pub fn local_crown(p: &Poset, d: usize, direction: CrownKind) -> SubposetEmbedding {
    let mode = match direction {
        CrownKind::Ind => ConeMode::StrictDown,
        CrownKind::Pro => ConeMode::StrictUp,
    };
    let cone = p.cone(d, mode);
    let crown = cone.source.crown_of(direction);
    // re-express the crown's map in terms of p
    SubposetEmbedding {
        map: crown.map.iter().map(|&i| cone.map[i]).collect(),
        source: crown.source,
        target: p.clone(),
        full: false,
    }
}

pub fn flatness_check(p: &Poset) -> FlatnessReport {
    let mut failures = Vec::new();
    for direction in [CrownKind::Ind, CrownKind::Pro] {
        for d in 0..p.len() {
            let crown = local_crown(p, d, direction);
            let report = connectedness_check(&crown.source)
                .expect("crowns of cones are crowns and the three methods agree");
            if !report.one_connected {
                failures.push(FlatnessFailure { element: d, direction, report });
            }
        }
    }
    let ind_flat = !failures.iter().any(|f| f.direction == CrownKind::Ind);
    let pro_flat = !failures.iter().any(|f| f.direction == CrownKind::Pro);
    FlatnessReport { ind_flat, pro_flat, flat: ind_flat && pro_flat, failures }
}

pub fn is_ind_flat(p: &Poset) -> bool {
    (0..p.len()).all(|d| {
        connectedness_check(&local_crown(p, d, CrownKind::Ind).source)
            .map(|r| r.one_connected)
            .unwrap_or(false)
    })
}

pub fn is_pro_flat(p: &Poset) -> bool {
    is_ind_flat(&p.opposite())
}

/// Every open interval `(a, b)` is linearly ordered.
pub fn quasitree_by_intervals(p: &Poset) -> bool {
    let n = p.len();
    for a in 0..n {
        for b in 0..n {
            if !p.lt(a, b) {
                continue;
            }
            let interval: Vec<usize> = (0..n).filter(|&x| p.lt(a, x) && p.lt(x, b)).collect();
            for &x in &interval {
                for &y in &interval {
                    if !p.comparable(x, y) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Every `ind-crown(Λ^0(a))` is discrete.
pub fn quasitree_by_crowns(p: &Poset) -> bool {
    (0..p.len()).all(|a| local_crown(p, a, CrownKind::Ind).source.is_discrete())
}

pub fn quasitree_check(p: &Poset) -> Result<bool, FlatnessError> {
    let intervals = quasitree_by_intervals(p);
    let crowns = quasitree_by_crowns(p);
    if intervals != crowns {
        return Err(FlatnessError::CharacterizationDisagreement { intervals, crowns });
    }
    Ok(intervals)
}

/// `SC_n`: elements `s, v0..v{n-1}, u0..u{n-1}, t` with `v_i < u_i`,
/// `v_i < u_{i-1}`, `u_i < t`, `s < v_i`.
pub fn suspended_crown(n: usize) -> Result<Poset, FlatnessError> {
    if n < 2 {
        return Err(FlatnessError::BadParameter(n));
    }
    let mut names = vec!["s".to_string()];
    names.extend((0..n).map(|i| format!("v{i}")));
    names.extend((0..n).map(|i| format!("u{i}")));
    names.push("t".to_string());
    let mut covers = Vec::new();
    for i in 0..n {
        let v = format!("v{i}");
        covers.push((v.clone(), format!("u{i}")));
        covers.push((v.clone(), format!("u{}", (i + n - 1) % n)));
        covers.push((format!("u{i}"), "t".to_string()));
        covers.push(("s".to_string(), v));
    }
    Ok(Poset::from_cover_relations(&names, &covers).expect("suspended crown is a valid order"))
}

struct EmbeddingSearch<'a> {
    small: &'a Poset,
    large: &'a Poset,
    order: Vec<usize>,
    sig_small: Vec<(usize, usize)>,
    sig_large: Vec<(usize, usize)>,
    assignment: Vec<Option<usize>>,
    used: Vec<bool>,
}

impl EmbeddingSearch<'_> {
    fn candidate_ok(&self, s: usize, l: usize) -> bool {
        let (sd, su) = self.sig_small[s];
        let (ld, lu) = self.sig_large[l];
        if ld < sd || lu < su {
            return false;
        }
        for (s2, a) in self.assignment.iter().enumerate() {
            if let Some(l2) = *a {
                if self.small.le(s, s2) != self.large.le(l, l2)
                    || self.small.le(s2, s) != self.large.le(l2, l)
                {
                    return false;
                }
            }
        }
        true
    }

    fn run(&mut self, depth: usize, visit: &mut dyn FnMut(&[usize]) -> bool) -> bool {
        if depth == self.order.len() {
            let map: Vec<usize> = self.assignment.iter().map(|a| a.unwrap()).collect();
            return visit(&map);
        }
        let s = self.order[depth];
        for l in 0..self.large.len() {
            if self.used[l] || !self.candidate_ok(s, l) {
                continue;
            }
            self.assignment[s] = Some(l);
            self.used[l] = true;
            let stop = self.run(depth + 1, visit);
            self.used[l] = false;
            self.assignment[s] = None;
            if stop {
                return true;
            }
        }
        false
    }
}

/// Visits every full embedding of `small` into `large` in deterministic
/// order until `visit` returns `true`.
pub fn for_each_full_embedding(small: &Poset, large: &Poset, mut visit: impl FnMut(&[usize]) -> bool) {
    if small.len() > large.len() {
        return;
    }
    let sig_small = small.degree_signature();
    // place well-connected elements first; ties by position
    let mut order: Vec<usize> = (0..small.len()).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(sig_small[i].0 + sig_small[i].1));
    let mut search = EmbeddingSearch {
        small,
        large,
        order,
        sig_small,
        sig_large: large.degree_signature(),
        assignment: vec![None; small.len()],
        used: vec![false; large.len()],
    };
    search.run(0, &mut visit);
}

pub fn find_full_embedding(small: &Poset, large: &Poset) -> Option<SubposetEmbedding> {
    let mut found = None;
    for_each_full_embedding(small, large, |m| {
        found = Some(m.to_vec());
        true
    });
    found.map(|map| SubposetEmbedding { source: small.clone(), target: large.clone(), map, full: true })
}

pub fn all_full_embeddings(small: &Poset, large: &Poset) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for_each_full_embedding(small, large, |m| {
        out.push(m.to_vec());
        false
    });
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MitchellCondition {
    /// A full `SC_n` with `n >= 3`.
    I,
    /// A full `SC_2` without a mediating element.
    II,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitchellWitness {
    pub n: usize,
    pub embedding: SubposetEmbedding,
    pub condition: MitchellCondition,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MitchellReport {
    pub dimension_le_2: bool,
    pub witness: Option<MitchellWitness>,
    /// Number of full `SC_2` embeddings found.
    pub sc2_embeddings: usize,
    /// How many of those lack a mediating element.
    pub sc2_unmediated: usize,
}

impl MitchellReport {
    /// Condition (ii) read as "every `SC_2` copy is unmediated".
    pub fn condition_ii_all_embeddings(&self) -> bool {
        self.sc2_embeddings > 0 && self.sc2_unmediated == self.sc2_embeddings
    }
}

fn has_mediator(p: &Poset, sc2: &Poset, map: &[usize]) -> bool {
    let at = |name: &str| map[sc2.index_of(name).unwrap()];
    let (v0, v1, u0, u1) = (at("v0"), at("v1"), at("u0"), at("u1"));
    (0..p.len()).any(|d| p.le(v0, d) && p.le(v1, d) && p.le(d, u0) && p.le(d, u1))
}

pub fn mitchell_check(p: &Poset) -> MitchellReport {
    let n_max = p.len().saturating_sub(2) / 2;
    for n in 3..=n_max {
        let sc = suspended_crown(n).unwrap();
        if let Some(embedding) = find_full_embedding(&sc, p) {
            return MitchellReport {
                dimension_le_2: false,
                witness: Some(MitchellWitness { n, embedding, condition: MitchellCondition::I }),
                sc2_embeddings: 0,
                sc2_unmediated: 0,
            };
        }
    }
    let sc2 = suspended_crown(2).unwrap();
    let mut total = 0;
    let mut unmediated = 0;
    let mut first_bad = None;
    for_each_full_embedding(&sc2, p, |m| {
        total += 1;
        if !has_mediator(p, &sc2, m) {
            unmediated += 1;
            if first_bad.is_none() {
                first_bad = Some(m.to_vec());
            }
        }
        false
    });
    let witness = first_bad.map(|map| MitchellWitness {
        n: 2,
        embedding: SubposetEmbedding { source: sc2.clone(), target: p.clone(), map, full: true },
        condition: MitchellCondition::II,
    });
    MitchellReport {
        dimension_le_2: witness.is_none(),
        witness,
        sc2_embeddings: total,
        sc2_unmediated: unmediated,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crown::is_crown;

    fn sets(v: &[&[u32]]) -> Poset {
        Poset::of_sets(&v.iter().map(|s| s.to_vec()).collect::<Vec<_>>())
    }

    fn hollow_cube() -> Poset {
        let p = Poset::powerset(3);
        let top = p.index_of("{1,2,3}").unwrap();
        p.without(&[top]).source
    }

    #[test]
    fn hollow_cube_is_ind_flat_only() {
        let p = hollow_cube();
        let r = flatness_check(&p);
        assert!(r.ind_flat);
        assert!(!r.pro_flat);
        let bad = r.failing_elements(CrownKind::Pro);
        assert_eq!(bad.iter().map(|&i| p.name(i)).collect::<Vec<_>>(), vec!["{}"]);
    }

    #[test]
    fn grids_are_flat() {
        for m in 0..=4 {
            for n in 0..=4 {
                let p = Poset::product(&Poset::chain(m), &Poset::chain(n));
                assert!(flatness_check(&p).flat, "Δ{m}×Δ{n}");
            }
        }
    }

    #[test]
    fn cubes_are_not_flat() {
        for m in 3..=4 {
            let r = flatness_check(&Poset::powerset(m));
            assert!(!r.ind_flat && !r.pro_flat);
        }
    }

    #[test]
    fn flatness_is_self_dual() {
        for p in [hollow_cube(), Poset::powerset(3), sets(&[&[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]])] {
            assert_eq!(is_ind_flat(&p), is_pro_flat(&p.opposite()));
            assert_eq!(is_ind_flat(&p), flatness_check(&p).ind_flat);
        }
    }

    #[test]
    fn quasitree_examples() {
        let crown = sets(&[&[1], &[2], &[1, 2], &[2, 3]]);
        assert!(is_crown(&crown));
        assert!(quasitree_check(&crown).unwrap());
        let square = Poset::product(&Poset::chain(1), &Poset::chain(1));
        assert!(!quasitree_check(&square).unwrap());
        assert!(quasitree_check(&sets(&[&[1], &[2], &[1, 2]])).unwrap());
        assert!(quasitree_check(&Poset::chain(4)).unwrap());
    }

    #[test]
    fn suspended_crowns() {
        let sc2 = suspended_crown(2).unwrap();
        assert_eq!(sc2.len(), 6);
        let s = sc2.index_of("s").unwrap();
        let t = sc2.index_of("t").unwrap();
        assert!((0..6).all(|i| sc2.le(s, i) && sc2.le(i, t)));
        assert_eq!(suspended_crown(1), Err(FlatnessError::BadParameter(1)));
    }

    #[test]
    fn sc3_middle_is_hollow_cube_crown() {
        let sc3 = suspended_crown(3).unwrap();
        let s = sc3.index_of("s").unwrap();
        let t = sc3.index_of("t").unwrap();
        let middle = sc3.without(&[s, t]).source;
        let crown = hollow_cube().crown_of(CrownKind::Ind).source;
        assert!(find_full_embedding(&middle, &crown).is_some());
        assert!(find_full_embedding(&crown, &middle).is_some());
        assert_eq!(middle.len(), crown.len());
    }

    #[test]
    fn embedding_cardinality() {
        assert!(find_full_embedding(&Poset::chain(2), &Poset::chain(1)).is_none());
        let e = find_full_embedding(&Poset::chain(1), &Poset::chain(3)).unwrap();
        assert!(e.is_valid());
    }

    #[test]
    fn mitchell_small() {
        let sq = Poset::product(&Poset::chain(1), &Poset::chain(1));
        assert!(mitchell_check(&sq).dimension_le_2);
        assert!(mitchell_check(&Poset::chain(5)).dimension_le_2);
        let r = mitchell_check(&suspended_crown(2).unwrap());
        assert!(!r.dimension_le_2);
        assert_eq!(r.witness.unwrap().condition, MitchellCondition::II);
    }
}

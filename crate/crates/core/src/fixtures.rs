//! Worked examples with known verdicts, used as a regression suite.

use std::collections::BTreeMap;

use crate::colimit::brute_force_colimit;
use crate::crown::{boundary_matrix, connectedness_check};
use crate::diagram::{CheckFailure, CheckLevel, Prediagram};
use crate::flatness::{all_full_embeddings, flatness_check, is_ind_flat, is_pro_flat, mitchell_check, suspended_crown};
use crate::lifting::{lift_diagram, lift_morphism, strict_lift_of_stable_morphism};
use crate::modcat::{is_mono, Mat, ModMorphism, ModObject, RingParams};
use crate::poset::{ConeMode, CrownKind, Poset};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn sets(v: &[&[u32]]) -> Poset {
    Poset::of_sets(&v.iter().map(|s| s.to_vec()).collect::<Vec<_>>())
}

fn at(p: &Poset, name: &str) -> Result<usize, String> {
    p.index_of(name).ok_or_else(|| format!("missing element {name}"))
}

/// The Boolean cube on three letters with its top removed.
pub fn hollow_cube() -> Poset {
    sets(&[&[], &[1], &[2], &[3], &[1, 2], &[1, 3], &[2, 3]])
}

/// A poset whose ind-crown is not a full subposet.
pub fn non_full_crown_poset() -> Poset {
    sets(&[&[], &[1], &[2], &[2, 3], &[2, 4]])
}

/// A crown whose ind- and pro-crowns are distinct proper subposets.
pub fn split_crown_poset() -> Poset {
    sets(&[&[1], &[2], &[1, 2], &[2, 3]])
}

/// Two minimal elements under two maximal ones: a single square.
pub fn square_crown() -> Poset {
    sets(&[&[1], &[2], &[1, 2, 3], &[1, 2, 4]])
}

pub fn ten_element_flat() -> Poset {
    sets(&[&[], &[1], &[2], &[3], &[1, 4], &[1, 5], &[1, 2, 3], &[3, 4], &[3, 5], &[1, 2, 3, 4, 5]])
}

/// A flat poset and a full subposet of it that is not ind-flat.
pub fn flat_with_bad_subposet() -> (Poset, Poset) {
    let d = sets(&[&[1], &[2], &[1, 2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]]);
    let dp = sets(&[&[1], &[2], &[1, 2, 3], &[1, 2, 4], &[1, 2, 3, 4]]);
    (d, dp)
}

/// Contains a suspended 3-crown whose top has a 1-connected lower crown.
pub fn suspended_crown_shifted() -> Poset {
    sets(&[&[], &[1], &[2], &[3], &[1, 2], &[2, 3], &[1, 3], &[1, 2, 3], &[1, 3, 4], &[1, 2, 3, 4]])
}

/// Adding one element to a suspended 3-crown raises the kernel dimension.
pub fn suspended_crown_jump() -> Poset {
    sets(&[&[], &[1], &[2], &[3], &[1, 2], &[2, 3, 4], &[1, 3, 4], &[1, 2, 3], &[1, 2, 3, 4]])
}

fn scalar(a: &ModObject, b: &ModObject, m: i64) -> ModMorphism {
    ModMorphism::new(a.clone(), b.clone(), Mat::from_rows(&[vec![m]])).expect("well-defined scalar map")
}

fn cyc(ring: RingParams, e: u32) -> ModObject {
    ModObject::cyclic(ring, e).expect("exponent in range")
}

/// The square crown with every vertex `Z/p^k`, unit arrows and `m` on `b -> v`.
pub fn square_diagram(p: u64, k: u32, m: i64) -> Prediagram {
    let ring = RingParams::new(p, k).expect("valid ring");
    let shape = square_crown();
    let x = cyc(ring, k);
    let objects = vec![x.clone(); 4];
    let mut arrows = BTreeMap::new();
    for (a, b, c) in [("{1}", "{1,2,3}", 1), ("{1}", "{1,2,4}", 1), ("{2}", "{1,2,3}", 1), ("{2}", "{1,2,4}", m)] {
        arrows.insert((shape.index_of(a).unwrap(), shape.index_of(b).unwrap()), scalar(&x, &x, c));
    }
    Prediagram::new(shape, ring, objects, arrows).expect("valid square diagram")
}

/// Over the 3-chain: zero, zero, and a monomorphism into a free module on
/// the long arrow. Stably but not strictly commutative.
pub fn chain_obstruction() -> Prediagram {
    let ring = RingParams::new(3, 2).unwrap();
    let (x0, x1, x2) = (cyc(ring, 1), cyc(ring, 1), cyc(ring, 2));
    let mut arrows = BTreeMap::new();
    arrows.insert((0, 1), ModMorphism::zero(&x0, &x1));
    arrows.insert((1, 2), ModMorphism::zero(&x1, &x2));
    arrows.insert((0, 2), scalar(&x0, &x2, 3));
    Prediagram::new(Poset::chain(2), ring, vec![x0, x1, x2], arrows).unwrap()
}

/// A stable morphism over `{1}, {2} < {1,2}` that has no strict
/// representative, over `Z/p^3`.
pub fn unliftable_morphism(p: u64) -> (Prediagram, Prediagram, Vec<ModMorphism>) {
    let ring = RingParams::new(p, 3).unwrap();
    let shape = sets(&[&[1], &[2], &[1, 2]]);
    let p = p as i64;
    let z = cyc(ring, 2);
    let zz = z.direct_sum(&z);
    let zero = ModObject::zero(ring);
    let mut xa = BTreeMap::new();
    xa.insert((0, 2), ModMorphism::new(z.clone(), zz.clone(), Mat::from_rows(&[vec![p - 1, 1]])).unwrap());
    xa.insert((1, 2), ModMorphism::new(z.clone(), zz.clone(), Mat::from_rows(&[vec![p + 1, -1]])).unwrap());
    let x = Prediagram::new(shape.clone(), ring, vec![z.clone(), z.clone(), zz.clone()], xa).unwrap();
    let mut ya = BTreeMap::new();
    ya.insert((0, 2), ModMorphism::zero(&zero, &z));
    ya.insert((1, 2), ModMorphism::zero(&zero, &z));
    let y = Prediagram::new(shape, ring, vec![zero.clone(), zero.clone(), z.clone()], ya).unwrap();
    let fhat = vec![
        ModMorphism::zero(&z, &zero),
        ModMorphism::zero(&z, &zero),
        ModMorphism::new(zz, z, Mat::from_rows(&[vec![1], vec![1]])).unwrap(),
    ];
    (x, y, fhat)
}

pub fn check_hollow_cube_crown() -> Check {
    let p = hollow_cube();
    let crown = p.crown_of(CrownKind::Ind);
    let c = &crown.source;
    ensure!(c.len() == 6, "crown size {} != 6", c.len());
    ensure!(c.strict_relations().len() == 6, "crown relation count != 6");
    let report = connectedness_check(c).map_err(|e| e.to_string())?;
    ensure!(report.kernel_dim == 1, "kernel dimension {} != 1", report.kernel_dim);
    ensure!(!report.one_connected, "crown reported 1-connected");
    let w = report.cycle_witness.ok_or("no cycle witness")?;
    let b = boundary_matrix(c).map_err(|e| e.to_string())?;
    let labels = b.row_labels();
    let order = ["{1}->{1,2}", "{1}->{1,3}", "{2}->{1,2}", "{2}->{2,3}", "{3}->{1,3}", "{3}->{2,3}"];
    let mut ordered = Vec::new();
    for l in order {
        let i = labels.iter().position(|x| x == l).ok_or_else(|| format!("missing relation {l}"))?;
        ordered.push(w[i]);
    }
    let expected = [1, -1, -1, 1, 1, -1];
    let s = ordered[0];
    ensure!(
        s != 0 && ordered.iter().zip(expected).all(|(&x, e)| x == s * e),
        "witness {ordered:?} not proportional to {expected:?}"
    );
    Ok(())
}

pub fn check_non_full_crown() -> Check {
    let p = non_full_crown_poset();
    let c = p.crown_of(CrownKind::Ind);
    ensure!(c.source.len() == p.len(), "ind-crown does not contain every element");
    ensure!(!c.full, "ind-crown reported full");
    let (e, two) = (at(&c.source, "{}")?, at(&c.source, "{2}")?);
    ensure!(!c.source.lt(e, two), "{{}} < {{2}} survived in the crown");
    ensure!(crate::crown::is_crown(&c.source), "ind-crown is not a crown");
    Ok(())
}

pub fn check_split_crowns() -> Check {
    let p = split_crown_poset();
    ensure!(crate::crown::is_crown(&p), "poset is not a crown");
    let ind: Vec<_> = p.crown_of(CrownKind::Ind).source.names().to_vec();
    let pro: Vec<_> = p.crown_of(CrownKind::Pro).source.names().to_vec();
    ensure!(ind == ["{2}", "{1,2}", "{2,3}"], "ind-crown {ind:?}");
    ensure!(pro == ["{1}", "{2}", "{1,2}"], "pro-crown {pro:?}");
    Ok(())
}

pub fn check_square_colimit(x: &Prediagram) -> Check {
    let report = connectedness_check(&x.shape).map_err(|e| e.to_string())?;
    ensure!(!report.one_connected && report.kernel_dim == 1, "square crown is 1-connected");
    ensure!(x.is_purely_monic(), "square diagram is not purely monic");
    let colim = brute_force_colimit(x).map_err(|e| e.to_string())?;
    ensure!(colim.is_cocone(), "brute-force cocone does not commute");
    ensure!(colim.apex.invariants() == vec![1], "apex {} is not Z/3", colim.apex);
    for name in ["{1,2,3}", "{1,2,4}"] {
        let i = at(&x.shape, name)?;
        ensure!(!is_mono(&colim.legs[i]), "leg from {name} is mono");
    }
    Ok(())
}

pub fn check_flatness_classification() -> Check {
    let hc = hollow_cube();
    let r = flatness_check(&hc);
    ensure!(r.ind_flat && !r.pro_flat, "hollow cube: ind_flat={} pro_flat={}", r.ind_flat, r.pro_flat);
    let failing: Vec<&str> = r.failing_elements(CrownKind::Pro).iter().map(|&i| hc.name(i)).collect();
    ensure!(failing == ["{}"], "hollow cube fails pro-flatness at {failing:?}");
    for (label, p) in [("non-full crown poset", non_full_crown_poset()), ("split crown poset", split_crown_poset())] {
        ensure!(is_ind_flat(&p) && is_pro_flat(&p), "{label} is not flat");
    }
    for m in 0..=4 {
        for n in 0..=4 {
            let g = Poset::product(&Poset::chain(m), &Poset::chain(n));
            ensure!(is_ind_flat(&g) && is_pro_flat(&g), "grid {m}x{n} is not flat");
        }
    }
    for m in [3, 4] {
        let p = Poset::powerset(m);
        ensure!(!is_ind_flat(&p) && !is_pro_flat(&p), "powerset {m} is ind- or pro-flat");
    }
    Ok(())
}

/// Expected flat, but the ind-crown below the top is not 1-connected, so
/// this check fails.
pub fn check_ten_element_flat() -> Check {
    let p = ten_element_flat();
    let r = flatness_check(&p);
    if let Some(f) = r.failures.first() {
        return Err(format!(
            "not {}-flat at {}: crown kernel dimension {}",
            if f.direction == CrownKind::Ind { "ind" } else { "pro" },
            p.name(f.element),
            f.report.kernel_dim
        ));
    }
    Ok(())
}

pub fn check_subposet_not_inherited() -> Check {
    let (d, dp) = flat_with_bad_subposet();
    ensure!(is_ind_flat(&d) && is_pro_flat(&d), "D is not flat");
    let r = flatness_check(&dp);
    ensure!(!r.ind_flat, "D' is ind-flat");
    let failing: Vec<&str> = r.failing_elements(CrownKind::Ind).iter().map(|&i| dp.name(i)).collect();
    ensure!(failing == ["{1,2,3,4}"], "D' fails at {failing:?}");
    Ok(())
}

fn lower_crown_kernel(p: &Poset, name: &str) -> Result<usize, String> {
    let cone = p.cone(at(p, name)?, ConeMode::StrictDown).source;
    let crown = cone.crown_of(CrownKind::Ind).source;
    Ok(connectedness_check(&crown).map_err(|e| e.to_string())?.kernel_dim)
}

fn has_sc3_with_image(p: &Poset, missing: &[&str]) -> Result<bool, String> {
    let sc3 = suspended_crown(3).map_err(|e| e.to_string())?;
    let mut want: Vec<usize> = (0..p.len()).filter(|&i| !missing.contains(&p.name(i))).collect();
    want.sort_unstable();
    Ok(all_full_embeddings(&sc3, p).into_iter().any(|mut m| {
        m.sort_unstable();
        m == want
    }))
}

pub fn check_suspended_crown_shifted() -> Check {
    let p = suspended_crown_shifted();
    ensure!(has_sc3_with_image(&p, &["{1,2,3}", "{1,3}"])?, "no SC_3 with the expected image");
    ensure!(lower_crown_kernel(&p, "{1,2,3,4}")? == 0, "crown below {{1,2,3,4}} is not 1-connected");
    ensure!(lower_crown_kernel(&p, "{1,2,3}")? > 0, "crown below {{1,2,3}} is 1-connected");
    let m = mitchell_check(&p);
    ensure!(!m.dimension_le_2 && m.witness.map(|w| w.n) == Some(3), "Mitchell scan misses SC_3");
    Ok(())
}

pub fn check_suspended_crown_jump() -> Check {
    let d = suspended_crown_jump();
    ensure!(has_sc3_with_image(&d, &["{1,2,3}"])?, "no SC_3 with the expected image");
    let top = at(&d, "{1,2,3}")?;
    let dp = d.without(&[top]).source;
    let small = lower_crown_kernel(&dp, "{1,2,3,4}")?;
    let big = lower_crown_kernel(&d, "{1,2,3,4}")?;
    ensure!(small == 1, "kernel dimension in D' is {small}");
    ensure!(big == 2, "kernel dimension in D is {big}");
    ensure!(!is_ind_flat(&d), "D is ind-flat");
    Ok(())
}

pub fn check_chain_obstruction(x: &Prediagram) -> Check {
    ensure!(x.is_stably_commutative(), "prediagram is not stably commutative");
    let strict = x.check(CheckLevel::StrictlyCommutative);
    ensure!(!strict.passed(), "prediagram is strictly commutative");
    ensure!(
        strict.failures.iter().any(|f| matches!(f, CheckFailure::Triple { a: 0, b: 1, c: 2, .. })),
        "no failure at the triple 0 < 1 < 2"
    );
    let res = lift_diagram(x).map_err(|e| e.to_string())?;
    let v = res.verify();
    ensure!(v.pure, "lift is not purely monic");
    ensure!(v.strictly_commutative, "lift is not strictly commutative");
    ensure!(v.stable_iso, "lift is not stably isomorphic to the input");
    ensure!(!res.iso.is_strictly_natural(), "a homotopism to the input was returned");
    Ok(())
}

pub fn check_unliftable_morphism(x: &Prediagram, y: &Prediagram, fhat: &[ModMorphism]) -> Check {
    let strict = strict_lift_of_stable_morphism(x, y, fhat).map_err(|e| e.to_string())?;
    ensure!(strict.is_none(), "a strict lift exists");
    let res = lift_morphism(x, y, fhat).map_err(|e| e.to_string())?;
    let v = res.verify(fhat);
    ensure!(v.homotopism, "g' is not a homotopism");
    ensure!(v.natural, "g is not strictly natural");
    ensure!(v.purely_monic, "X' is not purely monic");
    ensure!(v.certified, "g' f and g are not stably equal");
    Ok(())
}

/// Identities in `Z/27` for an involution up to homotopy on `Z/9`.
pub fn check_involution_arithmetic() -> Check {
    let ring = RingParams::new(3, 3).unwrap();
    let (c, n) = (cyc(ring, 2), cyc(ring, 3));
    let a = scalar(&c, &c, 2);
    let u = scalar(&c, &n, 3);
    let v = scalar(&n, &c, 1);
    let at = scalar(&n, &n, 2);
    ensure!(u.then(&at) == a.then(&u), "u ã != a u");
    ensure!(u.then(&at).matrix().get(0, 0) == 6, "u ã is not 6");
    ensure!(at.then(&v).sub(&v.then(&a)).is_zero(), "ã v - v a != 0");
    ensure!(at.then(&at).sub(&ModMorphism::identity(&n)).sub(&v.then(&u)).is_zero(), "ã² - 1 - v u != 0");
    ensure!(a.then(&a).sub(&ModMorphism::identity(&c)) == u.then(&v), "a² - 1 != u v");
    let cn = c.direct_sum(&n);
    let m = ModMorphism::new(cn.clone(), cn.clone(), Mat::from_rows(&[vec![2, 3], vec![-1, -2]]))
        .map_err(|e| e.to_string())?;
    ensure!(m.then(&m) == ModMorphism::identity(&cn), "replacement endomorphism is not an involution");
    Ok(())
}

pub struct Fixture {
    pub name: &'static str,
    pub summary: &'static str,
    run: fn() -> Check,
}

impl Fixture {
    pub fn run(&self) -> Check {
        (self.run)()
    }
}

pub fn all() -> Vec<Fixture> {
    vec![
        Fixture { name: "hollow-cube-crown", summary: "ind-crown kernel and cycle witness", run: check_hollow_cube_crown },
        Fixture { name: "non-full-crown", summary: "ind-crown is not a full subposet", run: check_non_full_crown },
        Fixture { name: "split-crowns", summary: "ind- and pro-crowns of a crown", run: check_split_crowns },
        Fixture {
            name: "square-colimit",
            summary: "colimit over a square crown has non-mono legs",
            run: || check_square_colimit(&square_diagram(3, 2, 4)),
        },
        Fixture {
            name: "flatness-classification",
            summary: "hollow cube, grids, cubes",
            run: check_flatness_classification,
        },
        Fixture { name: "ten-element-flat", summary: "ten-element poset listed as flat", run: check_ten_element_flat },
        Fixture {
            name: "subposet-not-inherited",
            summary: "full subposet of a flat poset",
            run: check_subposet_not_inherited,
        },
        Fixture {
            name: "chain-obstruction",
            summary: "lift exists without a homotopism",
            run: || check_chain_obstruction(&chain_obstruction()),
        },
        Fixture {
            name: "involution-arithmetic",
            summary: "identities in Z/27",
            run: check_involution_arithmetic,
        },
        Fixture {
            name: "unliftable-morphism",
            summary: "no strict lift, but a lift after replacement",
            run: || {
                let (x, y, f) = unliftable_morphism(3);
                check_unliftable_morphism(&x, &y, &f)
            },
        },
        Fixture {
            name: "unliftable-morphism-p5",
            summary: "same, over Z/125",
            run: || {
                let (x, y, f) = unliftable_morphism(5);
                check_unliftable_morphism(&x, &y, &f)
            },
        },
        Fixture {
            name: "suspended-crown-shifted",
            summary: "SC_3 inside a poset with a 1-connected top",
            run: check_suspended_crown_shifted,
        },
        Fixture {
            name: "suspended-crown-jump",
            summary: "kernel dimension jumps from 1 to 2",
            run: check_suspended_crown_jump,
        },
    ]
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub name: &'static str,
    pub result: Check,
}

pub fn run_all() -> Vec<Outcome> {
    all().into_iter().map(|f| Outcome { name: f.name, result: f.run() }).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Only the ten-element poset disagrees with its listed verdict.
    #[test]
    fn fixture_outcomes() {
        let outcomes = run_all();
        assert!(outcomes.len() >= 12);
        for o in outcomes {
            if o.name == "ten-element-flat" {
                assert_eq!(o.result, Err("not ind-flat at {1,2,3,4,5}: crown kernel dimension 4".into()));
            } else {
                assert!(o.result.is_ok(), "{}: {:?}", o.name, o.result);
            }
        }
    }

    // cycle rank of the comparability graph: edges - vertices + components
    fn cycle_rank(c: &Poset) -> usize {
        let n = c.len();
        let edges = c.strict_relations();
        let mut comp: Vec<usize> = (0..n).collect();
        fn root(comp: &mut [usize], i: usize) -> usize {
            if comp[i] == i { i } else { let r = root(comp, comp[i]); comp[i] = r; r }
        }
        let mut components = n;
        for &(a, b) in &edges {
            let (ra, rb) = (root(&mut comp, a), root(&mut comp, b));
            if ra != rb {
                comp[ra] = rb;
                components -= 1;
            }
        }
        edges.len() + components - n
    }

    #[test]
    fn ten_element_top_crown_has_four_cycles() {
        let p = ten_element_flat();
        let top = p.index_of("{1,2,3,4,5}").unwrap();
        let cone = p.cone(top, ConeMode::StrictDown).source;
        let crown = cone.crown_of(CrownKind::Ind).source;
        assert_eq!(crown.len(), 8);
        assert_eq!(crown.strict_relations().len(), 11);
        assert_eq!(cycle_rank(&crown), 4);
        let without_top = p.without(&[top]).source;
        assert!(is_ind_flat(&without_top) && is_pro_flat(&without_top));
    }

    #[test]
    fn tampered_chain_fails_named_check() {
        let mut x = chain_obstruction();
        let z = ModMorphism::zero(x.object(0), x.object(2));
        x.arrows.insert((0, 2), z);
        let err = check_chain_obstruction(&x).unwrap_err();
        assert_eq!(err, "prediagram is strictly commutative");
    }

    #[test]
    fn tampered_morphism_is_rejected() {
        let (x, y, mut f) = unliftable_morphism(3);
        f[2] = ModMorphism::new(f[2].source().clone(), f[2].target().clone(), Mat::from_rows(&[vec![1], vec![2]]))
            .unwrap();
        let err = check_unliftable_morphism(&x, &y, &f).unwrap_err();
        assert!(err.contains("not stably natural"), "{err}");
    }

    #[test]
    fn tampered_square_fails() {
        let x = square_diagram(3, 2, 2);
        assert!(check_square_colimit(&x).is_err());
    }
}

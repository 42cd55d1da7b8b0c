//! Seeded random test instances: posets, crowns, purely monic diagrams and
//! their stably commutative perturbations.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{DiagramMorphism, Prediagram};
use crate::flatness::{is_ind_flat, is_pro_flat, quasitree_by_intervals};
use crate::modcat::system::{Compare, LinearSystem, Term};
use crate::modcat::{bijective_embedding, is_iso, solve, Mat, ModMorphism, ModObject, RingParams, Side};
use crate::poset::Poset;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random order on `n` elements: a random DAG on `0..n` with edge
/// probability `density`, transitively closed.
pub fn random_poset<R: Rng>(rng: &mut R, n: usize, density: f64) -> Poset {
    let mut rel = vec![false; n * n];
    for i in 0..n {
        for j in i + 1..n {
            rel[i * n + j] = rng.gen_bool(density);
        }
    }
    let names = (0..n).map(|i| format!("x{i}")).collect();
    Poset::from_relation(names, &rel).expect("upper-triangular relation is acyclic")
}

fn sample_until<R: Rng>(rng: &mut R, max_n: usize, keep: impl Fn(&Poset) -> bool) -> Poset {
    loop {
        let n = rng.gen_range(max_n.saturating_sub(2).max(1)..=max_n);
        let density = rng.gen_range(0.2..0.7);
        let p = random_poset(rng, n, density);
        if keep(&p) {
            return p;
        }
    }
}

pub fn random_ind_flat_poset<R: Rng>(rng: &mut R, max_n: usize) -> Poset {
    sample_until(rng, max_n, is_ind_flat)
}

pub fn random_pro_flat_poset<R: Rng>(rng: &mut R, max_n: usize) -> Poset {
    sample_until(rng, max_n, is_pro_flat)
}

pub fn random_quasitree<R: Rng>(rng: &mut R, max_n: usize) -> Poset {
    sample_until(rng, max_n, quasitree_by_intervals)
}

/// Random crown with `lower` minimal-side and `upper` maximal-side elements.
pub fn random_crown<R: Rng>(rng: &mut R, lower: usize, upper: usize, density: f64) -> Poset {
    let names: Vec<String> =
        (0..lower).map(|i| format!("l{i}")).chain((0..upper).map(|j| format!("u{j}"))).collect();
    let mut covers = Vec::new();
    for i in 0..lower {
        for j in 0..upper {
            if rng.gen_bool(density) {
                covers.push((names[i].clone(), names[lower + j].clone()));
            }
        }
    }
    Poset::from_cover_relations(&names, &covers).expect("bipartite relation is an order")
}

/// Random morphism `source -> target`; every well-defined matrix is possible.
pub fn random_morphism<R: Rng>(rng: &mut R, source: &ModObject, target: &ModObject) -> ModMorphism {
    let ring = source.ring;
    let mut m = Mat::zeros(source.rank(), target.rank());
    for (i, &e) in source.exponents.iter().enumerate() {
        for (j, &f) in target.exponents.iter().enumerate() {
            let step = ring.pow_p(f.saturating_sub(e));
            m.set(i, j, step * rng.gen_range(0..ring.pow_p(f) / step));
        }
    }
    ModMorphism::new(source.clone(), target.clone(), m).expect("entries respect the divisibility constraint")
}

/// Random automorphism together with its inverse.
pub fn random_automorphism<R: Rng>(rng: &mut R, x: &ModObject) -> (ModMorphism, ModMorphism) {
    let p = x.ring.p as i64;
    for _ in 0..32 {
        let mut a = random_morphism(rng, x, x);
        let mut m = a.matrix().clone();
        for i in 0..x.rank() {
            let unit = loop {
                let u = rng.gen_range(1..x.ring.modulus());
                if u % p != 0 {
                    break u;
                }
            };
            m.set(i, i, unit);
        }
        a = ModMorphism::new(x.clone(), x.clone(), m).expect("diagonal units keep the matrix well-defined");
        if is_iso(&a) {
            let inv = solve(&a, &ModMorphism::identity(x), Side::ThroughSource)
                .expect("same ring")
                .expect("isomorphisms are invertible");
            return (a, inv);
        }
    }
    (ModMorphism::identity(x), ModMorphism::identity(x))
}

fn heights(shape: &Poset) -> Vec<u32> {
    let n = shape.len();
    let mut h = vec![0u32; n];
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&i| (0..n).filter(|&j| shape.lt(j, i)).count());
    for &i in &order {
        h[i] = (0..n).filter(|&j| shape.lt(j, i)).map(|j| h[j] + 1).max().unwrap_or(0);
    }
    h
}

/// Summand `(generator, exponent)` of a generated object.
type Summands = Vec<(usize, u32)>;

/// Strictly commutative purely monic diagram of rank at most `max_rank`.
///
/// Each of up to `max_rank` generators `q` carries `Z/p^{e_q}` at `q`,
/// growing by `p^{g_q}` per height step above `q` (capped at `k`), with
/// canonical embeddings along arrows; each vertex is then twisted by a
/// random automorphism.
pub fn random_monic_diagram<R: Rng>(rng: &mut R, shape: &Poset, ring: RingParams, max_rank: usize) -> Prediagram {
    let n = shape.len();
    let h = heights(shape);
    let gens: Vec<(usize, u32, u32)> = if n == 0 {
        Vec::new()
    } else {
        (0..rng.gen_range(1..=max_rank.max(1)))
            .map(|_| (rng.gen_range(0..n), rng.gen_range(1..=ring.k), rng.gen_range(0..=1)))
            .collect()
    };
    let summands: Vec<Summands> = (0..n)
        .map(|a| {
            gens.iter()
                .enumerate()
                .filter(|(_, g)| shape.le(g.0, a))
                .map(|(gi, &(q, e, g))| (gi, (e + g * (h[a] - h[q])).min(ring.k)))
                .collect()
        })
        .collect();
    let objects: Vec<ModObject> = summands
        .iter()
        .map(|s| ModObject::new(ring, s.iter().map(|&(_, e)| e).collect()).unwrap())
        .collect();
    let twists: Vec<_> = objects.iter().map(|x| random_automorphism(rng, x)).collect();
    let mut arrows = BTreeMap::new();
    for (a, b) in shape.strict_relations() {
        let m = Mat::from_fn(objects[a].rank(), objects[b].rank(), |i, j| {
            let (gi, ei) = summands[a][i];
            let (gj, ej) = summands[b][j];
            if gi == gj {
                ring.pow_p(ej - ei)
            } else {
                0
            }
        });
        let canonical = ModMorphism::new(objects[a].clone(), objects[b].clone(), m).unwrap();
        let twisted = twists[a].1.then(&canonical).then(&twists[b].0);
        arrows.insert((a, b), twisted);
    }
    Prediagram::new(shape.clone(), ring, objects, arrows).expect("generated diagram is well-typed")
}

/// Random map factoring through the bijective embedding of `source`,
/// resampled a few times to avoid the zero map.
pub fn stably_zero_noise<R: Rng>(rng: &mut R, source: &ModObject, target: &ModObject) -> ModMorphism {
    let (n, iota) = bijective_embedding(source);
    let mut noise = iota.then(&random_morphism(rng, &n, target));
    for _ in 0..4 {
        if !noise.is_zero() {
            break;
        }
        noise = iota.then(&random_morphism(rng, &n, target));
    }
    noise
}

/// Adds stably zero noise to every non-cover arrow and, with probability
/// `cover_prob`, to cover arrows.
pub fn perturb<R: Rng>(rng: &mut R, x: &Prediagram, cover_prob: f64) -> Prediagram {
    let covers = x.shape.covers();
    let mut y = x.clone();
    for (&(a, b), f) in x.arrows.iter() {
        let is_cover = covers.contains(&(a, b));
        if !is_cover || rng.gen_bool(cover_prob) {
            let noise = stably_zero_noise(rng, x.object(a), x.object(b));
            y.arrows.insert((a, b), f.add(&noise));
        }
    }
    y
}

/// Stably commutative prediagram obtained by perturbing a random purely
/// monic diagram. Redrawn up to 16 times until it is not strictly
/// commutative; shapes without a chain of length two never are.
pub fn random_stable_prediagram<R: Rng>(rng: &mut R, shape: &Poset, ring: RingParams, max_rank: usize) -> Prediagram {
    let mut attempt = 0;
    loop {
        let x = random_monic_diagram(rng, shape, ring, max_rank);
        let y = perturb(rng, &x, 1.0 / 3.0);
        attempt += 1;
        if attempt == 16 || !y.is_strictly_commutative() {
            return y;
        }
    }
}

/// Random strictly natural morphism `x -> y`: a random combination of
/// generators of the solution module of the naturality equations.
pub fn random_strict_morphism<R: Rng>(rng: &mut R, x: &Prediagram, y: &Prediagram) -> DiagramMorphism {
    let mut sys = LinearSystem::new(x.ring);
    let us: Vec<_> = (0..x.len()).map(|a| sys.unknown(x.object(a), y.object(a))).collect();
    for (&(a, b), xi) in &x.arrows {
        let eta = y.arrow(a, b);
        let terms = [
            Term { left: None, unknown: &us[a], right: Some(eta.matrix()), sign: 1 },
            Term { left: Some(xi.matrix()), unknown: &us[b], right: None, sign: -1 },
        ];
        sys.add_map_equation(x.object(a), y.object(b), &terms, None, Compare::Exact);
    }
    let sol = sys.solve().expect("the zero morphism is natural");
    let q = x.ring.modulus();
    let mut values = vec![0i64; sol.values.len()];
    for gen in &sol.kernel {
        let c = rng.gen_range(0..q);
        for (v, g) in values.iter_mut().zip(gen) {
            *v = (*v + c * g) % q;
        }
    }
    let comps = us.iter().map(|u| u.read(&values)).collect();
    DiagramMorphism::new(x.clone(), y.clone(), comps).expect("kernel combinations are natural")
}

/// Input for morphism lifting over a quasitree: purely monic `X`, `Y` and
/// stably natural but generally non-natural representatives.
pub fn random_morphism_instance<R: Rng>(
    rng: &mut R,
    shape: &Poset,
    ring: RingParams,
    max_rank: usize,
) -> (Prediagram, Prediagram, Vec<ModMorphism>) {
    let x = random_monic_diagram(rng, shape, ring, max_rank);
    let y = random_monic_diagram(rng, shape, ring, max_rank);
    let f = random_strict_morphism(rng, &x, &y);
    let fhat = f
        .components
        .iter()
        .enumerate()
        .map(|(a, c)| c.add(&stably_zero_noise(rng, x.object(a), y.object(a))))
        .collect();
    (x, y, fhat)
}

/// A random `(p, k)` with `p` in `primes` and `k` in `ks`.
pub fn random_ring<R: Rng>(rng: &mut R, primes: &[u64], ks: &[u32]) -> RingParams {
    let p = *primes.choose(rng).expect("nonempty prime list");
    let k = *ks.choose(rng).expect("nonempty exponent list");
    RingParams::new(p, k).expect("valid ring")
}

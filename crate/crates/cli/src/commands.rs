use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use thiserror::Error;

use flatlift::census::{Census, CensusRecord, Execution, MAX_CENSUS_SIZE};
use flatlift::crown::{boundary_matrix, connectedness_check};
use flatlift::diagram::Prediagram;
use flatlift::flatness::{flatness_check, mitchell_check, quasitree_by_crowns, quasitree_by_intervals, MitchellCondition};
use flatlift::format::{parse_diagram, parse_family, parse_generator, parse_poset, write_diagram, write_family, write_poset, FormatError};
use flatlift::lifting::{
    lift_diagram, lift_diagram_dual, lift_morphism, strict_lift_of_stable_morphism, LiftError, TraceStep,
};
use flatlift::modcat::{ModMorphism, RingParams};
use flatlift::poset::{CrownKind, Poset};
use flatlift::{fixtures, gen};

use crate::{Direction, LiftMode, PosetQuery};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: FormatError },
    #[error(transparent)]
    Format(#[from] FormatError),
    #[error("{0}")]
    Usage(String),
    /// A mathematical precondition or verifier failed.
    #[error("{0}")]
    Check(String),
}

/// `Ok(true)` exits 0, `Ok(false)` exits 1.
pub type Outcome = Result<bool, CliError>;

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.into(), source })
}

fn write(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn parse_at<T>(path: &Path, r: Result<T, FormatError>) -> Result<T, CliError> {
    r.map_err(|source| CliError::Parse { path: path.into(), source })
}

fn load_poset(file: Option<&Path>, gen: Option<&str>, seed: u64) -> Result<Poset, CliError> {
    match (file, gen) {
        (_, Some(spec)) => match spec.strip_prefix("random:") {
            Some(n) => {
                let n: usize = n.parse().map_err(|_| FormatError::BadGenerator(spec.into()))?;
                Ok(gen::random_poset(&mut gen::rng(seed), n, 0.4))
            }
            None => Ok(parse_generator(spec)?),
        },
        (Some(path), None) => parse_at(path, parse_poset(&read(path)?)),
        (None, None) => Err(CliError::Usage("give a poset file or --gen".into())),
    }
}

fn load_diagram(shape: &Poset, path: &Path) -> Result<Prediagram, CliError> {
    parse_at(path, parse_diagram(shape, &read(path)?))
}

fn names(p: &Poset, idx: impl IntoIterator<Item = usize>) -> String {
    let v: Vec<&str> = idx.into_iter().map(|i| p.name(i)).collect();
    if v.is_empty() {
        "-".into()
    } else {
        v.join(" ")
    }
}

pub fn poset(file: Option<PathBuf>, gen: Option<String>, seed: u64, out: Option<PathBuf>, query: PosetQuery) -> Outcome {
    let p = load_poset(file.as_deref(), gen.as_deref(), seed)?;
    if let Some(out) = &out {
        write(out, &write_poset(&p))?;
    }
    match query {
        PosetQuery::Info => {
            let rep = flatness_check(&p);
            let crown = flatlift::crown::is_crown(&p);
            println!("elements: {}", names(&p, 0..p.len()));
            println!("covers:   {}", p.covers().len());
            println!("minima:   {}", names(&p, p.minima()));
            println!("maxima:   {}", names(&p, p.maxima()));
            println!(
                "RESULT n={} covers={} relations={} crown={} ind_flat={} pro_flat={}",
                p.len(),
                p.covers().len(),
                p.strict_relations().len(),
                crown,
                rep.ind_flat,
                rep.pro_flat
            );
            Ok(true)
        }
        PosetQuery::Crown { direction } => {
            let kind = match direction {
                Direction::Ind => CrownKind::Ind,
                Direction::Pro => CrownKind::Pro,
            };
            let c = p.crown_of(kind).source;
            let rep = connectedness_check(&c).map_err(|e| CliError::Check(e.to_string()))?;
            println!("{kind}-crown: {}", names(&c, 0..c.len()));
            for (a, b) in c.strict_relations() {
                println!("  {} < {}", c.name(a), c.name(b));
            }
            println!("kernel dimension: {}", rep.kernel_dim);
            if let Some(w) = &rep.cycle_witness {
                let labels = boundary_matrix(&c).map_err(|e| CliError::Check(e.to_string()))?.row_labels();
                println!("cycle witness:");
                for (l, x) in labels.iter().zip(w) {
                    println!("  {l:>24} {x:+}");
                }
            }
            if let Some(seq) = &rep.peel_sequence {
                let s: Vec<String> = seq.iter().map(|(i, case)| format!("{}:{case:?}", c.name(*i))).collect();
                println!("peeling: {}", s.join(" "));
            }
            println!(
                "RESULT elements={} relations={} kernel_dim={} one_connected={}",
                c.len(),
                c.strict_relations().len(),
                rep.kernel_dim,
                rep.one_connected
            );
            Ok(rep.one_connected)
        }
        PosetQuery::Flat => {
            let rep = flatness_check(&p);
            for f in &rep.failures {
                println!(
                    "not {}-flat at {}: crown kernel dimension {}",
                    f.direction,
                    p.name(f.element),
                    f.report.kernel_dim
                );
            }
            let fails = |k| names(&p, rep.failing_elements(k));
            println!(
                "RESULT ind_flat={} pro_flat={} ind_failures={} pro_failures={}",
                rep.ind_flat,
                rep.pro_flat,
                fails(CrownKind::Ind).replace(' ', ","),
                fails(CrownKind::Pro).replace(' ', ",")
            );
            Ok(rep.flat)
        }
        PosetQuery::Quasitree => {
            let (a, b) = (quasitree_by_intervals(&p), quasitree_by_crowns(&p));
            println!("interval characterization: {a}");
            println!("crown characterization:    {b}");
            println!("RESULT quasitree={} agree={}", a && b, a == b);
            if a != b {
                return Err(CliError::Check("quasitree characterizations disagree".into()));
            }
            Ok(a)
        }
        PosetQuery::Mitchell => {
            let rep = mitchell_check(&p);
            if let Some(w) = &rep.witness {
                let cond = match w.condition {
                    MitchellCondition::I => "i",
                    MitchellCondition::II => "ii",
                };
                println!("condition ({cond}): full SC_{} with image {}", w.n, w.embedding.image_names().join(" "));
            }
            println!("SC_2 copies: {} ({} without mediator)", rep.sc2_embeddings, rep.sc2_unmediated);
            println!(
                "RESULT dim_le_2={} sc2_copies={} sc2_unmediated={}",
                rep.dimension_le_2, rep.sc2_embeddings, rep.sc2_unmediated
            );
            Ok(rep.dimension_le_2)
        }
    }
}

pub struct LiftArgs {
    pub poset: Option<PathBuf>,
    pub gen: Option<String>,
    pub diagram: Option<PathBuf>,
    pub target: Option<PathBuf>,
    pub hom: Option<PathBuf>,
    pub mode: LiftMode,
    pub seed: Option<u64>,
    pub ring: String,
    pub max_rank: usize,
    pub out: Option<PathBuf>,
    pub hom_out: Option<PathBuf>,
}

fn parse_ring(s: &str) -> Result<RingParams, CliError> {
    let bad = || CliError::Usage(format!("bad ring `{s}`, expected p,k"));
    let (p, k) = s.split_once(',').ok_or_else(bad)?;
    let p = p.trim().parse().map_err(|_| bad())?;
    let k = k.trim().parse().map_err(|_| bad())?;
    RingParams::new(p, k).map_err(|_| bad())
}

fn lift_failure(e: LiftError) -> CliError {
    let check = match &e {
        LiftError::NotIndFlat => "ind_flat",
        LiftError::NotProFlat => "pro_flat",
        LiftError::NotQuasitree => "quasitree",
        LiftError::NotStablyCommutative => "stably_commutative",
        LiftError::NotStablyNatural(..) => "stably_natural",
        LiftError::PreconditionViolated(_) => "precondition",
        LiftError::IllTyped(_) | LiftError::Diagram(_) => return CliError::Usage(e.to_string()),
        _ => "internal",
    };
    println!("RESULT check={check} ok=false");
    CliError::Check(format!("{check}: {e}"))
}

fn print_trace(trace: &[TraceStep]) {
    println!("trace ({} steps):", trace.len());
    for t in trace {
        let via = if t.via.is_empty() { String::new() } else { format!(" via {}", t.via.join(",")) };
        println!("  {:<20} at {}{} (+{} free)", t.kind, t.element, via, t.added_free);
    }
}

/// Source, target and stable morphism for the morphism modes.
type MorphismInput = (Prediagram, Prediagram, Vec<ModMorphism>);

fn morphism_input(args: &LiftArgs, shape: &Poset) -> Result<MorphismInput, CliError> {
    if let Some(seed) = args.seed {
        let ring = parse_ring(&args.ring)?;
        return Ok(gen::random_morphism_instance(&mut gen::rng(seed), shape, ring, args.max_rank));
    }
    let (Some(d), Some(t), Some(h)) = (&args.diagram, &args.target, &args.hom) else {
        return Err(CliError::Usage("morphism modes need --diagram, --target and --hom".into()));
    };
    let x = load_diagram(shape, d)?;
    let y = load_diagram(shape, t)?;
    let fhat = parse_at(h, parse_family(&x, &y, &read(h)?))?;
    Ok((x, y, fhat))
}

pub fn lift(args: LiftArgs) -> Outcome {
    let shape = load_poset(args.poset.as_deref(), args.gen.as_deref(), args.seed.unwrap_or(0))?;
    let start = Instant::now();
    match args.mode {
        LiftMode::Diagram | LiftMode::Dual => {
            let x = match (args.seed, &args.diagram) {
                (Some(seed), _) => {
                    let ring = parse_ring(&args.ring)?;
                    gen::random_stable_prediagram(&mut gen::rng(seed), &shape, ring, args.max_rank)
                }
                (None, Some(d)) => load_diagram(&shape, d)?,
                (None, None) => return Err(CliError::Usage("give --diagram or --seed".into())),
            };
            println!("input: {} elements, strictly commutative: {}", x.len(), x.is_strictly_commutative());
            let res = if args.mode == LiftMode::Diagram { lift_diagram(&x) } else { lift_diagram_dual(&x) }
                .map_err(lift_failure)?;
            print_trace(&res.trace);
            let v = res.verify();
            println!("pure: {}", v.pure);
            println!("strictly commutative: {}", v.strictly_commutative);
            println!("stably isomorphic to input: {}", v.stable_iso);
            if let Some(out) = &args.out {
                write(out, &write_diagram(&res.lifted))?;
            }
            println!(
                "RESULT pure={} strict={} stable_iso={} added_free={} steps={} ms={}",
                v.pure,
                v.strictly_commutative,
                v.stable_iso,
                res.added_free_rank(),
                res.trace.len(),
                start.elapsed().as_millis()
            );
            Ok(v.passed())
        }
        LiftMode::Morphism => {
            let (x, y, fhat) = morphism_input(&args, &shape)?;
            let res = lift_morphism(&x, &y, &fhat).map_err(lift_failure)?;
            print_trace(&res.trace);
            let v = res.verify(&fhat);
            println!("g' homotopism: {}", v.homotopism);
            println!("g, g' natural: {}", v.natural);
            println!("replaced source purely monic: {}", v.purely_monic);
            println!("stable agreement certified: {}", v.certified);
            if let Some(out) = &args.out {
                write(out, &write_diagram(&res.replaced))?;
            }
            if let Some(out) = &args.hom_out {
                write(out, &write_family(&shape, &res.g.components))?;
            }
            println!(
                "RESULT homotopism={} natural={} purely_monic={} certified={} ms={}",
                v.homotopism,
                v.natural,
                v.purely_monic,
                v.certified,
                start.elapsed().as_millis()
            );
            Ok(v.passed())
        }
        LiftMode::StrictFullTest => {
            let (x, y, fhat) = morphism_input(&args, &shape)?;
            match strict_lift_of_stable_morphism(&x, &y, &fhat).map_err(lift_failure)? {
                Some(f) => {
                    if let Some(out) = &args.hom_out {
                        write(out, &write_family(&shape, &f.components))?;
                    }
                    println!("strict morphism found without replacing the source");
                    println!("RESULT strict_lift=found");
                    Ok(true)
                }
                None => {
                    println!("no strict morphism agrees stably with the given components");
                    println!("RESULT strict_lift=none");
                    Ok(false)
                }
            }
        }
    }
}

fn list_filter(name: &str) -> Result<fn(&CensusRecord) -> bool, CliError> {
    Ok(match name {
        "all" => |_| true,
        "crown" => |r| r.crown,
        "ind-flat" => |r| r.ind_flat,
        "pro-flat" => |r| r.pro_flat,
        "flat" => |r| r.flat(),
        "not-flat" => |r| !r.ind_flat && !r.pro_flat,
        "quasitree" => |r| r.quasitree,
        "candidate" => |r| r.mitchell_candidate(),
        _ => return Err(CliError::Usage(format!("unknown filter `{name}`"))),
    })
}

pub fn census(max_n: usize, jobs: Option<usize>, sequential: bool, out: Option<PathBuf>, list: Option<String>) -> Outcome {
    if max_n == 0 || max_n > MAX_CENSUS_SIZE - 1 {
        return Err(CliError::Usage(format!("--max-n must lie in 1..={}", MAX_CENSUS_SIZE - 1)));
    }
    let filter = list.as_deref().map(list_filter).transpose()?;
    let exec = if sequential { Execution::Sequential } else { Execution::Parallel(jobs) };
    let start = Instant::now();
    let census = Census::run(max_n, exec).map_err(|e| CliError::Usage(e.to_string()))?;

    println!(
        "{:>2} {:>6} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7} {:>6}",
        "n", "classes", "labeled", "crowns", "1-conn", "ind", "pro", "flat", "qtree", "dim<=2", "cand"
    );
    for s in &census.summaries {
        println!(
            "{:>2} {:>6} {:>8} {:>6} {:>6} {:>6} {:>6} {:>6} {:>6} {:>7} {:>6}",
            s.n,
            s.classes,
            s.labeled,
            s.crowns,
            s.one_connected_crowns,
            s.ind_flat,
            s.pro_flat,
            s.flat,
            s.quasitrees,
            s.mitchell_dim_le_2,
            s.mitchell_candidates
        );
    }
    let total = |f: fn(&flatlift::census::SizeSummary) -> usize| census.summaries.iter().map(f).sum::<usize>();
    let disagreements = total(|s| s.method_disagreements + s.quasitree_disagreements);
    let violations = total(|s| s.non_flat_quasitrees);
    let candidates: Vec<&CensusRecord> = census.mitchell_candidates().collect();
    let every_copy = total(|s| s.mitchell_candidates_every_copy);
    println!("crowns checked for method agreement: {}", total(|s| s.crowns_checked));
    println!("method disagreements: {disagreements}");
    println!("non-flat quasitrees: {violations}");
    println!(
        "ind-flat posets failing Mitchell's criterion: {} (every-copy reading of (ii): {every_copy})",
        candidates.len()
    );
    for r in &candidates {
        println!("  candidate {}", r.code);
    }
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.clone(), source })?;
        for r in &candidates {
            let name = format!("candidate-{}.poset", r.code.to_string().replace(':', "-"));
            write(&dir.join(name), &write_poset(&r.code.to_poset()))?;
        }
    }
    if let Some(f) = filter {
        for r in census.records.iter().filter(|r| f(r)) {
            println!("{} aut={} {}", r.code, r.automorphisms, write_poset(&r.code.to_poset()).replace('\n', "; ").trim_end_matches("; "));
        }
    }
    let classes: Vec<String> = census.summaries.iter().map(|s| s.classes.to_string()).collect();
    println!(
        "RESULT classes={} candidates={} disagreements={disagreements} quasitree_violations={violations} ms={}",
        classes.join(","),
        candidates.len(),
        start.elapsed().as_millis()
    );
    Ok(disagreements == 0 && violations == 0)
}

fn export(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io { path: dir.into(), source })?;
    let put = |name: &str, text: String| write(&dir.join(name), &text);
    let chain = fixtures::chain_obstruction();
    put("chain-obstruction.poset", write_poset(&chain.shape))?;
    put("chain-obstruction.diagram", write_diagram(&chain))?;
    let (x, y, f) = fixtures::unliftable_morphism(3);
    put("unliftable-morphism.poset", write_poset(&x.shape))?;
    put("unliftable-morphism-source.diagram", write_diagram(&x))?;
    put("unliftable-morphism-target.diagram", write_diagram(&y))?;
    put("unliftable-morphism.hom", write_family(&x.shape, &f))?;
    let sq = fixtures::square_diagram(3, 2, 4);
    put("square.poset", write_poset(&sq.shape))?;
    put("square.diagram", write_diagram(&sq))?;
    put("hollow-cube.poset", write_poset(&fixtures::hollow_cube()))?;
    put("ten-element.poset", write_poset(&fixtures::ten_element_flat()))?;
    Ok(())
}

pub fn examples(export_dir: Option<PathBuf>) -> Outcome {
    if let Some(dir) = &export_dir {
        export(dir)?;
    }
    let mut failed = 0;
    let all = fixtures::all();
    for f in &all {
        match f.run() {
            Ok(()) => println!("PASS {:<26} {}", f.name, f.summary),
            Err(msg) => {
                failed += 1;
                println!("FAIL {:<26} {msg}", f.name);
            }
        }
    }
    println!("RESULT passed={} failed={failed}", all.len() - failed);
    Ok(failed == 0)
}

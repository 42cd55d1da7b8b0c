//! Plain-text formats for posets, diagrams and morphism families.
//!
//! Poset file: the first line lists element names, each further line is a
//! cover relation `a < b`. Diagram file: a `ring p k` header, then
//! `obj <name> : e1 e2 ...` per element and
//! `map <a> <b> : <r>x<c> : <row> ; <row> ...` per strict relation.
//! Morphism files use `hom <name> : <r>x<c> : ...` lines. Text after `#`
//! is ignored everywhere.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::diagram::{DiagramError, Prediagram};
use crate::flatness::suspended_crown;
use crate::modcat::{Mat, ModError, ModMorphism, ModObject, RingParams};
use crate::poset::{PosetError, Poset};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FormatError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("empty input")]
    Empty,
    #[error("missing `ring p k` header")]
    MissingRing,
    #[error("no object given for `{0}`")]
    MissingObject(String),
    #[error("no map given for `{0} < {1}`")]
    MissingMap(String, String),
    #[error("no component given for `{0}`")]
    MissingComponent(String),
    #[error("bad generator spec `{0}`")]
    BadGenerator(String),
    #[error(transparent)]
    Poset(#[from] PosetError),
    #[error(transparent)]
    Diagram(#[from] DiagramError),
    #[error("line {line}: {source}")]
    Module { line: usize, source: ModError },
}

fn syntax(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Syntax { line, message: message.into() }
}

/// Non-empty lines with comments stripped, numbered from 1.
fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines().enumerate().filter_map(|(i, l)| {
        let l = l.split('#').next().unwrap_or("").trim();
        (!l.is_empty()).then_some((i + 1, l))
    })
}

pub fn parse_poset(text: &str) -> Result<Poset, FormatError> {
    let mut lines = content_lines(text);
    let (_, header) = lines.next().ok_or(FormatError::Empty)?;
    let names: Vec<&str> = header.split_whitespace().collect();
    if let Some(bad) = names.iter().find(|n| n.contains('<')) {
        return Err(syntax(1, format!("element name `{bad}` contains `<`")));
    }
    let mut covers = Vec::new();
    for (no, line) in lines {
        let parts: Vec<&str> = line.split('<').map(str::trim).collect();
        if parts.len() < 2 || parts.iter().any(|p| p.is_empty() || p.contains(char::is_whitespace)) {
            return Err(syntax(no, format!("expected `a < b`, found `{line}`")));
        }
        for w in parts.windows(2) {
            covers.push((w[0], w[1]));
        }
    }
    Ok(Poset::from_cover_relations(&names, &covers)?)
}

/// Names on one line, then the covers sorted by element position.
pub fn write_poset(p: &Poset) -> String {
    let mut out = p.names().join(" ");
    out.push('\n');
    let mut covers = p.covers();
    covers.sort_unstable();
    for (a, b) in covers {
        let _ = writeln!(out, "{} < {}", p.name(a), p.name(b));
    }
    out
}

/// `chain:n`, `powerset:m`, `product:m,n,...` (product of chains) or `sc:n`.
pub fn parse_generator(spec: &str) -> Result<Poset, FormatError> {
    let bad = || FormatError::BadGenerator(spec.to_string());
    let (kind, arg) = spec.split_once(':').ok_or_else(bad)?;
    let nums: Vec<usize> = arg.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?;
    match (kind, nums.as_slice()) {
        ("chain", &[n]) => Ok(Poset::chain(n)),
        ("powerset", &[m]) if m <= 6 => Ok(Poset::powerset(m)),
        ("product", ns) if !ns.is_empty() && ns.len() <= 4 => {
            let mut p = Poset::chain(ns[0]);
            for &n in &ns[1..] {
                p = Poset::product(&p, &Poset::chain(n));
            }
            Ok(p)
        }
        ("sc", &[n]) => suspended_crown(n).map_err(|_| bad()),
        _ => Err(bad()),
    }
}

fn parse_ring(no: usize, rest: &str) -> Result<RingParams, FormatError> {
    let nums: Vec<&str> = rest.split_whitespace().collect();
    let [p, k] = nums.as_slice() else {
        return Err(syntax(no, "expected `ring p k`"));
    };
    let p: u64 = p.parse().map_err(|_| syntax(no, "bad prime"))?;
    let k: u32 = k.parse().map_err(|_| syntax(no, "bad exponent"))?;
    RingParams::new(p, k).map_err(|source| FormatError::Module { line: no, source })
}

fn parse_matrix(no: usize, dims: &str, body: &str) -> Result<Mat, FormatError> {
    let (r, c) = dims.trim().split_once('x').ok_or_else(|| syntax(no, "expected `<rows>x<cols>`"))?;
    let r: usize = r.trim().parse().map_err(|_| syntax(no, "bad row count"))?;
    let c: usize = c.trim().parse().map_err(|_| syntax(no, "bad column count"))?;
    let rows: Vec<Vec<i64>> = if r == 0 {
        Vec::new()
    } else {
        body.split(';')
            .map(|row| {
                row.split_whitespace().map(|x| x.parse::<i64>().map_err(|_| syntax(no, format!("bad entry `{x}`")))).collect()
            })
            .collect::<Result<_, _>>()?
    };
    if rows.len() != r || rows.iter().any(|row| row.len() != c) {
        return Err(syntax(no, format!("matrix body does not have shape {r}x{c}")));
    }
    Ok(if r == 0 { Mat::zeros(0, c) } else { Mat::from_rows(&rows) })
}

fn write_matrix(out: &mut String, m: &Mat) {
    let _ = write!(out, "{}x{} :", m.rows(), m.cols());
    for i in 0..m.rows() {
        if i > 0 {
            out.push_str(" ;");
        }
        for x in m.row(i) {
            let _ = write!(out, " {x}");
        }
    }
}

/// Splits `head : a : b` into the head tokens and the remaining fields.
fn fields(line: &str) -> (Vec<&str>, Vec<&str>) {
    let mut parts = line.split(':');
    let head = parts.next().unwrap_or("").split_whitespace().collect();
    (head, parts.map(str::trim).collect())
}

pub fn parse_diagram(shape: &Poset, text: &str) -> Result<Prediagram, FormatError> {
    let mut ring = None;
    let mut objects: BTreeMap<usize, ModObject> = BTreeMap::new();
    let mut maps: Vec<(usize, usize, usize, Mat)> = Vec::new();
    for (no, line) in content_lines(text) {
        let (head, rest) = fields(line);
        match head.first().copied() {
            Some("ring") if rest.is_empty() => ring = Some(parse_ring(no, &line[4..])?),
            Some("obj") if head.len() == 2 && rest.len() == 1 => {
                let r = ring.ok_or(FormatError::MissingRing)?;
                let a = shape.require(head[1])?;
                let exps: Vec<u32> = rest[0]
                    .split_whitespace()
                    .map(|x| x.parse().map_err(|_| syntax(no, format!("bad exponent `{x}`"))))
                    .collect::<Result<_, _>>()?;
                let obj = ModObject::new(r, exps).map_err(|source| FormatError::Module { line: no, source })?;
                if objects.insert(a, obj).is_some() {
                    return Err(syntax(no, format!("object `{}` given twice", head[1])));
                }
            }
            Some("map") if head.len() == 3 && rest.len() == 2 => {
                let (a, b) = (shape.require(head[1])?, shape.require(head[2])?);
                maps.push((no, a, b, parse_matrix(no, rest[0], rest[1])?));
            }
            _ => return Err(syntax(no, format!("unrecognized line `{line}`"))),
        }
    }
    let ring = ring.ok_or(FormatError::MissingRing)?;
    let objs: Vec<ModObject> = (0..shape.len())
        .map(|a| objects.remove(&a).ok_or_else(|| FormatError::MissingObject(shape.name(a).into())))
        .collect::<Result<_, _>>()?;
    let mut arrows = BTreeMap::new();
    for (no, a, b, m) in maps {
        let f = ModMorphism::new(objs[a].clone(), objs[b].clone(), m)
            .map_err(|source| FormatError::Module { line: no, source })?;
        if arrows.insert((a, b), f).is_some() {
            return Err(syntax(no, format!("map `{} < {}` given twice", shape.name(a), shape.name(b))));
        }
    }
    if let Some((a, b)) = shape.strict_relations().into_iter().find(|r| !arrows.contains_key(r)) {
        return Err(FormatError::MissingMap(shape.name(a).into(), shape.name(b).into()));
    }
    Ok(Prediagram::new(shape.clone(), ring, objs, arrows)?)
}

pub fn write_diagram(x: &Prediagram) -> String {
    let mut out = format!("ring {} {}\n", x.ring.p, x.ring.k);
    for (a, o) in x.objects.iter().enumerate() {
        let _ = write!(out, "obj {} :", x.shape.name(a));
        for e in &o.exponents {
            let _ = write!(out, " {e}");
        }
        out.push('\n');
    }
    for (&(a, b), f) in &x.arrows {
        let _ = write!(out, "map {} {} : ", x.shape.name(a), x.shape.name(b));
        write_matrix(&mut out, f.matrix());
        out.push('\n');
    }
    out
}

/// Components `source_a -> target_a`, one `hom` line per element.
pub fn parse_family(source: &Prediagram, target: &Prediagram, text: &str) -> Result<Vec<ModMorphism>, FormatError> {
    let shape = &source.shape;
    let mut comps: BTreeMap<usize, ModMorphism> = BTreeMap::new();
    for (no, line) in content_lines(text) {
        let (head, rest) = fields(line);
        match head.first().copied() {
            Some("ring") if rest.is_empty() => {
                if parse_ring(no, &line[4..])? != source.ring {
                    return Err(syntax(no, "ring differs from the diagrams"));
                }
            }
            Some("hom") if head.len() == 2 && rest.len() == 2 => {
                let a = shape.require(head[1])?;
                let m = parse_matrix(no, rest[0], rest[1])?;
                let f = ModMorphism::new(source.object(a).clone(), target.object(a).clone(), m)
                    .map_err(|source| FormatError::Module { line: no, source })?;
                if comps.insert(a, f).is_some() {
                    return Err(syntax(no, format!("component `{}` given twice", head[1])));
                }
            }
            _ => return Err(syntax(no, format!("unrecognized line `{line}`"))),
        }
    }
    (0..shape.len())
        .map(|a| comps.remove(&a).ok_or_else(|| FormatError::MissingComponent(shape.name(a).into())))
        .collect()
}

pub fn write_family(shape: &Poset, comps: &[ModMorphism]) -> String {
    let mut out = String::new();
    if let Some(f) = comps.first() {
        let _ = writeln!(out, "ring {} {}", f.ring().p, f.ring().k);
    }
    for (a, f) in comps.iter().enumerate() {
        let _ = write!(out, "hom {} : ", shape.name(a));
        write_matrix(&mut out, f.matrix());
        out.push('\n');
    }
    out
}

//! On-disk formats: per-phase cascade tables, JSON-lines reports, sweep
//! checkpoints and SHA-256 digests.
//!
//! Rationals are written as `"p/q"` (or `"p"`), Weyl elements as reduced
//! words with 1-based generators, coroots as integer covectors in
//! simple-coroot coordinates. Points at infinity carry an `inf*` prefix term.

use crate::cascade::{CascadeDB, GenRow, Point, StdRow};
use crate::polespaces::{pole_space, PoleSpace};
use crate::rootsys::{RootDatum, Vector, WeylElement};
use crate::special_e8::{ShardReport, Violation};
use crate::Q;
use serde::{de::DeserializeOwned, Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

pub const CASCADE_SCHEMA: &str = "polecasc-cascade/1";
pub const SHARD_SCHEMA: &str = "polecasc-shard/1";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("schema mismatch: expected {expected}, found {found}")]
    Schema { expected: String, found: String },
    #[error("datum mismatch: file is for {found}, expected {expected}")]
    Datum { expected: String, found: String },
    #[error("malformed rational literal {0:?}")]
    Rational(String),
    #[error("malformed {0}: {1:?}")]
    Malformed(&'static str, String),
    #[error("{0}: empty file")]
    Empty(String),
    #[error(transparent)]
    Core(#[from] crate::Error),
}

pub fn fmt_q(q: &Q) -> String {
    q.to_string()
}

pub fn parse_q(s: &str) -> Result<Q, StoreError> {
    let bad = || StoreError::Rational(s.to_string());
    let t = s.trim();
    let (n, d) = match t.split_once('/') {
        Some((n, d)) => (n.trim().parse::<i64>().map_err(|_| bad())?, d.trim().parse::<i64>().map_err(|_| bad())?),
        None => (t.parse::<i64>().map_err(|_| bad())?, 1),
    };
    if d == 0 {
        return Err(bad());
    }
    Ok(Q::new(n, d))
}

fn fmt_vec(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

fn parse_vec(s: &str, rank: usize) -> Result<Vector, StoreError> {
    let v = s.split_whitespace().map(parse_q).collect::<Result<Vec<_>, _>>()?;
    if v.len() != rank {
        return Err(StoreError::Malformed("vector", s.to_string()));
    }
    Ok(v)
}

pub fn fmt_point(d: &RootDatum, p: &Point) -> String {
    let fin = format!("({})", fmt_vec(&p.finite));
    match &p.inf {
        None => fin,
        Some(v) if *v == d.fundamental_weights[d.levi_omitted] => format!("inf*w' + {fin}"),
        Some(v) => format!("inf*({}) + {fin}", fmt_vec(v)),
    }
}

pub fn parse_point(d: &RootDatum, s: &str) -> Result<Point, StoreError> {
    let bad = || StoreError::Malformed("point", s.to_string());
    let inner = |t: &str| -> Result<Vector, StoreError> {
        let t = t.trim();
        let t = t.strip_prefix('(').and_then(|t| t.strip_suffix(')')).ok_or_else(bad)?;
        parse_vec(t, d.rank)
    };
    match s.split_once(" + ") {
        None => Ok(Point::at(inner(s)?)),
        Some((a, b)) => {
            let dir = a.trim().strip_prefix("inf*").ok_or_else(bad)?;
            let inf = if dir == "w'" { d.fundamental_weights[d.levi_omitted].clone() } else { inner(dir)? };
            Ok(Point { finite: inner(b)?, inf: Some(inf) })
        }
    }
}

pub fn fmt_coroot(d: &RootDatum, c: usize) -> String {
    d.coroots[c].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn parse_coroot(d: &RootDatum, s: &str) -> Result<usize, StoreError> {
    let v = s
        .split_whitespace()
        .map(|x| x.parse::<i64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|_| StoreError::Malformed("coroot", s.to_string()))?;
    d.coroot_id(&v).ok_or_else(|| StoreError::Malformed("coroot", s.to_string()))
}

/// The reduced word recomputed from the matrix, so equal elements print
/// identically.
pub fn canonical_word(d: &RootDatum, w: &WeylElement) -> String {
    d.mul(w, &d.identity()).word_string()
}

pub fn parse_word(d: &RootDatum, s: &str) -> Result<WeylElement, StoreError> {
    let word = s
        .split_whitespace()
        .map(|x| match x.parse::<usize>() {
            Ok(i) if (1..=d.rank).contains(&i) => Ok(i - 1),
            _ => Err(StoreError::Malformed("word", s.to_string())),
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(d.from_word(&word))
}

fn coroots_out(d: &RootDatum, v: &[usize]) -> Vec<String> {
    v.iter().map(|&c| fmt_coroot(d, c)).collect()
}

fn coroots_in(d: &RootDatum, v: &[String]) -> Result<Vec<usize>, StoreError> {
    v.iter().map(|s| parse_coroot(d, s)).collect()
}

fn nodes_out(v: &[usize]) -> Vec<usize> {
    v.iter().map(|i| i + 1).collect()
}

fn nodes_in(d: &RootDatum, v: &[usize]) -> Result<Vec<usize>, StoreError> {
    v.iter()
        .map(|&i| if (1..=d.rank).contains(&i) { Ok(i - 1) } else { Err(StoreError::Malformed("node", i.to_string())) })
        .collect()
}

fn space_in(d: &RootDatum, defining: &[String]) -> Result<PoleSpace, StoreError> {
    Ok(pole_space(d, &coroots_in(d, defining)?)?)
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
pub struct Header {
    pub schema: String,
    pub datum: String,
    pub levi_omitted: usize,
    pub table: String,
    pub phase: usize,
    pub rows: usize,
}

#[derive(Serialize, Deserialize, Debug, PartialEq, Eq)]
pub struct Manifest {
    pub schema: String,
    pub datum: String,
    pub levi_omitted: usize,
    pub phases: usize,
}

#[derive(Serialize, Deserialize)]
struct GenRecord {
    space: Vec<String>,
    initial: String,
    order: i64,
    numerator: Vec<String>,
    denominator: Vec<String>,
    jprime: Vec<String>,
    gprime: Vec<String>,
    rl: Vec<String>,
    parent: Option<usize>,
    segment_end: Option<String>,
}

#[derive(Serialize, Deserialize)]
struct StdRecord {
    l0: Vec<String>,
    ws: Vec<String>,
    segments: Vec<[String; 2]>,
    order: i64,
    sub: bool,
    nodes: Vec<usize>,
    gamma: Vec<String>,
    perp: Vec<String>,
    parallel: bool,
    pole_sets: Vec<Vec<String>>,
}

fn gen_out(d: &RootDatum, r: &GenRow) -> GenRecord {
    GenRecord {
        space: coroots_out(d, &r.space.defining),
        initial: fmt_point(d, &r.initial),
        order: r.order,
        numerator: coroots_out(d, &r.numerator),
        denominator: coroots_out(d, &r.denominator),
        jprime: coroots_out(d, &r.jprime),
        gprime: r.gprime.iter().map(fmt_q).collect(),
        rl: coroots_out(d, &r.rl),
        parent: r.parent,
        segment_end: r.segment_end.as_ref().map(|p| fmt_point(d, p)),
    }
}

fn gen_in(d: &RootDatum, r: GenRecord) -> Result<GenRow, StoreError> {
    Ok(GenRow {
        space: space_in(d, &r.space)?,
        initial: parse_point(d, &r.initial)?,
        order: r.order,
        numerator: coroots_in(d, &r.numerator)?,
        denominator: coroots_in(d, &r.denominator)?,
        jprime: coroots_in(d, &r.jprime)?,
        gprime: r.gprime.iter().map(|s| parse_q(s)).collect::<Result<_, _>>()?,
        rl: coroots_in(d, &r.rl)?,
        parent: r.parent,
        segment_end: r.segment_end.map(|s| parse_point(d, &s)).transpose()?,
    })
}

fn std_out(d: &RootDatum, r: &StdRow) -> StdRecord {
    StdRecord {
        l0: coroots_out(d, &r.l0.defining),
        ws: r.ws.iter().map(|w| canonical_word(d, w)).collect(),
        segments: r.segments.iter().map(|(p, q)| [fmt_point(d, p), fmt_point(d, q)]).collect(),
        order: r.order,
        sub: r.sub,
        nodes: nodes_out(&r.nodes),
        gamma: r.gamma.iter().map(fmt_q).collect(),
        perp: coroots_out(d, &r.perp),
        parallel: r.parallel,
        pole_sets: r.pole_sets.iter().map(|s| coroots_out(d, s)).collect(),
    }
}

fn std_in(d: &RootDatum, r: StdRecord) -> Result<StdRow, StoreError> {
    Ok(StdRow {
        l0: space_in(d, &r.l0)?,
        ws: r.ws.iter().map(|s| parse_word(d, s)).collect::<Result<_, _>>()?,
        segments: r
            .segments
            .iter()
            .map(|[p, q]| Ok((parse_point(d, p)?, parse_point(d, q)?)))
            .collect::<Result<_, StoreError>>()?,
        order: r.order,
        sub: r.sub,
        nodes: nodes_in(d, &r.nodes)?,
        gamma: r.gamma.iter().map(|s| parse_q(s)).collect::<Result<_, _>>()?,
        perp: coroots_in(d, &r.perp)?,
        parallel: r.parallel,
        pole_sets: r.pole_sets.iter().map(|s| coroots_in(d, s)).collect::<Result<_, _>>()?,
    })
}

fn json_err(path: &Path) -> impl Fn(serde_json::Error) -> StoreError + '_ {
    move |source| StoreError::Json { path: path.display().to_string(), source }
}

/// Writes `header` followed by one JSON object per line.
pub fn write_jsonl<H: Serialize, T: Serialize>(path: &Path, header: Option<&H>, rows: &[T]) -> Result<(), StoreError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let tmp = path.with_extension("tmp");
    {
        let mut out = BufWriter::new(fs::File::create(&tmp)?);
        if let Some(h) = header {
            serde_json::to_writer(&mut out, h).map_err(json_err(path))?;
            out.write_all(b"\n")?;
        }
        for r in rows {
            serde_json::to_writer(&mut out, r).map_err(json_err(path))?;
            out.write_all(b"\n")?;
        }
        out.flush()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

fn read_lines(path: &Path) -> Result<Vec<String>, StoreError> {
    let f = BufReader::new(fs::File::open(path)?);
    let mut v = Vec::new();
    for l in f.lines() {
        let l = l?;
        if !l.trim().is_empty() {
            v.push(l);
        }
    }
    Ok(v)
}

pub fn read_jsonl<T: DeserializeOwned>(path: &Path) -> Result<Vec<T>, StoreError> {
    read_lines(path)?.iter().map(|l| serde_json::from_str(l).map_err(json_err(path))).collect()
}

fn check_schema(expected: &str, found: &str) -> Result<(), StoreError> {
    if expected != found {
        return Err(StoreError::Schema { expected: expected.into(), found: found.into() });
    }
    Ok(())
}

fn check_datum(d: &RootDatum, datum: &str, levi: usize) -> Result<(), StoreError> {
    let (want, got) = (format!("{} levi {}", d.label(), d.levi_omitted + 1), format!("{datum} levi {levi}"));
    if want != got {
        return Err(StoreError::Datum { expected: want, found: got });
    }
    Ok(())
}

pub fn gen_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("gen_{k}.jsonl"))
}

pub fn std_path(dir: &Path, k: usize) -> PathBuf {
    dir.join(format!("std_{k}.jsonl"))
}

/// Writes `manifest.json` and one `gen_k` and `std_k` file per phase. Returns
/// the paths written.
pub fn export_cascade(db: &CascadeDB, d: &RootDatum, dir: &Path) -> Result<Vec<PathBuf>, StoreError> {
    fs::create_dir_all(dir)?;
    let phases = db.gen.len().max(db.std.len());
    let manifest = Manifest {
        schema: CASCADE_SCHEMA.into(),
        datum: d.label(),
        levi_omitted: d.levi_omitted + 1,
        phases,
    };
    let mpath = dir.join("manifest.json");
    fs::write(&mpath, serde_json::to_string(&manifest).map_err(json_err(&mpath))? + "\n")?;
    let mut paths = vec![mpath];
    let empty_g = Vec::new();
    let empty_s = Vec::new();
    for k in 0..phases {
        let header = |table: &str, rows| Header {
            schema: CASCADE_SCHEMA.into(),
            datum: d.label(),
            levi_omitted: d.levi_omitted + 1,
            table: table.into(),
            phase: k,
            rows,
        };
        let g = db.gen.get(k).unwrap_or(&empty_g);
        let recs: Vec<GenRecord> = g.iter().map(|r| gen_out(d, r)).collect();
        let p = gen_path(dir, k);
        write_jsonl(&p, Some(&header("gen", recs.len())), &recs)?;
        paths.push(p);
        let s = db.std.get(k).unwrap_or(&empty_s);
        let recs: Vec<StdRecord> = s.iter().map(|r| std_out(d, r)).collect();
        let p = std_path(dir, k);
        write_jsonl(&p, Some(&header("std", recs.len())), &recs)?;
        paths.push(p);
    }
    Ok(paths)
}

fn read_table<R: DeserializeOwned>(d: &RootDatum, path: &Path, table: &str, k: usize) -> Result<Vec<R>, StoreError> {
    let lines = read_lines(path)?;
    let first = lines.first().ok_or_else(|| StoreError::Empty(path.display().to_string()))?;
    let h: Header = serde_json::from_str(first).map_err(json_err(path))?;
    check_schema(CASCADE_SCHEMA, &h.schema)?;
    check_datum(d, &h.datum, h.levi_omitted)?;
    if h.table != table || h.phase != k || h.rows != lines.len() - 1 {
        return Err(StoreError::Malformed("table header", first.clone()));
    }
    lines[1..].iter().map(|l| serde_json::from_str(l).map_err(json_err(path))).collect()
}

pub fn import_cascade(d: &RootDatum, dir: &Path) -> Result<CascadeDB, StoreError> {
    let mpath = dir.join("manifest.json");
    let m: Manifest = serde_json::from_str(&fs::read_to_string(&mpath)?).map_err(json_err(&mpath))?;
    check_schema(CASCADE_SCHEMA, &m.schema)?;
    check_datum(d, &m.datum, m.levi_omitted)?;
    let mut db = CascadeDB::default();
    for k in 0..m.phases {
        let g: Vec<GenRecord> = read_table(d, &gen_path(dir, k), "gen", k)?;
        db.gen.push(g.into_iter().map(|r| gen_in(d, r)).collect::<Result<_, _>>()?);
        let s: Vec<StdRecord> = read_table(d, &std_path(dir, k), "std", k)?;
        db.std.push(s.into_iter().map(|r| std_in(d, r)).collect::<Result<_, _>>()?);
    }
    Ok(db)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

pub fn sha256_file(path: &Path) -> Result<String, StoreError> {
    Ok(sha256_hex(&fs::read(path)?))
}

/// Digests of every regular file below `dir`, keyed by relative path and
/// sorted. Files named `SHA256SUMS` are skipped.
pub fn digest_tree(dir: &Path) -> Result<Vec<(String, String)>, StoreError> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, String)>) -> Result<(), StoreError> {
        for e in fs::read_dir(dir)? {
            let p = e?.path();
            if p.is_dir() {
                walk(root, &p, out)?;
            } else if p.file_name().is_some_and(|n| n != "SHA256SUMS") {
                let rel = p.strip_prefix(root).unwrap_or(&p).display().to_string();
                out.push((rel, sha256_file(&p)?));
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(dir, dir, &mut out)?;
    out.sort();
    Ok(out)
}

pub fn write_digests(dir: &Path) -> Result<Vec<(String, String)>, StoreError> {
    let sums = digest_tree(dir)?;
    let text: String = sums.iter().map(|(p, h)| format!("{h}  {p}\n")).collect();
    fs::write(dir.join("SHA256SUMS"), text)?;
    Ok(sums)
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct ShardSummary {
    pub schema: String,
    pub scope: String,
    pub shard: usize,
    pub triples: usize,
    pub in_scope: usize,
    pub keys: usize,
    pub checked: usize,
    pub polynomial_regime: usize,
    pub finite_regime: usize,
    pub invariant_failures: usize,
    pub violations: usize,
    pub max_abs: String,
}

#[derive(Serialize, Deserialize, Debug, Clone, PartialEq, Eq)]
pub struct ViolationLine {
    pub triple: usize,
    pub n: usize,
    pub basis_index: usize,
    pub e: u32,
    pub value: String,
}

pub fn shard_path(dir: &Path, shard: usize) -> PathBuf {
    dir.join(format!("shard_{shard:03}.jsonl"))
}

/// Checkpoint of one sweep shard: a summary line, then one line per nonzero
/// value.
pub fn write_shard(dir: &Path, scope: &str, r: &ShardReport) -> Result<PathBuf, StoreError> {
    let summary = ShardSummary {
        schema: SHARD_SCHEMA.into(),
        scope: scope.into(),
        shard: r.shard,
        triples: r.triples,
        in_scope: r.in_scope,
        keys: r.keys,
        checked: r.checked,
        polynomial_regime: r.polynomial_regime,
        finite_regime: r.finite_regime,
        invariant_failures: r.invariant_failures,
        violations: r.violations.len(),
        max_abs: fmt_q(&r.max_abs),
    };
    let lines: Vec<ViolationLine> = r
        .violations
        .iter()
        .map(|v| ViolationLine { triple: v.triple, n: v.n, basis_index: v.basis_index, e: v.e, value: fmt_q(&v.value) })
        .collect();
    let p = shard_path(dir, r.shard);
    write_jsonl(&p, Some(&summary), &lines)?;
    Ok(p)
}

/// Reads a checkpoint back; `None` if it is absent or was written for a
/// different scope.
pub fn read_shard(dir: &Path, scope: &str, shard: usize) -> Result<Option<ShardReport>, StoreError> {
    let p = shard_path(dir, shard);
    if !p.exists() {
        return Ok(None);
    }
    let lines = read_lines(&p)?;
    let first = lines.first().ok_or_else(|| StoreError::Empty(p.display().to_string()))?;
    let s: ShardSummary = serde_json::from_str(first).map_err(json_err(&p))?;
    check_schema(SHARD_SCHEMA, &s.schema)?;
    if s.scope != scope || s.shard != shard || s.violations != lines.len() - 1 {
        return Ok(None);
    }
    let mut violations = Vec::new();
    for l in &lines[1..] {
        let v: ViolationLine = serde_json::from_str(l).map_err(json_err(&p))?;
        violations.push(Violation { triple: v.triple, n: v.n, basis_index: v.basis_index, e: v.e, value: parse_q(&v.value)? });
    }
    Ok(Some(ShardReport {
        shard,
        triples: s.triples,
        in_scope: s.in_scope,
        keys: s.keys,
        checked: s.checked,
        polynomial_regime: s.polynomial_regime,
        finite_regime: s.finite_regime,
        invariant_failures: s.invariant_failures,
        violations,
        max_abs: parse_q(&s.max_abs)?,
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_datum, RootType};

    #[test]
    fn rationals() {
        for s in ["0", "-3", "7/2", "-1/6"] {
            assert_eq!(fmt_q(&parse_q(s).unwrap()), s);
        }
        assert_eq!(parse_q(" 4/8 ").unwrap(), Q::new(1, 2));
        for s in ["", "1/0", "x", "1/2/3", "0.5"] {
            assert!(matches!(parse_q(s), Err(StoreError::Rational(_))), "{s}");
        }
    }

    #[test]
    fn points() {
        let d = build_root_datum(RootType::B, 3, 1).unwrap();
        let w = d.fundamental_weights[0].clone();
        let p = Point { finite: vec![Q::new(1, 2), Q::from_integer(-1), Q::from_integer(0)], inf: Some(w) };
        let s = fmt_point(&d, &p);
        assert_eq!(s, "inf*w' + (1/2 -1 0)");
        assert_eq!(parse_point(&d, &s).unwrap(), p);
        let q = Point { finite: p.finite.clone(), inf: Some(vec![Q::from_integer(0), Q::from_integer(2), Q::new(-1, 3)]) };
        assert_eq!(parse_point(&d, &fmt_point(&d, &q)).unwrap(), q);
        assert!(parse_point(&d, "(1 2)").is_err());
    }
}

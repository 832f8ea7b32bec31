use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use polecasc::cascade::{check_classical, positive_order_off_center, run_cascade, verify_cascade, CascadeDB};
use polecasc::denominators::{check_tau_identity, enveloping_den, main_containment, DenKind, DenominatorMultiset};
use polecasc::polespaces::{enumerate_standard_residual, is_residual, PoleSpace};
use polecasc::special_e8::{build_special_context, classify_weyl_triples, vanishing_shard, KeyCache, Scope, ShardReport};
use polecasc::store::{self, canonical_word, fmt_q, write_jsonl};
use polecasc::{build_root_datum, RootDatum, RootType, WeylElement, Q};
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "polecasc", version, about = "Residual pole spaces, residue cascades and denominator checks")]
struct Cli {
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    workers: usize,
    /// Output directory.
    #[arg(long, global = true, env = "POLECASC_OUT", default_value = "polecasc-out")]
    out: PathBuf,
    #[command(subcommand)]
    stage: Stage,
}

#[derive(Args, Clone)]
struct System {
    /// Root system type, one of A B C D E F G.
    #[arg(value_name = "TYPE")]
    kind: String,
    rank: usize,
    /// Maximal Levi R': omitted node (1-based) or Cartan type such as B3.
    #[arg(long)]
    levi: Option<String>,
}

#[derive(Subcommand)]
enum Stage {
    /// List standard residual orbits with their labels.
    Orbits(System),
    /// Build the cascade, verify it and export the Gen/Std tables.
    Cascade(System),
    /// Enveloping denominators of every residual Std pair.
    Envden(System),
    /// Main containment on every residual Std pair.
    VerifyMain(System),
    /// The 1 - tau identity on every residual Std pair.
    VerifyTau(System),
    /// Coset classification on the E8 special line.
    SpecialClassify,
    /// Vanishing sweep on the E8 special line, resumable per shard.
    SpecialVanish {
        #[arg(long, value_enum, default_value_t = ScopeArg::Sample)]
        scope: ScopeArg,
        /// Stop after this many new shards (the rest can be resumed later).
        #[arg(long)]
        max_shards: Option<usize>,
    },
    /// Digest every output file and summarize the stage reports.
    Report,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScopeArg {
    Sample,
    Full,
}

impl ScopeArg {
    fn name(self) -> &'static str {
        match self {
            ScopeArg::Sample => "sample",
            ScopeArg::Full => "full",
        }
    }
    fn scope(self) -> Scope {
        match self {
            ScopeArg::Sample => Scope::Sample,
            ScopeArg::Full => Scope::Full,
        }
    }
}

fn default_levi(t: RootType, n: usize) -> usize {
    match (t, n) {
        (RootType::E, 7) => 7,
        (RootType::E, 8) => 8,
        (RootType::F, 4) => 4,
        _ => 1,
    }
}

fn datum(sys: &System) -> Result<RootDatum> {
    let t = RootType::parse(&sys.kind)?;
    let om = match &sys.levi {
        None => default_levi(t, sys.rank),
        Some(s) => match s.parse::<usize>() {
            Ok(i) => i,
            Err(_) => {
                let probe = build_root_datum(t, sys.rank, 1)?;
                let all: Vec<usize> = (0..sys.rank).collect();
                let want = s.to_ascii_uppercase();
                (0..sys.rank)
                    .find(|&i| {
                        let rest: Vec<usize> = all.iter().copied().filter(|&j| j != i).collect();
                        probe.diagram_label(&rest) == want
                    })
                    .map(|i| i + 1)
                    .with_context(|| format!("no maximal Levi of type {s} in {}", probe.label()))?
            }
        },
    };
    Ok(build_root_datum(t, sys.rank, om)?)
}

fn tag(d: &RootDatum) -> String {
    format!("{}_levi{}", d.label(), d.levi_omitted + 1)
}

fn fmt_vec(v: &[Q]) -> String {
    format!("({})", v.iter().map(fmt_q).collect::<Vec<_>>().join(" "))
}

#[derive(Serialize)]
struct OrbitLine {
    label: String,
    weighted_dynkin: Vec<i64>,
    nodes: Vec<usize>,
    gamma: Vec<String>,
    codim: usize,
    poles: usize,
    zeros: usize,
    residual: bool,
}

fn orbits(out: &Path, sys: &System) -> Result<bool> {
    let d = datum(sys)?;
    let all: Vec<usize> = (0..d.rank).collect();
    let list = enumerate_standard_residual(&d, &all);
    let lines: Vec<OrbitLine> = list
        .iter()
        .map(|s| OrbitLine {
            label: s.label.name.clone().unwrap_or_else(|| "?".into()),
            weighted_dynkin: s.label.weighted_dynkin.clone(),
            nodes: s.nodes.iter().map(|i| i + 1).collect(),
            gamma: s.gamma.iter().map(fmt_q).collect(),
            codim: s.space.codim,
            poles: s.space.pole_set.len(),
            zeros: s.space.zero_set.len(),
            residual: is_residual(&d, &s.space) && s.space.pole_set.len() == s.space.zero_set.len() + s.space.codim,
        })
        .collect();
    let mut ok = true;
    for l in &lines {
        let wdd: Vec<String> = l.weighted_dynkin.iter().map(|x| x.to_string()).collect();
        println!("{:<12} [{}] codim {} |P| {} |Z| {}", l.label, wdd.join(" "), l.codim, l.poles, l.zeros);
        if !l.residual {
            println!("  FAIL: residual equality does not hold");
            ok = false;
        }
    }
    println!("{} orbits", lines.len());
    write_jsonl::<(), _>(&out.join(format!("orbits_{}.jsonl", d.label())), None, &lines)?;
    Ok(ok)
}

#[derive(Serialize)]
struct CascadeSummary {
    datum: String,
    levi: String,
    phases: Vec<[usize; 2]>,
    checks: Vec<(String, bool)>,
    failures: Vec<String>,
    positive_order_off_center: usize,
    classical: [bool; 4],
}

fn load_or_run(out: &Path, d: &RootDatum) -> Result<CascadeDB> {
    let dir = out.join(format!("cascade_{}", tag(d)));
    if dir.join("manifest.json").exists() {
        eprintln!("importing {}", dir.display());
        return Ok(store::import_cascade(d, &dir)?);
    }
    Ok(run_cascade(d)?)
}

fn cascade(out: &Path, sys: &System) -> Result<bool> {
    let d = datum(sys)?;
    let t0 = Instant::now();
    let db = run_cascade(&d)?;
    eprintln!("cascade {} built in {:.1?}", d.label(), t0.elapsed());
    let rep = verify_cascade(&db, &d);
    let cl = check_classical(&db, &d);
    let sum = CascadeSummary {
        datum: d.label(),
        levi: d.levi_prime_label(),
        phases: db.gen.iter().zip(&db.std).map(|(g, s)| [g.len(), s.len()]).collect(),
        checks: rep.checks.clone(),
        failures: rep.failures.clone(),
        positive_order_off_center: positive_order_off_center(&db, &d).len(),
        classical: [cl.late_points_at_centers, cl.early_order_zero, cl.nonresidual_at_centers, cl.early_poles_positive],
    };
    for (k, [g, s]) in sum.phases.iter().enumerate() {
        println!("phase {k}: gen {g} std {s}");
    }
    for (name, ok) in &sum.checks {
        println!("{name}: {}", if *ok { "ok" } else { "FAIL" });
    }
    for f in rep.failures.iter().take(20) {
        println!("  witness: {f}");
    }
    println!("positive-order spaces met off center: {} W'-orbits", sum.positive_order_off_center);
    let classical = matches!(d.kind, RootType::A | RootType::B | RootType::C | RootType::D);
    let classical_ok = sum.classical.iter().all(|c| *c);
    if classical {
        for (name, ok) in ["(i)", "(ii)", "(iii)", "(iv)"].iter().zip(sum.classical) {
            println!("classical {name}: {}", if ok { "ok" } else { "FAIL" });
        }
        for w in &cl.witnesses {
            println!("  witness: {w}");
        }
    }
    let dir = out.join(format!("cascade_{}", tag(&d)));
    store::export_cascade(&db, &d, &dir)?;
    write_jsonl::<(), _>(&out.join(format!("cascade_{}.jsonl", tag(&d))), None, &[sum])?;
    println!("wrote {}", dir.display());
    Ok(rep.ok() && (!classical || classical_ok))
}

struct Pair<'a> {
    phase: usize,
    row: usize,
    l0: &'a PoleSpace,
    w: &'a WeylElement,
}

fn residual_pairs<'a>(d: &RootDatum, db: &'a CascadeDB) -> Vec<Pair<'a>> {
    let mut v = Vec::new();
    for (phase, rows) in db.std.iter().enumerate() {
        for (row, r) in rows.iter().enumerate() {
            if is_residual(d, &r.l0) {
                v.extend(r.ws.iter().map(|w| Pair { phase, row, l0: &r.l0, w }));
            }
        }
    }
    v
}

fn fmt_den(m: &DenominatorMultiset) -> String {
    let v: Vec<String> = m.entries.iter().map(|(f, k)| if *k == 1 { format!("({f})") } else { format!("({f})^{k}") }).collect();
    if v.is_empty() {
        "1".into()
    } else {
        v.join(" ")
    }
}

fn envden(out: &Path, sys: &System) -> Result<bool> {
    let d = datum(sys)?;
    let db = load_or_run(out, &d)?;
    let pairs = residual_pairs(&d, &db);
    let kinds = [(DenKind::Sigma, "Sigma"), (DenKind::SigmaPrime, "Sigma'"), (DenKind::SigmaTau, "Sigma_tau")];
    let dens: Vec<Vec<Result<DenominatorMultiset, polecasc::Error>>> = pairs
        .par_iter()
        .map(|p| kinds.iter().map(|(k, _)| enveloping_den(&d, p.l0, p.w, *k)).collect())
        .collect();
    let mut text = String::new();
    let mut ok = true;
    for (p, ds) in pairs.iter().zip(&dens) {
        text += &format!("std[{}][{}] w = [{}] center {}\n", p.phase, p.row, canonical_word(&d, p.w), fmt_vec(&p.l0.center));
        for ((_, name), r) in kinds.iter().zip(ds) {
            match r {
                Ok(m) => text += &format!("  {name}: {}\n", fmt_den(m)),
                Err(e) => {
                    ok = false;
                    text += &format!("  {name}: error: {e}\n");
                }
            }
        }
    }
    let path = out.join(format!("envden_{}.txt", tag(&d)));
    fs::create_dir_all(out)?;
    fs::write(&path, &text)?;
    println!("{} residual Std pairs, denominators written to {}", pairs.len(), path.display());
    Ok(ok)
}

#[derive(Serialize)]
struct CheckLine {
    phase: usize,
    row: usize,
    w: String,
    center: String,
    holds: bool,
    detail: String,
}

fn verify(out: &Path, sys: &System, main: bool) -> Result<bool> {
    let d = datum(sys)?;
    let db = load_or_run(out, &d)?;
    let pairs = residual_pairs(&d, &db);
    let lines: Vec<CheckLine> = pairs
        .par_iter()
        .map(|p| {
            let (holds, detail) = if main {
                match main_containment(&d, p.l0, p.w) {
                    Ok(m) => (
                        m.holds(),
                        format!("sigma<=d {} prime<=tau {} tau<=dprime {}", m.sigma_in_d, m.prime_in_tau, m.tau_in_dprime),
                    ),
                    Err(e) => (false, format!("error: {e}")),
                }
            } else {
                match check_tau_identity(&d, p.l0, p.w) {
                    Ok(b) => (b, String::new()),
                    Err(e) => (false, format!("error: {e}")),
                }
            };
            CheckLine { phase: p.phase, row: p.row, w: canonical_word(&d, p.w), center: fmt_vec(&p.l0.center), holds, detail }
        })
        .collect();
    let name = if main { "verify-main" } else { "verify-tau" };
    let bad: Vec<&CheckLine> = lines.iter().filter(|l| !l.holds).collect();
    for l in bad.iter().take(20) {
        println!("FAIL std[{}][{}] w = [{}] center {} {}", l.phase, l.row, l.w, l.center, l.detail);
    }
    println!("{name}: {} of {} residual Std pairs hold", lines.len() - bad.len(), lines.len());
    write_jsonl::<(), _>(&out.join(format!("{name}_{}.jsonl", tag(&d))), None, &lines)?;
    Ok(bad.is_empty())
}

#[derive(Serialize)]
struct ClassifyLine {
    u_counts: Vec<usize>,
    tau: usize,
    eta: usize,
    minimal: bool,
    eta_routes_agree: bool,
}

fn special_classify(out: &Path) -> Result<bool> {
    let ctx = build_special_context()?;
    let t = classify_weyl_triples(&ctx);
    let line = ClassifyLine {
        u_counts: t.u_counts.to_vec(),
        tau: t.tau.len(),
        eta: t.eta.len(),
        minimal: t.minimal_ok,
        eta_routes_agree: t.eta_routes_agree,
    };
    println!("{}", line.u_counts.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" "));
    println!("|W_7/6| = {}, |W_8/7| = {}, minimal {}, eta routes agree {}", line.tau, line.eta, line.minimal, line.eta_routes_agree);
    let ok = line.u_counts == [1, 3, 60, 150] && line.tau == 56 && line.eta == 240 && line.minimal && line.eta_routes_agree;
    write_jsonl::<(), _>(&out.join("special_classify.jsonl"), None, &[line])?;
    Ok(ok)
}

#[derive(Serialize)]
struct VanishSummary {
    scope: String,
    shards: usize,
    triples: usize,
    in_scope: usize,
    checked: usize,
    polynomial_regime: usize,
    finite_regime: usize,
    invariant_failures: usize,
    violations: usize,
    max_abs: String,
}

fn special_vanish(out: &Path, scope: ScopeArg, max_shards: Option<usize>) -> Result<bool> {
    let t0 = Instant::now();
    let ctx = build_special_context()?;
    let t = classify_weyl_triples(&ctx);
    let dir = out.join(format!("special_{}", scope.name()));
    fs::create_dir_all(&dir)?;
    let cache = KeyCache::default();
    let mut reports: Vec<ShardReport> = Vec::new();
    let mut fresh = 0;
    for sh in 0..t.eta.len() {
        if let Some(r) = store::read_shard(&dir, scope.name(), sh)? {
            reports.push(r);
            continue;
        }
        if max_shards.is_some_and(|m| fresh >= m) {
            println!("stopped after {fresh} new shards; rerun to resume");
            return Ok(true);
        }
        let r = vanishing_shard(&ctx, &t, sh, scope.scope(), &cache);
        store::write_shard(&dir, scope.name(), &r)?;
        fresh += 1;
        if sh % 20 == 0 {
            eprintln!("shard {sh}: {} checks, {:.1?}", r.checked, t0.elapsed());
        }
        reports.push(r);
    }
    let mut s = VanishSummary {
        scope: scope.name().into(),
        shards: reports.len(),
        triples: 0,
        in_scope: 0,
        checked: 0,
        polynomial_regime: 0,
        finite_regime: 0,
        invariant_failures: 0,
        violations: 0,
        max_abs: String::new(),
    };
    let mut max_abs = Q::from_integer(0);
    for r in &reports {
        s.triples += r.triples;
        s.in_scope += r.in_scope;
        s.checked += r.checked;
        s.polynomial_regime += r.polynomial_regime;
        s.finite_regime += r.finite_regime;
        s.invariant_failures += r.invariant_failures;
        s.violations += r.violations.len();
        max_abs = max_abs.max(r.max_abs);
        for v in r.violations.iter().take(5) {
            println!("FAIL triple {} N {} basis {} e {} value {}", v.triple, v.n, v.basis_index, v.e, fmt_q(&v.value));
        }
    }
    s.max_abs = fmt_q(&max_abs);
    println!(
        "{} sweep: {} triples, {} in scope, {} checks ({} polynomial regime, {} finite regime), {} violations, max |E| = {}",
        s.scope, s.triples, s.in_scope, s.checked, s.polynomial_regime, s.finite_regime, s.violations, s.max_abs
    );
    let ok = s.violations == 0 && s.invariant_failures == 0;
    write_jsonl::<(), _>(&out.join(format!("special_vanish_{}.jsonl", scope.name())), None, &[s])?;
    Ok(ok)
}

fn report(out: &Path) -> Result<bool> {
    if !out.is_dir() {
        bail!("no output directory {}", out.display());
    }
    let mut names: Vec<PathBuf> = fs::read_dir(out)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "jsonl"))
        .collect();
    names.sort();
    for p in &names {
        let body = fs::read_to_string(p)?;
        println!("{}: {} lines", p.file_name().unwrap().to_string_lossy(), body.lines().count());
    }
    let sums = store::write_digests(out)?;
    println!("{} files digested into {}", sums.len(), out.join("SHA256SUMS").display());
    Ok(true)
}

fn run(cli: Cli) -> Result<bool> {
    if cli.workers > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(cli.workers).build_global()?;
    }
    let out = cli.out.as_path();
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    match &cli.stage {
        Stage::Orbits(s) => orbits(out, s),
        Stage::Cascade(s) => cascade(out, s),
        Stage::Envden(s) => envden(out, s),
        Stage::VerifyMain(s) => verify(out, s, true),
        Stage::VerifyTau(s) => verify(out, s, false),
        Stage::SpecialClassify => special_classify(out),
        Stage::SpecialVanish { scope, max_shards } => special_vanish(out, *scope, *max_shards),
        Stage::Report => report(out),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

use polecasc::cascade::{check_classical, run_cascade, verify_cascade};
use polecasc::denominators::{check_tau_identity, main_containment};
use polecasc::polespaces::{enumerate_standard_residual, is_residual, orbit_table};
use polecasc::special_e8::*;
use polecasc::{build_root_datum, RootType, Q};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;
use oracles::*;

const MIN: Duration = Duration::from_secs(60);

/// Runtime budget per criterion.
const BUDGET: [Duration; 9] = [
    MIN,
    MIN,
    Duration::from_secs(5 * 60),
    Duration::from_secs(30 * 60),
    Duration::from_secs(10 * 60),
    Duration::from_secs(20 * 60),
    Duration::from_secs(2 * 60),
    Duration::from_secs(15 * 60),
    Duration::from_secs(20 * 60),
];

/// Criteria expected to fail, with the witness the failure must still show.
const KNOWN_FAILURES: &[(usize, &str)] = &[(5, "D4 (iv) gen[4][1]")];

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion_1() -> Outcome {
    let mut bad = Vec::new();
    let mut seen = Vec::new();
    for (t, ranks) in [(RootType::A, 1..=5), (RootType::B, 2..=4), (RootType::C, 3..=4), (RootType::D, 4..=5)] {
        for n in ranks {
            let d = build_root_datum(t, n, 1).unwrap();
            let all: Vec<usize> = (0..n).collect();
            let got = enumerate_standard_residual(&d, &all).len();
            let want = partition_oracle(t, n as u32);
            seen.push(format!("{t}{n}={got}"));
            if got != want {
                bad.push(format!("{t}{n}: {got} vs {want}"));
            }
        }
    }
    for (t, n, om) in [(RootType::G, 2, 1), (RootType::F, 4, 4), (RootType::E, 6, 1)] {
        let d = build_root_datum(t, n, om).unwrap();
        let all: Vec<usize> = (0..n).collect();
        let list = enumerate_standard_residual(&d, &all);
        let table: BTreeSet<Vec<i64>> = orbit_table().entries_for(&d).into_iter().map(|e| e.0).collect();
        let found: BTreeSet<Vec<i64>> = list.iter().map(|s| s.label.weighted_dynkin.clone()).collect();
        seen.push(format!("{t}{n}={}", list.len()));
        if found != table || found.len() != list.len() {
            bad.push(format!("{t}{n}: table mismatch"));
        }
        for s in &list {
            if !is_residual(&d, &s.space) || s.space.pole_set.len() != s.space.zero_set.len() + s.space.codim {
                bad.push(format!("{t}{n}: residual equality fails at {:?}", s.label.weighted_dynkin));
            }
        }
    }
    outcome(bad.is_empty(), if bad.is_empty() { seen.join(" ") } else { bad.join("; ") })
}

fn criterion_2(ctx: &SpecialContext) -> Outcome {
    let set = |m: Vec<Vec<i64>>| m.into_iter().collect::<BTreeSet<_>>();
    let ids = |v: &[usize]| v.iter().map(|&i| ctx.datum.coroots[i].clone()).collect::<BTreeSet<_>>();
    let scan = |v| pole_scan(&ctx.datum, &SPECIAL_BASE, &SPECIAL_DIR, v);
    let checks = [
        ("P_L0", ids(&ctx.p_l0), scan(1), set(columns(&P_L0_MATRIX)), 17),
        ("R_x+4", ids(&ctx.r_x4), scan(4), set(columns(&R_X4_MATRIX)), 7),
        ("R_x+5", ids(&ctx.r_x5), scan(5), set(columns(&R_X5_MATRIX)), 8),
    ];
    let bad: Vec<&str> = checks.iter().filter(|c| c.1 != c.3 || c.2 != c.3 || c.3.len() != c.4).map(|c| c.0).collect();
    outcome(bad.is_empty(), if bad.is_empty() { "17/7/8 columns equal as sets".into() } else { format!("mismatch: {bad:?}") })
}

fn criterion_3(ctx: &SpecialContext, t: &CosetTables) -> Outcome {
    let pass = t.u_counts == [1, 3, 60, 150] && t.tau.len() == 56 && t.eta.len() == 240 && t.minimal_ok && t.eta_routes_agree;
    outcome(pass, format!("U {:?} tau {} eta {} minimal {} |W_F0| {}", t.u_counts, t.tau.len(), t.eta.len(), t.minimal_ok, ctx.wf0.len()))
}

fn criterion_4() -> Outcome {
    let d = build_root_datum(RootType::F, 4, 4).unwrap();
    let db = run_cascade(&d).unwrap();
    let rep = verify_cascade(&db, &d);
    let phases: Vec<usize> = db.gen.iter().map(|g| g.len()).collect();
    let pass = rep.ok() && d.levi_prime_label() == "B3" && db.gen.len() == 5;
    let detail = if pass {
        format!("levi {} phases {:?} {} checks", d.levi_prime_label(), phases, rep.checks.len())
    } else {
        format!("{:?}", &rep.failures[..rep.failures.len().min(5)])
    };
    outcome(pass, detail)
}

fn criterion_5() -> Outcome {
    let mut failed = Vec::new();
    for (t, lo) in [(RootType::A, 1), (RootType::B, 2), (RootType::C, 2), (RootType::D, 4)] {
        for n in lo..=5 {
            let d = build_root_datum(t, n, 1).unwrap();
            let db = run_cascade(&d).unwrap();
            let c = check_classical(&db, &d);
            let rep = verify_cascade(&db, &d);
            let flags = [rep.ok(), c.late_points_at_centers, c.early_order_zero, c.nonresidual_at_centers, c.early_poles_positive];
            if flags.iter().any(|f| !f) {
                failed.push(format!("{t}{n} {}", c.witnesses.first().map(String::as_str).unwrap_or("verify")));
            }
        }
    }
    outcome(failed.is_empty(), failed.join("; "))
}

fn criterion_6() -> Outcome {
    let d = build_root_datum(RootType::F, 4, 4).unwrap();
    let db = run_cascade(&d).unwrap();
    let (mut pairs, mut bad) = (0, Vec::new());
    for r in db.std.iter().flatten().filter(|r| is_residual(&d, &r.l0)) {
        for w in &r.ws {
            pairs += 1;
            let tau = check_tau_identity(&d, &r.l0, w).unwrap();
            let main = main_containment(&d, &r.l0, w).unwrap().holds();
            if !(tau && main) {
                bad.push(format!("[{}] tau {tau} main {main}", w.word_string()));
            }
        }
    }
    outcome(bad.is_empty() && pairs > 0, format!("{pairs} residual standard pairs{}", if bad.is_empty() { String::new() } else { format!(", failing {bad:?}") }))
}

fn criterion_7() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let (mut cases, mut bad) = (0, 0);
    for k in 1..=3 {
        for signs in 0..(1u32 << k) {
            let minus: Vec<bool> = (0..k).map(|j| signs >> j & 1 == 1).collect();
            for n in 0..=3 {
                for e in 1..=3 {
                    for _ in 0..2 {
                        let pairing = random_pairing(&mut rng, n, k);
                        cases += 1;
                        bad += (e_value(&pairing, &minus, e) != e_oracle(&pairing, &minus, e)) as usize;
                    }
                }
            }
        }
    }
    outcome(bad == 0 && cases >= 200, format!("{cases} cases, {bad} mismatches"))
}

fn sweep(ctx: &SpecialContext, t: &CosetTables, scope: Scope) -> (ShardReport, Duration) {
    let t0 = Instant::now();
    let cache = KeyCache::default();
    let mut total = ShardReport::default();
    for sh in 0..t.eta.len() {
        let r = vanishing_shard(ctx, t, sh, scope, &cache);
        total.triples += r.triples;
        total.in_scope += r.in_scope;
        total.checked += r.checked;
        total.invariant_failures += r.invariant_failures;
        total.violations.extend(r.violations);
    }
    (total, t0.elapsed())
}

fn criterion_8(ctx: &SpecialContext, t: &CosetTables) -> Outcome {
    let (sample, sample_time) = sweep(ctx, t, Scope::Sample);
    let (full, full_time) = sweep(ctx, t, Scope::Full);
    let clean = |r: &ShardReport| r.violations.is_empty() && r.invariant_failures == 0;
    let pass = clean(&sample) && clean(&full) && full.triples == 214 * 56 * 240 && sample.checked > 0;
    outcome(
        pass,
        format!(
            "sample {} triples {} checks {:.1?}; full {} triples {} checks {:.1?}; violations {}",
            sample.triples,
            sample.checked,
            sample_time,
            full.triples,
            full.checked,
            full_time,
            sample.violations.len() + full.violations.len()
        ),
    )
}

fn run_cli(out: &Path, workers: usize, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_polecasc"))
        .arg("--workers")
        .arg(workers.to_string())
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .unwrap()
        .status
        .success()
}

const PIPELINE: &[&[&str]] = &[
    &["orbits", "F", "4"],
    &["cascade", "F", "4", "--levi", "B3"],
    &["envden", "F", "4"],
    &["verify-main", "F", "4"],
    &["verify-tau", "F", "4"],
    &["cascade", "C", "4"],
    &["special-classify"],
    &["special-vanish", "--scope", "sample"],
    &["report"],
];

fn criterion_9() -> Outcome {
    let mut notes = Vec::new();
    let mut pass = true;

    let mut inv = 0;
    for (t, n) in [(RootType::A, 1), (RootType::A, 2), (RootType::A, 3), (RootType::B, 2), (RootType::B, 3), (RootType::C, 3), (RootType::G, 2)] {
        let d = build_root_datum(t, n, 1).unwrap();
        for w in d.parabolic_elements(&(0..n).collect::<Vec<_>>()) {
            pass &= d.inversion_set(&w).len() == w.len();
            inv += 1;
        }
    }
    notes.push(format!("inversion {inv} elements"));

    let herit: usize = heritability_cases().into_iter().map(|(t, n, om)| heritability(t, n, om)).sum();
    pass &= herit > 0;
    notes.push(format!("heritability {herit} checks"));

    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut sym_ok = true;
    for _ in 0..100 {
        let n = rng.gen_range(1..=4);
        let k = rng.gen_range(1..=3);
        let minus: Vec<bool> = (0..k).map(|_| rng.gen_bool(0.5)).collect();
        let e = rng.gen_range(1..=3);
        let pairing = random_pairing(&mut rng, n, k);
        let base = e_value(&pairing, &minus, e);
        let mut shuffled = pairing.clone();
        shuffled.shuffle(&mut rng);
        sym_ok &= e_value(&shuffled, &minus, e) == base;
        let other: Vec<Q> = (0..k).map(|_| Q::from_integer(rng.gen_range(-2..=2))).collect();
        let (a, b) = (Q::from_integer(rng.gen_range(-3..=3)), Q::from_integer(rng.gen_range(-3..=3)));
        let mut mixed = pairing.clone();
        mixed[0] = pairing[0].iter().zip(&other).map(|(x, y)| a * *x + b * *y).collect();
        let mut swapped = pairing;
        swapped[0] = other;
        sym_ok &= e_value(&mixed, &minus, e) == a * base + b * e_value(&swapped, &minus, e);
    }
    pass &= sym_ok;
    notes.push(format!("E symmetry/multilinearity {}", if sym_ok { "ok" } else { "broken" }));

    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for (dir, workers) in dirs.iter().zip([1, 4]) {
        for args in PIPELINE {
            pass &= run_cli(dir.path(), workers, args);
        }
    }
    let sums: Vec<String> = dirs.iter().map(|d| fs::read_to_string(d.path().join("SHA256SUMS")).unwrap_or_default()).collect();
    let same = !sums[0].is_empty() && sums[0] == sums[1];
    pass &= same;
    notes.push(format!("{} files byte-identical across --workers 1/4: {same}", sums[0].lines().count()));

    outcome(pass, notes.join("; "))
}

#[test]
fn acceptance() {
    let ctx = build_special_context().unwrap();
    let t0 = Instant::now();
    let tables = classify_weyl_triples(&ctx);
    let classify_time = t0.elapsed();

    let mut results: Vec<(Outcome, Duration)> = Vec::new();
    let mut timed = |f: &mut dyn FnMut() -> Outcome, extra: Duration| {
        let t0 = Instant::now();
        let o = f();
        results.push((o, t0.elapsed() + extra));
    };
    timed(&mut criterion_1, Duration::ZERO);
    timed(&mut || criterion_2(&ctx), Duration::ZERO);
    timed(&mut || criterion_3(&ctx, &tables), classify_time);
    timed(&mut criterion_4, Duration::ZERO);
    timed(&mut criterion_5, Duration::ZERO);
    timed(&mut criterion_6, Duration::ZERO);
    timed(&mut criterion_7, Duration::ZERO);
    timed(&mut || criterion_8(&ctx, &tables), Duration::ZERO);
    timed(&mut criterion_9, Duration::ZERO);

    let mut unexpected = Vec::new();
    println!();
    for (i, ((o, took), budget)) in results.iter().zip(BUDGET).enumerate() {
        let n = i + 1;
        let pass = o.pass && *took < budget;
        let over = if *took < budget { String::new() } else { format!(" over budget {budget:?}") };
        println!("criterion {n}: {} ({:.1?}{over}) {}", if pass { "PASS" } else { "FAIL" }, took, o.detail);
        match KNOWN_FAILURES.iter().find(|k| k.0 == n) {
            Some((_, witness)) => {
                if pass || !o.detail.contains(witness) {
                    unexpected.push(format!("criterion {n} no longer fails with witness {witness}"));
                }
            }
            None if !pass => unexpected.push(format!("criterion {n} failed")),
            None => {}
        }
    }
    assert!(unexpected.is_empty(), "{unexpected:?}");
}

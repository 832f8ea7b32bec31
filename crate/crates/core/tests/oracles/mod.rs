#![allow(dead_code)]
//! Reference computations shared by the test suites.

use polecasc::cascade::run_cascade;
use polecasc::denominators::{carry_to, enveloping_den, DenKind};
use polecasc::polespaces::{std_data, std_data_in};
use polecasc::{build_root_datum, RootDatum, RootType, Q};
use std::collections::BTreeSet;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn partitions(n: u32, max: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if n == 0 {
        out.push(cur.clone());
        return;
    }
    for p in (1..=max.min(n)).rev() {
        cur.push(p);
        partitions(n - p, p, cur, out);
        cur.pop();
    }
}

fn all_partitions(n: u32) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    partitions(n, n, &mut Vec::new(), &mut out);
    out
}

fn mult(p: &[u32], k: u32) -> usize {
    p.iter().filter(|&&x| x == k).count()
}

/// Parts of the given parity occur with even multiplicity.
fn parity_even_mult(p: &[u32], odd: bool) -> bool {
    p.iter().all(|&k| (k % 2 == 1) != odd || mult(p, k).is_multiple_of(2))
}

/// Orbit counts of the dual algebra of a classical datum.
pub fn partition_oracle(t: RootType, n: u32) -> usize {
    match t {
        RootType::A => all_partitions(n + 1).len(),
        RootType::B => all_partitions(2 * n).iter().filter(|p| parity_even_mult(p, true)).count(),
        RootType::C => all_partitions(2 * n + 1).iter().filter(|p| parity_even_mult(p, false)).count(),
        RootType::D => all_partitions(2 * n)
            .iter()
            .filter(|p| parity_even_mult(p, false))
            .map(|p| if p.iter().all(|k| k % 2 == 0) { 2 } else { 1 })
            .sum(),
        _ => unreachable!(),
    }
}

pub fn random_pairing(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Vec<Vec<Q>> {
    (0..n).map(|_| (0..k).map(|_| q(rng.gen_range(-2..=2))).collect()).collect()
}

/// Truncated series in `t_1..t_n` with `t_i^2 = 0`, indexed by subset mask.
type Series = Vec<Q>;

fn series_mul(a: &Series, b: &Series) -> Series {
    let mut out = vec![q(0); a.len()];
    for (i, x) in a.iter().enumerate() {
        if x == &q(0) {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if i & j == 0 {
                out[i | j] += *x * *y;
            }
        }
    }
    out
}

fn qpow(y: Q, k: i64) -> Q {
    if k >= 0 {
        (0..k).fold(q(1), |a, _| a * y)
    } else {
        q(1) / qpow(y, -k)
    }
}

/// `(y + u)^p` for a nilpotent `u` with zero constant term.
fn series_pow(y: Q, u: &Series, p: i64, n: usize) -> Series {
    let mut out = vec![q(0); u.len()];
    let mut power = vec![q(0); u.len()];
    power[0] = q(1);
    let mut coef = q(1);
    for j in 0..=n as i64 {
        let scale = coef * qpow(y, p - j);
        for (o, x) in out.iter_mut().zip(&power) {
            *o += scale * *x;
        }
        power = series_mul(&power, u);
        coef = coef * q(p - j) / q(j + 1);
    }
    out
}

/// `E` read off from the mixed derivative of `prod_s (y + s(v))^{± e}` at `y = 2`.
pub fn e_oracle(pairing: &[Vec<Q>], minus: &[bool], e: u32) -> Q {
    let n = pairing.len();
    let y = q(2);
    let mut prod: Series = vec![q(0); 1 << n];
    prod[0] = q(1);
    for (j, &neg) in minus.iter().enumerate() {
        let mut u: Series = vec![q(0); 1 << n];
        for (i, row) in pairing.iter().enumerate() {
            u[1 << i] = row[j];
        }
        let p = if neg { -(e as i64) } else { e as i64 };
        prod = series_mul(&prod, &series_pow(y, &u, p, n));
    }
    let n_w = minus.iter().filter(|m| !**m).count() as i64 - minus.iter().filter(|m| **m).count() as i64;
    prod[(1 << n) - 1] / qpow(y, e as i64 * n_w - n as i64)
}

pub fn naive_permanent(m: &[Vec<Q>]) -> Q {
    fn rec(m: &[Vec<Q>], row: usize, used: &mut Vec<bool>) -> Q {
        if row == m.len() {
            return q(1);
        }
        let mut s = q(0);
        for j in 0..m.len() {
            if !used[j] {
                used[j] = true;
                s += m[row][j] * rec(m, row + 1, used);
                used[j] = false;
            }
        }
        s
    }
    rec(m, 0, &mut vec![false; m.len()])
}

/// `Den(L) ⊆ Den(M)` carried to `L`, for every child `L` of a parent `M` in
/// the cascade, in all three kinds.
pub fn heritability(t: RootType, n: usize, om: usize) -> usize {
    let d = build_root_datum(t, n, om).unwrap();
    let db = run_cascade(&d).unwrap();
    let mut checked = 0;
    for k in 1..db.gen.len() {
        for r in &db.gen[k] {
            let Some(pi) = r.parent else { continue };
            let m = &db.gen[k - 1][pi].space;
            if m.same_space(&r.space) {
                continue;
            }
            let sl = std_data(&r.space, &d);
            let m_at = m.transform(&d, &d.inverse(&sl.w));
            let sm = std_data_in(&m_at, &d, &sl.nodes);
            let x = d.mul(&sl.w, &sm.w);
            for kind in [DenKind::Sigma, DenKind::SigmaPrime, DenKind::SigmaTau] {
                let dl = enveloping_den(&d, &sl.l0, &sl.w, kind).unwrap();
                let dm = enveloping_den(&d, &sm.l0, &x, kind).unwrap();
                let carried = carry_to(&d, &dm, &sm.w, &sl.l0);
                assert!(dl.is_subset_of(&carried), "{t}{n} omit {om} {kind:?} L {:?} M {:?}", sl.l0.center, m.center);
                checked += 1;
            }
        }
    }
    checked
}

/// Every (type, rank, omitted node) of rank at most 3 with a nontrivial R'.
pub fn heritability_cases() -> Vec<(RootType, usize, usize)> {
    vec![
        (RootType::A, 2, 1),
        (RootType::A, 3, 1),
        (RootType::A, 3, 2),
        (RootType::B, 2, 1),
        (RootType::B, 2, 2),
        (RootType::B, 3, 1),
        (RootType::B, 3, 3),
        (RootType::C, 3, 1),
        (RootType::C, 3, 3),
        (RootType::G, 2, 1),
        (RootType::G, 2, 2),
    ]
}

/// Base point and direction of the special E8 line, in fundamental-weight coordinates.
pub const SPECIAL_BASE: [i64; 8] = [1, 0, 0, 1, 0, 0, 1, 0];
pub const SPECIAL_DIR: [i64; 8] = [0, 0, 0, 0, 0, 0, 0, 1];

/// Positive coroots taking `value` at the base point, constant along the line
/// when `value == 1` and with slope 1 otherwise.
pub fn pole_scan(d: &RootDatum, base: &[i64], dir: &[i64], value: i64) -> BTreeSet<Vec<i64>> {
    d.coroots[..d.npos]
        .iter()
        .filter(|c| {
            let at = |v: &[i64]| c.iter().zip(v).map(|(a, b)| a * b).sum::<i64>();
            at(base) == value && at(dir) == if value == 1 { 0 } else { 1 }
        })
        .cloned()
        .collect()
}

//! Denominator sets of restricted Weyl-group sums: regular envelopes,
//! highest/lowest weight extraction, enveloping denominators, the τ-identity,
//! the main containments and admissible regions.

use crate::linalg;
use crate::polespaces::{pole_space, std_data_in, PoleSpace};
use crate::rootsys::{RootDatum, Vector, WeylElement};
use crate::{Error, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// Affine function `gradient . x + constant` on a standard space, in the
/// fundamental-weight coordinates of its general point. Gradient entries on the
/// constant nodes are zero, so the form is also a functional on `V`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AffineForm {
    pub gradient: Vector,
    pub constant: Q,
}

impl AffineForm {
    pub fn is_const(&self) -> bool {
        self.gradient.iter().all(|g| g.is_zero())
    }

    /// Representative of `{Y, 1 - Y}` with positive leading gradient entry.
    pub fn canonical(self) -> AffineForm {
        match self.gradient.iter().find(|g| !g.is_zero()) {
            Some(g) if g.is_negative() => AffineForm {
                gradient: self.gradient.iter().map(|g| -*g).collect(),
                constant: Q::one() - self.constant,
            },
            _ => self,
        }
    }

    pub fn eval(&self, p: &[Q]) -> Q {
        linalg::dot(&self.gradient, p) + self.constant
    }
}

impl std::fmt::Display for AffineForm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut first = true;
        for (i, g) in self.gradient.iter().enumerate() {
            if g.is_zero() {
                continue;
            }
            let sign = if g.is_negative() { "-" } else if first { "" } else { "+" };
            let a = g.abs();
            let coef = if a.is_one() { String::new() } else { format!("{a}*") };
            write!(f, "{sign}{coef}x{}", i + 1)?;
            first = false;
        }
        if !self.constant.is_zero() || first {
            let sign = if self.constant.is_negative() { "-" } else if first { "" } else { "+" };
            write!(f, "{sign}{}", self.constant.abs())?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum DenKind {
    Sigma,
    SigmaPrime,
    SigmaTau,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenominatorMultiset {
    pub kind: DenKind,
    pub entries: BTreeMap<AffineForm, u32>,
}

impl DenominatorMultiset {
    pub fn new(kind: DenKind) -> Self {
        DenominatorMultiset { kind, entries: BTreeMap::new() }
    }
    pub fn add(&mut self, f: AffineForm, m: u32) {
        if m > 0 {
            *self.entries.entry(f).or_insert(0) += m;
        }
    }
    pub fn total(&self) -> u32 {
        self.entries.values().sum()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    /// Pointwise minimum of multiplicities.
    pub fn intersect(&self, other: &DenominatorMultiset) -> DenominatorMultiset {
        let entries = self
            .entries
            .iter()
            .filter_map(|(f, m)| other.entries.get(f).map(|n| (f.clone(), (*m).min(*n))))
            .collect();
        DenominatorMultiset { kind: self.kind, entries }
    }
    /// Multiset containment.
    pub fn is_subset_of(&self, other: &DenominatorMultiset) -> bool {
        self.entries.iter().all(|(f, m)| other.entries.get(f).is_some_and(|n| n >= m))
    }
    pub fn forms(&self) -> impl Iterator<Item = &AffineForm> {
        self.entries.keys()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EnvelopeRecord {
    pub envelope: PoleSpace,
    /// `w_H(H0) = H`, with `w_H` in the Weyl group of the constant coroots of `L0`.
    pub w_h: WeylElement,
    pub h0: PoleSpace,
    pub good: bool,
}

pub fn is_regular(l: &PoleSpace) -> bool {
    l.zero_set.is_empty()
}

fn neighbors(d: &RootDatum, a: usize, b: usize) -> bool {
    if a == b {
        return true;
    }
    let diff: Vec<i64> = d.coroots[a].iter().zip(&d.coroots[b]).map(|(x, y)| x - y).collect();
    d.coroot_id(&diff).is_some()
}

/// Classes of the transitive closure of the neighbor relation.
pub fn reg_components(d: &RootDatum, pole_set: &[usize]) -> Vec<Vec<usize>> {
    let mut comps: Vec<Vec<usize>> = Vec::new();
    let mut seen = vec![false; pole_set.len()];
    for s in 0..pole_set.len() {
        if seen[s] {
            continue;
        }
        seen[s] = true;
        let mut comp = vec![pole_set[s]];
        let mut stack = vec![s];
        while let Some(i) = stack.pop() {
            for j in 0..pole_set.len() {
                if !seen[j] && neighbors(d, pole_set[i], pole_set[j]) {
                    seen[j] = true;
                    comp.push(pole_set[j]);
                    stack.push(j);
                }
            }
        }
        comp.sort();
        comps.push(comp);
    }
    comps.sort();
    comps
}

fn subset_regular(d: &RootDatum, s: &[usize]) -> bool {
    pole_space(d, s).is_ok_and(|h| is_regular(&h))
}

/// Maximal subsets of `component` containing `anchor` that cut out a regular space.
pub fn maximal_regular_subsets(d: &RootDatum, anchor: usize, component: &[usize]) -> Vec<Vec<usize>> {
    if !subset_regular(d, &[anchor]) {
        return Vec::new();
    }
    let rest: Vec<usize> = component.iter().copied().filter(|&c| c != anchor).collect();
    let mut found: BTreeSet<Vec<usize>> = BTreeSet::new();
    // Regular sets are closed under taking subsets, so a depth-first search
    // over increasing index sequences reaches all of them.
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(vec![anchor], 0)];
    while let Some((set, from)) = stack.pop() {
        let mut maximal = true;
        for &c in &rest {
            if set.contains(&c) {
                continue;
            }
            let mut t = set.clone();
            t.push(c);
            if subset_regular(d, &t) {
                maximal = false;
                break;
            }
        }
        if maximal {
            let mut s = set.clone();
            s.sort();
            found.insert(s);
        }
        for k in from..rest.len() {
            let mut t = set.clone();
            t.push(rest[k]);
            if subset_regular(d, &t) {
                stack.push((t, k + 1));
            }
        }
    }
    found.into_iter().collect()
}

/// Regular envelopes of a standard space, standardized inside the Weyl group of
/// its constant coroots, with the goodness flag for twist `w`.
pub fn regular_envelopes(d: &RootDatum, l0: &PoleSpace, nodes: &[usize], w: &WeylElement) -> Vec<EnvelopeRecord> {
    let dmin = d.min_left_coset_rep(&d.levi_prime, w);
    let comps = reg_components(d, &l0.pole_set);
    let per_comp: Vec<Vec<Vec<usize>>> = comps
        .iter()
        .map(|c| {
            let mut all: BTreeSet<Vec<usize>> = BTreeSet::new();
            for &a in c {
                all.extend(maximal_regular_subsets(d, a, c));
            }
            all.into_iter().collect()
        })
        .collect();
    let mut unions: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut acc: Vec<Vec<usize>> = vec![Vec::new()];
    for choices in &per_comp {
        if choices.is_empty() {
            continue;
        }
        let mut next = Vec::new();
        for a in &acc {
            for c in choices {
                let mut u = a.clone();
                u.extend(c);
                u.sort();
                next.push(u);
            }
        }
        acc = next;
    }
    unions.extend(acc);
    let mut out: BTreeMap<Vec<usize>, EnvelopeRecord> = BTreeMap::new();
    for u in unions {
        let Ok(h) = pole_space(d, &u) else { continue };
        if !is_regular(&h) || out.contains_key(&h.pole_set) {
            continue;
        }
        let sd = std_data_in(&h, d, nodes);
        let good = h.pole_set.iter().all(|&c| {
            let img = d.act_coroot(&dmin, c);
            d.is_pos(img) || d.in_levi_prime(img)
        });
        out.insert(h.pole_set.clone(), EnvelopeRecord { envelope: h, w_h: sd.w, h0: sd.l0, good });
    }
    out.into_values().collect()
}

/// Symbolic general point of a standard space: coordinate `i` is `gamma_i` on
/// the constant nodes and the free variable `x_i` elsewhere.
pub fn std_wdd(d: &RootDatum, m0: &PoleSpace) -> Vec<AffineForm> {
    let n = d.rank;
    (0..n)
        .map(|i| {
            let mut g = vec![Q::zero(); n];
            if m0.constant.contains(&d.simple_coroot(i)) {
                AffineForm { gradient: g, constant: m0.center[i] }
            } else {
                g[i] = Q::one();
                AffineForm { gradient: g, constant: Q::zero() }
            }
        })
        .collect()
}

fn cov(d: &RootDatum, c: usize) -> Vector {
    d.coroots[c].iter().map(|x| Q::from_integer(*x)).collect()
}

/// `<coroot-covector, lambda> + shift` on a standard space in its own coordinates.
fn restrict(m: &[Q], shift: Q, point: &[AffineForm]) -> AffineForm {
    let n = point.len();
    let mut g = vec![Q::zero(); n];
    let mut k = shift;
    for i in 0..n {
        if m[i].is_zero() {
            continue;
        }
        for j in 0..n {
            g[j] += m[i] * point[i].gradient[j];
        }
        k += m[i] * point[i].constant;
    }
    AffineForm { gradient: g, constant: k }
}

/// Weight strings: for each gradient, multiplicities of the constants.
fn weight_table(d: &RootDatum, h0: &PoleSpace, coroots: &[usize]) -> BTreeMap<Vector, BTreeMap<Q, u32>> {
    let pt = std_wdd(d, h0);
    let mut t: BTreeMap<Vector, BTreeMap<Q, u32>> = BTreeMap::new();
    for &c in coroots {
        if h0.is_const(d, c) {
            continue;
        }
        let f = restrict(&cov(d, c), Q::zero(), &pt);
        *t.entry(f.gradient).or_default().entry(f.constant).or_insert(0) += 1;
    }
    t
}

fn jumps(t: &BTreeMap<Vector, BTreeMap<Q, u32>>, step: Q, shift: Q, kind: DenKind) -> DenominatorMultiset {
    let mut out = DenominatorMultiset::new(kind);
    for (g, counts) in t {
        for (k, n) in counts {
            let next = counts.get(&(*k + step)).copied().unwrap_or(0);
            if *n > next {
                out.add(AffineForm { gradient: g.clone(), constant: *k + shift }.canonical(), n - next);
            }
        }
    }
    out
}

fn require_regular(d: &RootDatum, h0: &PoleSpace) -> Result<(), Error> {
    let _ = d;
    if !is_regular(h0) {
        return Err(Error::NotRegular);
    }
    Ok(())
}

/// Highest weights of the nilradical plus 1, on a standard regular space.
pub fn den_sigma(d: &RootDatum, h0: &PoleSpace) -> Result<DenominatorMultiset, Error> {
    require_regular(d, h0)?;
    let pos: Vec<usize> = (0..d.npos).collect();
    Ok(jumps(&weight_table(d, h0, &pos), Q::one(), Q::one(), DenKind::Sigma))
}

/// Lowest weights of the nilradical, on a standard regular space.
pub fn den_sigma_tau(d: &RootDatum, h0: &PoleSpace) -> Result<DenominatorMultiset, Error> {
    require_regular(d, h0)?;
    let pos: Vec<usize> = (0..d.npos).collect();
    Ok(jumps(&weight_table(d, h0, &pos), -Q::one(), Q::zero(), DenKind::SigmaTau))
}

/// Coroots `R(d) ∪ d^-1(R'_+)`.
pub fn twisted_coroots(d: &RootDatum, dmin: &WeylElement) -> Vec<usize> {
    let mut s: BTreeSet<usize> = d.inversion_set(dmin).into_iter().collect();
    let dinv = d.inverse(dmin);
    for c in 0..d.npos {
        if d.in_levi_prime(c) {
            s.insert(d.act_coroot(&dinv, c));
        }
    }
    s.into_iter().collect()
}

/// Lowest weights over the twisted coroot set, for `d` minimal in `W'd`.
pub fn den_sigma_prime(d: &RootDatum, h0: &PoleSpace, dmin: &WeylElement) -> Result<DenominatorMultiset, Error> {
    require_regular(d, h0)?;
    if !d.is_min_in_left_coset(&d.levi_prime, dmin) {
        return Err(Error::NotMinimal);
    }
    let set = twisted_coroots(d, dmin);
    if set.iter().any(|&c| !d.is_pos(c)) {
        return Err(Error::NotMinimal);
    }
    Ok(jumps(&weight_table(d, h0, &set), -Q::one(), Q::zero(), DenKind::SigmaPrime))
}

/// Pulls a form on `H0` back along `w_H` and restricts it to the standard `L0`.
fn transport(d: &RootDatum, f: &AffineForm, env: &EnvelopeRecord, l0: &PoleSpace) -> Result<AffineForm, Error> {
    let n = d.rank;
    let lam = std_wdd(d, l0);
    // mu = w_H^-1 (lambda_L0), symbolically.
    let winv = d.inverse(&env.w_h);
    let c0: Vector = lam.iter().map(|a| a.constant).collect();
    let mc = d.act(&winv, &c0);
    let cols: Vec<Vector> = (0..n)
        .map(|j| {
            let e: Vector = lam.iter().map(|a| a.gradient[j]).collect();
            d.act(&winv, &e)
        })
        .collect();
    let mu: Vec<AffineForm> = (0..n)
        .map(|i| AffineForm { gradient: cols.iter().map(|c| c[i]).collect(), constant: mc[i] })
        .collect();
    for (i, m) in mu.iter().enumerate() {
        if env.h0.constant.contains(&d.simple_coroot(i)) && (!m.is_const() || m.constant != env.h0.center[i]) {
            return Err(Error::Substitution);
        }
    }
    Ok(restrict(&f.gradient, f.constant, &mu))
}

fn env_den(d: &RootDatum, env: &EnvelopeRecord, w: &WeylElement, kind: DenKind) -> Result<DenominatorMultiset, Error> {
    match kind {
        DenKind::Sigma => den_sigma(d, &env.h0),
        DenKind::SigmaTau => den_sigma_tau(d, &env.h0),
        DenKind::SigmaPrime => {
            let dh = d.min_left_coset_rep(&d.levi_prime, &d.mul(w, &env.w_h));
            den_sigma_prime(d, &env.h0, &dh)
        }
    }
}

/// Enveloping denominators of the standard pair `(L0, w)`: the multiset
/// intersection over `w`-good regular envelopes of the transported sets.
pub fn enveloping_den(d: &RootDatum, l0: &PoleSpace, w: &WeylElement, kind: DenKind) -> Result<DenominatorMultiset, Error> {
    let nodes: Vec<usize> = (0..d.rank).filter(|&j| l0.constant.contains(&d.simple_coroot(j))).collect();
    let envs: Vec<EnvelopeRecord> = regular_envelopes(d, l0, &nodes, w).into_iter().filter(|e| e.good).collect();
    if envs.is_empty() {
        return Err(Error::NoGoodEnvelope);
    }
    let sets: Vec<DenominatorMultiset> = envs
        .par_iter()
        .map(|env| {
            let raw = env_den(d, env, w, kind)?;
            let mut out = DenominatorMultiset::new(kind);
            for (f, m) in &raw.entries {
                let g = transport(d, f, env, l0)?;
                if !g.is_const() {
                    out.add(g.canonical(), *m);
                }
            }
            Ok(out)
        })
        .collect::<Result<_, Error>>()?;
    let mut it = sets.into_iter();
    let first = it.next().unwrap();
    Ok(it.fold(first, |a, b| a.intersect(&b)))
}

/// `(1 - τ0)(Y)`: same gradient, value `1 - Y(c)` at the center.
pub fn one_minus_tau(f: &AffineForm, center: &[Q]) -> AffineForm {
    let gc = linalg::dot(&f.gradient, center);
    AffineForm { gradient: f.gradient.clone(), constant: Q::one() - f.constant - gc - gc }
}

fn map_one_minus_tau(s: &DenominatorMultiset, center: &[Q]) -> DenominatorMultiset {
    let mut out = DenominatorMultiset::new(DenKind::SigmaTau);
    for (f, m) in &s.entries {
        out.add(one_minus_tau(f, center).canonical(), *m);
    }
    out
}

pub fn check_tau_identity(d: &RootDatum, l0: &PoleSpace, x: &WeylElement) -> Result<bool, Error> {
    let sig = enveloping_den(d, l0, x, DenKind::Sigma)?;
    let tau = enveloping_den(d, l0, x, DenKind::SigmaTau)?;
    Ok(tau == map_one_minus_tau(&sig, &l0.center))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MainContainment {
    pub sigma_in_d: bool,
    pub prime_in_tau: bool,
    pub tau_in_dprime: bool,
    pub sigma: DenominatorMultiset,
    pub prime: DenominatorMultiset,
}

impl MainContainment {
    pub fn holds(&self) -> bool {
        self.sigma_in_d && self.prime_in_tau && self.tau_in_dprime
    }
}

pub fn main_containment(d: &RootDatum, l0: &PoleSpace, w: &WeylElement) -> Result<MainContainment, Error> {
    main_containment_at(d, l0, w, &l0.center)
}

/// The main containments with `D`, `D'` taken at `point`
/// instead of the center.
pub fn main_containment_at(d: &RootDatum, l0: &PoleSpace, w: &WeylElement, point: &[Q]) -> Result<MainContainment, Error> {
    let sigma = enveloping_den(d, l0, w, DenKind::Sigma)?;
    let prime = enveloping_den(d, l0, w, DenKind::SigmaPrime)?;
    let image = map_one_minus_tau(&sigma, point);
    let sigma_in_d = sigma.forms().all(|f| f.eval(point) >= Q::one());
    let prime_in_tau = prime.is_subset_of(&image);
    let tau_in_dprime = image.forms().all(|f| f.eval(point) <= Q::zero());
    Ok(MainContainment { sigma_in_d, prime_in_tau, tau_in_dprime, sigma, prime })
}

pub fn check_main_containment(d: &RootDatum, l0: &PoleSpace, w: &WeylElement) -> Result<bool, Error> {
    Ok(main_containment(d, l0, w)?.holds())
}

/// Whether `p` lies in the admissible region of `L` cut out by the enveloping
/// denominators of each given standard pair `(L0, w)` with `w(L0) = L`.
pub fn adm_membership(d: &RootDatum, l: &PoleSpace, p: &[Q], pairs: &[(PoleSpace, WeylElement)]) -> Result<bool, Error> {
    if crate::polespaces::omega_order(d, l) > 0 {
        return Err(Error::PositiveOrder);
    }
    if !l.contains(d, p) {
        return Err(Error::OffSpace);
    }
    let own;
    let pairs = if pairs.is_empty() {
        let sd = crate::polespaces::std_data(l, d);
        own = vec![(sd.l0, sd.w)];
        &own[..]
    } else {
        pairs
    };
    for (l0, w) in pairs {
        let q = d.act(&d.inverse(w), p);
        let sig = enveloping_den(d, l0, w, DenKind::Sigma)?;
        let pr = enveloping_den(d, l0, w, DenKind::SigmaPrime)?;
        if sig.forms().any(|y| y.eval(&q) < Q::one()) || pr.forms().any(|z| z.eval(&q) > Q::zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Forms of `src` (on the standard `M0`) carried to `V` by `w` and restricted
/// to the standard `L0 ⊆ w(M0)`, dropping those constant on `L0`.
pub fn carry_to(d: &RootDatum, src: &DenominatorMultiset, w: &WeylElement, l0: &PoleSpace) -> DenominatorMultiset {
    let pt = std_wdd(d, l0);
    let mut out = DenominatorMultiset::new(src.kind);
    for (f, m) in &src.entries {
        let c = d.act_covector(w, &f.gradient);
        let g = restrict(&c, f.constant, &pt);
        if !g.is_const() {
            out.add(g.canonical(), *m);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::polespaces::affine_space;
    use crate::{build_root_datum, RootType};

    fn q(n: i64) -> Q {
        Q::from_integer(n)
    }

    #[test]
    fn canonical_forms() {
        let f = AffineForm { gradient: vec![q(-1), q(0)], constant: q(3) };
        let c = f.clone().canonical();
        assert_eq!(c, AffineForm { gradient: vec![q(1), q(0)], constant: q(-2) });
        assert_eq!(c.clone().canonical(), c);
        assert_eq!(c.to_string(), "x1-2");
    }

    #[test]
    fn a2_line_sigma() {
        let d = build_root_datum(RootType::A, 2, 1).unwrap();
        let h = pole_space(&d, &[d.simple_coroot(0)]).unwrap();
        let s = den_sigma(&d, &h).unwrap();
        assert_eq!(s.total(), 1);
        let (f, m) = s.entries.iter().next().unwrap();
        assert_eq!(*m, 1);
        // (a1 + a2)|_H + 1 = 1 + x2 + 1
        assert_eq!(f, &AffineForm { gradient: vec![q(0), q(1)], constant: q(2) });
        let v = PoleSpace::whole(&d);
        assert_eq!(den_sigma(&d, &v).unwrap().total(), 3);
    }

    #[test]
    fn components_and_subsets() {
        let d = build_root_datum(RootType::A, 3, 1).unwrap();
        let a1 = d.simple_coroot(0);
        let a3 = d.simple_coroot(2);
        assert_eq!(reg_components(&d, &[a1, a3]).len(), 2);
        assert_eq!(maximal_regular_subsets(&d, a1, &[a1]), vec![vec![a1]]);
        let d2 = build_root_datum(RootType::A, 2, 1).unwrap();
        let (s1, s2) = (d2.simple_coroot(0), d2.simple_coroot(1));
        let top = d2.coroot_id(&[1, 1]).unwrap();
        let subs = maximal_regular_subsets(&d2, s1, &[s1, s2, top]);
        let mut pair = vec![s1, s2];
        pair.sort();
        assert_eq!(subs, vec![pair]);
    }

    #[test]
    fn point_envelopes() {
        let d = build_root_datum(RootType::A, 1, 1).unwrap();
        let p = affine_space(&d, &[(0, q(1))]).unwrap();
        let envs = regular_envelopes(&d, &p, &[0], &d.identity());
        assert_eq!(envs.len(), 1);
        assert_eq!(envs[0].envelope.pole_set, p.pole_set);
    }
}

//! The contour-shift cascade: phase-by-phase construction of the `Gen` and
//! `Std` databases, and verification of the cascade axioms.

use crate::linalg;
use crate::polespaces::{
    enumerate_standard_residual, is_omega_pole_space, is_residual, omega_order, omega_poles,
    omega_sign, pole_space, std_data, PoleSpace,
};
use crate::rootsys::{RootDatum, Vector, WeylElement};
use crate::{Error, Q};
use num_traits::{One, Signed, Zero};
use std::collections::{BTreeMap, BTreeSet, HashMap};

/// A point of `V`, possibly "at infinity": `finite + t * inf` with `t` a
/// formal large parameter.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Point {
    pub finite: Vector,
    pub inf: Option<Vector>,
}

impl Point {
    pub fn at(v: Vector) -> Point {
        Point { finite: v, inf: None }
    }
    pub fn is_formal(&self) -> bool {
        self.inf.is_some()
    }
    pub fn transform(&self, d: &RootDatum, w: &WeylElement) -> Point {
        Point { finite: d.act(w, &self.finite), inf: self.inf.as_ref().map(|v| d.act(w, v)) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GenRow {
    pub space: PoleSpace,
    pub initial: Point,
    pub order: i64,
    pub numerator: Vec<usize>,
    pub denominator: Vec<usize>,
    pub jprime: Vec<usize>,
    pub gprime: Vec<Q>,
    pub rl: Vec<usize>,
    /// Row index of the parent flag in the previous phase.
    pub parent: Option<usize>,
    /// Final point of the segment used for this row, once processed.
    pub segment_end: Option<Point>,
}

impl GenRow {
    pub fn generation(&self) -> usize {
        self.rl.len() + 1
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StdRow {
    pub l0: PoleSpace,
    pub ws: Vec<WeylElement>,
    pub segments: Vec<(Point, Point)>,
    pub order: i64,
    pub sub: bool,
    pub nodes: Vec<usize>,
    pub gamma: Vec<Q>,
    pub perp: Vec<usize>,
    pub parallel: bool,
    pub pole_sets: Vec<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CascadeDB {
    pub gen: Vec<Vec<GenRow>>,
    pub std: Vec<Vec<StdRow>>,
}

/// Canonical form of a pole space under `W'`: the `W'`-dominant center and the
/// smallest pole set in the orbit under the stabilizer of that center.
pub type CanonKey = (Vector, Vec<usize>);

pub fn wprime_canon(d: &RootDatum, l: &PoleSpace) -> (CanonKey, WeylElement) {
    let (cp, a) = d.dominant_map_in(&l.center, &d.levi_prime);
    let stab: Vec<usize> = d.levi_prime.iter().copied().filter(|&j| cp[j].is_zero()).collect();
    let start: Vec<usize> = {
        let mut s: Vec<usize> = l.pole_set.iter().map(|&c| d.act_coroot(&a, c)).collect();
        s.sort();
        s
    };
    let mut seen: HashMap<Vec<usize>, WeylElement> = HashMap::new();
    seen.insert(start.clone(), d.identity());
    let mut queue = vec![start];
    let mut head = 0;
    while head < queue.len() {
        let set = queue[head].clone();
        head += 1;
        let x = seen[&set].clone();
        for &j in &stab {
            let s = d.from_word(&[j]);
            let mut img: Vec<usize> = set.iter().map(|&c| d.act_coroot(&s, c)).collect();
            img.sort();
            if !seen.contains_key(&img) {
                seen.insert(img.clone(), d.mul(&s, &x));
                queue.push(img);
            }
        }
    }
    let best = queue.iter().min().unwrap().clone();
    let x = d.mul(&seen[&best], &a);
    ((cp, best), x)
}

/// Canonical form of a pair (space, finite point) under `W'`.
pub fn wprime_canon_pair(d: &RootDatum, l: &PoleSpace, p: &[Q]) -> (Vector, Vec<usize>) {
    let (pp, a) = d.dominant_map_in(p, &d.levi_prime);
    let stab: Vec<usize> = d.levi_prime.iter().copied().filter(|&j| pp[j].is_zero()).collect();
    let mut start: Vec<usize> = l.pole_set.iter().map(|&c| d.act_coroot(&a, c)).collect();
    start.sort();
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    seen.insert(start.clone());
    let mut queue = vec![start];
    let mut head = 0;
    while head < queue.len() {
        let set = queue[head].clone();
        head += 1;
        for &j in &stab {
            let s = d.from_word(&[j]);
            let mut img: Vec<usize> = set.iter().map(|&c| d.act_coroot(&s, c)).collect();
            img.sort();
            if seen.insert(img.clone()) {
                queue.push(img);
            }
        }
    }
    (pp, seen.into_iter().next().unwrap())
}

fn normalize(d: &RootDatum, l: &PoleSpace) -> PoleSpace {
    pole_space(d, &omega_poles(d, l)).expect("pole space is consistent")
}

fn num_den(d: &RootDatum, l: &PoleSpace) -> (Vec<usize>, Vec<usize>) {
    let num = (0..d.npos).filter(|&c| d.in_levi_prime(c) && !l.is_const(d, c)).collect();
    let den = (0..d.npos).filter(|&c| !l.is_const(d, c)).collect();
    (num, den)
}

fn make_row(d: &RootDatum, space: PoleSpace, initial: Point, jp: Vec<usize>, gp: Vec<Q>, rl: Vec<usize>, parent: Option<usize>) -> GenRow {
    let (numerator, denominator) = num_den(d, &space);
    GenRow {
        order: omega_order(d, &space),
        space,
        initial,
        numerator,
        denominator,
        jprime: jp,
        gprime: gp,
        rl,
        parent,
        segment_end: None,
    }
}

/// The single row for `L = V`, starting at `t * w'`.
pub fn init_gen0(d: &RootDatum) -> Vec<GenRow> {
    let v = PoleSpace::whole(d);
    let mut inf = vec![Q::zero(); d.rank];
    inf[d.levi_omitted] = Q::one();
    let p = Point { finite: vec![Q::zero(); d.rank], inf: Some(inf) };
    vec![make_row(d, v, p, Vec::new(), Vec::new(), Vec::new(), None)]
}

/// Rows for `L = L' + R w'` over the standard residual spaces `L'` of `R'`.
pub fn first_generation(d: &RootDatum) -> Vec<GenRow> {
    let mut inf = vec![Q::zero(); d.rank];
    inf[d.levi_omitted] = Q::one();
    enumerate_standard_residual(d, &d.levi_prime)
        .into_iter()
        .map(|r| {
            let space = normalize(d, &r.space);
            let p = Point { finite: space.center.clone(), inf: Some(inf.clone()) };
            make_row(d, space, p, r.nodes, r.gamma, Vec::new(), None)
        })
        .collect()
}

/// Result of a crossing scan.
#[derive(Clone, Debug, Default)]
pub struct Crossings {
    pub rows: Vec<GenRow>,
    /// Coroots nonconstant on the space but constant along the segment.
    pub parallel: Vec<usize>,
    /// Coroots equal to 1 along the whole segment.
    pub contained: Vec<usize>,
}

/// Pole hyperplanes of Ω met by the segment `[p, q]` in `L`, excluding `p`
/// and including `q`.
pub fn poles_crossed(d: &RootDatum, parent: &GenRow, parent_idx: Option<usize>, p: &Point, q: &Point) -> Result<Crossings, Error> {
    let l = &parent.space;
    let mut out = Crossings::default();
    if p == q {
        return Ok(out);
    }
    if q.is_formal() {
        return Err(Error::FormalSegment);
    }
    if !l.contains(d, &p.finite) || !l.contains(d, &q.finite) {
        return Err(Error::OffSpace);
    }
    if let Some(dir) = &p.inf {
        if p.finite != q.finite || !l.dir_basis.is_empty() && !l.contains(d, &add(&p.finite, dir)) {
            return Err(Error::FormalSegment);
        }
    }
    // (sort key, point, coroot); smaller key is met first.
    let mut hits: Vec<(Q, Vector, usize)> = Vec::new();
    for c in 0..d.ncoroots() {
        if !omega_sign(d, c) || l.is_const(d, c) {
            continue;
        }
        match &p.inf {
            Some(dir) => {
                let a = d.eval(c, &p.finite);
                let b = d.eval(c, dir);
                if b.is_zero() {
                    out.parallel.push(c);
                    if a.is_one() {
                        out.contained.push(c);
                    }
                    continue;
                }
                let t = (Q::one() - a) / b;
                if t.is_negative() {
                    continue;
                }
                hits.push((-t, add(&p.finite, &scale(dir, t)), c));
            }
            None => {
                let a = d.eval(c, &p.finite);
                let b = d.eval(c, &q.finite);
                if a == b {
                    out.parallel.push(c);
                    if a.is_one() {
                        out.contained.push(c);
                    }
                    continue;
                }
                let s = (Q::one() - a) / (b - a);
                if s <= Q::zero() || s > Q::one() {
                    continue;
                }
                let diff: Vector = q.finite.iter().zip(&p.finite).map(|(x, y)| *x - *y).collect();
                hits.push((s, add(&p.finite, &scale(&diff, s)), c));
            }
        }
    }
    hits.sort();
    let base = omega_poles(d, l);
    let mut seen: BTreeMap<(Vector, Vec<usize>), usize> = BTreeMap::new();
    for (_, x, c) in hits {
        let mut defs = base.clone();
        defs.push(c);
        let raw = pole_space(d, &defs)?;
        if !is_omega_pole_space(d, &raw) {
            continue;
        }
        let m = normalize(d, &raw);
        let key = (x.clone(), m.pole_set.clone());
        if let Some(&k) = seen.get(&key) {
            let r: &mut GenRow = &mut out.rows[k];
            if c < *r.rl.last().unwrap() {
                *r.rl.last_mut().unwrap() = c;
            }
            continue;
        }
        let mut rl = parent.rl.clone();
        rl.push(c);
        seen.insert(key, out.rows.len());
        out.rows.push(make_row(d, m, Point::at(x), parent.jprime.clone(), parent.gprime.clone(), rl, parent_idx));
    }
    Ok(out)
}

fn add(a: &[Q], b: &[Q]) -> Vector {
    a.iter().zip(b).map(|(x, y)| *x + *y).collect()
}

fn scale(a: &[Q], t: Q) -> Vector {
    a.iter().map(|x| *x * t).collect()
}

/// Whether `L0` is residual, or lies in a residual space with the same center.
pub fn sub_tag(d: &RootDatum, l0: &PoleSpace) -> bool {
    if is_residual(d, l0) {
        return true;
    }
    let c = &l0.center;
    if c.iter().all(|x| x.is_zero()) {
        return true;
    }
    let poles = &l0.pole_set;
    let rows: Vec<Vector> = poles
        .iter()
        .map(|&p| d.coroots[p].iter().map(|x| Q::from_integer(*x)).collect())
        .collect();
    // Flats spanned by subsets of the pole set, explored by adding one pole at a time.
    let closure = |idx: &[usize]| -> Vec<usize> {
        let base: Vec<Vector> = idx.iter().map(|&i| rows[i].clone()).collect();
        let r = linalg::rank(&base);
        (0..poles.len())
            .filter(|&k| {
                let mut t = base.clone();
                t.push(rows[k].clone());
                linalg::rank(&t) == r
            })
            .collect()
    };
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut stack: Vec<Vec<usize>> = vec![Vec::new()];
    while let Some(flat) = stack.pop() {
        for k in 0..poles.len() {
            if flat.contains(&k) {
                continue;
            }
            let mut gen = flat.clone();
            gen.push(k);
            let f = closure(&gen);
            if f.len() == poles.len() && linalg::rank(&rows) == l0.codim {
                // The whole pole set spans L0 itself, which is not residual.
                continue;
            }
            if !seen.insert(f.clone()) {
                continue;
            }
            let defs: Vec<usize> = f.iter().map(|&i| poles[i]).collect();
            if let Ok(m) = pole_space(d, &defs) {
                if &m.center == c && is_residual(d, &m) {
                    return true;
                }
            }
            stack.push(f);
        }
    }
    false
}

fn perp_coroots(d: &RootDatum, l0: &PoleSpace) -> Vec<usize> {
    let cv = |c: usize| -> Vector { d.coroots[c].iter().map(|x| Q::from_integer(*x)).collect() };
    (0..d.npos)
        .filter(|&a| {
            let va = d.coroot_vector(a);
            l0.constant.iter().all(|&b| linalg::dot(&cv(b), &va).is_zero())
        })
        .collect()
}

fn sq_dist(d: &RootDatum, a: &[Q], b: &[Q]) -> Q {
    let diff: Vector = a.iter().zip(b).map(|(x, y)| *x - *y).collect();
    d.inner(&diff, &diff)
}

struct PhaseState {
    rows: Vec<StdRow>,
    keys: HashMap<CanonKey, (usize, WeylElement)>,
}

/// Runs phase `k`: fills `std[k]` and, for `k < rank`, `gen[k + 1]`.
pub fn casc_phase(db: &mut CascadeDB, k: usize, d: &RootDatum) -> Result<(), Error> {
    if db.gen.len() <= k {
        return Err(Error::MissingPhase(k));
    }
    let first_gen: Vec<GenRow> = if k < d.rank {
        first_generation(d).into_iter().filter(|r| r.space.codim == k + 1).collect()
    } else {
        Vec::new()
    };
    let mut nex = first_gen;
    let mut st = PhaseState { rows: Vec::new(), keys: HashMap::new() };
    let nrows = db.gen[k].len();
    for i in 0..nrows {
        let row = db.gen[k][i].clone();
        let l = &row.space;
        let p_l = &row.initial;
        let (key, x_l) = wprime_canon(d, l);
        if let Some((ri, x_row)) = st.keys.get(&key).cloned() {
            let std = &st.rows[ri];
            let g = &std.ws[0];
            let u = d.mul(&d.inverse(&x_row), &x_l);
            let w = d.mul(&d.inverse(&u), g);
            let winv = d.inverse(&w);
            let p0 = p_l.transform(d, &winv);
            let (seg, q_l) = if std.sub {
                ((p0, Point::at(std.l0.center.clone())), Point::at(l.center.clone()))
            } else {
                if p0.is_formal() {
                    return Err(Error::FormalSegment);
                }
                let q0 = std
                    .segments
                    .iter()
                    .map(|s| &s.0)
                    .filter(|q| !q.is_formal())
                    .min_by(|a, b| {
                        sq_dist(d, &p0.finite, &a.finite)
                            .cmp(&sq_dist(d, &p0.finite, &b.finite))
                            .then_with(|| a.cmp(b))
                    })
                    .cloned()
                    .ok_or(Error::FormalSegment)?;
                let ql = q0.transform(d, &w);
                ((p0, q0), ql)
            };
            if !std.segments.contains(&seg) {
                let cr = poles_crossed(d, &row, Some(i), p_l, &q_l)?;
                st.rows[ri].parallel |= !cr.parallel.is_empty() && seg.0 != seg.1;
                nex.extend(cr.rows);
            }
            let std = &mut st.rows[ri];
            std.ws.push(w);
            std.segments.push(seg);
            std.pole_sets.push(l.pole_set.clone());
            db.gen[k][i].segment_end = Some(q_l);
        } else {
            let sd = std_data(l, d);
            let sub = sub_tag(d, &sd.l0);
            let winv = d.inverse(&sd.w);
            let p0 = p_l.transform(d, &winv);
            let (seg, q_l, parallel) = if sub {
                let q_l = Point::at(l.center.clone());
                let cr = poles_crossed(d, &row, Some(i), p_l, &q_l)?;
                let par = !cr.parallel.is_empty() && *p_l != q_l;
                nex.extend(cr.rows);
                ((p0, Point::at(sd.l0.center.clone())), q_l, par)
            } else {
                ((p0.clone(), p0), p_l.clone(), false)
            };
            let std = StdRow {
                order: omega_order(d, &sd.l0),
                perp: perp_coroots(d, &sd.l0),
                l0: sd.l0,
                ws: vec![sd.w],
                segments: vec![seg],
                sub,
                nodes: sd.nodes,
                gamma: sd.gamma,
                parallel,
                pole_sets: vec![l.pole_set.clone()],
            };
            st.keys.insert(key, (st.rows.len(), x_l));
            st.rows.push(std);
            db.gen[k][i].segment_end = Some(q_l);
        }
    }
    while db.std.len() <= k {
        db.std.push(Vec::new());
    }
    db.std[k] = st.rows;
    if k < d.rank {
        while db.gen.len() <= k + 1 {
            db.gen.push(Vec::new());
        }
        db.gen[k + 1] = nex;
    }
    Ok(())
}

/// Builds the whole cascade, phases `0..=rank`.
pub fn run_cascade(d: &RootDatum) -> Result<CascadeDB, Error> {
    let mut db = CascadeDB { gen: vec![init_gen0(d)], std: Vec::new() };
    for k in 0..=d.rank {
        casc_phase(&mut db, k, d)?;
    }
    Ok(db)
}

#[derive(Clone, Debug, Default)]
pub struct CascadeReport {
    pub checks: Vec<(String, bool)>,
    pub failures: Vec<String>,
}

impl CascadeReport {
    pub fn ok(&self) -> bool {
        self.failures.is_empty() && self.checks.iter().all(|c| c.1)
    }
    fn record(&mut self, name: &str, fails: Vec<String>) {
        self.checks.push((name.to_string(), fails.is_empty()));
        self.failures.extend(fails.into_iter().map(|f| format!("{name}: {f}")));
    }
}

/// Checks the cascade axioms on a finished database.
pub fn verify_cascade(db: &CascadeDB, d: &RootDatum) -> CascadeReport {
    let mut rep = CascadeReport::default();

    // First-generation segments.
    let mut fails = Vec::new();
    let fg = first_generation(d);
    for r in &fg {
        let k = r.space.codim;
        let found = db.gen.get(k).is_some_and(|g| {
            g.iter().any(|x| x.rl.is_empty() && x.jprime == r.jprime && x.gprime == r.gprime && x.space.pole_set == r.space.pole_set)
        });
        let std_ok = db.std.get(k).is_some_and(|s| {
            s.iter().any(|x| {
                x.ws.iter().zip(&x.segments).any(|(w, seg)| {
                    w.is_identity() && seg.0 == r.initial && seg.1 == Point::at(r.space.center.clone())
                })
            })
        });
        if !found || !std_ok {
            fails.push(format!("missing first-generation segment for J'={:?}", r.jprime));
        }
    }
    if db.gen.first().map(|g| g.len()) != Some(1) {
        fails.push("phase 0 must have exactly one row".into());
    }
    rep.record("first-generation", fails);

    // Codimension and flag bookkeeping.
    let mut fails = Vec::new();
    for (k, g) in db.gen.iter().enumerate() {
        for (i, r) in g.iter().enumerate() {
            if r.space.codim != k {
                fails.push(format!("gen[{k}][{i}] has codim {}", r.space.codim));
            }
            if !r.space.contains(d, &r.initial.finite) {
                fails.push(format!("gen[{k}][{i}] initial point off the space"));
            }
            if !r.rl.is_empty() {
                let Some(pi) = r.parent else {
                    fails.push(format!("gen[{k}][{i}] has no parent"));
                    continue;
                };
                let par = &db.gen[k - 1][pi];
                if par.rl[..] != r.rl[..r.rl.len() - 1] || par.jprime != r.jprime || par.gprime != r.gprime {
                    fails.push(format!("gen[{k}][{i}] flag does not extend its parent"));
                }
                if !par.space.pole_set.iter().all(|c| r.space.pole_set.contains(c)) {
                    fails.push(format!("gen[{k}][{i}] not contained in parent"));
                }
            }
        }
    }
    rep.record("flags", fails);

    // Every non-first-generation segment has a parent segment through its initial point.
    let mut fails = Vec::new();
    for (k, g) in db.gen.iter().enumerate() {
        for (i, r) in g.iter().enumerate() {
            let Some(pi) = r.parent else { continue };
            let par = &db.gen[k - 1][pi];
            let Some(end) = &par.segment_end else {
                fails.push(format!("parent of gen[{k}][{i}] never shifted"));
                continue;
            };
            if !on_segment(d, &par.initial, end, &r.initial.finite) {
                fails.push(format!("gen[{k}][{i}] initial point not on the parent segment"));
            }
        }
    }
    rep.record("parents", fails);

    // Closure: each crossing of each segment appears as a row, up to W'.
    let mut fails = Vec::new();
    let mut pair_keys: Vec<BTreeSet<(Vector, Vec<usize>)>> = vec![BTreeSet::new(); db.gen.len() + 1];
    for (k, g) in db.gen.iter().enumerate() {
        for r in g {
            if !r.initial.is_formal() {
                pair_keys[k].insert(wprime_canon_pair(d, &r.space, &r.initial.finite));
            }
        }
    }
    for (k, rows) in db.std.iter().enumerate() {
        for (si, s) in rows.iter().enumerate() {
            for (w, seg) in s.ws.iter().zip(&s.segments) {
                let l = s.l0.transform(d, w);
                let p = seg.0.transform(d, w);
                let q = seg.1.transform(d, w);
                let probe = make_row(d, normalize(d, &l), p.clone(), Vec::new(), Vec::new(), Vec::new(), None);
                let Ok(cr) = poles_crossed(d, &probe, None, &p, &q) else {
                    fails.push(format!("std[{k}][{si}] segment could not be scanned"));
                    continue;
                };
                for m in cr.rows {
                    let key = wprime_canon_pair(d, &m.space, &m.initial.finite);
                    if !pair_keys.get(k + 1).is_some_and(|s| s.contains(&key)) {
                        fails.push(format!("crossing of std[{k}][{si}] at {:?} missing", m.initial.finite));
                    }
                }
            }
        }
    }
    rep.record("closure", fails);

    // Termination at centers and connectivity of the trees T_M.
    let mut fails = Vec::new();
    let mut tree_fails = Vec::new();
    for (k, rows) in db.std.iter().enumerate() {
        for (si, s) in rows.iter().enumerate() {
            let c = Point::at(s.l0.center.clone());
            let starts: Vec<&Point> = s.segments.iter().map(|x| &x.0).collect();
            for seg in &s.segments {
                let good = if s.sub { seg.1 == c } else { starts.contains(&&seg.1) };
                if !good {
                    fails.push(format!("std[{k}][{si}] segment ends at neither center nor an initial point"));
                }
            }
            if !tree_connected(&s.segments) {
                tree_fails.push(format!("std[{k}][{si}] tree not connected"));
            }
            if s.sub && !s.segments.iter().any(|x| x.1 == c) {
                tree_fails.push(format!("std[{k}][{si}] tree misses the center"));
            }
        }
    }
    rep.record("termination", fails);
    rep.record("trees", tree_fails);

    // Omega-order weakly increases along flags.
    let mut fails = Vec::new();
    for (k, g) in db.gen.iter().enumerate() {
        for (i, r) in g.iter().enumerate() {
            if let Some(pi) = r.parent {
                if db.gen[k - 1][pi].order > r.order {
                    fails.push(format!("order drops at gen[{k}][{i}]"));
                }
            }
        }
    }
    rep.record("order-monotone", fails);

    // Every row was processed and recorded.
    let mut fails = Vec::new();
    for (k, g) in db.gen.iter().enumerate() {
        let recorded: usize = db.std.get(k).map(|s| s.iter().map(|x| x.ws.len()).sum()).unwrap_or(0);
        if recorded != g.len() || g.iter().any(|r| r.segment_end.is_none()) {
            fails.push(format!("phase {k}: {} rows, {} recorded", g.len(), recorded));
        }
    }
    rep.record("coverage", fails);
    rep
}

fn on_segment(d: &RootDatum, p: &Point, q: &Point, x: &[Q]) -> bool {
    let _ = d;
    match &p.inf {
        Some(dir) => {
            // x = finite + t dir with t >= 0
            let diff: Vector = x.iter().zip(&p.finite).map(|(a, b)| *a - *b).collect();
            let Some(k) = dir.iter().position(|v| !v.is_zero()) else { return false };
            let t = diff[k] / dir[k];
            !t.is_negative() && diff.iter().zip(dir).all(|(a, b)| *a == *b * t) && q.finite == p.finite
        }
        None => {
            let dq: Vector = q.finite.iter().zip(&p.finite).map(|(a, b)| *a - *b).collect();
            let dx: Vector = x.iter().zip(&p.finite).map(|(a, b)| *a - *b).collect();
            let Some(k) = dq.iter().position(|v| !v.is_zero()) else { return dx.iter().all(|v| v.is_zero()) };
            let s = dx[k] / dq[k];
            s >= Q::zero() && s <= Q::one() && dx.iter().zip(&dq).all(|(a, b)| *a == *b * s)
        }
    }
}

fn tree_connected(segs: &[(Point, Point)]) -> bool {
    let mut ids: BTreeMap<&Point, usize> = BTreeMap::new();
    for (a, b) in segs {
        let n = ids.len();
        ids.entry(a).or_insert(n);
        let n = ids.len();
        ids.entry(b).or_insert(n);
    }
    let mut parent: Vec<usize> = (0..ids.len()).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        p[x] = r;
        r
    }
    for (a, b) in segs {
        let (x, y) = (find(&mut parent, ids[a]), find(&mut parent, ids[b]));
        parent[x] = y;
    }
    let roots: BTreeSet<usize> = (0..ids.len()).map(|i| find(&mut parent, i)).collect();
    roots.len() <= 1
}

/// `W'`-orbits of spaces of positive Ω-order met by a segment away from their center.
pub fn positive_order_off_center(db: &CascadeDB, d: &RootDatum) -> Vec<CanonKey> {
    let mut out: BTreeSet<CanonKey> = BTreeSet::new();
    for g in &db.gen {
        for r in g {
            if r.order > 0 && r.initial != Point::at(r.space.center.clone()) {
                out.insert(wprime_canon(d, &r.space).0);
            }
        }
    }
    out.into_iter().collect()
}

/// Properties of classical cascades: late segments and non-residual
/// segments sit at centers, early spaces have order 0 and positive poles.
#[derive(Clone, Debug, Default)]
pub struct ClassicalCheck {
    pub late_points_at_centers: bool,
    pub early_order_zero: bool,
    pub nonresidual_at_centers: bool,
    pub early_poles_positive: bool,
    pub witnesses: Vec<String>,
}

pub fn check_classical(db: &CascadeDB, d: &RootDatum) -> ClassicalCheck {
    let mut out = ClassicalCheck {
        late_points_at_centers: true,
        early_order_zero: true,
        nonresidual_at_centers: true,
        early_poles_positive: true,
        witnesses: Vec::new(),
    };
    for (k, g) in db.gen.iter().enumerate() {
        for (i, r) in g.iter().enumerate() {
            let c = Point::at(r.space.center.clone());
            let at_center = r.initial == c && r.segment_end.as_ref() == Some(&c);
            if r.generation() >= 3 && !at_center {
                out.late_points_at_centers = false;
                out.witnesses.push(format!("(i) gen[{k}][{i}]"));
            }
            if r.generation() <= 2 && r.order != 0 {
                out.early_order_zero = false;
                out.witnesses.push(format!("(ii) gen[{k}][{i}]"));
            }
            if !is_residual(d, &r.space) && !at_center {
                out.nonresidual_at_centers = false;
                out.witnesses.push(format!("(iii) gen[{k}][{i}]"));
            }
            if r.generation() <= 2 && r.space.pole_set.iter().any(|&p| !d.is_pos(p)) {
                out.early_poles_positive = false;
                out.witnesses.push(format!("(iv) gen[{k}][{i}]"));
            }
        }
    }
    out
}

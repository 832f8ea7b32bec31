//! The special line of type E7(a4) in E8 (Levi E7): pole data, the coset
//! classification of Weyl elements, harmonic images and the vanishing of the
//! constants `E(h, S(-w), e)`.

use crate::linalg;
use crate::polespaces::{affine_space, is_residual, omega_order, PoleSpace};
use crate::rootsys::{minimal_coset_reps, minimal_coset_reps_within, CosetSide, RootDatum, Vector, WeylElement};
use crate::{build_root_datum, Error, RootType, Q};
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::sync::{Arc, RwLock};

/// Positive coroots identically 1 on `L0`, as columns (simple-coroot coordinates).
pub const P_L0_MATRIX: [[i64; 17]; 8] = [
    [1, 0, 0, 1, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
    [0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 0, 0, 1, 1, 0, 1],
    [0, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 0, 0, 1, 0, 1, 1],
    [0, 1, 0, 0, 1, 1, 1, 0, 1, 1, 1, 1, 0, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 1, 0, 0, 1, 1, 1, 1, 1, 1, 1, 1],
    [0, 0, 0, 0, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 1, 1],
    [0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0, 1, 0, 0, 0, 0],
    [0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0],
];

/// Positive coroots with value `x + 4` at `lambda_x`.
pub const R_X4_MATRIX: [[i64; 7]; 8] = [
    [1, 1, 1, 1, 1, 0, 1],
    [1, 1, 1, 1, 1, 1, 1],
    [1, 2, 1, 2, 1, 1, 2],
    [2, 2, 2, 2, 2, 2, 2],
    [1, 1, 2, 2, 2, 2, 2],
    [1, 1, 1, 1, 2, 2, 2],
    [1, 1, 1, 1, 1, 2, 1],
    [1, 1, 1, 1, 1, 1, 1],
];

/// Positive coroots with value `x + 5` at `lambda_x`.
pub const R_X5_MATRIX: [[i64; 8]; 8] = [
    [1, 1, 1, 1, 1, 1, 1, 1],
    [1, 1, 2, 1, 1, 2, 1, 2],
    [2, 1, 2, 2, 2, 2, 2, 2],
    [3, 2, 3, 3, 2, 3, 3, 3],
    [2, 2, 2, 2, 2, 2, 3, 3],
    [1, 2, 1, 2, 2, 2, 2, 2],
    [1, 2, 1, 1, 2, 1, 1, 1],
    [1, 1, 1, 1, 1, 1, 1, 1],
];

/// Simple roots orthogonal to `L0` (0-based: alpha_2, alpha_3, alpha_5, alpha_6).
pub const F0: [usize; 4] = [1, 2, 4, 5];
/// Simple roots vanishing on `N` (alpha_2, alpha_3, alpha_5).
pub const Z_N: [usize; 3] = [1, 2, 4];
const E6: [usize; 6] = [0, 1, 2, 3, 4, 5];
const E7: [usize; 7] = [0, 1, 2, 3, 4, 5, 6];
/// Number of polynomial variables: `n0` followed by the roots of `F0`.
pub const NVARS: usize = 5;
pub const MAX_DEGREE: usize = 6;

pub fn columns<const R: usize, const C: usize>(m: &[[i64; C]; R]) -> Vec<Vec<i64>> {
    (0..C).map(|j| (0..R).map(|i| m[i][j]).collect()).collect()
}

fn q(n: i64) -> Q {
    Q::from_integer(n)
}

fn qv(v: &[i64]) -> Vector {
    v.iter().map(|x| q(*x)).collect()
}

// Polynomials in the variables y_0..y_4, standing for n0, alpha_2, alpha_3, alpha_5, alpha_6.

pub type Monomial = [u8; NVARS];

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Poly {
    pub terms: BTreeMap<Monomial, Q>,
}

impl Poly {
    pub fn zero() -> Poly {
        Poly::default()
    }
    pub fn constant(c: Q) -> Poly {
        let mut p = Poly::zero();
        p.add_term([0; NVARS], c);
        p
    }
    pub fn var(k: usize) -> Poly {
        let mut m = [0; NVARS];
        m[k] = 1;
        let mut p = Poly::zero();
        p.add_term(m, Q::one());
        p
    }
    /// The linear form `sum_k c_k y_k`.
    pub fn linear(c: &[Q]) -> Poly {
        let mut p = Poly::zero();
        for (k, ck) in c.iter().enumerate() {
            let mut m = [0; NVARS];
            m[k] = 1;
            p.add_term(m, *ck);
        }
        p
    }
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }
    pub fn add_term(&mut self, m: Monomial, c: Q) {
        if c.is_zero() {
            return;
        }
        let e = self.terms.entry(m).or_insert_with(Q::zero);
        *e += c;
        if e.is_zero() {
            self.terms.remove(&m);
        }
    }
    pub fn add(&self, o: &Poly) -> Poly {
        let mut r = self.clone();
        for (m, c) in &o.terms {
            r.add_term(*m, *c);
        }
        r
    }
    pub fn scale(&self, s: Q) -> Poly {
        if s.is_zero() {
            return Poly::zero();
        }
        Poly { terms: self.terms.iter().map(|(m, c)| (*m, *c * s)).collect() }
    }
    pub fn mul(&self, o: &Poly) -> Poly {
        let mut r = Poly::zero();
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                let mut m = [0; NVARS];
                for k in 0..NVARS {
                    m[k] = a[k] + b[k];
                }
                r.add_term(m, *ca * *cb);
            }
        }
        r
    }
    pub fn partial(&self, k: usize) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            if m[k] > 0 {
                let mut n = *m;
                n[k] -= 1;
                r.add_term(n, *c * q(m[k] as i64));
            }
        }
        r
    }
    /// Derivation `sum_k c_k d/dy_k`.
    pub fn derive(&self, c: &[Q]) -> Poly {
        let mut r = Poly::zero();
        for (k, ck) in c.iter().enumerate() {
            if !ck.is_zero() {
                r = r.add(&self.partial(k).scale(*ck));
            }
        }
        r
    }
    /// Substitutes `y_k -> images[k]`.
    pub fn substitute(&self, images: &[Poly]) -> Poly {
        let mut r = Poly::zero();
        for (m, c) in &self.terms {
            let mut t = Poly::constant(*c);
            for k in 0..NVARS {
                for _ in 0..m[k] {
                    t = t.mul(&images[k]);
                }
            }
            r = r.add(&t);
        }
        r
    }
    pub fn degree(&self) -> Option<usize> {
        self.terms.keys().map(|m| m.iter().map(|x| *x as usize).sum()).max()
    }
}

impl std::fmt::Display for Poly {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Vec<String> = (0..NVARS)
                    .filter(|&k| m[k] > 0)
                    .map(|k| if m[k] == 1 { format!("y{k}") } else { format!("y{k}^{}", m[k]) })
                    .collect();
                if mono.is_empty() { c.to_string() } else { format!("{c}*{}", mono.join("*")) }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

/// Echelon basis of the span of `polys`.
pub fn span_basis(polys: &[Poly]) -> Vec<Poly> {
    let monos: BTreeSet<Monomial> = polys.iter().flat_map(|p| p.terms.keys().copied()).collect();
    let monos: Vec<Monomial> = monos.into_iter().rev().collect();
    if monos.is_empty() {
        return Vec::new();
    }
    let mut rows: Vec<Vec<Q>> = polys
        .iter()
        .map(|p| monos.iter().map(|m| p.terms.get(m).copied().unwrap_or_else(Q::zero)).collect())
        .collect();
    let piv = linalg::rref(&mut rows);
    rows.truncate(piv.len());
    rows.into_iter()
        .map(|r| {
            let mut p = Poly::zero();
            for (m, c) in monos.iter().zip(r) {
                p.add_term(*m, c);
            }
            p
        })
        .collect()
}

// Context.

/// Element of the Weyl group of `F0`: its permutation of coroot ids and its
/// matrix on the polynomial variables (`images[k]` is the image of `y_k`).
#[derive(Clone, Debug)]
pub struct F0Element {
    pub perm: Vec<usize>,
    pub images: Vec<Poly>,
}

#[derive(Clone, Debug)]
pub struct SpecialContext {
    pub datum: RootDatum,
    /// `d(L0) = L_sp`.
    pub d: WeylElement,
    pub l0: PoleSpace,
    pub n0: PoleSpace,
    pub l_sp: PoleSpace,
    pub n: PoleSpace,
    pub f0: Vec<usize>,
    /// Normal of `L0` in `N0`, and its `W_F0` average; simple-root coordinates.
    pub normal: Vector,
    pub normal0: Vector,
    /// `lambda_x = lambda_base + x * lambda_dir`, fundamental-weight coordinates.
    pub lambda_base: Vector,
    pub lambda_dir: Vector,
    pub p_l0: Vec<usize>,
    pub r_x4: Vec<usize>,
    pub r_x5: Vec<usize>,
    pub p_n: Vec<usize>,
    pub center_n: Vector,
    pub p_nl: Vector,
    pub wf0: Vec<F0Element>,
    /// Variable vectors `n0, alpha_2, alpha_3, alpha_5, alpha_6` in simple-root coordinates.
    pub basis: Vec<Vector>,
    /// `pairing[c][k] = (b_k, coroot c)`.
    pub pairing: Vec<Vec<Q>>,
    /// Basis of the extended harmonic space by degree.
    pub harmonic_plus: Vec<Vec<Poly>>,
    pub harmonic: Vec<Vec<Poly>>,
}

fn root_inner(d: &RootDatum, u: &[Q], v: &[Q]) -> Q {
    let n = d.rank;
    let mut s = Q::zero();
    for i in 0..n {
        if u[i].is_zero() {
            continue;
        }
        for j in 0..n {
            s += u[i] * v[j] * d.cartan[i][j];
        }
    }
    s
}

/// `s_i(v) = v - (v, alpha_i) alpha_i` on simple-root coordinates (simply laced).
fn reflect(d: &RootDatum, i: usize, v: &[Q]) -> Vector {
    let p: Q = (0..d.rank).fold(Q::zero(), |acc, j| acc + v[j] * d.cartan[i][j]);
    let mut r = v.to_vec();
    r[i] -= p;
    r
}

fn group_elements(d: &RootDatum, nodes: &[usize]) -> Vec<Vec<Vector>> {
    // Each element is stored as the images of the simple roots (columns).
    let n = d.rank;
    let id: Vec<Vector> = (0..n).map(|i| qv(&unit(n, i))).collect();
    let mut seen: HashSet<Vec<Vector>> = HashSet::new();
    seen.insert(id.clone());
    let mut out = vec![id];
    let mut head = 0;
    while head < out.len() {
        let g = out[head].clone();
        head += 1;
        for &i in nodes {
            let h: Vec<Vector> = g.iter().map(|v| reflect(d, i, v)).collect();
            if seen.insert(h.clone()) {
                out.push(h);
            }
        }
    }
    out
}

fn unit(n: usize, i: usize) -> Vec<i64> {
    let mut e = vec![0; n];
    e[i] = 1;
    e
}

fn apply_cols(cols: &[Vector], v: &[Q]) -> Vector {
    let n = v.len();
    let mut r = vec![Q::zero(); n];
    for (j, c) in cols.iter().enumerate() {
        if v[j].is_zero() {
            continue;
        }
        for i in 0..n {
            r[i] += v[j] * c[i];
        }
    }
    r
}

fn to_fw(d: &RootDatum, root: &[Q]) -> Vector {
    (0..d.rank).map(|i| (0..d.rank).fold(Q::zero(), |acc, j| acc + root[j] * d.cartan[i][j])).collect()
}

fn coroot_set(d: &RootDatum, cols: &[Vec<i64>]) -> Result<Vec<usize>, Error> {
    let mut v: Vec<usize> = cols
        .iter()
        .map(|c| d.coroot_id(c).ok_or(Error::SpecialData("matrix column is not a coroot")))
        .collect::<Result<_, _>>()?;
    v.sort();
    Ok(v)
}

fn harmonic_spaces() -> (Vec<Vec<Poly>>, Vec<Vec<Poly>>) {
    // Product of the positive roots of F0: a2 * a3 * a5 * a6 * (a5 + a6).
    let mut pi = Poly::var(1).mul(&Poly::var(2)).mul(&Poly::var(3)).mul(&Poly::var(4));
    pi = pi.mul(&Poly::var(3).add(&Poly::var(4)));
    let top = pi.degree().unwrap();
    let mut h: Vec<Vec<Poly>> = vec![Vec::new(); MAX_DEGREE + 1];
    h[top] = vec![pi];
    for deg in (0..top).rev() {
        let mut span = Vec::new();
        for p in &h[deg + 1] {
            for k in 1..NVARS {
                let dp = p.partial(k);
                if !dp.is_zero() {
                    span.push(dp);
                }
            }
        }
        h[deg] = span_basis(&span);
    }
    let y0 = Poly::var(0);
    let mut hp: Vec<Vec<Poly>> = vec![Vec::new(); MAX_DEGREE + 1];
    for deg in 0..=MAX_DEGREE {
        let mut v = h[deg].clone();
        if deg > 0 {
            v.extend(h[deg - 1].iter().map(|p| y0.mul(p)));
        }
        hp[deg] = span_basis(&v);
    }
    (h, hp)
}

pub fn build_special_context() -> Result<SpecialContext, Error> {
    let d = build_root_datum(RootType::E, 8, 8)?;
    let n = d.rank;
    let sc = |i: usize| d.simple_coroot(i);
    let lambda_base = qv(&[1, 0, 0, 1, 0, 0, 1, 0]);
    let lambda_dir = qv(&unit(8, 7));
    let l0 = affine_space(&d, &(0..7).map(|i| (sc(i), lambda_base[i])).collect::<Vec<_>>())?;
    let nsp = affine_space(&d, &[1, 0, 0, 1, 0, 1].iter().enumerate().map(|(i, v)| (sc(i), q(*v))).collect::<Vec<_>>())?;
    let dw = d.from_word(&[7, 6]);
    let l_sp = l0.transform(&d, &dw);
    let n0 = nsp.transform(&d, &d.inverse(&dw));
    let bad = |m: &'static str| Err(Error::SpecialData(m));

    let x = q(-7);
    let lx: Vector = lambda_base.iter().zip(&lambda_dir).map(|(a, b)| *a + x * *b).collect();
    let dlx = d.act(&dw, &lx);
    if dlx != qv(&[1, 0, 0, 1, 0, 1, -7, 6]) || !l_sp.contains(&d, &dlx) {
        return bad("d(lambda_x) is not the general point of L_sp");
    }
    let half = |a: i64| Q::new(a, 2);
    let expect_cl = vec![q(1), q(0), q(0), q(1), q(0), q(1), half(-11), half(9)];
    if l_sp.center != expect_cl {
        return bad("center of L_sp");
    }
    if nsp.center != qv(&[1, 0, 0, 1, 0, 1, -4, 0]) {
        return bad("center of N");
    }
    // The initial ray of N meets L_sp.
    let probe = l_sp
        .constant
        .iter()
        .copied()
        .find(|&c| d.coroots[c][7] != 0)
        .ok_or(Error::SpecialData("L_sp is constant along w8"))?;
    let t = (d.eval(probe, &l_sp.center) - d.eval(probe, &nsp.center)) / q(d.coroots[probe][7]);
    let mut p_nl = nsp.center.clone();
    p_nl[7] += t;
    if !l_sp.contains(&d, &p_nl) || p_nl != qv(&[1, 0, 0, 1, 0, 1, -4, 3]) {
        return bad("intersection of the initial ray of N with L_sp");
    }
    if !is_residual(&d, &l_sp) || !is_residual(&d, &nsp) || omega_order(&d, &l_sp) != 1 || omega_order(&d, &nsp) != 0 {
        return bad("residuality or orders of L_sp and N");
    }
    let dir_sp: Vector = l_sp.dir_basis[0].clone();
    let shifted: Vector = l_sp.center.iter().zip(&dir_sp).map(|(a, b)| *a + *b).collect();
    if !nsp.contains(&d, &l_sp.center) || !nsp.contains(&d, &shifted) {
        return bad("L_sp is not contained in N");
    }

    // Normal vector and its W_F0 average.
    let high = &d.positive_roots[d.highest_coroot()];
    let mut normal = qv(high);
    normal[6] -= q(2);
    normal[7] -= q(2);
    // Fundamental weight of {alpha_5, alpha_6} dual to alpha_6.
    let mut omega = vec![Q::zero(); n];
    omega[4] = Q::new(1, 3);
    omega[5] = Q::new(2, 3);
    let normal0: Vector = normal.iter().zip(&omega).map(|(a, b)| *a - q(2) * *b).collect();
    let wf0_cols = group_elements(&d, &F0);
    if wf0_cols.len() != 24 {
        return bad("order of W_F0");
    }
    let mut avg = vec![Q::zero(); n];
    for g in &wf0_cols {
        for (a, b) in avg.iter_mut().zip(apply_cols(g, &normal)) {
            *a += b;
        }
    }
    let avg: Vector = avg.iter().map(|a| *a / q(24)).collect();
    if avg != normal0 {
        return bad("W_F0 average of the normal");
    }
    let nfw = to_fw(&d, &normal);
    let moved: Vector = l0.center.iter().zip(&nfw).map(|(a, b)| *a + *b).collect();
    // (normal, w8) is the alpha_8 coefficient.
    if !n0.contains(&d, &moved) || !normal[7].is_zero() {
        return bad("normal of L0 in N0");
    }

    // Pole data.
    let p_l0: Vec<usize> = l0.pole_set.clone();
    let scan = |k: i64| -> Vec<usize> {
        (0..d.npos)
            .filter(|&c| d.eval(c, &lambda_dir) == Q::one() && d.eval(c, &lambda_base) == q(k))
            .collect()
    };
    let r_x4 = scan(4);
    let r_x5 = scan(5);
    if p_l0 != coroot_set(&d, &columns(&P_L0_MATRIX))?
        || r_x4 != coroot_set(&d, &columns(&R_X4_MATRIX))?
        || r_x5 != coroot_set(&d, &columns(&R_X5_MATRIX))?
    {
        return bad("pole matrices");
    }
    let p_n: Vec<usize> = nsp.pole_set.iter().copied().filter(|&c| d.is_pos(c)).collect();

    let mut basis = vec![normal0.clone()];
    basis.extend(F0.iter().map(|&i| qv(&unit(8, i))));
    let pairing: Vec<Vec<Q>> = (0..d.ncoroots())
        .map(|c| {
            let cv = qv(&d.coroots[c]);
            basis.iter().map(|b| root_inner(&d, b, &cv)).collect()
        })
        .collect();
    let wf0 = wf0_cols
        .iter()
        .map(|g| {
            let perm = (0..d.ncoroots())
                .map(|c| {
                    let img = apply_cols(g, &qv(&d.coroots[c]));
                    let iv: Vec<i64> = img.iter().map(|x| x.to_integer()).collect();
                    d.coroot_id(&iv).unwrap()
                })
                .collect();
            let mut images = vec![Poly::var(0)];
            for &i in &F0 {
                let img = &g[i];
                let coeffs: Vec<Q> = std::iter::once(Q::zero()).chain(F0.iter().map(|&j| img[j])).collect();
                images.push(Poly::linear(&coeffs));
            }
            F0Element { perm, images }
        })
        .collect();
    let (harmonic, harmonic_plus) = harmonic_spaces();
    Ok(SpecialContext {
        datum: d,
        d: dw,
        l0,
        n0,
        l_sp,
        n: nsp.clone(),
        f0: F0.to_vec(),
        normal,
        normal0,
        lambda_base,
        lambda_dir,
        p_l0,
        r_x4,
        r_x5,
        p_n,
        center_n: nsp.center.clone(),
        p_nl,
        wf0,
        basis,
        pairing,
        harmonic_plus,
        harmonic,
    })
}

// Sets attached to a Weyl element.

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SSet {
    /// `R_{x+5}(-w)`, sign `+1`.
    pub plus: Vec<usize>,
    /// `R_{x+4}(-w)`, sign `-1`.
    pub minus: Vec<usize>,
}

impl SSet {
    pub fn n_w(&self) -> i64 {
        self.plus.len() as i64 - self.minus.len() as i64
    }
    /// Members in canonical order with their `delta` marker.
    pub fn members(&self) -> Vec<(usize, bool)> {
        let mut v: Vec<(usize, bool)> = self.plus.iter().map(|&c| (c, false)).chain(self.minus.iter().map(|&c| (c, true))).collect();
        v.sort();
        v
    }
}

/// `S(-w)`: the coroots of `R_{x+5}` and `R_{x+4}` that `w` keeps positive.
pub fn s_sets(ctx: &SpecialContext, w: &WeylElement) -> SSet {
    let d = &ctx.datum;
    let keep = |v: &[usize]| v.iter().copied().filter(|&c| d.is_pos(d.act_coroot(w, c))).collect();
    SSet { plus: keep(&ctx.r_x5), minus: keep(&ctx.r_x4) }
}

/// `P_L0(w)`: poles of `L0` inverted by `w`.
pub fn p_l0_of(ctx: &SpecialContext, w: &WeylElement) -> Vec<usize> {
    let d = &ctx.datum;
    ctx.p_l0.iter().copied().filter(|&c| !d.is_pos(d.act_coroot(w, c))).collect()
}

// Coset classification.

#[derive(Clone, Debug)]
pub struct CosetTables {
    /// `u` minimal in `u W_Z` inside `W(E6)` with `|P_N(u)| <= 3`, and that count.
    pub u: Vec<(WeylElement, usize)>,
    pub u_counts: [usize; 4],
    /// Minimal representatives of `W(E7)/W(E6)` and `W(E8)/W(E7)`.
    pub tau: Vec<WeylElement>,
    pub eta: Vec<WeylElement>,
    /// Coroot permutations of the elements above.
    pub u_perm: Vec<Vec<u16>>,
    pub tau_perm: Vec<Vec<u16>>,
    pub eta_perm: Vec<Vec<u16>>,
    /// Whether every representative has inversion set of size its length.
    pub minimal_ok: bool,
    /// Whether the coroot-orbit construction of `W(E8)/W(E7)` agrees with the search.
    pub eta_routes_agree: bool,
}

impl CosetTables {
    pub fn ntriples(&self) -> usize {
        self.u.len() * self.tau.len() * self.eta.len()
    }
    /// Triple index `(eta, tau, u)` in shard-major order.
    pub fn triple(&self, idx: usize) -> (usize, usize, usize) {
        let nu = self.u.len();
        let nt = self.tau.len();
        (idx / (nu * nt), (idx / nu) % nt, idx % nu)
    }
    pub fn element(&self, d: &RootDatum, idx: usize) -> WeylElement {
        let (e, t, u) = self.triple(idx);
        d.mul(&self.eta[e], &d.mul(&self.tau[t], &self.u[u].0))
    }
}

fn perm_of(d: &RootDatum, w: &WeylElement) -> Vec<u16> {
    (0..d.ncoroots()).map(|c| d.act_coroot(w, c) as u16).collect()
}

pub fn classify_weyl_triples(ctx: &SpecialContext) -> CosetTables {
    let d = &ctx.datum;
    let e6 = d.parabolic_elements(&E6);
    let mut u: Vec<(WeylElement, usize)> = e6
        .par_iter()
        .filter(|w| d.is_min_in_right_coset(&Z_N, w))
        .map(|w| {
            let m = ctx.p_n.iter().filter(|&&c| !d.is_pos(d.act_coroot(w, c))).count();
            (w.clone(), m)
        })
        .filter(|(_, m)| *m <= 3)
        .collect();
    u.sort_by(|a, b| (a.1, a.0.len(), &a.0.word).cmp(&(b.1, b.0.len(), &b.0.word)));
    let mut u_counts = [0; 4];
    for (_, m) in &u {
        u_counts[*m] += 1;
    }
    let mut tau = minimal_coset_reps_within(d, &E7, &E6, CosetSide::Left);
    let mut eta = minimal_coset_reps(d, &E7, CosetSide::Left);
    tau.sort_by(|a, b| (a.len(), &a.word).cmp(&(b.len(), &b.word)));
    eta.sort_by(|a, b| (a.len(), &a.word).cmp(&(b.len(), &b.word)));
    let minimal_ok = tau.iter().chain(&eta).chain(u.iter().map(|x| &x.0)).all(|w| d.inversion_set(w).len() == w.len())
        && tau.iter().all(|w| d.is_min_in_right_coset(&E6, w))
        && eta.iter().all(|w| d.is_min_in_right_coset(&E7, w));
    // eta <-> eta(highest coroot); the minimal element sending a coroot to the
    // dominant one is the inverse of its representative.
    let top = d.highest_coroot();
    let from_orbit: HashSet<WeylElement> = (0..d.ncoroots()).map(|c| d.inverse(&d.dominant_map_coroot(c).1)).collect();
    let eta_set: HashSet<WeylElement> = eta.iter().cloned().collect();
    let eta_routes_agree = from_orbit == eta_set && eta.iter().all(|w| d.coroot_id(&d.coroots[d.act_coroot(w, top)]).is_some());
    CosetTables {
        u_perm: u.iter().map(|x| perm_of(d, &x.0)).collect(),
        tau_perm: tau.iter().map(|w| perm_of(d, w)).collect(),
        eta_perm: eta.iter().map(|w| perm_of(d, w)).collect(),
        u,
        u_counts,
        tau,
        eta,
        minimal_ok,
        eta_routes_agree,
    }
}

// The constants E(Q, S, e).

/// Permanent by Ryser's inclusion-exclusion formula.
pub fn permanent(m: &[Vec<Q>]) -> Q {
    let n = m.len();
    if n == 0 {
        return Q::one();
    }
    let mut total = Q::zero();
    for mask in 1u32..(1 << n) {
        let mut prod = Q::one();
        for row in m {
            let s = (0..n).filter(|&j| mask >> j & 1 == 1).fold(Q::zero(), |acc, j| acc + row[j]);
            prod *= s;
            if prod.is_zero() {
                break;
            }
        }
        if (n - mask.count_ones() as usize) % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    total
}

fn binom(n: i64, k: i64) -> Q {
    if k < 0 || n < k {
        return Q::zero();
    }
    let mut r = Q::one();
    for i in 0..k {
        r = r * q(n - i) / q(i + 1);
    }
    r
}

/// Bipartition `(pi+, pi-)`, parts in descending order.
pub type Bipartition = (Vec<u32>, Vec<u32>);

fn compositions(total: u32, parts: usize, f: &mut impl FnMut(&[u32])) {
    fn rec(left: u32, k: usize, cur: &mut Vec<u32>, f: &mut impl FnMut(&[u32])) {
        if k == 1 {
            cur.push(left);
            f(cur);
            cur.pop();
            return;
        }
        for a in 0..=left {
            cur.push(a);
            rec(left - a, k - 1, cur, f);
            cur.pop();
        }
    }
    if parts == 0 {
        if total == 0 {
            f(&[]);
        }
        return;
    }
    rec(total, parts, &mut Vec::new(), f);
}

/// For each bipartition, the sum over exponent maps `d` realizing it of the
/// permanent of `(v_i, s_j)` where column `s` is repeated `d_s` times.
/// `pairing[i][j] = (v_i, s_j)`; `minus[j]` marks the members with sign `-1`.
pub fn bipartition_sums(pairing: &[Vec<Q>], minus: &[bool]) -> BTreeMap<Bipartition, Q> {
    let n = pairing.len();
    let k = minus.len();
    let mut out: BTreeMap<Bipartition, Q> = BTreeMap::new();
    compositions(n as u32, k, &mut |dm: &[u32]| {
        let mut cols: Vec<usize> = Vec::with_capacity(n);
        for (j, &c) in dm.iter().enumerate() {
            for _ in 0..c {
                cols.push(j);
            }
        }
        let m: Vec<Vec<Q>> = pairing.iter().map(|row| cols.iter().map(|&j| row[j]).collect()).collect();
        let p = permanent(&m);
        if p.is_zero() {
            return;
        }
        let mut plus: Vec<u32> = (0..k).filter(|&j| !minus[j] && dm[j] > 0).map(|j| dm[j]).collect();
        let mut neg: Vec<u32> = (0..k).filter(|&j| minus[j] && dm[j] > 0).map(|j| dm[j]).collect();
        plus.sort_by(|a, b| b.cmp(a));
        neg.sort_by(|a, b| b.cmp(a));
        *out.entry((plus, neg)).or_insert_with(Q::zero) += p;
    });
    out
}

/// Weight of a bipartition: `(-1)^|pi-| prod C(e, pi+_i) prod C(e + pi-_j - 1, pi-_j)`.
pub fn bipartition_weight(b: &Bipartition, e: u32) -> Q {
    let e = e as i64;
    if b.0.iter().any(|&p| p as i64 > e) {
        return Q::zero();
    }
    let mut w = Q::one();
    for &p in &b.0 {
        w *= binom(e, p as i64);
    }
    let mut size = 0;
    for &p in &b.1 {
        w *= binom(e + p as i64 - 1, p as i64);
        size += p;
    }
    if size % 2 == 1 {
        -w
    } else {
        w
    }
}

pub fn e_from_sums(sums: &BTreeMap<Bipartition, Q>, e: u32) -> Q {
    sums.iter().fold(Q::zero(), |acc, (b, s)| acc + bipartition_weight(b, e) * *s)
}

/// `E(Q, S, e)` for `Q = v_1* ... v_N*`, given the pairing matrix `(v_i, s_j)`.
pub fn e_value(pairing: &[Vec<Q>], minus: &[bool], e: u32) -> Q {
    e_from_sums(&bipartition_sums(pairing, minus), e)
}

/// Exponents `e > 0` that must be checked for `(N_w, N)`, and whether the
/// check certifies a polynomial identity in `e` (degree `<= N`).
pub fn e_range(n_w: i64, n: usize) -> (Vec<u32>, bool) {
    let n = n as i64;
    if n_w <= 0 {
        if n_w == 0 && n == 0 {
            return (Vec::new(), false);
        }
        return ((1..=(n as u32 + 1)).collect(), true);
    }
    ((1..).take_while(|e| (*e as i64) * n_w < n).collect(), false)
}

// Harmonic images.

/// `G_w`: elements of `W_F0` stabilizing the set `S`.
pub fn stabilizer<'a>(ctx: &'a SpecialContext, s: &SSet) -> Vec<&'a F0Element> {
    let set: BTreeSet<usize> = s.plus.iter().chain(&s.minus).copied().collect();
    ctx.wf0.iter().filter(|g| set.iter().all(|&c| set.contains(&g.perm[c]))).collect()
}

/// Basis of the degree-`n` part of `P^G(Delta(w)(H+))`.
pub fn harmonic_image_basis(ctx: &SpecialContext, p_w: &[usize], g: &[&F0Element], n: usize) -> Vec<Poly> {
    let top = n + p_w.len();
    if top > MAX_DEGREE {
        return Vec::new();
    }
    let inv = Q::new(1, g.len() as i64);
    let images: Vec<Poly> = ctx.harmonic_plus[top]
        .iter()
        .map(|h| {
            let mut x = h.clone();
            for &gamma in p_w {
                x = x.derive(&ctx.pairing[gamma]);
            }
            let mut avg = Poly::zero();
            for el in g {
                avg = avg.add(&x.substitute(&el.images));
            }
            avg.scale(inv)
        })
        .filter(|p| !p.is_zero())
        .collect();
    span_basis(&images)
}

/// `E(h, S, e)` by linearity over the monomials of `h`.
pub fn e_of_poly(ctx: &SpecialContext, h: &Poly, s: &SSet, es: &[u32]) -> Vec<Q> {
    let members = s.members();
    let minus: Vec<bool> = members.iter().map(|m| m.1).collect();
    let mut out = vec![Q::zero(); es.len()];
    for (mono, c) in &h.terms {
        let mut rows: Vec<Vec<Q>> = Vec::new();
        for k in 0..NVARS {
            for _ in 0..mono[k] {
                rows.push(members.iter().map(|(sc, _)| ctx.pairing[*sc][k]).collect());
            }
        }
        let sums = bipartition_sums(&rows, &minus);
        for (o, e) in out.iter_mut().zip(es) {
            *o += *c * e_from_sums(&sums, *e);
        }
    }
    out
}

// Vanishing sweep.

/// Bit masks over `P_L0`, `R_{x+5}` and `R_{x+4}`.
pub type Key = (u32, u32, u32);

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub triple: usize,
    pub n: usize,
    pub basis_index: usize,
    pub e: u32,
    pub value: Q,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct KeyResult {
    pub checked: usize,
    pub polynomial_regime: usize,
    pub finite_regime: usize,
    /// `(n, basis index, e, value)` of nonzero constants.
    pub nonzero: Vec<(usize, usize, u32, Q)>,
    pub max_abs: Q,
}

pub fn key_sets(ctx: &SpecialContext, key: Key) -> (Vec<usize>, SSet) {
    let pick = |v: &[usize], m: u32| v.iter().enumerate().filter(|(i, _)| m >> i & 1 == 1).map(|(_, c)| *c).collect::<Vec<_>>();
    (pick(&ctx.p_l0, key.0), SSet { plus: pick(&ctx.r_x5, key.1), minus: pick(&ctx.r_x4, key.2) })
}

pub fn evaluate_key(ctx: &SpecialContext, key: Key) -> KeyResult {
    let (p_w, s) = key_sets(ctx, key);
    let mut res = KeyResult::default();
    if p_w.len() > MAX_DEGREE {
        return res;
    }
    let g = stabilizer(ctx, &s);
    for n in 0..=(MAX_DEGREE - p_w.len()) {
        let (es, poly) = e_range(s.n_w(), n);
        if es.is_empty() {
            continue;
        }
        let basis = harmonic_image_basis(ctx, &p_w, &g, n);
        for (bi, h) in basis.iter().enumerate() {
            let vals = e_of_poly(ctx, h, &s, &es);
            for (e, v) in es.iter().zip(vals) {
                res.checked += 1;
                if !v.is_zero() {
                    if v.abs() > res.max_abs {
                        res.max_abs = v.abs();
                    }
                    res.nonzero.push((n, bi, *e, v));
                }
            }
            if poly {
                res.polynomial_regime += 1;
            } else {
                res.finite_regime += 1;
            }
        }
    }
    res
}

/// Evaluated keys, shared across shards.
#[derive(Default)]
pub struct KeyCache {
    map: RwLock<HashMap<Key, Arc<KeyResult>>>,
}

impl KeyCache {
    pub fn len(&self) -> usize {
        self.map.read().unwrap().len()
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ShardReport {
    pub shard: usize,
    pub triples: usize,
    pub in_scope: usize,
    pub keys: usize,
    pub checked: usize,
    pub polynomial_regime: usize,
    pub finite_regime: usize,
    /// Triples with `|P_N(w)| != |P_N(u)|`.
    pub invariant_failures: usize,
    pub violations: Vec<Violation>,
    pub max_abs: Q,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Scope {
    /// Every hundredth triple.
    Sample,
    Full,
}

impl Scope {
    pub fn includes(self, idx: usize) -> bool {
        match self {
            Scope::Sample => idx.is_multiple_of(100),
            Scope::Full => true,
        }
    }
}

pub fn triple_key(ctx: &SpecialContext, t: &CosetTables, idx: usize) -> (Key, usize) {
    let (e, ta, u) = t.triple(idx);
    let (pe, pt, pu) = (&t.eta_perm[e], &t.tau_perm[ta], &t.u_perm[u]);
    let d = &ctx.datum;
    let img = |c: usize| pe[pt[pu[c] as usize] as usize] as usize;
    let mask = |v: &[usize], inverted: bool| {
        v.iter().enumerate().fold(0u32, |m, (i, &c)| if d.is_pos(img(c)) != inverted { m | 1 << i } else { m })
    };
    let pn = ctx.p_n.iter().filter(|&&c| !d.is_pos(img(c))).count();
    ((mask(&ctx.p_l0, true), mask(&ctx.r_x5, false), mask(&ctx.r_x4, false)), pn)
}

/// The vanishing check on all in-scope triples with a given `eta`.
pub fn vanishing_shard(ctx: &SpecialContext, t: &CosetTables, shard: usize, scope: Scope, cache: &KeyCache) -> ShardReport {
    let per = t.u.len() * t.tau.len();
    let mut rep = ShardReport { shard, ..Default::default() };
    let mut first: BTreeMap<Key, (usize, usize)> = BTreeMap::new();
    for idx in shard * per..(shard + 1) * per {
        if !scope.includes(idx) {
            continue;
        }
        rep.triples += 1;
        let (key, pn) = triple_key(ctx, t, idx);
        if pn != t.u[t.triple(idx).2].1 {
            rep.invariant_failures += 1;
        }
        if key.0.count_ones() as usize > MAX_DEGREE {
            continue;
        }
        rep.in_scope += 1;
        first.entry(key).or_insert((idx, 0)).1 += 1;
    }
    let missing: Vec<Key> = {
        let map = cache.map.read().unwrap();
        first.keys().copied().filter(|k| !map.contains_key(k)).collect()
    };
    let fresh: Vec<(Key, KeyResult)> = missing.par_iter().map(|k| (*k, evaluate_key(ctx, *k))).collect();
    {
        let mut map = cache.map.write().unwrap();
        for (k, r) in fresh {
            map.insert(k, Arc::new(r));
        }
    }
    let map = cache.map.read().unwrap();
    rep.keys = first.len();
    for (k, (idx, count)) in &first {
        let r = &map[k];
        rep.checked += r.checked * count;
        rep.polynomial_regime += r.polynomial_regime * count;
        rep.finite_regime += r.finite_regime * count;
        if r.max_abs > rep.max_abs {
            rep.max_abs = r.max_abs;
        }
        for (n, bi, e, v) in &r.nonzero {
            rep.violations.push(Violation { triple: *idx, n: *n, basis_index: *bi, e: *e, value: *v });
        }
    }
    rep
}

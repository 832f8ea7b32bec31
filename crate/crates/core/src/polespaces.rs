//! Affine pole spaces `L = ∩{coroot = 1}`, their residual and Ω-order
//! classification, centers, weighted Dynkin labels, enumeration of standard
//! residual spaces and the spectral density.

use crate::linalg;
use crate::rootsys::{RootDatum, Vector, WeylElement};
use crate::{Error, Q};
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PoleSpace {
    /// Coroots whose equations `= 1` were used to define the space.
    pub defining: Vec<usize>,
    /// Coroots identically 1 on the space (both signs).
    pub pole_set: Vec<usize>,
    /// Coroots identically 0 on the space (both signs).
    pub zero_set: Vec<usize>,
    /// Positive coroots constant on the space.
    pub constant: Vec<usize>,
    pub center: Vector,
    pub dir_basis: Vec<Vector>,
    pub codim: usize,
}

fn row(d: &RootDatum, c: usize) -> Vector {
    d.coroots[c].iter().map(|x| Q::from_integer(*x)).collect()
}

/// The affine space cut out by `coroot = value` for each pair.
pub fn affine_space(d: &RootDatum, eqs: &[(usize, Q)]) -> Result<PoleSpace, Error> {
    let n = d.rank;
    let rows: Vec<Vector> = eqs.iter().map(|(c, _)| row(d, *c)).collect();
    let rhs: Vec<Q> = eqs.iter().map(|(_, v)| *v).collect();
    linalg::solve(&rows, &rhs, n).ok_or(Error::Inconsistent)?;
    let dir_basis = linalg::nullspace(&rows, n);
    let keep = linalg::independent_rows(&rows);
    let iotas: Vec<Vector> = keep.iter().map(|&k| d.coroot_vector(eqs[k].0)).collect();
    let gmat: Vec<Vector> = keep
        .iter()
        .map(|&k| iotas.iter().map(|v| linalg::dot(&rows[k], v)).collect())
        .collect();
    let grhs: Vec<Q> = keep.iter().map(|&k| rhs[k]).collect();
    let a = linalg::solve(&gmat, &grhs, keep.len()).ok_or(Error::Inconsistent)?;
    let mut center = vec![Q::zero(); n];
    for (ak, v) in a.iter().zip(&iotas) {
        for i in 0..n {
            center[i] += *ak * v[i];
        }
    }
    let mut pole_set = Vec::new();
    let mut zero_set = Vec::new();
    let mut constant = Vec::new();
    for c in 0..d.ncoroots() {
        if !is_const(d, c, &dir_basis) {
            continue;
        }
        if d.is_pos(c) {
            constant.push(c);
        }
        let v = d.eval(c, &center);
        if v.is_one() {
            pole_set.push(c);
        } else if v.is_zero() {
            zero_set.push(c);
        }
    }
    Ok(PoleSpace {
        defining: Vec::new(),
        pole_set,
        zero_set,
        constant,
        center,
        dir_basis,
        codim: keep.len(),
    })
}

fn is_const(d: &RootDatum, c: usize, dir: &[Vector]) -> bool {
    dir.iter().all(|v| d.eval(c, v).is_zero())
}

/// `L = ∩{coroot = 1 : coroot in set}`.
pub fn pole_space(d: &RootDatum, coroots: &[usize]) -> Result<PoleSpace, Error> {
    let eqs: Vec<(usize, Q)> = coroots.iter().map(|&c| (c, Q::one())).collect();
    let mut l = affine_space(d, &eqs)?;
    let mut def = coroots.to_vec();
    def.sort();
    def.dedup();
    l.defining = def;
    Ok(l)
}

impl PoleSpace {
    pub fn whole(d: &RootDatum) -> PoleSpace {
        pole_space(d, &[]).unwrap()
    }
    pub fn dim(&self) -> usize {
        self.dir_basis.len()
    }
    pub fn is_const(&self, d: &RootDatum, c: usize) -> bool {
        is_const(d, c, &self.dir_basis)
    }
    pub fn contains(&self, d: &RootDatum, p: &[Q]) -> bool {
        // p - c lies in the direction space iff every constant coroot agrees.
        self.constant.iter().all(|&c| d.eval(c, p) == d.eval(c, &self.center))
    }
    /// Identity of the affine subspace: center and constant coroots.
    pub fn key(&self) -> (Vector, Vec<usize>) {
        (self.center.clone(), self.constant.clone())
    }
    pub fn same_space(&self, other: &PoleSpace) -> bool {
        self.center == other.center && self.constant == other.constant
    }
    /// Image under `w`.
    pub fn transform(&self, d: &RootDatum, w: &WeylElement) -> PoleSpace {
        let defining: Vec<usize> = self.defining.iter().map(|&c| d.act_coroot(w, c)).collect();
        let consts: Vec<usize> = self
            .constant
            .iter()
            .map(|&c| d.act_coroot(w, c))
            .collect();
        let keep = {
            let rows: Vec<Vector> = consts.iter().map(|&c| row(d, c)).collect();
            linalg::independent_rows(&rows)
        };
        let eqs: Vec<(usize, Q)> = keep
            .iter()
            .map(|&k| (consts[k], d.eval(self.constant[k], &self.center)))
            .collect();
        let mut l = affine_space(d, &eqs).expect("image of a nonempty space");
        let mut def = defining;
        def.sort();
        l.defining = def;
        l
    }
    /// Whether `L = ∩{coroot = 1 : coroot in pole_set}` holds.
    pub fn cut_out_by_poles(&self, d: &RootDatum) -> bool {
        let rows: Vec<Vector> = self.pole_set.iter().map(|&c| row(d, c)).collect();
        linalg::rank(&rows) == self.codim
    }
}

/// Whether the coroot lies in `R_+ ∪ R'_-`, the signs seen by Ω.
pub fn omega_sign(d: &RootDatum, c: usize) -> bool {
    d.is_pos(c) || d.in_levi_prime(c)
}

pub fn omega_poles(d: &RootDatum, l: &PoleSpace) -> Vec<usize> {
    l.pole_set.iter().copied().filter(|&c| omega_sign(d, c)).collect()
}

pub fn omega_zeros(d: &RootDatum, l: &PoleSpace) -> Vec<usize> {
    l.zero_set.iter().copied().filter(|&c| omega_sign(d, c)).collect()
}

pub fn omega_order(d: &RootDatum, l: &PoleSpace) -> i64 {
    omega_poles(d, l).len() as i64 - omega_zeros(d, l).len() as i64 - l.codim as i64
}

/// Ω-pole space test: the order is nonnegative and the Ω-poles cut out `L`.
pub fn is_omega_pole_space(d: &RootDatum, l: &PoleSpace) -> bool {
    if omega_order(d, l) < 0 {
        return false;
    }
    let rows: Vec<Vector> = omega_poles(d, l).iter().map(|&c| row(d, c)).collect();
    linalg::rank(&rows) == l.codim
}

/// Residual (Ω_r-pole space) test.
pub fn is_residual(d: &RootDatum, l: &PoleSpace) -> bool {
    l.pole_set.len() >= l.zero_set.len() + l.codim && l.cut_out_by_poles(d)
}

/// Residual test relative to the coroots of a standard Levi `nodes`.
pub fn is_residual_in(d: &RootDatum, l: &PoleSpace, nodes: &[usize]) -> bool {
    let p: Vec<usize> = l.pole_set.iter().copied().filter(|&c| d.in_levi(c, nodes)).collect();
    let z = l.zero_set.iter().filter(|&&c| d.in_levi(c, nodes)).count();
    let rows: Vec<Vector> = p.iter().map(|&c| row(d, c)).collect();
    p.len() >= z + l.codim && linalg::rank(&rows) == l.codim
}

/// `(is_residual, Ω-order)` of `w(L)`.
pub fn classify(l: &PoleSpace, d: &RootDatum, twist: &WeylElement) -> (bool, i64) {
    let m = if twist.is_identity() { l.clone() } else { l.transform(d, twist) };
    (is_residual(d, &m), omega_order(d, &m))
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct OrbitLabel {
    pub weighted_dynkin: Vec<i64>,
    pub name: Option<String>,
}

/// Labels `2 <simple coroot, c+>` for the dominant representative `c+` of `c`, on `nodes`.
pub fn wdd_of_center(d: &RootDatum, c: &[Q], nodes: &[usize]) -> Vec<i64> {
    let (cp, _) = d.dominant_map_in(c, nodes);
    nodes
        .iter()
        .map(|&j| {
            let v = cp[j] * Q::from_integer(2);
            assert!(v.is_integer());
            v.to_integer()
        })
        .collect()
}

pub fn weighted_dynkin_label(l: &PoleSpace, d: &RootDatum) -> Result<OrbitLabel, Error> {
    if !is_residual(d, l) {
        return Err(Error::NotResidual);
    }
    let all: Vec<usize> = (0..d.rank).collect();
    let wdd = wdd_of_center(d, &l.center, &all);
    let name = orbit_table().name(d, &wdd);
    Ok(OrbitLabel { weighted_dynkin: wdd, name })
}

/// Standard residual space together with its parabolic datum.
#[derive(Clone, Debug)]
pub struct StandardResidual {
    pub space: PoleSpace,
    pub nodes: Vec<usize>,
    pub gamma: Vec<Q>,
    pub label: OrbitLabel,
}

/// One standard representative per orbit of residual spaces of the Levi
/// subsystem spanned by `subsystem` (all nodes for the whole system), under
/// the Weyl group of that subsystem.
///
/// Every standard residual space is `{coroot_j = γ_j : j ∈ J}` with
/// `J ⊆ subsystem` and `γ ∈ {0,1}^J`; all such candidates are tested and
/// deduplicated by weighted Dynkin diagram.
pub fn enumerate_standard_residual(d: &RootDatum, subsystem: &[usize]) -> Vec<StandardResidual> {
    use rayon::prelude::*;
    let k = subsystem.len();
    let mut cands: Vec<(Vec<usize>, Vec<Q>)> = Vec::new();
    for mask in 0u32..(1 << k) {
        let nodes: Vec<usize> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| subsystem[i]).collect();
        for g in 0u32..(1 << nodes.len()) {
            let gamma: Vec<Q> = (0..nodes.len()).map(|i| Q::from_integer((g >> i & 1) as i64)).collect();
            cands.push((nodes.clone(), gamma));
        }
    }
    let found: Vec<Option<StandardResidual>> = cands
        .par_iter()
        .map(|(nodes, gamma)| {
            let eqs: Vec<(usize, Q)> = nodes.iter().zip(gamma).map(|(&j, g)| (d.simple_coroot(j), *g)).collect();
            let mut l = affine_space(d, &eqs).ok()?;
            if !is_residual_in(d, &l, subsystem) {
                return None;
            }
            l.defining = l.pole_set.iter().copied().filter(|&c| d.in_levi(c, subsystem)).collect();
            let wdd = wdd_of_center(d, &l.center, subsystem);
            let name = if subsystem.len() == d.rank { orbit_table().name(d, &wdd) } else { None };
            Some(StandardResidual {
                space: l,
                nodes: nodes.clone(),
                gamma: gamma.clone(),
                label: OrbitLabel { weighted_dynkin: wdd, name },
            })
        })
        .collect();
    let mut by_wdd: BTreeMap<Vec<i64>, StandardResidual> = BTreeMap::new();
    for r in found.into_iter().flatten() {
        by_wdd.entry(r.label.weighted_dynkin.clone()).or_insert(r);
    }
    by_wdd.into_values().collect()
}

/// A standard pair for a pole space.
#[derive(Clone, Debug)]
pub struct StdData {
    /// `w(L0) = L`.
    pub w: WeylElement,
    pub l0: PoleSpace,
    pub nodes: Vec<usize>,
    pub gamma: Vec<Q>,
}

/// Parabolic datum `(J, γ)` if `L` is standard.
pub fn standard_datum(d: &RootDatum, l: &PoleSpace) -> Option<(Vec<usize>, Vec<Q>)> {
    let nodes: Vec<usize> = (0..d.rank).filter(|&j| l.constant.contains(&d.simple_coroot(j))).collect();
    if l.constant.iter().any(|&c| !d.in_levi(c, &nodes)) {
        return None;
    }
    let gamma: Vec<Q> = nodes.iter().map(|&j| l.center[j]).collect();
    if gamma.iter().any(|g| g.is_negative()) {
        return None;
    }
    Some((nodes, gamma))
}

const PRIMES: [i64; 24] = [
    101, 103, 107, 109, 113, 127, 131, 137, 139, 149, 151, 157, 163, 167, 173, 179, 181, 191, 193,
    197, 199, 211, 223, 227,
];

/// A point of `V^L` on which no coroot nonconstant on `L` vanishes.
pub fn generic_direction(d: &RootDatum, l: &PoleSpace) -> Vector {
    let n = d.rank;
    for shift in 0..PRIMES.len() {
        let mut y = vec![Q::zero(); n];
        for (k, b) in l.dir_basis.iter().enumerate() {
            let p = PRIMES[(k + shift) % PRIMES.len()] + 1000 * shift as i64;
            for i in 0..n {
                y[i] += b[i] / p;
            }
        }
        if (0..d.npos).all(|c| l.is_const(d, c) || !d.eval(c, &y).is_zero()) {
            return y;
        }
    }
    panic!("no generic direction found")
}

/// Standard pair `(L0, w)` with `w(L0) = L`; identity when `L` is already standard.
pub fn std_data(l: &PoleSpace, d: &RootDatum) -> StdData {
    let all: Vec<usize> = (0..d.rank).collect();
    std_data_in(l, d, &all)
}

/// As [`std_data`], using only reflections in `nodes`. The result is standard
/// whenever the coroots constant on `L` lie in the span of `nodes`.
pub fn std_data_in(l: &PoleSpace, d: &RootDatum, nodes: &[usize]) -> StdData {
    if let Some((nodes, gamma)) = standard_datum(d, l) {
        return StdData { w: d.identity(), l0: l.clone(), nodes, gamma };
    }
    let y = generic_direction(d, l);
    let cmax = (0..d.npos).map(|c| d.eval(c, &l.center).abs()).max().unwrap_or_else(Q::zero);
    let ymin = (0..d.npos)
        .filter(|&c| !l.is_const(d, c))
        .map(|c| d.eval(c, &y).abs())
        .min()
        .unwrap_or_else(Q::one);
    let scale = ((cmax * Q::from_integer(2) + Q::one()) / ymin).ceil() + Q::one();
    let lam: Vector = l.center.iter().zip(&y).map(|(c, v)| *c + *v * scale).collect();
    let (_, u) = d.dominant_map_in(&lam, nodes);
    let l0 = l.transform(d, &u);
    let (nodes, gamma) = standard_datum(d, &l0).expect("dominant image is standard");
    StdData { w: d.inverse(&u), l0, nodes, gamma }
}

/// `c_L + t w'` with `t = 1 + 2 max |coroot(c_L)|`.
pub fn point_at_infinity(d: &RootDatum, l: &PoleSpace) -> Vector {
    let cmax = (0..d.npos).map(|c| d.eval(c, &l.center).abs()).max().unwrap_or_else(Q::zero);
    let t = Q::one() + cmax * Q::from_integer(2);
    let mut p = l.center.clone();
    p[d.levi_omitted] += t;
    p
}

/// Caller-supplied group orders entering the density.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DensityFactors {
    pub isotropy_order: u64,
    pub component_group_order: u64,
}

impl Default for DensityFactors {
    fn default() -> Self {
        DensityFactors { isotropy_order: 1, component_group_order: 1 }
    }
}

/// Density of the measure on `L^temp` at `c_L + i λ^L`, with `λ^L` given in
/// coordinates on `dir_basis`.
pub fn nu_density(l: &PoleSpace, d: &RootDatum, factors: DensityFactors, lambda: &[Q]) -> Result<Q, Error> {
    if !is_residual(d, l) {
        return Err(Error::NotResidual);
    }
    if factors.isotropy_order == 0 || factors.component_group_order == 0 {
        return Err(Error::BadFactors);
    }
    let mut x = vec![Q::zero(); d.rank];
    for (a, b) in lambda.iter().zip(&l.dir_basis) {
        for i in 0..d.rank {
            x[i] += *a * b[i];
        }
    }
    let mut val = Q::new(factors.isotropy_order as i64, factors.component_group_order as i64);
    for c in 0..d.ncoroots() {
        if !l.is_const(d, c) {
            continue;
        }
        let v = d.eval(c, &l.center);
        if !v.is_zero() {
            val *= v.abs();
        }
        let w = v + Q::one();
        if !w.is_zero() {
            val /= w.abs();
        }
    }
    for c in 0..d.npos {
        if l.is_const(d, c) {
            continue;
        }
        let a = d.eval(c, &l.center);
        let b = d.eval(c, &x);
        let den = (a - Q::one()) * (a - Q::one()) + b * b;
        if den.is_zero() {
            return Err(Error::DensityPole(c));
        }
        val *= (a * a + b * b) / den;
    }
    Ok(val)
}

/// Weighted Dynkin diagrams with names, read from the shipped data file.
pub struct OrbitTable {
    entries: Vec<(String, usize, Vec<i64>, String)>,
}

impl OrbitTable {
    pub fn parse(text: &str) -> OrbitTable {
        let mut entries = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            let rank: usize = f[1].parse().expect("rank");
            let vals: Vec<i64> = f[2..2 + rank].iter().map(|s| s.parse().expect("label")).collect();
            entries.push((f[0].to_string(), rank, vals, f[2 + rank].to_string()));
        }
        OrbitTable { entries }
    }
    pub fn version(text: &str) -> Option<&str> {
        text.lines().find_map(|l| l.strip_prefix("# version "))
    }
    pub fn entries_for(&self, d: &RootDatum) -> Vec<(Vec<i64>, String)> {
        let t = d.kind.to_string();
        self.entries
            .iter()
            .filter(|e| e.0 == t && e.1 == d.rank)
            .map(|e| (e.2.clone(), e.3.clone()))
            .collect()
    }
    pub fn name(&self, d: &RootDatum, wdd: &[i64]) -> Option<String> {
        let t = d.kind.to_string();
        self.entries
            .iter()
            .find(|e| e.0 == t && e.1 == d.rank && e.2 == wdd)
            .map(|e| e.3.clone())
    }
}

pub const ORBIT_DATA: &str = include_str!("../data/orbits.txt");

pub fn orbit_table() -> &'static OrbitTable {
    use std::sync::OnceLock;
    static T: OnceLock<OrbitTable> = OnceLock::new();
    T.get_or_init(|| OrbitTable::parse(ORBIT_DATA))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{build_root_datum, RootType};

    #[test]
    fn whole_space_and_point() {
        let d = build_root_datum(RootType::A, 1, 1).unwrap();
        let v = PoleSpace::whole(&d);
        assert_eq!(v.codim, 0);
        assert!(v.pole_set.is_empty() && v.zero_set.is_empty());
        let p = pole_space(&d, &[0]).unwrap();
        assert_eq!(p.codim, 1);
        assert_eq!(p.pole_set, vec![0]);
        // alpha/2 = w_1 in fundamental-weight coordinates for A1.
        assert_eq!(p.center, vec![Q::one()]);
        assert_eq!(classify(&p, &d, &d.identity()), (true, 0));
        assert_eq!(weighted_dynkin_label(&v, &d).unwrap().weighted_dynkin, vec![0]);
        assert_eq!(weighted_dynkin_label(&p, &d).unwrap().weighted_dynkin, vec![2]);
    }

    #[test]
    fn inconsistent_system() {
        let d = build_root_datum(RootType::A, 2, 1).unwrap();
        let a1 = d.simple_coroot(0);
        let a2 = d.simple_coroot(1);
        let a12 = d.coroot_id(&[1, 1]).unwrap();
        assert!(matches!(pole_space(&d, &[a1, a2, a12]), Err(Error::Inconsistent)));
    }

    #[test]
    fn density_examples() {
        let d = build_root_datum(RootType::A, 1, 1).unwrap();
        let v = PoleSpace::whole(&d);
        let f = DensityFactors::default();
        assert_eq!(nu_density(&v, &d, f, &[Q::zero()]).unwrap(), Q::zero());
        // dir basis of V is w_1, and <coroot, w_1> = 1.
        assert_eq!(nu_density(&v, &d, f, &[Q::one()]).unwrap(), Q::new(1, 2));
        let p = pole_space(&d, &[0]).unwrap();
        assert_eq!(nu_density(&p, &d, f, &[]).unwrap(), Q::new(1, 2));
    }

    #[test]
    fn std_data_identity_on_standard() {
        let d = build_root_datum(RootType::A, 2, 1).unwrap();
        let l = pole_space(&d, &[d.simple_coroot(0)]).unwrap();
        let s = std_data(&l, &d);
        assert!(s.w.is_identity());
        assert_eq!(s.nodes, vec![0]);
        let w0 = d.longest_in(&[0, 1]);
        let m = l.transform(&d, &w0);
        let s = std_data(&m, &d);
        assert!(s.l0.transform(&d, &s.w).same_space(&m));
        assert!(standard_datum(&d, &s.l0).is_some());
    }
}

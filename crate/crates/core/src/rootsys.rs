//! Based root systems with exact coordinates, Weyl group elements,
//! inversion sets and parabolic coset representatives.
//!
//! Points of `V` are written in the basis of fundamental weights, so the
//! value of the simple coroot `j` at a point is its `j`-th coordinate.
//! Coroots are integer covectors in the basis of simple coroots.

use crate::linalg;
use crate::{Error, Q};
use num_traits::{Signed, Zero};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;
use std::hash::{Hash, Hasher};

pub type Vector = Vec<Q>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum RootType {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl RootType {
    pub fn parse(s: &str) -> Result<Self, Error> {
        Ok(match s.trim().to_ascii_uppercase().as_str() {
            "A" => RootType::A,
            "B" => RootType::B,
            "C" => RootType::C,
            "D" => RootType::D,
            "E" => RootType::E,
            "F" => RootType::F,
            "G" => RootType::G,
            other => return Err(Error::InvalidType(other.to_string())),
        })
    }
}

impl fmt::Display for RootType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self)
    }
}

/// Bourbaki Cartan matrix `A[i][j] = <coroot_i, root_j>`.
pub fn cartan_matrix(t: RootType, n: usize) -> Result<Vec<Vec<i64>>, Error> {
    let ok = match t {
        RootType::A => n >= 1,
        RootType::B | RootType::C => n >= 2,
        RootType::D => n >= 4,
        RootType::E => (6..=8).contains(&n),
        RootType::F => n == 4,
        RootType::G => n == 2,
    };
    if !ok {
        return Err(Error::InvalidRank(t, n));
    }
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    match t {
        RootType::A | RootType::B | RootType::C | RootType::F => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
        }
        RootType::D => {
            for i in 0..n - 2 {
                link(i, i + 1);
            }
            link(n - 3, n - 1);
        }
        RootType::E => {
            link(0, 2);
            link(1, 3);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
        }
        RootType::G => link(0, 1),
    }
    match t {
        RootType::B => a[n - 1][n - 2] = -2,
        RootType::C => a[n - 2][n - 1] = -2,
        RootType::F => a[2][1] = -2,
        RootType::G => a[0][1] = -3,
        _ => {}
    }
    Ok(a)
}

/// Half squared lengths `(a_i, a_i)/2` of the simple roots, long roots normalised to 1.
fn half_lengths(t: RootType, n: usize) -> Vec<Q> {
    let mut l = vec![Q::from_integer(1); n];
    match t {
        RootType::B => l[n - 1] = Q::new(1, 2),
        RootType::C => {
            for x in l.iter_mut().take(n - 1) {
                *x = Q::new(1, 2);
            }
        }
        RootType::F => {
            l[2] = Q::new(1, 2);
            l[3] = Q::new(1, 2);
        }
        RootType::G => l[0] = Q::new(1, 3),
        _ => {}
    }
    l
}

/// Element of the Weyl group: a reduced word and its matrix on
/// fundamental-weight coordinates. Equality and hashing use the matrix.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WeylElement {
    pub word: Vec<u8>,
    pub matrix: Vec<i64>,
    inv: Vec<i64>,
}

impl PartialEq for WeylElement {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}
impl Eq for WeylElement {}
impl Hash for WeylElement {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.matrix.hash(state)
    }
}

impl WeylElement {
    pub fn len(&self) -> usize {
        self.word.len()
    }
    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }
    /// Word with 1-based indices, space separated.
    pub fn word_string(&self) -> String {
        self.word
            .iter()
            .map(|i| (i + 1).to_string())
            .collect::<Vec<_>>()
            .join(" ")
    }
}

#[derive(Clone, Debug)]
pub struct RootDatum {
    pub kind: RootType,
    pub rank: usize,
    pub cartan: Vec<Vec<i64>>,
    pub half_len: Vec<Q>,
    /// Simple roots in fundamental-weight coordinates.
    pub simple_roots: Vec<Vector>,
    /// Positive roots in simple-root coordinates; entry `k` matches coroot `k`.
    pub positive_roots: Vec<Vec<i64>>,
    /// All coroots: positive ones sorted lexicographically, then their negatives in the same order.
    pub coroots: Vec<Vec<i64>>,
    pub fundamental_weights: Vec<Vector>,
    /// Invariant inner product on fundamental-weight coordinates.
    pub gram: Vec<Vec<Q>>,
    pub gram_inv: Vec<Vec<Q>>,
    /// 0-based index of the node removed to form the Levi R'.
    pub levi_omitted: usize,
    pub levi_prime: Vec<usize>,
    pub npos: usize,
    index: HashMap<Vec<i64>, usize>,
}

fn is_pos_vec(v: &[i64]) -> bool {
    v.iter().find(|x| **x != 0).is_some_and(|x| *x > 0)
}

/// Closure of the simple roots under simple reflections; `pair(i, c)` is `<coroot_i, c>`.
fn reflection_closure(n: usize, pair: impl Fn(usize, &[i64]) -> i64) -> Vec<Vec<i64>> {
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut queue = VecDeque::new();
    for i in 0..n {
        let mut e = vec![0; n];
        e[i] = 1;
        seen.insert(e.clone());
        queue.push_back(e);
    }
    while let Some(c) = queue.pop_front() {
        for i in 0..n {
            let p = pair(i, &c);
            if p == 0 {
                continue;
            }
            let mut d = c.clone();
            d[i] -= p;
            if is_pos_vec(&d) && seen.insert(d.clone()) {
                queue.push_back(d);
            }
        }
    }
    let mut v: Vec<_> = seen.into_iter().collect();
    v.sort();
    v
}

pub fn build_root_datum(t: RootType, n: usize, omitted: usize) -> Result<RootDatum, Error> {
    let cartan = cartan_matrix(t, n)?;
    if omitted < 1 || omitted > n {
        return Err(Error::LeviIndex(omitted, n));
    }
    let half_len = half_lengths(t, n);
    let a = &cartan;
    // Coroot m pairs with simple root i as sum_j m_j A[j][i].
    let pos_coroots = reflection_closure(n, |i, m| (0..n).map(|j| m[j] * a[j][i]).sum());
    let npos = pos_coroots.len();
    let mut coroots = pos_coroots.clone();
    coroots.extend(pos_coroots.iter().map(|m| m.iter().map(|x| -x).collect::<Vec<_>>()));
    let index: HashMap<Vec<i64>, usize> =
        coroots.iter().cloned().enumerate().map(|(k, m)| (m, k)).collect();

    // Root dual to each positive coroot: c_i = m_i * l / l_i, where l = 2 / (m, m).
    let positive_roots: Vec<Vec<i64>> = pos_coroots
        .iter()
        .map(|m| {
            let mut norm = Q::zero();
            for i in 0..n {
                for j in 0..n {
                    norm += Q::from_integer(m[i] * m[j] * a[j][i]) / half_len[i];
                }
            }
            let lc = Q::from_integer(2) / norm;
            (0..n)
                .map(|i| {
                    let c = Q::from_integer(m[i]) * lc / half_len[i];
                    assert!(c.is_integer(), "non-integral root coordinate");
                    c.to_integer()
                })
                .collect()
        })
        .collect();

    let simple_roots: Vec<Vector> = (0..n)
        .map(|j| (0..n).map(|i| Q::from_integer(a[i][j])).collect())
        .collect();
    let fundamental_weights: Vec<Vector> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { Q::from_integer(1) } else { Q::zero() }).collect())
        .collect();
    // (a_j, w_k) = l_j delta_jk  =>  A^T G = diag(l).
    let at: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| Q::from_integer(a[j][i])).collect())
        .collect();
    let at_inv = linalg::inverse(&at).expect("Cartan matrix is invertible");
    let gram: Vec<Vec<Q>> = (0..n)
        .map(|i| (0..n).map(|j| at_inv[i][j] * half_len[j]).collect())
        .collect();
    let gram_inv = linalg::inverse(&gram).expect("Gram matrix is invertible");
    let levi_prime = (0..n).filter(|&i| i != omitted - 1).collect();
    Ok(RootDatum {
        kind: t,
        rank: n,
        cartan,
        half_len,
        simple_roots,
        positive_roots,
        coroots,
        fundamental_weights,
        gram,
        gram_inv,
        levi_omitted: omitted - 1,
        levi_prime,
        npos,
        index,
    })
}

impl RootDatum {
    pub fn label(&self) -> String {
        format!("{}{}", self.kind, self.rank)
    }
    /// Cartan type of the sub-diagram on `nodes`, components joined by `x`
    /// in node order, e.g. `A1xB2`. Empty for no nodes.
    pub fn diagram_label(&self, nodes: &[usize]) -> String {
        let a = &self.cartan;
        let mut seen = vec![false; self.rank];
        let mut parts = Vec::new();
        for &s in nodes {
            if seen[s] {
                continue;
            }
            let mut comp = vec![s];
            seen[s] = true;
            let mut k = 0;
            while k < comp.len() {
                let i = comp[k];
                for &j in nodes {
                    if !seen[j] && a[i][j] != 0 {
                        seen[j] = true;
                        comp.push(j);
                    }
                }
                k += 1;
            }
            parts.push(component_label(a, &comp));
        }
        parts.join("x")
    }
    /// Type of the maximal Levi `R'`.
    pub fn levi_prime_label(&self) -> String {
        self.diagram_label(&self.levi_prime)
    }
    pub fn ncoroots(&self) -> usize {
        2 * self.npos
    }
    pub fn is_pos(&self, c: usize) -> bool {
        c < self.npos
    }
    pub fn neg(&self, c: usize) -> usize {
        (c + self.npos) % (2 * self.npos)
    }
    pub fn coroot_id(&self, m: &[i64]) -> Option<usize> {
        self.index.get(m).copied()
    }
    pub fn simple_coroot(&self, i: usize) -> usize {
        let mut e = vec![0; self.rank];
        e[i] = 1;
        self.index[&e]
    }
    /// Whether every coordinate of the coroot outside `nodes` vanishes.
    pub fn in_levi(&self, c: usize, nodes: &[usize]) -> bool {
        self.coroots[c]
            .iter()
            .enumerate()
            .all(|(j, x)| *x == 0 || nodes.contains(&j))
    }
    pub fn in_levi_prime(&self, c: usize) -> bool {
        self.coroots[c][self.levi_omitted] == 0
    }
    /// `<coroot, v>`.
    pub fn eval(&self, c: usize, v: &[Q]) -> Q {
        self.coroots[c]
            .iter()
            .zip(v)
            .fold(Q::zero(), |acc, (m, x)| acc + *x * *m)
    }
    /// `<coroot, root>` with the root in simple-root coordinates.
    pub fn pair_root(&self, c: usize, root: &[i64]) -> i64 {
        let m = &self.coroots[c];
        let n = self.rank;
        let mut s = 0;
        for i in 0..n {
            for j in 0..n {
                s += m[i] * self.cartan[i][j] * root[j];
            }
        }
        s
    }
    pub fn inner(&self, u: &[Q], v: &[Q]) -> Q {
        linalg::dot(u, &linalg::mat_vec(&self.gram, v))
    }
    /// The vector `v` with `(v, x) = <coroot, x>` for all `x`.
    pub fn coroot_vector(&self, c: usize) -> Vector {
        let m: Vector = self.coroots[c].iter().map(|x| Q::from_integer(*x)).collect();
        linalg::mat_vec(&self.gram_inv, &m)
    }
    /// Highest coroot (largest height among positive coroots).
    pub fn highest_coroot(&self) -> usize {
        (0..self.npos)
            .max_by_key(|&c| (self.coroots[c].iter().sum::<i64>(), std::cmp::Reverse(c)))
            .unwrap()
    }

    // Weyl group.

    fn idm(&self) -> Vec<i64> {
        let n = self.rank;
        let mut m = vec![0; n * n];
        for i in 0..n {
            m[i * n + i] = 1;
        }
        m
    }

    /// Matrix of `s_i` on fundamental-weight coordinates.
    fn refl_matrix(&self, i: usize) -> Vec<i64> {
        let n = self.rank;
        let mut m = self.idm();
        for j in 0..n {
            m[j * n + i] -= self.cartan[j][i];
        }
        m
    }

    fn mm(&self, a: &[i64], b: &[i64]) -> Vec<i64> {
        let n = self.rank;
        let mut c = vec![0; n * n];
        for i in 0..n {
            for k in 0..n {
                let x = a[i * n + k];
                if x == 0 {
                    continue;
                }
                for j in 0..n {
                    c[i * n + j] += x * b[k * n + j];
                }
            }
        }
        c
    }

    pub fn identity(&self) -> WeylElement {
        WeylElement { word: Vec::new(), matrix: self.idm(), inv: self.idm() }
    }

    /// `s_i * w`, which must be longer than `w`.
    pub fn lmul_simple_up(&self, i: usize, w: &WeylElement) -> WeylElement {
        let s = self.refl_matrix(i);
        let mut word = Vec::with_capacity(w.word.len() + 1);
        word.push(i as u8);
        word.extend_from_slice(&w.word);
        WeylElement { word, matrix: self.mm(&s, &w.matrix), inv: self.mm(&w.inv, &s) }
    }

    fn row_sign(&self, m: &[i64], i: usize) -> bool {
        let n = self.rank;
        is_pos_vec(&m[i * n..(i + 1) * n])
    }

    /// Whether `l(s_i w) > l(w)`.
    pub fn left_ascent(&self, i: usize, w: &WeylElement) -> bool {
        self.row_sign(&w.matrix, i)
    }
    /// Whether `l(w s_i) > l(w)`.
    pub fn right_ascent(&self, i: usize, w: &WeylElement) -> bool {
        self.row_sign(&w.inv, i)
    }

    /// Element from its matrix; the word is recomputed as a reduced word.
    fn from_matrices(&self, matrix: Vec<i64>, inv: Vec<i64>) -> WeylElement {
        let n = self.rank;
        let mut cur = inv.clone();
        let mut rev = Vec::new();
        while let Some(i) = (0..n).find(|&i| !self.row_sign(&cur, i)) {
            rev.push(i as u8);
            cur = self.mm(&self.refl_matrix(i), &cur);
        }
        rev.reverse();
        WeylElement { word: rev, matrix, inv }
    }

    /// Product of simple reflections (word read left to right), reduced.
    pub fn from_word(&self, word: &[usize]) -> WeylElement {
        let mut m = self.idm();
        let mut inv = self.idm();
        for &i in word {
            let s = self.refl_matrix(i);
            m = self.mm(&m, &s);
            inv = self.mm(&s, &inv);
        }
        self.from_matrices(m, inv)
    }

    pub fn mul(&self, a: &WeylElement, b: &WeylElement) -> WeylElement {
        self.from_matrices(self.mm(&a.matrix, &b.matrix), self.mm(&b.inv, &a.inv))
    }

    pub fn inverse(&self, w: &WeylElement) -> WeylElement {
        let mut word = w.word.clone();
        word.reverse();
        WeylElement { word, matrix: w.inv.clone(), inv: w.matrix.clone() }
    }

    pub fn act(&self, w: &WeylElement, v: &[Q]) -> Vector {
        let n = self.rank;
        (0..n)
            .map(|i| (0..n).fold(Q::zero(), |acc, j| acc + v[j] * w.matrix[i * n + j]))
            .collect()
    }

    /// Image of a coroot under `w`: the covector `m * M(w^-1)`.
    pub fn act_coroot(&self, w: &WeylElement, c: usize) -> usize {
        let n = self.rank;
        let m = &self.coroots[c];
        let img: Vec<i64> = (0..n)
            .map(|j| (0..n).map(|i| m[i] * w.inv[i * n + j]).sum())
            .collect();
        self.index[&img]
    }

    /// Image of a covector in simple-coroot coordinates: `m * M(w^-1)`.
    pub fn act_covector(&self, w: &WeylElement, m: &[Q]) -> Vector {
        let n = self.rank;
        (0..n)
            .map(|j| (0..n).fold(Q::zero(), |acc, i| acc + m[i] * w.inv[i * n + j]))
            .collect()
    }

    pub fn inversion_set(&self, w: &WeylElement) -> Vec<usize> {
        (0..self.npos)
            .filter(|&c| !self.is_pos(self.act_coroot(w, c)))
            .collect()
    }

    /// Minimal `w` with `w(v)` dominant; only reflections in `nodes` are used.
    pub fn dominant_map_in(&self, v: &[Q], nodes: &[usize]) -> (Vector, WeylElement) {
        let mut cur = v.to_vec();
        let mut w = self.identity();
        while let Some(&i) = nodes.iter().find(|&&i| cur[i].is_negative()) {
            let s = self.from_word(&[i]);
            cur = self.act(&s, &cur);
            w = self.lmul_simple_up(i, &w);
        }
        (cur, w)
    }

    pub fn dominant_map(&self, v: &[Q]) -> (Vector, WeylElement) {
        let all: Vec<usize> = (0..self.rank).collect();
        self.dominant_map_in(v, &all)
    }

    /// Minimal `w` with `w(c)` dominant (nonnegative on all simple roots).
    pub fn dominant_map_coroot(&self, c: usize) -> (usize, WeylElement) {
        let mut cur = c;
        let mut w = self.identity();
        loop {
            let m = &self.coroots[cur];
            let Some(i) = (0..self.rank).find(|&i| {
                (0..self.rank).map(|j| m[j] * self.cartan[j][i]).sum::<i64>() < 0
            }) else {
                break;
            };
            let s = self.from_word(&[i]);
            cur = self.act_coroot(&s, cur);
            w = self.lmul_simple_up(i, &w);
        }
        (cur, w)
    }

    /// Minimal representative of the coset `W_J w`.
    pub fn min_left_coset_rep(&self, nodes: &[usize], w: &WeylElement) -> WeylElement {
        let mut cur = w.clone();
        while let Some(&j) = nodes.iter().find(|&&j| !self.left_ascent(j, &cur)) {
            let s = self.from_word(&[j]);
            cur = self.mul(&s, &cur);
        }
        cur
    }

    /// Whether `w` is minimal in `W_J w`.
    pub fn is_min_in_left_coset(&self, nodes: &[usize], w: &WeylElement) -> bool {
        nodes.iter().all(|&j| self.left_ascent(j, w))
    }
    /// Whether `w` is minimal in `w W_J`.
    pub fn is_min_in_right_coset(&self, nodes: &[usize], w: &WeylElement) -> bool {
        nodes.iter().all(|&j| self.right_ascent(j, w))
    }

    /// All elements of the parabolic subgroup `W_J` in breadth-first (length) order.
    pub fn parabolic_elements(&self, nodes: &[usize]) -> Vec<WeylElement> {
        let mut out = vec![self.identity()];
        let mut seen: HashSet<Vec<i64>> = HashSet::new();
        seen.insert(out[0].matrix.clone());
        let mut head = 0;
        while head < out.len() {
            let w = out[head].clone();
            head += 1;
            for &i in nodes {
                if self.left_ascent(i, &w) {
                    let x = self.lmul_simple_up(i, &w);
                    if seen.insert(x.matrix.clone()) {
                        out.push(x);
                    }
                }
            }
        }
        out
    }

    /// Longest element of `W_J`.
    pub fn longest_in(&self, nodes: &[usize]) -> WeylElement {
        let mut w = self.identity();
        while let Some(&i) = nodes.iter().find(|&&i| self.left_ascent(i, &w)) {
            w = self.lmul_simple_up(i, &w);
        }
        w
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CosetSide {
    /// Representatives of `w W_J`, minimal in their left cosets.
    Left,
    /// Representatives of `W_J w`.
    Right,
}

/// One minimal-length representative per coset of `W_J` inside `W_K`
/// (`within` = K, the ambient parabolic; pass all nodes for `W`).
pub fn minimal_coset_reps_within(
    d: &RootDatum,
    within: &[usize],
    parabolic: &[usize],
    side: CosetSide,
) -> Vec<WeylElement> {
    // Minimal representatives of W_K / W_J: grow by left multiplication, keeping
    // the property that every s_j (j in J) is a right ascent.
    let mut out = vec![d.identity()];
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(out[0].matrix.clone());
    let mut head = 0;
    while head < out.len() {
        let w = out[head].clone();
        head += 1;
        for &i in within {
            if !d.left_ascent(i, &w) {
                continue;
            }
            let x = d.lmul_simple_up(i, &w);
            if d.is_min_in_right_coset(parabolic, &x) && seen.insert(x.matrix.clone()) {
                out.push(x);
            }
        }
    }
    match side {
        CosetSide::Left => out,
        CosetSide::Right => out.iter().map(|w| d.inverse(w)).collect(),
    }
}

pub fn minimal_coset_reps(d: &RootDatum, parabolic: &[usize], side: CosetSide) -> Vec<WeylElement> {
    let all: Vec<usize> = (0..d.rank).collect();
    minimal_coset_reps_within(d, &all, parabolic, side)
}

/// Representatives of `W_J \ W_K` obtained from the orbit of a coroot: for each
/// coroot `c` in the orbit of the dominant coroot `top`, the minimal `w` with `w(c) = top`.
pub fn coset_reps_from_coroot_orbit(d: &RootDatum, orbit: &[usize]) -> Vec<WeylElement> {
    orbit.iter().map(|&c| d.dominant_map_coroot(c).1).collect()
}

fn component_label(a: &[Vec<i64>], comp: &[usize]) -> String {
    let m = comp.len();
    let bond = |i: usize, j: usize| a[i][j] * a[j][i];
    let mut double = None;
    let mut triple = false;
    for &i in comp {
        for &j in comp {
            match bond(i, j) {
                3 => triple = true,
                2 if a[i][j] == -2 => double = Some((i, j)),
                _ => {}
            }
        }
    }
    if triple {
        return "G2".into();
    }
    let side = |start: usize, cut: usize| {
        let mut seen = vec![start];
        let mut k = 0;
        while k < seen.len() {
            let i = seen[k];
            for &j in comp {
                if j != cut && !seen.contains(&j) && a[i][j] != 0 {
                    seen.push(j);
                }
            }
            k += 1;
        }
        seen.len()
    };
    if let Some((short, long)) = double {
        return match m {
            2 => "B2".into(),
            4 if side(short, long) == 2 => "F4".into(),
            _ if side(short, long) == 1 => format!("B{m}"),
            _ => format!("C{m}"),
        };
    }
    let degree = |i: usize| comp.iter().filter(|&&j| j != i && a[i][j] != 0).count();
    let Some(&b) = comp.iter().find(|&&i| degree(i) == 3) else {
        return format!("A{m}");
    };
    let mut arms: Vec<usize> = comp.iter().filter(|&&j| j != b && a[b][j] != 0).map(|&j| side(j, b)).collect();
    arms.sort();
    match arms.as_slice() {
        [1, 1, _] => format!("D{m}"),
        _ => format!("E{m}"),
    }
}

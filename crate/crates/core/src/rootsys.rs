//! Root data, Weyl groups and coroot coordinates for G2 and small test systems.
//!
//! Roots and weights are stored as exact coordinates in the basis of simple
//! roots of the *base* system (for `Doubled(base)` that is the basis of the
//! undoubled simple roots). The inner product is the integer Gram matrix of
//! the base simple roots times `metric_scale`; floats appear only when a
//! spectral parameter or a point of the flat is involved.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum RootSystemKind {
    G2,
    A1,
    A1xA1,
    Doubled(Box<RootSystemKind>),
}

impl RootSystemKind {
    /// The undoubled system underneath.
    pub fn base(&self) -> &RootSystemKind {
        match self {
            RootSystemKind::Doubled(b) => b.base(),
            k => k,
        }
    }
}

impl fmt::Display for RootSystemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RootSystemKind::G2 => write!(f, "g2"),
            RootSystemKind::A1 => write!(f, "a1"),
            RootSystemKind::A1xA1 => write!(f, "a1xa1"),
            RootSystemKind::Doubled(b) => write!(f, "doubled({b})"),
        }
    }
}

impl FromStr for RootSystemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().to_ascii_lowercase();
        if let Some(inner) = t.strip_prefix("doubled(").and_then(|r| r.strip_suffix(')')) {
            return Ok(RootSystemKind::Doubled(Box::new(inner.parse()?)));
        }
        match t.as_str() {
            "g2" => Ok(RootSystemKind::G2),
            "a1" => Ok(RootSystemKind::A1),
            "a1xa1" | "a1*a1" => Ok(RootSystemKind::A1xA1),
            _ => Err(Error::UnknownKind(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum LengthClass {
    Short,
    Long,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Root {
    /// Coordinates in the base simple-root basis.
    pub coords: Vec<i64>,
    pub length: LengthClass,
    pub multiplicity: u32,
}

#[derive(Debug, Clone)]
pub struct RootSystemData {
    pub kind: RootSystemKind,
    pub rank: usize,
    pub metric_scale: f64,
    /// Gram matrix of the base simple roots at scale 1.
    pub base_gram: Vec<Vec<i64>>,
    pub simple_roots: Vec<Vec<i64>>,
    pub positive_roots: Vec<Root>,
    /// `rho = 1/2 sum m_alpha alpha`, in the base simple-root basis.
    pub rho: Vec<Rational64>,
    /// 2 for doubled systems, 1 otherwise.
    pub lattice_factor: i64,
}

pub fn build_root_system(kind: RootSystemKind, metric_scale: f64) -> Result<RootSystemData> {
    if !(metric_scale > 0.0) || !metric_scale.is_finite() {
        return Err(Error::BadScale(metric_scale));
    }
    let (gram, roots, factor): (Vec<Vec<i64>>, Vec<Vec<i64>>, i64) = match &kind {
        RootSystemKind::G2 => (
            vec![vec![2, -3], vec![-3, 6]],
            vec![
                vec![1, 0],
                vec![0, 1],
                vec![1, 1],
                vec![2, 1],
                vec![3, 1],
                vec![3, 2],
            ],
            1,
        ),
        RootSystemKind::A1 => (vec![vec![2]], vec![vec![1]], 1),
        RootSystemKind::A1xA1 => (
            vec![vec![2, 0], vec![0, 2]],
            vec![vec![1, 0], vec![0, 1]],
            1,
        ),
        RootSystemKind::Doubled(base) => {
            let b = build_root_system((**base).clone(), metric_scale)?;
            if b.lattice_factor != 1 {
                return Err(Error::Unsupported("doubling a doubled system".into()));
            }
            let positive_roots: Vec<Root> = b
                .positive_roots
                .iter()
                .map(|r| Root {
                    coords: r.coords.iter().map(|c| 2 * c).collect(),
                    length: r.length,
                    multiplicity: 1,
                })
                .collect();
            let simple_roots = b
                .simple_roots
                .iter()
                .map(|v| v.iter().map(|c| 2 * c).collect())
                .collect();
            let rho = half_sum(b.rank, &positive_roots);
            return Ok(RootSystemData {
                kind,
                rank: b.rank,
                metric_scale,
                base_gram: b.base_gram,
                simple_roots,
                positive_roots,
                rho,
                lattice_factor: 2,
            });
        }
    };
    let rank = gram.len();
    let min_len = (0..rank).map(|i| gram[i][i]).min().unwrap_or(2);
    let positive_roots: Vec<Root> = roots
        .into_iter()
        .map(|coords| {
            let n = ip_exact(&gram, &coords, &coords);
            Root {
                coords,
                length: if n == min_len {
                    LengthClass::Short
                } else {
                    LengthClass::Long
                },
                multiplicity: 1,
            }
        })
        .collect();
    let simple_roots = (0..rank)
        .map(|i| (0..rank).map(|j| i64::from(i == j)).collect())
        .collect();
    let rho = half_sum(rank, &positive_roots);
    Ok(RootSystemData {
        kind,
        rank,
        metric_scale,
        base_gram: gram,
        simple_roots,
        positive_roots,
        rho,
        lattice_factor: factor,
    })
}

fn half_sum(rank: usize, roots: &[Root]) -> Vec<Rational64> {
    (0..rank)
        .map(|i| {
            let s: i64 = roots
                .iter()
                .map(|r| i64::from(r.multiplicity) * r.coords[i])
                .sum();
            Rational64::new(s, 2)
        })
        .collect()
}

fn ip_exact(gram: &[Vec<i64>], u: &[i64], v: &[i64]) -> i64 {
    let mut s = 0;
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            s += ui * gram[i][j] * vj;
        }
    }
    s
}

impl RootSystemData {
    /// Unscaled integer inner product of two base-coordinate vectors.
    pub fn ip_int(&self, u: &[i64], v: &[i64]) -> i64 {
        ip_exact(&self.base_gram, u, v)
    }

    /// Scaled inner product of two real base-coordinate vectors.
    pub fn ip(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for (i, ui) in u.iter().enumerate() {
            for (j, vj) in v.iter().enumerate() {
                s += ui * self.base_gram[i][j] as f64 * vj;
            }
        }
        s * self.metric_scale
    }

    pub fn norm_sq(&self, v: &[i64]) -> f64 {
        self.ip_int(v, v) as f64 * self.metric_scale
    }

    /// `2 (v, alpha) / (alpha, alpha)` in exact arithmetic.
    pub fn coroot_pairing_exact(&self, v: &[Rational64], alpha: &[i64]) -> Rational64 {
        let mut s = Rational64::from_integer(0);
        for (i, vi) in v.iter().enumerate() {
            for (j, aj) in alpha.iter().enumerate() {
                s += vi * Rational64::from_integer(self.base_gram[i][j] * aj);
            }
        }
        s * 2 / Rational64::from_integer(self.ip_int(alpha, alpha))
    }

    /// Reflection in the hyperplane orthogonal to the base simple root `i`.
    pub fn reflection_matrix(&self, i: usize) -> Vec<Vec<i64>> {
        let n = self.rank;
        let aii = self.base_gram[i][i];
        // columns are images of basis vectors
        let mut m = vec![vec![0i64; n]; n];
        for j in 0..n {
            let pairing = 2 * self.base_gram[i][j] / aii;
            for k in 0..n {
                m[k][j] = i64::from(k == j) - if k == i { pairing } else { 0 };
            }
        }
        m
    }

    pub fn positive_index(&self, v: &[i64]) -> Option<usize> {
        self.positive_roots.iter().position(|r| r.coords == v)
    }

    pub fn is_root(&self, v: &[i64]) -> bool {
        let neg: Vec<i64> = v.iter().map(|c| -c).collect();
        self.positive_index(v).is_some() || self.positive_index(&neg).is_some()
    }

    /// `lambda_v = 2 <lambda, v> / <v, v>` for `lambda` given in coroot
    /// coordinates of the base simple roots.
    pub fn pairing(&self, lambda: &SpectralPoint, v: &[i64]) -> Complex64 {
        let vv = self.ip_int(v, v) as f64;
        let mut s = Complex64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            s += lambda.coords[j] * (*vj as f64 * self.base_gram[j][j] as f64);
        }
        s / vv
    }

    /// Scaled `<lambda, v>` for a real base-coordinate vector `v`.
    pub fn ip_lambda(&self, lambda: &SpectralPoint, v: &[f64]) -> Complex64 {
        let mut s = Complex64::new(0.0, 0.0);
        for (j, vj) in v.iter().enumerate() {
            s += lambda.coords[j] * (vj * self.base_gram[j][j] as f64 / 2.0);
        }
        s * self.metric_scale
    }

    /// Inverse of the scale-1 Gram matrix.
    pub fn gram_inverse(&self) -> Vec<Vec<f64>> {
        let g = &self.base_gram;
        match self.rank {
            1 => vec![vec![1.0 / g[0][0] as f64]],
            2 => {
                let det = (g[0][0] * g[1][1] - g[0][1] * g[1][0]) as f64;
                vec![
                    vec![g[1][1] as f64 / det, -g[0][1] as f64 / det],
                    vec![-g[1][0] as f64 / det, g[0][0] as f64 / det],
                ]
            }
            _ => unreachable!("rank <= 2"),
        }
    }

    /// Determinant of the scaled Gram matrix.
    pub fn det_gram(&self) -> f64 {
        let g = &self.base_gram;
        let d = match self.rank {
            1 => g[0][0] as f64,
            _ => (g[0][0] * g[1][1] - g[0][1] * g[1][0]) as f64,
        };
        d * self.metric_scale.powi(self.rank as i32)
    }

    /// `lambda` written in the base simple-root basis.
    pub fn lambda_simple_coords(&self, lambda: &SpectralPoint) -> Vec<Complex64> {
        let gi = self.gram_inverse();
        let rhs: Vec<Complex64> = (0..self.rank)
            .map(|j| lambda.coords[j] * (self.base_gram[j][j] as f64 / 2.0))
            .collect();
        (0..self.rank)
            .map(|i| (0..self.rank).map(|j| rhs[j] * gi[i][j]).sum())
            .collect()
    }

    /// `lambda(H)` where `H` is given by `y_i = alpha_i(H)`.
    pub fn lambda_at(&self, lambda: &SpectralPoint, y: &[f64]) -> Complex64 {
        self.lambda_simple_coords(lambda)
            .iter()
            .zip(y)
            .map(|(x, yi)| x * yi)
            .sum()
    }

    /// `v(H)` for a base-coordinate vector `v`.
    pub fn vector_at(v: &[i64], y: &[f64]) -> f64 {
        v.iter().zip(y).map(|(a, b)| *a as f64 * b).sum()
    }

    pub fn rho_at(&self, y: &[f64]) -> f64 {
        self.rho
            .iter()
            .zip(y)
            .map(|(r, yi)| (*r.numer() as f64 / *r.denom() as f64) * yi)
            .sum()
    }

    /// Scale-free W-invariant radius of `H`: `sqrt(2 y^T G^{-1} y)` with the
    /// scale-1 Gram matrix. For A1 this is `|alpha(H)|`.
    pub fn chamber_radius(&self, y: &[f64]) -> f64 {
        let gi = self.gram_inverse();
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += y[i] * gi[i][j] * y[j];
            }
        }
        (2.0 * s).max(0.0).sqrt()
    }

    /// Scale-free W-invariant norm of an imaginary spectral point `i t`
    /// given in coroot coordinates `t`: `sqrt(x^T G x)` with `x` the
    /// simple-root coordinates of `t` at scale 1.
    pub fn spectral_radius(&self, t: &[f64]) -> f64 {
        let gi = self.gram_inverse();
        let rhs: Vec<f64> = (0..self.rank)
            .map(|j| t[j] * self.base_gram[j][j] as f64 / 2.0)
            .collect();
        let x: Vec<f64> = (0..self.rank)
            .map(|i| (0..self.rank).map(|j| gi[i][j] * rhs[j]).sum())
            .collect();
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += x[i] * self.base_gram[i][j] as f64 * x[j];
            }
        }
        s.max(0.0).sqrt()
    }

    pub fn is_strictly_dominant(&self, y: &[f64]) -> bool {
        y.iter().all(|v| *v > 0.0)
    }

    /// Positive roots of the given length class.
    pub fn roots_of_length(&self, class: LengthClass) -> impl Iterator<Item = &Root> {
        self.positive_roots
            .iter()
            .filter(move |r| r.length == class)
    }

    pub fn dump(&self) -> RootSystemDump {
        RootSystemDump {
            kind: self.kind.to_string(),
            rank: self.rank,
            metric_scale: self.metric_scale,
            gram: self.base_gram.clone(),
            positive_roots: self.positive_roots.clone(),
            rho: self.rho.iter().map(|r| r.to_string()).collect(),
        }
    }
}

/// JSON-friendly view of a root system.
#[derive(Debug, Serialize)]
pub struct RootSystemDump {
    pub kind: String,
    pub rank: usize,
    pub metric_scale: f64,
    pub gram: Vec<Vec<i64>>,
    pub positive_roots: Vec<Root>,
    pub rho: Vec<String>,
}

/// A point of the complexified dual, stored as its coroot coordinates
/// `lambda_{alpha_i}` on the base simple roots.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralPoint {
    pub coords: Vec<Complex64>,
}

impl SpectralPoint {
    pub fn new(coords: Vec<Complex64>) -> Self {
        SpectralPoint { coords }
    }

    pub fn from_real(coords: &[f64]) -> Self {
        SpectralPoint {
            coords: coords.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        }
    }

    /// `i t` for real coroot coordinates `t`.
    pub fn imaginary(t: &[f64]) -> Self {
        SpectralPoint {
            coords: t.iter().map(|&c| Complex64::new(0.0, c)).collect(),
        }
    }

    pub fn rho(r: &RootSystemData) -> Self {
        let rho: Vec<Rational64> = r.rho.clone();
        let coords = (0..r.rank)
            .map(|i| {
                let mut e = vec![0i64; r.rank];
                e[i] = 1;
                let p = r.coroot_pairing_exact(&rho, &e);
                Complex64::new(*p.numer() as f64 / *p.denom() as f64, 0.0)
            })
            .collect();
        SpectralPoint { coords }
    }

    pub fn neg(&self) -> Self {
        SpectralPoint {
            coords: self.coords.iter().map(|c| -c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        SpectralPoint {
            coords: self.coords.iter().map(|c| c.conj()).collect(),
        }
    }

    pub fn add(&self, other: &SpectralPoint) -> Self {
        SpectralPoint {
            coords: self
                .coords
                .iter()
                .zip(&other.coords)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        SpectralPoint {
            coords: self.coords.iter().map(|c| c * s).collect(),
        }
    }

    /// G2 only: build from `(lambda_{alpha_1}, lambda_{3 alpha_1 + 2 alpha_2})`.
    /// Since `(3a1+2a2)^vee = a1^vee + 2 a2^vee` the second simple
    /// coordinate is `(l_long - l_1) / 2`.
    pub fn from_g2_orthogonal(l1: Complex64, l_long: Complex64) -> Self {
        SpectralPoint {
            coords: vec![l1, (l_long - l1) / 2.0],
        }
    }

    pub fn to_g2_orthogonal(&self) -> (Complex64, Complex64) {
        (self.coords[0], self.coords[0] + 2.0 * self.coords[1])
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeylElement {
    /// Action on base coordinates; column `j` is the image of `alpha_j`.
    pub matrix: Vec<Vec<i64>>,
    pub inverse: Vec<Vec<i64>>,
    /// Witness word `[j_1, ..., j_l]` meaning `s_{j_1} ... s_{j_l}`.
    pub word: Vec<usize>,
}

impl WeylElement {
    pub fn apply(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(&self.matrix, v)
    }

    pub fn apply_inverse(&self, v: &[i64]) -> Vec<i64> {
        mat_vec(&self.inverse, v)
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// `w lambda` in coroot coordinates: `(w lambda)_{alpha_i} = lambda_{w^{-1} alpha_i}`.
    pub fn act_spectral(&self, r: &RootSystemData, lambda: &SpectralPoint) -> SpectralPoint {
        let coords = (0..r.rank)
            .map(|i| {
                let mut e = vec![0i64; r.rank];
                e[i] = 1;
                r.pairing(lambda, &self.apply_inverse(&e))
            })
            .collect();
        SpectralPoint { coords }
    }

    /// Exact action on integer coroot coordinates (the weight lattice is W-stable).
    pub fn act_coroot_lattice(&self, r: &RootSystemData, n: &[i64]) -> Vec<i64> {
        (0..r.rank)
            .map(|i| {
                let mut e = vec![0i64; r.rank];
                e[i] = 1;
                let v = self.apply_inverse(&e);
                let vv = r.ip_int(&v, &v);
                let num: i64 = v
                    .iter()
                    .enumerate()
                    .map(|(j, vj)| vj * r.base_gram[j][j] * n[j])
                    .sum();
                debug_assert_eq!(num % vv, 0);
                num / vv
            })
            .collect()
    }

    /// `y` coordinates of `w H`: `alpha_i(w H) = (w^{-1} alpha_i)(H)`.
    pub fn act_flat(&self, rank: usize, y: &[f64]) -> Vec<f64> {
        (0..rank)
            .map(|i| {
                let mut e = vec![0i64; rank];
                e[i] = 1;
                RootSystemData::vector_at(&self.apply_inverse(&e), y)
            })
            .collect()
    }
}

fn mat_vec(m: &[Vec<i64>], v: &[i64]) -> Vec<i64> {
    m.iter()
        .map(|row| row.iter().zip(v).map(|(a, b)| a * b).sum())
        .collect()
}

fn mat_mul(a: &[Vec<i64>], b: &[Vec<i64>]) -> Vec<Vec<i64>> {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).map(|k| a[i][k] * b[k][j]).sum())
                .collect()
        })
        .collect()
}

fn identity(n: usize) -> Vec<Vec<i64>> {
    (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect()
}

#[derive(Debug, Clone)]
pub struct WeylGroup {
    pub elements: Vec<WeylElement>,
    /// Index of the longest element `w*` with `w*(Sigma+) = -Sigma+`.
    pub longest: usize,
}

impl WeylGroup {
    pub fn order(&self) -> usize {
        self.elements.len()
    }

    pub fn longest_word(&self) -> &[usize] {
        &self.elements[self.longest].word
    }

    pub fn identity(&self) -> &WeylElement {
        &self.elements[0]
    }

    /// Element represented by a word `s_{j_1} ... s_{j_l}`.
    pub fn element_of_word(&self, r: &RootSystemData, word: &[usize]) -> &WeylElement {
        let mut m = identity(r.rank);
        for &j in word {
            m = mat_mul(&m, &r.reflection_matrix(j));
        }
        self.elements
            .iter()
            .find(|e| e.matrix == m)
            .expect("group is closed")
    }

    /// Every reduced word of the longest element.
    pub fn reduced_words_of_longest(&self, r: &RootSystemData) -> Vec<Vec<usize>> {
        let m = self.longest_word().len();
        let target = &self.elements[self.longest].matrix;
        let mut out = Vec::new();
        let mut stack: Vec<(Vec<usize>, Vec<Vec<i64>>)> = vec![(vec![], identity(r.rank))];
        while let Some((word, mat)) = stack.pop() {
            if word.len() == m {
                if &mat == target {
                    out.push(word);
                }
                continue;
            }
            for j in 0..r.rank {
                if word.last() == Some(&j) {
                    continue;
                }
                let mut w = word.clone();
                w.push(j);
                stack.push((w, mat_mul(&mat, &r.reflection_matrix(j))));
            }
        }
        out.sort();
        out
    }
}

/// Breadth-first closure of the simple reflections. Elements are
/// canonicalised by their matrix; the first word found is reduced.
pub fn weyl_group(r: &RootSystemData) -> WeylGroup {
    let n = r.rank;
    let gens: Vec<Vec<Vec<i64>>> = (0..n).map(|i| r.reflection_matrix(i)).collect();
    let mut elements: Vec<WeylElement> = Vec::new();
    let mut queue: VecDeque<(Vec<Vec<i64>>, Vec<usize>)> = VecDeque::new();
    queue.push_back((identity(n), vec![]));
    while let Some((m, word)) = queue.pop_front() {
        if elements.iter().any(|e| e.matrix == m) {
            continue;
        }
        for (i, g) in gens.iter().enumerate() {
            let mut w = word.clone();
            w.push(i);
            queue.push_back((mat_mul(&m, g), w));
        }
        let mut inv = identity(n);
        for &j in word.iter().rev() {
            inv = mat_mul(&inv, &gens[j]);
        }
        elements.push(WeylElement {
            matrix: m,
            inverse: inv,
            word,
        });
    }
    let longest = elements
        .iter()
        .position(|e| {
            r.positive_roots.iter().all(|a| {
                let img: Vec<i64> = e.apply(&a.coords).iter().map(|c| -c).collect();
                r.positive_index(&img).is_some()
            })
        })
        .expect("a finite Weyl group has a longest element");
    WeylGroup { elements, longest }
}

/// `beta_k = s_{i_1} ... s_{i_{k-1}} alpha_{i_k}` for the reduced expression
/// `w* = s_{i_m} ... s_{i_1}`. The word is given left to right, so
/// `i_k = word[m - k]`.
pub fn beta_sequence_for_word(r: &RootSystemData, word: &[usize]) -> Vec<Vec<i64>> {
    let m = word.len();
    let idx: Vec<usize> = (1..=m).map(|k| word[m - k]).collect();
    (0..m)
        .map(|k| {
            let mut v = r.simple_roots[idx[k]].clone();
            for &i in idx[..k].iter().rev() {
                v = mat_vec(&r.reflection_matrix(i), &v);
            }
            v
        })
        .collect()
}

pub fn beta_sequence(r: &RootSystemData, w: &WeylGroup) -> Vec<Vec<i64>> {
    beta_sequence_for_word(r, w.longest_word())
}

/// `{w in W : w gamma in Sigma+}`, as indices into `w.elements`.
pub fn weyl_positivity_set(r: &RootSystemData, w: &WeylGroup, gamma: &[i64]) -> Result<Vec<usize>> {
    if r.positive_index(gamma).is_none() {
        return Err(Error::NotARoot(gamma.to_vec()));
    }
    Ok(w.elements
        .iter()
        .enumerate()
        .filter(|(_, e)| r.positive_index(&e.apply(gamma)).is_some())
        .map(|(i, _)| i)
        .collect())
}

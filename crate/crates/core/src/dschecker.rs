//! Exact check that `Pi2` occurs in no discrete series.
//!
//! Weights live in `i t*` and are written in the basis `(b1, b2)` of a
//! compact short root and a noncompact long root. All arithmetic is in
//! rationals.

use std::fmt;

use num_rational::Rational64;
use serde::Serialize;

use crate::{Error, Result};

pub type Weight = [Rational64; 2];

const GRAM: [[i64; 2]; 2] = [[2, -3], [-3, 6]];

fn q(n: i64, d: i64) -> Rational64 {
    Rational64::new(n, d)
}

fn w(a: i64, b: i64) -> Weight {
    [a.into(), b.into()]
}

pub fn ip(u: &Weight, v: &Weight) -> Rational64 {
    let mut s = Rational64::from_integer(0);
    for i in 0..2 {
        for j in 0..2 {
            s += u[i] * v[j] * GRAM[i][j];
        }
    }
    s
}

fn add(u: &Weight, v: &Weight) -> Weight {
    [u[0] + v[0], u[1] + v[1]]
}

fn sub(u: &Weight, v: &Weight) -> Weight {
    [u[0] - v[0], u[1] - v[1]]
}

fn scale(u: &Weight, k: Rational64) -> Weight {
    [u[0] * k, u[1] * k]
}

/// `x b1 + y b2` with rational coefficients.
pub fn show(v: &Weight) -> String {
    let term = |c: Rational64, name: &str| -> Option<String> {
        if c == 0.into() {
            None
        } else if c == 1.into() {
            Some(name.to_string())
        } else if c == (-1).into() {
            Some(format!("-{name}"))
        } else {
            Some(format!("{c}{name}"))
        }
    };
    let parts: Vec<String> = [term(v[0], "b1"), term(v[1], "b2")]
        .into_iter()
        .flatten()
        .collect();
    if parts.is_empty() {
        "0".into()
    } else {
        parts.join(" + ").replace("+ -", "- ")
    }
}

fn half_sum(roots: &[Weight]) -> Weight {
    let s = roots.iter().fold(w(0, 0), |a, b| add(&a, b));
    scale(&s, q(1, 2))
}

#[derive(Debug, Clone, Serialize)]
pub struct DeltaData {
    pub delta_plus: Vec<Weight>,
    pub delta_k_plus: Vec<Weight>,
    /// `Delta_i^+` for the three chambers inside the `Delta_K^+` chamber.
    pub chambers: Vec<Vec<Weight>>,
    pub deltas: Vec<Weight>,
    pub delta_k: Weight,
}

fn all_roots() -> Vec<Weight> {
    let pos = [w(1, 0), w(0, 1), w(1, 1), w(2, 1), w(3, 1), w(3, 2)];
    pos.iter()
        .flat_map(|r| [*r, scale(r, (-1).into())])
        .collect()
}

/// The chamber conditions beyond `Delta_K^+`-dominance, as `(root, sign)`.
fn chamber_conditions(i: usize) -> Vec<(Weight, i64)> {
    match i {
        1 => vec![(w(0, 1), 1)],
        2 => vec![(w(0, 1), -1), (w(1, 1), 1)],
        3 => vec![(w(1, 1), -1)],
        _ => unreachable!(),
    }
}

fn in_open_chamber(i: usize, p: &Weight, dk: &[Weight]) -> bool {
    dk.iter().all(|b| ip(p, b) > 0.into())
        && chamber_conditions(i)
            .iter()
            .all(|(b, s)| ip(p, b) * *s > 0.into())
}

fn positive_system(i: usize, dk: &[Weight]) -> Vec<Weight> {
    let roots = all_roots();
    for x in -12..=12 {
        for y in -12..=12 {
            let p = w(x, y);
            let regular = roots.iter().all(|r| ip(&p, r) != 0.into());
            if regular && in_open_chamber(i, &p, dk) {
                return roots.into_iter().filter(|r| ip(&p, r) > 0.into()).collect();
            }
        }
    }
    unreachable!("every chamber contains a small integral point")
}

/// Simple roots of a positive system, short first.
fn simple_roots(pos: &[Weight]) -> Vec<Weight> {
    let mut s: Vec<Weight> = pos
        .iter()
        .filter(|r| !pos.iter().any(|a| pos.iter().any(|b| add(a, b) == **r)))
        .copied()
        .collect();
    s.sort_by_key(|r| ip(r, r));
    s
}

pub fn delta_data() -> DeltaData {
    let delta_plus = vec![w(1, 0), w(0, 1), w(1, 1), w(2, 1), w(3, 1), w(3, 2)];
    let delta_k_plus = vec![w(1, 0), w(3, 2)];
    let chambers: Vec<Vec<Weight>> = (1..=3).map(|i| positive_system(i, &delta_k_plus)).collect();
    let deltas = chambers.iter().map(|c| half_sum(c)).collect();
    DeltaData {
        delta_k: half_sum(&delta_k_plus),
        delta_plus,
        delta_k_plus,
        chambers,
        deltas,
    }
}

/// `(delta_1, delta_2, delta_3, delta_K)`.
pub fn chamber_deltas() -> (Weight, Weight, Weight, Weight) {
    let d = delta_data();
    (d.deltas[0], d.deltas[1], d.deltas[2], d.delta_k)
}

/// `(3/2) b1 + b2`.
pub fn pi2_highest_weight() -> Weight {
    [q(3, 2), 1.into()]
}

/// `constant + c1 * x + c2 * y > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinearIneq {
    pub constant: Rational64,
    pub c1: Rational64,
    pub c2: Rational64,
}

impl LinearIneq {
    fn eval(&self, a: i64, b: i64) -> Rational64 {
        self.constant + self.c1 * a + self.c2 * b
    }
}

impl fmt::Display for LinearIneq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut s = format!("{}", self.constant);
        for (c, name) in [(self.c1, "c1"), (self.c2, "c2")] {
            if c == 0.into() {
                continue;
            }
            let sign = if c < 0.into() { '-' } else { '+' };
            let m = if c < 0.into() { -c } else { c };
            if m == 1.into() {
                s.push_str(&format!(" {sign} {name}"));
            } else {
                s.push_str(&format!(" {sign} {m}{name}"));
            }
        }
        write!(f, "{s} > 0")
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ChamberCertificate {
    pub chamber: usize,
    pub delta: String,
    pub simple_roots: Vec<String>,
    /// `lambda = base - c1 g1 - c2 g2` with `(g1, g2)` the simple roots.
    pub base: String,
    pub inequalities: Vec<String>,
    #[serde(skip)]
    pub raw_inequalities: Vec<LinearIneq>,
    /// Nonnegative multipliers whose combination of the inequalities has
    /// nonpositive constant and coefficients, so no `c1, c2 >= 0` satisfy them.
    pub farkas: Option<[Rational64; 2]>,
    /// Integer rounding of one inequality substituted into the other.
    pub integer_witness: Option<String>,
    pub points_checked: usize,
    pub feasible: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Certificate {
    pub bound: i64,
    pub infeasible: bool,
    pub chambers: Vec<ChamberCertificate>,
}

fn farkas(ineq: &[LinearIneq]) -> Option<[Rational64; 2]> {
    let [a, b] = [ineq[0], ineq[1]];
    let zero = Rational64::from_integer(0);
    let mut candidates = vec![[1.into(), zero], [zero, 1.into()]];
    for (x, y) in [(a.c1, b.c1), (a.c2, b.c2), (a.constant, b.constant)] {
        candidates.push([y, -x]);
        candidates.push([-y, x]);
    }
    candidates.into_iter().find(|m| {
        m[0] >= zero
            && m[1] >= zero
            && (m[0] != zero || m[1] != zero)
            && m[0] * a.constant + m[1] * b.constant <= zero
            && m[0] * a.c1 + m[1] * b.c1 <= zero
            && m[0] * a.c2 + m[1] * b.c2 <= zero
    })
}

fn integer_witness(ineq: &[LinearIneq]) -> Option<String> {
    let zero = Rational64::from_integer(0);
    for (a, b) in [(ineq[0], ineq[1]), (ineq[1], ineq[0])] {
        if !(b.c1 > zero && a.c1 < zero) {
            continue;
        }
        // b > 0 reads c1 > k + m c2
        let k = -b.constant / b.c1;
        let m = -b.c2 / b.c1;
        if !m.is_integer() {
            continue;
        }
        let k1 = k.floor() + 1;
        let sub = LinearIneq {
            constant: a.constant + a.c1 * k1,
            c1: zero,
            c2: a.c2 + a.c1 * m,
        };
        if sub.constant <= zero && sub.c2 <= zero {
            let rhs = LinearIneq {
                constant: k1,
                c1: zero,
                c2: m,
            }
            .to_string();
            return Some(format!(
                "{b} forces c1 >= {}; then {a} becomes {sub}",
                rhs.trim_end_matches(" > 0")
            ));
        }
    }
    None
}

/// Enumerate `lambda = (3/2) b1 + b2 - delta_i + 2 delta_K - c1 g1 - c2 g2`
/// for `0 <= c1, c2 <= bound` and test the open chamber conditions.
pub fn no_discrete_series_check(bound: i64) -> Result<Certificate> {
    if bound < 10 {
        return Err(Error::Unsupported(format!("bound {bound} is below 10")));
    }
    let d = delta_data();
    let mut chambers = Vec::new();
    for (idx, pos) in d.chambers.iter().enumerate() {
        let i = idx + 1;
        let simple = simple_roots(pos);
        let base = add(
            &sub(&pi2_highest_weight(), &d.deltas[idx]),
            &scale(&d.delta_k, 2.into()),
        );
        let ineq: Vec<LinearIneq> = simple
            .iter()
            .map(|g| LinearIneq {
                constant: ip(&base, g),
                c1: -ip(&simple[0], g),
                c2: -ip(&simple[1], g),
            })
            .collect();
        let mut feasible = 0;
        let mut first = None;
        for a in 0..=bound {
            for b in 0..=bound {
                if ineq.iter().all(|l| l.eval(a, b) > 0.into()) {
                    feasible += 1;
                    first.get_or_insert((a, b));
                }
            }
        }
        if let Some((a, b)) = first {
            let lam = sub(
                &base,
                &add(&scale(&simple[0], a.into()), &scale(&simple[1], b.into())),
            );
            return Err(Error::FeasiblePoint {
                chamber: i,
                lambda: show(&lam),
            });
        }
        chambers.push(ChamberCertificate {
            chamber: i,
            delta: show(&d.deltas[idx]),
            simple_roots: simple.iter().map(show).collect(),
            base: show(&base),
            inequalities: ineq.iter().map(|l| l.to_string()).collect(),
            farkas: farkas(&ineq),
            integer_witness: integer_witness(&ineq),
            raw_inequalities: ineq,
            points_checked: ((bound + 1) * (bound + 1)) as usize,
            feasible,
        });
    }
    Ok(Certificate {
        bound,
        infeasible: true,
        chambers,
    })
}

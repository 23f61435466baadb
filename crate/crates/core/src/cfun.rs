//! Harish-Chandra c-functions of the small K-types.
//!
//! Every evaluation runs through [`LogLaurent`] so that products over roots
//! are accumulated in log space and zeros or poles carry integer orders.
//! On a singular set the finite limit is taken along a fixed generic
//! direction (see [`DEFAULT_DIRECTION`]).

use std::f64::consts::{LN_2, PI};
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::Rational64;

use crate::cgamma::LogLaurent;
use crate::rootsys::{
    beta_sequence_for_word, build_root_system, weyl_group, LengthClass, RootSystemData,
    RootSystemKind, SpectralPoint,
};
use crate::{Error, Result};

/// Direction in coroot coordinates used to resolve limits on singular sets.
pub const DEFAULT_DIRECTION: [f64; 2] = [1.0, 0.414_213_562_373_095_1];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SmallKType {
    Triv,
    Pi1,
    Pi2,
}

impl SmallKType {
    pub const ALL: [SmallKType; 3] = [SmallKType::Triv, SmallKType::Pi1, SmallKType::Pi2];

    /// SL(2) weight attached to roots of the given length.
    pub fn weight(&self, class: LengthClass) -> Rational64 {
        match (self, class) {
            (SmallKType::Triv, _) => Rational64::from_integer(0),
            (SmallKType::Pi1, _) => Rational64::new(1, 2),
            (SmallKType::Pi2, LengthClass::Long) => Rational64::new(1, 2),
            (SmallKType::Pi2, LengthClass::Short) => Rational64::new(3, 2),
        }
    }

    pub fn weight_f64(&self, class: LengthClass) -> f64 {
        let w = self.weight(class);
        *w.numer() as f64 / *w.denom() as f64
    }

    pub fn name(&self) -> &'static str {
        match self {
            SmallKType::Triv => "triv",
            SmallKType::Pi1 => "pi1",
            SmallKType::Pi2 => "pi2",
        }
    }
}

impl fmt::Display for SmallKType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SmallKType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "triv" | "trivial" => Ok(SmallKType::Triv),
            "pi1" => Ok(SmallKType::Pi1),
            "pi2" => Ok(SmallKType::Pi2),
            other => Err(Error::Parse(format!("unknown K-type `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CFunctionValue {
    pub value: Complex64,
    pub is_pole: bool,
    pub is_zero: bool,
    /// Pole order; negative values are orders of vanishing.
    pub order: i32,
}

impl CFunctionValue {
    pub fn from_laurent(l: LogLaurent) -> Self {
        let order = -l.order;
        CFunctionValue {
            value: l.limit(),
            is_pole: order > 0,
            is_zero: order < 0,
            order,
        }
    }

    pub fn finite(&self) -> Option<Complex64> {
        (!self.is_pole).then_some(self.value)
    }
}

fn sl2_laurent(mu: Complex64, nu: f64, speed: f64) -> Result<LogLaurent> {
    let pow = LogLaurent {
        log_lead: (1.0 - mu) * LN_2,
        order: 0,
    };
    let num = LogLaurent::gamma(mu, speed)?;
    let d1 = LogLaurent::gamma((mu + 1.0 + nu) / 2.0, speed / 2.0)?;
    let d2 = LogLaurent::gamma((mu + 1.0 - nu) / 2.0, speed / 2.0)?;
    Ok(pow.mul(num).div(d1).div(d2))
}

/// Rank-one factor `2^(1-mu) Gamma(mu) / (Gamma((mu+1+nu)/2) Gamma((mu+1-nu)/2))`.
pub fn sl2_factor(mu: Complex64, nu: Rational64) -> CFunctionValue {
    let nu = *nu.numer() as f64 / *nu.denom() as f64;
    CFunctionValue::from_laurent(sl2_laurent(mu, nu, 1.0).expect("nonzero speed"))
}

/// The rank-one factor after the duplication formula has collapsed its two
/// denominator Gammas, for the weights that occur (`0`, `1/2`, `3/2`).
pub fn sl2_factor_collapsed(mu: Complex64, nu: Rational64, speed: f64) -> Result<LogLaurent> {
    let half = Rational64::new(1, 2);
    let lpi = -0.5 * PI.ln();
    if nu == Rational64::from_integer(0) {
        let g = LogLaurent::gamma(mu / 2.0, speed / 2.0)?;
        let h = LogLaurent::gamma(mu / 2.0 + 0.5, speed / 2.0)?;
        Ok(LogLaurent::constant(Complex64::new(lpi.exp(), 0.0))
            .mul(g)
            .div(h))
    } else if nu == half {
        let g = LogLaurent::gamma(mu, speed)?;
        let h = LogLaurent::gamma(mu + 0.5, speed)?;
        Ok(
            LogLaurent::constant(Complex64::new((0.5 * LN_2 + lpi).exp(), 0.0))
                .mul(g)
                .div(h),
        )
    } else if nu == Rational64::new(3, 2) {
        let lin = LogLaurent::linear(mu - 0.5, speed)?;
        let g = LogLaurent::gamma(mu, speed)?;
        let h = LogLaurent::gamma(mu + 1.5, speed)?;
        Ok(
            LogLaurent::constant(Complex64::new((0.5 * LN_2 + lpi).exp(), 0.0))
                .mul(lin)
                .mul(g)
                .div(h),
        )
    } else {
        Err(Error::Unsupported(format!("weight {nu}")))
    }
}

/// `c0 = 2 pi^2` for G2; 1 for the rank-one test system.
pub fn normalization_c0() -> f64 {
    2.0 * PI * PI
}

pub fn normalization_c0_for(kind: &RootSystemKind) -> f64 {
    match kind.base() {
        RootSystemKind::G2 => normalization_c0(),
        _ => 1.0,
    }
}

/// Solves `c0 * prod_k c_{beta_k}(rho) = 1` for the trivial K-type.
pub fn verify_c0() -> f64 {
    let r = build_root_system(RootSystemKind::G2, 1.0).expect("G2");
    let rho = SpectralPoint::rho(&r);
    let f = CFunction::new(&r, SmallKType::Triv).with_c0(1.0);
    1.0 / f.eval(&rho).value.re
}

/// The product formula `c0 prod_k c_{beta_k}(lambda)` with cached root data.
#[derive(Debug, Clone)]
pub struct CFunction {
    pub pi: SmallKType,
    pub c0: f64,
    /// `(beta, weight, |beta|^2 / |alpha_j|^2 ratios folded into coefficients)`.
    factors: Vec<(Vec<f64>, f64)>,
    pub direction: Vec<f64>,
}

impl CFunction {
    pub fn new(r: &RootSystemData, pi: SmallKType) -> Self {
        let w = weyl_group(r);
        Self::with_word(r, pi, w.longest_word())
    }

    pub fn with_word(r: &RootSystemData, pi: SmallKType, word: &[usize]) -> Self {
        let betas = beta_sequence_for_word(r, word);
        let factors = betas
            .iter()
            .map(|b| {
                let idx = r
                    .positive_index(b)
                    .expect("beta sequence consists of positive roots");
                (
                    coroot_coefficients(r, b),
                    pi.weight_f64(r.positive_roots[idx].length),
                )
            })
            .collect();
        CFunction {
            pi,
            c0: normalization_c0_for(&r.kind),
            factors,
            direction: DEFAULT_DIRECTION[..r.rank].to_vec(),
        }
    }

    pub fn with_c0(mut self, c0: f64) -> Self {
        self.c0 = c0;
        self
    }

    fn laurent(&self, lambda: &SpectralPoint, sign: f64) -> LogLaurent {
        let mut acc = LogLaurent::constant(Complex64::new(self.c0, 0.0));
        for (coef, nu) in &self.factors {
            let mu: Complex64 = coef.iter().zip(&lambda.coords).map(|(c, l)| l * c).sum();
            let speed: f64 = coef.iter().zip(&self.direction).map(|(c, d)| c * d).sum();
            let f = sl2_laurent(mu * sign, *nu, speed * sign).expect("generic direction");
            acc = acc.mul(f);
        }
        acc
    }

    pub fn eval(&self, lambda: &SpectralPoint) -> CFunctionValue {
        CFunctionValue::from_laurent(self.laurent(lambda, 1.0))
    }

    /// `1 / (c(lambda) c(-lambda))`.
    pub fn mu(&self, lambda: &SpectralPoint) -> CFunctionValue {
        let l = self.laurent(lambda, 1.0).mul(self.laurent(lambda, -1.0));
        CFunctionValue::from_laurent(LogLaurent::one().div(l))
    }

    /// `|c(i t)|^{-2}`; zero on walls, where `c` has a pole.
    pub fn density(&self, t: &[f64]) -> f64 {
        let v = self.mu(&SpectralPoint::imaginary(t));
        if v.is_pole {
            f64::INFINITY
        } else {
            v.value.re
        }
    }
}

/// Coefficients `k_j` with `lambda_beta = sum_j k_j lambda_{alpha_j}`.
pub fn coroot_coefficients(r: &RootSystemData, beta: &[i64]) -> Vec<f64> {
    let bb = r.ip_int(beta, beta) as f64;
    beta.iter()
        .enumerate()
        .map(|(j, b)| *b as f64 * r.base_gram[j][j] as f64 / bb)
        .collect()
}

pub fn gk_product(r: &RootSystemData, pi: SmallKType, lambda: &SpectralPoint) -> CFunctionValue {
    CFunction::new(r, pi).eval(lambda)
}

fn g2() -> RootSystemData {
    build_root_system(RootSystemKind::G2, 1.0).expect("G2")
}

fn closed_form_laurent(pi: SmallKType, lambda: &SpectralPoint, dir: &[f64]) -> Result<LogLaurent> {
    let r = g2();
    let d = SpectralPoint::from_real(dir);
    let mut acc = LogLaurent::constant(Complex64::new(
        match pi {
            SmallKType::Triv => 2.0 / PI,
            _ => 16.0 / PI,
        },
        0.0,
    ));
    for root in &r.positive_roots {
        let l = r.pairing(lambda, &root.coords);
        let s = r.pairing(&d, &root.coords).re;
        let f = match (pi, root.length) {
            (SmallKType::Triv, _) => {
                LogLaurent::gamma(l / 2.0, s / 2.0)?.div(LogLaurent::gamma(l / 2.0 + 0.5, s / 2.0)?)
            }
            (SmallKType::Pi1, _) | (SmallKType::Pi2, LengthClass::Long) => {
                LogLaurent::gamma(l, s)?.div(LogLaurent::gamma(l + 0.5, s)?)
            }
            (SmallKType::Pi2, LengthClass::Short) => LogLaurent::linear(l - 0.5, s)?
                .mul(LogLaurent::gamma(l, s)?)
                .div(LogLaurent::gamma(l + 1.5, s)?),
        };
        acc = acc.mul(f);
    }
    Ok(acc)
}

/// The closed forms for G2, written directly in the six coroot pairings.
pub fn closed_form_c(pi: SmallKType, lambda: &SpectralPoint) -> CFunctionValue {
    CFunctionValue::from_laurent(
        closed_form_laurent(pi, lambda, &DEFAULT_DIRECTION).expect("generic direction"),
    )
}

/// `(c_l, c_s)` with `c^{pi2} = (16/pi) c_l c_s`.
pub fn c_split_long_short(lambda: &SpectralPoint) -> (Complex64, Complex64) {
    let r = g2();
    let d = SpectralPoint::from_real(&DEFAULT_DIRECTION);
    let mut cl = LogLaurent::one();
    let mut cs = LogLaurent::one();
    for root in &r.positive_roots {
        let l = r.pairing(lambda, &root.coords);
        let s = r.pairing(&d, &root.coords).re;
        match root.length {
            LengthClass::Long => {
                cl = cl
                    .mul(LogLaurent::gamma(l, s).expect("speed"))
                    .div(LogLaurent::gamma(l + 0.5, s).expect("speed"));
            }
            LengthClass::Short => {
                cs = cs
                    .mul(LogLaurent::linear(l - 0.5, s).expect("speed"))
                    .mul(LogLaurent::gamma(l, s).expect("speed"))
                    .div(LogLaurent::gamma(l + 1.5, s).expect("speed"));
            }
        }
    }
    (cl.limit(), cs.limit())
}

pub fn mu_density(r: &RootSystemData, pi: SmallKType, lambda: &SpectralPoint) -> CFunctionValue {
    CFunction::new(r, pi).mu(lambda)
}

pub fn plancherel_density(r: &RootSystemData, pi: SmallKType, t: &[f64]) -> f64 {
    CFunction::new(r, pi).density(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn rel(a: Complex64, b: Complex64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn sl2_values() {
        let v = sl2_factor(c(1.0, 0.0), Rational64::from_integer(0));
        assert!((v.value - c(1.0, 0.0)).norm() < 1e-14);
        let v = sl2_factor(c(1.0, 0.0), Rational64::new(1, 2));
        assert!((v.value.re - 0.900_316_316_157_106).abs() < 1e-12);
        for mu in [c(0.7, 0.0), c(1.3, 0.4)] {
            let a = sl2_factor(mu, Rational64::new(1, 2)).value;
            let b = sl2_factor_collapsed(mu, Rational64::new(1, 2), 1.0)
                .unwrap()
                .limit();
            assert!(rel(a, b) < 1e-12);
        }
    }

    #[test]
    fn nu_symmetry() {
        for mu in [c(0.3, 1.0), c(-2.7, 0.2), c(5.0, -3.0)] {
            for nu in [Rational64::new(1, 2), Rational64::new(3, 2)] {
                let a = sl2_factor(mu, nu).value;
                let b = sl2_factor(mu, -nu).value;
                assert!(rel(a, b) < 1e-13);
            }
        }
    }

    #[test]
    fn normalization() {
        let r = g2();
        let rho = SpectralPoint::rho(&r);
        assert!((gk_product(&r, SmallKType::Triv, &rho).value - c(1.0, 0.0)).norm() < 1e-12);
        assert!((closed_form_c(SmallKType::Triv, &rho).value - c(1.0, 0.0)).norm() < 1e-12);
        assert!((verify_c0() / normalization_c0() - 1.0).abs() < 1e-10);
        let p = normalization_c0() * PI.powf(-3.0);
        assert!((p - 2.0 / PI).abs() < 1e-14);
        let p = normalization_c0() * 8.0 * PI.powf(-3.0);
        assert!((p - 16.0 / PI).abs() < 1e-13);
    }

    #[test]
    fn zeros_and_poles() {
        let r = g2();
        // lambda_{alpha_1} = 1/2, generic second coordinate
        let lam = SpectralPoint::new(vec![c(0.5, 0.0), c(0.37, 0.21)]);
        let v = gk_product(&r, SmallKType::Pi2, &lam);
        assert!(v.is_zero && v.value == c(0.0, 0.0));
        // lambda_{alpha_1 + alpha_2} = l1 + 3 l2 = 1/2
        let lam = SpectralPoint::new(vec![c(0.2, 0.0), c(0.1, 0.0)]);
        assert!(closed_form_c(SmallKType::Pi2, &lam).is_zero);
        let lam = SpectralPoint::new(vec![c(0.0, 0.0), c(0.4, 0.3)]);
        let v = closed_form_c(SmallKType::Triv, &lam);
        assert!(v.is_pole && v.order == 1);
    }

    #[test]
    fn product_matches_closed_form() {
        let r = g2();
        let lam = SpectralPoint::new(vec![c(0.8, 0.3), c(1.1, -0.2)]);
        for pi in SmallKType::ALL {
            let a = gk_product(&r, pi, &lam).value;
            let b = closed_form_c(pi, &lam).value;
            assert!(rel(a, b) < 1e-10, "{pi}");
        }
    }

    #[test]
    fn split_recombines() {
        let lam = SpectralPoint::new(vec![c(0.6, -0.2), c(0.9, 0.5)]);
        let (cl, cs) = c_split_long_short(&lam);
        let full = closed_form_c(SmallKType::Pi2, &lam).value;
        assert!((cl * cs * 16.0 / PI - full).norm() < 1e-12 * full.norm());
        // lambda_{2 alpha_1 + alpha_2} = 2 l1 + 3 l2 = 1/2
        let lam = SpectralPoint::new(vec![c(0.1, 0.0), c(0.1, 0.0)]);
        let (_, cs) = c_split_long_short(&lam);
        assert_eq!(cs, c(0.0, 0.0));
    }

    #[test]
    fn density_vanishes_at_origin_and_is_nonnegative() {
        let r = g2();
        for pi in SmallKType::ALL {
            assert_eq!(plancherel_density(&r, pi, &[0.0, 0.0]), 0.0);
        }
        let f = CFunction::new(&r, SmallKType::Pi2);
        for i in 0..20 {
            for j in 0..20 {
                let t = [-3.0 + 0.31 * i as f64, -2.0 + 0.23 * j as f64];
                assert!(f.density(&t) >= 0.0);
            }
        }
    }

    #[test]
    fn a1_density_closed_form() {
        let r = build_root_system(RootSystemKind::A1, 1.0).unwrap();
        let f = CFunction::new(&r, SmallKType::Triv);
        for t in [0.3, 1.7, 12.0] {
            let expect = PI * (t / 2.0) * (PI * t / 2.0).tanh();
            assert!((f.density(&[t]) / expect - 1.0).abs() < 1e-12);
        }
    }
}

//! Complex Gamma function with pole bookkeeping.
//!
//! Values come from a Lanczos approximation (g = 7, nine coefficients) on
//! `Re z >= 1/2` and reflection or upward recurrence elsewhere.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::{Error, Result};

/// Absolute distance to a nonpositive integer below which a point is a pole.
pub const POLE_TOL: f64 = 1e-12;

const LANCZOS_G: f64 = 7.0;
#[allow(clippy::excessive_precision)]
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

fn lanczos_ln(z: Complex64) -> Complex64 {
    let z = z - 1.0;
    let mut x = Complex64::new(LANCZOS[0], 0.0);
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        x += *c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    HALF_LN_2PI + (z + 0.5) * t.ln() - t + x.ln()
}

/// If `z` is within [`POLE_TOL`] of `-n` for some integer `n >= 0`, return `n`.
pub fn pole_index(z: Complex64) -> Option<i64> {
    if z.re > 0.5 {
        return None;
    }
    let n = (-z.re).round();
    if (z.re + n).abs() <= POLE_TOL && z.im.abs() <= POLE_TOL {
        Some(n as i64)
    } else {
        None
    }
}

/// `ln sin(pi z)` modulo `2 pi i`, accurate near the zeros and for large `|Im z|`.
pub fn ln_sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let w = z - n;
    let sign = if (n as i64).rem_euclid(2) == 1 {
        Complex64::new(0.0, PI)
    } else {
        Complex64::new(0.0, 0.0)
    };
    let i = Complex64::i();
    let body = if w.im > 1.0 {
        -i * PI * w + ((i * 2.0 * PI * w).exp() - 1.0).ln() - (2.0 * i).ln()
    } else if w.im < -1.0 {
        i * PI * w + ((1.0 - (-i * 2.0 * PI * w).exp()) / (2.0 * i)).ln()
    } else {
        (w * PI).sin().ln()
    };
    body + sign
}

/// `sin(pi z)` with argument reduction so that integers give exact zeros.
pub fn sin_pi(z: Complex64) -> Complex64 {
    let n = z.re.round();
    let w = z - n;
    let s = (w * PI).sin();
    if (n as i64).rem_euclid(2) == 1 {
        -s
    } else {
        s
    }
}

/// Principal branch of `ln Gamma(z)`: real on the positive axis and
/// continuous off `(-inf, 0]`.
pub fn log_gamma(z: Complex64) -> Result<Complex64> {
    if let Some(n) = pole_index(z) {
        return Err(Error::PoleProximity {
            pole: -n,
            distance: (z + n as f64).norm(),
        });
    }
    if z.re >= 0.5 {
        return Ok(lanczos_ln(z));
    }
    let shift = (0.5 - z.re).ceil() as usize;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..shift {
        acc += (z + k as f64).ln();
    }
    Ok(lanczos_ln(z + shift as f64) - acc)
}

/// `ln Gamma(z)` up to an additive multiple of `2 pi i`. Cheaper than
/// [`log_gamma`] far to the left; use it when only `exp` of the result matters.
pub fn ln_gamma_fast(z: Complex64) -> Result<Complex64> {
    if let Some(n) = pole_index(z) {
        return Err(Error::PoleProximity {
            pole: -n,
            distance: (z + n as f64).norm(),
        });
    }
    if z.re >= 0.5 {
        Ok(lanczos_ln(z))
    } else {
        Ok(PI.ln() - ln_sin_pi(z) - lanczos_ln(1.0 - z))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaValue {
    pub value: Complex64,
    pub is_pole: bool,
    pub pole_order: u32,
    /// Order of vanishing; only ratios can vanish.
    pub zero_order: u32,
}

impl GammaValue {
    fn finite(value: Complex64) -> Self {
        GammaValue {
            value,
            is_pole: false,
            pole_order: 0,
            zero_order: 0,
        }
    }

    fn pole(order: u32) -> Self {
        GammaValue {
            value: Complex64::new(f64::INFINITY, 0.0),
            is_pole: true,
            pole_order: order,
            zero_order: 0,
        }
    }

    fn zero(order: u32) -> Self {
        GammaValue {
            value: Complex64::new(0.0, 0.0),
            is_pole: false,
            pole_order: 0,
            zero_order: order,
        }
    }
}

pub fn gamma(z: Complex64) -> GammaValue {
    match ln_gamma_fast(z) {
        Ok(l) => GammaValue::finite(l.exp()),
        Err(_) => GammaValue::pole(1),
    }
}

/// `Gamma(a) / Gamma(b)`. When both arguments sit on poles the value is the
/// ratio of residues, `Gamma(-n)/Gamma(-m) -> (-1)^(n-m) m!/n!`.
pub fn gamma_ratio(a: Complex64, b: Complex64) -> GammaValue {
    match (pole_index(a), pole_index(b)) {
        (None, None) => {
            let l = ln_gamma_fast(a).expect("not a pole") - ln_gamma_fast(b).expect("not a pole");
            GammaValue::finite(l.exp())
        }
        (Some(_), None) => GammaValue::pole(1),
        (None, Some(_)) => GammaValue::zero(1),
        (Some(n), Some(m)) => {
            let mag = (lanczos_ln(Complex64::new(m as f64 + 1.0, 0.0))
                - lanczos_ln(Complex64::new(n as f64 + 1.0, 0.0)))
            .exp();
            let sign = if (n - m).rem_euclid(2) == 1 {
                -1.0
            } else {
                1.0
            };
            GammaValue::finite(mag * sign)
        }
    }
}

/// `1/Gamma(z)`, entire; exact zeros at nonpositive integers.
pub fn reciprocal_gamma(z: Complex64) -> Complex64 {
    if z.re >= 0.5 {
        return (-lanczos_ln(z)).exp();
    }
    let s = sin_pi(z);
    if s == Complex64::new(0.0, 0.0) {
        return s;
    }
    (ln_sin_pi(z) + lanczos_ln(1.0 - z) - PI.ln()).exp()
}

/// Leading behaviour `exp(log_lead) * eps^order` of a function evaluated at
/// `a + s eps` as `eps -> 0`. Products of these track pole and zero orders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLaurent {
    pub log_lead: Complex64,
    pub order: i32,
}

impl LogLaurent {
    pub fn one() -> Self {
        LogLaurent {
            log_lead: Complex64::new(0.0, 0.0),
            order: 0,
        }
    }

    /// `Gamma(a + speed eps)`.
    pub fn gamma(a: Complex64, speed: f64) -> Result<Self> {
        match pole_index(a) {
            None => Ok(LogLaurent {
                log_lead: ln_gamma_fast(a)?,
                order: 0,
            }),
            Some(n) => {
                if speed == 0.0 {
                    return Err(Error::PoleOrderMismatch);
                }
                // Gamma(-n + x) ~ (-1)^n / (n! x)
                let mut lead = -lanczos_ln(Complex64::new(n as f64 + 1.0, 0.0))
                    - Complex64::new(speed, 0.0).ln();
                if n % 2 == 1 {
                    lead += Complex64::new(0.0, PI);
                }
                Ok(LogLaurent {
                    log_lead: lead,
                    order: -1,
                })
            }
        }
    }

    /// The affine function `value + speed eps`.
    pub fn linear(value: Complex64, speed: f64) -> Result<Self> {
        if value.norm() <= POLE_TOL {
            if speed == 0.0 {
                return Err(Error::PoleOrderMismatch);
            }
            Ok(LogLaurent {
                log_lead: Complex64::new(speed, 0.0).ln(),
                order: 1,
            })
        } else {
            Ok(LogLaurent {
                log_lead: value.ln(),
                order: 0,
            })
        }
    }

    pub fn constant(value: Complex64) -> Self {
        LogLaurent {
            log_lead: value.ln(),
            order: 0,
        }
    }

    pub fn mul(self, o: Self) -> Self {
        LogLaurent {
            log_lead: self.log_lead + o.log_lead,
            order: self.order + o.order,
        }
    }

    pub fn div(self, o: Self) -> Self {
        LogLaurent {
            log_lead: self.log_lead - o.log_lead,
            order: self.order - o.order,
        }
    }

    /// Limit as `eps -> 0`: finite for order 0, zero above, infinite below.
    pub fn limit(&self) -> Complex64 {
        match self.order {
            0 => self.log_lead.exp(),
            o if o > 0 => Complex64::new(0.0, 0.0),
            _ => Complex64::new(f64::INFINITY, 0.0),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn special_values() {
        assert!((log_gamma(c(0.5, 0.0)).unwrap() - c(PI.sqrt().ln(), 0.0)).norm() < 1e-14);
        assert!(log_gamma(c(1.0, 0.0)).unwrap().norm() < 1e-14);
        let r = gamma_ratio(c(1.0, 0.0), c(1.5, 0.0));
        assert!((r.value.re - std::f64::consts::FRAC_2_SQRT_PI).abs() < 1e-13);
        assert_eq!(reciprocal_gamma(c(0.0, 0.0)), c(0.0, 0.0));
        assert_eq!(reciprocal_gamma(c(-3.0, 0.0)), c(0.0, 0.0));
        assert!((reciprocal_gamma(c(0.5, 0.0)).re - 1.0 / PI.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn factorials_on_real_axis() {
        let mut f = 1.0f64;
        for n in 1..25 {
            f *= n as f64;
            let g = log_gamma(c(n as f64 + 1.0, 0.0)).unwrap().exp().re;
            assert!((g / f - 1.0).abs() < 1e-13, "n = {n}");
        }
        // negative non-integer: Gamma(-2.5) = -8 sqrt(pi) / 15
        let g = log_gamma(c(-2.5, 0.0)).unwrap().exp();
        assert!((g.re + 8.0 * PI.sqrt() / 15.0).abs() < 1e-13);
    }

    #[test]
    fn recurrence_off_axis() {
        let z = c(3.7, 2.1);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        assert!(d.norm() < 1e-12);
        let z = c(-4.3, 0.7);
        let d = log_gamma(z + 1.0).unwrap() - log_gamma(z).unwrap() - z.ln();
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn principal_branch_is_continuous_across_real_axis() {
        let above = log_gamma(c(2.5, 1e-9)).unwrap();
        let below = log_gamma(c(2.5, -1e-9)).unwrap();
        assert!((above - below).norm() < 1e-8);
        let z = c(-3.3, 5.0);
        assert!(
            (log_gamma(z).unwrap().exp() - ln_gamma_fast(z).unwrap().exp()).norm()
                < 1e-12 * ln_gamma_fast(z).unwrap().exp().norm()
        );
    }

    #[test]
    fn pole_handling() {
        assert!(matches!(
            log_gamma(c(-2.0, 0.0)),
            Err(Error::PoleProximity { pole: -2, .. })
        ));
        let r = gamma_ratio(c(-1.0, 0.0), c(-0.5, 0.0));
        assert!(r.is_pole);
        let r = gamma_ratio(c(0.5, 0.0), c(-3.0, 0.0));
        assert_eq!(r.value, c(0.0, 0.0));
        assert_eq!(r.zero_order, 1);
        let r = gamma_ratio(c(-2.0, 0.0), c(-1.0, 0.0));
        assert!((r.value.re + 0.5).abs() < 1e-15);
        let eps = 1e-6;
        let brute = gamma(c(-2.0 + eps, 0.0)).value / gamma(c(-1.0 + eps, 0.0)).value;
        assert!((brute.re + 0.5).abs() < 1e-5);
    }

    #[test]
    fn laurent_orders() {
        // Gamma(x)/Gamma(x/2) at x = 0 along x = eps: (1/eps)/(2/eps) = 1/2
        let num = LogLaurent::gamma(c(0.0, 0.0), 1.0).unwrap();
        let den = LogLaurent::gamma(c(0.0, 0.0), 0.5).unwrap();
        assert!((num.div(den).limit() - c(0.5, 0.0)).norm() < 1e-15);
        // x Gamma(x) -> 1
        let lin = LogLaurent::linear(c(0.0, 0.0), 1.0).unwrap();
        assert!((lin.mul(num).limit() - c(1.0, 0.0)).norm() < 1e-15);
        // Gamma(-1 + eps) ~ -1/eps
        let g = LogLaurent::gamma(c(-1.0, 0.0), 1.0).unwrap();
        assert!((g.mul(lin).limit() + c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn ln_sin_pi_large_imaginary() {
        for z in [c(0.3, 40.0), c(-7.2, -35.0), c(0.4, -1.5)] {
            let direct = (z * PI).sin();
            let via = ln_sin_pi(z).exp();
            assert!((via - direct).norm() <= 1e-12 * direct.norm(), "{z}");
        }
        let z = c(3.0, 0.0) + c(1e-9, 0.0);
        let w = z.re - 3.0;
        let expect = -(PI * w).sin();
        assert!((ln_sin_pi(z).exp().re / expect - 1.0).abs() < 1e-12);
    }
}

//! Residue calculus for the `Pi2` inversion on G2.
//!
//! Points of `a*_C` are written in coroot coordinates `(lambda_{a1}, lambda_{a2})`
//! with `a1` short. On the singular line `lambda_{2a1+a2} = -1/2` the free
//! coordinate is `lambda_{a2}`, and `lambda_{a1} = (z - 3 lambda_{a2}) / 2`
//! where `z = lambda_{2a1+a2}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use serde::Serialize;

use crate::cfun::{c_split_long_short, CFunction, SmallKType};
use crate::rootsys::{
    weyl_group, weyl_positivity_set, LengthClass, RootSystemData, RootSystemKind, SpectralPoint,
};
use crate::transform::{inverse_continuous, Estimate, InverseSpec, Spectrum, SphericalProvider};
use crate::{Error, Result};

/// The root `2 a1 + a2` whose line carries the merged residual spectrum.
pub const LINE_ROOT: [i64; 2] = [2, 1];

/// Tolerance for the closed forms of the residue lemma.
pub const RESIDUE_TOL: f64 = 1e-8;
/// Tolerance for agreement across `W^{2a1+a2}`.
pub const SPREAD_TOL: f64 = 1e-9;

const EPS_LIMIT: [f64; 2] = [1e-3, 5e-4];
const CONTOUR_RADIUS: f64 = 1e-2;
const CONTOUR_NODES: usize = 64;

/// The affine line `lambda_root = value`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SingularLine {
    pub root: Vec<i64>,
    pub value: f64,
}

fn require_g2(r: &RootSystemData) -> Result<()> {
    if r.kind != RootSystemKind::G2 {
        return Err(Error::Unsupported(format!(
            "residue calculus is implemented for g2, not {}",
            r.kind
        )));
    }
    Ok(())
}

/// Lines `lambda_beta = -1/2`, `beta` short positive, along which
/// `c^pi(-lambda)^{-1}` is singular for `Re lambda` in the positive chamber.
pub fn singular_lines(r: &RootSystemData, pi: SmallKType) -> Vec<SingularLine> {
    if pi != SmallKType::Pi2 {
        return Vec::new();
    }
    r.roots_of_length(LengthClass::Short)
        .map(|a| SingularLine {
            root: a.coords.clone(),
            value: -0.5,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RegionLabel {
    I,
    II,
    III,
    IV,
}

/// Which of the four regions of `-closure(a+*)` cut out by the singular
/// lines contains `eta` (coroot coordinates).
pub fn region_of(r: &RootSystemData, eta: &[f64]) -> Result<RegionLabel> {
    require_g2(r)?;
    let bad = || Error::BadRegionPoint(eta.to_vec());
    if eta.len() != 2 || eta.iter().any(|v| !v.is_finite() || *v > 0.0) {
        return Err(bad());
    }
    let p = SpectralPoint::from_real(eta);
    let at = |root: [i64; 2]| r.pairing(&p, &root).re;
    let (l1, l2) = (eta[0], eta[1]);
    let l12 = at([1, 1]);
    let l212 = at([2, 1]);
    if [l1, l12, l212].iter().any(|v| *v == -0.5) {
        return Err(bad());
    }
    if l1 < -0.5 && l2 <= 0.0 {
        Ok(RegionLabel::I)
    } else if -0.5 < l1 && l1 <= 0.0 && l12 < -0.5 {
        Ok(RegionLabel::II)
    } else if -0.5 < l12 && l212 < -0.5 && l2 <= 0.0 {
        Ok(RegionLabel::III)
    } else if l212 > -0.5 && l1 <= 0.0 && l2 <= 0.0 {
        Ok(RegionLabel::IV)
    } else {
        Err(bad())
    }
}

/// The point with `lambda_{2a1+a2} = z` and `lambda_{a2} = l2`.
pub fn line_point(l2: Complex64, z: Complex64) -> SpectralPoint {
    SpectralPoint::new(vec![(z - 3.0 * l2) / 2.0, l2])
}

/// `c1 = |a1| |3a1 + 2a2| / 4` in the active metric.
pub fn c1(r: &RootSystemData) -> f64 {
    (r.norm_sq(&r.simple_roots[0]) * r.norm_sq(&[3, 2])).sqrt() / 4.0
}

/// `(4 l^3 - l) sin(pi l) / (16 cos(pi l))`.
pub fn restemp0(l2: Complex64) -> Complex64 {
    let pl = l2 * PI;
    (4.0 * l2 * l2 * l2 - l2) * pl.sin() / (16.0 * pl.cos())
}

/// `(36 l^2 - 1) / (32 pi)`.
pub fn restemp(l2: Complex64) -> Complex64 {
    (36.0 * l2 * l2 - 1.0) / (32.0 * PI)
}

/// `p(l) = pi (36 l^2 - 1)(4 l^3 - l) sin(pi l) / (2^17 cos(pi l))`.
pub fn residue_density_p(l2: Complex64) -> Complex64 {
    let pl = l2 * PI;
    PI * (36.0 * l2 * l2 - 1.0) * (4.0 * l2 * l2 * l2 - l2) * pl.sin() / (2f64.powi(17) * pl.cos())
}

/// The same density written through `s = l / i`:
/// `-2^-17 pi (36 s^2 + 1)(4 s^2 + 1) s tanh(pi s)`.
pub fn residue_density_p_tanh(l2: Complex64) -> Complex64 {
    let s = l2 / Complex64::i();
    -(PI / 2f64.powi(17)) * (36.0 * s * s + 1.0) * (4.0 * s * s + 1.0) * s * (PI * s).tanh()
}

/// Effective weight `-(c1 / 4 pi) p(i s)` of the line integral against `ds`.
pub fn line_weight(r: &RootSystemData, s: f64) -> f64 {
    -(c1(r) / (4.0 * PI)) * residue_density_p(Complex64::new(0.0, s)).re
}

/// A constant `coef * 2^pow2 * pi^powpi` with rational exponents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Monomial {
    pub coef: Rational64,
    pub pow2: Rational64,
    pub powpi: Rational64,
}

impl Monomial {
    pub fn new(coef: i64, pow2: i64, powpi: i64) -> Self {
        Monomial {
            coef: coef.into(),
            pow2: pow2.into(),
            powpi: powpi.into(),
        }
    }

    pub fn mul(self, o: Monomial) -> Monomial {
        Monomial {
            coef: self.coef * o.coef,
            pow2: self.pow2 + o.pow2,
            powpi: self.powpi + o.powpi,
        }
    }

    pub fn powi(self, n: i64) -> Monomial {
        let mut acc = Monomial::new(1, 0, 0);
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    pub fn to_f64(self) -> f64 {
        let r = |q: Rational64| *q.numer() as f64 / *q.denom() as f64;
        r(self.coef) * 2f64.powf(r(self.pow2)) * PI.powf(r(self.powpi))
    }
}

impl std::fmt::Display for Monomial {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} * 2^({}) * pi^({})", self.coef, self.pow2, self.powpi)
    }
}

/// Constant of `p` assembled from `(pi/16)^2`, the `1/16` of `restemp0`
/// and the `1/(32 pi)` of `restemp`.
pub fn p_constant() -> Monomial {
    let pi_over_16 = Monomial::new(1, -4, 1);
    let r0 = Monomial::new(1, -4, 0);
    let r1 = Monomial::new(1, -5, -1);
    pi_over_16.powi(2).mul(r0).mul(r1)
}

/// `(1/2pi i) oint f dz` on the circle `|z - center| = radius` by the
/// trapezoid rule.
pub fn contour_residue(
    f: impl Fn(Complex64) -> Complex64,
    center: Complex64,
    radius: f64,
    nodes: usize,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..nodes {
        let d = Complex64::from_polar(radius, 2.0 * PI * k as f64 / nodes as f64);
        acc += f(center + d) * d;
    }
    acc / nodes as f64
}

/// `lim_{z -> center} (z - center) f(z)` from symmetric samples, with one
/// Richardson step.
pub fn limit_residue(f: impl Fn(Complex64) -> Complex64, center: Complex64) -> Complex64 {
    let a = |e: f64| {
        let d = Complex64::new(e, 0.0);
        (f(center + d) * d + f(center - d) * (-d)) / 2.0
    };
    let (e0, e1) = (EPS_LIMIT[0], EPS_LIMIT[1]);
    let q = (e0 / e1).powi(2);
    (q * a(e1) - a(e0)) / (q - 1.0)
}

fn cs_inv(lambda: &SpectralPoint) -> Complex64 {
    1.0 / c_split_long_short(lambda).1
}

fn cl_inv(lambda: &SpectralPoint) -> Complex64 {
    1.0 / c_split_long_short(lambda).0
}

fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1.0)
}

/// Indices into `weyl_group(r).elements` of `W^{2a1+a2}`.
pub fn line_weyl_set(r: &RootSystemData) -> Result<Vec<usize>> {
    require_g2(r)?;
    weyl_positivity_set(r, &weyl_group(r), &LINE_ROOT)
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueLemmaRow {
    pub lambda2_im: f64,
    pub restemp0_closed: [f64; 2],
    pub restemp0_numeric: [f64; 2],
    pub restemp_closed: [f64; 2],
    /// Worst deviation over `W^{2a1+a2}` of the epsilon-limit residue.
    pub limit_err: f64,
    /// Worst deviation over `W^{2a1+a2}` of the contour residue.
    pub contour_err: f64,
    /// Largest pairwise spread of the contour residue across the set.
    pub w_spread: f64,
    /// Relative error of `p` against the contour residue of `mu^{pi2}`.
    pub p_residue_err: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ResidueLemmaReport {
    pub rows: Vec<ResidueLemmaRow>,
    pub restemp0_err: f64,
    pub limit_err: f64,
    pub contour_err: f64,
    pub w_spread: f64,
    pub p_residue_err: f64,
}

fn pair(z: Complex64) -> [f64; 2] {
    [z.re, z.im]
}

/// Numerical check of the two lemma identities at `lambda_{a2} = i s` for
/// each `s` in `samples`, plus the residue of `mu^{pi2}` against `p`.
pub fn residue_lemma_check(r: &RootSystemData, samples: &[f64]) -> Result<ResidueLemmaReport> {
    let set = line_weyl_set(r)?;
    let w = weyl_group(r);
    let mu = CFunction::new(r, SmallKType::Pi2);
    let center = Complex64::new(-0.5, 0.0);
    let mut rows = Vec::with_capacity(samples.len());
    for &s in samples {
        let l2 = Complex64::new(0.0, s);
        let on_line = line_point(l2, center);

        let r0_num = cl_inv(&on_line) * cl_inv(&on_line.neg());
        let r0 = restemp0(l2);
        let r1 = restemp(l2);

        let mut limit_err: f64 = 0.0;
        let mut contour_err: f64 = 0.0;
        let mut values = Vec::with_capacity(set.len());
        for &i in &set {
            let e = &w.elements[i];
            let left = cs_inv(&e.act_spectral(r, &on_line));
            let g = |z: Complex64| cs_inv(&e.act_spectral(r, &line_point(l2, z)).neg());
            let by_limit = left * limit_residue(g, center);
            let by_contour = left * contour_residue(g, center, CONTOUR_RADIUS, CONTOUR_NODES);
            limit_err = limit_err.max(rel_err(by_limit, r1));
            contour_err = contour_err.max(rel_err(by_contour, r1));
            values.push(by_contour);
        }
        let mut w_spread: f64 = 0.0;
        for a in &values {
            for b in &values {
                w_spread = w_spread.max(rel_err(*a, *b));
            }
        }

        let pres = contour_residue(
            |z| mu.mu(&line_point(l2, z)).value,
            center,
            CONTOUR_RADIUS,
            CONTOUR_NODES,
        );
        let p = residue_density_p(l2);
        rows.push(ResidueLemmaRow {
            lambda2_im: s,
            restemp0_closed: pair(r0),
            restemp0_numeric: pair(r0_num),
            restemp_closed: pair(r1),
            limit_err,
            contour_err,
            w_spread,
            p_residue_err: (pres - p).norm() / p.norm(),
        });
    }
    let worst = |f: fn(&ResidueLemmaRow) -> f64| rows.iter().map(f).fold(0.0, f64::max);
    let report = ResidueLemmaReport {
        restemp0_err: worst(|row| {
            let c = Complex64::new(row.restemp0_closed[0], row.restemp0_closed[1]);
            let n = Complex64::new(row.restemp0_numeric[0], row.restemp0_numeric[1]);
            rel_err(n, c)
        }),
        limit_err: worst(|row| row.limit_err),
        contour_err: worst(|row| row.contour_err),
        w_spread: worst(|row| row.w_spread),
        p_residue_err: worst(|row| row.p_residue_err),
        rows,
    };
    for (what, got, tol) in [
        ("restemp0", report.restemp0_err, RESIDUE_TOL),
        ("restemp (limit)", report.limit_err, RESIDUE_TOL),
        ("restemp (contour)", report.contour_err, RESIDUE_TOL),
        ("w-independence", report.w_spread, SPREAD_TOL),
    ] {
        if !(got <= tol) {
            return Err(Error::Mismatch {
                what: what.into(),
                got: Complex64::new(got, 0.0),
                expected: Complex64::new(0.0, 0.0),
                diff: got,
            });
        }
    }
    Ok(report)
}

/// `Res_{lambda_{a1} = -1/2} c^{pi2}(-lambda)^{-1}` as a function of
/// `v = lambda_{3a1+2a2}`, written out from the closed form with the pole
/// factor removed. The two apparent poles on this line, at `v = -1/2` and
/// `v = -1/6`, meet zeros of `1/Gamma(-lambda_a)`.
pub fn alpha1_line_residue(v: Complex64) -> Complex64 {
    use crate::cgamma::{gamma, reciprocal_gamma};
    let l1 = Complex64::new(-0.5, 0.0);
    let l2 = (v - l1) / 2.0;
    let p = SpectralPoint::new(vec![l1, l2]);
    let r = crate::rootsys::build_root_system(RootSystemKind::G2, 1.0).expect("G2");
    let mut acc = Complex64::new(-PI / 16.0, 0.0);
    for root in &r.positive_roots {
        let l = -r.pairing(&p, &root.coords);
        match root.length {
            LengthClass::Long => acc *= gamma(l + 0.5).value * reciprocal_gamma(l),
            LengthClass::Short if root.coords == [1, 0] => {
                acc *= gamma(l + 1.5).value * reciprocal_gamma(l)
            }
            LengthClass::Short => acc *= gamma(l + 1.5).value * reciprocal_gamma(l) / (l - 0.5),
        }
    }
    acc
}

/// One residual term of the shifted inversion formula.
#[derive(Debug, Clone)]
pub struct ResidueTerm {
    /// The line is `lambda_hyperplane = value`.
    pub hyperplane: Vec<i64>,
    pub value: f64,
    pub weyl_set: Vec<usize>,
    pub density: fn(Complex64) -> Complex64,
    /// `-c1 / (4 pi i)`.
    pub prefactor: Complex64,
}

/// Residual terms collected while moving the contour from region I to
/// `i a*`. The three singular lines are merged onto the single line
/// `lambda_{2a1+a2} = -1/2`.
pub fn contour_shift_plan(r: &RootSystemData, pi: SmallKType) -> Result<Vec<ResidueTerm>> {
    if pi != SmallKType::Pi2 {
        return Ok(Vec::new());
    }
    Ok(vec![ResidueTerm {
        hyperplane: LINE_ROOT.to_vec(),
        value: -0.5,
        weyl_set: line_weyl_set(r)?,
        density: residue_density_p,
        prefactor: Complex64::new(-c1(r) / (4.0 * PI), 0.0) / Complex64::i(),
    }])
}

/// Largest `|c^{pi2}(w lambda)|` on the line over `w` outside `W^{2a1+a2}`,
/// at `lambda_{a2} = i s` for each sample. The product formula reports these
/// as exact zeros.
pub fn off_set_zero_check(r: &RootSystemData, samples: &[f64]) -> Result<(usize, f64)> {
    let set = line_weyl_set(r)?;
    let w = weyl_group(r);
    let cf = CFunction::new(r, SmallKType::Pi2);
    let mut count = 0;
    let mut worst: f64 = 0.0;
    for (i, e) in w.elements.iter().enumerate() {
        if set.contains(&i) {
            continue;
        }
        count += 1;
        for &s in samples {
            let lam = line_point(Complex64::new(0.0, s), Complex64::new(-0.5, 0.0));
            let v = cf.eval(&e.act_spectral(r, &lam));
            if !v.is_zero {
                worst = worst.max(v.value.norm().max(f64::MIN_POSITIVE));
            }
        }
    }
    Ok((count, worst))
}

/// Full inversion: the most-continuous part plus the residual line terms.
/// The provider must supply `Upsilon^pi(phi_lambda)(H)` on `i a*` and, for
/// `Pi2`, on the residual line.
pub fn inverse_transform_full(
    r: &RootSystemData,
    pi: SmallKType,
    spectrum: &dyn Spectrum,
    y: &[f64],
    spec: &InverseSpec,
    provider: Option<&dyn SphericalProvider>,
) -> Result<Estimate> {
    let plan = contour_shift_plan(r, pi)?;
    if !plan.is_empty() && provider.is_none() {
        return Err(Error::NoProvider(pi.name().into()));
    }
    let mut est = inverse_continuous(r, pi, spectrum, y, spec, provider)?;
    for term in &plan {
        let provider = provider.expect("checked above");
        let n = (spec.radius / spec.step).floor() as i64;
        let center = Complex64::new(term.value, 0.0);
        let mut tail = 0.0;
        for k in -n..=n {
            let s = k as f64 * spec.step;
            let l2 = Complex64::new(0.0, s);
            let lam = line_point(l2, center);
            let fv = spectrum.value(&lam);
            if fv == Complex64::new(0.0, 0.0) || k == 0 {
                continue;
            }
            // prefactor * p(i s) * (i ds)
            let weight = term.prefactor * (term.density)(l2) * Complex64::i() * spec.step;
            let v = fv * provider.upsilon(&lam, y)? * weight;
            est.value += v;
            if s.abs() > 0.9 * spec.radius {
                tail += v.norm();
            }
        }
        est.error += tail;
    }
    Ok(est)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::build_root_system;

    fn g2() -> RootSystemData {
        build_root_system(RootSystemKind::G2, 1.0).unwrap()
    }

    #[test]
    fn lines_per_ktype() {
        let r = g2();
        assert!(singular_lines(&r, SmallKType::Triv).is_empty());
        assert!(singular_lines(&r, SmallKType::Pi1).is_empty());
        let mut roots: Vec<_> = singular_lines(&r, SmallKType::Pi2)
            .into_iter()
            .map(|l| l.root)
            .collect();
        roots.sort();
        assert_eq!(roots, vec![vec![1, 0], vec![1, 1], vec![2, 1]]);
    }

    #[test]
    fn region_examples() {
        let r = g2();
        assert_eq!(region_of(&r, &[-1.0, -0.1]).unwrap(), RegionLabel::I);
        assert_eq!(region_of(&r, &[0.0, 0.0]).unwrap(), RegionLabel::IV);
        let l1 = -0.3;
        let l2 = (-0.8 - l1) / 3.0;
        assert_eq!(region_of(&r, &[l1, l2]).unwrap(), RegionLabel::II);
        assert!(region_of(&r, &[0.1, -1.0]).is_err());
        assert!(region_of(&r, &[-0.5, -1.0]).is_err());
    }

    #[test]
    fn rank_one_kernel() {
        let z = Complex64::new(0.3, 0.7);
        let g = |a: Complex64| crate::cgamma::gamma(a).value;
        let lhs = (z - 0.5) * g(z) / g(z + 1.5) * (-z - 0.5) * g(-z) / g(-z + 1.5);
        let rhs = -(PI * z).cos() / (z * (PI * z).sin());
        assert!((lhs - rhs).norm() < 1e-11 * rhs.norm());
    }

    #[test]
    fn restemp_value_at_i() {
        let v = restemp(Complex64::i());
        assert!((v.re + 37.0 / (32.0 * PI)).abs() < 1e-15);
        assert!((v.re + 0.368050).abs() < 1e-5);
    }

    #[test]
    fn p_forms_and_constant() {
        for s in [0.0, 0.3, 1.0, 2.5, -1.7] {
            let l = Complex64::new(0.0, s);
            let a = residue_density_p(l);
            let b = residue_density_p_tanh(l);
            assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300), "{s}");
            let f = restemp0(l) * restemp(l) * (PI / 16.0).powi(2);
            assert!((a - f).norm() <= 1e-14 * a.norm().max(1e-300));
        }
        let p1 = residue_density_p(Complex64::i());
        assert!((p1.re + 4.417e-3).abs() < 1e-6);
        let c = p_constant();
        assert_eq!(c, Monomial::new(1, -17, 1));
    }

    #[test]
    fn line_weight_at_one() {
        let w = line_weight(&g2(), 1.0);
        assert!((w - 3.044e-4).abs() < 1e-7, "{w}");
        assert_eq!(line_weight(&g2(), 0.0), 0.0);
    }

    #[test]
    fn lemma_at_a_few_points() {
        let rep = residue_lemma_check(&g2(), &[0.1, 1.0, 2.9]).unwrap();
        assert!(rep.p_residue_err < 1e-6, "{rep:?}");
    }

    #[test]
    fn weyl_set_matches_words() {
        let r = g2();
        let w = weyl_group(&r);
        let set = line_weyl_set(&r).unwrap();
        let mut words: Vec<usize> = [
            vec![],
            vec![0],
            vec![1],
            vec![0, 1],
            vec![1, 0],
            vec![1, 0, 1],
        ]
        .iter()
        .map(|word| {
            let e = w.element_of_word(&r, word);
            w.elements
                .iter()
                .position(|x| x.matrix == e.matrix)
                .unwrap()
        })
        .collect();
        words.sort();
        let mut set = set;
        set.sort();
        assert_eq!(set, words);
        let (n, worst) = off_set_zero_check(&r, &[0.2, 1.0, 2.0]).unwrap();
        assert_eq!(n, 6);
        assert_eq!(worst, 0.0);
    }

    #[test]
    fn alpha1_line_is_regular_at_apparent_poles() {
        for v0 in [-0.5, -1.0 / 6.0] {
            let a = alpha1_line_residue(Complex64::new(v0 + 1e-6, 0.0));
            let b = alpha1_line_residue(Complex64::new(v0 - 1e-6, 0.0));
            assert!(a.is_finite() && b.is_finite());
            assert!((a - b).norm() < 1e-4 * a.norm().max(1.0), "{v0}: {a} {b}");
        }
    }

    #[test]
    fn plan_shape() {
        let r = g2();
        assert!(contour_shift_plan(&r, SmallKType::Triv).unwrap().is_empty());
        let plan = contour_shift_plan(&r, SmallKType::Pi2).unwrap();
        assert_eq!(plan.len(), 1);
        assert_eq!(plan[0].weyl_set.len(), 6);
    }
}

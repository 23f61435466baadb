//! The identity suite behind `verify`.

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cfun::{
    closed_form_c, normalization_c0, sl2_factor, sl2_factor_collapsed, verify_c0, CFunction,
    CFunctionValue, SmallKType,
};
use crate::cgamma::gamma;
use crate::dschecker::no_discrete_series_check;
use crate::hcseries::{coeff_table, upsilon_phi, MultiplicityFunction};
use crate::plancherel::{
    line_weyl_set, off_set_zero_check, p_constant, region_of, residue_density_p,
    residue_density_p_tanh, residue_lemma_check, restemp, restemp0, Monomial, RegionLabel,
};
use crate::rootsys::{
    build_root_system, weyl_group, RootSystemData, RootSystemKind, SpectralPoint,
};

pub const ITEMS: [&str; 11] = [
    "gamma-identities",
    "gk-closed-form",
    "c0",
    "residue-lemma",
    "p-factorization",
    "w-invariance",
    "weyl-line-set",
    "regions",
    "discrete-series",
    "a1-oracle",
    "limit-test",
];

#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub metric_scale: f64,
    /// Replaces the product-formula normalisation; used for fault injection.
    pub c0: Option<f64>,
    pub tol: f64,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            metric_scale: 1.0,
            c0: None,
            tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyItem {
    pub name: String,
    pub passed: bool,
    pub metric: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub schema_version: u32,
    pub metric_scale: f64,
    pub passed: bool,
    pub items: Vec<VerifyItem>,
}

/// Runs the named items, or all of them when `only` is empty.
pub fn run_suite(cfg: &VerifyConfig, only: &[String]) -> VerifyReport {
    let items: Vec<VerifyItem> = ITEMS
        .iter()
        .filter(|n| only.is_empty() || only.iter().any(|o| o == *n))
        .map(|n| run_item(n, cfg))
        .collect();
    VerifyReport {
        schema_version: super::SCHEMA_VERSION,
        metric_scale: cfg.metric_scale,
        passed: items.iter().all(|i| i.passed),
        items,
    }
}

fn item(name: &str, metric: f64, tolerance: f64, detail: impl Into<String>) -> VerifyItem {
    VerifyItem {
        name: name.into(),
        passed: metric <= tolerance,
        metric,
        tolerance,
        detail: detail.into(),
    }
}

fn failed(name: &str, detail: String) -> VerifyItem {
    VerifyItem {
        name: name.into(),
        passed: false,
        metric: f64::INFINITY,
        tolerance: 0.0,
        detail,
    }
}

pub fn run_item(name: &str, cfg: &VerifyConfig) -> VerifyItem {
    let g2 = match build_root_system(RootSystemKind::G2, cfg.metric_scale) {
        Ok(r) => r,
        Err(e) => return failed(name, e.to_string()),
    };
    match name {
        "gamma-identities" => gamma_identities(),
        "gk-closed-form" => gk_closed_form(&g2, cfg),
        "c0" => {
            let d = (verify_c0() - normalization_c0()).abs() / normalization_c0();
            item(name, d, 1e-10, format!("c0 = {}", verify_c0()))
        }
        "residue-lemma" => match residue_lemma_check(&g2, &linspace(0.1, 3.0, 20)) {
            Ok(rep) => {
                let worst = rep.restemp0_err.max(rep.limit_err).max(rep.contour_err);
                let mut it = item(
                    name,
                    worst,
                    1e-8,
                    format!(
                        "restemp0 {:.1e}, limit {:.1e}, contour {:.1e}, w-spread {:.1e}, p residue {:.1e}",
                        rep.restemp0_err, rep.limit_err, rep.contour_err, rep.w_spread, rep.p_residue_err
                    ),
                );
                it.passed &= rep.w_spread <= 1e-9 && rep.p_residue_err <= 1e-6;
                it
            }
            Err(e) => failed(name, e.to_string()),
        },
        "p-factorization" => p_factorization(),
        "w-invariance" => w_invariance(&g2),
        "weyl-line-set" => weyl_line_set(&g2),
        "regions" => regions(&g2),
        "discrete-series" => match no_discrete_series_check(100) {
            Ok(c) => {
                let witness = c.chambers[0].integer_witness.clone().unwrap_or_default();
                item(
                    name,
                    0.0,
                    0.0,
                    format!("infeasible in all chambers up to 100; {witness}"),
                )
            }
            Err(e) => failed(name, e.to_string()),
        },
        "a1-oracle" => a1_oracle(cfg),
        "limit-test" => limit_test(&g2),
        other => failed(other, "unknown item".into()),
    }
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn gamma_identities() -> VerifyItem {
    let mut worst: f64 = 0.0;
    for re in linspace(-4.7, 5.3, 21) {
        for im in linspace(-3.0, 3.0, 13) {
            let z = Complex64::new(re, im);
            let g = |w: Complex64| gamma(w).value;
            worst = worst.max(rel(g(z + 1.0), z * g(z)));
            worst = worst.max(rel(g(z) * g(1.0 - z), PI / (PI * z).sin()));
            let dup = g(z) * g(z + 0.5) * Complex64::new(2.0, 0.0).powc(2.0 * z - 1.0);
            worst = worst.max(rel(dup, PI.sqrt() * g(2.0 * z)));
        }
    }
    item(
        "gamma-identities",
        worst,
        1e-12,
        "recurrence, reflection, duplication on a grid",
    )
}

fn sample_lambda(rng: &mut ChaCha8Rng, r: &RootSystemData) -> SpectralPoint {
    loop {
        let coords: Vec<Complex64> = (0..r.rank)
            .map(|_| Complex64::new(rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)))
            .collect();
        let lam = SpectralPoint::new(coords);
        let pairings: Vec<Complex64> = r
            .positive_roots
            .iter()
            .map(|a| r.pairing(&lam, &a.coords))
            .collect();
        let near_pole = pairings.iter().any(|p| {
            let twice = 2.0 * p.re;
            p.im.abs() < 1e-3 && (twice - twice.round()).abs() < 1e-3
        });
        if pairings.iter().all(|p| p.norm() <= 5.0) && !near_pole {
            return lam;
        }
    }
}

/// Random generic `lambda` with every `|lambda_alpha| <= 5`.
pub fn random_lambdas(r: &RootSystemData, n: usize, seed: u64) -> Vec<SpectralPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| sample_lambda(&mut rng, r)).collect()
}

fn finite(v: &CFunctionValue) -> Option<Complex64> {
    v.finite()
}

fn gk_closed_form(r: &RootSystemData, cfg: &VerifyConfig) -> VerifyItem {
    let mut worst: f64 = 0.0;
    for pi in SmallKType::ALL {
        let mut cf = CFunction::new(r, pi);
        if let Some(c0) = cfg.c0 {
            cf = cf.with_c0(c0);
        }
        for lam in random_lambdas(r, 200, 7) {
            match (finite(&cf.eval(&lam)), finite(&closed_form_c(pi, &lam))) {
                (Some(a), Some(b)) => worst = worst.max(rel(a, b)),
                _ => worst = f64::INFINITY,
            }
        }
    }
    let mut dup: f64 = 0.0;
    for lam in random_lambdas(r, 50, 11) {
        let mu = lam.coords[0] + lam.coords[1];
        for nu in [
            Rational64::from_integer(0),
            Rational64::new(1, 2),
            Rational64::new(3, 2),
        ] {
            let a = sl2_factor(mu, nu).value;
            let b = sl2_factor_collapsed(mu, nu, 1.0)
                .map(|l| l.limit())
                .unwrap_or(Complex64::new(f64::NAN, 0.0));
            dup = dup.max(rel(b, a));
        }
    }
    let mut it = item(
        "gk-closed-form",
        worst,
        cfg.tol,
        format!("600 samples, worst rel {worst:.2e}; duplication collapse {dup:.2e}"),
    );
    it.passed &= dup <= 1e-11;
    it
}

fn p_factorization() -> VerifyItem {
    let mut worst: f64 = 0.0;
    for s in linspace(-3.0, 3.0, 13) {
        let l = Complex64::new(0.0, s);
        let p = residue_density_p(l);
        if s == 0.0 {
            worst = worst.max(p.norm());
            continue;
        }
        worst = worst.max(rel(residue_density_p_tanh(l), p));
        worst = worst.max(rel(restemp0(l) * restemp(l) * (PI / 16.0).powi(2), p));
    }
    let exact = p_constant() == Monomial::new(1, -17, 1);
    let mut it = item(
        "p-factorization",
        worst,
        1e-12,
        format!("constant {}; forms agree to {worst:.1e}", p_constant()),
    );
    it.passed &= exact;
    it
}

fn w_invariance(r: &RootSystemData) -> VerifyItem {
    let w = weyl_group(r);
    let mut worst: f64 = 0.0;
    for pi in SmallKType::ALL {
        let cf = CFunction::new(r, pi);
        for lam in random_lambdas(r, 20, 3) {
            let base = cf.mu(&lam).value;
            for e in &w.elements {
                worst = worst.max(rel(cf.mu(&e.act_spectral(r, &lam)).value, base));
            }
        }
    }
    item(
        "w-invariance",
        worst,
        1e-10,
        "mu(w lambda) = mu(lambda) for all w",
    )
}

fn weyl_line_set(r: &RootSystemData) -> VerifyItem {
    let w = weyl_group(r);
    let set = match line_weyl_set(r) {
        Ok(s) => s,
        Err(e) => return failed("weyl-line-set", e.to_string()),
    };
    let mut listed: Vec<usize> = [
        vec![],
        vec![0],
        vec![1],
        vec![0, 1],
        vec![1, 0],
        vec![1, 0, 1],
    ]
    .iter()
    .filter_map(|word| {
        let e = w.element_of_word(r, word);
        w.elements.iter().position(|x| x.matrix == e.matrix)
    })
    .collect();
    listed.sort();
    let mut got = set.clone();
    got.sort();
    let zeros = off_set_zero_check(r, &linspace(0.2, 3.0, 8));
    let ok = w.order() == 12 && got == listed && matches!(zeros, Ok((6, z)) if z == 0.0);
    VerifyItem {
        name: "weyl-line-set".into(),
        passed: ok,
        metric: if ok { 0.0 } else { 1.0 },
        tolerance: 0.0,
        detail: format!(
            "|W| = {}, |W^(2a1+a2)| = {}, off-set zeros {:?}",
            w.order(),
            set.len(),
            zeros.map(|z| z.0)
        ),
    }
}

/// Label from the number of short pairings below `-1/2`.
pub fn region_by_count(r: &RootSystemData, eta: &[f64]) -> RegionLabel {
    let p = SpectralPoint::from_real(eta);
    let below = [[1, 0], [1, 1], [2, 1]]
        .iter()
        .filter(|a| r.pairing(&p, *a).re < -0.5)
        .count();
    match below {
        3 => RegionLabel::I,
        2 => RegionLabel::II,
        1 => RegionLabel::III,
        _ => RegionLabel::IV,
    }
}

fn regions(r: &RootSystemData) -> VerifyItem {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut bad = 0;
    for _ in 0..100 {
        let eta = [rng.gen_range(-2.0..0.0), rng.gen_range(-1.0..0.0)];
        match region_of(r, &eta) {
            Ok(l) if l == region_by_count(r, &eta) => {}
            _ => bad += 1,
        }
    }
    item(
        "regions",
        bad as f64,
        0.0,
        format!("{bad} of 100 points disagree"),
    )
}

fn a1_oracle(cfg: &VerifyConfig) -> VerifyItem {
    let r = match build_root_system(
        RootSystemKind::Doubled(Box::new(RootSystemKind::A1)),
        cfg.metric_scale,
    ) {
        Ok(r) => r,
        Err(e) => return failed("a1-oracle", e.to_string()),
    };
    let mut worst: f64 = 0.0;
    for l in [
        Complex64::new(0.37, 0.0),
        Complex64::new(0.2, 1.7),
        Complex64::new(-0.6, -3.0),
    ] {
        let t = match coeff_table(
            &r,
            MultiplicityFunction::uniform(0.5),
            &SpectralPoint::new(vec![l]),
            12,
        ) {
            Ok(t) => t,
            Err(e) => return failed("a1-oracle", e.to_string()),
        };
        let mut v = Complex64::new(1.0, 0.0);
        for n in 0..=12usize {
            if n > 0 {
                let j = (n - 1) as f64;
                v = v * (0.5 + j) * ((1.0 - l) / 2.0 + j) / ((1.0 - l / 2.0 + j) * (j + 1.0));
            }
            let g = t.get(&[n]).unwrap_or(Complex64::new(f64::NAN, 0.0));
            worst = worst.max((g - v).norm() / v.norm().max(1.0));
        }
    }
    item(
        "a1-oracle",
        worst,
        1e-10,
        "coefficients against 2F1 Pochhammer ratios, heights <= 12",
    )
}

/// Dominant samples used by the limit test.
pub const LIMIT_SAMPLES: [[f64; 4]; 5] = [
    [1.3, 0.3, 1.1, -0.2],
    [1.5, 0.0, 1.2, 0.0],
    [1.2, 1.0, 1.45, -0.5],
    [2.1, 0.4, 1.3, 0.0],
    [1.6, -0.7, 1.8, 0.9],
];

fn limit_test(r: &RootSystemData) -> VerifyItem {
    let y0 = [0.6, 0.5];
    let t = 25.0;
    let y: Vec<f64> = y0.iter().map(|v| v * t).collect();
    let mut worst: f64 = 0.0;
    for pi in [SmallKType::Triv, SmallKType::Pi1] {
        let cf = CFunction::new(r, pi);
        for s in LIMIT_SAMPLES {
            let lam =
                SpectralPoint::new(vec![Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3])]);
            match upsilon_phi(r, pi, &lam, &y, 1e-12) {
                Ok(v) => {
                    let scaled = v * (-(r.lambda_at(&lam, &y)) + r.rho_at(&y)).exp();
                    worst = worst.max((scaled - cf.eval(&lam).value).norm());
                }
                Err(e) => return failed("limit-test", e.to_string()),
            }
        }
    }
    item(
        "limit-test",
        worst,
        1e-4,
        "e^{t(rho - lambda)(H)} Upsilon(phi)(tH) at t = 25",
    )
}

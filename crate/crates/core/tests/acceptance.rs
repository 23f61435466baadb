//! Acceptance suite. Runs without the libtest harness so each criterion
//! prints a single PASS/FAIL line; any failure makes the process exit 1.

use std::f64::consts::PI;
use std::time::{Duration, Instant};

use g2harmonic::cfun::{
    closed_form_c, gk_product, normalization_c0, sl2_factor, sl2_factor_collapsed, CFunction,
    SmallKType,
};
use g2harmonic::cli::verify::{random_lambdas, region_by_count, LIMIT_SAMPLES};
use g2harmonic::dschecker::no_discrete_series_check;
use g2harmonic::hcseries::{coeff_table, upsilon_phi, MultiplicityFunction};
use g2harmonic::plancherel::{
    line_weight, line_weyl_set, off_set_zero_check, p_constant, region_of, residue_density_p,
    residue_density_p_tanh, residue_lemma_check, restemp, restemp0, singular_lines, Monomial,
};
use g2harmonic::rootsys::{
    build_root_system, weyl_group, RootSystemData, RootSystemKind, SpectralPoint,
};
use g2harmonic::transform::{
    arthur_inverse, inverse_continuous, spectral_ip, spectrum_on_lattice, FnSpectrum, ForwardSpec,
    InverseSpec, RadialFunction,
};
use g2harmonic::Complex64;
use num_rational::Rational64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| a + (b - a) * i as f64 / (n - 1) as f64)
        .collect()
}

fn g2(scale: f64) -> RootSystemData {
    build_root_system(RootSystemKind::G2, scale).unwrap()
}

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn c1_rho(scale: f64) -> Outcome {
    let r = g2(scale);
    let rho = SpectralPoint::rho(&r);
    let cf = CFunction::new(&r, SmallKType::Triv);
    let t0 = Instant::now();
    let closed = closed_form_c(SmallKType::Triv, &rho).value;
    let product = cf.eval(&rho).value;
    let el = t0.elapsed();
    let e = (closed - 1.0).norm().max((product - 1.0).norm());
    check(
        e < 1e-10 && el < Duration::from_millis(1),
        format!("|c(rho) - 1| = {e:.1e} in {el:?}"),
    )
}

fn c2_c0(scale: f64) -> Outcome {
    let r = g2(scale);
    let rho = SpectralPoint::rho(&r);
    let c0 = 1.0
        / CFunction::new(&r, SmallKType::Triv)
            .with_c0(1.0)
            .eval(&rho)
            .value
            .re;
    let d = (c0 - 2.0 * PI * PI).abs() / (2.0 * PI * PI);
    check(
        d < 1e-10 && (normalization_c0() - 2.0 * PI * PI).abs() == 0.0,
        format!("c0 = {c0}, rel {d:.1e}"),
    )
}

fn c3_product(scale: f64) -> Outcome {
    let r = g2(scale);
    let mut worst: f64 = 0.0;
    for pi in SmallKType::ALL {
        for lam in random_lambdas(&r, 200, 17) {
            let a = gk_product(&r, pi, &lam);
            let b = closed_form_c(pi, &lam);
            if a.is_pole || b.is_pole {
                return Err(format!("pole at sampled {lam:?}"));
            }
            worst = worst.max(rel(a.value, b.value));
        }
    }
    let mut dup: f64 = 0.0;
    for lam in random_lambdas(&r, 100, 23) {
        for mu in lam
            .coords
            .iter()
            .copied()
            .chain([lam.coords[0] + lam.coords[1]])
        {
            for nu in [
                Rational64::from_integer(0),
                Rational64::new(1, 2),
                Rational64::new(3, 2),
            ] {
                let a = sl2_factor(mu, nu).value;
                let b = sl2_factor_collapsed(mu, nu, 1.0)
                    .map_err(|e| e.to_string())?
                    .limit();
                dup = dup.max(rel(b, a));
            }
        }
    }
    check(
        worst <= 1e-10 && dup <= 1e-11,
        format!("600 samples worst rel {worst:.1e}; collapsed factors {dup:.1e}"),
    )
}

fn c4_residue_lemma(scale: f64) -> Outcome {
    let r = g2(scale);
    let rep = residue_lemma_check(&r, &linspace(0.1, 3.0, 20)).map_err(|e| e.to_string())?;
    let worst = rep.restemp0_err.max(rep.limit_err).max(rep.contour_err);
    check(
        worst <= 1e-8 && rep.w_spread <= 1e-9 && line_weyl_set(&r).map(|s| s.len()).ok() == Some(6),
        format!(
            "restemp0 {:.1e}, eps-limit {:.1e}, contour {:.1e}, w-spread {:.1e}",
            rep.restemp0_err, rep.limit_err, rep.contour_err, rep.w_spread
        ),
    )
}

fn c5_p(scale: f64) -> Outcome {
    let r = g2(scale);
    let mut forms: f64 = 0.0;
    for s in linspace(-3.0, 3.0, 25) {
        let l = Complex64::new(0.0, s);
        let p = residue_density_p(l);
        if s.abs() < 1e-12 {
            forms = forms.max(p.norm());
            continue;
        }
        forms = forms.max(rel(residue_density_p_tanh(l), p));
        forms = forms.max(rel(restemp0(l) * restemp(l) * (PI / 16.0).powi(2), p));
    }
    let rep = residue_lemma_check(&r, &linspace(0.3, 3.0, 10)).map_err(|e| e.to_string())?;
    let exact = p_constant() == Monomial::new(1, -17, 1);
    check(
        forms <= 1e-12 && rep.p_residue_err <= 1e-6 && exact,
        format!(
            "forms agree to {forms:.1e}; residue of mu rel {:.1e}; constant {}",
            rep.p_residue_err,
            p_constant()
        ),
    )
}

fn c6_positivity() -> Outcome {
    let r = g2(1.0);
    let mut low = f64::INFINITY;
    for pi in SmallKType::ALL {
        let cf = CFunction::new(&r, pi);
        for t1 in linspace(-4.0, 4.0, 50) {
            for t2 in linspace(-4.0, 4.0, 50) {
                low = low.min(cf.density(&[t1, t2]));
            }
        }
    }
    let line = linspace(-5.0, 5.0, 201)
        .into_iter()
        .map(|s| line_weight(&r, s))
        .fold(f64::INFINITY, f64::min);
    check(
        low >= -1e-15 && line >= -1e-15,
        format!("min density {low:.2e}, min line weight {line:.2e}"),
    )
}

fn c7_series() -> Outcome {
    let t0 = Instant::now();
    let a1 = build_root_system(RootSystemKind::Doubled(Box::new(RootSystemKind::A1)), 1.0).unwrap();
    let mut oracle: f64 = 0.0;
    for l in [
        Complex64::new(0.37, 0.0),
        Complex64::new(0.2, 1.7),
        Complex64::new(-0.6, -3.0),
    ] {
        let t = coeff_table(
            &a1,
            MultiplicityFunction::uniform(0.5),
            &SpectralPoint::new(vec![l]),
            12,
        )
        .map_err(|e| e.to_string())?;
        // Gamma_n = (1/2)_n ((1 - l)/2)_n / ((1 - l/2)_n n!)
        let mut v = Complex64::new(1.0, 0.0);
        for n in 0..=12usize {
            if n > 0 {
                let j = (n - 1) as f64;
                v = v * (0.5 + j) * ((1.0 - l) / 2.0 + j) / ((1.0 - l / 2.0 + j) * (j + 1.0));
            }
            let g = t.get(&[n]).ok_or("missing coefficient")?;
            oracle = oracle.max((g - v).norm() / v.norm().max(1.0));
        }
    }
    let r = g2(1.0);
    let y: Vec<f64> = [0.6, 0.5].iter().map(|v| v * 25.0).collect();
    let mut limit: f64 = 0.0;
    for pi in [SmallKType::Triv, SmallKType::Pi1] {
        let cf = CFunction::new(&r, pi);
        for s in LIMIT_SAMPLES {
            let lam =
                SpectralPoint::new(vec![Complex64::new(s[0], s[1]), Complex64::new(s[2], s[3])]);
            let v = upsilon_phi(&r, pi, &lam, &y, 1e-12).map_err(|e| e.to_string())?;
            let scaled = v * (r.rho_at(&y) - r.lambda_at(&lam, &y)).exp();
            limit = limit.max((scaled - cf.eval(&lam).value).norm());
        }
    }
    let el = t0.elapsed();
    check(
        oracle <= 1e-10 && limit < 1e-4 && el < Duration::from_secs(30),
        format!("2F1 oracle {oracle:.1e}; limit test {limit:.1e} at t = 25; {el:.1?}"),
    )
}

fn a1_round_trip(scale: f64) -> Outcome {
    let t0 = Instant::now();
    let r = build_root_system(RootSystemKind::A1, scale).unwrap();
    let f = RadialFunction::bump(1, 1.0);
    let fs = ForwardSpec {
        nodes: 96,
        series_tol: 1e-12,
        max_height: 3000,
        estimate_error: false,
        target: None,
    };
    let (step, radius) = (0.5, 212.0);
    let (spec, _) = spectrum_on_lattice(&r, SmallKType::Triv, &f, step, radius, &fs)
        .map_err(|e| e.to_string())?;
    let inv = InverseSpec {
        step,
        radius,
        series_tol: 1e-10,
        target: None,
    };
    let mut worst: f64 = 0.0;
    for y in linspace(0.05, 1.3, 26) {
        let e = inverse_continuous(&r, SmallKType::Triv, &spec, &[y], &inv, None)
            .map_err(|e| e.to_string())?;
        worst = worst.max((e.value.re - f.eval(&r, &[y])).abs());
    }
    let el = t0.elapsed();
    check(
        worst < 1e-3 && el < Duration::from_secs(60),
        format!("A1 max abs error {worst:.1e} in {el:.1?}"),
    )
}

fn g2_round_trip() -> Outcome {
    let t0 = Instant::now();
    let r = g2(1.0);
    let f = RadialFunction::gaussian_bump(2, 0.8, 3.5);
    let y0 = [0.4, 0.6];
    let fs = ForwardSpec {
        nodes: 32,
        series_tol: 1e-10,
        max_height: 100,
        estimate_error: false,
        target: None,
    };
    let (step, radius) = (0.4, 10.0);
    let (spec, _) = spectrum_on_lattice(&r, SmallKType::Triv, &f, step, radius, &fs)
        .map_err(|e| e.to_string())?;
    let inv = InverseSpec {
        step,
        radius,
        series_tol: 1e-10,
        target: None,
    };
    let e = inverse_continuous(&r, SmallKType::Triv, &spec, &y0, &inv, None)
        .map_err(|e| e.to_string())?;
    let want = f.eval(&r, &y0);
    let d = (e.value.re - want).abs() / want.abs();
    check(
        d < 0.05 && t0.elapsed() < Duration::from_secs(1800),
        format!("G2 rel error {d:.1e} at H = {y0:?} in {:.1?}", t0.elapsed()),
    )
}

fn arthur_eta() -> Outcome {
    let r = g2(1.0);
    let rr = r.clone();
    let f = FnSpectrum(
        move |l: &SpectralPoint| (spectral_ip(&rr, l, l) * 0.5).exp(),
        true,
    );
    let y = [0.8, 0.8];
    let spec = InverseSpec {
        step: 0.25,
        radius: 9.0,
        series_tol: 1e-12,
        target: None,
    };
    let mut vals = Vec::new();
    for eta in [[0.0, 0.0], [-0.2, -0.2], [-0.4, -0.1]] {
        let e = arthur_inverse(&r, SmallKType::Triv, &f, &y, &eta, &spec, None)
            .map_err(|e| e.to_string())?;
        vals.push(e.value);
    }
    let spread = vals.iter().map(|v| rel(*v, vals[0])).fold(0.0, f64::max);
    check(
        spread <= 1e-6,
        format!("eta spread {spread:.1e} over 3 contours"),
    )
}

fn c8_inversion() -> Outcome {
    let parts = [a1_round_trip(1.0), g2_round_trip(), arthur_eta()];
    let ok = parts.iter().all(|p| p.is_ok());
    let detail = parts
        .into_iter()
        .map(|p| p.unwrap_or_else(|e| format!("FAILED {e}")))
        .collect::<Vec<_>>()
        .join("; ");
    check(ok, detail)
}

fn c9_structure() -> Outcome {
    let r = g2(1.0);
    let w = weyl_group(&r);
    let set = line_weyl_set(&r).map_err(|e| e.to_string())?;
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
        let e = w.element_of_word(&r, word);
        w.elements.iter().position(|x| x.matrix == e.matrix)
    })
    .collect();
    listed.sort();
    let mut got = set.clone();
    got.sort();
    let (zeros, worst) =
        off_set_zero_check(&r, &linspace(0.2, 3.0, 8)).map_err(|e| e.to_string())?;
    let lines = singular_lines(&r, SmallKType::Pi2);
    let mut roots: Vec<Vec<i64>> = lines.iter().map(|l| l.root.clone()).collect();
    roots.sort();
    let lines_ok =
        roots == [vec![1, 0], vec![1, 1], vec![2, 1]] && lines.iter().all(|l| l.value == -0.5);
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut bad = 0;
    for _ in 0..100 {
        let eta = [rng.gen_range(-2.5..0.0), rng.gen_range(-1.2..0.0)];
        if region_of(&r, &eta).ok() != Some(region_by_count(&r, &eta)) {
            bad += 1;
        }
    }
    check(
        w.order() == 12 && got == listed && zeros == 6 && worst == 0.0 && lines_ok && bad == 0,
        format!(
            "|W| = {}, W-set {} elements, {zeros} vanishing elsewhere, lines ok {lines_ok}, {bad}/100 region mismatches",
            w.order(),
            set.len()
        ),
    )
}

fn c10_discrete_series() -> Outcome {
    let t0 = Instant::now();
    let cert = no_discrete_series_check(100).map_err(|e| e.to_string())?;
    let el = t0.elapsed();
    let ch1 = &cert.chambers[0];
    let want = ["1 - 2c1 + 3c2 > 0", "-3/2 + 3c1 - 6c2 > 0"];
    let ok = cert.infeasible
        && cert.chambers.len() == 3
        && cert
            .chambers
            .iter()
            .all(|c| c.feasible == 0 && c.farkas.is_some())
        && ch1.inequalities == want
        && ch1.integer_witness.is_some()
        && el < Duration::from_secs(1);
    check(
        ok,
        format!(
            "3 chambers infeasible to bound 100; chamber 1: {}; {el:?}",
            ch1.inequalities.join(" and ")
        ),
    )
}

fn c11_scale() -> Outcome {
    let parts = [
        ("1", c1_rho(4.0)),
        ("2", c2_c0(4.0)),
        ("3", c3_product(4.0)),
        ("4", c4_residue_lemma(4.0)),
        ("5", c5_p(4.0)),
        ("8/A1", a1_round_trip(4.0)),
    ];
    let failed: Vec<String> = parts
        .iter()
        .filter_map(|(n, p)| p.as_ref().err().map(|e| format!("{n}: {e}")))
        .collect();
    check(
        failed.is_empty(),
        if failed.is_empty() {
            "criteria 1-5 and the A1 round trip hold at metric scale 4".into()
        } else {
            failed.join("; ")
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("c-function at rho", || c1_rho(1.0)),
        ("normalisation c0", || c2_c0(1.0)),
        ("product formula vs closed form", || c3_product(1.0)),
        ("residue lemma", || c4_residue_lemma(1.0)),
        ("line density p", || c5_p(1.0)),
        ("positivity", c6_positivity),
        ("series validation", c7_series),
        ("inversion round trips", c8_inversion),
        ("structure checks", c9_structure),
        ("discrete-series certificate", c10_discrete_series),
        ("scale covariance", c11_scale),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        match f() {
            Ok(d) => println!("criterion {:>2} PASS {name}: {d}", i + 1),
            Err(d) => {
                failures += 1;
                println!("criterion {:>2} FAIL {name}: {d}", i + 1);
            }
        }
    }
    println!("acceptance: {} of 11 passed", 11 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}

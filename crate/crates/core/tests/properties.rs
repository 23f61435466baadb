use std::f64::consts::PI;

use g2harmonic::cfun::{closed_form_c, gk_product, CFunction, SmallKType};
use g2harmonic::cgamma::gamma;
use g2harmonic::plancherel::{line_weight, residue_density_p};
use g2harmonic::rootsys::{
    build_root_system, weyl_group, RootSystemData, RootSystemKind, SpectralPoint,
};
use g2harmonic::Complex64;
use proptest::prelude::*;

fn rel(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm().max(1e-300)
}

fn g2() -> RootSystemData {
    build_root_system(RootSystemKind::G2, 1.0).unwrap()
}

fn ktype() -> impl Strategy<Value = SmallKType> {
    prop_oneof![
        Just(SmallKType::Triv),
        Just(SmallKType::Pi1),
        Just(SmallKType::Pi2)
    ]
}

// off the real axis every Gamma argument in the c-function is finite
fn lambda2() -> impl Strategy<Value = SpectralPoint> {
    (-1.5..1.5f64, 0.05..2.0f64, -1.5..1.5f64, 0.05..2.0f64).prop_map(|(a, b, c, d)| {
        SpectralPoint::new(vec![Complex64::new(a, b), Complex64::new(c, d)])
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn gamma_recurrence(re in -6.0..6.0f64, im in 0.01..4.0f64) {
        let z = Complex64::new(re, im);
        prop_assert!(rel(gamma(z + 1.0).value, z * gamma(z).value) < 1e-12);
    }

    #[test]
    fn gamma_reflection(re in -4.0..4.0f64, im in 0.01..3.0f64) {
        let z = Complex64::new(re, im);
        let lhs = gamma(z).value * gamma(1.0 - z).value;
        prop_assert!(rel(lhs, PI / (PI * z).sin()) < 1e-12);
    }

    #[test]
    fn gamma_conjugate(re in -4.0..6.0f64, im in 0.01..4.0f64) {
        let z = Complex64::new(re, im);
        prop_assert!(rel(gamma(z.conj()).value, gamma(z).value.conj()) < 1e-13);
    }

    #[test]
    fn product_matches_closed_form(pi in ktype(), lam in lambda2()) {
        let r = g2();
        let a = gk_product(&r, pi, &lam).value;
        let b = closed_form_c(pi, &lam).value;
        prop_assert!(rel(a, b) < 1e-10, "{pi} {lam:?}: {a} vs {b}");
    }

    #[test]
    fn mu_is_weyl_invariant(pi in ktype(), lam in lambda2()) {
        let r = g2();
        let cf = CFunction::new(&r, pi);
        let base = cf.mu(&lam).value;
        for w in &weyl_group(&r).elements {
            prop_assert!(rel(cf.mu(&w.act_spectral(&r, &lam)).value, base) < 1e-9);
        }
    }

    #[test]
    fn density_is_nonnegative(pi in ktype(), t1 in -6.0..6.0f64, t2 in -6.0..6.0f64) {
        let r = g2();
        prop_assert!(CFunction::new(&r, pi).density(&[t1, t2]) >= -1e-15);
    }

    #[test]
    fn p_is_even_and_real(s in 0.01..6.0f64) {
        let a = residue_density_p(Complex64::new(0.0, s));
        let b = residue_density_p(Complex64::new(0.0, -s));
        prop_assert!(rel(a, b) < 1e-13);
        prop_assert!(a.im.abs() <= 1e-13 * a.norm().max(1e-300));
    }

    #[test]
    fn line_weight_scales_with_metric(s in -5.0..5.0f64) {
        let w1 = line_weight(&g2(), s);
        let w4 = line_weight(&build_root_system(RootSystemKind::G2, 4.0).unwrap(), s);
        prop_assert!(w1 >= -1e-15);
        prop_assert!((w4 - 4.0 * w1).abs() <= 1e-14 * w1.abs().max(1e-300));
    }
}

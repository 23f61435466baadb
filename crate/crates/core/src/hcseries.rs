//! Harish-Chandra series and the c-expansion of spherical functions.
//!
//! The coefficients solve the eigen-equation of the Heckman-Opdam operator
//! `L = Delta + sum_{alpha > 0} k_alpha coth(alpha/2) d_alpha` with
//! `rho(k) = 1/2 sum k_alpha alpha`:
//!
//! ```text
//! <mu, mu - 2 lambda> G_mu = 2 sum_alpha k_alpha sum_{j >= 1} <mu - j alpha + rho(k) - lambda, alpha> G_{mu - j alpha}
//! ```
//!
//! The inner sums over `j` are carried as running prefix sums along each
//! root direction, so every coefficient costs `O(|Sigma+|)`.
//!
//! The trivial K-type is the engine on the doubled system with `k = 1/2`.
//! For `Pi1` the engine runs on the system itself with `k = 1/2`, and
//! the result is multiplied by `prod_{alpha > 0} cosh(alpha/2)^{-1/2}`.

use num_complex::Complex64;

use crate::cfun::{CFunction, SmallKType};
use crate::rootsys::{
    build_root_system, weyl_group, LengthClass, RootSystemData, RootSystemKind, SpectralPoint,
};
use crate::{Error, Result};

/// Tolerance of the resonance guard on `|<mu, mu - 2 lambda>|`.
pub const RESONANCE_TOL: f64 = 1e-9;
pub const DEFAULT_MAX_HEIGHT: usize = 40;
pub const DEFAULT_TAIL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplicityFunction {
    pub short: f64,
    pub long: f64,
}

impl MultiplicityFunction {
    pub fn uniform(k: f64) -> Self {
        MultiplicityFunction { short: k, long: k }
    }

    pub fn value(&self, class: LengthClass) -> f64 {
        match class {
            LengthClass::Short => self.short,
            LengthClass::Long => self.long,
        }
    }
}

/// Root data of the engine expressed in its own simple-root basis.
#[derive(Debug, Clone)]
struct Engine {
    rank: usize,
    factor: f64,
    /// Gram matrix of the engine's simple roots at scale 1.
    gram: Vec<Vec<f64>>,
    roots: Vec<Vec<i64>>,
    k: Vec<f64>,
    /// `rho(k)` in the engine's simple-root basis.
    rho_k: Vec<f64>,
    base_diag: Vec<f64>,
}

impl Engine {
    fn new(r: &RootSystemData, k: MultiplicityFunction) -> Self {
        let f = r.lattice_factor;
        let gram = r
            .base_gram
            .iter()
            .map(|row| row.iter().map(|g| (g * f * f) as f64).collect())
            .collect();
        let roots: Vec<Vec<i64>> = r
            .positive_roots
            .iter()
            .map(|a| a.coords.iter().map(|c| c / f).collect())
            .collect();
        let kv: Vec<f64> = r
            .positive_roots
            .iter()
            .map(|a| k.value(a.length) * a.multiplicity as f64)
            .collect();
        let rho_k = (0..r.rank)
            .map(|j| {
                0.5 * roots
                    .iter()
                    .zip(&kv)
                    .map(|(a, kk)| kk * a[j] as f64)
                    .sum::<f64>()
            })
            .collect();
        Engine {
            rank: r.rank,
            factor: f as f64,
            gram,
            roots,
            k: kv,
            rho_k,
            base_diag: (0..r.rank).map(|j| r.base_gram[j][j] as f64).collect(),
        }
    }

    fn ip(&self, u: &[f64], v: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.rank {
            for j in 0..self.rank {
                s += u[i] * self.gram[i][j] * v[j];
            }
        }
        s
    }

    /// `<lambda, gamma_j>` at scale 1 for the engine's simple roots.
    fn lambda_simple(&self, lambda: &SpectralPoint) -> Vec<Complex64> {
        (0..self.rank)
            .map(|j| lambda.coords[j] * (self.factor * self.base_diag[j] / 2.0))
            .collect()
    }
}

/// `mu -> G_mu(lambda)` for `mu` of height at most `max_height` in the
/// engine's simple roots.
#[derive(Debug, Clone)]
pub struct CoeffTable {
    pub rank: usize,
    pub lambda: SpectralPoint,
    pub max_height: usize,
    factor: f64,
    rho_k: Vec<f64>,
    data: Vec<Complex64>,
    /// Largest `|G_mu|` at each height.
    height_max: Vec<f64>,
}

impl CoeffTable {
    fn index(&self, n: &[usize]) -> usize {
        match self.rank {
            1 => n[0],
            _ => n[0] * (self.max_height + 1) + n[1],
        }
    }

    /// `G_mu` for `mu = sum n_i gamma_i` in the engine's simple roots.
    pub fn get(&self, n: &[usize]) -> Option<Complex64> {
        if n.len() != self.rank || n.iter().sum::<usize>() > self.max_height {
            return None;
        }
        Some(self.data[self.index(n)])
    }

    /// All stored entries in height-then-lexicographic order.
    pub fn entries(&self) -> Vec<(Vec<usize>, Complex64)> {
        lattice_order(self.rank, self.max_height)
            .into_iter()
            .map(|n| {
                let v = self.data[self.index(&n)];
                (n, v)
            })
            .collect()
    }

    pub fn height_max(&self) -> &[f64] {
        &self.height_max
    }

    fn tail_bound(&self, q: f64, h: usize, prefactor: f64) -> f64 {
        if q >= 1.0 {
            return f64::INFINITY;
        }
        let m = self.height_max[h].max(if h > 0 { self.height_max[h - 1] } else { 0.0 });
        let qn = q.powi(h as i32 + 1);
        let count = match self.rank {
            1 => qn / (1.0 - q),
            _ => qn * ((h as f64 + 2.0) - (h as f64 + 1.0) * q) / ((1.0 - q) * (1.0 - q)),
        };
        prefactor * m * count
    }

    /// Sum `sum_{height(mu) <= h} G_mu e^{-mu(H)}` with `h` the least height
    /// whose tail bound is below `tol` (or `max_height`). Returns the sum
    /// without the leading exponential, the tail bound relative to it and `h`.
    fn partial_sum(&self, y: &[f64], tol_rel: f64) -> (Complex64, f64, usize) {
        let xs: Vec<f64> = y.iter().map(|v| (-self.factor * v).exp()).collect();
        let q = xs.iter().cloned().fold(0.0, f64::max);
        let mut h = self.max_height;
        let mut bound = self.tail_bound(q, h, 1.0);
        for cand in 0..=self.max_height {
            let b = self.tail_bound(q, cand, 1.0);
            if b <= tol_rel {
                h = cand;
                bound = b;
                break;
            }
        }
        let sum = match self.rank {
            1 => {
                let mut acc = Complex64::new(0.0, 0.0);
                for n in (0..=h).rev() {
                    acc = acc * xs[0] + self.data[n];
                }
                acc
            }
            _ => {
                let mut outer = Complex64::new(0.0, 0.0);
                for n1 in (0..=h).rev() {
                    let base = n1 * (self.max_height + 1);
                    let mut inner = Complex64::new(0.0, 0.0);
                    for n2 in (0..=(h - n1)).rev() {
                        inner = inner * xs[1] + self.data[base + n2];
                    }
                    outer = outer * xs[0] + inner;
                }
                outer
            }
        };
        (sum, bound, h)
    }
}

/// Lattice points of height at most `n` in height-then-lexicographic order.
pub fn lattice_order(rank: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for h in 0..=n {
        match rank {
            1 => out.push(vec![h]),
            _ => {
                for a in 0..=h {
                    out.push(vec![h - a, a]);
                }
            }
        }
    }
    out
}

pub fn coeff_table(
    r: &RootSystemData,
    k: MultiplicityFunction,
    lambda: &SpectralPoint,
    max_height: usize,
) -> Result<CoeffTable> {
    let e = Engine::new(r, k);
    build_table(&e, lambda, max_height)
}

fn build_table(e: &Engine, lambda: &SpectralPoint, max_height: usize) -> Result<CoeffTable> {
    let rank = e.rank;
    let side = max_height + 1;
    let size = if rank == 1 { side } else { side * side };
    let ls = e.lambda_simple(lambda);
    let nroots = e.roots.len();
    // per root: G a, <rho_k - lambda, a>
    let ga: Vec<Vec<f64>> = e
        .roots
        .iter()
        .map(|a| {
            (0..rank)
                .map(|i| (0..rank).map(|j| e.gram[i][j] * a[j] as f64).sum())
                .collect()
        })
        .collect();
    let shift: Vec<Complex64> = e
        .roots
        .iter()
        .zip(&ga)
        .map(|(a, g)| {
            let rk: f64 = e.rho_k.iter().zip(g).map(|(x, y)| x * y).sum();
            let la: Complex64 = a.iter().zip(&ls).map(|(c, l)| l * *c as f64).sum();
            Complex64::new(rk, 0.0) - la
        })
        .collect();
    let mut data = vec![Complex64::new(0.0, 0.0); size];
    let mut g = vec![vec![Complex64::new(0.0, 0.0); size]; nroots];
    let mut s = vec![vec![Complex64::new(0.0, 0.0); size]; nroots];
    let mut height_max = vec![0.0; max_height + 1];
    let idx = |n: &[usize]| if rank == 1 { n[0] } else { n[0] * side + n[1] };

    for n in lattice_order(rank, max_height) {
        let i = idx(&n);
        let nf: Vec<f64> = n.iter().map(|v| *v as f64).collect();
        let value = if n.iter().all(|v| *v == 0) {
            Complex64::new(1.0, 0.0)
        } else {
            let mut rhs = Complex64::new(0.0, 0.0);
            for (ri, a) in e.roots.iter().enumerate() {
                let prev: Option<Vec<usize>> = n
                    .iter()
                    .zip(a)
                    .map(|(x, y)| (*x as i64 - y).try_into().ok())
                    .collect();
                if let Some(p) = prev {
                    let j = idx(&p);
                    let sv = g[ri][j] + s[ri][j];
                    s[ri][i] = sv;
                    rhs += sv;
                }
            }
            let lm: Complex64 = nf.iter().zip(&ls).map(|(c, l)| l * c).sum();
            let denom = Complex64::new(e.ip(&nf, &nf), 0.0) - 2.0 * lm;
            if denom.norm() <= RESONANCE_TOL {
                return Err(Error::Resonance {
                    mu: n.iter().map(|v| *v as i64).collect(),
                    value: denom.norm(),
                });
            }
            2.0 * rhs / denom
        };
        data[i] = value;
        let h: usize = n.iter().sum();
        height_max[h] = f64::max(height_max[h], value.norm());
        for ri in 0..nroots {
            let mu_a: f64 = nf.iter().zip(&ga[ri]).map(|(x, y)| x * y).sum();
            g[ri][i] = e.k[ri] * (shift[ri] + mu_a) * value;
        }
    }
    Ok(CoeffTable {
        rank,
        lambda: lambda.clone(),
        max_height,
        factor: e.factor,
        rho_k: e.rho_k.clone(),
        data,
        height_max,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: Complex64,
    pub tail_bound: f64,
    pub height_used: usize,
}

fn leading_exponent(r: &RootSystemData, t: &CoeffTable, y: &[f64]) -> Complex64 {
    let rho_k: f64 = t.rho_k.iter().zip(y).map(|(c, v)| c * t.factor * v).sum();
    r.lambda_at(&t.lambda, y) - rho_k
}

/// `Phi_lambda(H) = e^{(lambda - rho(k))(H)} sum G_mu e^{-mu(H)}`, growing
/// the table until the tail bound is below `tol`.
pub fn phi(
    r: &RootSystemData,
    k: MultiplicityFunction,
    lambda: &SpectralPoint,
    y: &[f64],
    tol: f64,
) -> Result<SeriesValue> {
    if !r.is_strictly_dominant(y) {
        return Err(Error::NotDominant(y.to_vec()));
    }
    let mut n = DEFAULT_MAX_HEIGHT;
    loop {
        let t = coeff_table(r, k, lambda, n)?;
        let v = phi_from_table(r, &t, y, f64::INFINITY)?;
        if v.tail_bound <= tol {
            // re-run with the requested tolerance so the cut is minimal
            return phi_from_table(r, &t, y, tol);
        }
        if n >= 4096 {
            return Err(Error::TailTooLarge {
                bound: v.tail_bound,
                tol,
            });
        }
        n *= 2;
    }
}

/// Evaluate a table at `H`; `tol` is an absolute tolerance on the tail.
/// An infinite `tol` uses every stored height.
pub fn phi_from_table(
    r: &RootSystemData,
    t: &CoeffTable,
    y: &[f64],
    tol: f64,
) -> Result<SeriesValue> {
    if !r.is_strictly_dominant(y) {
        return Err(Error::NotDominant(y.to_vec()));
    }
    let lead = leading_exponent(r, t, y).exp();
    let scale = lead.norm();
    let rel = if tol.is_finite() && scale > 0.0 {
        tol / scale
    } else {
        0.0
    };
    let (sum, bound, h) = if tol.is_finite() {
        t.partial_sum(y, rel)
    } else {
        let (s, _, _) = t.partial_sum(y, -1.0);
        let xs: Vec<f64> = y.iter().map(|v| (-t.factor * v).exp()).collect();
        let q = xs.iter().cloned().fold(0.0, f64::max);
        (s, t.tail_bound(q, t.max_height, 1.0), t.max_height)
    };
    Ok(SeriesValue {
        value: lead * sum,
        tail_bound: bound * scale,
        height_used: h,
    })
}

/// Which engine and gauge realise the spherical functions of a K-type.
#[derive(Debug, Clone)]
pub struct SeriesModel {
    pub pi: SmallKType,
    pub engine: RootSystemData,
    pub k: MultiplicityFunction,
}

impl SeriesModel {
    pub fn new(base: &RootSystemData, pi: SmallKType) -> Result<Self> {
        let engine = match pi {
            SmallKType::Triv => build_root_system(
                RootSystemKind::Doubled(Box::new(base.kind.clone())),
                base.metric_scale,
            )?,
            SmallKType::Pi1 => base.clone(),
            SmallKType::Pi2 => return Err(Error::NoProvider("pi2".into())),
        };
        Ok(SeriesModel {
            pi,
            engine,
            k: MultiplicityFunction::uniform(0.5),
        })
    }

    /// Multiplier turning the engine's `Phi` into the K-type's `Phi`.
    fn gauge(&self, base: &RootSystemData, y: &[f64]) -> f64 {
        match self.pi {
            SmallKType::Pi1 => {
                // e^{-rho/2} prod (1 + e^{-alpha})^{-1/2}, i.e. prod cosh(alpha/2)^{-1/2} / 2^{|Sigma+|/2}
                let mut g = (-0.5 * base.rho_at(y)).exp();
                for a in &base.positive_roots {
                    let v = RootSystemData::vector_at(&a.coords, y);
                    g /= (1.0 + (-v).exp()).sqrt();
                }
                g
            }
            _ => 1.0,
        }
    }
}

/// `Upsilon^pi(phi_lambda)` on the chamber through
/// `sum_{w in W} c^pi(w lambda) Phi_{w lambda}`, with one coefficient table
/// per Weyl image.
#[derive(Debug, Clone)]
pub struct SphericalEvaluator {
    pub base: RootSystemData,
    pub model: SeriesModel,
    pub lambda: SpectralPoint,
    tables: Vec<CoeffTable>,
    cvals: Vec<Complex64>,
}

/// Reject spectral parameters with an integral coroot pairing.
pub fn check_generic(base: &RootSystemData, lambda: &SpectralPoint) -> Result<()> {
    for a in &base.positive_roots {
        let p = base.pairing(lambda, &a.coords);
        if (p.re - p.re.round()).abs() < 1e-9 && p.im.abs() < 1e-9 {
            return Err(Error::IntegralParameter { pairing: p });
        }
    }
    Ok(())
}

impl SphericalEvaluator {
    pub fn new(
        base: &RootSystemData,
        pi: SmallKType,
        lambda: &SpectralPoint,
        max_height: usize,
    ) -> Result<Self> {
        let cf = CFunction::new(base, pi);
        Self::with_cfunction(base, &cf, lambda, max_height)
    }

    pub fn with_cfunction(
        base: &RootSystemData,
        cf: &CFunction,
        lambda: &SpectralPoint,
        max_height: usize,
    ) -> Result<Self> {
        check_generic(base, lambda)?;
        let model = SeriesModel::new(base, cf.pi)?;
        let w = weyl_group(base);
        let engine = Engine::new(&model.engine, model.k);
        let mut tables = Vec::with_capacity(w.order());
        let mut cvals = Vec::with_capacity(w.order());
        for el in &w.elements {
            let wl = el.act_spectral(base, lambda);
            let c = cf.eval(&wl);
            if c.is_pole {
                return Err(Error::IntegralParameter {
                    pairing: wl.coords[0],
                });
            }
            cvals.push(c.value);
            tables.push(build_table(&engine, &wl, max_height)?);
        }
        Ok(SphericalEvaluator {
            base: base.clone(),
            model,
            lambda: lambda.clone(),
            tables,
            cvals,
        })
    }

    pub fn max_height(&self) -> usize {
        self.tables[0].max_height
    }

    /// Value at `H` with an absolute tail tolerance per Weyl term; returns
    /// the value and the summed tail bound.
    pub fn eval(&self, y: &[f64], tol: f64) -> Result<(Complex64, f64)> {
        let g = self.model.gauge(&self.base, y);
        let mut acc = Complex64::new(0.0, 0.0);
        let mut bound = 0.0;
        let terms = self.tables.len() as f64;
        for (t, c) in self.tables.iter().zip(&self.cvals) {
            let term_tol = if tol.is_finite() {
                tol / (terms * c.norm() * g).max(1e-300)
            } else {
                tol
            };
            let v = phi_from_table(&self.model.engine, t, y, term_tol)?;
            acc += c * v.value;
            bound += c.norm() * v.tail_bound;
        }
        Ok((acc * g, bound * g))
    }
}

/// `Upsilon^pi(phi^pi_lambda)(H)` for `pi` in {Triv, Pi1}.
pub fn upsilon_phi(
    base: &RootSystemData,
    pi: SmallKType,
    lambda: &SpectralPoint,
    y: &[f64],
    tol: f64,
) -> Result<Complex64> {
    if !base.is_strictly_dominant(y) {
        return Err(Error::NotDominant(y.to_vec()));
    }
    let mut n = DEFAULT_MAX_HEIGHT;
    loop {
        let ev = SphericalEvaluator::new(base, pi, lambda, n)?;
        let (v, b) = ev.eval(y, tol)?;
        if b <= tol {
            return Ok(v);
        }
        if n >= 1024 {
            return Err(Error::TailTooLarge { bound: b, tol });
        }
        n *= 2;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn doubled_a1() -> RootSystemData {
        build_root_system(RootSystemKind::Doubled(Box::new(RootSystemKind::A1)), 1.0).unwrap()
    }

    fn oracle_coeffs(l: Complex64, n: usize) -> Vec<Complex64> {
        // (1/2)_j ((1-l)/2)_j / ((1 - l/2)_j j!)
        let mut out = vec![c(1.0, 0.0)];
        let mut v = c(1.0, 0.0);
        for j in 0..n {
            let jf = j as f64;
            v = v * (0.5 + jf) * ((1.0 - l) / 2.0 + jf) / ((1.0 - l / 2.0 + jf) * (jf + 1.0));
            out.push(v);
        }
        out
    }

    #[test]
    fn rank_one_matches_hypergeometric_coefficients() {
        let r = doubled_a1();
        for l in [c(0.37, 0.0), c(0.2, 1.7), c(-0.6, -3.0)] {
            let t = coeff_table(
                &r,
                MultiplicityFunction::uniform(0.5),
                &SpectralPoint::new(vec![l]),
                12,
            )
            .unwrap();
            let o = oracle_coeffs(l, 12);
            for n in 0..=12 {
                let g = t.get(&[n]).unwrap();
                assert!((g - o[n]).norm() <= 1e-12 * o[n].norm().max(1.0), "n = {n}");
            }
        }
    }

    #[test]
    fn leading_term_only() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let lam = SpectralPoint::new(vec![c(0.3, 0.2), c(0.45, -0.1)]);
        let k = MultiplicityFunction::uniform(0.5);
        let t = coeff_table(&r, k, &lam, 0).unwrap();
        let y = [0.7, 0.4];
        let v = phi_from_table(&r, &t, &y, f64::INFINITY).unwrap();
        let expect = (r.lambda_at(&lam, &y) - 0.5 * r.rho_at(&y)).exp();
        assert!((v.value - expect).norm() < 1e-14);
    }

    #[test]
    fn resonance_is_rejected() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        // <2 lambda - alpha_1, alpha_1> = 0 means lambda_{alpha_1} = 1
        let lam = SpectralPoint::new(vec![c(1.0, 0.0), c(0.3, 0.1)]);
        let e = coeff_table(&r, MultiplicityFunction::uniform(0.5), &lam, 5);
        assert!(matches!(e, Err(Error::Resonance { .. })));
    }

    #[test]
    fn asymptotics_of_phi() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let lam = SpectralPoint::new(vec![c(0.3, 0.7), c(0.2, -0.4)]);
        let k = MultiplicityFunction::uniform(0.5);
        let y = [30.0 * 0.4, 30.0 * 0.5];
        let v = phi(&r, k, &lam, &y, 1e-12).unwrap();
        let lead = (r.lambda_at(&lam, &y) - 0.5 * r.rho_at(&y)).exp();
        assert!((v.value / lead - 1.0).norm() < 1e-8);
    }

    #[test]
    fn limit_gives_c_function() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        // deep enough that the w != e terms are below e^{-13}
        let lam = SpectralPoint::new(vec![c(1.3, 0.3), c(1.1, -0.2)]);
        let y0 = [0.6, 0.5];
        let t = 25.0;
        let y: Vec<f64> = y0.iter().map(|v| v * t).collect();
        for pi in [SmallKType::Triv, SmallKType::Pi1] {
            let v = upsilon_phi(&r, pi, &lam, &y, 1e-12).unwrap();
            let scaled = v * (-(r.lambda_at(&lam, &y)) + r.rho_at(&y)).exp();
            let cv = CFunction::new(&r, pi).eval(&lam).value;
            assert!(
                (scaled - cv).norm() < 1e-5 * cv.norm(),
                "{pi}: {scaled} vs {cv}"
            );
        }
    }

    #[test]
    fn triv_is_real_on_imaginary_axis() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let lam = SpectralPoint::imaginary(&[0.7, -0.3]);
        let v = upsilon_phi(&r, SmallKType::Triv, &lam, &[0.6, 0.5], 1e-12).unwrap();
        assert!(v.im.abs() < 1e-9, "{v}");
    }

    #[test]
    fn integral_parameter_rejected() {
        let r = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let lam = SpectralPoint::new(vec![c(2.0, 0.0), c(0.3, 0.1)]);
        assert!(upsilon_phi(&r, SmallKType::Triv, &lam, &[0.5, 0.5], 1e-10).is_err());
        let lam = SpectralPoint::new(vec![c(0.2, 0.1), c(0.3, 0.1)]);
        assert!(upsilon_phi(&r, SmallKType::Triv, &lam, &[0.0, 0.5], 1e-10).is_err());
        assert!(upsilon_phi(&r, SmallKType::Pi2, &lam, &[0.5, 0.5], 1e-10).is_err());
    }
}

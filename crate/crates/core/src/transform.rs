//! Spherical transform, continuous inversion and the shifted-contour inverse.
//!
//! Points of the flat are written `y_i = alpha_i(H)`, so the positive
//! chamber is the open positive quadrant. With the scaled Gram matrix `sG`
//! the Lebesgue measure is `dH = dy / sqrt(det sG)`, and on `i a*` with
//! `lambda = i t` in coroot coordinates the dual measure is
//! `dlambda = prod_i (s G_ii / 2) / sqrt(det sG) / (2 pi)^r dt`.
//! Their product does not depend on `s`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::sync::Arc;

use num_complex::Complex64;

use crate::cfun::{CFunction, SmallKType};
use crate::hcseries::{
    check_generic, coeff_table, phi_from_table, SeriesModel, SphericalEvaluator,
};
use crate::quad::gauss_legendre;
use crate::rootsys::{weyl_group, RootSystemData, SpectralPoint, WeylGroup};
use crate::{Error, Result};

/// `prod_{alpha > 0} |2 sinh alpha(H)|^{m_alpha}`.
pub fn delta_weight(r: &RootSystemData, y: &[f64]) -> f64 {
    r.positive_roots
        .iter()
        .map(|a| {
            let v = RootSystemData::vector_at(&a.coords, y);
            (2.0 * v.sinh()).abs().powi(a.multiplicity as i32)
        })
        .product()
}

/// Density of `dH` against `dy`.
pub fn flat_measure(r: &RootSystemData) -> f64 {
    1.0 / r.det_gram().sqrt()
}

/// Density of `dlambda` against `dt` for `lambda = i t` in coroot coordinates.
pub fn spectral_measure(r: &RootSystemData) -> f64 {
    let num: f64 = (0..r.rank)
        .map(|i| r.metric_scale * r.base_gram[i][i] as f64 / 2.0)
        .product();
    num / r.det_gram().sqrt() / (2.0 * PI).powi(r.rank as i32)
}

/// Complex bilinear `<lambda, mu>` in the active metric.
pub fn spectral_ip(r: &RootSystemData, a: &SpectralPoint, b: &SpectralPoint) -> Complex64 {
    let xa = r.lambda_simple_coords(a);
    let xb = r.lambda_simple_coords(b);
    let mut s = Complex64::new(0.0, 0.0);
    for i in 0..r.rank {
        for j in 0..r.rank {
            s += xa[i] * r.base_gram[i][j] as f64 * xb[j];
        }
    }
    s * r.metric_scale
}

/// Move `y` into the closed positive chamber by simple reflections.
pub fn fold_to_chamber(r: &RootSystemData, y: &[f64]) -> Vec<f64> {
    let mut y = y.to_vec();
    for _ in 0..64 {
        let Some(i) = (0..r.rank).find(|&i| y[i] < 0.0) else {
            break;
        };
        let yi = y[i];
        for j in 0..r.rank {
            // alpha_j(s_i H) = alpha_j(H) - <alpha_j, alpha_i^vee> alpha_i(H)
            let p = 2 * r.base_gram[j][i] / r.base_gram[i][i];
            y[j] -= p as f64 * yi;
        }
    }
    y
}

/// A W-invariant function on the flat, described on the closed chamber.
#[derive(Clone)]
pub struct RadialFunction {
    pub rank: usize,
    /// Support radius in the normalised radius `r = sqrt(2 y^T G^{-1} y)`.
    pub radius: f64,
    kind: RadialKind,
}

#[derive(Clone)]
enum RadialKind {
    Radial(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
    Chamber(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
    Sampled(SampledGrid),
    Zero,
}

/// Values on a uniform grid of the closed chamber in `y` coordinates.
#[derive(Debug, Clone)]
pub struct SampledGrid {
    pub axes: Vec<Vec<f64>>,
    /// Row-major over the axes.
    pub values: Vec<f64>,
}

impl RadialFunction {
    pub fn zero(rank: usize) -> Self {
        RadialFunction {
            rank,
            radius: 0.0,
            kind: RadialKind::Zero,
        }
    }

    /// A function of the normalised radius, vanishing for `r >= radius`.
    pub fn radial(
        rank: usize,
        radius: f64,
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialFunction {
            rank,
            radius,
            kind: RadialKind::Radial(Arc::new(f)),
        }
    }

    /// Any function on the chamber; evaluation elsewhere folds into it.
    pub fn on_chamber(
        rank: usize,
        radius: f64,
        f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        RadialFunction {
            rank,
            radius,
            kind: RadialKind::Chamber(Arc::new(f)),
        }
    }

    /// `exp(-1 / (1 - (r/R)^2))` on `r < R`.
    pub fn bump(rank: usize, radius: f64) -> Self {
        Self::radial(rank, radius, move |r| bump(r / radius))
    }

    /// `exp(-r^2 / (2 sigma^2))` cut off smoothly by a bump of radius `R`,
    /// normalised so that the bump factor is 1 at the origin.
    pub fn gaussian_bump(rank: usize, sigma: f64, radius: f64) -> Self {
        Self::radial(rank, radius, move |r| {
            (-r * r / (2.0 * sigma * sigma)).exp() * bump(r / radius) * std::f64::consts::E
        })
    }

    pub fn sampled(grid: SampledGrid) -> Result<Self> {
        let rank = grid.axes.len();
        let expected: usize = grid.axes.iter().map(|a| a.len()).product();
        if rank == 0 || rank > 2 || expected != grid.values.len() {
            return Err(Error::Parse("grid shape does not match values".into()));
        }
        for a in &grid.axes {
            if a.len() < 3 || a[0] < 0.0 || a.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::Parse(
                    "grid axes must be increasing and start in the chamber".into(),
                ));
            }
        }
        Ok(RadialFunction {
            rank,
            radius: f64::INFINITY,
            kind: RadialKind::Sampled(grid),
        })
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, RadialKind::Zero)
    }

    pub fn sampled_grid(&self) -> Option<&SampledGrid> {
        match &self.kind {
            RadialKind::Sampled(g) => Some(g),
            _ => None,
        }
    }

    /// Value at any point of the flat.
    pub fn eval(&self, r: &RootSystemData, y: &[f64]) -> f64 {
        match &self.kind {
            RadialKind::Zero => 0.0,
            RadialKind::Radial(f) => {
                let rr = r.chamber_radius(y);
                if rr >= self.radius {
                    0.0
                } else {
                    f(rr)
                }
            }
            RadialKind::Chamber(f) => {
                let yc = fold_to_chamber(r, y);
                if r.chamber_radius(&yc) >= self.radius {
                    0.0
                } else {
                    f(&yc)
                }
            }
            RadialKind::Sampled(g) => {
                let yc = fold_to_chamber(r, y);
                g.interpolate(&yc)
            }
        }
    }

    /// Box `[0, Y_i]` in `y` containing the support inside the chamber.
    pub fn chamber_box(&self, r: &RootSystemData) -> Vec<f64> {
        match &self.kind {
            RadialKind::Sampled(g) => g.axes.iter().map(|a| *a.last().unwrap()).collect(),
            _ => (0..r.rank)
                .map(|i| self.radius * (r.base_gram[i][i] as f64 / 2.0).sqrt())
                .collect(),
        }
    }
}

fn bump(u: f64) -> f64 {
    if u.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - u * u)).exp()
    }
}

impl SampledGrid {
    fn interpolate(&self, y: &[f64]) -> f64 {
        // multilinear interpolation, zero outside the grid
        let mut idx = Vec::with_capacity(y.len());
        for (a, v) in self.axes.iter().zip(y) {
            if *v < a[0] || *v > *a.last().unwrap() {
                return 0.0;
            }
            let k = a.partition_point(|x| x <= v).clamp(1, a.len() - 1) - 1;
            let t = (v - a[k]) / (a[k + 1] - a[k]);
            idx.push((k, t));
        }
        match idx.len() {
            1 => {
                let (k, t) = idx[0];
                self.values[k] * (1.0 - t) + self.values[k + 1] * t
            }
            _ => {
                let n2 = self.axes[1].len();
                let (k1, t1) = idx[0];
                let (k2, t2) = idx[1];
                let v = |i: usize, j: usize| self.values[i * n2 + j];
                (1.0 - t1) * ((1.0 - t2) * v(k1, k2) + t2 * v(k1, k2 + 1))
                    + t1 * ((1.0 - t2) * v(k1 + 1, k2) + t2 * v(k1 + 1, k2 + 1))
            }
        }
    }

    /// Reads `H1[,H2],value` rows.
    pub fn read_csv<R: Read>(rd: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rd);
        let mut rows: Vec<Vec<f64>> = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let row: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            rows.push(row.map_err(|e| Error::Parse(e.to_string()))?);
        }
        let width = rows.first().map(|r| r.len()).unwrap_or(0);
        if !(2..=3).contains(&width) || rows.iter().any(|r| r.len() != width) {
            return Err(Error::Parse("expected columns H1[,H2],value".into()));
        }
        let rank = width - 1;
        let mut axes: Vec<Vec<f64>> = (0..rank)
            .map(|i| {
                let mut v: Vec<f64> = rows.iter().map(|r| r[i]).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            })
            .collect();
        let total: usize = axes.iter().map(|a| a.len()).product();
        if total != rows.len() {
            return Err(Error::Parse("samples do not form a full grid".into()));
        }
        let mut values = vec![0.0; total];
        for row in &rows {
            let mut k = 0;
            for (i, a) in axes.iter().enumerate() {
                let p = a.partition_point(|x| *x < row[i]);
                k = k * a.len() + p;
            }
            values[k] = row[rank];
        }
        axes.shrink_to_fit();
        Ok(SampledGrid { axes, values })
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        match self.axes.len() {
            1 => {
                wr.write_record(["H1", "value"])?;
                for (h, v) in self.axes[0].iter().zip(&self.values) {
                    wr.write_record([h.to_string(), v.to_string()])?;
                }
            }
            _ => {
                wr.write_record(["H1", "H2", "value"])?;
                let n2 = self.axes[1].len();
                for (i, h1) in self.axes[0].iter().enumerate() {
                    for (j, h2) in self.axes[1].iter().enumerate() {
                        wr.write_record([
                            h1.to_string(),
                            h2.to_string(),
                            self.values[i * n2 + j].to_string(),
                        ])?;
                    }
                }
            }
        }
        wr.flush()?;
        Ok(())
    }
}

/// Forward quadrature settings.
#[derive(Debug, Clone)]
pub struct ForwardSpec {
    /// Gauss-Legendre nodes per axis for analytic input.
    pub nodes: usize,
    /// Absolute tolerance on the series tail at each node.
    pub series_tol: f64,
    /// Coefficient tables are built up to this height; nodes needing more
    /// contribute their tail bound to the error estimate instead.
    pub max_height: usize,
    /// Also run the coarser rule and report the difference.
    pub estimate_error: bool,
    pub target: Option<f64>,
}

impl Default for ForwardSpec {
    fn default() -> Self {
        ForwardSpec {
            nodes: 32,
            series_tol: 1e-10,
            max_height: 120,
            estimate_error: true,
            target: None,
        }
    }
}

/// Inverse quadrature settings: a trapezoid rule on the lattice `step * Z^r`
/// in coroot coordinates, truncated to the W-invariant ball of `radius`.
#[derive(Debug, Clone)]
pub struct InverseSpec {
    pub step: f64,
    pub radius: f64,
    pub series_tol: f64,
    pub target: Option<f64>,
}

impl Default for InverseSpec {
    fn default() -> Self {
        InverseSpec {
            step: 0.1,
            radius: 12.0,
            series_tol: 1e-10,
            target: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
}

/// Values of `Upsilon^pi(phi_lambda)` and of `Phi_lambda` on the chamber.
pub trait SphericalProvider: Sync {
    fn upsilon(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64>;
    fn phi(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64>;
}

/// Built-in provider from the Harish-Chandra series (Triv and Pi1).
pub struct SeriesProvider {
    pub base: RootSystemData,
    pub pi: SmallKType,
    pub tol: f64,
    model: SeriesModel,
    cf: CFunction,
}

impl SeriesProvider {
    pub fn new(base: &RootSystemData, pi: SmallKType, tol: f64) -> Result<Self> {
        Ok(SeriesProvider {
            base: base.clone(),
            pi,
            tol,
            model: SeriesModel::new(base, pi)?,
            cf: CFunction::new(base, pi),
        })
    }

    fn height_for(&self, y: &[f64]) -> usize {
        let f = self.model.engine.lattice_factor as f64;
        let ymin = y.iter().cloned().fold(f64::INFINITY, f64::min).max(1e-3);
        let n = ((1.0 / self.tol).ln() / (f * ymin)).ceil() as usize + 8;
        n.clamp(8, if self.base.rank == 1 { 20_000 } else { 400 })
    }
}

impl SphericalProvider for SeriesProvider {
    fn upsilon(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64> {
        let ev =
            SphericalEvaluator::with_cfunction(&self.base, &self.cf, lambda, self.height_for(y))?;
        Ok(ev.eval(y, self.tol)?.0)
    }

    fn phi(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64> {
        let t = coeff_table(&self.model.engine, self.model.k, lambda, self.height_for(y))?;
        let v = phi_from_table(&self.model.engine, &t, y, self.tol)?;
        let g = match self.pi {
            SmallKType::Pi1 => {
                let mut g = (-0.5 * self.base.rho_at(y)).exp();
                for a in &self.base.positive_roots {
                    g /= (1.0 + (-RootSystemData::vector_at(&a.coords, y)).exp()).sqrt();
                }
                g
            }
            _ => 1.0,
        };
        Ok(v.value * g)
    }
}

/// Provider returning zero everywhere.
pub struct ZeroProvider;

impl SphericalProvider for ZeroProvider {
    fn upsilon(&self, _: &SpectralPoint, _: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
    fn phi(&self, _: &SpectralPoint, _: &[f64]) -> Result<Complex64> {
        Ok(Complex64::new(0.0, 0.0))
    }
}

/// Provider keeping only the leading exponential `e^{(lambda - rho)(H)}` of
/// `Phi_lambda`; a stand-in where no series is available.
pub struct LeadingTermProvider {
    pub base: RootSystemData,
}

impl SphericalProvider for LeadingTermProvider {
    fn upsilon(&self, _: &SpectralPoint, _: &[f64]) -> Result<Complex64> {
        Err(Error::NoProvider(
            "leading-term provider has no Upsilon values".into(),
        ))
    }
    fn phi(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64> {
        Ok((self.base.lambda_at(lambda, y) - self.base.rho_at(y)).exp())
    }
}

/// Provider read from CSV rows
/// `re_l1,im_l1,re_l2,im_l2,H1,H2,upsilon_re,upsilon_im[,phi_re,phi_im]`.
pub struct TableProvider {
    rows: HashMap<[i64; 6], (Complex64, Option<Complex64>)>,
}

fn key(lambda: &SpectralPoint, y: &[f64]) -> [i64; 6] {
    let q = |v: f64| (v * 1e8).round() as i64;
    [
        q(lambda.coords[0].re),
        q(lambda.coords[0].im),
        q(lambda.coords.get(1).map_or(0.0, |c| c.re)),
        q(lambda.coords.get(1).map_or(0.0, |c| c.im)),
        q(y[0]),
        q(*y.get(1).unwrap_or(&0.0)),
    ]
}

impl TableProvider {
    pub fn read_csv<R: Read>(rd: R) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rd);
        let mut rows = HashMap::new();
        for rec in reader.records() {
            let rec = rec?;
            let v: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            let v = v.map_err(|e| Error::Parse(e.to_string()))?;
            if v.len() != 8 && v.len() != 10 {
                return Err(Error::Parse("provider rows need 8 or 10 columns".into()));
            }
            let lam =
                SpectralPoint::new(vec![Complex64::new(v[0], v[1]), Complex64::new(v[2], v[3])]);
            let phi = (v.len() == 10).then(|| Complex64::new(v[8], v[9]));
            rows.insert(key(&lam, &v[4..6]), (Complex64::new(v[6], v[7]), phi));
        }
        Ok(TableProvider { rows })
    }
}

impl SphericalProvider for TableProvider {
    fn upsilon(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64> {
        self.rows.get(&key(lambda, y)).map(|r| r.0).ok_or_else(|| {
            Error::NoProvider(format!("no table row for {:?} at {y:?}", lambda.coords))
        })
    }
    fn phi(&self, lambda: &SpectralPoint, y: &[f64]) -> Result<Complex64> {
        self.rows
            .get(&key(lambda, y))
            .and_then(|r| r.1)
            .ok_or_else(|| {
                Error::NoProvider(format!("no Phi row for {:?} at {y:?}", lambda.coords))
            })
    }
}

/// A function on the spectrum.
pub trait Spectrum: Sync {
    fn value(&self, lambda: &SpectralPoint) -> Complex64;
    /// Whether `F(w lambda) = F(lambda)`; lets the inversion sum over
    /// dominant orbit representatives only.
    fn w_invariant(&self) -> bool {
        false
    }
}

/// Wraps a closure as a [`Spectrum`].
pub struct FnSpectrum<F>(pub F, pub bool);

impl<F: Fn(&SpectralPoint) -> Complex64 + Sync> Spectrum for FnSpectrum<F> {
    fn value(&self, lambda: &SpectralPoint) -> Complex64 {
        (self.0)(lambda)
    }
    fn w_invariant(&self) -> bool {
        self.1
    }
}

/// Values on imaginary lattice points `i step n`; W-invariant spectra keep
/// only dominant representatives.
#[derive(Debug, Clone)]
pub struct SampledSpectrum {
    pub rank: usize,
    pub step: f64,
    pub values: HashMap<Vec<i64>, Complex64>,
    pub invariant: bool,
    group: Option<(RootSystemData, WeylGroup)>,
}

impl SampledSpectrum {
    pub fn new(r: &RootSystemData, step: f64, invariant: bool) -> Self {
        SampledSpectrum {
            rank: r.rank,
            step,
            values: HashMap::new(),
            invariant,
            group: Some((r.clone(), weyl_group(r))),
        }
    }

    fn lattice_point(&self, lambda: &SpectralPoint) -> Option<Vec<i64>> {
        let mut n = Vec::with_capacity(self.rank);
        for c in &lambda.coords {
            if c.re.abs() > 1e-12 {
                return None;
            }
            let k = (c.im / self.step).round();
            if (c.im - k * self.step).abs() > 1e-9 * self.step.max(1.0) {
                return None;
            }
            n.push(k as i64);
        }
        Some(n)
    }

    fn dominant(&self, n: &[i64]) -> Vec<i64> {
        match &self.group {
            Some((r, w)) if self.invariant => w
                .elements
                .iter()
                .map(|e| e.act_coroot_lattice(r, n))
                .find(|m| m.iter().all(|v| *v >= 0))
                .unwrap_or_else(|| n.to_vec()),
            _ => n.to_vec(),
        }
    }

    pub fn insert(&mut self, n: Vec<i64>, v: Complex64) {
        self.values.insert(n, v);
    }

    /// Rows `Im lambda_{alpha_1}[, Im lambda_{alpha_2}], re, im`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        let mut keys: Vec<&Vec<i64>> = self.values.keys().collect();
        keys.sort();
        if self.rank == 1 {
            wr.write_record(["im_l1", "re", "im"])?;
        } else {
            wr.write_record(["im_l1", "im_l2", "re", "im"])?;
        }
        for k in keys {
            let v = self.values[k];
            let mut rec: Vec<String> = k
                .iter()
                .map(|n| (*n as f64 * self.step).to_string())
                .collect();
            rec.push(v.re.to_string());
            rec.push(v.im.to_string());
            wr.write_record(rec)?;
        }
        wr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: &RootSystemData, rd: R, invariant: bool) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().has_headers(true).from_reader(rd);
        let mut rows = Vec::new();
        for rec in reader.records() {
            let rec = rec?;
            let v: std::result::Result<Vec<f64>, _> =
                rec.iter().map(|s| s.trim().parse::<f64>()).collect();
            let v = v.map_err(|e| Error::Parse(e.to_string()))?;
            // an optional trailing column holds an error estimate
            if v.len() != r.rank + 2 && v.len() != r.rank + 3 {
                return Err(Error::Parse(format!("expected {} columns", r.rank + 2)));
            }
            rows.push(v);
        }
        // the step is the smallest positive coordinate gap
        let mut step = f64::INFINITY;
        for row in &rows {
            for c in &row[..r.rank] {
                if c.abs() > 1e-12 {
                    step = step.min(c.abs());
                }
            }
        }
        if !step.is_finite() {
            step = 1.0;
        }
        let mut s = SampledSpectrum::new(r, step, invariant);
        for row in rows {
            let n: Vec<i64> = row[..r.rank]
                .iter()
                .map(|c| (c / step).round() as i64)
                .collect();
            s.insert(n, Complex64::new(row[r.rank], row[r.rank + 1]));
        }
        Ok(s)
    }
}

impl Spectrum for SampledSpectrum {
    fn value(&self, lambda: &SpectralPoint) -> Complex64 {
        match self.lattice_point(lambda) {
            Some(n) => self
                .values
                .get(&self.dominant(&n))
                .copied()
                .unwrap_or(Complex64::new(0.0, 0.0)),
            None => Complex64::new(0.0, 0.0),
        }
    }
    fn w_invariant(&self) -> bool {
        self.invariant
    }
}

fn require_series(pi: SmallKType) -> Result<()> {
    if pi == SmallKType::Pi2 {
        return Err(Error::NoProvider("pi2".into()));
    }
    Ok(())
}

/// `f^(lambda) = int_{a+} f(H) Upsilon^pi(phi_{-lambda})(H) delta(H) dH`,
/// i.e. the average over `a` of the W-invariant integrand.
pub fn forward_transform(
    r: &RootSystemData,
    pi: SmallKType,
    f: &RadialFunction,
    lambda: &SpectralPoint,
    spec: &ForwardSpec,
) -> Result<Estimate> {
    require_series(pi)?;
    if f.is_zero() {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
        });
    }
    let ev = SphericalEvaluator::new(r, pi, &lambda.neg(), spec.max_height)?;
    let out = forward_with(r, f, &ev, spec)?;
    if let Some(t) = spec.target {
        if out.error > t {
            return Err(Error::UnderResolved {
                estimate: out.error,
                target: t,
            });
        }
    }
    Ok(out)
}

fn forward_with(
    r: &RootSystemData,
    f: &RadialFunction,
    ev: &SphericalEvaluator,
    spec: &ForwardSpec,
) -> Result<Estimate> {
    let jac = flat_measure(r);
    let integrand = |y: &[f64]| -> Result<(Complex64, f64)> {
        if y.iter().any(|v| *v <= 0.0) {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let fv = f.eval(r, y);
        if fv == 0.0 {
            return Ok((Complex64::new(0.0, 0.0), 0.0));
        }
        let d = delta_weight(r, y);
        let (u, b) = ev.eval(y, spec.series_tol)?;
        Ok((u * fv * d, b * (fv * d).abs()))
    };
    match f.sampled_grid() {
        Some(g) => {
            let (fine, tail) = trapezoid(g, 1, &integrand)?;
            let err = if spec.estimate_error {
                let (coarse, _) = trapezoid(g, 2, &integrand)?;
                (fine - coarse).norm()
            } else {
                0.0
            };
            Ok(Estimate {
                value: fine * jac,
                error: (err + tail) * jac,
            })
        }
        None => {
            let bx = f.chamber_box(r);
            let (fine, tail) = gauss_box(&bx, spec.nodes, &integrand)?;
            let err = if spec.estimate_error {
                let (coarse, _) = gauss_box(&bx, (spec.nodes * 2).div_ceil(3), &integrand)?;
                (fine - coarse).norm()
            } else {
                0.0
            };
            Ok(Estimate {
                value: fine * jac,
                error: (err + tail) * jac,
            })
        }
    }
}

type Integrand<'a> = dyn Fn(&[f64]) -> Result<(Complex64, f64)> + 'a;

fn gauss_box(bx: &[f64], n: usize, g: &Integrand) -> Result<(Complex64, f64)> {
    let rules: Vec<(Vec<f64>, Vec<f64>)> = bx.iter().map(|b| gauss_legendre(n, 0.0, *b)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    match bx.len() {
        1 => {
            for (x, w) in rules[0].0.iter().zip(&rules[0].1) {
                let (v, b) = g(&[*x])?;
                acc += v * w;
                tail += b * w;
            }
        }
        _ => {
            for (x1, w1) in rules[0].0.iter().zip(&rules[0].1) {
                for (x2, w2) in rules[1].0.iter().zip(&rules[1].1) {
                    let (v, b) = g(&[*x1, *x2])?;
                    acc += v * (w1 * w2);
                    tail += b * w1 * w2;
                }
            }
        }
    }
    Ok((acc, tail))
}

/// Trapezoid rule on the sample grid, using every `stride`-th sample.
fn trapezoid(grid: &SampledGrid, stride: usize, g: &Integrand) -> Result<(Complex64, f64)> {
    let weights = |a: &[f64]| -> Vec<(usize, f64)> {
        let idx: Vec<usize> = (0..a.len()).step_by(stride).collect();
        idx.iter()
            .enumerate()
            .map(|(k, &i)| {
                let left = if k > 0 { a[i] - a[idx[k - 1]] } else { 0.0 };
                let right = if k + 1 < idx.len() {
                    a[idx[k + 1]] - a[i]
                } else {
                    0.0
                };
                (i, 0.5 * (left + right))
            })
            .collect()
    };
    let ws: Vec<Vec<(usize, f64)>> = grid.axes.iter().map(|a| weights(a)).collect();
    let mut acc = Complex64::new(0.0, 0.0);
    let mut tail = 0.0;
    match grid.axes.len() {
        1 => {
            for &(i, w) in &ws[0] {
                let (v, b) = g(&[grid.axes[0][i]])?;
                acc += v * w;
                tail += b * w;
            }
        }
        _ => {
            for &(i, w1) in &ws[0] {
                for &(j, w2) in &ws[1] {
                    let (v, b) = g(&[grid.axes[0][i], grid.axes[1][j]])?;
                    acc += v * (w1 * w2);
                    tail += b * w1 * w2;
                }
            }
        }
    }
    Ok((acc, tail))
}

/// Dominant lattice points `n` with all `n_i > 0` and `|step n| <= radius`.
pub fn dominant_lattice(r: &RootSystemData, step: f64, radius: f64) -> Vec<Vec<i64>> {
    let mut out = Vec::new();
    // t_i <= 2 |t| / |alpha_i| at scale 1
    let lim: Vec<i64> = (0..r.rank)
        .map(|i| (radius / step * (4.0 / r.base_gram[i][i] as f64).sqrt()).ceil() as i64 + 1)
        .collect();
    match r.rank {
        1 => {
            for n in 1..=lim[0] {
                if r.spectral_radius(&[n as f64 * step]) <= radius {
                    out.push(vec![n]);
                }
            }
        }
        _ => {
            for n1 in 1..=lim[0] {
                for n2 in 1..=lim[1] {
                    let t = [n1 as f64 * step, n2 as f64 * step];
                    if r.spectral_radius(&t) <= radius {
                        out.push(vec![n1, n2]);
                    }
                }
            }
        }
    }
    out
}

/// Every lattice point (any sign) with `|step n| <= radius`.
pub fn full_lattice(r: &RootSystemData, step: f64, radius: f64) -> Vec<Vec<i64>> {
    let lim: Vec<i64> = (0..r.rank)
        .map(|i| (radius / step * (4.0 / r.base_gram[i][i] as f64).sqrt()).ceil() as i64 + 1)
        .collect();
    let mut out = Vec::new();
    match r.rank {
        1 => {
            for n in -lim[0]..=lim[0] {
                if r.spectral_radius(&[n as f64 * step]) <= radius {
                    out.push(vec![n]);
                }
            }
        }
        _ => {
            for n1 in -lim[0]..=lim[0] {
                for n2 in -lim[1]..=lim[1] {
                    let t = [n1 as f64 * step, n2 as f64 * step];
                    if r.spectral_radius(&t) <= radius {
                        out.push(vec![n1, n2]);
                    }
                }
            }
        }
    }
    out
}

/// `f^` on the dominant part of the lattice used by [`inverse_continuous`].
pub fn spectrum_on_lattice(
    r: &RootSystemData,
    pi: SmallKType,
    f: &RadialFunction,
    step: f64,
    radius: f64,
    spec: &ForwardSpec,
) -> Result<(SampledSpectrum, f64)> {
    require_series(pi)?;
    let cf = CFunction::new(r, pi);
    let mut s = SampledSpectrum::new(r, step, true);
    let mut worst: f64 = 0.0;
    for n in dominant_lattice(r, step, radius) {
        let t: Vec<f64> = n.iter().map(|v| *v as f64 * step).collect();
        let lam = SpectralPoint::imaginary(&t);
        if check_generic(r, &lam).is_err() {
            continue;
        }
        let ev = SphericalEvaluator::with_cfunction(r, &cf, &lam.neg(), spec.max_height)?;
        let e = forward_with(r, f, &ev, spec)?;
        worst = worst.max(e.error);
        s.insert(n, e.value);
    }
    Ok((s, worst))
}

/// `f(H) = (1/#W) int_{i a*} F(lambda) Upsilon^pi(phi_lambda)(H) |c^pi(lambda)|^{-2} dlambda`.
///
/// Lattice points on walls are skipped: the density vanishes there. The
/// error estimate is the absolute sum over the outermost tenth of the ball.
pub fn inverse_continuous(
    r: &RootSystemData,
    pi: SmallKType,
    spectrum: &dyn Spectrum,
    y: &[f64],
    spec: &InverseSpec,
    provider: Option<&dyn SphericalProvider>,
) -> Result<Estimate> {
    if !r.is_strictly_dominant(y) {
        return Err(Error::NotDominant(y.to_vec()));
    }
    let builtin;
    let provider: &dyn SphericalProvider = match provider {
        Some(p) => p,
        None => {
            require_series(pi)?;
            builtin = SeriesProvider::new(r, pi, spec.series_tol)?;
            &builtin
        }
    };
    let cf = CFunction::new(r, pi);
    let w = weyl_group(r);
    let jac = spectral_measure(r) * spec.step.powi(r.rank as i32);
    let order = w.order() as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    let mut shell = 0.0;
    for n in dominant_lattice(r, spec.step, spec.radius) {
        let t: Vec<f64> = n.iter().map(|v| *v as f64 * spec.step).collect();
        let lam = SpectralPoint::imaginary(&t);
        let fsum = if spectrum.w_invariant() {
            spectrum.value(&lam) * order
        } else {
            w.elements
                .iter()
                .map(|e| {
                    spectrum.value(&SpectralPoint::imaginary(
                        &e.act_coroot_lattice(r, &n)
                            .iter()
                            .map(|v| *v as f64 * spec.step)
                            .collect::<Vec<_>>(),
                    ))
                })
                .sum()
        };
        if fsum == Complex64::new(0.0, 0.0) {
            continue;
        }
        let dens = cf.density(&t);
        let u = provider.upsilon(&lam, y)?;
        let term = fsum * u * dens * jac / order;
        acc += term;
        if r.spectral_radius(&t) > 0.9 * spec.radius {
            shell += term.norm();
        }
    }
    if let Some(tg) = spec.target {
        if shell > tg {
            return Err(Error::UnderResolved {
                estimate: shell,
                target: tg,
            });
        }
    }
    Ok(Estimate {
        value: acc,
        error: shell,
    })
}

/// Check that `eta` lies in `-closure(a+*)` and that `c^pi(-lambda)^{-1}` is
/// regular on `Re lambda in eta - closure(a+*)`.
pub fn check_contour(r: &RootSystemData, pi: SmallKType, eta: &[f64]) -> Result<()> {
    let p = SpectralPoint::from_real(eta);
    if eta.iter().any(|v| *v > 0.0) {
        return Err(Error::BadContour(
            eta.to_vec(),
            "not in the closed negative chamber".into(),
        ));
    }
    if pi == SmallKType::Pi2 {
        for a in r
            .positive_roots
            .iter()
            .filter(|a| a.length == crate::rootsys::LengthClass::Short)
        {
            let v = r.pairing(&p, &a.coords).re;
            if v >= -0.5 {
                return Err(Error::BadContour(
                    eta.to_vec(),
                    format!("short pairing {v} is not below -1/2"),
                ));
            }
        }
    }
    Ok(())
}

/// `F^vee(H) = int_{eta + i a*} F(lambda) Phi_lambda(H) c^pi(-lambda)^{-1} dlambda`
/// by the trapezoid rule on the full lattice `eta + i step Z^r`.
pub fn arthur_inverse(
    r: &RootSystemData,
    pi: SmallKType,
    spectrum: &dyn Spectrum,
    y: &[f64],
    eta: &[f64],
    spec: &InverseSpec,
    provider: Option<&dyn SphericalProvider>,
) -> Result<Estimate> {
    if !r.is_strictly_dominant(y) {
        return Err(Error::NotDominant(y.to_vec()));
    }
    check_contour(r, pi, eta)?;
    let builtin;
    let provider: &dyn SphericalProvider = match provider {
        Some(p) => p,
        None => {
            require_series(pi)?;
            builtin = SeriesProvider::new(r, pi, spec.series_tol)?;
            &builtin
        }
    };
    let cf = CFunction::new(r, pi);
    let jac = spectral_measure(r) * spec.step.powi(r.rank as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    let mut shell = 0.0;
    for n in full_lattice(r, spec.step, spec.radius) {
        let t: Vec<f64> = n.iter().map(|v| *v as f64 * spec.step).collect();
        let lam = SpectralPoint::new(
            eta.iter()
                .zip(&t)
                .map(|(e, ti)| Complex64::new(*e, *ti))
                .collect(),
        );
        let fv = spectrum.value(&lam);
        if fv == Complex64::new(0.0, 0.0) {
            continue;
        }
        let cm = cf.eval(&lam.neg());
        if cm.is_pole {
            continue;
        }
        if cm.is_zero {
            return Err(Error::BadContour(
                eta.to_vec(),
                "c(-lambda) vanishes on the contour".into(),
            ));
        }
        let ph = provider.phi(&lam, y)?;
        let term = fv * ph / cm.value * jac;
        acc += term;
        if r.spectral_radius(&t) > 0.9 * spec.radius {
            shell += term.norm();
        }
    }
    Ok(Estimate {
        value: acc,
        error: shell,
    })
}

/// Euclidean Fourier round trip of `exp(-|H|^2 / 2)` with the measures
/// above, by trapezoid rules on both sides; returns the recovered value at
/// `y0`. Both steps scale with `sqrt(s)` so the grids are scale-free.
pub fn euclidean_round_trip(r: &RootSystemData, y0: &[f64]) -> f64 {
    let s = r.metric_scale;
    let gi = r.gram_inverse();
    let norm2 = |y: &[f64]| -> f64 {
        let mut q = 0.0;
        for i in 0..r.rank {
            for j in 0..r.rank {
                q += y[i] * gi[i][j] * y[j];
            }
        }
        q / s
    };
    let axis = |lim: f64, step: f64| -> Vec<f64> {
        let n = (lim / step).ceil() as i64;
        (-n..=n).map(|k| k as f64 * step).collect()
    };
    let product = |axes: Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        axes.iter().fold(vec![vec![]], |acc, ax| {
            acc.iter()
                .flat_map(|p| {
                    ax.iter().map(move |v| {
                        let mut q = p.clone();
                        q.push(*v);
                        q
                    })
                })
                .collect()
        })
    };
    let hs = 0.3 * s.sqrt();
    let ts = 0.3 / s.sqrt();
    let ys = product(
        (0..r.rank)
            .map(|i| axis(9.0 * (s * r.base_gram[i][i] as f64).sqrt(), hs))
            .collect(),
    );
    let tps = product(
        (0..r.rank)
            .map(|i| axis(9.0 / s.sqrt() * (2.0 / r.base_gram[i][i] as f64).sqrt(), ts))
            .collect(),
    );
    let fy: Vec<f64> = ys.iter().map(|y| (-0.5 * norm2(y)).exp()).collect();
    let dh = flat_measure(r) * hs.powi(r.rank as i32);
    let dl = spectral_measure(r) * ts.powi(r.rank as i32);
    let mut acc = Complex64::new(0.0, 0.0);
    for t in &tps {
        let x = r.lambda_simple_coords(&SpectralPoint::imaginary(t));
        let mut fh = Complex64::new(0.0, 0.0);
        for (y, v) in ys.iter().zip(&fy) {
            if *v < 1e-18 {
                continue;
            }
            let ph: f64 = x.iter().zip(y).map(|(c, yy)| c.im * yy).sum();
            fh += Complex64::from_polar(*v, -ph);
        }
        let ph0: f64 = x.iter().zip(y0).map(|(c, yy)| c.im * yy).sum();
        acc += fh * dh * Complex64::from_polar(1.0, ph0);
    }
    (acc * dl).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rootsys::{build_root_system, RootSystemKind};

    #[test]
    fn delta_values() {
        let a1 = build_root_system(RootSystemKind::A1, 1.0).unwrap();
        assert!((delta_weight(&a1, &[1.0]) - 2.0 * 1f64.sinh()).abs() < 1e-15);
        let g2 = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        assert_eq!(delta_weight(&g2, &[0.0, 0.0]), 0.0);
        let w = weyl_group(&g2);
        let y = [0.3, 0.7];
        let d = delta_weight(&g2, &y);
        for e in &w.elements {
            let wy = e.act_flat(2, &y);
            assert!((delta_weight(&g2, &wy) - d).abs() < 1e-12 * d);
        }
    }

    #[test]
    fn folding_preserves_radius() {
        let g2 = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let w = weyl_group(&g2);
        for e in &w.elements {
            let y = e.act_flat(2, &[0.4, 1.1]);
            let f = fold_to_chamber(&g2, &y);
            assert!((f[0] - 0.4).abs() < 1e-12 && (f[1] - 1.1).abs() < 1e-12);
        }
    }

    #[test]
    fn measure_constants() {
        let g2 = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        let c1 = 3f64.sqrt() / 2.0;
        // dlambda_{alpha_1} dlambda_{long} = 2 dt_1 dt_2
        assert!((spectral_measure(&g2) - 2.0 * c1 / (4.0 * PI * PI)).abs() < 1e-15);
        for s in [1.0, 4.0] {
            let r = build_root_system(RootSystemKind::G2, s).unwrap();
            let prod = spectral_measure(&r) * flat_measure(&r);
            assert!((prod - 1.0 / (4.0 * PI * PI)).abs() < 1e-15);
        }
    }

    #[test]
    fn euclidean_duality() {
        for kind in [RootSystemKind::A1, RootSystemKind::G2] {
            for s in [1.0, 4.0] {
                let r = build_root_system(kind.clone(), s).unwrap();
                let y0: Vec<f64> = if r.rank == 1 {
                    vec![0.4]
                } else {
                    vec![0.3, 0.2]
                };
                let got = euclidean_round_trip(&r, &y0);
                // chamber_radius is sqrt 2 |H| at scale 1
                let q = r.chamber_radius(&y0);
                let want = (-0.25 * q * q / s).exp();
                assert!((got - want).abs() < 1e-8, "{kind} s={s}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn zero_inputs() {
        let a1 = build_root_system(RootSystemKind::A1, 1.0).unwrap();
        let lam = SpectralPoint::imaginary(&[0.7]);
        let v = forward_transform(
            &a1,
            SmallKType::Triv,
            &RadialFunction::zero(1),
            &lam,
            &ForwardSpec::default(),
        )
        .unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
        let zero = FnSpectrum(|_: &SpectralPoint| Complex64::new(0.0, 0.0), true);
        let v = inverse_continuous(
            &a1,
            SmallKType::Triv,
            &zero,
            &[0.5],
            &InverseSpec::default(),
            None,
        )
        .unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
        let v = arthur_inverse(
            &a1,
            SmallKType::Triv,
            &zero,
            &[0.5],
            &[0.0],
            &InverseSpec::default(),
            None,
        )
        .unwrap();
        assert_eq!(v.value, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn contour_admissibility() {
        let g2 = build_root_system(RootSystemKind::G2, 1.0).unwrap();
        assert!(check_contour(&g2, SmallKType::Triv, &[0.0, 0.0]).is_ok());
        assert!(check_contour(&g2, SmallKType::Pi2, &[0.0, 0.0]).is_err());
        assert!(check_contour(&g2, SmallKType::Pi2, &[-1.0, -0.1]).is_ok());
        assert!(check_contour(&g2, SmallKType::Triv, &[0.1, 0.0]).is_err());
    }

    #[test]
    fn sampled_csv_round_trip() {
        let g = SampledGrid {
            axes: vec![vec![0.0, 0.5, 1.0], vec![0.0, 1.0, 2.0]],
            values: (0..9).map(|k| k as f64).collect(),
        };
        let mut buf = Vec::new();
        g.write_csv(&mut buf).unwrap();
        let back = SampledGrid::read_csv(&buf[..]).unwrap();
        assert_eq!(back.values, g.values);
        assert!((back.interpolate(&[0.25, 0.5]) - 2.0).abs() < 1e-12);
    }
}

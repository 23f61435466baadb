use g2harmonic::cfun::{self, CFunctionValue, SmallKType};
use g2harmonic::cli::verify::{run_suite, VerifyConfig};
use g2harmonic::rootsys::{
    build_root_system, weyl_group, RootSystemData, RootSystemKind, SpectralPoint,
};
use g2harmonic::{cgamma, dschecker, hcseries, plancherel, Complex64};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err<E: std::fmt::Display>(e: E) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn ktype(s: &str) -> PyResult<SmallKType> {
    s.parse().map_err(err)
}

fn point(lam: Vec<Complex64>) -> SpectralPoint {
    SpectralPoint::new(lam)
}

fn finite(v: CFunctionValue) -> Option<Complex64> {
    v.finite()
}

fn to_json<T: serde::Serialize>(v: &T) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

/// A root system at a given metric scale.
///
/// ```python
/// rs = RootSystem("g2", 1.0)
/// rs.rank, rs.weyl_order
/// ```
#[pyclass(name = "RootSystem", frozen)]
struct PyRootSystem {
    inner: RootSystemData,
}

#[pymethods]
impl PyRootSystem {
    #[new]
    #[pyo3(signature = (kind="g2", metric_scale=1.0))]
    fn new(kind: &str, metric_scale: f64) -> PyResult<Self> {
        let k: RootSystemKind = kind.parse().map_err(err)?;
        Ok(Self {
            inner: build_root_system(k, metric_scale).map_err(err)?,
        })
    }

    #[getter]
    fn kind(&self) -> String {
        self.inner.kind.to_string()
    }

    #[getter]
    fn rank(&self) -> usize {
        self.inner.rank
    }

    #[getter]
    fn metric_scale(&self) -> f64 {
        self.inner.metric_scale
    }

    #[getter]
    fn weyl_order(&self) -> usize {
        weyl_group(&self.inner).order()
    }

    /// Positive roots as (coords, "short"|"long", multiplicity).
    #[getter]
    fn positive_roots(&self) -> Vec<(Vec<i64>, &'static str, u32)> {
        self.inner
            .positive_roots
            .iter()
            .map(|r| {
                let len = match r.length {
                    g2harmonic::rootsys::LengthClass::Short => "short",
                    g2harmonic::rootsys::LengthClass::Long => "long",
                };
                (r.coords.clone(), len, r.multiplicity)
            })
            .collect()
    }

    /// Coroot pairings `lambda_alpha` of a point given in simple coroot coordinates.
    fn pairing(&self, lam: Vec<Complex64>, alpha: Vec<i64>) -> PyResult<Complex64> {
        if lam.len() != self.inner.rank || alpha.len() != self.inner.rank {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(self.inner.pairing(&point(lam), &alpha))
    }

    fn to_json(&self) -> PyResult<String> {
        to_json(&self.inner.dump())
    }

    fn __repr__(&self) -> String {
        format!(
            "RootSystem('{}', {})",
            self.inner.kind, self.inner.metric_scale
        )
    }
}

/// Harish-Chandra c-function for a small K-type.
///
/// `eval` returns None at poles.
#[pyclass(name = "CFunction", frozen)]
struct PyCFunction {
    inner: cfun::CFunction,
    rank: usize,
}

#[pymethods]
impl PyCFunction {
    #[new]
    #[pyo3(signature = (root_system, ktype="triv", c0=None))]
    fn new(root_system: &PyRootSystem, ktype: &str, c0: Option<f64>) -> PyResult<Self> {
        let pi = self::ktype(ktype)?;
        let mut inner = cfun::CFunction::new(&root_system.inner, pi);
        if let Some(c) = c0 {
            inner = inner.with_c0(c);
        }
        Ok(Self {
            inner,
            rank: root_system.inner.rank,
        })
    }

    #[getter]
    fn c0(&self) -> f64 {
        self.inner.c0
    }

    fn eval(&self, lam: Vec<Complex64>) -> PyResult<Option<Complex64>> {
        self.check(&lam)?;
        Ok(finite(self.inner.eval(&point(lam))))
    }

    /// `1 / (c(lambda) c(-lambda))`.
    fn mu(&self, lam: Vec<Complex64>) -> PyResult<Option<Complex64>> {
        self.check(&lam)?;
        Ok(finite(self.inner.mu(&point(lam))))
    }

    /// Plancherel density at `lambda = i t`.
    fn density(&self, t: Vec<f64>) -> PyResult<f64> {
        if t.len() != self.rank {
            return Err(PyValueError::new_err("dimension mismatch"));
        }
        Ok(self.inner.density(&t))
    }
}

impl PyCFunction {
    fn check(&self, lam: &[Complex64]) -> PyResult<()> {
        if lam.len() != self.rank {
            return Err(PyValueError::new_err(format!(
                "expected {} coordinates, got {}",
                self.rank,
                lam.len()
            )));
        }
        Ok(())
    }
}

/// Gamma(z), or None at a pole.
#[pyfunction]
fn gamma(z: Complex64) -> Option<Complex64> {
    let g = cgamma::gamma(z);
    (!g.is_pole).then_some(g.value)
}

/// G2 closed form of c^pi, in coroot coordinates.
#[pyfunction]
#[pyo3(signature = (lam, ktype="triv"))]
fn closed_form_c(lam: Vec<Complex64>, ktype: &str) -> PyResult<Option<Complex64>> {
    if lam.len() != 2 {
        return Err(PyValueError::new_err("closed form is for G2 only"));
    }
    Ok(finite(cfun::closed_form_c(
        self::ktype(ktype)?,
        &point(lam),
    )))
}

/// Gindikin-Karpelevic product for any supported root system.
#[pyfunction]
#[pyo3(signature = (root_system, lam, ktype="triv"))]
fn gk_product(
    root_system: &PyRootSystem,
    lam: Vec<Complex64>,
    ktype: &str,
) -> PyResult<Option<Complex64>> {
    let r = &root_system.inner;
    if lam.len() != r.rank {
        return Err(PyValueError::new_err("dimension mismatch"));
    }
    Ok(finite(cfun::gk_product(
        r,
        self::ktype(ktype)?,
        &point(lam),
    )))
}

/// `Upsilon^pi(phi^pi_lambda)(H)` with H given by its root values `y`.
#[pyfunction]
#[pyo3(signature = (root_system, lam, y, ktype="triv", tol=1e-10))]
fn upsilon_phi(
    py: Python<'_>,
    root_system: &PyRootSystem,
    lam: Vec<Complex64>,
    y: Vec<f64>,
    ktype: &str,
    tol: f64,
) -> PyResult<Complex64> {
    let pi = self::ktype(ktype)?;
    let r = &root_system.inner;
    if lam.len() != r.rank || y.len() != r.rank {
        return Err(PyValueError::new_err("dimension mismatch"));
    }
    let lam = point(lam);
    py.detach(|| hcseries::upsilon_phi(r, pi, &lam, &y, tol))
        .map_err(err)
}

/// Residue density `p(l2)` on the line `lambda_{2a1+a2} = 1/2`.
#[pyfunction]
fn residue_density_p(l2: Complex64) -> Complex64 {
    plancherel::residue_density_p(l2)
}

/// Weight of the one-dimensional Plancherel term at `s`.
#[pyfunction]
fn line_weight(root_system: &PyRootSystem, s: f64) -> f64 {
    plancherel::line_weight(&root_system.inner, s)
}

/// Constant of `p` as a monomial string.
#[pyfunction]
fn p_constant() -> String {
    plancherel::p_constant().to_string()
}

/// Region label ("I".."IV") of a point of the closed negative chamber.
#[pyfunction]
fn region_of(root_system: &PyRootSystem, eta: Vec<f64>) -> PyResult<String> {
    let l = plancherel::region_of(&root_system.inner, &eta).map_err(err)?;
    Ok(format!("{l:?}"))
}

/// Certificate that pi2 admits no discrete series, as JSON.
#[pyfunction]
#[pyo3(signature = (bound=100))]
fn no_discrete_series_check(bound: i64) -> PyResult<String> {
    to_json(&dschecker::no_discrete_series_check(bound).map_err(err)?)
}

/// Runs the verification suite and returns the JSON report.
#[pyfunction]
#[pyo3(signature = (only=None, metric_scale=1.0, c0=None, tol=1e-10))]
fn verify(
    py: Python<'_>,
    only: Option<Vec<String>>,
    metric_scale: f64,
    c0: Option<f64>,
    tol: f64,
) -> PyResult<String> {
    let cfg = VerifyConfig {
        metric_scale,
        c0,
        tol,
    };
    let only = only.unwrap_or_default();
    let report = py.detach(|| run_suite(&cfg, &only));
    to_json(&report)
}

#[pymodule]
fn pyg2harmonic(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyRootSystem>()?;
    m.add_class::<PyCFunction>()?;
    m.add_function(wrap_pyfunction!(gamma, m)?)?;
    m.add_function(wrap_pyfunction!(closed_form_c, m)?)?;
    m.add_function(wrap_pyfunction!(gk_product, m)?)?;
    m.add_function(wrap_pyfunction!(upsilon_phi, m)?)?;
    m.add_function(wrap_pyfunction!(residue_density_p, m)?)?;
    m.add_function(wrap_pyfunction!(line_weight, m)?)?;
    m.add_function(wrap_pyfunction!(p_constant, m)?)?;
    m.add_function(wrap_pyfunction!(region_of, m)?)?;
    m.add_function(wrap_pyfunction!(no_discrete_series_check, m)?)?;
    m.add_function(wrap_pyfunction!(verify, m)?)?;
    m.add("C0", cfun::normalization_c0())?;
    Ok(())
}

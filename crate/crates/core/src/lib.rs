//! Harish-Chandra c-functions, spherical function series and Plancherel
//! densities for the small K-types of the split real group of type G2.
//!
//! The crate is organised bottom-up:
//!
//! * [`rootsys`] : root data, Weyl groups, coroot coordinates.
//! * [`cgamma`] : complex Gamma with pole bookkeeping.
//! * [`cfun`] : rank-one factors, the product formula and the closed forms.
//! * [`hcseries`] : Harish-Chandra series and spherical function assembly.
//! * [`transform`] : forward spherical transform and its inversions.
//! * [`plancherel`] : residue calculus for the `Pi2` line spectrum.
//! * [`dschecker`] : finite check that no discrete series contains `Pi2`.
//! * [`cli`] : the command line front end.

pub mod cfun;
pub mod cgamma;
pub mod cli;
pub mod dschecker;
pub mod hcseries;
pub mod plancherel;
mod quad;
pub mod rootsys;
pub mod transform;

pub use num_complex::Complex64;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("unknown root system kind `{0}`")]
    UnknownKind(String),
    #[error("metric scale must be positive, got {0}")]
    BadScale(f64),
    #[error("{0:?} is not a root")]
    NotARoot(Vec<i64>),
    #[error("log_gamma evaluated within {distance:e} of the pole at {pole}")]
    PoleProximity { pole: i64, distance: f64 },
    #[error("gamma ratio has mismatched pole orders")]
    PoleOrderMismatch,
    #[error("lambda lies on the resonance hyperplane of mu = {mu:?} (|<2 lambda - mu, mu>| = {value:e})")]
    Resonance { mu: Vec<i64>, value: f64 },
    #[error(
        "coroot pairing {pairing} is (numerically) an integer; the W-sum expansion is undefined"
    )]
    IntegralParameter { pairing: Complex64 },
    #[error("H = {0:?} is not strictly inside the positive chamber")]
    NotDominant(Vec<f64>),
    #[error("series tail bound {bound:e} exceeds tolerance {tol:e}")]
    TailTooLarge { bound: f64, tol: f64 },
    #[error("quadrature estimate {estimate:e} exceeds target {target:e}")]
    UnderResolved { estimate: f64, target: f64 },
    #[error("K-type {0} has no built-in spherical functions; supply a provider")]
    NoProvider(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("eta = {0:?} is not admissible: {1}")]
    BadContour(Vec<f64>, String),
    #[error("point {0:?} is outside the closed negative chamber or on a singular line")]
    BadRegionPoint(Vec<f64>),
    #[error("residue identity mismatch in {what}: |{got} - {expected}| = {diff:e}")]
    Mismatch {
        what: String,
        got: Complex64,
        expected: Complex64,
        diff: f64,
    },
    #[error("feasible discrete-series parameter found in chamber {chamber}: {lambda}")]
    FeasiblePoint { chamber: usize, lambda: String },
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

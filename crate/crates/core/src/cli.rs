//! Command line front end.
//!
//! Exit codes: 0 success, 1 a check or tolerance failed, 2 bad input,
//! 3 a `Pi2` spherical function was needed but no provider was given.

use std::fs::File;
use std::io::{self, BufReader, Write};
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;

use crate::cfun::{closed_form_c, CFunction, CFunctionValue, SmallKType};
use crate::hcseries::check_generic;
use crate::plancherel::line_weight;
use crate::rootsys::{build_root_system, RootSystemData, RootSystemKind, SpectralPoint};
use crate::transform::{
    dominant_lattice, forward_transform, inverse_continuous, ForwardSpec, InverseSpec,
    RadialFunction, SampledGrid, SampledSpectrum, SphericalProvider, TableProvider,
};
use crate::{Error, Result};

pub mod verify;

pub use verify::{run_suite, VerifyConfig, VerifyItem, VerifyReport, ITEMS};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Basis {
    /// `(lambda_{a1}, lambda_{a2})`
    Coroot,
    /// `(lambda_{a1}, lambda_{3a1+2a2})`
    Orthogonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Direction {
    Forward,
    Inverse,
}

#[derive(Debug, Parser)]
#[command(
    name = "g2harmonic",
    version,
    about = "c-functions, spherical transforms and Plancherel densities for split G2"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    #[arg(long, default_value = "triv")]
    pub ktype: String,
    #[arg(long, default_value_t = 1.0)]
    pub metric_scale: f64,
    /// g2, a1, a1xa1
    #[arg(long, default_value = "g2")]
    pub root_system: String,
    #[arg(long, default_value_t = 120)]
    pub max_height: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed form against the product formula at each lambda.
    CEval {
        #[command(flatten)]
        common: Common,
        /// `rho` or comma separated complex coordinates, e.g. `0.5,1+2i`.
        #[arg(long = "lambda", allow_hyphen_values = true)]
        lambdas: Vec<String>,
        #[arg(long, value_enum, default_value = "coroot")]
        basis: Basis,
        /// Override the product-formula normalisation.
        #[arg(long)]
        c0: Option<f64>,
    },
    /// `|c(i t)|^{-2}` on a box and, for pi2, the residual line weight.
    Density {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value = "3")]
        lambda_box: String,
        #[arg(long, default_value_t = 0.25)]
        lambda_step: f64,
    },
    /// Run the identity suite.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        only: Vec<String>,
        #[arg(long)]
        c0: Option<f64>,
        /// Print only the discrete-series certificate.
        #[arg(long)]
        discrete_series: bool,
        #[arg(long, default_value_t = 100)]
        bound: i64,
    },
    /// Forward or inverse spherical transform of sampled data.
    Transform {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        direction: Direction,
        #[arg(long)]
        input: PathBuf,
        /// CSV table of spherical function values; required for pi2.
        #[arg(long)]
        provider: Option<PathBuf>,
        /// Radius of the spectral lattice.
        #[arg(long, default_value = "12")]
        lambda_box: String,
        #[arg(long, default_value_t = 0.1)]
        lambda_step: f64,
        #[arg(long, default_value = "2")]
        h_box: String,
        #[arg(long, default_value_t = 0.1)]
        h_step: f64,
        #[arg(long, default_value_t = 32)]
        nodes: usize,
    },
}

/// Validated settings shared by every subcommand.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub ktype: SmallKType,
    pub metric_scale: f64,
    pub kind: RootSystemKind,
    pub max_height: usize,
    pub tol: f64,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    fn from_common(c: &Common, default_format: Format) -> Result<Self> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Parse(format!("--{name} must be positive, got {v}")))
            }
        };
        positive("metric-scale", c.metric_scale)?;
        positive("tol", c.tol)?;
        if c.max_height == 0 {
            return Err(Error::Parse("--max-height must be positive".into()));
        }
        Ok(RunConfig {
            ktype: c.ktype.parse()?,
            metric_scale: c.metric_scale,
            kind: c.root_system.parse()?,
            max_height: c.max_height,
            tol: c.tol,
            format: c.format.unwrap_or(default_format),
            out: c.out.clone(),
        })
    }

    fn root_system(&self) -> Result<RootSystemData> {
        build_root_system(self.kind.clone(), self.metric_scale)
    }
}

fn parse_positive_list(s: &str, rank: usize, flag: &str) -> Result<Vec<f64>> {
    let v: std::result::Result<Vec<f64>, _> =
        s.split(',').map(|x| x.trim().parse::<f64>()).collect();
    let v = v.map_err(|e| Error::Parse(format!("--{flag}: {e}")))?;
    let v = match v.len() {
        1 => vec![v[0]; rank],
        n if n == rank => v,
        n => {
            return Err(Error::Parse(format!(
                "--{flag}: expected 1 or {rank} values, got {n}"
            )))
        }
    };
    if v.iter().any(|x| !(*x > 0.0)) {
        return Err(Error::Parse(format!("--{flag} must be positive")));
    }
    Ok(v)
}

fn positive_step(v: f64, flag: &str) -> Result<f64> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Parse(format!("--{flag} must be positive, got {v}")))
    }
}

/// Parse `rho` or `z1,z2,...` with complex entries such as `1+2i`.
pub fn parse_lambda(r: &RootSystemData, s: &str, basis: Basis) -> Result<SpectralPoint> {
    if s.trim().eq_ignore_ascii_case("rho") {
        return Ok(SpectralPoint::rho(r));
    }
    let parts: std::result::Result<Vec<Complex64>, _> = s
        .split(',')
        .map(|x| Complex64::from_str(x.trim()))
        .collect();
    let parts = parts.map_err(|_| Error::Parse(format!("cannot read lambda `{s}`")))?;
    if parts.len() != r.rank {
        return Err(Error::Parse(format!(
            "lambda `{s}` has {} coordinates, expected {}",
            parts.len(),
            r.rank
        )));
    }
    match basis {
        Basis::Coroot => Ok(SpectralPoint::new(parts)),
        Basis::Orthogonal if r.kind == RootSystemKind::G2 => {
            Ok(SpectralPoint::from_g2_orthogonal(parts[0], parts[1]))
        }
        Basis::Orthogonal => Err(Error::Parse(
            "the orthogonal basis is defined for g2 only".into(),
        )),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Parse(_) | Error::UnknownKind(_) | Error::BadScale(_) | Error::Csv(_) => 2,
        Error::NoProvider(_) => 3,
        _ => 1,
    }
}

fn open_out<'a>(out: &Option<PathBuf>, stdout: &'a mut dyn Write) -> Result<Box<dyn Write + 'a>> {
    Ok(match out {
        Some(p) => Box::new(File::create(p)?),
        None => Box::new(stdout),
    })
}

fn write_rows<T: Serialize>(rows: &[T], fmt: Format, w: &mut dyn Write) -> Result<()> {
    match fmt {
        Format::Csv => {
            let mut wr = csv::Writer::from_writer(w);
            for r in rows {
                wr.serialize(r)?;
            }
            wr.flush()?;
        }
        Format::Json => {
            serde_json::to_writer_pretty(&mut *w, rows).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

/// Entry point used by the binary; returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 2;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(code) => code,
        Err(e) => {
            let code = exit_code(&e);
            let _ = writeln!(stderr, "error: {e}");
            if code == 3 {
                let _ = writeln!(
                    stderr,
                    "pi2 spherical functions are not built in; pass --provider with a table of values"
                );
            }
            code
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::CEval {
            common,
            lambdas,
            basis,
            c0,
        } => {
            let cfg = RunConfig::from_common(&common, Format::Csv)?;
            cmd_c_eval(&cfg, &lambdas, basis, c0, stdout)
        }
        Command::Density {
            common,
            lambda_box,
            lambda_step,
        } => {
            let cfg = RunConfig::from_common(&common, Format::Csv)?;
            cmd_density(&cfg, &lambda_box, lambda_step, stdout)
        }
        Command::Verify {
            common,
            only,
            c0,
            discrete_series,
            bound,
        } => {
            let cfg = RunConfig::from_common(&common, Format::Json)?;
            if discrete_series {
                let cert = crate::dschecker::no_discrete_series_check(bound);
                let mut w = open_out(&cfg.out, stdout)?;
                return match cert {
                    Ok(c) => {
                        serde_json::to_writer_pretty(&mut w, &c)
                            .map_err(|e| Error::Io(e.into()))?;
                        writeln!(w)?;
                        Ok(0)
                    }
                    Err(e) => {
                        writeln!(stderr, "FAIL discrete-series: {e}")?;
                        Ok(1)
                    }
                };
            }
            cmd_verify(&cfg, &only, c0, stdout, stderr)
        }
        Command::Transform {
            common,
            direction,
            input,
            provider,
            lambda_box,
            lambda_step,
            h_box,
            h_step,
            nodes,
        } => {
            let cfg = RunConfig::from_common(&common, Format::Csv)?;
            let opts = TransformOpts {
                direction,
                input,
                provider,
                lambda_radius: parse_positive_list(&lambda_box, 1, "lambda-box")?[0],
                lambda_step: positive_step(lambda_step, "lambda-step")?,
                h_box,
                h_step: positive_step(h_step, "h-step")?,
                nodes,
            };
            cmd_transform(&cfg, &opts, stdout)
        }
    }
}

#[derive(Debug, Serialize)]
struct CEvalRow {
    lambda: String,
    c_closed_re: f64,
    c_closed_im: f64,
    c_product_re: f64,
    c_product_im: f64,
    kind: &'static str,
    rel_diff: f64,
}

fn kind_of(v: &CFunctionValue) -> &'static str {
    if v.is_pole {
        "pole"
    } else if v.is_zero {
        "zero"
    } else {
        "finite"
    }
}

fn compare(closed: &CFunctionValue, product: &CFunctionValue) -> f64 {
    if closed.is_pole || closed.is_zero || product.is_pole || product.is_zero {
        let same = closed.is_pole == product.is_pole
            && closed.is_zero == product.is_zero
            && closed.order == product.order;
        return if same && closed.is_pole {
            0.0
        } else if same {
            (closed.value - product.value).norm() / closed.value.norm().max(f64::MIN_POSITIVE)
        } else {
            f64::INFINITY
        };
    }
    (closed.value - product.value).norm() / closed.value.norm()
}

pub fn cmd_c_eval(
    cfg: &RunConfig,
    lambdas: &[String],
    basis: Basis,
    c0: Option<f64>,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let r = cfg.root_system()?;
    let mut cf = CFunction::new(&r, cfg.ktype);
    if let Some(c) = c0 {
        cf = cf.with_c0(c);
    }
    let mut rows = Vec::new();
    let mut ok = true;
    for s in lambdas {
        let lam = parse_lambda(&r, s, basis)?;
        let product = cf.eval(&lam);
        let closed = if r.kind == RootSystemKind::G2 {
            closed_form_c(cfg.ktype, &lam)
        } else {
            product
        };
        let d = compare(&closed, &product);
        ok &= d <= cfg.tol;
        rows.push(CEvalRow {
            lambda: lam
                .coords
                .iter()
                .map(|c| format!("{c}"))
                .collect::<Vec<_>>()
                .join(";"),
            c_closed_re: closed.value.re,
            c_closed_im: closed.value.im,
            c_product_re: product.value.re,
            c_product_im: product.value.im,
            kind: kind_of(&closed),
            rel_diff: d,
        });
    }
    let mut w = open_out(&cfg.out, stdout)?;
    if rows.is_empty() && cfg.format == Format::Csv {
        writeln!(
            w,
            "lambda,c_closed_re,c_closed_im,c_product_re,c_product_im,kind,rel_diff"
        )?;
    } else {
        write_rows(&rows, cfg.format, &mut w)?;
    }
    Ok(if ok { 0 } else { 1 })
}

#[derive(Debug, Serialize)]
struct DensityRow {
    section: &'static str,
    t1: f64,
    t2: Option<f64>,
    value: f64,
}

pub fn cmd_density(
    cfg: &RunConfig,
    lambda_box: &str,
    step: f64,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let r = cfg.root_system()?;
    let step = positive_step(step, "lambda-step")?;
    let bx = parse_positive_list(lambda_box, r.rank, "lambda-box")?;
    let cf = CFunction::new(&r, cfg.ktype);
    let mut rows = Vec::new();
    let axis = |b: f64| {
        let n = (b / step + 1e-9).floor() as i64;
        (-n..=n).map(move |k| k as f64 * step)
    };
    if r.rank == 1 {
        for t in axis(bx[0]) {
            rows.push(DensityRow {
                section: "grid",
                t1: t,
                t2: None,
                value: cf.density(&[t]),
            });
        }
    } else {
        for t1 in axis(bx[0]) {
            for t2 in axis(bx[1]) {
                rows.push(DensityRow {
                    section: "grid",
                    t1,
                    t2: Some(t2),
                    value: cf.density(&[t1, t2]),
                });
            }
        }
    }
    if cfg.ktype == SmallKType::Pi2 && r.kind == RootSystemKind::G2 {
        for s in axis(bx[0]) {
            rows.push(DensityRow {
                section: "line",
                t1: s,
                t2: None,
                value: line_weight(&r, s),
            });
        }
    }
    let mut w = open_out(&cfg.out, stdout)?;
    write_rows(&rows, cfg.format, &mut w)?;
    Ok(0)
}

pub fn cmd_verify(
    cfg: &RunConfig,
    only: &[String],
    c0: Option<f64>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    for name in only {
        if !ITEMS.contains(&name.as_str()) {
            return Err(Error::Parse(format!(
                "unknown item `{name}`; known items: {}",
                ITEMS.join(", ")
            )));
        }
    }
    let vc = VerifyConfig {
        metric_scale: cfg.metric_scale,
        c0,
        tol: cfg.tol,
    };
    let report = run_suite(&vc, only);
    let mut w = open_out(&cfg.out, stdout)?;
    match cfg.format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, &report).map_err(|e| Error::Io(e.into()))?;
            writeln!(w)?;
        }
        Format::Csv => write_rows(&report.items, Format::Csv, &mut w)?,
    }
    for item in report.items.iter().filter(|i| !i.passed) {
        writeln!(stderr, "FAIL {}: {}", item.name, item.detail)?;
    }
    Ok(if report.passed { 0 } else { 1 })
}

pub struct TransformOpts {
    pub direction: Direction,
    pub input: PathBuf,
    pub provider: Option<PathBuf>,
    pub lambda_radius: f64,
    pub lambda_step: f64,
    pub h_box: String,
    pub h_step: f64,
    pub nodes: usize,
}

#[derive(Debug, Serialize)]
struct TransformRow {
    x: Vec<f64>,
    re: f64,
    im: f64,
    error: f64,
}

fn write_transform(
    rows: &[TransformRow],
    names: &[&str],
    fmt: Format,
    w: &mut dyn Write,
) -> Result<()> {
    if fmt == Format::Json {
        return write_rows(rows, fmt, w);
    }
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<&str> = names.to_vec();
    header.extend(["re", "im", "error"]);
    wr.write_record(&header)?;
    for row in rows {
        let mut rec: Vec<String> = row.x.iter().map(|v| v.to_string()).collect();
        rec.extend([
            row.re.to_string(),
            row.im.to_string(),
            row.error.to_string(),
        ]);
        wr.write_record(rec)?;
    }
    wr.flush()?;
    Ok(())
}

pub fn cmd_transform(cfg: &RunConfig, o: &TransformOpts, stdout: &mut dyn Write) -> Result<i32> {
    let r = cfg.root_system()?;
    let provider: Option<TableProvider> = match &o.provider {
        Some(p) => Some(TableProvider::read_csv(BufReader::new(File::open(p)?))?),
        None => None,
    };
    if cfg.ktype == SmallKType::Pi2 && provider.is_none() {
        return Err(Error::NoProvider("pi2".into()));
    }
    let mut rows = Vec::new();
    match o.direction {
        Direction::Forward => {
            if provider.is_some() {
                return Err(Error::Unsupported(
                    "forward transforms with a provider table".into(),
                ));
            }
            let grid = SampledGrid::read_csv(BufReader::new(File::open(&o.input)?))?;
            let f = RadialFunction::sampled(grid)?;
            let spec = ForwardSpec {
                nodes: o.nodes,
                series_tol: cfg.tol,
                max_height: cfg.max_height,
                ..ForwardSpec::default()
            };
            for n in dominant_lattice(&r, o.lambda_step, o.lambda_radius) {
                let t: Vec<f64> = n.iter().map(|v| *v as f64 * o.lambda_step).collect();
                let lam = SpectralPoint::imaginary(&t);
                if check_generic(&r, &lam).is_err() {
                    continue;
                }
                let e = forward_transform(&r, cfg.ktype, &f, &lam, &spec)?;
                rows.push(TransformRow {
                    x: t,
                    re: e.value.re,
                    im: e.value.im,
                    error: e.error,
                });
            }
        }
        Direction::Inverse => {
            let spectrum =
                SampledSpectrum::read_csv(&r, BufReader::new(File::open(&o.input)?), true)?;
            let hb = parse_positive_list(&o.h_box, r.rank, "h-box")?;
            let spec = InverseSpec {
                step: spectrum.step,
                radius: o.lambda_radius,
                series_tol: cfg.tol,
                target: None,
            };
            let prov = provider.as_ref().map(|p| p as &dyn SphericalProvider);
            for y in h_grid(&hb, o.h_step) {
                let e = inverse_continuous(&r, cfg.ktype, &spectrum, &y, &spec, prov)?;
                rows.push(TransformRow {
                    x: y,
                    re: e.value.re,
                    im: e.value.im,
                    error: e.error,
                });
            }
        }
    }
    let names: &[&str] = match (o.direction, r.rank) {
        (Direction::Forward, 1) => &["im_l1"],
        (Direction::Forward, _) => &["im_l1", "im_l2"],
        (Direction::Inverse, 1) => &["H1"],
        (Direction::Inverse, _) => &["H1", "H2"],
    };
    let mut w = open_out(&cfg.out, stdout)?;
    write_transform(&rows, names, cfg.format, &mut w)?;
    Ok(0)
}

/// Points `k * step`, `k >= 1`, inside the box.
fn h_grid(bx: &[f64], step: f64) -> Vec<Vec<f64>> {
    let axis = |b: f64| {
        let n = (b / step + 1e-9).floor() as i64;
        (1..=n).map(|k| k as f64 * step).collect::<Vec<_>>()
    };
    let mut out: Vec<Vec<f64>> = vec![vec![]];
    for b in bx {
        let a = axis(*b);
        out = out
            .into_iter()
            .flat_map(|p| {
                a.iter().map(move |v| {
                    let mut q = p.clone();
                    q.push(*v);
                    q
                })
            })
            .collect();
    }
    out
}

/// Process entry point for the binary.
pub fn main_entry() -> i32 {
    let mut out = io::stdout().lock();
    let mut err = io::stderr().lock();
    run(std::env::args_os(), &mut out, &mut err)
}

//! Command-line front end: tables of zeros, weights, strip partition
//! functions, Casimir potential and force, and the critical constants.

pub mod table;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use casimir_rect::casimir::{
    casimir_amplitude, find_rho0, theta_sc, theta_total, vartheta_total, DEFAULT_ORDER,
};
use casimir_rect::effspin::{build_model, enumerate_partition, magnetization, MAX_SPINS};
use casimir_rect::quad::QuadratureSpec;
use casimir_rect::roots::find_zeros;
use casimir_rect::sigma::{psi_potential, psi_strip, sigma_det, sigma_route_check, sigma_series, sigma_series_within, MIN_DIRECT_RHO};
use casimir_rect::specialfn::{catalan_constant, eisenstein_e2};
use casimir_rect::strip::{theta_oo, vartheta_oo};
use casimir_rect::thermo_constants::{corner_free_energy, surface_critical_value, CORNER_JUMP, CORNER_LOG_COEFF};
use casimir_rect::weights::{weight_v, weight_v_closed_x0, weight_v_special_xneg1, WeightMethod};

pub use table::{emit_table, Cell, Format, FunctionTable};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "CASIMIR_RECT_THREADS";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid argument: {0}")]
    Usage(String),
    #[error("numerical failure at {point}: {source}")]
    Numerical {
        point: String,
        source: casimir_rect::Error,
    },
    #[error("output: {0}")]
    Io(#[from] std::io::Error),
    #[error("internal: {0}")]
    Internal(String),
}

impl CliError {
    /// 1 for bad input or unusable output, 2 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical { .. } | CliError::Internal(_) => 2,
            CliError::Usage(_) | CliError::Io(_) => 1,
        }
    }

    fn at(point: String, source: casimir_rect::Error) -> Self {
        if source.is_numerical() {
            CliError::Numerical { point, source }
        } else {
            CliError::Usage(format!("{point}: {source}"))
        }
    }
}

#[derive(Debug, Clone, Parser, Serialize)]
#[command(name = "casimir-rect", version, about = "Casimir scaling functions of the Ising rectangle")]
pub struct RunConfig {
    #[command(subcommand)]
    pub command: Command,
    #[arg(long, value_enum, default_value = "csv", global = true)]
    pub format: Format,
    /// Write to this file instead of standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    /// Series order N of the strip partition function.
    #[arg(long, default_value_t = DEFAULT_ORDER, global = true)]
    pub order: usize,
    /// Odd and even modes kept in the determinant.
    #[arg(long, default_value_t = 16, global = true)]
    pub modes: usize,
    /// Relative tolerance of the directly exposed quadratures.
    #[arg(long, default_value_t = 1e-12, global = true)]
    pub rel_tol: f64,
    /// Maximum bisection depth of the adaptive quadrature.
    #[arg(long, default_value_t = 60, global = true)]
    pub max_depth: u32,
}

#[derive(Debug, Clone, Subcommand, Serialize)]
#[serde(tag = "name", rename_all = "kebab-case")]
pub enum Command {
    /// Zeros of the characteristic polynomial.
    Zeros {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Matrix-element weights.
    Weights {
        #[arg(long, allow_negative_numbers = true)]
        x: f64,
        #[arg(long, default_value_t = 4)]
        count: usize,
    },
    /// Strip partition function by both routes and the strip potential and force.
    Sigma {
        #[arg(long, num_args = 1.., required = true, allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, num_args = 1.., default_values_t = [1.0])]
        rho: Vec<f64>,
    },
    /// Casimir potential on an x grid.
    ThetaTable(GridArgs),
    /// Casimir force on an x grid.
    VarthetaTable(GridArgs),
    /// Critical values at x = 0.
    Critical {
        #[arg(long, num_args = 1.., default_values_t = [1.0])]
        rho: Vec<f64>,
    },
    /// Named constants.
    Constants,
    /// Aspect ratio where the critical force changes sign.
    Rho0,
    /// Effective spin model against the truncated series.
    EffspinCheck {
        #[arg(long, num_args = 1.., default_values_t = [-1.0, 0.0, 1.0], allow_negative_numbers = true)]
        x: Vec<f64>,
        #[arg(long, num_args = 1.., default_values_t = [1.0, 2.0])]
        rho: Vec<f64>,
        #[arg(long, default_value_t = 12)]
        spins: usize,
    },
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GridArgs {
    #[arg(long, allow_negative_numbers = true)]
    pub x_min: f64,
    #[arg(long, allow_negative_numbers = true)]
    pub x_max: f64,
    #[arg(long)]
    pub steps: usize,
    #[arg(long, num_args = 1.., default_values_t = [1.0])]
    pub rho: Vec<f64>,
}

impl GridArgs {
    fn points(&self) -> Result<Vec<f64>, CliError> {
        if !(self.x_min.is_finite() && self.x_max.is_finite()) || self.x_min > self.x_max {
            return Err(CliError::Usage(format!("empty range [{}, {}]", self.x_min, self.x_max)));
        }
        if self.steps < 1 {
            return Err(CliError::Usage("steps must be at least 1".into()));
        }
        if self.steps == 1 {
            return Ok(vec![self.x_min]);
        }
        let n = (self.steps - 1) as f64;
        Ok((0..self.steps)
            .map(|i| {
                let t = i as f64;
                (self.x_min * (n - t) + self.x_max * t) / n
            })
            .collect())
    }
}

fn check_rhos(rhos: &[f64]) -> Result<(), CliError> {
    if rhos.is_empty() {
        return Err(CliError::Usage("at least one rho is required".into()));
    }
    match rhos.iter().find(|r| !(**r > 0.0 && r.is_finite())) {
        Some(r) => Err(CliError::Usage(format!("rho must be positive, got {r}"))),
        None => Ok(()),
    }
}

fn check_finite(name: &str, values: &[f64]) -> Result<(), CliError> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(CliError::Usage(format!("{name} must be finite, got {v}"))),
        None => Ok(()),
    }
}

impl RunConfig {
    fn validate(&self) -> Result<(), CliError> {
        if self.order < 1 {
            return Err(CliError::Usage("order must be at least 1".into()));
        }
        if self.modes < 1 {
            return Err(CliError::Usage("modes must be at least 1".into()));
        }
        if !(self.rel_tol > 0.0 && self.rel_tol < 1.0) {
            return Err(CliError::Usage(format!("rel-tol must lie in (0, 1), got {}", self.rel_tol)));
        }
        if self.max_depth < 1 {
            return Err(CliError::Usage("max-depth must be at least 1".into()));
        }
        Ok(())
    }

    fn quadrature(&self) -> QuadratureSpec {
        QuadratureSpec {
            max_depth: self.max_depth,
            ..QuadratureSpec::default().with_tolerances(self.rel_tol, 1e-14)
        }
    }

    fn meta(&self) -> Value {
        json!({
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "config": serde_json::to_value(self).unwrap_or(Value::Null),
        })
    }
}

/// Evaluates rows in parallel and keeps grid order; the first failing point
/// in grid order is reported.
fn par_rows<P, F>(points: &[P], f: F) -> Result<Vec<Vec<Cell>>, CliError>
where
    P: Sync,
    F: Fn(&P) -> Result<Vec<Cell>, CliError> + Sync,
{
    let results: Vec<Result<Vec<Cell>, CliError>> = points.par_iter().map(&f).collect();
    results.into_iter().collect()
}

fn grid(xs: &[f64], rhos: &[f64]) -> Vec<(f64, f64)> {
    rhos.iter().flat_map(|&r| xs.iter().map(move |&x| (x, r))).collect()
}

fn zeros_table(x: f64, count: usize) -> Result<FunctionTable, CliError> {
    check_finite("x", &[x])?;
    if count < 1 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let zeros = find_zeros(count, x, casimir_rect::roots::DEFAULT_ROOT_TOL)
        .map_err(|e| CliError::at(format!("x={x}"), e))?;
    let mut t = FunctionTable::new(&["mu", "phi", "phi_sq", "gamma"]);
    for z in zeros {
        let phi = if z.is_imaginary() {
            Cell::Text(format!("{}i", table::render_number(z.phi_abs())))
        } else {
            Cell::Num(z.phi_abs())
        };
        t.push(vec![z.mu.into(), phi, z.phi_sq.into(), z.gamma.into()]);
    }
    Ok(t)
}

fn weights_table(x: f64, count: usize, spec: &QuadratureSpec) -> Result<FunctionTable, CliError> {
    check_finite("x", &[x])?;
    if count < 1 {
        return Err(CliError::Usage("count must be at least 1".into()));
    }
    let mus: Vec<usize> = (1..=count).collect();
    let rows = par_rows(&mus, |&mu| {
        let record = if x == 0.0 {
            weight_v_closed_x0(mu)
        } else if x == -1.0 && mu == 1 {
            weight_v_special_xneg1()
        } else {
            weight_v(mu, x, spec)
        }
        .map_err(|e| CliError::at(format!("mu={mu}, x={x}"), e))?;
        let method = match record.method {
            WeightMethod::Contour => "contour",
            WeightMethod::ClosedFormX0 => "closed-form",
            WeightMethod::SpecialXNeg1 => "special",
            WeightMethod::OracleProduct => "oracle",
        };
        let sigma = casimir_rect::roots::parity(mu);
        Ok(vec![mu.into(), sigma.into(), record.v.into(), record.v.ln().into(), method.into()])
    })?;
    let mut t = FunctionTable::new(&["mu", "sigma", "v", "log_v", "method"]);
    t.rows = rows;
    Ok(t)
}

fn sigma_table(xs: &[f64], rhos: &[f64], order: usize, modes: usize) -> Result<FunctionTable, CliError> {
    check_finite("x", xs)?;
    check_rhos(rhos)?;
    if let Some(r) = rhos.iter().find(|r| **r < MIN_DIRECT_RHO) {
        return Err(CliError::Usage(format!("sigma needs rho >= {MIN_DIRECT_RHO}, got {r}")));
    }
    let points = grid(xs, rhos);
    let rows = par_rows(&points, |&(x, rho)| {
        let at = |e| CliError::at(format!("x={x}, rho={rho}"), e);
        let series = sigma_series(x, rho, order).map_err(at)?;
        let det = sigma_det(x, rho, modes).map_err(at)?;
        Ok(vec![
            x.into(),
            rho.into(),
            series.value.into(),
            det.value.into(),
            psi_potential(x, rho, order).map_err(at)?.into(),
            psi_strip(x, rho, order).map_err(at)?.into(),
            sigma_route_check(x, rho, order).map_err(at)?.into(),
        ])
    })?;
    let mut t = FunctionTable::new(&[
        "x",
        "rho",
        "sigma_series",
        "sigma_det",
        "psi_potential",
        "psi_force",
        "route_diff",
    ]);
    t.rows = rows;
    Ok(t)
}

fn theta_rows(g: &GridArgs, order: usize) -> Result<FunctionTable, CliError> {
    check_rhos(&g.rho)?;
    let points = grid(&g.points()?, &g.rho);
    let rows = par_rows(&points, |&(x, rho)| {
        if x == 0.0 {
            return Ok(vec![x.into(), rho.into(), Cell::Blank, Cell::Blank, "divergent".into()]);
        }
        let at = |e| CliError::at(format!("x={x}, rho={rho}"), e);
        Ok(vec![
            x.into(),
            rho.into(),
            theta_total(x, rho, order).map_err(at)?.into(),
            theta_sc(x, order).map_err(at)?.into(),
            Cell::Blank,
        ])
    })?;
    let mut t = FunctionTable::new(&["x", "rho", "theta_total", "theta_sc", "note"]);
    t.rows = rows;
    Ok(t)
}

fn vartheta_rows(g: &GridArgs, order: usize) -> Result<FunctionTable, CliError> {
    check_rhos(&g.rho)?;
    let points = grid(&g.points()?, &g.rho);
    let rows = par_rows(&points, |&(x, rho)| {
        let v = vartheta_total(x, rho, order).map_err(|e| CliError::at(format!("x={x}, rho={rho}"), e))?;
        Ok(vec![x.into(), rho.into(), v.into()])
    })?;
    let mut t = FunctionTable::new(&["x", "rho", "vartheta"]);
    t.rows = rows;
    Ok(t)
}

fn critical_table(rhos: &[f64], order: usize) -> Result<FunctionTable, CliError> {
    check_rhos(rhos)?;
    let rows = par_rows(rhos, |&rho| {
        let at = |e| CliError::at(format!("x=0, rho={rho}"), e);
        let psi = if rho >= MIN_DIRECT_RHO {
            Cell::Num(psi_strip(0.0, rho, order).map_err(at)?)
        } else {
            Cell::Blank
        };
        Ok(vec![
            rho.into(),
            vartheta_total(0.0, rho, order).map_err(at)?.into(),
            psi,
            casimir_amplitude(rho).map_err(at)?.into(),
            eisenstein_e2(rho).map_err(at)?.into(),
        ])
    })?;
    let mut t = FunctionTable::new(&["rho", "vartheta", "psi_force", "amplitude", "e2"]);
    t.rows = rows;
    Ok(t)
}

fn constants_table(order: usize, spec: &QuadratureSpec) -> Result<FunctionTable, CliError> {
    let at = |e| CliError::at("constants".into(), e);
    let corner = corner_free_energy(1.0).map_err(at)?;
    let entries: Vec<(&str, f64)> = vec![
        ("catalan", catalan_constant()),
        ("surface_free_energy_critical", surface_critical_value().map_err(at)?),
        ("corner_free_energy_constant", corner.term("constant").unwrap_or(f64::NAN)),
        ("corner_log_coefficient", CORNER_LOG_COEFF),
        ("corner_jump", CORNER_JUMP),
        ("rho0", find_rho0(1e-14).map_err(at)?),
        ("theta_strip_critical", theta_oo(0.0, spec).map_err(at)?),
        ("vartheta_strip_critical", vartheta_oo(0.0, spec).map_err(at)?),
        ("psi_force_critical_square", psi_strip(0.0, 1.0, order).map_err(at)?),
        ("vartheta_critical_square", vartheta_total(0.0, 1.0, order).map_err(at)?),
        ("amplitude_critical_square", casimir_amplitude(1.0).map_err(at)?),
        ("weight_v1_at_minus_one", weight_v_special_xneg1().map_err(at)?.v),
    ];
    let mut t = FunctionTable::new(&["name", "value"]);
    for (name, v) in entries {
        t.push(vec![name.into(), v.into()]);
    }
    Ok(t)
}

fn effspin_table(xs: &[f64], rhos: &[f64], spins: usize) -> Result<FunctionTable, CliError> {
    check_finite("x", xs)?;
    check_rhos(rhos)?;
    if !(2..=MAX_SPINS).contains(&spins) {
        return Err(CliError::Usage(format!("spins must lie in 2..={MAX_SPINS}, got {spins}")));
    }
    if let Some(r) = rhos.iter().find(|r| **r < MIN_DIRECT_RHO) {
        return Err(CliError::Usage(format!("effspin-check needs rho >= {MIN_DIRECT_RHO}, got {r}")));
    }
    let mut t = FunctionTable::new(&[
        "x",
        "rho",
        "spins",
        "z_eff",
        "sigma_within",
        "z_diff",
        "magnetization",
        "psi_force",
        "m_plus_psi",
    ]);
    for (x, rho) in grid(xs, rhos) {
        let at = |e| CliError::at(format!("x={x}, rho={rho}"), e);
        let model = build_model(x, spins).map_err(at)?;
        let z = enumerate_partition(&model, rho).map_err(at)?;
        let series = sigma_series_within(x, rho, spins).map_err(at)?;
        let m = magnetization(&model, rho).map_err(at)?;
        let psi = psi_strip(x, rho, DEFAULT_ORDER.max(spins / 2 + 1)).map_err(at)?;
        t.push(vec![
            x.into(),
            rho.into(),
            spins.into(),
            z.into(),
            series.into(),
            (z - series).abs().into(),
            m.into(),
            psi.into(),
            (m + psi).abs().into(),
        ]);
    }
    Ok(t)
}

/// Builds the requested table and writes it to `sink` (or the configured
/// output file).
pub fn run(config: &RunConfig, sink: &mut dyn Write) -> Result<(), CliError> {
    config.validate()?;
    let spec = config.quadrature();
    let table = match &config.command {
        Command::Zeros { x, count } => zeros_table(*x, *count)?,
        Command::Weights { x, count } => weights_table(*x, *count, &spec)?,
        Command::Sigma { x, rho } => sigma_table(x, rho, config.order, config.modes)?,
        Command::ThetaTable(g) => theta_rows(g, config.order)?,
        Command::VarthetaTable(g) => vartheta_rows(g, config.order)?,
        Command::Critical { rho } => critical_table(rho, config.order)?,
        Command::Constants => constants_table(config.order, &spec)?,
        Command::Rho0 => {
            let r0 = find_rho0(1e-14).map_err(|e| CliError::at("rho0".into(), e))?;
            if config.format == Format::Csv {
                return write_to(config, sink, format!("{r0:.12}\n").as_bytes());
            }
            let mut t = FunctionTable::new(&["rho0"]);
            t.push(vec![r0.into()]);
            t
        }
        Command::EffspinCheck { x, rho, spins } => effspin_table(x, rho, *spins)?,
    };
    let mut buf = Vec::new();
    emit_table(&table, config.format, &config.meta(), &mut buf)?;
    write_to(config, sink, &buf)
}

fn write_to(config: &RunConfig, sink: &mut dyn Write, bytes: &[u8]) -> Result<(), CliError> {
    match &config.output {
        Some(path) => std::fs::write(path, bytes)?,
        None => {
            sink.write_all(bytes)?;
            sink.flush()?;
        }
    }
    Ok(())
}

/// Sizes the global thread pool from [`THREADS_ENV`] when it is set.
pub fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var(THREADS_ENV) else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n >= 1)
        .ok_or_else(|| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Internal(e.to_string()))
}

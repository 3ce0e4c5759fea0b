//! Infinite-strip scaling functions `Theta_oo(x)` and `vartheta_oo(x)` for
//! open boundaries on both sides.
//!
//! Both are integrals over the transverse frequency `omega` of
//! `A(omega) = (Gamma - x)/(Gamma + x) exp(-2 Gamma)`, `Gamma = sqrt(x^2 + omega^2)`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::quad::{endpoint_peak_width, geometric_points, integrate_semi_infinite_split, QuadratureSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StripSample {
    pub x: f64,
    pub theta_oo: f64,
    pub vartheta_oo: f64,
}

/// `ln A(omega)`. For `x < 0` the ratio is written as `(Gamma + |x|)^2 / omega^2`
/// and for `x >= 0` as `omega^2 / (Gamma + x)^2`, avoiding cancellation.
pub(crate) fn log_a(omega: f64, x: f64) -> (f64, f64) {
    let gamma = x.hypot(omega);
    let log_ratio = if x >= 0.0 {
        2.0 * (omega / (gamma + x)).ln()
    } else {
        2.0 * ((gamma - x) / omega).ln()
    };
    (log_ratio - 2.0 * gamma, gamma)
}

/// `ln(1 + e^l)` without overflow.
pub(crate) fn log1p_exp(l: f64) -> f64 {
    if l > 0.0 {
        l + (-l).exp().ln_1p()
    } else {
        l.exp().ln_1p()
    }
}

/// `e^l / (1 + e^l)`.
pub(crate) fn logistic(l: f64) -> f64 {
    if l > 0.0 {
        1.0 / (1.0 + (-l).exp())
    } else {
        let e = l.exp();
        e / (1.0 + e)
    }
}

/// Integrates over `omega` in `(0, inf)` with breakpoints resolving the
/// transition near `omega ~ 2|x| e^{-|x|}` and a decay scale that follows the
/// Gaussian width `sqrt(|x|)` of `exp(-2 Gamma)`.
pub(crate) fn omega_integral<F: Fn(f64) -> f64>(f: F, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let scale = 0.5 * x.abs().sqrt().max(1.0);
    let mut points = if x < 0.0 {
        geometric_points(endpoint_peak_width(x.abs()), x.abs().max(1.0))
    } else {
        vec![0.0]
    };
    if x.abs() > 1.0 {
        points.push(x.abs());
    }
    // Resolve relative accuracy even when the whole integrand is tiny.
    let magnitude = [0.1, 0.5, 1.0, 2.0]
        .iter()
        .map(|k| f(k * scale).abs())
        .filter(|v| v.is_finite())
        .fold(0.0_f64, f64::max);
    let abs_tol = spec.abs_tol.min(0.1 * spec.rel_tol * magnitude).max(f64::MIN_POSITIVE);
    let local = QuadratureSpec {
        abs_tol,
        decay_scale: Some(scale),
        ..*spec
    };
    integrate_semi_infinite_split(f, &points, &local)
}

/// `Theta_oo(x) = -(1/2pi) int_0^inf ln(1 + A(omega)) d omega`.
pub fn theta_oo(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x)?;
    let integral = omega_integral(|w| log1p_exp(log_a(w, x).0), x, spec)?;
    Ok(-integral / (2.0 * PI))
}

/// `vartheta_oo(x) = -(1/pi) int_0^inf Gamma A / (1 + A) d omega`.
pub fn vartheta_oo(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x)?;
    let integral = omega_integral(
        |w| {
            let (l, gamma) = log_a(w, x);
            gamma * logistic(l)
        },
        x,
        spec,
    )?;
    Ok(-integral / PI)
}

/// `d Theta_oo / dx = ((1 + x)/pi) int_0^inf A / ((1 + A) Gamma) d omega`.
///
/// Diverges logarithmically at `x = 0`, where a domain error is returned.
pub fn theta_oo_derivative(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_x(x)?;
    if x == 0.0 {
        return Err(Error::Domain("d Theta_oo/dx diverges logarithmically at x = 0".into()));
    }
    if x == -1.0 {
        return Ok(0.0);
    }
    let integral = omega_integral(
        |w| {
            let (l, gamma) = log_a(w, x);
            logistic(l) / gamma
        },
        x,
        spec,
    )?;
    Ok((1.0 + x) * integral / PI)
}

pub fn strip_sample(x: f64, spec: &QuadratureSpec) -> Result<StripSample> {
    Ok(StripSample {
        x,
        theta_oo: theta_oo(x, spec)?,
        vartheta_oo: vartheta_oo(x, spec)?,
    })
}

fn check_x(x: f64) -> Result<()> {
    if x.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("x must be finite, got {x}")))
    }
}

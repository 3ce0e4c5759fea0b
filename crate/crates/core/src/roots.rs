//! Zeros of the universal characteristic polynomial
//! `P(Phi) = cos(Phi) + (x / Phi) sin(Phi)`.
//!
//! Zeros are stored through the signed square `phi_sq`; the first zero is
//! imaginary (`phi_sq < 0`) for `x < -1`.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Default residual tolerance for [`find_zero`].
pub const DEFAULT_ROOT_TOL: f64 = 1e-14;
const MAX_ITER: usize = 200;

/// A point `(x, rho)` in scaling variables.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalingPoint {
    pub x: f64,
    pub rho: f64,
}

impl ScalingPoint {
    pub fn new(x: f64, rho: f64) -> Result<Self> {
        if !x.is_finite() {
            return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
        }
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")));
        }
        Ok(ScalingPoint { x, rho })
    }

    /// `x rho^(1/2)`, the variable scaled with the square root of the area.
    pub fn x_volume(&self) -> f64 {
        self.x * self.rho.sqrt()
    }

    /// `x rho`, the variable scaled with the strip length.
    pub fn x_perp(&self) -> f64 {
        self.x * self.rho
    }
}

/// One zero `Phi_mu` of the characteristic polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroRecord {
    pub mu: usize,
    /// `(-1)^(mu-1)`.
    pub sigma: i32,
    /// `Phi_mu^2`, negative for the imaginary first zero.
    pub phi_sq: f64,
    /// `sqrt(x^2 + Phi_mu^2)`.
    pub gamma: f64,
}

impl ZeroRecord {
    /// `|Phi_mu|`; the zero is `i` times this value when [`Self::is_imaginary`].
    pub fn phi_abs(&self) -> f64 {
        self.phi_sq.abs().sqrt()
    }

    pub fn is_imaginary(&self) -> bool {
        self.phi_sq < 0.0
    }
}

pub fn parity(mu: usize) -> i32 {
    if mu % 2 == 1 {
        1
    } else {
        -1
    }
}

/// `(mu - 1/2) pi`, the zeros at `x = 0`.
pub fn critical_zero(mu: usize) -> f64 {
    (mu as f64 - 0.5) * PI
}

/// Taylor series of `P` in `u = Phi^2`, accurate for `|u| <= 1` including the
/// removable point `u = 0`. Returns the value and `dP/du`.
fn poly_series(u: f64, x: f64) -> (f64, f64) {
    // P = sum_k (-u)^k [1/(2k)! + x/(2k+1)!]
    let mut value = 1.0 + x;
    let mut deriv = 0.0;
    let mut pow = 1.0; // (-u)^(k-1)
    let mut even_fact = 1.0; // (2k)!
    let mut odd_fact = 1.0; // (2k+1)!
    for k in 1..40 {
        let kf = k as f64;
        even_fact *= (2.0 * kf - 1.0) * (2.0 * kf);
        odd_fact *= (2.0 * kf) * (2.0 * kf + 1.0);
        let c = 1.0 / even_fact + x / odd_fact;
        deriv += -kf * pow * c;
        pow *= -u;
        let term = pow * c;
        value += term;
        if term.abs() < 1e-18 * value.abs().max(1e-300) && k > 2 {
            break;
        }
    }
    (value, deriv)
}

/// Evaluates `P(Phi)` for a signed `phi_sq`.
pub fn eval_char_poly(phi_sq: f64, x: f64) -> f64 {
    if phi_sq.abs() <= 1.0 {
        poly_series(phi_sq, x).0
    } else if phi_sq > 0.0 {
        let phi = phi_sq.sqrt();
        phi.cos() + x * phi.sin() / phi
    } else {
        let y = (-phi_sq).sqrt();
        y.cosh() + x * y.sinh() / y
    }
}

/// `P` (or `P / cosh y` on the imaginary axis, which has the same sign and
/// cannot overflow) together with its derivative in `u = Phi^2`.
fn scaled_poly(u: f64, x: f64) -> (f64, f64) {
    if u.abs() <= 1.0 {
        poly_series(u, x)
    } else if u > 0.0 {
        let phi = u.sqrt();
        let (s, c) = phi.sin_cos();
        let value = c + x * s / phi;
        let dphi = -s + x * (phi * c - s) / (phi * phi);
        (value, dphi / (2.0 * phi))
    } else {
        let y = (-u).sqrt();
        let t = y.tanh();
        let value = 1.0 + x * t / y;
        let sech2 = 1.0 - t * t;
        let dy = x * (sech2 * y - t) / (y * y);
        (value, -dy / (2.0 * y))
    }
}

/// Safeguarded Newton iteration on a sign-changing bracket `[lo, hi]`.
fn bracketed_newton<F: Fn(f64) -> (f64, f64)>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    tol: f64,
    what: impl Fn() -> String,
) -> Result<f64> {
    let f_lo = f(lo).0;
    let f_hi = f(hi).0;
    if f_lo == 0.0 {
        return Ok(lo);
    }
    if f_hi == 0.0 {
        return Ok(hi);
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::no_convergence(
            "root bracketing",
            format!("{}: no sign change on [{lo}, {hi}] ({f_lo:e}, {f_hi:e})", what()),
        ));
    }
    let lo_sign = f_lo.signum();
    let mut t = 0.5 * (lo + hi);
    for _ in 0..MAX_ITER {
        let (v, d) = f(t);
        if v.abs() <= tol {
            return Ok(t);
        }
        if v.signum() == lo_sign {
            lo = t;
        } else {
            hi = t;
        }
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            // Bracket collapsed to neighbouring floats.
            return Ok(if f(lo).0.abs() < f(hi).0.abs() { lo } else { hi });
        }
        let newton = t - v / d;
        t = if d != 0.0 && newton > lo && newton < hi { newton } else { mid };
    }
    Err(Error::no_convergence(
        "root finding",
        format!("{}: iteration cap reached, bracket [{lo}, {hi}]", what()),
    ))
}

/// `Gamma` for the imaginary zero `y`: `sqrt(x^2 - y^2) = y / sinh(y)` on `y coth y = -x`.
fn imaginary_gamma(y: f64) -> f64 {
    if y == 0.0 {
        1.0
    } else {
        y / y.sinh()
    }
}

fn record(mu: usize, phi_sq: f64, x: f64) -> ZeroRecord {
    let gamma = if phi_sq < 0.0 {
        imaginary_gamma((-phi_sq).sqrt())
    } else {
        (x * x + phi_sq).sqrt()
    };
    ZeroRecord {
        mu,
        sigma: parity(mu),
        phi_sq,
        gamma,
    }
}

/// Locates the `mu`-th zero of `P` at temperature variable `x`.
pub fn find_zero(mu: usize, x: f64, tol: f64) -> Result<ZeroRecord> {
    if mu < 1 {
        return Err(Error::InvalidArgument("zero index mu starts at 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
    }
    let phi0 = critical_zero(mu);
    if x == 0.0 {
        return Ok(record(mu, phi0 * phi0, x));
    }
    if mu == 1 && x == -1.0 {
        return Ok(record(1, 0.0, x));
    }
    let what = || format!("zero mu={mu} at x={x}");
    if mu == 1 {
        let (lo, hi) = if x > 0.0 {
            (phi0 * phi0, PI * PI)
        } else if x > -1.0 {
            (0.0, phi0 * phi0)
        } else {
            (-x * x, 0.0)
        };
        let u = bracketed_newton(|u| scaled_poly(u, x), lo, hi, tol, what)?;
        return Ok(record(1, u, x));
    }
    let (lo, hi) = if x > 0.0 {
        (phi0, mu as f64 * PI)
    } else {
        ((mu as f64 - 1.0) * PI, phi0)
    };
    let f = |phi: f64| {
        let (s, c) = phi.sin_cos();
        let value = c + x * s / phi;
        let deriv = -s + x * (phi * c - s) / (phi * phi);
        (value, deriv)
    };
    let phi = bracketed_newton(f, lo, hi, tol, what)?;
    Ok(record(mu, phi * phi, x))
}

/// Zeros `mu = 1..=count`.
pub fn find_zeros(count: usize, x: f64, tol: f64) -> Result<Vec<ZeroRecord>> {
    if count < 1 {
        return Err(Error::InvalidArgument("count must be at least 1".into()));
    }
    (1..=count).map(|mu| find_zero(mu, x, tol)).collect()
}

/// `Gamma = sqrt(x^2 + Phi^2)` from a stored zero.
pub fn gamma_of(zero: &ZeroRecord, x: f64) -> Result<f64> {
    let radicand = x * x + zero.phi_sq;
    if radicand < 0.0 {
        return Err(Error::Domain(format!(
            "x^2 + phi_sq = {radicand} < 0 for mu={} at x={x}; not a zero of P",
            zero.mu
        )));
    }
    if zero.phi_sq < 0.0 {
        return Ok(imaginary_gamma((-zero.phi_sq).sqrt()));
    }
    Ok(radicand.sqrt())
}

// Truncated power series in eps = 1/Phi0, coefficients c[k] of eps^k.
fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate().take(n - i) {
            out[i + j] += ai * bj;
        }
    }
    out
}

/// `1 / (1 + a)` for a series `a` without constant term.
fn series_recip_one_plus(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let mut out = vec![0.0; n];
    out[0] = 1.0;
    let mut pow = out.clone();
    for _ in 1..n {
        pow = series_mul(&pow, a);
        for (o, p) in out.iter_mut().zip(&pow) {
            *o -= p;
        }
        let neg: Vec<f64> = pow.iter().map(|v| -v).collect();
        pow = neg;
    }
    out
}

/// `atan(a)` for a series `a` without constant term.
fn series_atan(a: &[f64]) -> Vec<f64> {
    let n = a.len();
    let a2 = series_mul(a, a);
    let mut out = vec![0.0; n];
    let mut pow = a.to_vec();
    let mut j = 0usize;
    while pow.iter().any(|&c| c != 0.0) {
        let scale = if j % 2 == 0 { 1.0 } else { -1.0 } / (2 * j + 1) as f64;
        for (o, p) in out.iter_mut().zip(&pow) {
            *o += scale * p;
        }
        pow = series_mul(&pow, &a2);
        j += 1;
    }
    out
}

/// Large-`mu` expansion of `Phi_mu^2` about `Phi0 = (mu - 1/2) pi`.
///
/// With `Phi = Phi0 + Delta` the zero condition reads
/// `Delta = atan(x eps / (1 + eps Delta))`, `eps = 1/Phi0`; iterating this as
/// a truncated series gives `Phi^2 = Phi0^2 + 2x - x^2(2x+3)/(3 Phi0^2) + ...`.
/// `order` counts retained terms of `Phi^2` (order 1 is `Phi0^2 + 2x`).
pub fn zero_series_approx(mu: usize, x: f64, order: usize) -> f64 {
    let phi0 = critical_zero(mu.max(1));
    if x == 0.0 || order == 0 {
        return phi0 * phi0;
    }
    // Delta needs eps^1 .. eps^(2 order - 1).
    let len = 2 * order;
    let mut delta = vec![0.0; len];
    for _ in 0..=order {
        // eps * Delta
        let mut shifted = vec![0.0; len];
        shifted[1..].copy_from_slice(&delta[..len - 1]);
        let recip = series_recip_one_plus(&shifted);
        let mut arg = vec![0.0; len];
        arg[1..].iter_mut().zip(&recip[..len - 1]).for_each(|(a, r)| *a = x * r);
        delta = series_atan(&arg);
    }
    // Phi^2 = Phi0^2 (1 + D)^2 with D = eps Delta: collect eps^(2k) coefficients.
    let mut d = vec![0.0; len + 1];
    d[1..].copy_from_slice(&delta);
    let sq = series_mul(&d, &d);
    let mut correction = 0.0;
    let eps2 = 1.0 / (phi0 * phi0);
    let mut scale = 1.0;
    for k in 1..=order {
        let c = 2.0 * d[2 * k] + sq[2 * k];
        correction += c * scale;
        scale *= eps2;
    }
    phi0 * phi0 + correction
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn poly_examples() {
        assert!(eval_char_poly((PI / 2.0).powi(2), 0.0).abs() < 1e-16);
        assert_eq!(eval_char_poly(0.0, -1.0), 0.0);
        assert!(eval_char_poly(2.028757838_f64.powi(2), 1.0).abs() < 1e-8);
        assert_eq!(eval_char_poly(0.0, 0.5), 1.5);
    }

    #[test]
    fn series_matches_closed_form_at_switch() {
        for &x in &[-3.0, -1.0, 0.0, 2.0] {
            for &u in &[-1.0, 1.0, 0.7, -0.4] {
                let closed = if u > 0.0 {
                    let p = f64::sqrt(u);
                    p.cos() + x * p.sin() / p
                } else {
                    let y = f64::sqrt(-u);
                    y.cosh() + x * y.sinh() / y
                };
                assert!((poly_series(u, x).0 - closed).abs() < 1e-15, "{x} {u}");
            }
        }
    }

    #[test]
    fn zero_examples() {
        let z = find_zero(1, -4.0, DEFAULT_ROOT_TOL).unwrap();
        let y = 3.997302692_f64;
        assert!((z.phi_sq + y * y).abs() / (y * y) < 1e-8);
        let z = find_zero(3, 2.0, DEFAULT_ROOT_TOL).unwrap();
        assert!((z.phi_sq.sqrt() - 8.096163603).abs() < 1e-8);
        let z = find_zero(5, 0.0, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(z.phi_sq, (4.5 * PI) * (4.5 * PI));
        let z = find_zero(1, -1.0, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!((z.phi_sq, z.gamma), (0.0, 1.0));
    }

    #[test]
    fn gamma_examples() {
        let zs = find_zeros(2, -1.0, DEFAULT_ROOT_TOL).unwrap();
        assert_eq!(gamma_of(&zs[0], -1.0).unwrap(), 1.0);
        let g2 = gamma_of(&zs[1], -1.0).unwrap();
        assert!((g2 - (2.0 * PI * 0.89179907560 - 1.0)).abs() < 1e-9);
        let z0 = find_zero(1, 0.0, DEFAULT_ROOT_TOL).unwrap();
        assert!((gamma_of(&z0, 0.0).unwrap() - PI / 2.0).abs() < 1e-15);
        let bogus = ZeroRecord {
            mu: 1,
            sigma: 1,
            phi_sq: -5.0,
            gamma: 0.0,
        };
        assert!(matches!(gamma_of(&bogus, 1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn imaginary_gamma_is_stable_for_large_negative_x() {
        let x = -30.0;
        let z = find_zero(1, x, DEFAULT_ROOT_TOL).unwrap();
        let y = z.phi_abs();
        assert!((y / y.tanh() + x).abs() < 1e-12);
        // Gamma_1 ~ 2|x| e^{-|x|}
        let approx = 2.0 * x.abs() * (-x.abs()).exp();
        assert!((z.gamma / approx - 1.0).abs() < 1e-10);
    }

    #[test]
    fn continuity_at_minus_one() {
        for &eps in &[1e-3, 1e-5, 1e-7] {
            let plus = find_zero(1, -1.0 + eps, DEFAULT_ROOT_TOL).unwrap().phi_sq;
            let minus = find_zero(1, -1.0 - eps, DEFAULT_ROOT_TOL).unwrap().phi_sq;
            assert!((plus / eps - 3.0).abs() < 5.0 * eps.max(1e-9), "{plus}");
            assert!((minus / eps + 3.0).abs() < 5.0 * eps.max(1e-9), "{minus}");
        }
    }

    #[test]
    fn series_approximation() {
        let phi0 = 3.5 * PI;
        let two = zero_series_approx(4, 1.0, 2);
        assert!((two - (phi0 * phi0 + 2.0 - 5.0 / (3.0 * phi0 * phi0))).abs() < 1e-12);
        assert!((two.sqrt() - 11.08553841).abs() < 1e-4);
        assert_eq!(zero_series_approx(7, 0.0, 5), (6.5 * PI).powi(2));
        let exact = find_zero(10, -2.0, DEFAULT_ROOT_TOL).unwrap().phi_sq;
        assert!((zero_series_approx(10, -2.0, 3) - exact).abs() < 1e-8);
        // Third coefficient 2x^3(x^2+5x+5)/5.
        let x = 0.7;
        let p0 = critical_zero(2);
        let three = zero_series_approx(2, x, 3) - zero_series_approx(2, x, 2);
        let expected = 2.0 * x.powi(3) * (x * x + 5.0 * x + 5.0) / (5.0 * p0.powi(4));
        assert!((three - expected).abs() < 1e-12 * expected.abs(), "{three} {expected}");
    }

    #[test]
    fn rejects_bad_input() {
        assert!(find_zero(0, 1.0, 1e-14).is_err());
        assert!(find_zero(1, 1.0, 0.0).is_err());
        assert!(find_zeros(0, 1.0, 1e-14).is_err());
        assert!(ScalingPoint::new(1.0, 0.0).is_err());
    }

    #[test]
    fn scaling_point_identity() {
        let p = ScalingPoint::new(1.3, 2.7).unwrap();
        assert!((p.x_perp() / p.rho.sqrt() - p.x_volume()).abs() < 1e-15);
    }
}

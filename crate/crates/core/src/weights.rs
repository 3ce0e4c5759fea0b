//! Matrix-element weights `v_mu(x)`.
//!
//! The contour integral around the branch cut is reduced to a real integral
//! along `t` in `(|x|, inf)` and then to `s = sqrt(t^2 - x^2)`, which removes the
//! inverse square root at the endpoint.

use std::collections::HashMap;
use std::f64::consts::{PI, SQRT_2};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, OnceLock, RwLock};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quad::{integrate_sqrt_singularity, QuadratureSpec};
use crate::roots::{critical_zero, find_zero, parity, ZeroRecord, DEFAULT_ROOT_TOL};

/// How a weight was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMethod {
    Contour,
    ClosedFormX0,
    SpecialXNeg1,
    OracleProduct,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightRecord {
    pub mu: usize,
    pub v: f64,
    pub method: WeightMethod,
}

/// `R(t) = (x + x^2 - t^2) / (sqrt(t^2 - x^2) (t cosh t + x sinh t))` for `t > |x|`.
pub fn counting_integrand(t: f64, x: f64) -> Result<f64> {
    if !(t > x.abs()) {
        return Err(Error::Domain(format!("counting integrand needs t > |x|, got t={t}, x={x}")));
    }
    let s = ((t - x.abs()) * (t + x.abs())).sqrt();
    Ok(substituted_integrand(s, x) * t / s)
}

/// `R(t) dt/ds` at `t = sqrt(x^2 + s^2)`, i.e. `(x - s^2) / (t (t cosh t + x sinh t))`,
/// regular at `s = 0` and free of overflow for large `t`.
pub(crate) fn substituted_integrand(s: f64, x: f64) -> f64 {
    let t = x.hypot(s);
    if t == 0.0 {
        return -1.0;
    }
    // t + x without cancellation for x < 0.
    let t_plus_x = if x >= 0.0 { t + x } else { s * s / (t - x) };
    let e2 = (-2.0 * t).exp();
    let denom = t * (0.5 * t_plus_x + 0.5 * e2 * (t - x));
    (x - s * s) * (-t).exp() / denom
}

/// `(1/pi) int R(t) dt` over `(|x|, inf)`; exactly `(sign x - 1) / 2`.
pub fn counting_identity(x: f64, spec: &QuadratureSpec) -> Result<f64> {
    Ok(integrate_sqrt_singularity(|s| substituted_integrand(s, x), x.abs(), spec)? / PI)
}

/// `log v_mu` from a zero already located.
pub fn log_weight_from_zero(zero: &ZeroRecord, x: f64, spec: &QuadratureSpec) -> Result<f64> {
    let u = zero.phi_sq;
    let gamma = zero.gamma;
    if zero.mu == 1 && x < 0.0 {
        // v_1 = 4 (Gamma - x) Gamma^2 u / (Gamma^2 + x) exp[(1/pi) int ln(Gamma^2 + s^2) R ds],
        // continuous through x = -1 where u / (Gamma^2 + x) -> 3/2.
        let ratio = if u == 0.0 { 1.5 } else { u / (x * (x + 1.0) + u) };
        let g2 = gamma * gamma;
        let integral = integrate_sqrt_singularity(
            |s| (g2 + s * s).ln() * substituted_integrand(s, x),
            x.abs(),
            spec,
        )?;
        if !(ratio > 0.0) {
            return Err(Error::Domain(format!("inconsistent first zero phi_sq={u} at x={x}")));
        }
        return Ok((4.0 * (gamma - x) * g2 * ratio).ln() + integral / PI);
    }
    if !(u > 0.0) {
        return Err(Error::Domain(format!("zero mu={} at x={x} has phi_sq={u} <= 0", zero.mu)));
    }
    let sigma = zero.sigma as f64;
    let gamma_minus_x = if x > 0.0 { u / (gamma + x) } else { gamma - x };
    let prefactor = 4.0 * gamma_minus_x / (1.0 + x / (gamma * gamma));
    let integral = integrate_sqrt_singularity(
        |s| ((x * x + s * s) / u).ln_1p() * substituted_integrand(s, x),
        x.abs(),
        spec,
    )?;
    Ok(prefactor.ln() + sigma * integral / PI)
}

/// `v_mu(x)` from the real-axis reduction of the contour integral.
pub fn weight_v(mu: usize, x: f64, spec: &QuadratureSpec) -> Result<WeightRecord> {
    if mu == 1 && x == -1.0 {
        return Err(Error::InvalidArgument(
            "use weight_v_special_xneg1 for mu = 1 at x = -1".into(),
        ));
    }
    let zero = find_zero(mu, x, DEFAULT_ROOT_TOL)?;
    Ok(WeightRecord {
        mu,
        v: log_weight_from_zero(&zero, x, spec)?.exp(),
        method: WeightMethod::Contour,
    })
}

/// `v_1(-1) = 12 exp[(1/pi) int_1^inf ln(t^2) R(t) dt]`.
pub fn weight_v_special_xneg1() -> Result<WeightRecord> {
    let spec = QuadratureSpec::default();
    let integral = integrate_sqrt_singularity(
        |s| (1.0 + s * s).ln() * substituted_integrand(s, -1.0),
        1.0,
        &spec,
    )?;
    Ok(WeightRecord {
        mu: 1,
        v: 12.0 * (integral / PI).exp(),
        method: WeightMethod::SpecialXNeg1,
    })
}

/// `B(mu/2, 1/2)` from `B(1/2, 1/2) = pi`, `B(1, 1/2) = 2` and
/// `B(a + 1, 1/2) = B(a, 1/2) a / (a + 1/2)`.
fn beta_half(mu: usize) -> f64 {
    let (mut value, mut a) = if mu % 2 == 1 { (PI, 0.5) } else { (2.0, 1.0) };
    while a < mu as f64 / 2.0 {
        value *= a / (a + 0.5);
        a += 1.0;
    }
    value
}

/// `v_mu(0) = 4 Phi0^(1 + sigma) [B(mu/2, 1/2) / (sqrt(2) pi)]^(2 sigma)`.
pub fn weight_v_closed_x0(mu: usize) -> Result<WeightRecord> {
    if mu < 1 {
        return Err(Error::InvalidArgument("mu starts at 1".into()));
    }
    let phi0 = critical_zero(mu);
    let b = beta_half(mu) / (SQRT_2 * PI);
    let v = if parity(mu) == 1 {
        4.0 * phi0 * phi0 * b * b
    } else {
        4.0 / (b * b)
    };
    Ok(WeightRecord {
        mu,
        v,
        method: WeightMethod::ClosedFormX0,
    })
}

/// Compares the Taylor coefficients of
/// `W(eta) = (pi / sqrt 2) (1 - eta)^(-3/2) (1 + eta)^(1/2)` with
/// `sqrt(v_mu(0))` for `mu = 1..=n_terms`, and the two partial sums at `eta`.
/// Returns the largest discrepancy.
pub fn weight_w_generating_check(eta: f64, n_terms: usize) -> Result<f64> {
    if !(eta.abs() < 1.0) {
        return Err(Error::InvalidArgument(format!("|eta| must be < 1, got {eta}")));
    }
    if n_terms < 1 {
        return Err(Error::InvalidArgument("n_terms must be at least 1".into()));
    }
    let mut left = vec![1.0; n_terms]; // (1 - eta)^(-3/2)
    let mut right = vec![1.0; n_terms]; // (1 + eta)^(1/2)
    for k in 1..n_terms {
        let kf = k as f64;
        left[k] = left[k - 1] * (1.5 + kf - 1.0) / kf;
        right[k] = right[k - 1] * (0.5 - (kf - 1.0)) / kf;
    }
    let scale = PI / SQRT_2;
    let mut worst: f64 = 0.0;
    let (mut sum_series, mut sum_weights, mut pow) = (0.0, 0.0, 1.0);
    for k in 0..n_terms {
        let coeff = scale * (0..=k).map(|j| left[j] * right[k - j]).sum::<f64>();
        let w = weight_v_closed_x0(k + 1)?.v.sqrt();
        worst = worst.max((coeff - w).abs());
        sum_series += coeff * pow;
        sum_weights += w * pow;
        pow *= eta;
    }
    Ok(worst.max((sum_series - sum_weights).abs()))
}

/// Regularized product `p_mu = Phi_mu^2 prod'_nu (1 - Phi_mu^2 / Phi_nu^2)^(-sigma_mu sigma_nu)`
/// over the first `n_zeros` zeros, with Richardson extrapolation of the
/// paired partial products in `1/K^2` and `1/K^3`.
pub fn oracle_product_p(mu: usize, x: f64, n_zeros: usize) -> Result<f64> {
    if n_zeros < 8 * mu.max(8) {
        return Err(Error::InvalidArgument(format!(
            "n_zeros={n_zeros} too small for mu={mu}; the truncated product converges only as 1/K^2"
        )));
    }
    let k3 = n_zeros - n_zeros % 4;
    let zeros: Vec<f64> = (1..=k3)
        .into_par_iter()
        .map(|nu| find_zero(nu, x, DEFAULT_ROOT_TOL).map(|z| z.phi_sq))
        .collect::<Result<_>>()?;
    let u = zeros[mu - 1];
    if u == 0.0 {
        return Err(Error::Domain(format!("p_{mu} vanishes at x={x}")));
    }
    let partial = |k: usize| -> (f64, f64) {
        let mut log_sum = 0.0;
        let mut sign = 1.0;
        for (i, &un) in zeros[..k].iter().enumerate() {
            let nu = i + 1;
            if nu == mu {
                continue;
            }
            // A vanishing zero contributes Phi_nu^2 - Phi_mu^2; the dropped scale
            // Phi_nu^(2 sigma_mu sigma_nu) cancels in products across parities.
            let f = if un == 0.0 { -u } else { 1.0 - u / un };
            if f < 0.0 {
                sign = -sign;
            }
            log_sum += parity(nu) as f64 * f.abs().ln();
        }
        (log_sum, sign)
    };
    let ks = [k3 / 4, k3 / 2, k3];
    let s: Vec<(f64, f64)> = ks.iter().map(|&k| partial(k)).collect();
    // Solve S(k) = S + c2/k^2 + c3/k^3 for S.
    let rows: Vec<[f64; 3]> = ks
        .iter()
        .map(|&k| {
            let kf = k as f64;
            [1.0, 1.0 / (kf * kf), 1.0 / (kf * kf * kf)]
        })
        .collect();
    let det3 = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let a = [rows[0], rows[1], rows[2]];
    let mut b = a;
    for i in 0..3 {
        b[i][0] = s[i].0;
    }
    let extrapolated = det3(b) / det3(a);
    let sigma = parity(mu) as f64;
    let sign = s[2].1 * u.signum();
    Ok(sign * (u.abs().ln() - sigma * extrapolated).exp())
}

/// Weight implied by the product oracle, `p_mu sigma_mu (Gamma_mu - sigma_mu x)^sigma_mu`.
/// It differs from [`weight_v`] by an `x`-dependent factor `K^sigma_mu`, so only
/// ratios within a parity class and products across classes are meaningful.
pub fn oracle_weight(mu: usize, x: f64, n_zeros: usize) -> Result<WeightRecord> {
    let p = oracle_product_p(mu, x, n_zeros)?;
    let zero = find_zero(mu, x, DEFAULT_ROOT_TOL)?;
    let sigma = zero.sigma as f64;
    Ok(WeightRecord {
        mu,
        v: p * sigma * (zero.gamma - sigma * x).powf(sigma),
        method: WeightMethod::OracleProduct,
    })
}

/// Zeros and log-weights `mu = 1..=len` at one value of `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub x: f64,
    pub zeros: Vec<ZeroRecord>,
    pub log_v: Vec<f64>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.zeros.len()
    }

    pub fn is_empty(&self) -> bool {
        self.zeros.is_empty()
    }

    fn compute(x: f64, count: usize, reuse: Option<&Spectrum>) -> Result<Spectrum> {
        let spec = QuadratureSpec::default();
        let have = reuse.map_or(0, |s| s.len().min(count));
        let fresh: Vec<(ZeroRecord, f64)> = (have + 1..=count)
            .into_par_iter()
            .map(|mu| {
                let zero = find_zero(mu, x, DEFAULT_ROOT_TOL)?;
                let log_v = if x == 0.0 {
                    weight_v_closed_x0(mu)?.v.ln()
                } else {
                    log_weight_from_zero(&zero, x, &spec)?
                };
                Ok((zero, log_v))
            })
            .collect::<Result<_>>()?;
        let mut zeros = Vec::with_capacity(count);
        let mut log_v = Vec::with_capacity(count);
        if let Some(old) = reuse {
            zeros.extend_from_slice(&old.zeros[..have]);
            log_v.extend_from_slice(&old.log_v[..have]);
        }
        for (z, l) in fresh {
            zeros.push(z);
            log_v.push(l);
        }
        Ok(Spectrum { x, zeros, log_v })
    }
}

const CACHE_LIMIT: usize = 1 << 16;

type SpectrumCache = RwLock<HashMap<u64, Arc<Spectrum>>>;

fn cache() -> &'static SpectrumCache {
    static CACHE: OnceLock<SpectrumCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

static CACHE_HITS: AtomicU64 = AtomicU64::new(0);
static CACHE_MISSES: AtomicU64 = AtomicU64::new(0);

/// `(hits, misses)` of the shared spectrum cache since start-up.
pub fn cache_stats() -> (u64, u64) {
    (CACHE_HITS.load(Ordering::Relaxed), CACHE_MISSES.load(Ordering::Relaxed))
}

/// Memoized spectrum with at least `count` entries. At `x = 0` the weights
/// come from the closed form, elsewhere from the contour integral (including
/// `x = -1`, where the first weight takes its limiting value).
pub fn spectrum(x: f64, count: usize) -> Result<Arc<Spectrum>> {
    if count < 1 {
        return Err(Error::InvalidArgument("spectrum needs at least one mode".into()));
    }
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
    }
    // Normalise -0.0 so both zeros share an entry.
    let x = if x == 0.0 { 0.0 } else { x };
    let key = x.to_bits();
    let existing = cache().read().expect("spectrum cache poisoned").get(&key).cloned();
    if let Some(s) = &existing {
        if s.len() >= count {
            CACHE_HITS.fetch_add(1, Ordering::Relaxed);
            return Ok(Arc::clone(s));
        }
    }
    CACHE_MISSES.fetch_add(1, Ordering::Relaxed);
    let computed = Arc::new(Spectrum::compute(x, count, existing.as_deref())?);
    let mut map = cache().write().expect("spectrum cache poisoned");
    if map.len() >= CACHE_LIMIT {
        map.clear();
    }
    let entry = map.entry(key).or_insert_with(|| Arc::clone(&computed));
    if entry.len() < computed.len() {
        *entry = Arc::clone(&computed);
    }
    Ok(computed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn integrand_at_critical_point() {
        for &t in &[0.1, 1.0, 5.0, 30.0] {
            let r = counting_integrand(t, 0.0).unwrap();
            assert!((r + 1.0 / f64::cosh(t)).abs() < 1e-15 * (1.0 / f64::cosh(t)).max(1e-300));
        }
        assert!(counting_integrand(1.0, 1.0).is_err());
        assert!(counting_integrand(0.5, -1.0).is_err());
    }

    #[test]
    fn integrand_matches_direct_formula() {
        for &(t, x) in &[(2.0, 1.0), (2.0, -1.0), (5.0, -4.0), (0.7, 0.3)] {
            let direct =
                (x + x * x - t * t) / ((t * t - x * x as f64).sqrt() * (t * f64::cosh(t) + x * f64::sinh(t)));
            let r = counting_integrand(t, x).unwrap();
            assert!((r - direct).abs() < 1e-13 * direct.abs(), "{t} {x}");
        }
    }

    #[test]
    fn identity() {
        let spec = QuadratureSpec::default();
        for &x in &[0.5, 1.5, 4.0] {
            assert!(counting_identity(x, &spec).unwrap().abs() < 1e-10);
            assert!((counting_identity(-x, &spec).unwrap() + 1.0).abs() < 1e-10);
        }
        assert!((counting_identity(0.0, &spec).unwrap() + 0.5).abs() < 1e-12);
    }

    #[test]
    fn closed_forms() {
        let pi2 = PI * PI;
        let cases = [(1, pi2 / 2.0), (2, 2.0 * pi2), (3, 25.0 * pi2 / 8.0), (4, 4.5 * pi2)];
        for (mu, v) in cases {
            assert!((weight_v_closed_x0(mu).unwrap().v / v - 1.0).abs() < 1e-15, "{mu}");
        }
        for mu in 1..12 {
            let b = crate::specialfn::euler_beta(mu as f64 / 2.0, 0.5).unwrap();
            assert!((beta_half(mu) / b - 1.0).abs() < 1e-13);
        }
    }

    #[test]
    fn contour_matches_closed_form() {
        let spec = QuadratureSpec::default();
        for mu in 1..=6 {
            let c = weight_v(mu, 0.0, &spec).unwrap().v;
            let e = weight_v_closed_x0(mu).unwrap().v;
            assert!((c / e - 1.0).abs() < 1e-11, "{mu}: {c} vs {e}");
        }
    }

    #[test]
    fn special_value_and_continuity() {
        let v = weight_v_special_xneg1().unwrap().v;
        assert!((v - 6.39303337215).abs() < 1e-10, "{v}");
        let spec = QuadratureSpec::default();
        for &eps in &[1e-4, 1e-6] {
            let lo = weight_v(1, -1.0 - eps, &spec).unwrap().v;
            let hi = weight_v(1, -1.0 + eps, &spec).unwrap().v;
            assert!((lo - v).abs() < 1e-2 && (hi - v).abs() < 1e-2);
            assert!((lo - hi).abs() < 4.0 * eps);
        }
        assert!(weight_v(1, -1.0, &spec).is_err());
    }

    #[test]
    fn generating_function() {
        assert!((weight_w_generating_check(0.0, 1).unwrap()).abs() < 1e-15);
        assert!(weight_w_generating_check(0.3, 6).unwrap() < 1e-10);
        assert!(weight_w_generating_check(1.0, 6).is_err());
    }

    #[test]
    fn oracle_ratio_at_critical_point() {
        let p1 = oracle_product_p(1, 0.0, 400).unwrap();
        let p3 = oracle_product_p(3, 0.0, 400).unwrap();
        // p_mu / p_mu' = v_mu (Gamma_mu' - x) / (v_mu' (Gamma_mu - x)) within a parity class.
        let expected = weight_v_closed_x0(3).unwrap().v / weight_v_closed_x0(1).unwrap().v / 5.0;
        assert!((p3 / p1 / expected - 1.0).abs() < 1e-6);
        assert!(oracle_product_p(1, 0.0, 10).is_err());
    }

    #[test]
    fn spectrum_cache_extends() {
        let a = spectrum(0.37, 3).unwrap();
        let b = spectrum(0.37, 5).unwrap();
        assert_eq!(a.log_v[..], b.log_v[..3]);
        let c = spectrum(0.37, 4).unwrap();
        assert_eq!(c.len(), 5);
        let (hits, _) = cache_stats();
        assert!(hits >= 1);
    }
}

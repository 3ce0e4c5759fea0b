//! Full Casimir observables of the rectangle: the surface-corner part
//! `Theta_sc(x)`, the potential `Theta(x, rho)`, the force `vartheta(x, rho)`,
//! the critical amplitude and the force sign-change ratio `rho_0`.

use std::collections::HashMap;
use std::f64::consts::{LN_2, PI};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Mutex, OnceLock, RwLock};

use crate::error::{Error, Result};
use crate::quad::{integrate_finite, integrate_semi_infinite, QuadratureSpec};
use crate::roots::ScalingPoint;
use crate::sigma::{psi_potential, psi_strip, sigma_series, MIN_DIRECT_RHO};
use crate::specialfn::{dilog, eisenstein_e2, log_dedekind_eta};
use crate::strip::{log_a, omega_integral, theta_oo, vartheta_oo};
use crate::thermo_constants::{CORNER_JUMP, CORNER_LOG_COEFF};

/// Default series order for `Sigma` and `psi`.
pub const DEFAULT_ORDER: usize = 8;

/// Critical coupling `z_c = sqrt(2) - 1` of the isotropic square lattice.
pub const Z_CRITICAL: f64 = std::f64::consts::SQRT_2 - 1.0;

/// One evaluated point of the full scaling functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CasimirSample {
    pub point: ScalingPoint,
    pub theta_total: f64,
    pub vartheta_total: f64,
    pub theta_sc: f64,
    /// Strip force `psi(x, rho)`.
    pub psi_val: f64,
    /// `Psi(x, rho) = -log(Sigma) / rho`.
    pub big_psi_val: f64,
}

fn integral_spec() -> QuadratureSpec {
    QuadratureSpec::default().with_tolerances(1e-10, 1e-12)
}

fn check_nonzero(x: f64, what: &str) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("{what}: x must be finite, got {x}")));
    }
    if x == 0.0 {
        return Err(Error::Domain(format!(
            "{what} diverges logarithmically at x = 0; use casimir_amplitude for the finite critical part"
        )));
    }
    Ok(())
}

/// `Li2(-e^l)` for any real `l`.
fn dilog_neg_exp(l: f64) -> f64 {
    if l > 0.0 {
        -PI * PI / 6.0 - 0.5 * l * l - dilog(-(-l).exp())
    } else {
        dilog(-l.exp())
    }
}

/// `I1(x) = -(1/2pi) int_{|x|}^inf dOmega (Omega^2 - x^2)^{-1/2} Li2(-(Omega - x)/(Omega + x) e^{-2 Omega})`,
/// evaluated in `s = sqrt(Omega^2 - x^2)`.
pub fn integral_i1(x_vol: f64, spec: &QuadratureSpec) -> Result<f64> {
    check_nonzero(x_vol, "I1")?;
    let integral = omega_integral(
        |s| {
            let (l, omega) = log_a(s, x_vol);
            dilog_neg_exp(l) / omega
        },
        x_vol,
        spec,
    )?;
    Ok(-integral / (2.0 * PI))
}

type PsiCache = RwLock<HashMap<(u64, usize), f64>>;

fn psi_cache() -> &'static PsiCache {
    static CACHE: OnceLock<PsiCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

static PSI_HITS: AtomicU64 = AtomicU64::new(0);
static PSI_MISSES: AtomicU64 = AtomicU64::new(0);

/// `(hits, misses)` of the memo for `psi(xi, 1)`.
pub fn psi_cache_stats() -> (u64, u64) {
    (PSI_HITS.load(Ordering::Relaxed), PSI_MISSES.load(Ordering::Relaxed))
}

/// Memoized strip force of the square, `psi(xi, 1)`.
pub fn psi_square(xi: f64, order: usize) -> Result<f64> {
    let xi = if xi == 0.0 { 0.0 } else { xi };
    let key = (xi.to_bits(), order);
    if let Some(&v) = psi_cache().read().expect("psi cache poisoned").get(&key) {
        PSI_HITS.fetch_add(1, Ordering::Relaxed);
        return Ok(v);
    }
    PSI_MISSES.fetch_add(1, Ordering::Relaxed);
    let v = psi_strip(xi, 1.0, order)?;
    let mut map = psi_cache().write().expect("psi cache poisoned");
    if map.len() >= 1 << 18 {
        map.clear();
    }
    map.insert(key, v);
    Ok(v)
}

/// `I2(x) = psi(0,1) log(1 + x^-2) + 2 int_x^{sign(x) inf} dxi/xi [psi(xi,1) - psi(0,1)/(1 + xi^2)]`.
///
/// With `xi = sign(x) eta`, `a = |x|` and `c = max(a, 1)` the subtracted
/// term is integrated in closed form beyond `c`. For `x < 0` the result
/// includes `-log 2`, so that `I2(-inf) = -log 2`.
pub fn integral_i2(x_vol: f64, order: usize, spec: &QuadratureSpec) -> Result<f64> {
    check_nonzero(x_vol, "I2")?;
    let sign = x_vol.signum();
    let a = x_vol.abs();
    let c = a.max(1.0);
    let psi0 = psi_square(0.0, order)?;
    let failure: Mutex<Option<Error>> = Mutex::new(None);
    let psi = |eta: f64| match psi_square(sign * eta, order) {
        Ok(v) => v,
        Err(e) => {
            failure.lock().unwrap().get_or_insert(e);
            f64::NAN
        }
    };
    let mut total = 0.0;
    if a < c {
        total += psi0 * ((1.0 / (a * a)).ln_1p() - LN_2);
        let mid = integrate_finite(|eta| (psi(eta) - psi0 / (1.0 + eta * eta)) / eta, a, c, spec);
        total += 2.0 * take(mid, &failure)?;
    }
    let tail_spec = spec.with_decay(if sign > 0.0 { 0.5 } else { 1.2 });
    let tail = integrate_semi_infinite(|eta| psi(eta) / eta, c, &tail_spec);
    total += 2.0 * take(tail, &failure)?;
    if sign < 0.0 {
        // The low-temperature limit of the integral carries the ordered-phase -log 2.
        total -= LN_2;
    }
    Ok(total)
}

fn take(r: Result<f64>, failure: &Mutex<Option<Error>>) -> Result<f64> {
    if let Some(e) = failure.lock().unwrap().take() {
        return Err(e);
    }
    r
}

/// `Theta_o(x, 1) = I1(x) + I2(x)`.
pub fn theta_volume_rho1(x_vol: f64, order: usize) -> Result<f64> {
    let spec = integral_spec();
    Ok(integral_i1(x_vol, &spec)? + integral_i2(x_vol, order, &spec)?)
}

type ScalarCache = RwLock<HashMap<(u64, usize), f64>>;

fn theta_sc_cache() -> &'static ScalarCache {
    static CACHE: OnceLock<ScalarCache> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Surface-corner part `Theta_sc(x) = -Theta_oo(x) + log Sigma(x, 1) + Theta_o(x, 1)`.
/// Memoized per `(x, order)`.
pub fn theta_sc(x: f64, order: usize) -> Result<f64> {
    check_nonzero(x, "Theta_sc")?;
    let key = (x.to_bits(), order);
    if let Some(&v) = theta_sc_cache().read().expect("theta_sc cache poisoned").get(&key) {
        return Ok(v);
    }
    let spec = QuadratureSpec::default();
    let sigma = sigma_series(x, 1.0, order)?.value;
    let v = -theta_oo(x, &spec)? + sigma.ln() + theta_volume_rho1(x, order)?;
    theta_sc_cache().write().expect("theta_sc cache poisoned").insert(key, v);
    Ok(v)
}

/// Regular part `Theta_sc(x) + 1/8 log|x| + 3/4 log 2 sign(x)` of the
/// surface-corner function.
pub fn theta_sc_regular_part(x: f64, order: usize) -> Result<f64> {
    Ok(theta_sc(x, order)? + CORNER_LOG_COEFF * x.abs().ln() + CORNER_JUMP * x.signum())
}

/// `d Psi(x, rho) / dx` by central differences with one Richardson step.
pub fn psi_potential_dx(x: f64, rho: f64, order: usize) -> Result<f64> {
    let h = (1e-4 * x.abs()).max(1e-4);
    let diff = |h: f64| -> Result<f64> {
        Ok((psi_potential(x + h, rho, order)? - psi_potential(x - h, rho, order)?) / (2.0 * h))
    };
    let coarse = diff(h)?;
    let fine = diff(0.5 * h)?;
    let d = (4.0 * fine - coarse) / 3.0;
    if !d.is_finite() {
        return Err(Error::no_convergence(
            "finite difference of Psi",
            format!("non-finite derivative at x={x}, rho={rho}"),
        ));
    }
    Ok(d)
}

/// `x Theta_sc'(x) = Theta_oo(x) + vartheta_oo(x) - 2 psi(x, 1) - x dPsi(x, 1)/dx`,
/// which tends to `-1/8` at `x = 0`.
pub fn x_theta_sc_derivative(x: f64, order: usize) -> Result<f64> {
    let spec = QuadratureSpec::default();
    let drift = if x == 0.0 { 0.0 } else { x * psi_potential_dx(x, 1.0, order)? };
    Ok(theta_oo(x, &spec)? + vartheta_oo(x, &spec)? - 2.0 * psi_strip(x, 1.0, order)? - drift)
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")))
    }
}

/// Casimir potential `Theta(x, rho)`.
///
/// For `rho >= 1`: `Theta_oo(x) + Theta_sc(x) / rho + Psi(x, rho)`; below that
/// through `Theta(x, rho) = rho^-2 Theta(x rho, 1/rho)`.
pub fn theta_total(x: f64, rho: f64, order: usize) -> Result<f64> {
    check_rho(rho)?;
    check_nonzero(x, "Theta")?;
    if rho < 1.0 {
        return Ok(theta_total(x * rho, 1.0 / rho, order)? / (rho * rho));
    }
    let spec = QuadratureSpec::default();
    Ok(theta_oo(x, &spec)? + theta_sc(x, order)? / rho + psi_potential(x, rho, order)?)
}

/// Casimir force `vartheta(x, rho)`.
///
/// For `rho >= 1`: `-Theta_oo(x) + psi(x, rho)`. For `rho < 1`, with `x' = rho x`:
/// `rho^-2 [vartheta_oo(x') - rho x' Theta_sc'(x') - x' dPsi(x', 1/rho)/dx - psi(x', 1/rho)]`.
pub fn vartheta_total(x: f64, rho: f64, order: usize) -> Result<f64> {
    check_rho(rho)?;
    if !x.is_finite() {
        return Err(Error::InvalidArgument(format!("x must be finite, got {x}")));
    }
    if rho >= 1.0 {
        vartheta_long(x, rho, order)
    } else {
        vartheta_short(x, rho, order)
    }
}

fn vartheta_long(x: f64, rho: f64, order: usize) -> Result<f64> {
    Ok(-theta_oo(x, &QuadratureSpec::default())? + psi_strip(x, rho, order)?)
}

fn vartheta_short(x: f64, rho: f64, order: usize) -> Result<f64> {
    let xs = rho * x;
    let r = 1.0 / rho;
    let drift = if xs == 0.0 { 0.0 } else { xs * psi_potential_dx(xs, r, order)? };
    let inner = vartheta_oo(xs, &QuadratureSpec::default())? - rho * x_theta_sc_derivative(xs, order)? - drift
        - psi_strip(xs, r, order)?;
    Ok(inner / (rho * rho))
}

/// All observables at one scaling point.
///
/// For `rho < 1` the strip parts are those implied by the decomposition:
/// `Psi = Theta - Theta_oo - Theta_sc / rho` and `psi = vartheta + Theta_oo`.
pub fn casimir_sample(x: f64, rho: f64, order: usize) -> Result<CasimirSample> {
    let point = ScalingPoint::new(x, rho)?;
    let spec = QuadratureSpec::default();
    let theta_total = theta_total(x, rho, order)?;
    let vartheta_total = vartheta_total(x, rho, order)?;
    let theta_sc = theta_sc(x, order)?;
    let (psi_val, big_psi_val) = if rho >= 1.0 {
        (psi_strip(x, rho, order)?, psi_potential(x, rho, order)?)
    } else {
        let t_oo = theta_oo(x, &spec)?;
        (vartheta_total + t_oo, theta_total - t_oo - theta_sc / rho)
    };
    Ok(CasimirSample {
        point,
        theta_total,
        vartheta_total,
        theta_sc,
        psi_val,
        big_psi_val,
    })
}

/// Finite Casimir amplitude `Delta(rho) = 1/4 log eta(i rho)`.
///
/// For `rho >= 0.5` it is also evaluated as `rho Theta_oo(0) - log Sigma(0, rho)`
/// and the two must agree to `1e-11`.
pub fn casimir_amplitude(rho: f64) -> Result<f64> {
    check_rho(rho)?;
    let eta = 0.25 * log_dedekind_eta(rho)?;
    if rho >= MIN_DIRECT_RHO {
        let order = 12;
        let series = -PI * rho / 48.0 - sigma_series(0.0, rho, order)?.value.ln();
        if (series - eta).abs() > 1e-11 {
            return Err(Error::no_convergence(
                "Casimir amplitude",
                format!("eta route {eta} and series route {series} disagree at rho={rho}"),
            ));
        }
    }
    Ok(eta)
}

/// Aspect ratio at which the critical force changes sign: the zero of
/// `E2(i rho)` on `(0.4, 0.7)`.
pub fn find_rho0(tol: f64) -> Result<f64> {
    if !(tol >= 1e-14) {
        return Err(Error::InvalidArgument(format!("tolerance must be at least 1e-14, got {tol}")));
    }
    let (mut a, mut b) = (0.4, 0.7);
    let (mut fa, mut fb) = (eisenstein_e2(a)?, eisenstein_e2(b)?);
    if fa * fb > 0.0 {
        return Err(Error::no_convergence(
            "rho_0 bracket",
            format!("E2 has equal signs at the ends: {fa}, {fb}"),
        ));
    }
    // Illinois variant of regula falsi.
    let mut side = 0i32;
    for _ in 0..200 {
        let c = (a * fb - b * fa) / (fb - fa);
        let fc = eisenstein_e2(c)?;
        if fc == 0.0 || (b - a).abs() < tol {
            return Ok(c);
        }
        if fc * fb > 0.0 {
            b = c;
            fb = fc;
            if side == -1 {
                fa *= 0.5;
            }
            side = -1;
        } else {
            a = c;
            fa = fc;
            if side == 1 {
                fb *= 0.5;
            }
            side = 1;
        }
        if (b - a).abs() < tol {
            return Ok(0.5 * (a + b));
        }
    }
    Err(Error::no_convergence("rho_0", format!("bracket [{a}, {b}] after 200 steps")))
}

/// Scaling variables of an `L x M` lattice at coupling `z = tanh(K)`:
/// `x = 2M (1 - z / z_c)`, `rho = L / M`.
pub fn lattice_to_scaling(z: f64, l: u32, m: u32) -> Result<ScalingPoint> {
    if !(z > 0.0 && z < 1.0) {
        return Err(Error::InvalidArgument(format!("z must lie in (0, 1), got {z}")));
    }
    if l < 1 || m < 1 {
        return Err(Error::InvalidArgument(format!("lattice sizes must be positive, got {l} x {m}")));
    }
    ScalingPoint::new(2.0 * m as f64 * (1.0 - z / Z_CRITICAL), l as f64 / m as f64)
}

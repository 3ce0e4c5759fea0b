//! Scalar special functions: dilogarithm, Euler beta, divisor sums, the
//! Eisenstein series `E2` and Dedekind eta on the imaginary axis, Catalan's
//! constant and `d/ds zeta(s, a)` at `s = -1`.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

// B_2, B_4, ..., B_22
const BERNOULLI_EVEN: [f64; 11] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
    -3617.0 / 510.0,
    43867.0 / 798.0,
    -174611.0 / 330.0,
    854513.0 / 138.0,
];

/// Series in `u = -ln(1 - z)`, valid for `z` in `[-1, 1/2]`.
fn dilog_core(z: f64) -> f64 {
    let u = -(-z).ln_1p();
    let u2 = u * u;
    let mut sum = u - 0.25 * u2;
    let mut pow = u; // u^(2k+1) / (2k+1)!
    for (k, b) in BERNOULLI_EVEN.iter().enumerate() {
        let n = 2 * (k + 1) + 1;
        pow *= u2 / ((n - 1) as f64 * n as f64);
        sum += b * pow;
    }
    sum
}

/// Real dilogarithm `Li2(z)` for `z <= 1`; `NaN` above the branch point.
pub fn dilog(z: f64) -> f64 {
    if z.is_nan() || z > 1.0 {
        return f64::NAN;
    }
    if z == 1.0 {
        return PI * PI / 6.0;
    }
    if z == 0.0 {
        return 0.0;
    }
    if z < -1.0 {
        let l = (-z).ln();
        return -PI * PI / 6.0 - 0.5 * l * l - dilog_core(1.0 / z);
    }
    if z > 0.5 {
        return PI * PI / 6.0 - z.ln() * (-z).ln_1p() - dilog_core(1.0 - z);
    }
    dilog_core(z)
}

/// Euler beta function `B(a, b) = Gamma(a) Gamma(b) / Gamma(a + b)`.
pub fn euler_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "beta function needs positive arguments, got ({a}, {b})"
        )));
    }
    Ok(statrs::function::beta::beta(a, b))
}

const SIEVE_LIMIT: usize = 1 << 16;

fn divisor_sieve() -> &'static [u64] {
    static SIEVE: OnceLock<Vec<u64>> = OnceLock::new();
    SIEVE.get_or_init(|| {
        let mut s = vec![0u64; SIEVE_LIMIT + 1];
        for d in 1..=SIEVE_LIMIT {
            for m in (d..=SIEVE_LIMIT).step_by(d) {
                s[m] += d as u64;
            }
        }
        s
    })
}

/// Divisor sum `sigma(n)`; `n = 0` yields 0.
pub fn divisor_sigma(n: u64) -> u64 {
    if (n as usize) <= SIEVE_LIMIT {
        return divisor_sieve()[n as usize];
    }
    let mut total = 0;
    let mut d = 1;
    while d * d <= n {
        if n % d == 0 {
            total += d;
            if d * d != n {
                total += n / d;
            }
        }
        d += 1;
    }
    total
}

const QSERIES_CAP: usize = 5000;
const QSERIES_TAIL: f64 = 1e-18;

/// Truncation of the divisor q-series at nome `q = exp(-2 pi rho)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QSeriesContext {
    pub q: f64,
    pub n_terms: usize,
}

impl QSeriesContext {
    pub fn new(rho: f64) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive, got {rho}")));
        }
        let q = (-2.0 * PI * rho).exp();
        let mut ctx = QSeriesContext { q, n_terms: 1 };
        while ctx.n_terms < QSERIES_CAP && ctx.tail_bound() > QSERIES_TAIL {
            ctx.n_terms += 1;
        }
        Ok(ctx)
    }

    /// Bound on `sum_{n > n_terms} sigma(n) q^n`, from `sigma(n) <= n^2`:
    /// `sum_{n >= m} n^2 q^n <= m^2 q^m (1 + q) / (1 - q)^3`.
    pub fn tail_bound(&self) -> f64 {
        let m = (self.n_terms + 1) as f64;
        let q = self.q;
        m * m * q.powf(m) * (1.0 + q) / (1.0 - q).powi(3)
    }

    /// `sum_{n=1}^{n_terms} sigma(n) q^n / n^p`, added from the smallest term up.
    pub fn divisor_sum(&self, p: i32) -> f64 {
        let mut terms = Vec::with_capacity(self.n_terms);
        let mut qn = 1.0;
        for n in 1..=self.n_terms {
            qn *= self.q;
            terms.push(divisor_sigma(n as u64) as f64 * qn / (n as f64).powi(p));
        }
        terms.iter().rev().sum()
    }
}

/// `E2(i rho) = 1 - 24 sum sigma(n) q^n`.
pub fn eisenstein_e2(rho: f64) -> Result<f64> {
    let ctx = QSeriesContext::new(rho)?;
    Ok(1.0 - 24.0 * ctx.divisor_sum(0))
}

/// `log (q; q)_inf = sum_j log(1 - q^j)`.
pub fn log_q_pochhammer(rho: f64) -> Result<f64> {
    let ctx = QSeriesContext::new(rho)?;
    let mut terms = Vec::with_capacity(ctx.n_terms);
    let mut qj = 1.0;
    for _ in 0..ctx.n_terms {
        qj *= ctx.q;
        terms.push((-qj).ln_1p());
    }
    Ok(terms.iter().rev().sum())
}

/// `log (q; q)_inf` through `-sum sigma(n) q^n / n`.
pub fn log_q_pochhammer_divisor(rho: f64) -> Result<f64> {
    let ctx = QSeriesContext::new(rho)?;
    Ok(-ctx.divisor_sum(1))
}

/// `log eta(i rho) = -pi rho / 12 + log (q; q)_inf`.
pub fn log_dedekind_eta(rho: f64) -> Result<f64> {
    Ok(-PI * rho / 12.0 + log_q_pochhammer(rho)?)
}

/// Catalan's constant.
pub fn catalan_constant() -> f64 {
    // G = pi/8 ln(2 + sqrt 3) + 3/8 sum_k 1 / ((2k+1)^2 C(2k, k))
    let mut sum = 0.0;
    let mut central = 1.0;
    for k in 0..40u32 {
        if k > 0 {
            let kf = k as f64;
            central *= (2.0 * kf - 1.0) * (2.0 * kf) / (kf * kf);
        }
        let odd = (2 * k + 1) as f64;
        sum += 1.0 / (odd * odd * central);
    }
    PI / 8.0 * (2.0 + 3f64.sqrt()).ln() + 0.375 * sum
}

const HURWITZ_TERMS: usize = 12;

/// `d/ds zeta(s, a)` at `s = -1` for `0 < a <= 1`.
pub fn hurwitz_zeta_sderiv_neg1(a: f64) -> Result<f64> {
    hurwitz_zeta_sderiv_neg1_with(a, HURWITZ_TERMS)
}

/// Euler–Maclaurin evaluation with `k_terms` explicit terms before the tail.
pub fn hurwitz_zeta_sderiv_neg1_with(a: f64, k_terms: usize) -> Result<f64> {
    if !(a > 0.0 && a <= 1.0) {
        return Err(Error::InvalidArgument(format!("Hurwitz parameter a={a} outside (0, 1]")));
    }
    let mut sum = 0.0;
    for k in 0..k_terms {
        let v = k as f64 + a;
        sum -= v * v.ln();
    }
    let n = k_terms as f64 + a;
    let l = n.ln();
    sum += 0.5 * n * n * l - 0.25 * n * n - 0.5 * n * l + (1.0 + l) / 12.0;
    // Remaining Bernoulli terms: B_2j/(2j)! * (-(2j-3)!) * N^(2-2j), j = 2..8.
    let mut last = 0.0;
    let mut fact_ratio = 1.0 / 24.0; // (2j-3)! / (2j)! at j = 2
    let mut npow = 1.0 / (n * n);
    for j in 2..=8usize {
        if j > 2 {
            let jf = j as f64;
            fact_ratio *= (2.0 * jf - 4.0) * (2.0 * jf - 3.0) / ((2.0 * jf - 1.0) * (2.0 * jf));
            npow /= n * n;
        }
        last = -BERNOULLI_EVEN[j - 1] * fact_ratio * npow;
        sum += last;
    }
    if last.abs() > 1e-13 {
        return Err(Error::no_convergence(
            "Hurwitz zeta tail",
            format!("last Euler-Maclaurin correction {last:e} with {k_terms} terms"),
        ));
    }
    Ok(sum)
}

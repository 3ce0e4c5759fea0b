//! The strip residual partition function `Sigma(x, rho)`: balanced-subset
//! series and truncated determinant, with `Psi = -log(Sigma) / rho` and the
//! strip force `psi = d/drho log Sigma`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::weights::{spectrum, Spectrum};

/// Smallest aspect ratio at which the series and determinant are used directly.
pub const MIN_DIRECT_RHO: f64 = 0.5;

/// One term `a_s exp(-rho Gamma_s)` of the series.
#[derive(Debug, Clone, PartialEq)]
pub struct SubsetTerm {
    /// Increasing indices.
    pub s: Vec<usize>,
    /// `n` with `sum (mu - 1/2) = 2n`.
    pub order: usize,
    pub a: f64,
    pub gamma_sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SigmaRoute {
    Series,
    Determinant,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SigmaResult {
    pub value: f64,
    /// Series order, or number of modes for the determinant.
    pub order: usize,
    pub route: SigmaRoute,
    /// Rough size of the neglected terms.
    pub error_bound: f64,
}

/// Strict partitions of `total` into `k` distinct parts `>= 1`, each `<= cap`,
/// parts in increasing order.
fn distinct_parts(total: usize, k: usize, min: usize, cap: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if k == 0 {
        if total == 0 {
            out.push(prefix.clone());
        }
        return;
    }
    // Smallest possible sum of k distinct parts starting at `min`.
    let least = k * min + k * (k - 1) / 2;
    if total < least {
        return;
    }
    let mut p = min;
    while p <= cap && k * p + k * (k - 1) / 2 <= total {
        prefix.push(p);
        distinct_parts(total - p, k - 1, p + 1, cap, prefix, out);
        prefix.pop();
        p += 1;
    }
}

/// Balanced subsets of order `n` whose indices do not exceed `max_index`.
///
/// Odd indices `2i - 1` and even indices `2j` pair up as Frobenius
/// coordinates: `n = sum (i - 1/2) + sum (j - 1/2)`.
pub fn enumerate_sets_within(n: usize, max_index: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let max_i = (max_index + 1) / 2;
    let max_j = max_index / 2;
    let mut k = 1;
    while k * k <= n {
        let target = n + k;
        let min_sum = k * (k + 1) / 2;
        for sum_i in min_sum..=target.saturating_sub(min_sum) {
            let mut odd = Vec::new();
            distinct_parts(sum_i, k, 1, max_i, &mut Vec::new(), &mut odd);
            if odd.is_empty() {
                continue;
            }
            let mut even = Vec::new();
            distinct_parts(target - sum_i, k, 1, max_j, &mut Vec::new(), &mut even);
            for a in &odd {
                for b in &even {
                    let mut s: Vec<usize> = a.iter().map(|i| 2 * i - 1).chain(b.iter().map(|j| 2 * j)).collect();
                    s.sort_unstable();
                    out.push(s);
                }
            }
        }
        k += 1;
    }
    out.sort();
    out
}

/// All balanced subsets of order `n`, lexicographically ordered.
pub fn enumerate_sets(n: usize) -> Result<Vec<Vec<usize>>> {
    if n < 1 {
        return Err(Error::InvalidArgument("series order starts at 1".into()));
    }
    Ok(enumerate_sets_within(n, 2 * n))
}

fn check_balanced(s: &[usize]) -> Result<usize> {
    if s.is_empty() || s.windows(2).any(|w| w[0] >= w[1]) || s[0] == 0 {
        return Err(Error::InvalidArgument(format!(
            "index set must be non-empty, positive and strictly increasing: {s:?}"
        )));
    }
    let odd = s.iter().filter(|&&m| m % 2 == 1).count();
    if 2 * odd != s.len() {
        return Err(Error::InvalidArgument(format!("unbalanced index set {s:?}")));
    }
    // sum (mu - 1/2) = 2n  <=>  sum (2 mu - 1) = 4n
    let twice: usize = s.iter().map(|m| 2 * m - 1).sum();
    Ok(twice / 4)
}

/// `ln a_s`: `a_s = prod_pairs (Phi_mu^2 - Phi_nu^2)^(2 sigma_mu sigma_nu) prod v_mu`.
pub(crate) fn log_amplitude(s: &[usize], spec: &Spectrum) -> f64 {
    let mut log_a = 0.0;
    for (i, &m) in s.iter().enumerate() {
        log_a += spec.log_v[m - 1];
        let zm = &spec.zeros[m - 1];
        for &n in &s[i + 1..] {
            let zn = &spec.zeros[n - 1];
            let e = 2.0 * (zm.sigma * zn.sigma) as f64;
            log_a += e * (zm.phi_sq - zn.phi_sq).abs().ln();
        }
    }
    log_a
}

fn gamma_sum(s: &[usize], spec: &Spectrum) -> f64 {
    s.iter().map(|&m| spec.zeros[m - 1].gamma).sum()
}

/// Amplitude and exponent of one balanced index set.
pub fn amplitude(s: &[usize], x: f64) -> Result<SubsetTerm> {
    let order = check_balanced(s)?;
    let spec = spectrum(x, *s.last().unwrap())?;
    Ok(SubsetTerm {
        s: s.to_vec(),
        order,
        a: log_amplitude(s, &spec).exp(),
        gamma_sum: gamma_sum(s, &spec),
    })
}

fn check_rho(rho: f64) -> Result<()> {
    if !(rho >= MIN_DIRECT_RHO) || !rho.is_finite() {
        return Err(Error::Domain(format!(
            "rho={rho} below {MIN_DIRECT_RHO}; use the exchange symmetry rho -> 1/rho"
        )));
    }
    Ok(())
}

/// Per-order sums `(sum a e^{-rho G}, sum a G e^{-rho G})` for orders `1..=n_max`,
/// restricted to indices `<= max_index`.
fn order_sums(x: f64, rho: f64, n_max: usize, max_index: usize) -> Result<Vec<(f64, f64)>> {
    let spec = spectrum(x, max_index)?;
    (1..=n_max)
        .into_par_iter()
        .map(|n| {
            let mut terms: Vec<(f64, f64)> = enumerate_sets_within(n, max_index)
                .iter()
                .map(|s| {
                    let g = gamma_sum(s, &spec);
                    ((log_amplitude(s, &spec) - rho * g).exp(), g)
                })
                .collect();
            // Smallest Gamma_s last.
            terms.sort_by(|a, b| b.1.total_cmp(&a.1));
            let plain: f64 = terms.iter().map(|t| t.0).sum();
            let weighted: f64 = terms.iter().map(|t| t.0 * t.1).sum();
            Ok((plain, weighted))
        })
        .collect()
}

fn sums_total(sums: &[(f64, f64)]) -> (f64, f64) {
    let mut value = 1.0;
    let mut weighted = 0.0;
    for &(p, w) in sums {
        value += p;
        weighted += w;
    }
    (value, weighted)
}

fn series_error_bound(sums: &[(f64, f64)], rho: f64) -> f64 {
    match sums {
        [] => 0.0,
        [only] => only.0.abs() * (-2.0 * std::f64::consts::PI * rho).exp(),
        [.., prev, last] => {
            if prev.0 == 0.0 {
                last.0.abs()
            } else {
                last.0.abs() * (last.0 / prev.0).abs()
            }
        }
    }
}

/// `Sigma^(N) = 1 + sum_{n <= N} sum_{s in S_n} a_s exp(-rho Gamma_s)`.
pub fn sigma_series(x: f64, rho: f64, order: usize) -> Result<SigmaResult> {
    check_rho(rho)?;
    if order < 1 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    let sums = order_sums(x, rho, order, 2 * order)?;
    Ok(SigmaResult {
        value: sums_total(&sums).0,
        order,
        route: SigmaRoute::Series,
        error_bound: series_error_bound(&sums, rho),
    })
}

/// Series restricted to index sets inside `{1, ..., max_index}` (all orders).
pub fn sigma_series_within(x: f64, rho: f64, max_index: usize) -> Result<f64> {
    check_rho(rho)?;
    if max_index < 2 {
        return Ok(1.0);
    }
    let half = max_index / 2;
    let top = (max_index + 1) / 2;
    // Largest order: all odd indices together with all even indices.
    let n_max = (top * top + half * half) / 2 + 1;
    let sums = order_sums(x, rho, n_max, max_index)?;
    Ok(sums_total(&sums).0)
}

/// Determinant of a dense square matrix by LU factorisation with partial pivoting.
pub(crate) fn determinant(mut m: Vec<Vec<f64>>) -> f64 {
    let n = m.len();
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs())).unwrap();
        if m[pivot][col] == 0.0 {
            return 0.0;
        }
        if pivot != col {
            m.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col];
        det *= p;
        for row in col + 1..n {
            let f = m[row][col] / p;
            if f != 0.0 {
                for k in col..n {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    det
}

/// `Sigma = det(1 + Y)` with
/// `Y = -e^{-rho Gamma_e} V_e T_eo e^{-rho Gamma_o} V_o T_oe`, `T_mn = 1/(Phi_n^2 - Phi_m^2)`,
/// truncated to the first `modes` odd and even indices.
pub fn sigma_det(x: f64, rho: f64, modes: usize) -> Result<SigmaResult> {
    check_rho(rho)?;
    if modes < 1 {
        return Err(Error::InvalidArgument("modes must be at least 1".into()));
    }
    let spec = spectrum(x, 2 * modes)?;
    let odd: Vec<usize> = (0..modes).map(|k| 2 * k).collect();
    let even: Vec<usize> = (0..modes).map(|k| 2 * k + 1).collect();
    let weight = |i: usize| (spec.log_v[i] - rho * spec.zeros[i].gamma).exp();
    let u = |i: usize| spec.zeros[i].phi_sq;
    // B = e^{-rho G_o} V_o T_oe  (odd rows, even columns)
    let b: Vec<Vec<f64>> = odd
        .iter()
        .map(|&o| even.iter().map(|&e| weight(o) / (u(e) - u(o))).collect())
        .collect();
    let mut m = vec![vec![0.0; modes]; modes];
    for (i, &e) in even.iter().enumerate() {
        let we = weight(e);
        for k in 0..modes {
            let mut acc = 0.0;
            for (j, &o) in odd.iter().enumerate() {
                acc += b[j][k] / (u(o) - u(e));
            }
            m[i][k] = -we * acc;
        }
        m[i][i] += 1.0;
    }
    let value = determinant(m);
    let g_next = spec.zeros[0].gamma + spec.zeros[2 * modes - 1].gamma;
    Ok(SigmaResult {
        value,
        order: modes,
        route: SigmaRoute::Determinant,
        error_bound: (-rho * g_next).exp(),
    })
}

/// Smallest difference two evaluations of `Sigma` can resolve.
pub fn route_roundoff_floor(sigma: f64) -> f64 {
    8.0 * f64::EPSILON * sigma.abs()
}

/// Compares the two routes; errors when they differ by more than
/// `10 e^{-2 pi rho N}` or the roundoff floor, whichever is larger.
pub fn sigma_route_check(x: f64, rho: f64, order: usize) -> Result<f64> {
    let det = sigma_det(x, rho, order)?;
    let series = sigma_series(x, rho, order)?;
    let diff = (det.value - series.value).abs();
    let bound = (10.0 * (-2.0 * std::f64::consts::PI * rho * order as f64).exp())
        .max(route_roundoff_floor(series.value));
    if diff > bound {
        return Err(Error::no_convergence(
            "determinant truncation",
            format!("|det - series| = {diff:e} exceeds {bound:e} at x={x}, rho={rho}, N={order}"),
        ));
    }
    Ok(diff)
}

/// `Psi(x, rho) = -log(Sigma) / rho`.
pub fn psi_potential(x: f64, rho: f64, order: usize) -> Result<f64> {
    let s = sigma_series(x, rho, order)?;
    if !(s.value > 0.0) {
        return Err(Error::no_convergence(
            "strip partition function",
            format!("non-positive Sigma={} at x={x}, rho={rho}", s.value),
        ));
    }
    Ok(-s.value.ln() / rho)
}

/// `psi(x, rho) = d/drho log Sigma = -sum a_s Gamma_s e^{-rho Gamma_s} / Sigma`.
pub fn psi_strip(x: f64, rho: f64, order: usize) -> Result<f64> {
    check_rho(rho)?;
    if order < 1 {
        return Err(Error::InvalidArgument("series order must be at least 1".into()));
    }
    let sums = order_sums(x, rho, order, 2 * order)?;
    let (value, weighted) = sums_total(&sums);
    Ok(-weighted / value)
}

/// `(Sigma, d Sigma / d rho)` from one pass over the series.
pub fn sigma_and_rho_derivative(x: f64, rho: f64, order: usize) -> Result<(f64, f64)> {
    check_rho(rho)?;
    let sums = order_sums(x, rho, order, 2 * order)?;
    let (value, weighted) = sums_total(&sums);
    Ok((value, -weighted))
}

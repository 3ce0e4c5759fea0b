//! One-dimensional quadrature.
//!
//! Global adaptive Gauss–Kronrod (7/15) on finite intervals, truncation of
//! exponentially decaying semi-infinite integrals, and a helper for the
//! `1/sqrt(t^2 - x^2)` endpoint singularity once it has been removed by the
//! substitution `t = sqrt(x^2 + s^2)`.

use crate::error::{Error, Result};

/// Tolerances and limits for the adaptive integrators.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of bisections applied to any initial panel.
    pub max_depth: u32,
    /// Length scale of exponential decay for semi-infinite ranges (default 1).
    pub decay_scale: Option<f64>,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            rel_tol: 1e-12,
            abs_tol: 1e-14,
            max_depth: 60,
            decay_scale: None,
        }
    }
}

impl QuadratureSpec {
    pub fn with_decay(mut self, scale: f64) -> Self {
        self.decay_scale = Some(scale);
        self
    }

    pub fn with_tolerances(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0) || !(self.abs_tol > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "quadrature tolerances must be positive (rel {}, abs {})",
                self.rel_tol, self.abs_tol
            )));
        }
        if self.max_depth < 1 {
            return Err(Error::InvalidArgument("max_depth must be at least 1".into()));
        }
        if let Some(d) = self.decay_scale {
            if !(d > 0.0) || !d.is_finite() {
                return Err(Error::InvalidArgument(format!("decay_scale {d} must be positive")));
            }
        }
        Ok(())
    }
}

// Kronrod abscissae on [0, 1]; odd entries (1, 3, 5) and the centre are Gauss nodes.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    depth: u32,
    /// Error estimate already at the roundoff floor; bisection cannot help.
    saturated: bool,
}

fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, depth: u32) -> Panel {
    let centre = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 7];
    let mut fv2 = [0.0; 7];
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(centre - dx);
        let f2 = f(centre + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for j in 0..7 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let abs_value = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_value;
    let saturated = abs_value > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && error <= floor;
    if saturated {
        error = floor;
    }
    if !value.is_finite() {
        error = f64::INFINITY;
    }
    Panel {
        a,
        b,
        value,
        error,
        depth,
        saturated,
    }
}

/// Adaptive integration over consecutive panels `[p0,p1], [p1,p2], ...`.
///
/// The breakpoints seed the panel list; refinement is global (largest error
/// first) across all of them.
pub fn integrate_points<F: Fn(f64) -> f64>(f: F, points: &[f64], spec: &QuadratureSpec) -> Result<f64> {
    spec.validate()?;
    if points.len() < 2 {
        return Err(Error::InvalidArgument("need at least two breakpoints".into()));
    }
    if points.windows(2).any(|w| !(w[0] <= w[1])) || points.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "breakpoints must be finite and non-decreasing: {points:?}"
        )));
    }
    let mut panels: Vec<Panel> = points
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| gauss_kronrod_15(&f, w[0], w[1], 0))
        .collect();
    if panels.is_empty() {
        return Ok(0.0);
    }
    let max_panels = 400 * points.len() + 4000;
    loop {
        let total: f64 = panels.iter().map(|p| p.value).sum();
        let total_err: f64 = panels.iter().map(|p| p.error).sum();
        if !total.is_finite() {
            let bad = panels.iter().find(|p| !p.value.is_finite()).unwrap();
            return Err(Error::no_convergence(
                "quadrature",
                format!("non-finite integrand on [{}, {}]", bad.a, bad.b),
            ));
        }
        let tol = spec.abs_tol.max(spec.rel_tol * total.abs());
        if total_err <= tol {
            return Ok(total);
        }
        let worst = panels
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.saturated)
            .max_by(|(_, p), (_, q)| p.error.total_cmp(&q.error))
            .map(|(i, _)| i);
        let Some(i) = worst else {
            // Every panel sits at its roundoff floor.
            return Ok(total);
        };
        let p = panels[i];
        if p.depth >= spec.max_depth || panels.len() >= max_panels {
            return Err(Error::no_convergence(
                "quadrature",
                format!(
                    "worst panel [{:e}, {:e}] at depth {} has error {:e} (total {:e} > tol {:e})",
                    p.a, p.b, p.depth, p.error, total_err, tol
                ),
            ));
        }
        let mid = 0.5 * (p.a + p.b);
        if !(mid > p.a && mid < p.b) {
            // Interval exhausted in floating point.
            panels[i].saturated = true;
            continue;
        }
        panels[i] = gauss_kronrod_15(&f, p.a, mid, p.depth + 1);
        panels.push(gauss_kronrod_15(&f, mid, p.b, p.depth + 1));
    }
}

/// Adaptive integral of `f` over `[a, b]`.
pub fn integrate_finite<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, spec: &QuadratureSpec) -> Result<f64> {
    if !(a <= b) {
        return Err(Error::InvalidArgument(format!("integration bounds out of order: {a} > {b}")));
    }
    integrate_points(f, &[a, b], spec)
}

fn truncation_point<F: Fn(f64) -> f64>(f: &F, a: f64, spec: &QuadratureSpec) -> f64 {
    let scale = spec.decay_scale.unwrap_or(1.0);
    let range = [0.01, 0.1, 0.5, 1.0, 2.0]
        .iter()
        .map(|k| f(a + k * scale).abs())
        .filter(|v| v.is_finite())
        .fold(1.0_f64, f64::max);
    a + scale * (10.0 * range / spec.abs_tol).ln().max(1.0)
}

/// Integral of an exponentially decaying `f` over `[a, inf)`.
///
/// The range is cut at `T = a + d ln(10 R / abs_tol)` where `d` is the decay
/// scale and `R` an estimate of `|f|` near `a`.
pub fn integrate_semi_infinite<F: Fn(f64) -> f64>(f: F, a: f64, spec: &QuadratureSpec) -> Result<f64> {
    integrate_semi_infinite_split(f, &[a], spec)
}

/// As [`integrate_semi_infinite`], seeded with interior breakpoints.
///
/// `points[0]` is the lower limit; breakpoints beyond the truncation point
/// are dropped.
pub fn integrate_semi_infinite_split<F: Fn(f64) -> f64>(
    f: F,
    points: &[f64],
    spec: &QuadratureSpec,
) -> Result<f64> {
    spec.validate()?;
    let Some(&a) = points.first() else {
        return Err(Error::InvalidArgument("missing lower limit".into()));
    };
    let end = truncation_point(&f, a, spec);
    let scale = spec.decay_scale.unwrap_or(1.0);
    let mut pts: Vec<f64> = points.iter().copied().filter(|&p| p < end).collect();
    let mut next = pts.last().copied().unwrap_or(a) + scale;
    while next < end {
        pts.push(next);
        next += 4.0 * scale;
    }
    pts.push(end);
    integrate_points(f, &pts, spec)
}

/// Geometric breakpoints resolving a spike of width `width` at the origin.
pub(crate) fn geometric_points(width: f64, upto: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    if width > 0.0 && width.is_finite() {
        let mut p = width * 0.1;
        while p < upto {
            pts.push(p);
            p *= 10.0;
        }
    }
    pts
}

/// Width of the endpoint peak of integrands carrying `1/(t cosh t + x sinh t)`
/// after the substitution `t = sqrt(x^2 + s^2)`.
pub(crate) fn endpoint_peak_width(x_abs: f64) -> f64 {
    x_abs * (2.0 * (-x_abs).exp()).min(1.0)
}

/// Integral over `s` in `(0, inf)` of an integrand already expressed in the
/// substituted variable `s = sqrt(t^2 - x^2)`.
///
/// `x_abs` sets the breakpoints that resolve the narrow peak at `s = 0`.
pub fn integrate_sqrt_singularity<G: Fn(f64) -> f64>(g: G, x_abs: f64, spec: &QuadratureSpec) -> Result<f64> {
    let pts = geometric_points(endpoint_peak_width(x_abs.abs()), 1.0);
    integrate_semi_infinite_split(g, &pts, spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn finite_examples() {
        let spec = QuadratureSpec::default();
        assert!((integrate_finite(|_| 1.0, 0.0, 2.0, &spec).unwrap() - 2.0).abs() < 1e-15);
        assert!((integrate_finite(f64::sin, 0.0, PI, &spec).unwrap() - 2.0).abs() < 1e-13);
        let v = integrate_finite(|w: f64| (-2.0 * w).exp().ln_1p(), 0.0, 40.0, &spec).unwrap();
        // Alternating series sum_k (-1)^(k+1) / (2 k^2).
        let mut oracle = 0.0;
        for k in (1..200_000u64).rev() {
            let kf = k as f64;
            oracle += if k % 2 == 1 { 1.0 } else { -1.0 } / (2.0 * kf * kf);
        }
        assert!((v - PI * PI / 24.0).abs() < 1e-12, "{v}");
        assert!((oracle - PI * PI / 24.0).abs() < 1e-10);
    }

    #[test]
    fn semi_infinite_examples() {
        let spec = QuadratureSpec::default();
        let e = integrate_semi_infinite(|t: f64| (-t).exp(), 0.0, &spec).unwrap();
        assert!((e - 1.0).abs() < 1e-12);
        let s = integrate_semi_infinite(|t: f64| 1.0 / t.cosh(), 0.0, &spec).unwrap();
        assert!((s - PI / 2.0).abs() < 1e-12);
        let g = integrate_semi_infinite(|t: f64| t * (-t * t).exp(), 0.0, &spec.with_decay(0.5)).unwrap();
        assert!((g - 0.5).abs() < 1e-12);
        let h = integrate_sqrt_singularity(|s: f64| (-s).exp(), 0.3, &spec).unwrap();
        assert!((h - 1.0).abs() < 1e-12);
    }

    #[test]
    fn log_endpoint_singularity() {
        let spec = QuadratureSpec::default();
        let v = integrate_finite(|s: f64| s.ln(), 0.0, 1.0, &spec).unwrap();
        assert!((v + 1.0).abs() < 1e-12, "{v}");
    }

    #[test]
    fn depth_exhaustion_is_reported() {
        let spec = QuadratureSpec {
            max_depth: 2,
            ..QuadratureSpec::default()
        };
        let err = integrate_finite(|x: f64| 1.0 / x.abs().sqrt().max(1e-300), -1.0, 1.0, &spec).unwrap_err();
        assert!(err.is_numerical());
        assert!(err.to_string().contains("worst panel"));
    }

    #[test]
    fn deterministic_and_tightening() {
        let loose = QuadratureSpec::default().with_tolerances(1e-6, 1e-8);
        let tight = QuadratureSpec::default().with_tolerances(5e-7, 1e-8);
        let f = |t: f64| (1.0 + t * t).ln() / t.cosh();
        let a = integrate_semi_infinite(f, 0.0, &loose).unwrap();
        let b = integrate_semi_infinite(f, 0.0, &loose).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
        let reference = integrate_semi_infinite(f, 0.0, &QuadratureSpec::default()).unwrap();
        let c = integrate_semi_infinite(f, 0.0, &tight).unwrap();
        assert!((c - reference).abs() <= (a - reference).abs() + 1e-15);
    }

    #[test]
    fn rejects_bad_spec() {
        let spec = QuadratureSpec {
            rel_tol: 0.0,
            ..QuadratureSpec::default()
        };
        assert!(integrate_finite(|x| x, 0.0, 1.0, &spec).is_err());
        assert!(integrate_finite(|x| x, 1.0, 0.0, &QuadratureSpec::default()).is_err());
    }
}

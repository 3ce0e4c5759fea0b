use casimir_rect::quad::{integrate_finite, QuadratureSpec};
use casimir_rect::roots::{eval_char_poly, find_zero, zero_series_approx, DEFAULT_ROOT_TOL};
use casimir_rect::sigma::{route_roundoff_floor, sigma_det, sigma_series};
use casimir_rect::specialfn::{dilog, divisor_sigma, eisenstein_e2, log_q_pochhammer_divisor, QSeriesContext};
use casimir_rect::strip::{theta_oo, vartheta_oo};
use casimir_rect::weights::{oracle_weight, spectrum, weight_v, weight_v_special_xneg1};
use proptest::prelude::*;
use std::f64::consts::PI;

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn zeros_solve_the_polynomial(mu in 1usize..=50, x in -10.0f64..10.0) {
        let z = find_zero(mu, x, DEFAULT_ROOT_TOL).unwrap();
        prop_assert!(eval_char_poly(z.phi_sq, x).abs() < 1e-12);
    }

    #[test]
    fn zeros_increase_in_index(mu in 1usize..40, x in -10.0f64..10.0) {
        let a = find_zero(mu, x, DEFAULT_ROOT_TOL).unwrap();
        let b = find_zero(mu + 1, x, DEFAULT_ROOT_TOL).unwrap();
        prop_assert!(b.phi_sq > a.phi_sq);
    }

    #[test]
    fn zeros_increase_with_x(mu in 1usize..20, x in -10.0f64..9.9, dx in 0.01f64..0.1) {
        let a = find_zero(mu, x, DEFAULT_ROOT_TOL).unwrap();
        let b = find_zero(mu, x + dx, DEFAULT_ROOT_TOL).unwrap();
        prop_assert!(b.phi_sq > a.phi_sq);
    }

    #[test]
    fn series_zero_for_high_modes(mu in 20usize..60, x in -4.0f64..4.0) {
        let z = find_zero(mu, x, DEFAULT_ROOT_TOL).unwrap();
        prop_assert!((zero_series_approx(mu, x, 4).sqrt() - z.phi_abs()).abs() < 1e-10);
    }

    #[test]
    fn dilog_duplication(z in -1.0f64..=1.0) {
        let lhs = dilog(z) + dilog(-z);
        prop_assert!((lhs - 0.5 * dilog(z * z)).abs() < 1e-13);
    }

    #[test]
    fn divisor_sum_multiplicative(a in 1u64..100, b in 1u64..100) {
        prop_assume!(gcd(a, b) == 1);
        prop_assert_eq!(divisor_sigma(a * b), divisor_sigma(a) * divisor_sigma(b));
    }

    #[test]
    fn quadrature_is_deterministic(a in 0.1f64..3.0) {
        let spec = QuadratureSpec::default();
        let f = |t: f64| (a * t).sin() / (1.0 + t * t);
        let first = integrate_finite(f, 0.0, 5.0, &spec).unwrap();
        let second = integrate_finite(f, 0.0, 5.0, &spec).unwrap();
        prop_assert_eq!(first.to_bits(), second.to_bits());
    }

    #[test]
    fn critical_force_q_series(rho in 0.3f64..3.0) {
        // -(pi/2) sum sigma(n) q^n and (pi/48)(E2 - 1) are both psi(0, rho).
        let ctx = QSeriesContext::new(rho).unwrap();
        let lhs = -PI / 2.0 * ctx.divisor_sum(0);
        let rhs = PI / 48.0 * (eisenstein_e2(rho).unwrap() - 1.0);
        prop_assert!((lhs - rhs).abs() < 1e-14);
        prop_assert!(log_q_pochhammer_divisor(rho).unwrap() < 0.0);
    }

    #[test]
    fn strip_functions_are_negative(x in -8.0f64..8.0) {
        let spec = QuadratureSpec::default();
        prop_assert!(theta_oo(x, &spec).unwrap() < 0.0);
        prop_assert!(vartheta_oo(x, &spec).unwrap() < 0.0);
    }
}

#[test]
fn divisor_multiplicative_exhaustive() {
    for a in 1..=100u64 {
        for b in 1..=100u64 {
            if gcd(a, b) == 1 {
                assert_eq!(divisor_sigma(a * b), divisor_sigma(a) * divisor_sigma(b));
            }
        }
    }
}

#[test]
fn first_zero_opens_linearly_at_minus_one() {
    for &eps in &[1e-4, 1e-6] {
        for sign in [1.0, -1.0] {
            let z = find_zero(1, -1.0 + sign * eps, DEFAULT_ROOT_TOL).unwrap();
            assert!((z.phi_sq / (sign * eps) - 3.0).abs() < 10.0 * eps, "{eps} {sign}: {}", z.phi_sq);
        }
    }
}

#[test]
fn strip_decay() {
    let spec = QuadratureSpec::default();
    for &x in &[3.0, 4.0, 6.0, 10.0] {
        assert!(theta_oo(x, &spec).unwrap().abs() <= (-2.0 * x).exp());
    }
}

#[test]
fn first_weight_continuous_through_minus_one() {
    let spec = QuadratureSpec::default();
    let v = weight_v_special_xneg1().unwrap().v;
    let mut last = f64::INFINITY;
    for &eps in &[1e-2, 1e-3, 1e-4, 1e-5] {
        let dev = (weight_v(1, -1.0 - eps, &spec).unwrap().v - v)
            .abs()
            .max((weight_v(1, -1.0 + eps, &spec).unwrap().v - v).abs());
        assert!(dev < last);
        last = dev;
    }
    assert!(last < 1e-3);
}

#[test]
fn weight_products_match_regularized_products() {
    // Products across parities are free of the normalisation of the oracle.
    let spec = QuadratureSpec::default();
    for &x in &[-1.0, 0.0, 1.0] {
        let pairs: &[(usize, usize)] = if x == -1.0 { &[(3, 2), (3, 4), (5, 2)] } else { &[(1, 2), (3, 2), (1, 4)] };
        for &(m, n) in pairs {
            let contour = weight_v(m, x, &spec).unwrap().v * weight_v(n, x, &spec).unwrap().v;
            let oracle = oracle_weight(m, x, 800).unwrap().v * oracle_weight(n, x, 800).unwrap().v;
            assert!((contour / oracle - 1.0).abs() < 1e-5, "x={x} ({m},{n}): {contour} vs {oracle}");
        }
    }
}

#[test]
fn determinant_and_series_agree() {
    for &x in &[-2.0, -1.0, 0.0, 1.0, 2.0] {
        for &rho in &[0.7, 1.0, 2.0] {
            for m in [4, 6, 8] {
                let det = sigma_det(x, rho, m).unwrap().value;
                let ser = sigma_series(x, rho, m).unwrap().value;
                let bound = (10.0 * (-2.0 * PI * rho * m as f64).exp()).max(route_roundoff_floor(ser));
                assert!((det - ser).abs() < bound, "x={x} rho={rho} m={m}: {}", (det - ser).abs());
            }
        }
    }
}

#[test]
fn spectrum_is_consistent_with_direct_weights() {
    let spec = QuadratureSpec::default();
    let s = spectrum(1.7, 6).unwrap();
    for mu in 1..=6 {
        let v = weight_v(mu, 1.7, &spec).unwrap().v;
        assert!((s.log_v[mu - 1] - v.ln()).abs() < 1e-14);
    }
}

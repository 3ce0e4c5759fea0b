//! Near-critical expansions of the isotropic corner and surface free energies.

use std::f64::consts::{LN_2, PI};

use crate::casimir::Z_CRITICAL;
use crate::error::{Error, Result};
use crate::specialfn::{catalan_constant, hurwitz_zeta_sderiv_neg1};

/// Coefficient of `log|tau|` in the corner free energy; also the strength of
/// the `-log|x|` divergence of the surface-corner Casimir part.
pub const CORNER_LOG_COEFF: f64 = 0.125;

/// Size of the `sign(tau)` jump term of the corner free energy, `3/4 log 2`.
pub const CORNER_JUMP: f64 = 0.75 * LN_2;

/// An expansion evaluated at `tau = 1 - z / z_c`, split into labeled terms.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpansionResult {
    pub tau: f64,
    pub value: f64,
    pub terms: Vec<(&'static str, f64)>,
}

impl ExpansionResult {
    fn from_terms(tau: f64, terms: Vec<(&'static str, f64)>) -> Self {
        let value = terms.iter().map(|t| t.1).sum();
        ExpansionResult { tau, value, terms }
    }

    /// Value of the term with the given label.
    pub fn term(&self, label: &str) -> Option<f64> {
        self.terms.iter().find(|t| t.0 == label).map(|t| t.1)
    }
}

/// `f_c(tau) = 1/8 log|tau| - 2C/pi + 9/16 log 2 + 3/4 log 2 sign(tau) + O(tau)`.
pub fn corner_free_energy(tau: f64) -> Result<ExpansionResult> {
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
    }
    if tau == 0.0 {
        return Err(Error::Domain("corner free energy diverges logarithmically at tau = 0".into()));
    }
    Ok(ExpansionResult::from_terms(
        tau,
        vec![
            ("log", CORNER_LOG_COEFF * tau.abs().ln()),
            ("constant", -2.0 * catalan_constant() / PI + 9.0 / 16.0 * LN_2),
            ("jump", CORNER_JUMP * tau.signum()),
        ],
    ))
}

/// `f_s(0) = -3/4 log z_c - 2 [z'(1/8) + z'(3/8) - z'(5/8) - z'(7/8)]`, with
/// `z'(a)` the `s`-derivative of the Hurwitz zeta function at `s = -1`.
pub fn surface_critical_value() -> Result<f64> {
    let bracket = hurwitz_zeta_sderiv_neg1(0.125)? + hurwitz_zeta_sderiv_neg1(0.375)?
        - hurwitz_zeta_sderiv_neg1(0.625)?
        - hurwitz_zeta_sderiv_neg1(0.875)?;
    Ok(-0.75 * Z_CRITICAL.ln() - 2.0 * bracket)
}

/// `f_s(tau) = f_s(0) + |tau|/2 + (1/4 - 3 log 2 / (2 pi) + (log|tau| - 1)/pi) tau + O(tau^2)`.
pub fn surface_free_energy(tau: f64) -> Result<ExpansionResult> {
    if !tau.is_finite() {
        return Err(Error::InvalidArgument(format!("tau must be finite, got {tau}")));
    }
    let linear = if tau == 0.0 {
        0.0
    } else {
        (0.25 - 3.0 * LN_2 / (2.0 * PI) + (tau.abs().ln() - 1.0) / PI) * tau
    };
    Ok(ExpansionResult::from_terms(
        tau,
        vec![
            ("critical", surface_critical_value()?),
            ("cusp", 0.5 * tau.abs()),
            ("linear", linear),
        ],
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corner_expansion() {
        let c = 0.915965594177219015;
        let tau = 1e-3;
        let f = corner_free_energy(tau).unwrap();
        let expected = 0.125 * tau.ln() - 2.0 * c / PI + (9.0 / 16.0 + 0.75) * LN_2;
        assert!((f.value - expected).abs() < 1e-14);
        assert!((f.term("constant").unwrap() - (-2.0 * c / PI + 9.0 / 16.0 * LN_2)).abs() < 1e-12);
        assert!((f.term("constant").unwrap() + 0.1932265).abs() < 1e-7);
        let eps = 1e-9;
        let jump = corner_free_energy(eps).unwrap().value - corner_free_energy(-eps).unwrap().value;
        assert!((jump - 1.5 * LN_2).abs() < 1e-12);
        assert!(matches!(corner_free_energy(0.0), Err(Error::Domain(_))));
    }

    #[test]
    fn surface_constant() {
        let z_term = -0.75 * (std::f64::consts::SQRT_2 - 1.0).ln();
        assert!((z_term - 0.66103).abs() < 1e-5);
        assert!((surface_critical_value().unwrap() - 0.1817314169844).abs() < 1e-12);
        let lower = hurwitz_zeta_sderiv_neg1(0.125).unwrap() + hurwitz_zeta_sderiv_neg1(0.375).unwrap();
        let upper = hurwitz_zeta_sderiv_neg1(0.625).unwrap() + hurwitz_zeta_sderiv_neg1(0.875).unwrap();
        // The bracket is positive: f_s(0) lies below the z_c term.
        assert!(lower > upper);
    }

    #[test]
    fn surface_expansion() {
        let f0 = surface_free_energy(0.0).unwrap();
        assert_eq!(f0.value, surface_critical_value().unwrap());
        let tau = 1e-4;
        let f = surface_free_energy(tau).unwrap();
        assert!((f.term("cusp").unwrap() - 5e-5).abs() < 1e-18);
        let lin = (0.25 - 3.0 * LN_2 / (2.0 * PI) + (tau.ln() - 1.0) / PI) * tau;
        assert!((f.value - f0.value - 5e-5 - lin).abs() < 1e-15);
        for &eps in &[1e-3, 1e-5] {
            let curv = (surface_free_energy(eps).unwrap().value + surface_free_energy(-eps).unwrap().value
                - 2.0 * f0.value)
                / eps;
            assert!((curv - 1.0).abs() < 1e-10, "{eps}: {curv}");
        }
    }
}

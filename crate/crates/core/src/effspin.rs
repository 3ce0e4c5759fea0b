//! Effective spin model of the strip: spins `s_mu in {0, 1}` with pair
//! couplings `K_mu_nu`, moments `Gamma_mu` and field `rho`, restricted to
//! balanced configurations `sum sigma_mu s_mu = 0`.
//!
//! Each balanced configuration has Boltzmann weight `a_s exp(-rho Gamma_s)`,
//! so the partition sum reproduces the truncated series for `Sigma`.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::roots::parity;
use crate::weights::spectrum;

/// Largest number of spins handled by exact enumeration.
pub const MAX_SPINS: usize = 24;

const CHUNK_BITS: usize = 12;

#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveModel {
    pub x: f64,
    pub n_spins: usize,
    /// Symmetric `n x n`, zero diagonal.
    pub couplings: Vec<Vec<f64>>,
    pub moments: Vec<f64>,
    pub parities: Vec<i32>,
}

impl EffectiveModel {
    pub fn coupling(&self, mu: usize, nu: usize) -> f64 {
        self.couplings[mu - 1][nu - 1]
    }

    fn is_balanced(&self, mask: u32) -> bool {
        let mut charge = 0i32;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            charge += self.parities[i];
            m &= m - 1;
        }
        charge == 0
    }

    /// `(sum_{mu<nu} K s s, sum Gamma s)` of one configuration.
    fn energy_terms(&self, mask: u32) -> (f64, f64) {
        let mut pair = 0.0;
        let mut moment = 0.0;
        let mut m = mask;
        while m != 0 {
            let i = m.trailing_zeros() as usize;
            m &= m - 1;
            moment += self.moments[i];
            let mut rest = m;
            while rest != 0 {
                let j = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                pair += self.couplings[i][j];
            }
        }
        (pair, moment)
    }

    /// `(Z, sum Gamma_s w_s)` over balanced configurations, summed over fixed
    /// blocks in parallel and reduced in block order.
    fn sums(&self, rho: f64) -> Result<(f64, f64)> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("rho must be positive and finite, got {rho}")));
        }
        let total = 1u64 << self.n_spins;
        let block = 1u64 << CHUNK_BITS.min(self.n_spins);
        let blocks: Vec<(f64, f64)> = (0..total / block)
            .into_par_iter()
            .map(|b| {
                let (mut z, mut g) = (0.0, 0.0);
                for mask in b * block..(b + 1) * block {
                    let mask = mask as u32;
                    if !self.is_balanced(mask) {
                        continue;
                    }
                    let (pair, moment) = self.energy_terms(mask);
                    let w = (pair - rho * moment).exp();
                    z += w;
                    g += w * moment;
                }
                (z, g)
            })
            .collect();
        Ok(blocks.iter().fold((0.0, 0.0), |acc, b| (acc.0 + b.0, acc.1 + b.1)))
    }
}

/// Couplings `K_mu_nu = -sigma_mu sigma_nu log(v_mu v_nu / (Phi_mu^2 - Phi_nu^2)^2)`
/// and moments `Gamma_mu` for `mu = 1..=n_spins`.
pub fn build_model(x: f64, n_spins: usize) -> Result<EffectiveModel> {
    if n_spins < 2 {
        return Err(Error::InvalidArgument(format!("need at least two spins, got {n_spins}")));
    }
    let spec = spectrum(x, n_spins)?;
    let n = n_spins;
    let mut couplings = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in i + 1..n {
            let (zi, zj) = (&spec.zeros[i], &spec.zeros[j]);
            let ss = (zi.sigma * zj.sigma) as f64;
            let k = -ss * (spec.log_v[i] + spec.log_v[j] - 2.0 * (zi.phi_sq - zj.phi_sq).abs().ln());
            couplings[i][j] = k;
            couplings[j][i] = k;
        }
    }
    Ok(EffectiveModel {
        x,
        n_spins,
        couplings,
        moments: spec.zeros.iter().map(|z| z.gamma).collect(),
        parities: (1..=n).map(parity).collect(),
    })
}

fn check_size(model: &EffectiveModel) -> Result<()> {
    if model.n_spins > MAX_SPINS {
        return Err(Error::InvalidArgument(format!(
            "exact enumeration supports at most {MAX_SPINS} spins, got {}",
            model.n_spins
        )));
    }
    Ok(())
}

/// Partition sum over balanced configurations,
/// `Z = sum exp(sum_{mu<nu} K s_mu s_nu - rho sum Gamma_mu s_mu)`.
pub fn enumerate_partition(model: &EffectiveModel, rho: f64) -> Result<f64> {
    check_size(model)?;
    Ok(model.sums(rho)?.0)
}

/// `M = sum Gamma_mu <s_mu>`, which equals minus the strip force `psi`.
pub fn magnetization(model: &EffectiveModel, rho: f64) -> Result<f64> {
    check_size(model)?;
    let (z, g) = model.sums(rho)?;
    Ok(g / z)
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paired::PairedData;
use crate::rng::RngStream;
use crate::special::std_normal_cdf;

/// Generative parameters of heterogeneous Gaussian pairs:
///
/// `X_i^A ~ N(nu_i, rho_i mu_i^2)`,
/// `X_i^B ~ N(nu_i + s delta mu_i, (1 - rho_i) mu_i^2)`,
///
/// so that `Y_i = X_i^B - X_i^A ~ N(s delta mu_i, mu_i^2)` whatever `nu` and `rho`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NuisanceSpec {
    pub nu: Vec<f64>,
    pub mu: Vec<f64>,
    pub rho: Vec<f64>,
    pub delta: f64,
    /// Direction of the shift, `+1` or `-1`.
    pub s_delta: i8,
}

impl NuisanceSpec {
    pub fn new(nu: Vec<f64>, mu: Vec<f64>, rho: Vec<f64>, delta: f64, s_delta: i8) -> Result<Self> {
        let spec = Self {
            nu,
            mu,
            rho,
            delta,
            s_delta,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `nu = 0`, `rho = 1/2`, positive shift.
    pub fn with_scales(mu: Vec<f64>, delta: f64) -> Result<Self> {
        let n = mu.len();
        Self::new(vec![0.0; n], mu, vec![0.5; n], delta, 1)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.mu.len();
        if n == 0 {
            return Err(Error::domain("a nuisance spec needs at least one pair"));
        }
        if self.nu.len() != n || self.rho.len() != n {
            return Err(Error::domain(format!(
                "nu, mu, rho lengths differ ({}, {}, {})",
                self.nu.len(),
                n,
                self.rho.len()
            )));
        }
        if let Some(m) = self.mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return Err(Error::domain(format!("mu entries must be positive, got {m}")));
        }
        if let Some(r) = self.rho.iter().find(|r| !(0.0..=1.0).contains(*r)) {
            return Err(Error::domain(format!("rho entries must lie in [0, 1], got {r}")));
        }
        if let Some(v) = self.nu.iter().find(|v| !v.is_finite()) {
            return Err(Error::domain(format!("nu entries must be finite, got {v}")));
        }
        if !self.delta.is_finite() {
            return Err(Error::domain("delta must be finite"));
        }
        if self.s_delta != 1 && self.s_delta != -1 {
            return Err(Error::domain(format!("s_delta must be +1 or -1, got {}", self.s_delta)));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.mu.len()
    }

    /// Signed standardized shift `s delta`.
    pub fn effective_delta(&self) -> f64 {
        f64::from(self.s_delta) * self.delta
    }

    /// `P(Y_i > 0)`, identical for every pair.
    pub fn theta(&self) -> f64 {
        std_normal_cdf(self.effective_delta())
    }
}

/// One draw of `(X^A, X^B)`. Pair `i` consumes two normals, first for
/// `X_i^A` then for `X_i^B`.
pub fn sample_pairs(spec: &NuisanceSpec, stream: &mut RngStream) -> PairedData {
    let n = spec.n();
    let shift = spec.effective_delta();
    let mut a = Vec::with_capacity(n);
    let mut b = Vec::with_capacity(n);
    for i in 0..n {
        let (nu, mu, rho) = (spec.nu[i], spec.mu[i], spec.rho[i]);
        let za = stream.next_standard_normal();
        let zb = stream.next_standard_normal();
        a.push(nu + rho.sqrt() * mu * za);
        b.push(nu + shift * mu + (1.0 - rho).sqrt() * mu * zb);
    }
    PairedData::from_pairs(a, b).expect("validated spec yields finite draws")
}

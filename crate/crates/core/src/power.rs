//! Power of the paired tests: exact sign-test power under binomial and
//! Poisson-binomial laws, the large-sample formulas for the sign and
//! paired t tests, and the additive near-optimality bound of the
//! two-sided sign test.
//!
//! Effect sizes follow `Y_i ~ N(delta mu_i, mu_i^2)`, so the tendency of
//! shift is `theta = P(Y_i > 0) = Phi(delta)`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dist::{binomial_pmf, poisson_binomial_pmf};
use crate::error::{check_closed_unit, check_open_unit, Error, Result};
use crate::paired::{Sidedness, SignTest};
use crate::special::{normal_quantile, std_normal_cdf, std_normal_sf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    Asymptotic,
    MonteCarlo,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEstimate {
    pub value: f64,
    pub provenance: Provenance,
    /// Monte Carlo standard error; zero otherwise.
    pub std_error: f64,
    /// Monte Carlo replicate count; zero otherwise.
    pub replicates: u64,
}

impl PowerEstimate {
    pub fn exact(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::Exact,
            std_error: 0.0,
            replicates: 0,
        }
    }

    pub fn asymptotic(value: f64) -> Self {
        Self {
            value,
            provenance: Provenance::Asymptotic,
            std_error: 0.0,
            replicates: 0,
        }
    }
}

/// Standardized shift, tendency of shift and sample size of one design.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectSpec {
    pub delta: f64,
    pub theta: f64,
    pub n: u64,
}

impl EffectSpec {
    pub fn from_delta(n: u64, delta: f64) -> Result<Self> {
        Ok(Self {
            delta,
            theta: theta_from_delta(delta)?,
            n,
        })
    }

    pub fn from_theta(n: u64, theta: f64) -> Result<Self> {
        Ok(Self {
            delta: delta_from_theta(theta)?,
            theta,
            n,
        })
    }
}

/// `theta = Phi(delta)`.
pub fn theta_from_delta(delta: f64) -> Result<f64> {
    if !delta.is_finite() {
        return Err(Error::domain(format!("delta must be finite, got {delta}")));
    }
    Ok(std_normal_cdf(delta))
}

/// `delta = Phi^{-1}(theta)` for `theta` in `(0, 1)`.
pub fn delta_from_theta(theta: f64) -> Result<f64> {
    check_open_unit("theta", theta)?;
    normal_quantile(theta)
}

/// Scale profile of the paired differences.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeterogeneityProfile {
    pub mu: Vec<f64>,
    pub m1: f64,
    /// Population variance of `mu`.
    pub m2: f64,
    pub cv: f64,
}

impl HeterogeneityProfile {
    pub fn new(mu: Vec<f64>) -> Result<Self> {
        validate_scales(&mu)?;
        let (m1n, m2n, top) = normalized_moments(&mu);
        let (m1, m2) = (m1n * top, m2n * top * top);
        Ok(Self {
            cv: m2n / (m1n * m1n),
            mu,
            m1,
            m2,
        })
    }
}

fn validate_scales(mu: &[f64]) -> Result<()> {
    if mu.is_empty() {
        return Err(Error::domain("scale vector must be nonempty"));
    }
    if let Some(bad) = mu.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
        return Err(Error::domain(format!("scales must be positive and finite, got {bad}")));
    }
    Ok(())
}

// Mean and population variance of `mu / max(mu)`, and the maximum, so huge
// spreads cannot overflow the squares.
fn normalized_moments(mu: &[f64]) -> (f64, f64, f64) {
    let n = mu.len() as f64;
    let top = mu.iter().fold(0.0f64, |a, &b| a.max(b));
    let m1 = mu.iter().map(|m| m / top).sum::<f64>() / n;
    let m2 = mu.iter().map(|m| (m / top - m1).powi(2)).sum::<f64>() / n;
    (m1, m2, top)
}

/// `c_v = m2 / m1^2` with `m1` the mean and `m2` the population variance.
pub fn coefficient_of_variation(mu: &[f64]) -> Result<f64> {
    validate_scales(mu)?;
    let (m1, m2, _) = normalized_moments(mu);
    Ok(m2 / (m1 * m1))
}

/// `pi/2 - 1`: above this `c_v` the sign test has the larger asymptotic power.
pub fn cv_crossing_threshold() -> f64 {
    PI / 2.0 - 1.0
}

/// Which tails the large-sample formulas include.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailMode {
    /// `Q(z_{alpha/2} - s)`, the printed formula; the lower rejection tail is neglected.
    #[default]
    UpperOnly,
    /// Adds `Phi(-z_{alpha/2} - s)` for comparisons against exact two-sided power.
    BothTails,
}

fn asymptotic(shift: f64, alpha: f64, tails: TailMode) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    let z = normal_quantile(1.0 - alpha / 2.0)?;
    let upper = std_normal_sf(z - shift);
    Ok(match tails {
        TailMode::UpperOnly => upper,
        TailMode::BothTails => (upper + std_normal_cdf(-z - shift)).min(1.0),
    })
}

/// `Q(z_{alpha/2} - sqrt(2/pi) sqrt(n) delta)`.
pub fn asymptotic_power_sign(n: u64, delta: f64, alpha: f64) -> Result<PowerEstimate> {
    asymptotic_power_sign_with(n, delta, alpha, TailMode::UpperOnly)
}

pub fn asymptotic_power_sign_with(n: u64, delta: f64, alpha: f64, tails: TailMode) -> Result<PowerEstimate> {
    check_n(n)?;
    let shift = (2.0 / PI).sqrt() * (n as f64).sqrt() * delta;
    Ok(PowerEstimate::asymptotic(asymptotic(shift, alpha, tails)?))
}

/// `Q(z_{alpha/2} - sqrt(n) delta / sqrt(1 + c_v))`.
pub fn asymptotic_power_paired_t(n: u64, delta: f64, alpha: f64, cv: f64) -> Result<PowerEstimate> {
    asymptotic_power_paired_t_with(n, delta, alpha, cv, TailMode::UpperOnly)
}

pub fn asymptotic_power_paired_t_with(
    n: u64,
    delta: f64,
    alpha: f64,
    cv: f64,
    tails: TailMode,
) -> Result<PowerEstimate> {
    check_n(n)?;
    if !cv.is_finite() || cv < 0.0 {
        return Err(Error::domain(format!("c_v must be finite and nonnegative, got {cv}")));
    }
    let shift = (n as f64).sqrt() * delta / (1.0 + cv).sqrt();
    Ok(PowerEstimate::asymptotic(asymptotic(shift, alpha, tails)?))
}

fn check_n(n: u64) -> Result<()> {
    if n == 0 {
        Err(Error::domain("n must be at least 1"))
    } else {
        Ok(())
    }
}

/// Exact power of the randomized sign test when `W ~ Bin(n, theta)`.
pub fn exact_power_sign(n: u64, theta: f64, alpha: f64, sided: Sidedness) -> Result<PowerEstimate> {
    check_closed_unit("theta", theta)?;
    let test = SignTest::new(n, alpha, sided)?;
    let law = binomial_pmf(n, theta)?;
    Ok(PowerEstimate::exact(test.rejection_rate(&law)))
}

/// Exact power when pair `i` has its own tendency `theta_i`.
pub fn exact_power_sign_hetero(thetas: &[f64], alpha: f64, sided: Sidedness) -> Result<PowerEstimate> {
    let law = poisson_binomial_pmf(thetas)?;
    let test = SignTest::new(thetas.len() as u64, alpha, sided)?;
    Ok(PowerEstimate::exact(test.rejection_rate(&law)))
}

/// `(alpha/2) exp(-n delta^2 / 2)`: how much worst-case power any level-alpha
/// test can gain over the two-sided sign test.
pub fn near_optimality_bound(n: u64, delta: f64, alpha: f64) -> Result<f64> {
    check_open_unit("alpha", alpha)?;
    if !delta.is_finite() {
        return Err(Error::domain(format!("delta must be finite, got {delta}")));
    }
    Ok(alpha / 2.0 * (-(n as f64) * delta * delta / 2.0).exp())
}

//! Exact discrete laws for the number of positive signs.

use serde::{Deserialize, Serialize};

use crate::error::{check_closed_unit, Error, Result};

/// A probability mass function on the integers `support_min ..
/// support_min + masses.len()`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscretePmf {
    pub support_min: i64,
    pub masses: Vec<f64>,
}

impl DiscretePmf {
    /// A point mass at `k`.
    pub fn degenerate(k: i64) -> Self {
        Self {
            support_min: k,
            masses: vec![1.0],
        }
    }

    pub fn support_max(&self) -> i64 {
        self.support_min + self.masses.len() as i64 - 1
    }

    /// `P(K = k)`; zero outside the stored support.
    pub fn pmf(&self, k: i64) -> f64 {
        let idx = k - self.support_min;
        if idx < 0 || idx >= self.masses.len() as i64 {
            0.0
        } else {
            self.masses[idx as usize]
        }
    }

    /// `P(K > k)`, summed from the far tail inwards.
    pub fn sf(&self, k: i64) -> f64 {
        let start = (k + 1 - self.support_min).max(0) as usize;
        self.masses.iter().skip(start).rev().sum()
    }

    /// `P(K >= k)`.
    pub fn tail_ge(&self, k: i64) -> f64 {
        self.sf(k - 1)
    }

    /// `P(K <= k)`.
    pub fn cdf(&self, k: i64) -> f64 {
        let end = k - self.support_min + 1;
        if end <= 0 {
            return 0.0;
        }
        let end = (end as usize).min(self.masses.len());
        self.masses[..end].iter().sum()
    }

    pub fn total(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `E[f(K)]`.
    pub fn expect(&self, mut f: impl FnMut(i64) -> f64) -> f64 {
        self.masses
            .iter()
            .enumerate()
            .map(|(i, m)| m * f(self.support_min + i as i64))
            .sum()
    }
}

/// `Bin(n, p)` masses.
///
/// Built by the ratio recurrence `m[k+1] = m[k] (n-k)/(k+1) p/(1-p)`
/// outwards from the mode with the mode mass set to one, then normalized,
/// so nothing overflows for large `n` and the masses sum to one.
pub fn binomial_pmf(n: u64, p: f64) -> Result<DiscretePmf> {
    check_closed_unit("binomial success probability", p)?;
    if n == 0 {
        return Ok(DiscretePmf::degenerate(0));
    }
    let len = n as usize + 1;
    if p == 0.0 || p == 1.0 {
        let mut masses = vec![0.0; len];
        masses[if p == 0.0 { 0 } else { n as usize }] = 1.0;
        return Ok(DiscretePmf { support_min: 0, masses });
    }
    let nf = n as f64;
    let mode = (((nf + 1.0) * p).floor() as usize).min(n as usize);
    let odds = p / (1.0 - p);
    let mut masses = vec![0.0; len];
    masses[mode] = 1.0;
    for k in mode..n as usize {
        let kf = k as f64;
        masses[k + 1] = masses[k] * (nf - kf) / (kf + 1.0) * odds;
    }
    for k in (0..mode).rev() {
        let kf = k as f64;
        // m[k] = m[k+1] (k+1)/(n-k) (1-p)/p
        masses[k] = masses[k + 1] * (kf + 1.0) / (nf - kf) / odds;
    }
    normalize(&mut masses);
    Ok(DiscretePmf { support_min: 0, masses })
}

/// Law of a sum of independent `Bernoulli(theta_i)` variables, by the
/// O(n^2) convolution `m'[k] = m[k](1 - t) + m[k-1] t`.
pub fn poisson_binomial_pmf(thetas: &[f64]) -> Result<DiscretePmf> {
    if thetas.is_empty() {
        return Err(Error::domain("poisson_binomial_pmf requires at least one probability"));
    }
    for &t in thetas {
        check_closed_unit("Bernoulli probability", t)?;
    }
    let mut masses = Vec::with_capacity(thetas.len() + 1);
    masses.push(1.0);
    for &t in thetas {
        masses.push(0.0);
        for k in (1..masses.len()).rev() {
            masses[k] = masses[k] * (1.0 - t) + masses[k - 1] * t;
        }
        masses[0] *= 1.0 - t;
    }
    Ok(DiscretePmf { support_min: 0, masses })
}

fn normalize(masses: &mut [f64]) {
    let total: f64 = masses.iter().sum();
    for m in masses.iter_mut() {
        *m /= total;
    }
}

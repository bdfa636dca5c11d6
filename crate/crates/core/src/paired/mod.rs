//! Paired two-group tests on the differences `Y_i = X_i^B - X_i^A`.
//!
//! All three tests return a [`TestReport`]. The sign test is randomized
//! on its critical boundary so that its size is exactly `alpha`; the
//! report carries the rejection probability, and callers that need a
//! hard decision pass their own uniform draw to [`TestReport::decide`].

mod sign;
mod ttest;
mod wilcoxon;

use std::borrow::Cow;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use sign::{binomial_critical, sign_statistic, sign_test, CriticalPair, SignTest};
pub use ttest::{paired_t_statistic, paired_t_test};
pub(crate) use wilcoxon::signed_rank_report;
pub use wilcoxon::{signed_rank_statistic, wilcoxon_signed_rank, WilcoxonNull, EXACT_WILCOXON_MAX_N};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Sign,
    PairedT,
    Wilcoxon,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Sign, Method::PairedT, Method::Wilcoxon];

    pub fn name(self) -> &'static str {
        match self {
            Method::Sign => "sign",
            Method::PairedT => "paired_t",
            Method::Wilcoxon => "wilcoxon",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sign" => Ok(Method::Sign),
            "ttest" | "paired_t" | "t" => Ok(Method::PairedT),
            "wilcoxon" => Ok(Method::Wilcoxon),
            other => Err(Error::Invalid(format!("unknown test method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sidedness {
    /// `H1: theta > 0.5`.
    OneSidedGreater,
    TwoSided,
}

/// What to do with differences that are exactly zero.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroPolicy {
    #[default]
    Error,
    /// Discard the zero differences and test the remaining pairs.
    Drop,
}

/// Paired observations, stored as their differences.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedData {
    diffs: Vec<f64>,
    raw: Option<(Vec<f64>, Vec<f64>)>,
}

impl PairedData {
    pub fn from_diffs(diffs: Vec<f64>) -> Result<Self> {
        if diffs.is_empty() {
            return Err(Error::domain("paired data must contain at least one pair"));
        }
        if let Some(i) = diffs.iter().position(|d| !d.is_finite()) {
            return Err(Error::domain(format!("non-finite difference at index {i}")));
        }
        Ok(Self { diffs, raw: None })
    }

    /// Keeps the raw vectors and sets `Y = b - a`.
    pub fn from_pairs(a: Vec<f64>, b: Vec<f64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::domain(format!(
                "pair vectors differ in length ({} vs {})",
                a.len(),
                b.len()
            )));
        }
        let diffs = a.iter().zip(&b).map(|(x, y)| y - x).collect();
        let mut data = Self::from_diffs(diffs)?;
        data.raw = Some((a, b));
        Ok(data)
    }

    pub fn diffs(&self) -> &[f64] {
        &self.diffs
    }

    pub fn len(&self) -> usize {
        self.diffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diffs.is_empty()
    }

    /// `(X^A, X^B)` when the data were built from pairs.
    pub fn raw(&self) -> Option<(&[f64], &[f64])> {
        self.raw.as_ref().map(|(a, b)| (a.as_slice(), b.as_slice()))
    }

    /// The differences after applying `policy` to exact zeros.
    pub fn nonzero_diffs(&self, policy: ZeroPolicy) -> Result<Cow<'_, [f64]>> {
        match policy {
            ZeroPolicy::Error => match self.diffs.iter().position(|d| *d == 0.0) {
                Some(index) => Err(Error::ZeroDifference { index }),
                None => Ok(Cow::Borrowed(&self.diffs)),
            },
            ZeroPolicy::Drop => {
                if self.diffs.iter().all(|d| *d != 0.0) {
                    Ok(Cow::Borrowed(&self.diffs))
                } else {
                    Ok(Cow::Owned(self.diffs.iter().copied().filter(|d| *d != 0.0).collect()))
                }
            }
        }
    }
}

/// Outcome of one paired test at a fixed level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub method: Method,
    pub sidedness: Sidedness,
    /// Number of pairs that entered the statistic.
    pub n: usize,
    /// `W` (sign), `T` (paired t) or `U` (Wilcoxon).
    pub statistic: f64,
    /// Upper rejection threshold on the statistic's scale. Two-sided tests
    /// reject symmetrically (`n - c` for the sign test, `-c` otherwise).
    pub critical_value: f64,
    /// Rejection probability on the boundary; zero for non-randomized tests.
    pub randomization_prob: f64,
    pub reject_probability: f64,
    /// Non-randomized tail probability of the observed statistic.
    pub p_value: f64,
}

impl TestReport {
    /// Hard decision from a uniform draw `u` in `[0, 1)`.
    pub fn decide(&self, u: f64) -> bool {
        u < self.reject_probability
    }
}

pub(crate) fn check_alpha(alpha: f64, sided: Sidedness) -> Result<()> {
    let upper = match sided {
        Sidedness::OneSidedGreater => 1.0,
        Sidedness::TwoSided => 0.5,
    };
    if alpha.is_finite() && alpha > 0.0 && alpha < upper {
        Ok(())
    } else {
        Err(Error::domain(format!(
            "alpha must lie in (0, {upper}) for a {sided:?} test, got {alpha}"
        )))
    }
}

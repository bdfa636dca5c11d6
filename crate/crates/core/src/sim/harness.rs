use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::design::MuDesign;
use super::model::{sample_pairs, NuisanceSpec};
use crate::error::{Error, Result};
use crate::paired::{
    check_alpha, paired_t_test, sign_statistic, signed_rank_report, Method, PairedData, Sidedness, SignTest,
    WilcoxonNull, EXACT_WILCOXON_MAX_N,
};
use crate::power::{PowerEstimate, Provenance};
use crate::rng::RngStream;

/// How a replicate's sign test turns into a rejection.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignDecision {
    /// Contribute the exact-size randomized rejection probability.
    #[default]
    Randomized,
    /// Reject when the binomial p-value is at most `alpha`.
    PValue,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub replicates: u64,
    pub seed: u64,
    pub methods: Vec<Method>,
    #[serde(default = "two_sided")]
    pub sidedness: Sidedness,
    #[serde(default)]
    pub sign_decision: SignDecision,
    #[serde(default)]
    pub mu_design: MuDesign,
}

fn two_sided() -> Sidedness {
    Sidedness::TwoSided
}

impl ExperimentConfig {
    /// `n = 20`, `delta = 3 / sqrt(20)`, `alpha = 0.05`, 10,000 replicates,
    /// all three tests, two-sided.
    pub fn standard(seed: u64) -> Self {
        Self {
            n: 20,
            delta: 3.0 / 20f64.sqrt(),
            alpha: 0.05,
            replicates: 10_000,
            seed,
            methods: Method::ALL.to_vec(),
            sidedness: Sidedness::TwoSided,
            sign_decision: SignDecision::Randomized,
            mu_design: MuDesign::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::domain("n must be positive"));
        }
        if self.replicates == 0 {
            return Err(Error::domain("replicates must be at least 1"));
        }
        if !self.delta.is_finite() {
            return Err(Error::domain("delta must be finite"));
        }
        if self.methods.is_empty() {
            return Err(Error::domain("at least one method is required"));
        }
        check_alpha(self.alpha, self.sidedness)?;
        self.mu_design.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodPower {
    pub method: Method,
    pub estimate: PowerEstimate,
}

// Tests prepared once per (n, alpha, sidedness) and reused across replicates.
struct Prepared {
    sign: SignTest,
    wilcoxon: Option<WilcoxonNull>,
}

impl Prepared {
    fn new(config: &ExperimentConfig) -> Result<Self> {
        let n = config.n as u64;
        let wilcoxon = if config.methods.contains(&Method::Wilcoxon) && config.n <= EXACT_WILCOXON_MAX_N {
            Some(WilcoxonNull::exact(config.n)?)
        } else {
            None
        };
        Ok(Self {
            sign: SignTest::new(n, config.alpha, config.sidedness)?,
            wilcoxon,
        })
    }
}

fn reject_weight(method: Method, data: &PairedData, config: &ExperimentConfig, prepared: &Prepared) -> Result<f64> {
    let diffs = data.diffs();
    match method {
        Method::Sign => {
            let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
            let owned;
            let test = if nonzero.len() == diffs.len() {
                &prepared.sign
            } else if nonzero.is_empty() {
                return Ok(0.0);
            } else {
                owned = SignTest::new(nonzero.len() as u64, config.alpha, config.sidedness)?;
                &owned
            };
            let w = sign_statistic(&nonzero);
            Ok(match config.sign_decision {
                SignDecision::Randomized => test.reject_probability(w),
                SignDecision::PValue => f64::from(u8::from(test.p_value(w) <= config.alpha)),
            })
        }
        Method::PairedT => match paired_t_test(data, config.alpha, config.sidedness) {
            Ok(report) => Ok(report.reject_probability),
            Err(Error::Degenerate(_)) => Ok(0.0),
            Err(e) => Err(e),
        },
        Method::Wilcoxon => {
            let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
            if nonzero.is_empty() {
                return Ok(0.0);
            }
            let report = signed_rank_report(&nonzero, config.alpha, config.sidedness, prepared.wilcoxon.as_ref())?;
            Ok(report.reject_probability)
        }
    }
}

/// Per-replicate rejection weights, one row per replicate in replicate
/// order and one column per `config.methods` entry. Replicate `r` draws
/// from stream `(config.seed, r)` and feeds the same pairs to every method.
pub fn replicate_weights(config: &ExperimentConfig, spec: &NuisanceSpec) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    spec.validate()?;
    if spec.n() != config.n {
        return Err(Error::domain(format!(
            "spec has {} pairs but the config asks for n = {}",
            spec.n(),
            config.n
        )));
    }
    let prepared = Prepared::new(config)?;
    (0..config.replicates)
        .into_par_iter()
        .map(|r| {
            let mut stream = RngStream::new(config.seed, r);
            let data = sample_pairs(spec, &mut stream);
            config
                .methods
                .iter()
                .map(|&m| reject_weight(m, &data, config, &prepared))
                .collect::<Result<Vec<f64>>>()
        })
        .collect()
}

/// Monte Carlo power of each configured method: the mean rejection weight
/// over replicates, with standard error `sd / sqrt(replicates)`. Sums run
/// in replicate order so the result does not depend on the thread count.
pub fn mc_power(config: &ExperimentConfig, spec: &NuisanceSpec) -> Result<Vec<MethodPower>> {
    let weights = replicate_weights(config, spec)?;
    Ok(config
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| MethodPower {
            method,
            estimate: summarize(weights.iter().map(|row| row[j]), config.replicates),
        })
        .collect())
}

fn summarize(values: impl Iterator<Item = f64> + Clone, replicates: u64) -> PowerEstimate {
    let r = replicates as f64;
    let mean = values.clone().sum::<f64>() / r;
    let std_error = if replicates > 1 {
        let ss = values.map(|v| (v - mean).powi(2)).sum::<f64>();
        (ss / (r - 1.0)).sqrt() / r.sqrt()
    } else {
        0.0
    };
    PowerEstimate {
        value: mean,
        provenance: Provenance::MonteCarlo,
        std_error,
        replicates,
    }
}

pub fn estimate_for(powers: &[MethodPower], method: Method) -> Option<PowerEstimate> {
    powers.iter().find(|p| p.method == method).map(|p| p.estimate)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::power::exact_power_sign;

    fn small(seed: u64, reps: u64) -> ExperimentConfig {
        ExperimentConfig {
            replicates: reps,
            ..ExperimentConfig::standard(seed)
        }
    }

    #[test]
    fn size_under_null() {
        let config = ExperimentConfig {
            delta: 0.0,
            ..small(11, 10_000)
        };
        let spec = NuisanceSpec::with_scales(vec![1.0; 20], 0.0).unwrap();
        let est = mc_power(&config, &spec).unwrap();
        let sign = estimate_for(&est, Method::Sign).unwrap();
        assert!((sign.value - 0.05).abs() <= 3.0 * sign.std_error, "{sign:?}");
    }

    #[test]
    fn matches_exact_binomial_power() {
        let config = small(5, 10_000);
        let spec = NuisanceSpec::with_scales(vec![1.0; 20], config.delta).unwrap();
        let sign = estimate_for(&mc_power(&config, &spec).unwrap(), Method::Sign).unwrap();
        let exact = exact_power_sign(20, spec.theta(), 0.05, Sidedness::TwoSided)
            .unwrap()
            .value;
        assert!(
            (sign.value - exact).abs() <= 3.0 * sign.std_error,
            "{} vs {exact}",
            sign.value
        );
        assert_eq!(sign.replicates, 10_000);
    }

    #[test]
    fn bitwise_reproducible_across_pools() {
        let config = small(9, 2_000);
        let spec = NuisanceSpec::with_scales([1.0, 10.0].repeat(10), config.delta).unwrap();
        let a = mc_power(&config, &spec).unwrap();
        let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let b = pool.install(|| mc_power(&config, &spec)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pvalue_decision_is_conservative() {
        let spec = NuisanceSpec::with_scales(vec![1.0; 20], 0.0).unwrap();
        let randomized = ExperimentConfig {
            delta: 0.0,
            methods: vec![Method::Sign],
            ..small(3, 500)
        };
        let hard = ExperimentConfig {
            sign_decision: SignDecision::PValue,
            ..randomized.clone()
        };
        let w_r = replicate_weights(&randomized, &spec).unwrap();
        let w_h = replicate_weights(&hard, &spec).unwrap();
        for (r, h) in w_r.iter().zip(&w_h) {
            assert!(h[0] == 0.0 || h[0] == 1.0);
            assert!(h[0] <= r[0]);
        }
    }

    #[test]
    fn config_validation() {
        let spec = NuisanceSpec::with_scales(vec![1.0; 20], 0.1).unwrap();
        assert!(mc_power(&small(1, 0), &spec).is_err());
        let wrong_n = ExperimentConfig { n: 10, ..small(1, 10) };
        assert!(mc_power(&wrong_n, &spec).is_err());
        let no_methods = ExperimentConfig {
            methods: vec![],
            ..small(1, 10)
        };
        assert!(mc_power(&no_methods, &spec).is_err());
        let single = mc_power(&small(1, 1), &spec).unwrap();
        assert_eq!(single[0].estimate.std_error, 0.0);
    }
}

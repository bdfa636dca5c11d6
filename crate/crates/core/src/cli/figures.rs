use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::paired::Method;
use crate::sim::{
    find_crossing, power_curve_vs_cv, power_curve_vs_magnitude, Crossing, ExperimentConfig, InvarianceReport, MuDesign,
    PowerCurve, SignDecision,
};

/// What to sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Sweep {
    /// Target coefficients of variation for `config.mu_design`.
    Cv { values: Vec<f64> },
    /// Overall magnitudes of a two-group profile `{m, ratio m}`.
    Magnitude {
        values: Vec<f64>,
        #[serde(default = "ten")]
        ratio: f64,
        #[serde(default = "half")]
        frac_high: f64,
    },
}

fn ten() -> f64 {
    10.0
}

fn half() -> f64 {
    0.5
}

/// A simulation request: the `--custom` file format.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationPlan {
    pub config: ExperimentConfig,
    pub sweep: Sweep,
    /// Method pair whose crossing is reported, if any.
    #[serde(default)]
    pub crossing: Option<(Method, Method)>,
}

pub const FIGURES: [&str; 3] = ["3a", "3b", "3c"];

// `0, 1/per_unit, ..., last`, each point divided rather than accumulated
// so that 0.3 is the literal 0.3.
fn grid(per_unit: f64, last: f64) -> Vec<f64> {
    let k = (last * per_unit).round() as usize;
    (0..=k).map(|i| i as f64 / per_unit).collect()
}

/// Presets: `n = 20`, `delta = 3/sqrt(20)`, `alpha = 0.05`, two-sided,
/// 10,000 replicates, sign test decided by its p-value.
pub fn figure_plan(name: &str, seed: u64) -> Result<SimulationPlan> {
    let base = ExperimentConfig {
        sign_decision: SignDecision::PValue,
        ..ExperimentConfig::standard(seed)
    };
    match name {
        "3a" => Ok(SimulationPlan {
            config: base,
            sweep: Sweep::Magnitude {
                values: vec![1.0, 10.0, 100.0],
                ratio: 10.0,
                frac_high: 0.5,
            },
            crossing: None,
        }),
        "3b" => Ok(SimulationPlan {
            config: base,
            sweep: Sweep::Cv {
                values: grid(10.0, 1.0),
            },
            crossing: Some((Method::Sign, Method::PairedT)),
        }),
        "3c" => Ok(SimulationPlan {
            config: ExperimentConfig {
                mu_design: MuDesign::multi_group_default(),
                ..base
            },
            sweep: Sweep::Cv { values: grid(4.0, 3.5) },
            crossing: Some((Method::Sign, Method::Wilcoxon)),
        }),
        other => Err(Error::Invalid(format!(
            "unknown figure `{other}`, expected one of {}",
            FIGURES.join(", ")
        ))),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationOutput {
    pub curve: PowerCurve,
    pub crossing: Option<Crossing>,
    pub invariance: Option<InvarianceReport>,
}

pub fn run_plan(plan: &SimulationPlan) -> Result<SimulationOutput> {
    let (curve, invariance) = match &plan.sweep {
        Sweep::Cv { values } => (power_curve_vs_cv(&plan.config, &plan.config.mu_design, values)?, None),
        Sweep::Magnitude {
            values,
            ratio,
            frac_high,
        } => {
            let (c, r) = power_curve_vs_magnitude(&plan.config, values, *ratio, *frac_high)?;
            (c, Some(r))
        }
    };
    let crossing = match plan.crossing {
        Some((a, b)) => find_crossing(&curve, a, b)?,
        None => None,
    };
    Ok(SimulationOutput {
        curve,
        crossing,
        invariance,
    })
}

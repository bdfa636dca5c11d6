//! Monte Carlo power of the paired tests on heterogeneous Gaussian pairs.

mod curve;
mod design;
mod harness;
mod model;

pub use curve::{
    find_crossing, nuisance_invariance_scan, power_curve_vs_cv, power_curve_vs_magnitude, scan_seed, Crossing,
    CurveRow, InvarianceReport, MethodSpread, PowerCurve, SkippedPoint,
};
pub use design::{gen_mu_multi_group, gen_mu_two_group, MuDesign};
pub use harness::{estimate_for, mc_power, replicate_weights, ExperimentConfig, MethodPower, SignDecision};
pub use model::{sample_pairs, NuisanceSpec};

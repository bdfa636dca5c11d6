use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::design::MuDesign;
use super::harness::{mc_power, ExperimentConfig, MethodPower};
use super::model::NuisanceSpec;
use crate::error::{Error, Result};
use crate::paired::Method;
use crate::power::PowerEstimate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub method: Method,
    pub estimates: Vec<PowerEstimate>,
}

/// A grid point the design could not produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SkippedPoint {
    pub x: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCurve {
    /// `cv` or `magnitude`.
    pub x_label: String,
    pub x_values: Vec<f64>,
    pub rows: Vec<CurveRow>,
    #[serde(default)]
    pub skipped: Vec<SkippedPoint>,
}

impl PowerCurve {
    fn empty(x_label: &str, methods: &[Method]) -> Self {
        Self {
            x_label: x_label.to_string(),
            x_values: Vec::new(),
            rows: methods
                .iter()
                .map(|&method| CurveRow {
                    method,
                    estimates: Vec::new(),
                })
                .collect(),
            skipped: Vec::new(),
        }
    }

    fn push(&mut self, x: f64, powers: &[MethodPower]) {
        self.x_values.push(x);
        for (row, p) in self.rows.iter_mut().zip(powers) {
            debug_assert_eq!(row.method, p.method);
            row.estimates.push(p.estimate);
        }
    }

    pub fn row(&self, method: Method) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn powers(&self, method: Method) -> Option<Vec<f64>> {
        self.row(method).map(|r| r.estimates.iter().map(|e| e.value).collect())
    }

    /// Long format: `x, method, power, std_error, replicates`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["x", "method", "power", "std_error", "replicates"])?;
        for row in &self.rows {
            for (x, e) in self.x_values.iter().zip(&row.estimates) {
                w.write_record([
                    x.to_string(),
                    row.method.to_string(),
                    e.value.to_string(),
                    e.std_error.to_string(),
                    e.replicates.to_string(),
                ])?;
            }
        }
        w.flush()
            .map_err(|e| Error::Pipeline(format!("writing curve CSV: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    pub fn save_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }
}

/// Monte Carlo power along a grid of target `c_v`. Every grid point reuses
/// `config.seed`, so neighbouring points share their underlying normals and
/// the curve is smooth in `c_v`. Unreachable targets land in `skipped`.
pub fn power_curve_vs_cv(config: &ExperimentConfig, design: &MuDesign, cv_grid: &[f64]) -> Result<PowerCurve> {
    config.validate()?;
    design.validate()?;
    let mut curve = PowerCurve::empty("cv", &config.methods);
    for &target in cv_grid {
        let mu = match design.solve(config.n, target) {
            Ok(mu) => mu,
            Err(e @ (Error::UnreachableCv { .. } | Error::Domain(_))) => {
                curve.skipped.push(SkippedPoint {
                    x: target,
                    reason: e.to_string(),
                });
                continue;
            }
            Err(e) => return Err(e),
        };
        let spec = NuisanceSpec::with_scales(mu, config.delta)?;
        curve.push(target, &mc_power(config, &spec)?);
    }
    Ok(curve)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    /// Interpolated `x` where `power_a - power_b` changes sign.
    pub at: f64,
    /// Number of sign changes of the gap along the grid.
    pub sign_changes: usize,
}

/// Where row `a` overtakes (or falls below) row `b`. The gap is linearly
/// interpolated across the last sign change; exact zeros are skipped. With
/// noisy rows that cross more than once, `sign_changes` reports how many
/// times. `None` when the gap never changes sign.
pub fn find_crossing(curve: &PowerCurve, a: Method, b: Method) -> Result<Option<Crossing>> {
    let pa = curve
        .powers(a)
        .ok_or_else(|| Error::Invalid(format!("curve has no `{a}` row")))?;
    let pb = curve
        .powers(b)
        .ok_or_else(|| Error::Invalid(format!("curve has no `{b}` row")))?;
    let points: Vec<(f64, f64)> = curve
        .x_values
        .iter()
        .zip(pa.iter().zip(&pb))
        .map(|(&x, (u, v))| (x, u - v))
        .filter(|(_, g)| *g != 0.0)
        .collect();
    let mut changes = 0;
    let mut last = None;
    for w in points.windows(2) {
        let ((x0, g0), (x1, g1)) = (w[0], w[1]);
        if g0.signum() != g1.signum() {
            changes += 1;
            last = Some(x0 + (x1 - x0) * g0 / (g0 - g1));
        }
    }
    Ok(last.map(|at| Crossing {
        at,
        sign_changes: changes,
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSpread {
    pub method: Method,
    /// Largest pairwise difference between the specs' estimates.
    pub max_diff: f64,
    /// Largest pairwise difference in units of the combined standard error.
    pub max_z: f64,
    /// Some pair differs by more than four combined standard errors.
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvarianceReport {
    /// Seed used for each spec.
    pub seeds: Vec<u64>,
    /// Estimates per spec, in spec order.
    pub estimates: Vec<Vec<MethodPower>>,
    pub spreads: Vec<MethodSpread>,
}

impl InvarianceReport {
    pub fn spread(&self, method: Method) -> Option<&MethodSpread> {
        self.spreads.iter().find(|s| s.method == method)
    }
}

/// Seed of the `index`-th spec in a scan: a SplitMix64 step away from the
/// base seed so the specs draw independent streams.
pub fn scan_seed(seed: u64, index: usize) -> u64 {
    let mut z = seed.wrapping_add((index as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Runs [`mc_power`] on each spec with independent streams and measures how
/// far apart the estimates of each method land.
pub fn nuisance_invariance_scan(config: &ExperimentConfig, specs: &[NuisanceSpec]) -> Result<InvarianceReport> {
    if specs.is_empty() {
        return Err(Error::domain("the scan needs at least one spec"));
    }
    if let Some(s) = specs.iter().find(|s| s.n() != config.n || s.delta != specs[0].delta) {
        return Err(Error::domain(format!(
            "specs must share n = {} and delta = {}, found n = {}, delta = {}",
            config.n,
            specs[0].delta,
            s.n(),
            s.delta
        )));
    }
    let seeds: Vec<u64> = (0..specs.len()).map(|i| scan_seed(config.seed, i)).collect();
    let estimates = specs
        .iter()
        .zip(&seeds)
        .map(|(spec, &seed)| {
            let cfg = ExperimentConfig {
                seed,
                delta: spec.delta,
                ..config.clone()
            };
            mc_power(&cfg, spec)
        })
        .collect::<Result<Vec<_>>>()?;
    let spreads = config
        .methods
        .iter()
        .enumerate()
        .map(|(j, &method)| {
            let col: Vec<PowerEstimate> = estimates.iter().map(|e| e[j].estimate).collect();
            let (mut max_diff, mut max_z) = (0.0f64, 0.0f64);
            for (i, a) in col.iter().enumerate() {
                for b in &col[i + 1..] {
                    let d = (a.value - b.value).abs();
                    let se = (a.std_error.powi(2) + b.std_error.powi(2)).sqrt();
                    max_diff = max_diff.max(d);
                    let z = if se > 0.0 {
                        d / se
                    } else if d > 0.0 {
                        f64::INFINITY
                    } else {
                        0.0
                    };
                    max_z = max_z.max(z);
                }
            }
            MethodSpread {
                method,
                max_diff,
                max_z,
                flagged: max_z > 4.0,
            }
        })
        .collect();
    Ok(InvarianceReport {
        seeds,
        estimates,
        spreads,
    })
}

/// Power at several overall magnitudes of one fixed two-group profile:
/// scales `m` and `ratio * m` with a fraction `frac_high` on the high value.
pub fn power_curve_vs_magnitude(
    config: &ExperimentConfig,
    magnitudes: &[f64],
    ratio: f64,
    frac_high: f64,
) -> Result<(PowerCurve, InvarianceReport)> {
    let specs = magnitudes
        .iter()
        .map(|&m| {
            let mu = super::design::gen_mu_two_group(config.n, m, ratio * m, frac_high)?;
            NuisanceSpec::with_scales(mu, config.delta)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = nuisance_invariance_scan(config, &specs)?;
    let mut curve = PowerCurve::empty("magnitude", &config.methods);
    for (&m, est) in magnitudes.iter().zip(&report.estimates) {
        curve.push(m, est);
    }
    Ok((curve, report))
}

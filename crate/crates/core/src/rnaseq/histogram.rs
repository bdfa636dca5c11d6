use std::collections::BTreeMap;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::counts::PairingMap;
use super::normalize::NormalizedMatrix;
use crate::error::{Error, Result};

/// Averaged densities of `ln|x_i - x_j|` over genes, for within-pair and
/// within-group sample comparisons.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramSummary {
    pub bin_edges: Vec<f64>,
    pub within_pair_density: Vec<f64>,
    pub within_group_density: Vec<f64>,
    pub pair_comparisons: usize,
    pub group_comparisons: usize,
    pub warnings: Vec<String>,
}

impl HistogramSummary {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["bin_left", "bin_right", "within_pair_density", "within_group_density"])?;
        for k in 0..self.within_pair_density.len() {
            w.write_record([
                self.bin_edges[k].to_string(),
                self.bin_edges[k + 1].to_string(),
                self.within_pair_density[k].to_string(),
                self.within_group_density[k].to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| Error::Pipeline(format!("writing histogram: {e}")))?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Index of the bin with the largest density (first on ties).
    pub fn mode_bin(density: &[f64]) -> Option<usize> {
        density
            .iter()
            .enumerate()
            .fold(None, |best: Option<(usize, f64)>, (k, &d)| match best {
                Some((_, b)) if b >= d => best,
                _ => Some((k, d)),
            })
            .map(|(k, _)| k)
    }
}

fn log_abs_diffs(values: &NormalizedMatrix, i: usize, j: usize) -> Vec<f64> {
    values
        .values
        .iter()
        .map(|row| (row[i] - row[j]).abs())
        .filter(|d| *d > 0.0)
        .map(f64::ln)
        .collect()
}

fn check_edges(edges: &[f64]) -> Result<()> {
    if edges.len() < 2 {
        return Err(Error::domain("need at least two bin edges"));
    }
    if edges.iter().any(|e| !e.is_finite()) || edges.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("bin edges must be finite and strictly increasing"));
    }
    Ok(())
}

// Bins are [e_k, e_{k+1}) except the last, which is closed. Values outside
// the edges are ignored. `None` when nothing lands in range.
fn density(logs: &[f64], edges: &[f64]) -> Option<Vec<f64>> {
    let bins = edges.len() - 1;
    let (lo, hi) = (edges[0], edges[bins]);
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for &x in logs {
        if x < lo || x > hi {
            continue;
        }
        let k = edges.partition_point(|e| *e <= x).saturating_sub(1).min(bins - 1);
        counts[k] += 1;
        total += 1;
    }
    (total > 0).then(|| {
        counts
            .iter()
            .enumerate()
            .map(|(k, &c)| c as f64 / (total as f64 * (edges[k + 1] - edges[k])))
            .collect()
    })
}

struct Comparison {
    label: String,
    i: usize,
    j: usize,
}

fn comparisons(
    values: &NormalizedMatrix,
    pairing: &PairingMap,
    groups: &BTreeMap<String, String>,
) -> Result<(Vec<Comparison>, Vec<Comparison>)> {
    if pairing.is_empty() {
        return Err(Error::Pipeline("the pairing has no pairs".into()));
    }
    let within_pair: Vec<Comparison> = pairing
        .resolve(&values.sample_ids)?
        .into_iter()
        .zip(&pairing.pairs)
        .map(|((i, j), p)| Comparison {
            label: format!("pair `{}`", p.pair_id),
            i,
            j,
        })
        .collect();
    let index = |s: &str| values.sample_ids.iter().position(|x| x == s);
    let mut members: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (sample, group) in groups {
        let j =
            index(sample).ok_or_else(|| Error::Invalid(format!("group table references unknown sample `{sample}`")))?;
        members.entry(group.as_str()).or_default().push(j);
    }
    if members.is_empty() {
        return Err(Error::Pipeline("the group table is empty".into()));
    }
    let mut within_group = Vec::new();
    for (group, idx) in &members {
        if idx.len() < 2 {
            return Err(Error::Pipeline(format!("group `{group}` has fewer than 2 samples")));
        }
        for (a, &i) in idx.iter().enumerate() {
            for &j in &idx[a + 1..] {
                within_group.push(Comparison {
                    label: format!(
                        "group `{group}` samples `{}` and `{}`",
                        values.sample_ids[i], values.sample_ids[j]
                    ),
                    i,
                    j,
                });
            }
        }
    }
    Ok((within_pair, within_group))
}

fn averaged(
    values: &NormalizedMatrix,
    comps: &[Comparison],
    edges: &[f64],
    warnings: &mut Vec<String>,
) -> (Vec<f64>, usize) {
    let mut sum = vec![0.0; edges.len() - 1];
    let mut used = 0;
    for c in comps {
        let logs = log_abs_diffs(values, c.i, c.j);
        let d = if logs.is_empty() {
            warnings.push(format!("{}: every difference is zero; excluded", c.label));
            continue;
        } else {
            density(&logs, edges)
        };
        match d {
            Some(d) => {
                sum.iter_mut().zip(&d).for_each(|(s, x)| *s += x);
                used += 1;
            }
            None => warnings.push(format!("{}: no log-difference inside the bin range; excluded", c.label)),
        }
    }
    if used > 0 {
        sum.iter_mut().for_each(|s| *s /= used as f64);
    }
    (sum, used)
}

/// Histogram of `ln|x_i - x_j|` over genes for every paired comparison and
/// every same-group pair of samples, averaged within each family. Zero
/// differences are left out; a comparison with nothing left is skipped
/// with a warning.
pub fn heterogeneity_histogram(
    values: &NormalizedMatrix,
    pairing: &PairingMap,
    groups: &BTreeMap<String, String>,
    bin_edges: &[f64],
) -> Result<HistogramSummary> {
    check_edges(bin_edges)?;
    let (pairs, within) = comparisons(values, pairing, groups)?;
    let mut warnings = Vec::new();
    let (within_pair_density, pair_comparisons) = averaged(values, &pairs, bin_edges, &mut warnings);
    let (within_group_density, group_comparisons) = averaged(values, &within, bin_edges, &mut warnings);
    if pair_comparisons == 0 || group_comparisons == 0 {
        return Err(Error::Pipeline(
            "no usable comparison left for one of the two histograms".into(),
        ));
    }
    Ok(HistogramSummary {
        bin_edges: bin_edges.to_vec(),
        within_pair_density,
        within_group_density,
        pair_comparisons,
        group_comparisons,
        warnings,
    })
}

/// `bins` equal-width edges spanning every nonzero log-difference the
/// histogram will see.
pub fn auto_bin_edges(
    values: &NormalizedMatrix,
    pairing: &PairingMap,
    groups: &BTreeMap<String, String>,
    bins: usize,
) -> Result<Vec<f64>> {
    if bins == 0 {
        return Err(Error::domain("bins must be positive"));
    }
    let (pairs, within) = comparisons(values, pairing, groups)?;
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for c in pairs.iter().chain(&within) {
        for x in log_abs_diffs(values, c.i, c.j) {
            lo = lo.min(x);
            hi = hi.max(x);
        }
    }
    if !lo.is_finite() {
        return Err(Error::Pipeline("every compared difference is zero".into()));
    }
    if hi - lo < 1e-12 {
        lo -= 0.5;
        hi += 0.5;
    }
    let width = (hi - lo) / bins as f64;
    let mut edges: Vec<f64> = (0..bins).map(|k| lo + k as f64 * width).collect();
    edges.push(hi);
    Ok(edges)
}

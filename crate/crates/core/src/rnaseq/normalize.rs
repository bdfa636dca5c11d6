use serde::{Deserialize, Serialize};

use super::counts::CountMatrix;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterThresholds {
    /// Minimum row total.
    pub min_total: u64,
    /// Minimum count in every sample.
    pub min_count: u64,
}

impl Default for FilterThresholds {
    fn default() -> Self {
        Self {
            min_total: 50,
            min_count: 2,
        }
    }
}

/// Keeps the genes whose total is at least `min_total` and whose every
/// count is at least `min_count`.
pub fn filter_genes(counts: &CountMatrix, thresholds: FilterThresholds) -> CountMatrix {
    let (gene_ids, rows): (Vec<String>, Vec<Vec<u64>>) = counts
        .gene_ids
        .iter()
        .zip(&counts.counts)
        .filter(|(_, row)| {
            row.iter().sum::<u64>() >= thresholds.min_total && row.iter().all(|c| *c >= thresholds.min_count)
        })
        .map(|(g, row)| (g.clone(), row.clone()))
        .unzip();
    CountMatrix {
        gene_ids,
        sample_ids: counts.sample_ids.clone(),
        counts: rows,
    }
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let k = values.len();
    if k % 2 == 1 {
        values[k / 2]
    } else {
        0.5 * (values[k / 2 - 1] + values[k / 2])
    }
}

/// Median-of-ratios size factors. The reference of gene `g` is the
/// geometric mean of its row over the genes with no zero count; sample
/// `j`'s factor is the median over those genes of `counts[g][j] / ref_g`.
/// Ratios are formed in log space and an even-sized median averages the
/// two middle log-ratios.
pub fn size_factors(counts: &CountMatrix) -> Result<Vec<f64>> {
    let m = counts.n_samples();
    if m == 0 {
        return Err(Error::Pipeline("the count matrix has no samples".into()));
    }
    let logs: Vec<Vec<f64>> = counts
        .counts
        .iter()
        .filter(|row| row.iter().all(|c| *c > 0))
        .map(|row| row.iter().map(|&c| (c as f64).ln()).collect())
        .collect();
    if logs.is_empty() {
        return Err(Error::Pipeline(
            "no gene has positive counts in every sample, so the size-factor reference set is empty; \
             filter genes more strictly (raise --min-count)"
                .into(),
        ));
    }
    let refs: Vec<f64> = logs.iter().map(|row| row.iter().sum::<f64>() / m as f64).collect();
    Ok((0..m)
        .map(|j| {
            let mut ratios: Vec<f64> = logs.iter().zip(&refs).map(|(row, r)| row[j] - r).collect();
            median(&mut ratios).exp()
        })
        .collect())
}

/// Counts divided by their sample's size factor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedMatrix {
    pub gene_ids: Vec<String>,
    pub sample_ids: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

pub fn normalize(counts: &CountMatrix, factors: &[f64]) -> Result<NormalizedMatrix> {
    if factors.len() != counts.n_samples() {
        return Err(Error::domain(format!(
            "{} size factors for {} samples",
            factors.len(),
            counts.n_samples()
        )));
    }
    if let Some(f) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::domain(format!("size factors must be positive, got {f}")));
    }
    Ok(NormalizedMatrix {
        gene_ids: counts.gene_ids.clone(),
        sample_ids: counts.sample_ids.clone(),
        values: counts
            .counts
            .iter()
            .map(|row| row.iter().zip(factors).map(|(&c, s)| c as f64 / s).collect())
            .collect(),
    })
}

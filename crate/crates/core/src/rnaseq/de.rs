use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::counts::PairingMap;
use super::normalize::NormalizedMatrix;
use crate::error::{check_open_unit, Error, Result};
use crate::fdr::{bh_adjust, bh_reject};
use crate::paired::{paired_t_test, wilcoxon_signed_rank, Method, PairedData, Sidedness, SignTest, ZeroPolicy};

/// Map applied to normalized values before differencing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    Identity,
    /// `log2(x + 0.5)`.
    Log2Shifted,
}

impl Transform {
    /// Identity for the sign test, `log2(x + 0.5)` for the others.
    pub fn default_for(method: Method) -> Self {
        match method {
            Method::Sign => Transform::Identity,
            Method::PairedT | Method::Wilcoxon => Transform::Log2Shifted,
        }
    }

    pub fn apply(self, x: f64) -> f64 {
        match self {
            Transform::Identity => x,
            Transform::Log2Shifted => (x + 0.5).log2(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneResult {
    pub gene_id: String,
    pub method: Method,
    /// Pairs that entered the test after dropping zero differences.
    pub n_used: usize,
    pub zeros_dropped: usize,
    pub statistic: Option<f64>,
    pub p_value: Option<f64>,
    pub p_adjusted: Option<f64>,
    pub discovery: bool,
    /// Why the gene could not be tested.
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeReport {
    pub method: Method,
    pub transform: Transform,
    pub fdr: f64,
    pub genes_tested: usize,
    pub genes_failed: usize,
    pub discoveries: usize,
    pub results: Vec<GeneResult>,
}

impl DeReport {
    pub fn discovered(&self) -> impl Iterator<Item = &str> {
        self.results.iter().filter(|r| r.discovery).map(|r| r.gene_id.as_str())
    }

    /// `gene_id,method,statistic,p_value,p_adjusted,discovery`; untested
    /// genes carry `NA`.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let na = |v: Option<f64>| v.map_or_else(|| "NA".to_string(), |x| x.to_string());
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["gene_id", "method", "statistic", "p_value", "p_adjusted", "discovery"])?;
        for r in &self.results {
            w.write_record([
                r.gene_id.clone(),
                r.method.to_string(),
                na(r.statistic),
                na(r.p_value),
                na(r.p_adjusted),
                r.discovery.to_string(),
            ])?;
        }
        w.flush()
            .map_err(|e| Error::Pipeline(format!("writing results: {e}")))?;
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

struct Tested {
    n_used: usize,
    zeros_dropped: usize,
    outcome: std::result::Result<(f64, f64), String>,
}

fn test_gene(diffs: Vec<f64>, method: Method, alpha: f64) -> Tested {
    let total = diffs.len();
    let nonzero: Vec<f64> = diffs.into_iter().filter(|d| *d != 0.0).collect();
    let n_used = nonzero.len();
    let outcome = if nonzero.is_empty() {
        Err("every paired difference is zero".to_string())
    } else {
        let data = PairedData::from_diffs(nonzero).map_err(|e| e.to_string());
        data.and_then(|data| {
            let report = match method {
                Method::Sign => SignTest::new(n_used as u64, alpha, Sidedness::TwoSided)
                    .map(|t| t.report(crate::paired::sign_statistic(data.diffs()))),
                Method::PairedT => paired_t_test(&data, alpha, Sidedness::TwoSided),
                Method::Wilcoxon => wilcoxon_signed_rank(&data, alpha, Sidedness::TwoSided, ZeroPolicy::Drop),
            };
            report.map(|r| (r.statistic, r.p_value)).map_err(|e| e.to_string())
        })
    };
    Tested {
        n_used,
        zeros_dropped: total - n_used,
        outcome,
    }
}

/// Two-sided paired test per gene on `transform(B) - transform(A)`, then
/// BH at level `fdr` over the genes that could be tested. Zero differences
/// are dropped gene by gene; genes left untestable are reported with a note.
pub fn de_test(
    norm: &NormalizedMatrix,
    pairing: &PairingMap,
    method: Method,
    fdr: f64,
    transform: Option<Transform>,
) -> Result<DeReport> {
    check_open_unit("FDR level", fdr)?;
    if pairing.is_empty() {
        return Err(Error::Pipeline("the pairing has no pairs".into()));
    }
    if method == Method::PairedT && pairing.len() < 2 {
        return Err(Error::Pipeline("the paired t-test needs at least 2 pairs".into()));
    }
    let columns = pairing.resolve(&norm.sample_ids)?;
    let transform = transform.unwrap_or(Transform::default_for(method));
    // The level only shapes `reject_probability`, which is unused here.
    let alpha = 0.05;
    let tested: Vec<Tested> = norm
        .values
        .par_iter()
        .map(|row| {
            let diffs = columns
                .iter()
                .map(|&(a, b)| transform.apply(row[b]) - transform.apply(row[a]))
                .collect();
            test_gene(diffs, method, alpha)
        })
        .collect();
    let valid: Vec<usize> = (0..tested.len()).filter(|&g| tested[g].outcome.is_ok()).collect();
    let pvalues: Vec<f64> = valid.iter().map(|&g| tested[g].outcome.as_ref().unwrap().1).collect();
    let rejected = bh_reject(&pvalues, fdr)?;
    let adjusted = bh_adjust(&pvalues)?;
    let mut slot = vec![None; tested.len()];
    for (k, &g) in valid.iter().enumerate() {
        slot[g] = Some(k);
    }
    let results: Vec<GeneResult> = tested
        .into_iter()
        .enumerate()
        .map(|(g, t)| {
            let (statistic, p_value, note) = match t.outcome {
                Ok((s, p)) => (Some(s), Some(p), None),
                Err(msg) => (None, None, Some(msg)),
            };
            GeneResult {
                gene_id: norm.gene_ids[g].clone(),
                method,
                n_used: t.n_used,
                zeros_dropped: t.zeros_dropped,
                statistic,
                p_value,
                p_adjusted: slot[g].map(|k| adjusted[k]),
                discovery: slot[g].is_some_and(|k| rejected[k]),
                note,
            }
        })
        .collect();
    Ok(DeReport {
        method,
        transform,
        fdr,
        genes_tested: valid.len(),
        genes_failed: results.len() - valid.len(),
        discoveries: rejected.iter().filter(|r| **r).count(),
        results,
    })
}

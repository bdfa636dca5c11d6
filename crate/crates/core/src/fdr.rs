//! Benjamini-Hochberg false discovery rate control.

use crate::error::{check_open_unit, Error, Result};

fn check_pvalues(pvalues: &[f64]) -> Result<()> {
    match pvalues.iter().position(|p| !(0.0..=1.0).contains(p)) {
        Some(i) => Err(Error::domain(format!(
            "p-value at index {i} is outside [0, 1]: {}",
            pvalues[i]
        ))),
        None => Ok(()),
    }
}

/// Indices sorted by ascending p-value; ties keep input order.
fn ascending(pvalues: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..pvalues.len()).collect();
    order.sort_by(|&a, &b| pvalues[a].total_cmp(&pvalues[b]));
    order
}

/// Step-up rule at level `q`: with `m` hypotheses, find the largest `k`
/// such that `p_(k) <= q k / m` and reject the `k` smallest p-values.
/// Every p-value equal to `p_(k)` is rejected with it.
pub fn bh_reject(pvalues: &[f64], q: f64) -> Result<Vec<bool>> {
    check_open_unit("FDR level", q)?;
    check_pvalues(pvalues)?;
    let m = pvalues.len();
    let order = ascending(pvalues);
    let mf = m as f64;
    let cutoff = order
        .iter()
        .enumerate()
        .rev()
        .find(|(rank, &i)| pvalues[i] <= q * (rank + 1) as f64 / mf)
        .map(|(_, &i)| pvalues[i]);
    Ok(match cutoff {
        Some(threshold) => pvalues.iter().map(|p| *p <= threshold).collect(),
        None => vec![false; m],
    })
}

/// BH-adjusted p-values: `min_{j >= i} min(1, m p_(j) / j)` in sorted
/// order, mapped back to input positions.
pub fn bh_adjust(pvalues: &[f64]) -> Result<Vec<f64>> {
    check_pvalues(pvalues)?;
    let m = pvalues.len();
    let order = ascending(pvalues);
    let mut adjusted = vec![0.0; m];
    let mut running = 1.0f64;
    for (rank, &i) in order.iter().enumerate().rev() {
        let candidate = (pvalues[i] * (m as f64 / (rank + 1) as f64)).min(1.0);
        running = running.min(candidate);
        adjusted[i] = running;
    }
    Ok(adjusted)
}

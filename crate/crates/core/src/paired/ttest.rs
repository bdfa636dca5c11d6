use super::{check_alpha, Method, PairedData, Sidedness, TestReport};
use crate::error::{Error, Result};
use crate::special::{student_t_upper_quantile, t_sf};

/// `T = sqrt(n) mean(Y) / sd(Y)` with the `n - 1` denominator.
pub fn paired_t_statistic(diffs: &[f64]) -> Result<f64> {
    let n = diffs.len();
    if n < 2 {
        return Err(Error::domain(format!("the paired t-test needs n >= 2, got {n}")));
    }
    let nf = n as f64;
    let mean = diffs.iter().sum::<f64>() / nf;
    let ss: f64 = diffs.iter().map(|y| (y - mean) * (y - mean)).sum();
    let sd = (ss / (nf - 1.0)).sqrt();
    if sd.is_nan() || sd <= 0.0 || sd <= f64::EPSILON * mean.abs() {
        return Err(Error::Degenerate(
            "paired differences are constant (zero standard deviation)".into(),
        ));
    }
    Ok(nf.sqrt() * mean / sd)
}

/// Paired t-test; rejects iff the p-value is at most `alpha`.
pub fn paired_t_test(data: &PairedData, alpha: f64, sided: Sidedness) -> Result<TestReport> {
    check_alpha(alpha, sided)?;
    let t = paired_t_statistic(data.diffs())?;
    let n = data.len();
    let df = (n - 1) as f64;
    let (p_value, critical) = match sided {
        Sidedness::OneSidedGreater => (t_sf(t, df), student_t_upper_quantile(alpha, n as u64 - 1)?),
        Sidedness::TwoSided => (
            (2.0 * t_sf(t.abs(), df)).min(1.0),
            student_t_upper_quantile(alpha / 2.0, n as u64 - 1)?,
        ),
    };
    Ok(TestReport {
        method: Method::PairedT,
        sidedness: sided,
        n,
        statistic: t,
        critical_value: critical,
        randomization_prob: 0.0,
        reject_probability: if p_value <= alpha { 1.0 } else { 0.0 },
        p_value,
    })
}

use super::{check_alpha, Method, PairedData, Sidedness, TestReport, ZeroPolicy};
use crate::dist::DiscretePmf;
use crate::error::{Error, Result};
use crate::special::{normal_quantile, std_normal_cdf, std_normal_sf};

/// Largest `n` for which the exact null law is used (when `|Y|` has no ties).
pub const EXACT_WILCOXON_MAX_N: usize = 25;

/// Exact null law of `T+ = sum of ranks with positive sign` for `n`
/// distinct ranks, obtained by counting subset sums of `{1, .., n}`.
#[derive(Debug, Clone)]
pub struct WilcoxonNull {
    n: usize,
    tplus: DiscretePmf,
}

impl WilcoxonNull {
    pub fn exact(n: usize) -> Result<Self> {
        if n == 0 || n > EXACT_WILCOXON_MAX_N {
            return Err(Error::domain(format!(
                "exact signed-rank null available for 1 <= n <= {EXACT_WILCOXON_MAX_N}, got {n}"
            )));
        }
        let max = n * (n + 1) / 2;
        let mut counts = vec![0f64; max + 1];
        counts[0] = 1.0;
        for r in 1..=n {
            for s in (r..=max).rev() {
                counts[s] += counts[s - r];
            }
        }
        let total = 2f64.powi(n as i32);
        let masses = counts.into_iter().map(|c| c / total).collect();
        Ok(Self {
            n,
            tplus: DiscretePmf { support_min: 0, masses },
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    fn total_rank(&self) -> i64 {
        (self.n * (self.n + 1) / 2) as i64
    }

    /// Law of `U = 2 T+ - n(n+1)/2` on `-n(n+1)/2 ..= n(n+1)/2`; odd offsets
    /// from the minimum carry zero mass.
    pub fn u_pmf(&self) -> DiscretePmf {
        let total = self.total_rank();
        let mut masses = vec![0.0; 2 * total as usize + 1];
        for (t, m) in self.tplus.masses.iter().enumerate() {
            masses[2 * t] = *m;
        }
        DiscretePmf {
            support_min: -total,
            masses,
        }
    }

    /// `P(U >= u)`.
    pub fn upper(&self, u: f64) -> f64 {
        let t = ((u + self.total_rank() as f64) / 2.0).ceil() as i64;
        self.tplus.tail_ge(t)
    }

    /// `P(U <= u)`.
    pub fn lower(&self, u: f64) -> f64 {
        let t = ((u + self.total_rank() as f64) / 2.0).floor() as i64;
        self.tplus.cdf(t)
    }

    /// Smallest attainable `u` with `P(U >= u) <= level`; one lattice step
    /// past the maximum when no such value exists.
    fn critical(&self, level: f64) -> f64 {
        let total = self.total_rank();
        let mut t = total + 1;
        while t > 0 && self.tplus.tail_ge(t - 1) <= level {
            t -= 1;
        }
        (2 * t - total) as f64
    }
}

pub(crate) struct SignedRanks {
    pub u: f64,
    pub ties: bool,
    pub sum_sq_ranks: f64,
}

/// Ranks of `|Y|` with midranks for ties.
pub(crate) fn signed_ranks(diffs: &[f64]) -> SignedRanks {
    let n = diffs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diffs[i].abs().total_cmp(&diffs[j].abs()));
    let mut ranks = vec![0.0; n];
    let mut ties = false;
    let mut i = 0;
    while i < n {
        let mut j = i + 1;
        while j < n && diffs[order[j]].abs() == diffs[order[i]].abs() {
            j += 1;
        }
        if j - i > 1 {
            ties = true;
        }
        // positions i..j share ranks i+1..=j
        let mid = (i + 1 + j) as f64 / 2.0;
        for &k in &order[i..j] {
            ranks[k] = mid;
        }
        i = j;
    }
    let mut u = 0.0;
    let mut sum_sq = 0.0;
    for (d, r) in diffs.iter().zip(&ranks) {
        if *d > 0.0 {
            u += r;
        } else if *d < 0.0 {
            u -= r;
        }
        if *d != 0.0 {
            sum_sq += r * r;
        }
    }
    SignedRanks {
        u,
        ties,
        sum_sq_ranks: sum_sq,
    }
}

/// `U = sum_i sgn(Y_i) R_i`.
pub fn signed_rank_statistic(diffs: &[f64]) -> f64 {
    signed_ranks(diffs).u
}

/// Wilcoxon signed-rank test.
///
/// Exact p-values for `n <= 25` without ties in `|Y|`; otherwise the normal
/// approximation with variance `sum R_i^2` (which is `n(n+1)(2n+1)/6`
/// without ties) and a continuity correction of one, half the lattice step
/// of `U`.
pub fn wilcoxon_signed_rank(data: &PairedData, alpha: f64, sided: Sidedness, zeros: ZeroPolicy) -> Result<TestReport> {
    check_alpha(alpha, sided)?;
    let diffs = data.nonzero_diffs(zeros)?;
    if diffs.is_empty() {
        return Err(Error::Degenerate("every paired difference is zero".into()));
    }
    signed_rank_report(&diffs, alpha, sided, None)
}

/// Shared implementation; `null` may carry a precomputed exact law for `diffs.len()`.
pub(crate) fn signed_rank_report(
    diffs: &[f64],
    alpha: f64,
    sided: Sidedness,
    null: Option<&WilcoxonNull>,
) -> Result<TestReport> {
    let n = diffs.len();
    let sr = signed_ranks(diffs);
    let level = match sided {
        Sidedness::OneSidedGreater => alpha,
        Sidedness::TwoSided => alpha / 2.0,
    };
    let exact_owned;
    let exact = if sr.ties || n > EXACT_WILCOXON_MAX_N {
        None
    } else {
        match null {
            Some(w) if w.n() == n => Some(w),
            _ => {
                exact_owned = WilcoxonNull::exact(n)?;
                Some(&exact_owned)
            }
        }
    };
    let (upper, lower, critical) = match exact {
        Some(w) => (w.upper(sr.u), w.lower(sr.u), w.critical(level)),
        None => {
            let sd = sr.sum_sq_ranks.sqrt();
            (
                std_normal_sf((sr.u - 1.0) / sd),
                std_normal_cdf((sr.u + 1.0) / sd),
                1.0 + normal_quantile(1.0 - level)? * sd,
            )
        }
    };
    let p_value = match sided {
        Sidedness::OneSidedGreater => upper,
        Sidedness::TwoSided => (2.0 * upper.min(lower)).min(1.0),
    };
    Ok(TestReport {
        method: Method::Wilcoxon,
        sidedness: sided,
        n,
        statistic: sr.u,
        critical_value: critical,
        randomization_prob: 0.0,
        reject_probability: if p_value <= alpha { 1.0 } else { 0.0 },
        p_value,
    })
}

use serde::{Deserialize, Serialize};

use super::{check_alpha, Method, PairedData, Sidedness, TestReport, ZeroPolicy};
use crate::dist::{binomial_pmf, DiscretePmf};
use crate::error::{check_open_unit, Error, Result};

/// Boundary `c` and randomization weight `p` of the one-sided sign test:
/// reject when `W > c`, with probability `p` when `W = c`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalPair {
    pub c: u64,
    pub p: f64,
}

/// Smallest `c` with `P(W > c) <= alpha` under `Bin(n, 1/2)`, and the
/// weight `p = (alpha - P(W > c)) / P(W = c)` that makes the size exact.
pub fn binomial_critical(n: u64, alpha: f64) -> Result<CriticalPair> {
    if n == 0 {
        return Err(Error::domain("binomial_critical requires n >= 1"));
    }
    check_open_unit("alpha", alpha)?;
    let null = binomial_pmf(n, 0.5)?;
    Ok(critical_from_null(&null, alpha))
}

fn critical_from_null(null: &DiscretePmf, alpha: f64) -> CriticalPair {
    let n = null.masses.len() - 1;
    // tail = P(W > c), walking c down from n
    let mut c = n;
    let mut tail = 0.0;
    while c > 0 {
        let next_tail = tail + null.masses[c];
        if next_tail > alpha {
            break;
        }
        tail = next_tail;
        c -= 1;
    }
    let at = null.masses[c];
    let p = ((alpha - tail) / at).clamp(0.0, 1.0);
    CriticalPair { c: c as u64, p }
}

/// Number of strictly positive differences.
pub fn sign_statistic(diffs: &[f64]) -> u64 {
    diffs.iter().filter(|d| **d > 0.0).count() as u64
}

/// The randomized sign test for a fixed `(n, alpha, sidedness)`.
///
/// The two-sided test is the sum of two level-`alpha/2` one-sided tests,
/// one applied to `Y` and one to `-Y`; the latter sees `n - W` positives.
#[derive(Debug, Clone)]
pub struct SignTest {
    n: u64,
    alpha: f64,
    sided: Sidedness,
    critical: CriticalPair,
    null: DiscretePmf,
}

impl SignTest {
    pub fn new(n: u64, alpha: f64, sided: Sidedness) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("the sign test needs at least one nonzero difference"));
        }
        check_alpha(alpha, sided)?;
        let null = binomial_pmf(n, 0.5)?;
        let level = match sided {
            Sidedness::OneSidedGreater => alpha,
            Sidedness::TwoSided => alpha / 2.0,
        };
        let critical = critical_from_null(&null, level);
        Ok(Self {
            n,
            alpha,
            sided,
            critical,
            null,
        })
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn critical(&self) -> CriticalPair {
        self.critical
    }

    fn one_sided(&self, w: u64) -> f64 {
        let CriticalPair { c, p } = self.critical;
        if w > c {
            1.0
        } else if w == c {
            p
        } else {
            0.0
        }
    }

    /// Rejection probability given `W = w`.
    pub fn reject_probability(&self, w: u64) -> f64 {
        match self.sided {
            Sidedness::OneSidedGreater => self.one_sided(w),
            Sidedness::TwoSided => (self.one_sided(w) + self.one_sided(self.n - w)).min(1.0),
        }
    }

    /// Non-randomized p-value of `W = w`.
    pub fn p_value(&self, w: u64) -> f64 {
        let upper = self.null.tail_ge(w as i64);
        match self.sided {
            Sidedness::OneSidedGreater => upper,
            Sidedness::TwoSided => (2.0 * upper.min(self.null.cdf(w as i64))).min(1.0),
        }
    }

    /// `E[phi]` when `W` has law `law`.
    pub fn rejection_rate(&self, law: &DiscretePmf) -> f64 {
        law.expect(|k| self.reject_probability(k as u64))
    }

    pub fn report(&self, w: u64) -> TestReport {
        TestReport {
            method: Method::Sign,
            sidedness: self.sided,
            n: self.n as usize,
            statistic: w as f64,
            critical_value: self.critical.c as f64,
            randomization_prob: self.critical.p,
            reject_probability: self.reject_probability(w),
            p_value: self.p_value(w),
        }
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

/// Randomized sign test on paired differences.
pub fn sign_test(data: &PairedData, alpha: f64, sided: Sidedness, zeros: ZeroPolicy) -> Result<TestReport> {
    let diffs = data.nonzero_diffs(zeros)?;
    if diffs.is_empty() {
        return Err(Error::Degenerate("every paired difference is zero".into()));
    }
    let test = SignTest::new(diffs.len() as u64, alpha, sided)?;
    Ok(test.report(sign_statistic(&diffs)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn critical_n20() {
        // P(W > 14) = 21700 / 2^20, P(W = 14) = 38760 / 2^20
        let cp = binomial_critical(20, 0.05).unwrap();
        assert_eq!(cp.c, 14);
        let expected = (0.05 - 21_700.0 / 1_048_576.0) / (38_760.0 / 1_048_576.0);
        assert!((cp.p - expected).abs() < 1e-12);
        assert!((cp.p - 0.7928).abs() < 1e-4);
    }

    #[test]
    fn critical_single_coin() {
        let cp = binomial_critical(1, 0.5).unwrap();
        assert_eq!(cp, CriticalPair { c: 0, p: 0.0 });
    }

    #[test]
    fn critical_size_identity() {
        for n in [1u64, 2, 7, 20, 33, 100] {
            let null = binomial_pmf(n, 0.5).unwrap();
            for &alpha in &[0.001, 0.01, 0.05, 0.1, 0.3, 0.9] {
                let CriticalPair { c, p } = binomial_critical(n, alpha).unwrap();
                assert!((0.0..=1.0).contains(&p));
                let size = null.sf(c as i64) + p * null.pmf(c as i64);
                assert!((size - alpha).abs() < 1e-12, "n={n} alpha={alpha}");
            }
        }
        assert!(binomial_critical(5, 0.0).is_err());
        assert!(binomial_critical(5, 1.0).is_err());
        assert!(binomial_critical(0, 0.1).is_err());
    }

    #[test]
    fn all_positive_three() {
        let data = PairedData::from_diffs(vec![1.0, 2.0, 3.0]).unwrap();
        let r = sign_test(&data, 0.05, Sidedness::OneSidedGreater, ZeroPolicy::Error).unwrap();
        assert_eq!(r.statistic, 3.0);
        assert_eq!(r.p_value, 0.125);
        assert_eq!(r.method, Method::Sign);
    }

    #[test]
    fn boundary_randomization() {
        let mut diffs = vec![1.0; 14];
        diffs.extend(vec![-1.0; 6]);
        let data = PairedData::from_diffs(diffs).unwrap();
        let r = sign_test(&data, 0.05, Sidedness::OneSidedGreater, ZeroPolicy::Error).unwrap();
        assert_eq!(r.statistic, 14.0);
        assert!((r.reject_probability - 0.7928).abs() < 1e-4);
        assert_eq!(r.reject_probability, r.randomization_prob);
        assert!(r.decide(0.5));
        assert!(!r.decide(0.9));
    }

    // Reject probability in the |W - n/2| form with c2 = c - n/2, p2 = p.
    fn abs_form(n: u64, alpha: f64, w: u64) -> f64 {
        let CriticalPair { c, p } = binomial_critical(n, alpha / 2.0).unwrap();
        let dev = (w as f64 - n as f64 / 2.0).abs();
        let c2 = c as f64 - n as f64 / 2.0;
        if dev > c2 {
            1.0
        } else if dev == c2 {
            p
        } else {
            0.0
        }
    }

    #[test]
    fn two_sided_composition_matches_abs_form() {
        for n in [5u64, 6, 19, 20, 51, 100] {
            for &alpha in &[0.01, 0.05, 0.2] {
                let test = SignTest::new(n, alpha, Sidedness::TwoSided).unwrap();
                for w in 0..=n {
                    assert_eq!(test.reject_probability(w), abs_form(n, alpha, w), "n={n} w={w}");
                }
            }
        }
    }

    #[test]
    fn two_sided_size_exact() {
        for n in 1..=100u64 {
            for &alpha in &[0.01, 0.05, 0.1] {
                let test = SignTest::new(n, alpha, Sidedness::TwoSided).unwrap();
                let null = binomial_pmf(n, 0.5).unwrap();
                assert!((test.rejection_rate(&null) - alpha).abs() < 1e-12, "n={n}");
            }
        }
    }

    #[test]
    fn two_sided_alpha_bound() {
        assert!(SignTest::new(10, 0.5, Sidedness::TwoSided).is_err());
        assert!(SignTest::new(10, 0.6, Sidedness::OneSidedGreater).is_ok());
    }

    #[test]
    fn zeros_and_degenerate() {
        let data = PairedData::from_diffs(vec![0.0, 0.0]).unwrap();
        assert!(matches!(
            sign_test(&data, 0.05, Sidedness::TwoSided, ZeroPolicy::Drop),
            Err(Error::Degenerate(_))
        ));
        let data = PairedData::from_diffs(vec![0.0, 1.0, 2.0]).unwrap();
        assert!(sign_test(&data, 0.05, Sidedness::TwoSided, ZeroPolicy::Error).is_err());
        let r = sign_test(&data, 0.05, Sidedness::TwoSided, ZeroPolicy::Drop).unwrap();
        assert_eq!(r.n, 2);
    }

    #[test]
    fn two_sided_p_value() {
        let data = PairedData::from_diffs(vec![1.0; 20]).unwrap();
        let r = sign_test(&data, 0.05, Sidedness::TwoSided, ZeroPolicy::Error).unwrap();
        assert!((r.p_value - 2.0 / 1_048_576.0).abs() < 1e-18);
        assert_eq!(r.reject_probability, 1.0);
        let data = PairedData::from_diffs(vec![1.0, -1.0]).unwrap();
        let r = sign_test(&data, 0.05, Sidedness::TwoSided, ZeroPolicy::Error).unwrap();
        assert_eq!(r.p_value, 1.0);
    }
}

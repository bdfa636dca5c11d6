use serde::{Deserialize, Serialize};

use crate::error::{check_closed_unit, Error, Result};
use crate::power::coefficient_of_variation;

/// `round(n * frac_high)` entries equal to `high` placed after the `low`
/// entries. Halves round away from zero, so `n = 5, frac_high = 0.5` gives
/// three highs.
pub fn gen_mu_two_group(n: usize, low: f64, high: f64, frac_high: f64) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::domain("n must be positive"));
    }
    for (name, v) in [("low", low), ("high", high)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be positive, got {v}")));
        }
    }
    check_closed_unit("frac_high", frac_high)?;
    let highs = (n as f64 * frac_high).round() as usize;
    let mut mu = vec![low; n - highs];
    mu.extend(std::iter::repeat_n(high, highs));
    Ok(mu)
}

/// Five groups of sizes differing by at most one; the first `n mod 5`
/// groups take the extra entry.
pub fn gen_mu_multi_group(n: usize, values: &[f64; 5]) -> Result<Vec<f64>> {
    if n < values.len() {
        return Err(Error::domain(format!(
            "need at least one entry per group, got n = {n} for {} groups",
            values.len()
        )));
    }
    if let Some(v) = values.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return Err(Error::domain(format!("group values must be positive, got {v}")));
    }
    let (base, extra) = (n / values.len(), n % values.len());
    let mut mu = Vec::with_capacity(n);
    for (g, &v) in values.iter().enumerate() {
        let size = base + usize::from(g < extra);
        mu.extend(std::iter::repeat_n(v, size));
    }
    Ok(mu)
}

/// A one-parameter family of scale vectors, indexed by a spread `s >= 0`
/// with `s = 0` homogeneous and `c_v` increasing in `s`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MuDesign {
    /// Values `1` and `e^s`, a fraction `frac_high` of pairs on the high value.
    TwoGroup { frac_high: f64 },
    /// Five groups with values `base_k^s`.
    MultiGroup { base: [f64; 5] },
}

impl Default for MuDesign {
    fn default() -> Self {
        MuDesign::TwoGroup { frac_high: 0.5 }
    }
}

impl MuDesign {
    pub const DEFAULT_MULTI_BASE: [f64; 5] = [1.0, 2.0, 4.0, 8.0, 16.0];

    pub fn multi_group_default() -> Self {
        MuDesign::MultiGroup {
            base: Self::DEFAULT_MULTI_BASE,
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            MuDesign::TwoGroup { frac_high } => check_closed_unit("frac_high", *frac_high),
            MuDesign::MultiGroup { base } => match base.iter().find(|b| !(b.is_finite() && **b > 0.0)) {
                Some(b) => Err(Error::domain(format!(
                    "multi-group base values must be positive, got {b}"
                ))),
                None => Ok(()),
            },
        }
    }

    // Largest usable spread: keeps every ratio to the largest value above 1e-300.
    fn max_spread(&self) -> f64 {
        let range = match self {
            MuDesign::TwoGroup { .. } => 1.0,
            MuDesign::MultiGroup { base } => log_range(base),
        };
        if range > 0.0 {
            690.0 / range
        } else {
            0.0
        }
    }

    /// Scale vector at spread `s`, normalized so its largest entry is 1.
    pub fn mu(&self, n: usize, s: f64) -> Result<Vec<f64>> {
        self.validate()?;
        if !(s.is_finite() && s >= 0.0) {
            return Err(Error::domain(format!("spread must be nonnegative, got {s}")));
        }
        let s = s.min(self.max_spread());
        match self {
            MuDesign::TwoGroup { frac_high } => gen_mu_two_group(n, (-s).exp(), 1.0, *frac_high),
            MuDesign::MultiGroup { base } => {
                let top = base.iter().map(|b| b.ln()).fold(f64::NEG_INFINITY, f64::max);
                let values = base.map(|b| (s * (b.ln() - top)).exp());
                gen_mu_multi_group(n, &values)
            }
        }
    }

    pub fn cv_at(&self, n: usize, s: f64) -> Result<f64> {
        coefficient_of_variation(&self.mu(n, s)?)
    }

    /// Least upper bound of reachable `c_v` (approached, not attained).
    pub fn cv_supremum(&self, n: usize) -> Result<f64> {
        self.cv_at(n, self.max_spread())
    }

    /// Spread whose `c_v` matches `target` within `1e-6`, by bisection.
    pub fn solve_spread(&self, n: usize, target: f64) -> Result<f64> {
        if !(target.is_finite() && target >= 0.0) {
            return Err(Error::domain(format!("target c_v must be nonnegative, got {target}")));
        }
        if target == 0.0 {
            self.mu(n, 0.0)?;
            return Ok(0.0);
        }
        let supremum = self.cv_supremum(n)?;
        if target >= supremum - 1e-9 {
            return Err(Error::UnreachableCv { target, supremum });
        }
        let (mut lo, mut hi) = (0.0, self.max_spread());
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.cv_at(n, mid)? < target {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-14 * hi.max(1.0) {
                break;
            }
        }
        let s = 0.5 * (lo + hi);
        let got = self.cv_at(n, s)?;
        if (got - target).abs() > 1e-6 {
            return Err(Error::Invalid(format!(
                "bisection reached c_v {got} for target {target}; the design is not monotone"
            )));
        }
        Ok(s)
    }

    pub fn solve(&self, n: usize, target: f64) -> Result<Vec<f64>> {
        let s = self.solve_spread(n, target)?;
        self.mu(n, s)
    }
}

fn log_range(base: &[f64; 5]) -> f64 {
    let logs = base.map(f64::ln);
    let hi = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min);
    hi - lo
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cv(mu: &[f64]) -> f64 {
        coefficient_of_variation(mu).unwrap()
    }

    #[test]
    fn two_group_examples() {
        let mu = gen_mu_two_group(20, 1.0, 10.0, 0.5).unwrap();
        assert_eq!(mu.iter().filter(|m| **m == 1.0).count(), 10);
        assert_eq!(mu.iter().filter(|m| **m == 10.0).count(), 10);
        // m1 = 5.5, m2 = 20.25
        assert!((cv(&mu) - 20.25 / 30.25).abs() < 1e-12);
        assert!((cv(&mu) - 0.6694).abs() < 1e-4);
        for m in [0.001, 3.0, 1e6] {
            let scaled = gen_mu_two_group(20, m, 10.0 * m, 0.5).unwrap();
            assert!((cv(&scaled) - cv(&mu)).abs() < 1e-12);
        }
        assert_eq!(cv(&gen_mu_two_group(20, 1.0, 10.0, 0.0).unwrap()), 0.0);
        assert_eq!(
            gen_mu_two_group(5, 1.0, 2.0, 0.5).unwrap(),
            vec![1.0, 1.0, 2.0, 2.0, 2.0]
        );
        assert!(gen_mu_two_group(5, 0.0, 2.0, 0.5).is_err());
    }

    #[test]
    fn multi_group_examples() {
        assert_eq!(cv(&gen_mu_multi_group(20, &[1.0; 5]).unwrap()), 0.0);
        let mu = gen_mu_multi_group(20, &[1.0, 2.0, 4.0, 8.0, 16.0]).unwrap();
        // m1 = 31/5 = 6.2; m2 = 341/5 - 6.2^2 = 29.76
        assert!((cv(&mu) - 29.76 / 38.44).abs() < 1e-12);
        for n in 5..40 {
            let mu = gen_mu_multi_group(n, &[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
            assert_eq!(mu.len(), n);
            let counts: Vec<usize> = (1..=5).map(|v| mu.iter().filter(|m| **m == v as f64).count()).collect();
            assert!(counts.iter().max().unwrap() - counts.iter().min().unwrap() <= 1);
        }
        assert!(gen_mu_multi_group(4, &[1.0; 5]).is_err());
    }

    #[test]
    fn bisection_hits_targets() {
        let two = MuDesign::default();
        for target in [0.0, 0.1, 0.58, 0.9, 0.99] {
            let mu = two.solve(20, target).unwrap();
            assert!((cv(&mu) - target).abs() <= 1e-6, "target {target}");
        }
        let multi = MuDesign::multi_group_default();
        for target in [0.25, 1.0, 2.3, 3.5] {
            let mu = multi.solve(20, target).unwrap();
            assert!((cv(&mu) - target).abs() <= 1e-6, "target {target}");
        }
    }

    #[test]
    fn two_group_ratio_matches_closed_form() {
        // At frac 1/2, c_v = ((r - 1)/(r + 1))^2, so r = (1 + sqrt c)/(1 - sqrt c).
        let s = MuDesign::default().solve_spread(20, 0.49).unwrap();
        assert!((s.exp() - 1.7 / 0.3).abs() < 1e-5);
    }

    #[test]
    fn unreachable_targets() {
        match MuDesign::default().solve(20, 1.0) {
            Err(Error::UnreachableCv { supremum, .. }) => assert!(supremum <= 1.0),
            other => panic!("expected unreachable, got {other:?}"),
        }
        assert!(MuDesign::multi_group_default().solve(20, 4.5).is_err());
        let flat = MuDesign::MultiGroup { base: [3.0; 5] };
        assert!(flat.solve(20, 0.1).is_err());
        assert_eq!(flat.solve(20, 0.0).unwrap(), vec![1.0; 20]);
    }
}

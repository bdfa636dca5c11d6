//! Special functions: error function, standard normal cdf and quantile,
//! log-gamma, the regularized incomplete beta and gamma functions, and the
//! Student t and chi-square tail probabilities built on them.
//!
//! Everything here is self-contained `f64` arithmetic.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};

const FRAC_2_SQRT_PI: f64 = std::f64::consts::FRAC_2_SQRT_PI;
const SQRT_2PI: f64 = 2.506_628_274_631_000_5;
const EPS: f64 = 1e-16;
const MAX_ITER: usize = 20_000;

/// Complementary error function.
///
/// Uses the positive-term series `erf(x) = 2/sqrt(pi) e^{-x^2} sum (2x^2)^k x / (2k+1)!!`
/// below `x = 2` and the Laplace continued fraction above it, so the
/// result keeps full relative precision deep into the upper tail.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.0 {
        1.0 - erf_series(x)
    } else {
        erfc_continued_fraction(x)
    }
}

pub fn erf(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.abs() < 2.0 {
        let v = erf_series(x.abs());
        if x < 0.0 {
            -v
        } else {
            v
        }
    } else {
        1.0 - erfc(x)
    }
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    let mut k = 0.0;
    loop {
        k += 1.0;
        term *= 2.0 * x2 / (2.0 * k + 1.0);
        sum += term;
        if term <= EPS * sum || k > 500.0 {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

// erfc(x) = e^{-x^2}/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
fn erfc_continued_fraction(x: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..MAX_ITER {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    (-x * x).exp() / (PI.sqrt() * f)
}

/// Standard normal cdf without input validation; NaN propagates.
#[inline]
pub fn std_normal_cdf(x: f64) -> f64 {
    0.5 * erfc(-x / SQRT_2)
}

/// Standard normal upper tail `Q(x) = 1 - Phi(x)`, accurate in the far tail.
#[inline]
pub fn std_normal_sf(x: f64) -> f64 {
    0.5 * erfc(x / SQRT_2)
}

#[inline]
pub fn std_normal_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

/// `Phi(x)`, the standard normal cdf.
pub fn normal_cdf(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain(format!("normal_cdf requires a finite argument, got {x}")));
    }
    Ok(std_normal_cdf(x))
}

/// Inverse of [`normal_cdf`] on `(0, 1)`.
///
/// Acklam's rational approximation followed by two Halley corrections
/// against [`std_normal_cdf`].
pub fn normal_quantile(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::domain(format!("normal_quantile requires p in (0, 1), got {p}")));
    }
    let mut x = acklam(p);
    for _ in 0..2 {
        let e = if x < 0.0 {
            std_normal_cdf(x) - p
        } else {
            (1.0 - p) - std_normal_sf(x)
        };
        let u = e * SQRT_2PI * (0.5 * x * x).exp();
        if !u.is_finite() {
            break;
        }
        x -= u / (1.0 + 0.5 * x * u);
    }
    Ok(x)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.02425;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else if p <= 1.0 - P_LOW {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    } else {
        let q = (-2.0 * (1.0 - p).ln()).sqrt();
        -(((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    }
}

/// Natural log of the gamma function for `x > 0` (Lanczos, g = 7).
pub fn ln_gamma(x: f64) -> f64 {
    const G: f64 = 7.0;
    #[allow(clippy::excessive_precision)]
    const COEF: [f64; 9] = [
        0.999_999_999_999_809_93,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_13,
        -176.615_029_162_140_59,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_571_6e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        // reflection
        return (PI / (PI * x).sin()).abs().ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = COEF[0];
    for (i, c) in COEF.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized incomplete beta `I_x(a, b)`.
///
/// `one_minus_x` is taken separately so callers holding `1 - x` in exact
/// form do not lose it to cancellation.
pub fn inc_beta(a: f64, b: f64, x: f64, one_minus_x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    if one_minus_x <= 0.0 {
        return 1.0;
    }
    let ln_front = ln_gamma(a + b) - ln_gamma(a) - ln_gamma(b) + a * x.ln() + b * one_minus_x.ln();
    let front = ln_front.exp();
    if x < (a + 1.0) / (a + b + 2.0) {
        front * beta_cf(a, b, x) / a
    } else {
        1.0 - front * beta_cf(b, a, one_minus_x) / b
    }
}

fn beta_cf(a: f64, b: f64, x: f64) -> f64 {
    let tiny = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < tiny {
        d = tiny;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = 1.0 + aa / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < EPS {
            break;
        }
    }
    h
}

/// `P(T_df > t)` for Student's t with `df` degrees of freedom.
pub fn student_t_sf(t: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(Error::domain("student_t_sf requires df >= 1"));
    }
    if !t.is_finite() {
        return Err(Error::domain(format!("student_t_sf requires a finite t, got {t}")));
    }
    Ok(t_sf(t, df as f64))
}

pub(crate) fn t_sf(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 0.5;
    }
    let t2 = t * t;
    let x = df / (df + t2);
    let one_minus_x = t2 / (df + t2);
    let tail = 0.5 * inc_beta(0.5 * df, 0.5, x, one_minus_x);
    if t > 0.0 {
        tail
    } else {
        1.0 - tail
    }
}

/// The `t` with `P(T_df > t) = upper`, found by bisection on [`student_t_sf`].
pub fn student_t_upper_quantile(upper: f64, df: u64) -> Result<f64> {
    if df == 0 {
        return Err(Error::domain("student_t_upper_quantile requires df >= 1"));
    }
    if !(upper > 0.0 && upper < 1.0) {
        return Err(Error::domain(format!(
            "student_t_upper_quantile requires a probability in (0, 1), got {upper}"
        )));
    }
    let df = df as f64;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while t_sf(lo, df) < upper {
        lo *= 2.0;
    }
    while t_sf(hi, df) > upper {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if t_sf(mid, df) > upper {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Regularized upper incomplete gamma `Q(a, x)`.
pub fn inc_gamma_upper(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 1.0;
    }
    let ln_front = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        let mut ap = a;
        let mut del = 1.0 / a;
        let mut sum = del;
        for _ in 0..MAX_ITER {
            ap += 1.0;
            del *= x / ap;
            sum += del;
            if del.abs() < sum.abs() * EPS {
                break;
            }
        }
        1.0 - sum * ln_front.exp()
    } else {
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..MAX_ITER {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < EPS {
                break;
            }
        }
        ln_front.exp() * h
    }
}

/// Upper tail of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_sf(x: f64, df: f64) -> Result<f64> {
    if df.is_nan() || df <= 0.0 || !x.is_finite() {
        return Err(Error::domain(format!(
            "chi_square_sf requires df > 0 and finite x, got df = {df}, x = {x}"
        )));
    }
    Ok(inc_gamma_upper(0.5 * df, 0.5 * x.max(0.0)))
}

#[cfg(test)]
mod tests {
    use super::*;

    // Composite Simpson on [a, b] with `m` (even) panels.
    fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, m: usize) -> f64 {
        let h = (b - a) / m as f64;
        let mut s = f(a) + f(b);
        for i in 1..m {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(a + i as f64 * h);
        }
        s * h / 3.0
    }

    fn phi_oracle(x: f64) -> f64 {
        let density = |t: f64| (-0.5 * t * t).exp() / (2.0 * PI).sqrt();
        0.5 + simpson(density, 0.0, x, 20_000)
    }

    #[test]
    fn normal_cdf_against_quadrature() {
        for &x in &[-6.0, -3.0, -1.959964, -0.5, 0.1, 0.7, 1.0, 2.5, 4.0, 7.5] {
            let got = normal_cdf(x).unwrap();
            assert!((got - phi_oracle(x)).abs() < 1e-10, "x = {x}: {got}");
        }
    }

    #[test]
    fn normal_cdf_examples() {
        assert_eq!(normal_cdf(0.0).unwrap(), 0.5);
        assert!((normal_cdf(1.959964).unwrap() - 0.975).abs() < 1e-6);
        for &x in &[0.1, 1.0, 3.0] {
            let s = normal_cdf(x).unwrap() + normal_cdf(-x).unwrap();
            assert!((s - 1.0).abs() < 1e-15);
        }
        assert!(normal_cdf(f64::NAN).is_err());
        assert!(normal_cdf(f64::INFINITY).is_err());
    }

    #[test]
    fn normal_cdf_monotone() {
        let mut prev = 0.0;
        for i in -4000..=4000 {
            let v = std_normal_cdf(i as f64 * 0.0025);
            assert!(v >= prev);
            prev = v;
        }
    }

    #[test]
    fn quantile_examples() {
        assert_eq!(normal_quantile(0.5).unwrap(), 0.0);
        // bisection on the cdf as the oracle
        let (mut lo, mut hi) = (0.0, 5.0);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if std_normal_cdf(mid) < 0.975 {
                lo = mid
            } else {
                hi = mid
            }
        }
        let q = normal_quantile(0.975).unwrap();
        assert!((q - lo).abs() < 1e-9);
        assert!((q - 1.959964).abs() < 1e-5);
        let r = std_normal_cdf(normal_quantile(0.31).unwrap());
        assert!((r - 0.31).abs() < 1e-9);
        for bad in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(normal_quantile(bad).is_err());
        }
    }

    #[test]
    fn quantile_roundtrip_grid() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            let x = normal_quantile(p).unwrap();
            assert!((std_normal_cdf(x) - p).abs() < 1e-9, "p = {p}");
        }
        for &p in &[1e-300, 1e-100, 1e-20, 1e-8] {
            let x = normal_quantile(p).unwrap();
            assert!(((std_normal_cdf(x) - p) / p).abs() < 1e-9, "p = {p}");
        }
    }

    #[test]
    fn ln_gamma_integers() {
        let mut fact: f64 = 1.0;
        for n in 1..30 {
            assert!((ln_gamma(n as f64) - fact.ln()).abs() < 1e-12 * fact.ln().max(1.0));
            fact *= n as f64;
        }
        assert!((ln_gamma(0.5) - PI.sqrt().ln()).abs() < 1e-13);
    }

    // t densities with closed-form normalizers
    fn t4_density(t: f64) -> f64 {
        0.375 * (1.0 + t * t / 4.0).powf(-2.5)
    }
    fn t5_density(t: f64) -> f64 {
        8.0 / (3.0 * PI * 5f64.sqrt()) * (1.0 + t * t / 5.0).powi(-3)
    }

    #[test]
    fn t_sf_against_quadrature() {
        for &t in &[0.3, 1.0, 2.015, 3.5, 6.0] {
            let oracle5 = 0.5 - simpson(t5_density, 0.0, t, 20_000);
            let oracle4 = 0.5 - simpson(t4_density, 0.0, t, 20_000);
            assert!((student_t_sf(t, 5).unwrap() - oracle5).abs() < 1e-9);
            assert!((student_t_sf(t, 4).unwrap() - oracle4).abs() < 1e-9);
            assert!((student_t_sf(-t, 5).unwrap() - (1.0 - oracle5)).abs() < 1e-9);
        }
    }

    #[test]
    fn t_sf_examples() {
        for df in [1, 2, 7, 100] {
            assert_eq!(student_t_sf(0.0, df).unwrap(), 0.5);
        }
        let normal = std_normal_sf(1.96);
        assert!((student_t_sf(1.96, 1_000_000).unwrap() - normal).abs() < 1e-4);
        assert!((student_t_sf(2.015, 5).unwrap() - 0.05).abs() < 2e-4);
        // Cauchy: P(T > 1) = 1/4
        assert!((student_t_sf(1.0, 1).unwrap() - 0.25).abs() < 1e-12);
        assert!(student_t_sf(1.0, 0).is_err());
        assert!(student_t_sf(f64::NAN, 3).is_err());
    }

    #[test]
    fn t_quantile_inverts_sf() {
        for df in [1, 4, 19, 200] {
            for &u in &[0.001, 0.025, 0.05, 0.5, 0.9] {
                let t = student_t_upper_quantile(u, df).unwrap();
                assert!((student_t_sf(t, df).unwrap() - u).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn chi_square_tail() {
        // df = 2 is exponential: sf = exp(-x/2)
        for &x in &[0.1, 1.0, 5.0, 30.0] {
            assert!((chi_square_sf(x, 2.0).unwrap() - (-x / 2.0f64).exp()).abs() < 1e-13);
        }
        // df = 1: sf = erfc(sqrt(x/2))
        for &x in &[0.5, 3.84, 10.0] {
            assert!((chi_square_sf(x, 1.0).unwrap() - erfc((x / 2.0f64).sqrt())).abs() < 1e-12);
        }
    }

    #[test]
    fn erfc_tail_relative_accuracy() {
        // Q(8) = 6.22096057427174e-16
        let q8 = std_normal_sf(8.0);
        assert!(((q8 - 6.220_960_574_271_74e-16) / q8).abs() < 1e-10);
        assert_eq!(erfc(0.0), 1.0);
        assert!((erf(0.5) + erf(-0.5)).abs() < 1e-16);
    }
}

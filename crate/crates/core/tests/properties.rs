use proptest::prelude::*;

use pairtest::dist::{binomial_pmf, poisson_binomial_pmf};
use pairtest::fdr::{bh_adjust, bh_reject};
use pairtest::paired::{sign_statistic, Method, Sidedness, SignTest};
use pairtest::power::{exact_power_sign, near_optimality_bound, theta_from_delta};
use pairtest::rnaseq::{
    de_test, filter_genes, normalize, planted_fixture, size_factors, CountMatrix, FilterThresholds, PlantedConfig,
    Transform,
};
use pairtest::rng::RngStream;
use pairtest::sim::{estimate_for, mc_power, sample_pairs, ExperimentConfig, NuisanceSpec, SignDecision};

fn bh_brute_force(p: &[f64], q: f64) -> Vec<bool> {
    let m = p.len() as f64;
    let k = (1..=p.len())
        .filter(|&k| p.iter().filter(|&&x| x <= q * k as f64 / m).count() >= k)
        .max();
    match k {
        Some(k) => p.iter().map(|&x| x <= q * k as f64 / m).collect(),
        None => vec![false; p.len()],
    }
}

fn pvalues(max_len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![0.0..=1.0f64, (0u32..=20).prop_map(|k| f64::from(k) / 20.0)],
        1..max_len,
    )
}

proptest! {
    #[test]
    fn bh_matches_brute_force(p in pvalues(14), q in 0.001..0.5f64) {
        prop_assert_eq!(bh_reject(&p, q).unwrap(), bh_brute_force(&p, q));
    }

    #[test]
    fn bh_permutation_equivariant(p in pvalues(30), q in 0.01..0.3f64, shift in 0usize..30) {
        let k = shift % p.len();
        let mut rotated = p.clone();
        rotated.rotate_left(k);
        let mut expected = bh_reject(&p, q).unwrap();
        expected.rotate_left(k);
        prop_assert_eq!(bh_reject(&rotated, q).unwrap(), expected);
    }

    #[test]
    fn bh_extra_null_never_adds(p in pvalues(30), q in 0.01..0.3f64) {
        let before = bh_reject(&p, q).unwrap();
        let mut longer = p.clone();
        longer.push(1.0);
        let after = bh_reject(&longer, q).unwrap();
        prop_assert!(!after[p.len()] || before.iter().all(|&r| r));
        for (a, b) in after.iter().zip(&before) {
            prop_assert!(!a | b);
        }
    }

    #[test]
    fn bh_adjusted_agrees_with_reject(p in pvalues(30), q in 0.01..0.3f64) {
        let adj = bh_adjust(&p).unwrap();
        let rej = bh_reject(&p, q).unwrap();
        for (a, r) in adj.iter().zip(&rej) {
            prop_assert_eq!(*a <= q, *r);
        }
    }

    #[test]
    fn poisson_binomial_enumeration(thetas in prop::collection::vec(0.0..=1.0f64, 1..11)) {
        let law = poisson_binomial_pmf(&thetas).unwrap();
        let n = thetas.len();
        let mut brute = vec![0.0; n + 1];
        for mask in 0u32..1 << n {
            let mut prob = 1.0;
            for (i, t) in thetas.iter().enumerate() {
                prob *= if mask >> i & 1 == 1 { *t } else { 1.0 - t };
            }
            brute[mask.count_ones() as usize] += prob;
        }
        for (k, b) in brute.iter().enumerate() {
            prop_assert!((law.pmf(k as i64) - b).abs() < 1e-12);
        }
    }

    #[test]
    fn constant_thetas_give_binomial(n in 1u64..60, t in 0.0..=1.0f64) {
        let pb = poisson_binomial_pmf(&vec![t; n as usize]).unwrap();
        let b = binomial_pmf(n, t).unwrap();
        for k in 0..=n as i64 {
            prop_assert!((pb.pmf(k) - b.pmf(k)).abs() < 1e-12);
        }
    }

    #[test]
    fn size_factors_track_sample_scaling(
        seed in 0u64..1000,
        sample in 0usize..6,
        factor in 2u64..6,
    ) {
        let mut s = RngStream::new(seed, 0);
        let counts: Vec<Vec<u64>> = (0..40)
            .map(|_| (0..6).map(|_| 1 + (s.next_uniform() * 500.0) as u64).collect())
            .collect();
        let ids = |p: &str, k: usize| (0..k).map(|i| format!("{p}{i}")).collect::<Vec<_>>();
        let m = CountMatrix::new(ids("g", 40), ids("s", 6), counts.clone()).unwrap();
        let mut scaled = counts;
        for row in &mut scaled {
            row[sample] *= factor;
        }
        let m2 = CountMatrix::new(ids("g", 40), ids("s", 6), scaled).unwrap();
        let a = size_factors(&m).unwrap();
        let b = size_factors(&m2).unwrap();
        let other = (sample + 1) % 6;
        let ratio = (b[sample] / b[other]) / (a[sample] / a[other]);
        prop_assert!((ratio - factor as f64).abs() < 1e-9 * factor as f64);
    }

    #[test]
    fn sign_discoveries_ignore_transform_and_depth(seed in 0u64..500, factor in 2u64..5) {
        let f = planted_fixture(&PlantedConfig { n_null: 30, ..PlantedConfig::standard(seed) }).unwrap();
        let run = |counts: &CountMatrix, t: Transform| {
            let kept = filter_genes(counts, FilterThresholds::default());
            let norm = normalize(&kept, &size_factors(&kept).unwrap()).unwrap();
            let r = de_test(&norm, &f.pairing, Method::Sign, 0.1, Some(t)).unwrap();
            r.discovered().map(str::to_string).collect::<Vec<_>>()
        };
        let base = run(&f.counts, Transform::Identity);
        prop_assert_eq!(&run(&f.counts, Transform::Log2Shifted), &base);
        let mut deeper = f.counts.clone();
        for row in &mut deeper.counts {
            for (j, x) in row.iter_mut().enumerate() {
                if j % 3 == 0 {
                    *x *= factor;
                }
            }
        }
        prop_assert_eq!(&run(&deeper, Transform::Identity), &base);
    }

    #[test]
    fn sign_statistic_depends_only_on_signs(y in prop::collection::vec(-1e6..1e6f64, 1..50)) {
        let w = sign_statistic(&y);
        let signs: Vec<f64> = y.iter().map(|v| if *v > 0.0 { 1.0 } else if *v < 0.0 { -1.0 } else { 0.0 }).collect();
        prop_assert_eq!(sign_statistic(&signs), w);
    }
}

// The sign count of heterogeneous Gaussian pairs is Bin(n, Phi(delta))
// whatever the scales: chi-square goodness of fit on pooled cells.
#[test]
fn sign_count_is_binomial_under_heterogeneity() {
    let n = 15usize;
    let delta = 0.4;
    let theta = theta_from_delta(delta).unwrap();
    let mu: Vec<f64> = (0..n).map(|i| 10f64.powf(i as f64 / 3.0 - 2.0)).collect();
    let spec = NuisanceSpec::new(vec![3.0; n], mu, vec![0.3; n], delta, 1).unwrap();
    let reps = 20_000;
    let mut hist = vec![0usize; n + 1];
    for r in 0..reps {
        let mut s = RngStream::new(808, r);
        let y = sample_pairs(&spec, &mut s);
        hist[sign_statistic(y.diffs()) as usize] += 1;
    }
    let law = binomial_pmf(n as u64, theta).unwrap();
    // pool cells until each expects at least 5
    let mut chi2 = 0.0;
    let mut cells = 0;
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, h) in hist.iter().enumerate() {
        obs += *h as f64;
        exp += law.pmf(k as i64) * reps as f64;
        if exp >= 5.0 && (reps as f64 * law.sf(k as i64) >= 5.0 || k == n) {
            chi2 += (obs - exp).powi(2) / exp;
            cells += 1;
            obs = 0.0;
            exp = 0.0;
        }
    }
    if exp > 0.0 {
        chi2 += (obs - exp).powi(2) / exp;
    }
    // 0.999 quantile of chi-square with <= 14 degrees of freedom is below 37
    assert!(cells >= 8, "{cells}");
    assert!(chi2 < 37.0, "chi2 = {chi2} over {cells} cells");
}

// No test can beat the sign test's worst-case power by more than the bound;
// the paired t-test at a strongly heterogeneous design is one such test.
#[test]
fn paired_t_respects_the_bound() {
    let n = 20;
    let delta = 3.0 / 20f64.sqrt();
    let alpha = 0.05;
    let bound = near_optimality_bound(n as u64, delta, alpha).unwrap();
    let sign = exact_power_sign(n as u64, theta_from_delta(delta).unwrap(), alpha, Sidedness::TwoSided)
        .unwrap()
        .value;
    let mut mu = vec![1.0; n];
    mu[0] = 1e3;
    let spec = NuisanceSpec::with_scales(mu, delta).unwrap();
    let config = ExperimentConfig {
        replicates: 4000,
        methods: vec![Method::PairedT, Method::Sign],
        sign_decision: SignDecision::Randomized,
        ..ExperimentConfig::standard(31)
    };
    let est = mc_power(&config, &spec).unwrap();
    let t = estimate_for(&est, Method::PairedT).unwrap();
    let s = estimate_for(&est, Method::Sign).unwrap();
    assert!(t.value <= sign + bound + 3.0 * t.std_error, "t {} sign {sign}", t.value);
    assert!((s.value - sign).abs() <= 4.0 * s.std_error);
}

#[test]
fn randomized_sign_test_size_is_exact() {
    for n in 1..=40u64 {
        for alpha in [0.01, 0.05, 0.2] {
            for sided in [Sidedness::OneSidedGreater, Sidedness::TwoSided] {
                let size = SignTest::new(n, alpha, sided)
                    .unwrap()
                    .rejection_rate(&binomial_pmf(n, 0.5).unwrap());
                assert!((size - alpha).abs() < 1e-12, "n {n} alpha {alpha} {sided:?}: {size}");
            }
        }
    }
}

#[test]
fn null_fixture_rarely_discovers() {
    let mut clean = 0;
    for seed in 1..=50u64 {
        let f = planted_fixture(&PlantedConfig::null(seed)).unwrap();
        let kept = filter_genes(&f.counts, FilterThresholds::default());
        let norm = normalize(&kept, &size_factors(&kept).unwrap()).unwrap();
        let r = de_test(&norm, &f.pairing, Method::Sign, 0.1, None).unwrap();
        if r.discoveries == 0 {
            clean += 1;
        }
    }
    assert!(clean >= 45, "{clean}/50");
}

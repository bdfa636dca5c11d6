use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::counts::{write_groups, CountMatrix, Pair, PairingMap};
use crate::error::{check_open_unit, Error, Result};
use crate::rng::RngStream;
use crate::sim::{sample_pairs, NuisanceSpec};
use crate::special::normal_quantile;

/// Count matrix with known differential genes. On the log scale each gene
/// follows the heterogeneous paired Gaussian model: pair `i` has its own
/// level and its own scale, and the B sample is shifted by `delta mu_i`
/// with `delta = Phi^{-1}(theta)`. Counts are the exponentiated values times
/// a per-sample depth, rounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlantedConfig {
    pub n_pairs: usize,
    pub n_null: usize,
    pub n_signal: usize,
    /// `P(Y_i > 0)` of the signal genes (taken as `1 - theta` for genes
    /// planted downwards).
    pub theta_signal: f64,
    pub seed: u64,
}

impl PlantedConfig {
    pub fn standard(seed: u64) -> Self {
        Self {
            n_pairs: 20,
            n_null: 100,
            n_signal: 10,
            theta_signal: 0.95,
            seed,
        }
    }

    pub fn null(seed: u64) -> Self {
        Self {
            n_null: 110,
            n_signal: 0,
            ..Self::standard(seed)
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlantedFixture {
    pub counts: CountMatrix,
    pub pairing: PairingMap,
    /// Ids of the signal genes.
    pub planted: Vec<String>,
}

fn standard_pairing(n_pairs: usize) -> (Vec<String>, PairingMap) {
    let sample_ids: Vec<String> = (0..n_pairs)
        .flat_map(|i| [format!("A{:02}", i + 1), format!("B{:02}", i + 1)])
        .collect();
    let pairs = (0..n_pairs)
        .map(|i| Pair {
            pair_id: format!("pair{:02}", i + 1),
            sample_a: format!("A{:02}", i + 1),
            sample_b: format!("B{:02}", i + 1),
        })
        .collect();
    (sample_ids, PairingMap { pairs })
}

fn uniform_in(s: &mut RngStream, lo: f64, hi: f64) -> f64 {
    lo + (hi - lo) * s.next_uniform()
}

fn to_count(log_value: f64, depth: f64) -> u64 {
    (log_value.exp() * depth).round().max(0.0) as u64
}

/// Genes `S01..` carry the signal, `N001..` are null. Gene `g` draws from
/// stream `g + 1` of `seed`; stream 0 holds the sample depths.
pub fn planted_fixture(config: &PlantedConfig) -> Result<PlantedFixture> {
    check_open_unit("theta_signal", config.theta_signal)?;
    let n = config.n_pairs;
    let (sample_ids, pairing) = standard_pairing(n);
    let mut depth_stream = RngStream::new(config.seed, 0);
    let depths: Vec<f64> = (0..2 * n)
        .map(|_| uniform_in(&mut depth_stream, -0.25, 0.25).exp())
        .collect();
    let delta = normal_quantile(config.theta_signal)?;
    let mut gene_ids = Vec::new();
    let mut counts = Vec::new();
    let mut planted = Vec::new();
    for g in 0..config.n_signal + config.n_null {
        let signal = g < config.n_signal;
        let id = if signal {
            format!("S{:02}", g + 1)
        } else {
            format!("N{:03}", g - config.n_signal + 1)
        };
        let mut s = RngStream::new(config.seed, g as u64 + 1);
        let base = uniform_in(&mut s, 500f64.ln(), 5000f64.ln());
        let nu: Vec<f64> = (0..n).map(|_| base + 0.5 * s.next_standard_normal()).collect();
        let mu: Vec<f64> = (0..n).map(|_| uniform_in(&mut s, 0.05, 0.4)).collect();
        let direction = if g % 2 == 0 { 1 } else { -1 };
        let spec = NuisanceSpec::new(nu, mu, vec![0.5; n], if signal { delta } else { 0.0 }, direction)?;
        let data = sample_pairs(&spec, &mut s);
        let (a, b) = data.raw().expect("sampled pairs keep raw values");
        let row = (0..n)
            .flat_map(|i| [to_count(a[i], depths[2 * i]), to_count(b[i], depths[2 * i + 1])])
            .collect();
        if signal {
            planted.push(id.clone());
        }
        gene_ids.push(id);
        counts.push(row);
    }
    Ok(PlantedFixture {
        counts: CountMatrix::new(gene_ids, sample_ids, counts)?,
        pairing,
        planted,
    })
}

/// Matrix whose paired samples agree up to small noise while different
/// pairs sit far apart; groups are the two conditions.
pub fn similar_pairs_fixture(
    n_pairs: usize,
    n_genes: usize,
    seed: u64,
) -> Result<(CountMatrix, PairingMap, BTreeMap<String, String>)> {
    let (sample_ids, pairing) = standard_pairing(n_pairs);
    let mut counts = Vec::with_capacity(n_genes);
    for g in 0..n_genes {
        let mut s = RngStream::new(seed, g as u64);
        let base = uniform_in(&mut s, 200f64.ln(), 20_000f64.ln());
        let row = (0..n_pairs)
            .flat_map(|_| {
                let level = base + 1.5 * s.next_standard_normal();
                let a = level + 0.01 * s.next_standard_normal();
                let b = level + 0.01 * s.next_standard_normal();
                [to_count(a, 1.0), to_count(b, 1.0)]
            })
            .collect();
        counts.push(row);
    }
    let gene_ids = (0..n_genes).map(|g| format!("G{:04}", g + 1)).collect();
    let groups = sample_ids.iter().map(|s| (s.clone(), s[..1].to_string())).collect();
    Ok((CountMatrix::new(gene_ids, sample_ids, counts)?, pairing, groups))
}

/// Seeds of the shipped fixture files.
pub const FIXTURE_SEEDS: FixtureSeeds = FixtureSeeds {
    planted: 1,
    null: 2,
    similar: 3,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixtureSeeds {
    pub planted: u64,
    pub null: u64,
    pub similar: u64,
}

/// Writes the example data set into `dir`:
///
/// * `planted_counts.csv`, `planted_pairs.csv`, `planted_genes.txt`
/// * `null_counts.csv`, `null_pairs.csv`
/// * `similar_counts.csv`, `similar_pairs.csv`, `similar_groups.csv`
///
/// Returns the paths written.
pub fn write_fixture_set(dir: &Path, seeds: FixtureSeeds) -> Result<Vec<PathBuf>> {
    let mut written = Vec::new();
    let mut push = |name: &str| {
        let p = dir.join(name);
        written.push(p.clone());
        p
    };
    let planted = planted_fixture(&PlantedConfig::standard(seeds.planted))?;
    planted.counts.save(&push("planted_counts.csv"))?;
    planted.pairing.save(&push("planted_pairs.csv"))?;
    let genes = push("planted_genes.txt");
    std::fs::write(&genes, planted.planted.join("\n") + "\n").map_err(|e| Error::io(&genes, e))?;
    let null = planted_fixture(&PlantedConfig::null(seeds.null))?;
    null.counts.save(&push("null_counts.csv"))?;
    null.pairing.save(&push("null_pairs.csv"))?;
    let (counts, pairing, groups) = similar_pairs_fixture(10, 200, seeds.similar)?;
    counts.save(&push("similar_counts.csv"))?;
    pairing.save(&push("similar_pairs.csv"))?;
    let path = push("similar_groups.csv");
    let file = std::fs::File::create(&path).map_err(|e| Error::io(&path, e))?;
    write_groups(&groups, std::io::BufWriter::new(file))?;
    Ok(written)
}

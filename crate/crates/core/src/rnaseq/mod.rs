//! Paired differential expression on RNA-Seq count matrices.
//!
//! Counts are filtered, scaled by median-of-ratios size factors, and each
//! gene is tested on its paired differences; discoveries are called with
//! Benjamini-Hochberg. A log-difference histogram contrasts how similar
//! paired samples are with how similar same-condition samples are.

mod counts;
mod de;
mod histogram;
mod normalize;
mod synthetic;

pub use counts::{delimiter_for, load_counts, load_groups, load_pairing, write_groups, CountMatrix, Pair, PairingMap};
pub use de::{de_test, DeReport, GeneResult, Transform};
pub use histogram::{auto_bin_edges, heterogeneity_histogram, HistogramSummary};
pub use normalize::{filter_genes, normalize, size_factors, FilterThresholds, NormalizedMatrix};
pub use synthetic::{
    planted_fixture, similar_pairs_fixture, write_fixture_set, FixtureSeeds, PlantedConfig, PlantedFixture,
    FIXTURE_SEEDS,
};

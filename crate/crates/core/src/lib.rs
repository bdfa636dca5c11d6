//! Robust paired two-group testing.
//!
//! The crate compares groups of paired samples whose scale varies from
//! pair to pair. It provides
//!
//! * the randomized sign test (one- and two-sided, exact size), the paired
//!   t-test and the Wilcoxon signed-rank test ([`paired`]);
//! * exact and asymptotic power calculations ([`power`]);
//! * a reproducible Monte Carlo harness for heterogeneous Gaussian pairs
//!   ([`sim`]);
//! * Benjamini-Hochberg FDR control ([`fdr`]) and a paired RNA-Seq
//!   differential-expression pipeline ([`rnaseq`]).
//!
//! The numeric substrate ([`special`], [`dist`], [`rng`]) has no external
//! dependencies.

pub mod cli;
pub mod dist;
pub mod error;
pub mod fdr;
pub mod paired;
pub mod power;
pub mod rnaseq;
pub mod rng;
pub mod sim;
pub mod special;

pub use error::{Error, Result};
pub use paired::{Method, PairedData, Sidedness, TestReport, ZeroPolicy};

//! The `pairtest` command line.
//!
//! Exit codes: 0 on success, 2 when the input data or a computation is
//! rejected, 64 on a usage error.

mod figures;
mod input;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::json;

pub use figures::{figure_plan, run_plan, SimulationOutput, SimulationPlan, Sweep, FIGURES};
pub use input::{read_numeric_table, read_paired, read_thetas};

use crate::error::{Error, Result};
use crate::paired::{paired_t_test, sign_test, wilcoxon_signed_rank, Method, Sidedness, ZeroPolicy};
use crate::power::{
    asymptotic_power_paired_t, asymptotic_power_sign, delta_from_theta, exact_power_sign, exact_power_sign_hetero,
    near_optimality_bound, theta_from_delta,
};
use crate::rnaseq::{
    auto_bin_edges, de_test, filter_genes, heterogeneity_histogram, load_counts, load_groups, load_pairing, normalize,
    size_factors, FilterThresholds, HistogramSummary, Transform,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DATA: i32 = 2;
pub const EXIT_USAGE: i32 = 64;

/// Environment variable holding the default seed of `simulate`.
pub const SEED_ENV: &str = "PAIRTEST_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Parser)]
#[command(
    name = "pairtest",
    version,
    about = "Robust paired two-group tests, power analysis and paired RNA-Seq DE"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one paired test on a file of differences and print the report as JSON.
    Test(TestArgs),
    /// Exact or large-sample power, or the sign test's near-optimality bound.
    Power(PowerArgs),
    /// Monte Carlo power curves on heterogeneous Gaussian pairs.
    Simulate(SimulateArgs),
    /// Paired differential expression on a count matrix.
    De(DeArgs),
    /// Log-difference histograms of within-pair and within-group heterogeneity.
    VizHet(VizHetArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Sided {
    One,
    Two,
}

impl From<Sided> for Sidedness {
    fn from(s: Sided) -> Self {
        match s {
            Sided::One => Sidedness::OneSidedGreater,
            Sided::Two => Sidedness::TwoSided,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Sign,
    Ttest,
    Wilcoxon,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Sign => Method::Sign,
            MethodArg::Ttest => Method::PairedT,
            MethodArg::Wilcoxon => Method::Wilcoxon,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ZeroArg {
    Error,
    Drop,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    /// CSV with one column of differences `y`, or two columns `a,b` (y = b - a). A header row is optional.
    #[arg(long)]
    pub input: PathBuf,
    /// Test to run.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// One-sided (H1: theta > 1/2) or two-sided alternative.
    #[arg(long, value_enum, default_value_t = Sided::Two)]
    pub sided: Sided,
    /// What to do with zero differences (sign and Wilcoxon tests).
    #[arg(long, value_enum, default_value_t = ZeroArg::Error)]
    pub zero_policy: ZeroArg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PowerMode {
    Asymptotic,
    Exact,
    Bound,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Which calculation to run.
    #[arg(long, value_enum)]
    pub mode: PowerMode,
    /// Number of pairs (implied by --thetas when that is given).
    #[arg(long, required_unless_present = "thetas")]
    pub n: Option<u64>,
    /// Standardized shift; theta = Phi(delta).
    #[arg(long, conflicts_with = "theta", allow_hyphen_values = true)]
    pub delta: Option<f64>,
    /// Tendency of shift P(Y > 0).
    #[arg(long)]
    pub theta: Option<f64>,
    /// Significance level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Coefficient of variation of the scales, for the paired t-test formula.
    #[arg(long, default_value_t = 0.0)]
    pub cv: f64,
    /// One theta per pair (exact mode, heterogeneous tendencies).
    #[arg(long, conflicts_with_all = ["delta", "theta", "n"])]
    pub thetas: Option<PathBuf>,
    /// Alternative of the exact sign test.
    #[arg(long, value_enum, default_value_t = Sided::Two)]
    pub sided: Sided,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Preset reproducing one panel: 3a (magnitudes), 3b (two-group c_v sweep), 3c (five-group c_v sweep).
    #[arg(long, required_unless_present = "custom", conflicts_with = "custom")]
    pub figure: Option<String>,
    /// JSON simulation plan (see schemas/simulation_plan.schema.json).
    #[arg(long)]
    pub custom: Option<PathBuf>,
    /// Replicates per grid point; overrides the preset or plan.
    #[arg(long)]
    pub reps: Option<u64>,
    /// Random seed; defaults to $PAIRTEST_SEED, then 1.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV (x, method, power, std_error, replicates); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the curve, crossing and invariance report as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// Worker threads (results do not depend on it).
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TransformArg {
    Identity,
    Log2,
}

impl From<TransformArg> for Transform {
    fn from(t: TransformArg) -> Self {
        match t {
            TransformArg::Identity => Transform::Identity,
            TransformArg::Log2 => Transform::Log2Shifted,
        }
    }
}

#[derive(Debug, Args)]
pub struct DeArgs {
    /// Count matrix (TSV or CSV): first column gene_id, header of sample ids.
    #[arg(long)]
    pub counts: PathBuf,
    /// Pairing CSV with header pair_id,sample_A,sample_B.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Test applied to each gene.
    #[arg(long, value_enum)]
    pub method: MethodArg,
    /// Benjamini-Hochberg FDR level.
    #[arg(long, default_value_t = 0.1)]
    pub fdr: f64,
    /// Transform before differencing; identity for sign, log2(x + 0.5) otherwise.
    #[arg(long, value_enum)]
    pub transform: Option<TransformArg>,
    /// Drop genes whose total count is below this.
    #[arg(long, default_value_t = 50)]
    pub min_total: u64,
    /// Drop genes with any count below this.
    #[arg(long, default_value_t = 2)]
    pub min_count: u64,
    /// Results CSV (gene_id, method, statistic, p_value, p_adjusted, discovery); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the results as JSON.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VizHetArgs {
    /// Count matrix (TSV or CSV).
    #[arg(long)]
    pub counts: PathBuf,
    /// Pairing CSV with header pair_id,sample_A,sample_B.
    #[arg(long)]
    pub pairs: PathBuf,
    /// Group CSV with header sample_id,group.
    #[arg(long)]
    pub groups: PathBuf,
    /// Number of equal-width bins spanning the observed log-differences.
    #[arg(long, default_value_t = 30, conflicts_with = "edges")]
    pub bins: usize,
    /// Explicit comma-separated bin edges on the natural-log scale.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub edges: Option<Vec<f64>>,
    /// Use raw counts instead of size-factor normalized values.
    #[arg(long)]
    pub raw: bool,
    /// Histogram CSV (bin_left, bin_right, within_pair_density, within_group_density); stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the command,
/// returning the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}

enum Failure {
    Usage(String),
    Data(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Data(e)
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure::Data(Error::Pipeline(format!("writing output: {e}")))
}

fn dispatch(command: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    match command {
        Command::Test(a) => cmd_test(&a, stdout),
        Command::Power(a) => cmd_power(&a, stdout),
        Command::Simulate(a) => cmd_simulate(&a, stdout, stderr),
        Command::De(a) => cmd_de(&a, stdout, stderr),
        Command::VizHet(a) => cmd_viz_het(&a, stdout, stderr),
    }
}

fn print_json<T: Serialize>(value: &T, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(Error::from)?;
    writeln!(stdout, "{text}").map_err(io_failure)
}

fn cmd_test(a: &TestArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let data = read_paired(&a.input)?;
    let sided = Sidedness::from(a.sided);
    let zeros = match a.zero_policy {
        ZeroArg::Error => ZeroPolicy::Error,
        ZeroArg::Drop => ZeroPolicy::Drop,
    };
    let report = match Method::from(a.method) {
        Method::Sign => sign_test(&data, a.alpha, sided, zeros)?,
        Method::PairedT => paired_t_test(&data, a.alpha, sided)?,
        Method::Wilcoxon => wilcoxon_signed_rank(&data, a.alpha, sided, zeros)?,
    };
    print_json(&report, stdout)
}

fn cmd_power(a: &PowerArgs, stdout: &mut dyn Write) -> std::result::Result<(), Failure> {
    let thetas = a.thetas.as_deref().map(read_thetas).transpose()?;
    let n = match (&thetas, a.n) {
        (Some(t), _) => t.len() as u64,
        (None, Some(n)) => n,
        (None, None) => return Err(Failure::Usage("--n is required".into())),
    };
    let effect = match (a.delta, a.theta) {
        (Some(d), None) => Some((d, theta_from_delta(d)?)),
        (None, Some(t)) => Some((delta_from_theta(t)?, t)),
        (None, None) => None,
        (Some(_), Some(_)) => return Err(Failure::Usage("give either --delta or --theta, not both".into())),
    };
    let need_effect = || Failure::Usage("--delta or --theta is required for this mode".into());
    let out = match a.mode {
        PowerMode::Bound => {
            let (delta, theta) = effect.ok_or_else(need_effect)?;
            json!({
                "mode": "bound",
                "n": n,
                "delta": delta,
                "theta": theta,
                "alpha": a.alpha,
                "bound": near_optimality_bound(n, delta, a.alpha)?,
            })
        }
        PowerMode::Asymptotic => {
            let (delta, theta) = effect.ok_or_else(need_effect)?;
            json!({
                "mode": "asymptotic",
                "n": n,
                "delta": delta,
                "theta": theta,
                "alpha": a.alpha,
                "cv": a.cv,
                "results": [
                    {"method": Method::Sign, "estimate": asymptotic_power_sign(n, delta, a.alpha)?},
                    {"method": Method::PairedT, "estimate": asymptotic_power_paired_t(n, delta, a.alpha, a.cv)?},
                ],
            })
        }
        PowerMode::Exact => {
            let sided = Sidedness::from(a.sided);
            match &thetas {
                Some(t) => json!({
                    "mode": "exact",
                    "n": n,
                    "alpha": a.alpha,
                    "sidedness": sided,
                    "results": [{"method": Method::Sign, "estimate": exact_power_sign_hetero(t, a.alpha, sided)?}],
                }),
                None => {
                    let (delta, theta) = effect.ok_or_else(need_effect)?;
                    json!({
                        "mode": "exact",
                        "n": n,
                        "delta": delta,
                        "theta": theta,
                        "alpha": a.alpha,
                        "sidedness": sided,
                        "results": [{"method": Method::Sign, "estimate": exact_power_sign(n, theta, a.alpha, sided)?}],
                    })
                }
            }
        }
    };
    print_json(&out, stdout)
}

fn default_seed() -> std::result::Result<u64, Failure> {
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Failure::Usage(format!("{SEED_ENV} must be an unsigned integer, got `{v}`"))),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

fn load_plan(path: &Path) -> Result<SimulationPlan> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })
}

fn cmd_simulate(a: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let seed = match a.seed {
        Some(s) => s,
        None => default_seed()?,
    };
    let mut plan = match (&a.figure, &a.custom) {
        (Some(f), None) => figure_plan(f, seed).map_err(|e| Failure::Usage(e.to_string()))?,
        (None, Some(path)) => {
            let mut p = load_plan(path)?;
            if a.seed.is_some() {
                p.config.seed = seed;
            }
            p
        }
        _ => return Err(Failure::Usage("give exactly one of --figure or --custom".into())),
    };
    if let Some(r) = a.reps {
        plan.config.replicates = r;
    }
    let output = match a.threads {
        Some(t) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(t)
                .build()
                .map_err(|e| Failure::Usage(format!("cannot build a {t}-thread pool: {e}")))?;
            pool.install(|| run_plan(&plan))?
        }
        None => run_plan(&plan)?,
    };
    for s in &output.curve.skipped {
        writeln!(stderr, "warning: skipped x = {}: {}", s.x, s.reason).map_err(io_failure)?;
    }
    if let (Some((ma, mb)), Some(c)) = (plan.crossing, output.crossing) {
        writeln!(
            stderr,
            "crossing of {ma} and {mb}: {:.4} ({} sign change{})",
            c.at,
            c.sign_changes,
            if c.sign_changes == 1 { "" } else { "s" }
        )
        .map_err(io_failure)?;
    } else if let Some((ma, mb)) = plan.crossing {
        writeln!(stderr, "no crossing of {ma} and {mb} on the grid").map_err(io_failure)?;
    }
    if let Some(inv) = &output.invariance {
        for s in &inv.spreads {
            writeln!(
                stderr,
                "{}: max difference across magnitudes {:.4} ({:.2} combined std errors){}",
                s.method,
                s.max_diff,
                s.max_z,
                if s.flagged { ", FLAGGED" } else { "" }
            )
            .map_err(io_failure)?;
        }
    }
    match &a.out {
        Some(path) => output.curve.save_csv(path)?,
        None => output.curve.write_csv(&mut *stdout)?,
    }
    if let Some(path) = &a.json {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), &output).map_err(Error::from)?;
    }
    Ok(())
}

fn cmd_de(a: &DeArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let counts = load_counts(&a.counts)?;
    let pairing = load_pairing(&a.pairs)?;
    let filtered = filter_genes(
        &counts,
        FilterThresholds {
            min_total: a.min_total,
            min_count: a.min_count,
        },
    );
    let factors = size_factors(&filtered)?;
    let norm = normalize(&filtered, &factors)?;
    let report = de_test(
        &norm,
        &pairing,
        a.method.into(),
        a.fdr,
        a.transform.map(Transform::from),
    )?;
    let summary = format!(
        "genes: {} loaded, {} after filtering, {} tested, {} untestable; discoveries at FDR {}: {}",
        counts.n_genes(),
        filtered.n_genes(),
        report.genes_tested,
        report.genes_failed,
        a.fdr,
        report.discoveries
    );
    match &a.out {
        Some(path) => {
            report.save_csv(path)?;
            writeln!(stdout, "{summary}").map_err(io_failure)?;
        }
        None => {
            report.write_csv(&mut *stdout)?;
            writeln!(stderr, "{summary}").map_err(io_failure)?;
        }
    }
    if let Some(path) = &a.json {
        report.save_json(path)?;
    }
    Ok(())
}

fn cmd_viz_het(a: &VizHetArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> std::result::Result<(), Failure> {
    let counts = load_counts(&a.counts)?;
    let pairing = load_pairing(&a.pairs)?;
    let groups = load_groups(&a.groups)?;
    let factors = if a.raw {
        vec![1.0; counts.n_samples()]
    } else {
        size_factors(&counts)?
    };
    let values = normalize(&counts, &factors)?;
    let edges = match &a.edges {
        Some(e) => e.clone(),
        None => auto_bin_edges(&values, &pairing, &groups, a.bins)?,
    };
    let h = heterogeneity_histogram(&values, &pairing, &groups, &edges)?;
    for w in &h.warnings {
        writeln!(stderr, "warning: {w}").map_err(io_failure)?;
    }
    let mode = |d: &[f64]| HistogramSummary::mode_bin(d).map(|k| 0.5 * (edges[k] + edges[k + 1]));
    let summary = format!(
        "{} within-pair and {} within-group comparisons; density modes at ln|diff| = {:.3} (pairs), {:.3} (groups)",
        h.pair_comparisons,
        h.group_comparisons,
        mode(&h.within_pair_density).unwrap_or(f64::NAN),
        mode(&h.within_group_density).unwrap_or(f64::NAN)
    );
    match &a.out {
        Some(path) => {
            h.save_csv(path)?;
            writeln!(stdout, "{summary}").map_err(io_failure)?;
        }
        None => {
            h.write_csv(&mut *stdout)?;
            writeln!(stderr, "{summary}").map_err(io_failure)?;
        }
    }
    Ok(())
}

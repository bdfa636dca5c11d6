//! C ABI for `pairtest`.
//!
//! Every fallible function returns a [`PairtestStatus`]; on failure the
//! message is available from [`pairtest_last_error_message`] on the same
//! thread. Results are written through out-pointers. Handles are opaque and
//! must be released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use pairtest::paired::{paired_t_test, sign_test, wilcoxon_signed_rank};
use pairtest::power::{
    asymptotic_power_paired_t, asymptotic_power_sign, exact_power_sign, exact_power_sign_hetero, near_optimality_bound,
};
use pairtest::rnaseq::{de_test, filter_genes, load_counts, load_pairing, normalize, size_factors, DeReport};
use pairtest::rng::RngStream;
use pairtest::sim::{estimate_for, mc_power, ExperimentConfig, NuisanceSpec, SignDecision};
use pairtest::{Error, Method, PairedData, Sidedness, ZeroPolicy};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairtestStatus {
    Ok = 0,
    NullPointer = 1,
    /// Argument outside its domain, or an unknown enum value.
    InvalidArgument = 2,
    /// The statistic is undefined for the data (constant or all-zero).
    Degenerate = 3,
    /// A zero difference under the `error` zero policy.
    ZeroDifference = 4,
    /// Unreadable or malformed input file.
    Io = 5,
    Parse = 6,
    Pipeline = 7,
    /// Index past the end of a result set.
    OutOfRange = 8,
    /// A Rust panic was caught at the boundary.
    Internal = 9,
}

/// Method codes.
pub const PAIRTEST_METHOD_SIGN: i32 = 0;
pub const PAIRTEST_METHOD_PAIRED_T: i32 = 1;
pub const PAIRTEST_METHOD_WILCOXON: i32 = 2;

pub const PAIRTEST_TWO_SIDED: i32 = 0;
/// `H1: P(Y > 0) > 1/2`.
pub const PAIRTEST_ONE_SIDED: i32 = 1;

pub const PAIRTEST_ZEROS_ERROR: i32 = 0;
pub const PAIRTEST_ZEROS_DROP: i32 = 1;

/// Outcome of one paired test.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairtestReport {
    pub n: u64,
    pub statistic: f64,
    pub critical_value: f64,
    pub randomization_prob: f64,
    pub reject_probability: f64,
    pub p_value: f64,
}

/// One gene of a differential-expression run. Missing values are NaN.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PairtestGene {
    pub n_used: u64,
    pub zeros_dropped: u64,
    pub statistic: f64,
    pub p_value: f64,
    pub p_adjusted: f64,
    pub discovery: bool,
}

/// Reproducible counter-based random stream.
pub struct PairtestRng {
    stream: RngStream,
}

/// Results of a differential-expression run.
pub struct PairtestDe {
    report: DeReport,
    ids: Vec<CString>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> PairtestStatus {
    match e {
        Error::Domain(_) | Error::Invalid(_) | Error::UnreachableCv { .. } => PairtestStatus::InvalidArgument,
        Error::Degenerate(_) => PairtestStatus::Degenerate,
        Error::ZeroDifference { .. } => PairtestStatus::ZeroDifference,
        Error::Io { .. } => PairtestStatus::Io,
        Error::Parse { .. } | Error::Csv(_) | Error::Json(_) => PairtestStatus::Parse,
        Error::Pipeline(_) => PairtestStatus::Pipeline,
    }
}

struct Fail(PairtestStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn invalid(msg: impl Into<String>) -> Fail {
    Fail(PairtestStatus::InvalidArgument, msg.into())
}

fn null(name: &str) -> Fail {
    Fail(PairtestStatus::NullPointer, format!("`{name}` is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> PairtestStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => PairtestStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal error".into());
            PairtestStatus::Internal
        }
    }
}

fn method_of(m: i32) -> Result<Method, Fail> {
    match m {
        PAIRTEST_METHOD_SIGN => Ok(Method::Sign),
        PAIRTEST_METHOD_PAIRED_T => Ok(Method::PairedT),
        PAIRTEST_METHOD_WILCOXON => Ok(Method::Wilcoxon),
        other => Err(invalid(format!("unknown method {other}"))),
    }
}

fn sided_of(s: i32) -> Result<Sidedness, Fail> {
    match s {
        PAIRTEST_TWO_SIDED => Ok(Sidedness::TwoSided),
        PAIRTEST_ONE_SIDED => Ok(Sidedness::OneSidedGreater),
        other => Err(invalid(format!("unknown sidedness {other}"))),
    }
}

fn zeros_of(z: i32) -> Result<ZeroPolicy, Fail> {
    match z {
        PAIRTEST_ZEROS_ERROR => Ok(ZeroPolicy::Error),
        PAIRTEST_ZEROS_DROP => Ok(ZeroPolicy::Drop),
        other => Err(invalid(format!("unknown zero policy {other}"))),
    }
}

unsafe fn slice<'a, T>(ptr: *const T, len: usize, name: &str) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts(ptr, len))
}

unsafe fn slice_mut<'a, T>(ptr: *mut T, len: usize, name: &str) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if ptr.is_null() {
        return Err(null(name));
    }
    Ok(std::slice::from_raw_parts_mut(ptr, len))
}

unsafe fn out<'a, T>(ptr: *mut T, name: &str) -> Result<&'a mut T, Fail> {
    ptr.as_mut().ok_or_else(|| null(name))
}

unsafe fn path<'a>(ptr: *const c_char, name: &str) -> Result<&'a Path, Fail> {
    if ptr.is_null() {
        return Err(null(name));
    }
    let s = CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| invalid(format!("`{name}` is not valid UTF-8")))?;
    Ok(Path::new(s))
}

/// Library version, a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pairtest_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failure on this thread, or NULL. The pointer stays
/// valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn pairtest_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Runs one paired test on `n` differences.
///
/// # Safety
/// `diffs` must point to `n` readable doubles and `report` to writable
/// storage for one [`PairtestReport`].
#[no_mangle]
pub unsafe extern "C" fn pairtest_test(
    method: i32,
    diffs: *const f64,
    n: usize,
    alpha: f64,
    sided: i32,
    zero_policy: i32,
    report: *mut PairtestReport,
) -> PairtestStatus {
    guard(|| {
        let method = method_of(method)?;
        let sided = sided_of(sided)?;
        let zeros = zeros_of(zero_policy)?;
        let data = PairedData::from_diffs(slice(diffs, n, "diffs")?.to_vec())?;
        let out = out(report, "report")?;
        let r = match method {
            Method::Sign => sign_test(&data, alpha, sided, zeros)?,
            Method::PairedT => paired_t_test(&data, alpha, sided)?,
            Method::Wilcoxon => wilcoxon_signed_rank(&data, alpha, sided, zeros)?,
        };
        *out = PairtestReport {
            n: r.n as u64,
            statistic: r.statistic,
            critical_value: r.critical_value,
            randomization_prob: r.randomization_prob,
            reject_probability: r.reject_probability,
            p_value: r.p_value,
        };
        Ok(())
    })
}

/// Exact power of the randomized sign test with a common `theta`.
///
/// # Safety
/// `power` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pairtest_power_sign_exact(
    n: u64,
    theta: f64,
    alpha: f64,
    sided: i32,
    power: *mut f64,
) -> PairtestStatus {
    guard(|| {
        let sided = sided_of(sided)?;
        let out = out(power, "power")?;
        *out = exact_power_sign(n, theta, alpha, sided)?.value;
        Ok(())
    })
}

/// Exact power when pair `i` has its own `thetas[i]`.
///
/// # Safety
/// `thetas` must point to `n` readable doubles and `power` be writable.
#[no_mangle]
pub unsafe extern "C" fn pairtest_power_sign_hetero(
    thetas: *const f64,
    n: usize,
    alpha: f64,
    sided: i32,
    power: *mut f64,
) -> PairtestStatus {
    guard(|| {
        let sided = sided_of(sided)?;
        let thetas = slice(thetas, n, "thetas")?;
        let out = out(power, "power")?;
        *out = exact_power_sign_hetero(thetas, alpha, sided)?.value;
        Ok(())
    })
}

/// Large-sample two-sided powers of the sign test and of the paired t-test
/// at scale coefficient of variation `cv`.
///
/// # Safety
/// `sign_power` and `t_power` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pairtest_power_asymptotic(
    n: u64,
    delta: f64,
    alpha: f64,
    cv: f64,
    sign_power: *mut f64,
    t_power: *mut f64,
) -> PairtestStatus {
    guard(|| {
        let s = asymptotic_power_sign(n, delta, alpha)?.value;
        let t = asymptotic_power_paired_t(n, delta, alpha, cv)?.value;
        *out(sign_power, "sign_power")? = s;
        *out(t_power, "t_power")? = t;
        Ok(())
    })
}

/// Largest worst-case power gain of any level-`alpha` test over the
/// two-sided sign test.
///
/// # Safety
/// `bound` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pairtest_near_optimality_bound(
    n: u64,
    delta: f64,
    alpha: f64,
    bound: *mut f64,
) -> PairtestStatus {
    guard(|| {
        *out(bound, "bound")? = near_optimality_bound(n, delta, alpha)?;
        Ok(())
    })
}

/// Monte Carlo power of the three tests on Gaussian pairs with scales
/// `mu[0..n]`. Writes one value per method, in `PAIRTEST_METHOD_*` order,
/// to `power[0..3]` and `std_error[0..3]`. The sign test is randomized.
///
/// # Safety
/// `mu` must point to `n` readable doubles; `power` and `std_error` to
/// three writable doubles each.
#[no_mangle]
pub unsafe extern "C" fn pairtest_mc_power(
    mu: *const f64,
    n: usize,
    delta: f64,
    alpha: f64,
    sided: i32,
    replicates: u64,
    seed: u64,
    power: *mut f64,
    std_error: *mut f64,
) -> PairtestStatus {
    guard(|| {
        let sidedness = sided_of(sided)?;
        let mu = slice(mu, n, "mu")?.to_vec();
        let power = slice_mut(power, 3, "power")?;
        let std_error = slice_mut(std_error, 3, "std_error")?;
        let config = ExperimentConfig {
            n,
            delta,
            alpha,
            replicates,
            sidedness,
            sign_decision: SignDecision::Randomized,
            ..ExperimentConfig::standard(seed)
        };
        let spec = NuisanceSpec::with_scales(mu, delta)?;
        let est = mc_power(&config, &spec)?;
        for (k, m) in [Method::Sign, Method::PairedT, Method::Wilcoxon]
            .into_iter()
            .enumerate()
        {
            let e = estimate_for(&est, m).expect("all methods estimated");
            power[k] = e.value;
            std_error[k] = e.std_error;
        }
        Ok(())
    })
}

/// Benjamini-Hochberg at level `q`; `reject[i]` is set to 1 or 0.
///
/// # Safety
/// `pvalues` must point to `m` readable doubles and `reject` to `m`
/// writable bytes.
#[no_mangle]
pub unsafe extern "C" fn pairtest_bh_reject(pvalues: *const f64, m: usize, q: f64, reject: *mut u8) -> PairtestStatus {
    guard(|| {
        let p = slice(pvalues, m, "pvalues")?;
        let dst = slice_mut(reject, m, "reject")?;
        let r = pairtest::fdr::bh_reject(p, q)?;
        for (d, x) in dst.iter_mut().zip(r) {
            *d = u8::from(x);
        }
        Ok(())
    })
}

/// BH-adjusted p-values.
///
/// # Safety
/// `pvalues` must point to `m` readable doubles and `adjusted` to `m`
/// writable doubles. The two may alias.
#[no_mangle]
pub unsafe extern "C" fn pairtest_bh_adjust(pvalues: *const f64, m: usize, adjusted: *mut f64) -> PairtestStatus {
    guard(|| {
        let p = slice(pvalues, m, "pvalues")?.to_vec();
        let dst = slice_mut(adjusted, m, "adjusted")?;
        dst.copy_from_slice(&pairtest::fdr::bh_adjust(&p)?);
        Ok(())
    })
}

/// Opens stream `stream_id` of `seed`.
///
/// # Safety
/// `rng` must be writable; the handle written there is freed with
/// [`pairtest_rng_free`].
#[no_mangle]
pub unsafe extern "C" fn pairtest_rng_new(seed: u64, stream_id: u64, rng: *mut *mut PairtestRng) -> PairtestStatus {
    guard(|| {
        let dst = out(rng, "rng")?;
        *dst = Box::into_raw(Box::new(PairtestRng {
            stream: RngStream::new(seed, stream_id),
        }));
        Ok(())
    })
}

/// # Safety
/// `rng` is NULL or a live handle from [`pairtest_rng_new`].
#[no_mangle]
pub unsafe extern "C" fn pairtest_rng_free(rng: *mut PairtestRng) {
    if !rng.is_null() {
        drop(Box::from_raw(rng));
    }
}

/// Fills `out[0..len]` with uniforms on `(0, 1)`.
///
/// # Safety
/// `rng` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pairtest_rng_uniform(rng: *mut PairtestRng, out: *mut f64, len: usize) -> PairtestStatus {
    guard(|| {
        let r = rng.as_mut().ok_or_else(|| null("rng"))?;
        for x in slice_mut(out, len, "out")? {
            *x = r.stream.next_uniform();
        }
        Ok(())
    })
}

/// Fills `out[0..len]` with standard normals.
///
/// # Safety
/// `rng` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pairtest_rng_normal(rng: *mut PairtestRng, out: *mut f64, len: usize) -> PairtestStatus {
    guard(|| {
        let r = rng.as_mut().ok_or_else(|| null("rng"))?;
        for x in slice_mut(out, len, "out")? {
            *x = r.stream.next_standard_normal();
        }
        Ok(())
    })
}

/// Loads a count matrix and a pairing file, filters genes, normalizes with
/// size factors and tests every gene. `transform` is -1 for the method's
/// default, 0 for identity and 1 for `log2(x + 0.5)`.
///
/// # Safety
/// `counts_path` and `pairs_path` must be NUL-terminated strings; `de` must
/// be writable. The handle is freed with [`pairtest_de_free`].
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_run(
    counts_path: *const c_char,
    pairs_path: *const c_char,
    method: i32,
    fdr: f64,
    transform: i32,
    min_total: u64,
    min_count: u64,
    de: *mut *mut PairtestDe,
) -> PairtestStatus {
    use pairtest::rnaseq::{FilterThresholds, Transform};
    guard(|| {
        let method = method_of(method)?;
        let transform = match transform {
            -1 => None,
            0 => Some(Transform::Identity),
            1 => Some(Transform::Log2Shifted),
            other => return Err(invalid(format!("unknown transform {other}"))),
        };
        let dst = out(de, "de")?;
        let counts = load_counts(path(counts_path, "counts_path")?)?;
        let pairing = load_pairing(path(pairs_path, "pairs_path")?)?;
        let kept = filter_genes(&counts, FilterThresholds { min_total, min_count });
        let norm = normalize(&kept, &size_factors(&kept)?)?;
        let report = de_test(&norm, &pairing, method, fdr, transform)?;
        let ids = report
            .results
            .iter()
            .map(|g| CString::new(g.gene_id.as_str()).map_err(|_| invalid("gene id contains NUL")))
            .collect::<Result<_, _>>()?;
        *dst = Box::into_raw(Box::new(PairtestDe { report, ids }));
        Ok(())
    })
}

/// # Safety
/// `de` is NULL or a live handle from [`pairtest_de_run`].
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_free(de: *mut PairtestDe) {
    if !de.is_null() {
        drop(Box::from_raw(de));
    }
}

/// Number of genes in the result, or 0 for NULL.
///
/// # Safety
/// `de` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_len(de: *const PairtestDe) -> usize {
    de.as_ref().map_or(0, |d| d.report.results.len())
}

/// Number of discoveries, or 0 for NULL.
///
/// # Safety
/// `de` is NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_discoveries(de: *const PairtestDe) -> usize {
    de.as_ref().map_or(0, |d| d.report.discoveries)
}

/// Gene `index`. `gene_id` receives a pointer owned by the handle.
///
/// # Safety
/// `de` must be a live handle; `gene` and `gene_id` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_gene(
    de: *const PairtestDe,
    index: usize,
    gene: *mut PairtestGene,
    gene_id: *mut *const c_char,
) -> PairtestStatus {
    guard(|| {
        let d = de.as_ref().ok_or_else(|| null("de"))?;
        let g = d.report.results.get(index).ok_or_else(|| {
            Fail(
                PairtestStatus::OutOfRange,
                format!("index {index} out of range for {} genes", d.report.results.len()),
            )
        })?;
        let gene = out(gene, "gene")?;
        let gene_id = out(gene_id, "gene_id")?;
        *gene = PairtestGene {
            n_used: g.n_used as u64,
            zeros_dropped: g.zeros_dropped as u64,
            statistic: g.statistic.unwrap_or(f64::NAN),
            p_value: g.p_value.unwrap_or(f64::NAN),
            p_adjusted: g.p_adjusted.unwrap_or(f64::NAN),
            discovery: g.discovery,
        };
        *gene_id = d.ids[index].as_ptr();
        Ok(())
    })
}

/// Writes the result table as CSV to `path`.
///
/// # Safety
/// `de` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn pairtest_de_save_csv(de: *const PairtestDe, csv_path: *const c_char) -> PairtestStatus {
    guard(|| {
        let d = de.as_ref().ok_or_else(|| null("de"))?;
        d.report.save_csv(path(csv_path, "csv_path")?)?;
        Ok(())
    })
}

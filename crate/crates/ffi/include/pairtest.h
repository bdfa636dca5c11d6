#ifndef PAIRTEST_H
#define PAIRTEST_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Method codes.
#define PAIRTEST_METHOD_SIGN 0

#define PAIRTEST_METHOD_PAIRED_T 1

#define PAIRTEST_METHOD_WILCOXON 2

#define PAIRTEST_TWO_SIDED 0

// `H1: P(Y > 0) > 1/2`.
#define PAIRTEST_ONE_SIDED 1

#define PAIRTEST_ZEROS_ERROR 0

#define PAIRTEST_ZEROS_DROP 1

// Status code returned by every fallible call.
typedef enum PairtestStatus {
  PAIRTEST_STATUS_OK = 0,
  PAIRTEST_STATUS_NULL_POINTER = 1,
  // Argument outside its domain, or an unknown enum value.
  PAIRTEST_STATUS_INVALID_ARGUMENT = 2,
  // The statistic is undefined for the data (constant or all-zero).
  PAIRTEST_STATUS_DEGENERATE = 3,
  // A zero difference under the `error` zero policy.
  PAIRTEST_STATUS_ZERO_DIFFERENCE = 4,
  // Unreadable or malformed input file.
  PAIRTEST_STATUS_IO = 5,
  PAIRTEST_STATUS_PARSE = 6,
  PAIRTEST_STATUS_PIPELINE = 7,
  // Index past the end of a result set.
  PAIRTEST_STATUS_OUT_OF_RANGE = 8,
  // A Rust panic was caught at the boundary.
  PAIRTEST_STATUS_INTERNAL = 9,
} PairtestStatus;

// Results of a differential-expression run.
typedef struct PairtestDe PairtestDe;

// Reproducible counter-based random stream.
typedef struct PairtestRng PairtestRng;

// Outcome of one paired test.
typedef struct PairtestReport {
  uint64_t n;
  double statistic;
  double critical_value;
  double randomization_prob;
  double reject_probability;
  double p_value;
} PairtestReport;

// One gene of a differential-expression run. Missing values are NaN.
typedef struct PairtestGene {
  uint64_t n_used;
  uint64_t zeros_dropped;
  double statistic;
  double p_value;
  double p_adjusted;
  bool discovery;
} PairtestGene;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version, a static NUL-terminated string.
const char *pairtest_version(void);

// Message of the last failure on this thread, or NULL. The pointer stays
// valid until the next failing call on the same thread.
const char *pairtest_last_error_message(void);

// Runs one paired test on `n` differences.
//
// # Safety
// `diffs` must point to `n` readable doubles and `report` to writable
// storage for one [`PairtestReport`].
enum PairtestStatus pairtest_test(int32_t method,
                                  const double *diffs,
                                  size_t n,
                                  double alpha,
                                  int32_t sided,
                                  int32_t zero_policy,
                                  struct PairtestReport *report);

// Exact power of the randomized sign test with a common `theta`.
//
// # Safety
// `power` must be writable.
enum PairtestStatus pairtest_power_sign_exact(uint64_t n,
                                              double theta,
                                              double alpha,
                                              int32_t sided,
                                              double *power);

// Exact power when pair `i` has its own `thetas[i]`.
//
// # Safety
// `thetas` must point to `n` readable doubles and `power` be writable.
enum PairtestStatus pairtest_power_sign_hetero(const double *thetas,
                                               size_t n,
                                               double alpha,
                                               int32_t sided,
                                               double *power);

// Large-sample two-sided powers of the sign test and of the paired t-test
// at scale coefficient of variation `cv`.
//
// # Safety
// `sign_power` and `t_power` must be writable.
enum PairtestStatus pairtest_power_asymptotic(uint64_t n,
                                              double delta,
                                              double alpha,
                                              double cv,
                                              double *sign_power,
                                              double *t_power);

// Largest worst-case power gain of any level-`alpha` test over the
// two-sided sign test.
//
// # Safety
// `bound` must be writable.
enum PairtestStatus pairtest_near_optimality_bound(uint64_t n,
                                                   double delta,
                                                   double alpha,
                                                   double *bound);

// Monte Carlo power of the three tests on Gaussian pairs with scales
// `mu[0..n]`. Writes one value per method, in `PAIRTEST_METHOD_*` order,
// to `power[0..3]` and `std_error[0..3]`. The sign test is randomized.
//
// # Safety
// `mu` must point to `n` readable doubles; `power` and `std_error` to
// three writable doubles each.
enum PairtestStatus pairtest_mc_power(const double *mu,
                                      size_t n,
                                      double delta,
                                      double alpha,
                                      int32_t sided,
                                      uint64_t replicates,
                                      uint64_t seed,
                                      double *power,
                                      double *std_error);

// Benjamini-Hochberg at level `q`; `reject[i]` is set to 1 or 0.
//
// # Safety
// `pvalues` must point to `m` readable doubles and `reject` to `m`
// writable bytes.
enum PairtestStatus pairtest_bh_reject(const double *pvalues, size_t m, double q, uint8_t *reject);

// BH-adjusted p-values.
//
// # Safety
// `pvalues` must point to `m` readable doubles and `adjusted` to `m`
// writable doubles. The two may alias.
enum PairtestStatus pairtest_bh_adjust(const double *pvalues, size_t m, double *adjusted);

// Opens stream `stream_id` of `seed`.
//
// # Safety
// `rng` must be writable; the handle written there is freed with
// [`pairtest_rng_free`].
enum PairtestStatus pairtest_rng_new(uint64_t seed, uint64_t stream_id, struct PairtestRng **rng);

// # Safety
// `rng` is NULL or a live handle from [`pairtest_rng_new`].
void pairtest_rng_free(struct PairtestRng *rng);

// Fills `out[0..len]` with uniforms on `(0, 1)`.
//
// # Safety
// `rng` must be a live handle and `out` point to `len` writable doubles.
enum PairtestStatus pairtest_rng_uniform(struct PairtestRng *rng, double *out, size_t len);

// Fills `out[0..len]` with standard normals.
//
// # Safety
// `rng` must be a live handle and `out` point to `len` writable doubles.
enum PairtestStatus pairtest_rng_normal(struct PairtestRng *rng, double *out, size_t len);

// Loads a count matrix and a pairing file, filters genes, normalizes with
// size factors and tests every gene. `transform` is -1 for the method's
// default, 0 for identity and 1 for `log2(x + 0.5)`.
//
// # Safety
// `counts_path` and `pairs_path` must be NUL-terminated strings; `de` must
// be writable. The handle is freed with [`pairtest_de_free`].
enum PairtestStatus pairtest_de_run(const char *counts_path,
                                    const char *pairs_path,
                                    int32_t method,
                                    double fdr,
                                    int32_t transform,
                                    uint64_t min_total,
                                    uint64_t min_count,
                                    struct PairtestDe **de);

// # Safety
// `de` is NULL or a live handle from [`pairtest_de_run`].
void pairtest_de_free(struct PairtestDe *de);

// Number of genes in the result, or 0 for NULL.
//
// # Safety
// `de` is NULL or a live handle.
size_t pairtest_de_len(const struct PairtestDe *de);

// Number of discoveries, or 0 for NULL.
//
// # Safety
// `de` is NULL or a live handle.
size_t pairtest_de_discoveries(const struct PairtestDe *de);

// Gene `index`. `gene_id` receives a pointer owned by the handle.
//
// # Safety
// `de` must be a live handle; `gene` and `gene_id` must be writable.
enum PairtestStatus pairtest_de_gene(const struct PairtestDe *de,
                                     size_t index,
                                     struct PairtestGene *gene,
                                     const char **gene_id);

// Writes the result table as CSV to `path`.
//
// # Safety
// `de` must be a live handle and `path` a NUL-terminated string.
enum PairtestStatus pairtest_de_save_csv(const struct PairtestDe *de, const char *csv_path);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* PAIRTEST_H */

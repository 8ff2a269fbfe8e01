#ifndef NMH_H
#define NMH_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Result code of every fallible call.
typedef enum NmhStatus {
  NMH_STATUS_OK = 0,
  NMH_STATUS_NULL_POINTER = 1,
  NMH_STATUS_INVALID_UTF8 = 2,
  NMH_STATUS_INVALID_INPUT = 3,
  NMH_STATUS_OFF_SUPPORT = 4,
  NMH_STATUS_NON_POSITIVE_WEIGHT = 5,
  NMH_STATUS_UNSUPPORTED = 6,
  NMH_STATUS_INVALID_SPEC = 7,
  NMH_STATUS_INCONCLUSIVE_BOUND = 8,
  NMH_STATUS_CONFIG = 9,
  NMH_STATUS_IO = 10,
  NMH_STATUS_PARSE = 11,
  NMH_STATUS_BUFFER_TOO_SMALL = 12,
  NMH_STATUS_PANIC = 13,
} NmhStatus;

// Classification of a birth-death chain.
typedef enum NmhVerdict {
  NMH_VERDICT_TRANSIENT = 0,
  NMH_VERDICT_RECURRENT_NULL = 1,
  NMH_VERDICT_POSITIVE_RECURRENT = 2,
  NMH_VERDICT_GEOMETRICALLY_ERGODIC = 3,
  NMH_VERDICT_INCONCLUSIVE = 4,
} NmhVerdict;

// Opaque transition kernel.
typedef struct NmhKernel NmhKernel;

// Opaque chain realization.
typedef struct NmhTrace NmhTrace;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Message of the last failed call on this thread; empty if none. The
// pointer stays valid until the next failing call on the same thread.
const char *nmh_last_error_message(void);

// Library version as a static NUL-terminated string.
const char *nmh_version(void);

// Release a string returned by this library. Null is ignored.
void nmh_string_free(char *s);

// Build a kernel from its JSON description, e.g.
// `{"kind":"noisy","target":{"kind":"geometric","ratio":0.5},
//   "proposal":{"kind":"integer_walk","theta":0.75},
//   "weights":{"family":"unit"},"n":1}`.
enum NmhStatus nmh_kernel_new_from_json(const char *json, struct NmhKernel **out);

void nmh_kernel_free(struct NmhKernel *kernel);

// Run `iterations` steps from the JSON state `x0_json` (an integer or an
// array of numbers) on the random stream `(seed, stream_id)`.
enum NmhStatus nmh_run_chain(const struct NmhKernel *kernel,
                             const char *x0_json,
                             size_t iterations,
                             uint64_t seed,
                             uint64_t stream_id,
                             struct NmhTrace **out);

void nmh_trace_free(struct NmhTrace *trace);

// Number of recorded states (`iterations + 1`); 0 for a null handle.
size_t nmh_trace_len(const struct NmhTrace *trace);

// Dimension of the states (1 on the lattice); 0 for a null handle.
size_t nmh_trace_dim(const struct NmhTrace *trace);

// Copy coordinate `coord` of every state into `out[0..len]`; `len` must be
// at least [`nmh_trace_len`].
enum NmhStatus nmh_trace_coordinates(const struct NmhTrace *trace,
                                     size_t coord,
                                     double *out,
                                     size_t len);

// Copy the acceptance flags (`len >= nmh_trace_len - 1`) as 0/1 bytes.
enum NmhStatus nmh_trace_accepted(const struct NmhTrace *trace, uint8_t *out, size_t len);

// Fraction of accepted proposals.
enum NmhStatus nmh_trace_acceptance_rate(const struct NmhTrace *trace, double *out);

// Classify a named preset chain. `n = 0` selects the preset default.
// `report_json` may be null; otherwise it receives the full report.
enum NmhStatus nmh_classify_preset(const char *name,
                                   size_t n,
                                   int64_t m,
                                   enum NmhVerdict *verdict,
                                   char **report_json);

// Classify a chain given by `p[m-1]`, `q[m-1]` for `m = 1..=len`; the last
// row is reused beyond the table.
enum NmhStatus nmh_classify_table(const double *p,
                                  const double *q,
                                  size_t len,
                                  int64_t m,
                                  enum NmhVerdict *verdict,
                                  char **report_json);

// Minimal `2 R tau^n + n / r` over integer `n` and its minimiser.
enum NmhStatus nmh_tv_rate_bound(double big_r, double tau, double r, double *bound, uint64_t *n);

// Exact log-likelihood of `y[0..len]` under the linear-Gaussian model.
enum NmhStatus nmh_kalman_loglik(double x0,
                                 double a,
                                 double sigma2_x,
                                 double sigma2_y,
                                 const double *y,
                                 size_t len,
                                 double *out);

// Bootstrap particle-filter estimate of the same log-likelihood.
enum NmhStatus nmh_pf_loglik(double x0,
                             double a,
                             double sigma2_x,
                             double sigma2_y,
                             const double *y,
                             size_t len,
                             size_t particles,
                             uint64_t seed,
                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* NMH_H */

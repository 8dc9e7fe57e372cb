#ifndef WIRETAP_H
#define WIRETAP_H

/* Generated by cbindgen; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum WtcStatus {
  WTC_STATUS_OK = 0,
  WTC_STATUS_NULL_POINTER = 1,
  /**
   * Invalid distribution, channel, dimensions or precondition.
   */
  WTC_STATUS_INVALID_ARGUMENT = 2,
  WTC_STATUS_NOT_DEGRADED = 3,
  WTC_STATUS_BUDGET_EXCEEDED = 4,
  WTC_STATUS_PARSE = 5,
  WTC_STATUS_IO = 6,
  /**
   * Output buffer has the wrong length.
   */
  WTC_STATUS_BUFFER_SIZE = 7,
  WTC_STATUS_PANIC = 8,
  WTC_STATUS_INTERNAL = 9,
} WtcStatus;

/**
 * Opaque channel `X → Y`.
 */
typedef struct WtcChannel WtcChannel;

/**
 * Opaque wiretap channel `X → (Y, Z)`.
 */
typedef struct WtcWiretap WtcWiretap;

typedef struct WtcCapacity {
  double value_bits;
  double kkt_slack;
  size_t iterations;
  bool converged;
} WtcCapacity;

typedef struct WtcDegradedness {
  bool degraded;
  double residual;
} WtcDegradedness;

typedef struct WtcMetrics {
  double s1;
  double s2;
  double s3;
  double s4;
  double s5;
  double s6;
} WtcMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failure on this thread, or null. The pointer stays
 * valid until the next failing call on the same thread.
 */
const char *wtc_last_error(void);

/**
 * Static, nul-terminated version string.
 */
const char *wtc_version(void);

/**
 * Builds a channel from a row-major `inputs × outputs` matrix.
 *
 * # Safety
 * `matrix` must point to `inputs * outputs` doubles; `out` must be writable.
 */
enum WtcStatus wtc_channel_new(size_t inputs,
                               size_t outputs,
                               const double *matrix,
                               struct WtcChannel **out);

/**
 * Binary symmetric channel with crossover `p`.
 *
 * # Safety
 * `out` must be writable.
 */
enum WtcStatus wtc_channel_bsc(double p, struct WtcChannel **out);

/**
 * Reads a channel file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum WtcStatus wtc_channel_read(const char *path, struct WtcChannel **out);

/**
 * # Safety
 * `c` must be null or a handle from this library, not yet freed.
 */
void wtc_channel_free(struct WtcChannel *c);

/**
 * Wiretap channel from a joint `P(y, z | x)`, row-major with `z` fastest.
 *
 * # Safety
 * `joint` must point to `x * y * z` doubles; `out` must be writable.
 */
enum WtcStatus wtc_wiretap_from_joint(size_t x,
                                      size_t y,
                                      size_t z,
                                      const double *joint,
                                      struct WtcWiretap **out);

/**
 * Physically degraded wiretap channel `X → Y` followed by `Y → Z`.
 *
 * # Safety
 * `main` and `degrading` must be live handles; `out` must be writable.
 */
enum WtcStatus wtc_wiretap_compose(const struct WtcChannel *main,
                                   const struct WtcChannel *degrading,
                                   struct WtcWiretap **out);

/**
 * Reads a wiretap file.
 *
 * # Safety
 * `path` must be a nul-terminated string; `out` must be writable.
 */
enum WtcStatus wtc_wiretap_read(const char *path, struct WtcWiretap **out);

/**
 * # Safety
 * `w` must be null or a handle from this library, not yet freed.
 */
void wtc_wiretap_free(struct WtcWiretap *w);

/**
 * Shannon capacity in bits. `input` may be null; otherwise it receives the
 * optimal input law and must hold exactly `|X|` values.
 *
 * # Safety
 * `c` must be a live handle, `out` writable, `input` null or valid for
 * `input_len` writes.
 */
enum WtcStatus wtc_shannon_capacity(const struct WtcChannel *c,
                                    double tol,
                                    size_t max_iter,
                                    struct WtcCapacity *out,
                                    double *input,
                                    size_t input_len);

/**
 * Secrecy capacity of a degraded wiretap channel, in bits.
 *
 * # Safety
 * As for [`wtc_shannon_capacity`].
 */
enum WtcStatus wtc_secrecy_capacity(const struct WtcWiretap *w,
                                    double tol,
                                    size_t max_iter,
                                    struct WtcCapacity *out,
                                    double *input,
                                    size_t input_len);

/**
 * Degradedness test. A non-degraded channel is a result, not an error.
 *
 * # Safety
 * `w` must be a live handle and `out` writable.
 */
enum WtcStatus wtc_check_degradedness(const struct WtcWiretap *w,
                                      double tol,
                                      struct WtcDegradedness *out);

/**
 * The six secrecy metrics of a `rows × cols` joint of message and
 * eavesdropper block, row-major.
 *
 * # Safety
 * `joint` must point to `rows * cols` doubles; `out` must be writable.
 */
enum WtcStatus wtc_compute_metrics(size_t rows,
                                   size_t cols,
                                   const double *joint,
                                   size_t n,
                                   double eta1_bits,
                                   double eta2_bits,
                                   struct WtcMetrics *out);

/**
 * Secrecy capacity of the degraded Gaussian wiretap channel, in bits.
 *
 * # Safety
 * `out` must be writable.
 */
enum WtcStatus wtc_gaussian_secrecy_capacity(double power,
                                             double sigma1_sq,
                                             double sigma2_sq,
                                             double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WIRETAP_H */

#ifndef UWBOCC_H
#define UWBOCC_H

/* Generated by cbindgen from crates/ffi/src/lib.rs; do not edit. */

#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>

// Result of every call.
typedef enum UwbStatus {
  UWB_STATUS_OK = 0,
  // A required pointer argument was null.
  UWB_STATUS_NULL_POINTER = 1,
  // An argument or configuration value was rejected.
  UWB_STATUS_INVALID_ARGUMENT = 2,
  // A file could not be read.
  UWB_STATUS_IO = 3,
  // Input data was malformed or inconsistent.
  UWB_STATUS_DATA = 4,
  // A computation produced a non-finite value.
  UWB_STATUS_NUMERIC = 5,
  // An internal error was caught at the boundary.
  UWB_STATUS_PANIC = 6,
} UwbStatus;

// Complex N x M matrix, either raw CIR or a residual.
typedef struct UwbCir UwbCir;

// A detector mapping a residual to a score.
typedef struct UwbDetector UwbDetector;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *uwb_version(void);

// Message of the last failed call on this thread. The pointer stays valid
// until the next failing call on the same thread.
const char *uwb_last_error(void);

// Creates a raw CIR from `2 * n_fast * m_slow` doubles: interleaved real and
// imaginary parts, column-major (one frame after another).
enum UwbStatus uwb_cir_new(size_t n_fast, size_t m_slow, const double *data, struct UwbCir **out);

// Reads a `.cir` file as a raw CIR.
enum UwbStatus uwb_cir_read_file(const char *path, struct UwbCir **out);

// Releases a CIR handle; null is ignored.
void uwb_cir_free(struct UwbCir *cir);

enum UwbStatus uwb_cir_shape(const struct UwbCir *cir, size_t *n_fast, size_t *m_slow);

// Copies the matrix into `out` in the layout of [`uwb_cir_new`]; `len`
// must be `2 * n_fast * m_slow`.
enum UwbStatus uwb_cir_copy_data(const struct UwbCir *cir, double *out, size_t len);

// Squared Frobenius norm.
enum UwbStatus uwb_cir_energy(const struct UwbCir *cir, double *out);

// Subtracts the slow-time mean of every fast-time row. `mean` may be null;
// otherwise it receives `2 * n_fast` doubles (interleaved re/im).
enum UwbStatus uwb_mean_remove(const struct UwbCir *cir, double *mean, struct UwbCir **out);

// Per-component noise variance giving `snr_db` against reference energy
// `e_s` for an `n_fast x m_slow` residual.
enum UwbStatus uwb_noise_sigma2(double e_s,
                                double snr_db,
                                size_t n_fast,
                                size_t m_slow,
                                double *out);

// Detector input for one draw: white noise at `snr_db` (seeded by `seed`)
// added to `residual`, then scaled to unit energy. `snr_db = +inf` only
// normalizes.
enum UwbStatus uwb_augment(const struct UwbCir *residual,
                           double e_s,
                           double snr_db,
                           uint64_t seed,
                           bool exact_scaling,
                           struct UwbCir **out);

// Sliding-window energy score of a residual.
enum UwbStatus uwb_energy_score(const struct UwbCir *residual, size_t window, double *out);

// Slow-time spectral peak score of a residual.
enum UwbStatus uwb_fft_score(const struct UwbCir *residual, double *out);

// Loads a trained network from a checkpoint file.
enum UwbStatus uwb_detector_load(const char *path, struct UwbDetector **out);

// Energy detector over `window` frames.
enum UwbStatus uwb_detector_energy(size_t window, struct UwbDetector **out);

// Slow-time spectral peak detector.
enum UwbStatus uwb_detector_fft(struct UwbDetector **out);

// Releases a detector handle; null is ignored.
void uwb_detector_free(struct UwbDetector *detector);

// Scores a residual; networks return an occupancy probability.
enum UwbStatus uwb_detector_score(const struct UwbDetector *detector,
                                  const struct UwbCir *residual,
                                  double *out);

// Floating-point operations of one detection on an `n_fast x m_slow`
// residual.
enum UwbStatus uwb_detector_flops(const struct UwbDetector *detector,
                                  size_t n_fast,
                                  size_t m_slow,
                                  uint64_t *out);

// Area under the ROC curve; `labels[i]` is nonzero for positives.
enum UwbStatus uwb_roc_auc(const double *scores, const uint8_t *labels, size_t len, double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* UWBOCC_H */

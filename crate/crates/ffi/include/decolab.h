#ifndef DECOLAB_H
#define DECOLAB_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum DecolabStatus {
  DECOLAB_STATUS_OK = 0,
  DECOLAB_STATUS_NULL_POINTER = 1,
  DECOLAB_STATUS_INVALID_ARGUMENT = 2,
  DECOLAB_STATUS_CONFIG_ERROR = 3,
  DECOLAB_STATUS_NUMERICAL_ERROR = 4,
  DECOLAB_STATUS_IO_ERROR = 5,
  DECOLAB_STATUS_PANIC = 6,
} DecolabStatus;

typedef enum DecolabFormat {
  DECOLAB_FORMAT_CSV = 0,
  DECOLAB_FORMAT_JSON = 1,
} DecolabFormat;

/**
 * Parsed experiment configuration.
 */
typedef struct DecolabConfig DecolabConfig;

/**
 * Diagnostics time series produced by a run.
 */
typedef struct DecolabRecord DecolabRecord;

/**
 * Density matrix on system ⊗ apparatus.
 */
typedef struct DecolabState DecolabState;

typedef struct DecolabSample {
  double time;
  double dist_eq6;
  double dist_eq7;
  double min_ppt_eig;
  size_t n_negative_ppt;
} DecolabSample;

typedef struct DecolabSearchReport {
  uint64_t seed;
  double hs_dist;
  double fidelity_dist;
  size_t ensemble_size;
  size_t iterations;
  double hs_to_decohered;
  double fidelity_to_decohered;
  double target_hs_to_decohered;
} DecolabSearchReport;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the calling thread's last error message into `buf` (NUL-terminated,
 * truncated to `len`). Returns the full message length plus one, or 0 when
 * there is no error. Pass a null `buf` to query the size.
 */
size_t decolab_last_error_message(char *buf, size_t len);

/**
 * Parses config text. On success `*out` owns a new handle.
 */
enum DecolabStatus decolab_config_parse(const char *text, struct DecolabConfig **out);

enum DecolabStatus decolab_config_load(const char *path, struct DecolabConfig **out);

enum DecolabStatus decolab_config_set_seed(struct DecolabConfig *config, uint64_t seed);

void decolab_config_free(struct DecolabConfig *config);

/**
 * Runs the decoherence experiment. On success `*out` owns a new record.
 */
enum DecolabStatus decolab_run_experiment(const struct DecolabConfig *config,
                                          struct DecolabRecord **out);

/**
 * Number of samples, or 0 for a null record.
 */
size_t decolab_record_len(const struct DecolabRecord *record);

enum DecolabStatus decolab_record_sample(const struct DecolabRecord *record,
                                         size_t index,
                                         struct DecolabSample *out);

enum DecolabStatus decolab_record_write(const struct DecolabRecord *record,
                                        const char *path,
                                        enum DecolabFormat format);

void decolab_record_free(struct DecolabRecord *record);

enum DecolabStatus decolab_run_search(const struct DecolabConfig *config,
                                      struct DecolabSearchReport *out);

/**
 * Pure-mixed entangled state for weights `p` (length `n1`) and `q` (length `n2`).
 */
enum DecolabStatus decolab_state_pure_mixed(double c1_re,
                                            double c1_im,
                                            double c2_re,
                                            double c2_im,
                                            const double *p,
                                            size_t n1,
                                            const double *q,
                                            size_t n2,
                                            struct DecolabState **out);

/**
 * The pure-mixed state with its system coherences removed.
 */
enum DecolabStatus decolab_state_decohered(double c1_re,
                                           double c1_im,
                                           double c2_re,
                                           double c2_im,
                                           const double *p,
                                           size_t n1,
                                           const double *q,
                                           size_t n2,
                                           struct DecolabState **out);

/**
 * Separable end state with both apparatus groups uniformly mixed.
 */
enum DecolabStatus decolab_state_microcanonical(double c1_re,
                                                double c1_im,
                                                double c2_re,
                                                double c2_im,
                                                size_t n1,
                                                size_t n2,
                                                struct DecolabState **out);

/**
 * Matrix dimension, or 0 for a null state.
 */
size_t decolab_state_dim(const struct DecolabState *state);

/**
 * Copies the matrix in row-major order into `re` and `im`, each of length `len = dim * dim`.
 */
enum DecolabStatus decolab_state_matrix(const struct DecolabState *state,
                                        double *re,
                                        double *im,
                                        size_t len);

void decolab_state_free(struct DecolabState *state);

enum DecolabStatus decolab_fidelity_distance(const struct DecolabState *a,
                                             const struct DecolabState *b,
                                             double *out);

/**
 * Lowest partial-transpose eigenvalue and the count of clearly negative ones.
 */
enum DecolabStatus decolab_ppt_min_eigenvalue(const struct DecolabState *state,
                                              double *min_out,
                                              size_t *count_out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* DECOLAB_H */

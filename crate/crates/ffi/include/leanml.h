#ifndef LEANML_H
#define LEANML_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum LeanDirection {
  LEAN_DIRECTION_HIGHER_IS_BETTER = 0,
  LEAN_DIRECTION_LOWER_IS_BETTER = 1,
} LeanDirection;

typedef enum LeanMethod {
  LEAN_METHOD_DUAL = 0,
  LEAN_METHOD_GAUSSIAN = 1,
} LeanMethod;

typedef enum LeanStatus {
  LEAN_STATUS_OK = 0,
  LEAN_STATUS_NULL_POINTER = 1,
  LEAN_STATUS_INVALID_ARGUMENT = 2,
  LEAN_STATUS_DATA = 3,
  LEAN_STATUS_SOLVER = 4,
  LEAN_STATUS_IO = 5,
  LEAN_STATUS_PANIC = 6,
} LeanStatus;

/*
 A loaded dataset.
 */
typedef struct LeanDataset LeanDataset;

/*
 Early-termination state for one training run.
 */
typedef struct LeanMonitor LeanMonitor;

/*
 Achievable performance of a feature set. Metrics that do not apply to
 the target type are NaN.
 */
typedef struct LeanValuation {
  double mutual_information;
  double best_r2;
  double best_rmse;
  double best_accuracy;
  double best_log_likelihood;
  double target_entropy;
} LeanValuation;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message for the last failed call on this thread, or NULL after a
 success. The pointer stays valid until the next call on this thread.
 */
const char *lean_last_error_message(void);

/*
 Loads a CSV with a header row. `target` may be NULL to use the last column.

 # Safety
 `path` and a non-NULL `target` must be NUL-terminated strings; `out` must
 be writable.
 */
enum LeanStatus lean_dataset_load_csv(const char *path,
                                      const char *target,
                                      struct LeanDataset **out);

/*
 # Safety
 `dataset` must come from [`lean_dataset_load_csv`] and not be used afterwards.
 */
void lean_dataset_free(struct LeanDataset *dataset);

/*
 Number of rows kept after dropping incomplete ones.

 # Safety
 `dataset` must be a live handle and `out` writable.
 */
enum LeanStatus lean_dataset_rows(const struct LeanDataset *dataset, size_t *out);

/*
 Values a feature set against the dataset's target. Pass `features` NULL
 to use every feature; a non-NULL array with `n_features` 0 values the
 empty set.

 # Safety
 `dataset` must be a live handle, `features` (when non-NULL) must hold
 `n_features` NUL-terminated strings, and `out` must be writable.
 */
enum LeanStatus lean_value(const struct LeanDataset *dataset,
                           const char *const *features,
                           size_t n_features,
                           enum LeanMethod method,
                           struct LeanValuation *out);

/*
 `1 − e^{−2 mi}`.

 # Safety
 `out` must be writable.
 */
enum LeanStatus lean_best_r2(double mi, double *out);

/*
 Best accuracy for `n_classes` classes with the given frequencies.

 # Safety
 `frequencies` must hold `n_classes` values and `out` must be writable.
 */
enum LeanStatus lean_best_accuracy(double mi,
                                   const double *frequencies,
                                   size_t n_classes,
                                   double *out);

/*
 Entropy of the `q`-class law with top mass `a` and a flat tail.

 # Safety
 `out` must be writable.
 */
enum LeanStatus lean_hbar_q(double a, size_t q, double *out);

/*
 Inverse of [`lean_hbar_q`] on `[1/q, 1]`. `h` outside `[0, ln q]` is an error.

 # Safety
 `out` must be writable.
 */
enum LeanStatus lean_hbar_q_inverse(double h, size_t q, double *out);

/*
 Creates a monitor that terminates once the metric beats `best_value` by
 more than `threshold` for `patience` consecutive observations.

 # Safety
 `out` must be writable.
 */
enum LeanStatus lean_monitor_new(double best_value,
                                 enum LeanDirection direction,
                                 double threshold,
                                 size_t patience,
                                 struct LeanMonitor **out);

/*
 Feeds one epoch's metric; `terminate` is set once training should stop
 and stays set afterwards.

 # Safety
 `monitor` must be a live handle and `terminate` writable.
 */
enum LeanStatus lean_monitor_observe(struct LeanMonitor *monitor, double metric, bool *terminate);

/*
 # Safety
 `monitor` must come from [`lean_monitor_new`] and not be used afterwards.
 */
void lean_monitor_free(struct LeanMonitor *monitor);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* LEANML_H */

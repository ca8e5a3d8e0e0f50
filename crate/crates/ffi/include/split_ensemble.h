#ifndef SPLIT_ENSEMBLE_H
#define SPLIT_ENSEMBLE_H

#include <stddef.h>
#include <stdint.h>

/*
 Result code of every fallible call.
 */
typedef enum SeStatus {
  SE_STATUS_OK = 0,
  SE_STATUS_IO = 1,
  SE_STATUS_CONFIG = 2,
  SE_STATUS_DATA = 3,
  SE_STATUS_NUMERICAL = 4,
  /*
   Null pointer, bad UTF-8 or inconsistent sizes.
   */
  SE_STATUS_INVALID_ARGUMENT = 5,
  /*
   A Rust panic was caught at the boundary.
   */
  SE_STATUS_INTERNAL = 6,
} SeStatus;

/*
 Opaque trained ensemble.
 */
typedef struct SeEnsemble SeEnsemble;

/*
 Training settings. Obtain defaults from `se_train_config_default`.
 */
typedef struct SeTrainConfig {
  size_t members;
  size_t epochs;
  size_t batch_size;
  double learning_rate;
  size_t hidden_units;
  uint64_t seed;
} SeTrainConfig;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/*
 Message of the last failed call on this thread, or NULL. The pointer stays
 valid until the next call into this library on the same thread.
 */
const char *se_last_error(void);

/*
 Default training settings: 5 members, 40 epochs, batch 100, learning rate
 0.1, 50 hidden units, seed 0.
 */
struct SeTrainConfig se_train_config_default(void);

/*
 Trains an ensemble on `n` rows of `d` features.

 `cluster_of[j]` is the cluster label of feature `j`; labels must cover
 `0..k` without gaps. Inputs and targets are standardized internally.

 # Safety
 `x` must point to `n * d` doubles, `y` and `cluster_of` to `n` and `d`
 values, `config` to a valid `SeTrainConfig` and `out` to writable storage.
 */
enum SeStatus se_ensemble_train(const double *x,
                                const double *y,
                                size_t n,
                                size_t d,
                                const size_t *cluster_of,
                                const struct SeTrainConfig *config,
                                struct SeEnsemble **out);

/*
 Loads an ensemble saved by `se_ensemble_save` or the command-line tool.

 # Safety
 `dir` must be a NUL-terminated string and `out` writable.
 */
enum SeStatus se_ensemble_load(const char *dir, struct SeEnsemble **out);

/*
 Writes the ensemble into directory `dir`, creating it if needed.

 # Safety
 `ensemble` must be a live handle and `dir` a NUL-terminated string.
 */
enum SeStatus se_ensemble_save(const struct SeEnsemble *ensemble, const char *dir);

/*
 Number of clusters, or 0 for a null handle.

 # Safety
 `ensemble` must be null or a live handle.
 */
size_t se_ensemble_clusters(const struct SeEnsemble *ensemble);

/*
 Number of input features, or 0 for a null handle.

 # Safety
 `ensemble` must be null or a live handle.
 */
size_t se_ensemble_features(const struct SeEnsemble *ensemble);

/*
 Predicts `n` rows. Writes `n` means to `mean_out` and `n * k` per-cluster
 variances (row-major) to `variance_out`.

 # Safety
 `x` must point to `n * d` doubles, `mean_out` to `n` and `variance_out` to
 `n * k` writable doubles, where `d` and `k` are the handle's sizes.
 */
enum SeStatus se_ensemble_predict(const struct SeEnsemble *ensemble,
                                  const double *x,
                                  size_t n,
                                  double *mean_out,
                                  double *variance_out);

/*
 Releases a handle. Null is ignored.

 # Safety
 `ensemble` must be null or a handle not yet freed.
 */
void se_ensemble_free(struct SeEnsemble *ensemble);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* SPLIT_ENSEMBLE_H */

#ifndef TSXAI_H
#define TSXAI_H

/* C interface to the tsxai library: synthetic time-series classification
 * benchmarks with known relevant regions, lightweight classifiers, saliency
 * explanations, and two evaluation protocols (ground-truth scoring and
 * perturbation-based AMEE ranking).
 *
 * Conventions:
 *   - every fallible call returns tsx_status; results travel through out
 *     parameters, which are set to NULL/zero when the call fails;
 *   - tsx_last_error() describes the calling thread's most recent failure;
 *   - handles are freed with their tsx_*_free function, all NULL-safe;
 *   - `params` arguments take comma-separated key=value pairs ("" or NULL
 *     for all defaults); unknown keys are rejected;
 *   - everything is deterministic given the seeds in params, for any
 *     tsx_set_jobs setting.
 */

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum tsx_status {
  TSX_OK = 0,
  TSX_ERR_ARGUMENT = 1, /* unusable parameter or shape */
  TSX_ERR_DATA = 2,     /* malformed or inconsistent input content */
  TSX_ERR_NUMERIC = 3,  /* computation failed (divergence, singular system) */
  TSX_ERR_IO = 4,       /* filesystem trouble */
  TSX_ERR_INTERNAL = 5  /* unexpected failure */
} tsx_status;

/* Message for this thread's most recent failure; "" if none. The buffer is
 * owned by the library and overwritten by the next failing call. */
const char* tsx_last_error(void);

/* Worker threads for parallel sections; 0 asks the OS, 1 forces serial. */
void tsx_set_jobs(int n);

const char* tsx_version(void);

typedef struct tsx_dataset tsx_dataset;   /* labeled series collection */
typedef struct tsx_mask tsx_mask;         /* ground-truth relevance mask */
typedef struct tsx_model tsx_model;       /* trained classifier */
typedef struct tsx_saliency tsx_saliency; /* list of saliency maps */

void tsx_dataset_free(tsx_dataset* ds);
void tsx_mask_free(tsx_mask* m);
void tsx_model_free(tsx_model* m);
void tsx_saliency_free(tsx_saliency* s);
void tsx_string_free(char* s);

/* --- datasets ------------------------------------------------------------ */

/* Synthetic two-class benchmark: base noise plus a class-dependent offset
 * inside a known channel/time box.  params keys:
 *   kind=pp|gaussian|ar   n_train=100  n_test=100  d=20  L=100
 *   box_ch_lo=0  box_ch_hi=10  box_t_lo=10  box_t_hi=20   (half-open)
 *   offset=1  ar_phi=0.9  seed=0                                        */
tsx_status tsx_generate(const char* params, tsx_dataset** train, tsx_dataset** test);

/* The box as a 0/1 mask at `segments_per_channel` columns per channel; box
 * edges must land on segment boundaries. */
tsx_status tsx_generate_mask(const char* params, int segments_per_channel, tsx_mask** mask);

tsx_status tsx_dataset_read(const char* path, tsx_dataset** out);
tsx_status tsx_dataset_write(const tsx_dataset* ds, const char* path);

/* All channels of each instance laid end to end: n x (1 x d*L). */
tsx_status tsx_dataset_concat(const tsx_dataset* ds, tsx_dataset** out);

/* Shape queries return -1 on NULL. */
int tsx_dataset_size(const tsx_dataset* ds);
int tsx_dataset_channels(const tsx_dataset* ds);
int tsx_dataset_length(const tsx_dataset* ds);
int tsx_dataset_classes(const tsx_dataset* ds);

/* Masks reuse the saliency file format with raw 0/1 values. */
tsx_status tsx_mask_read(const char* path, tsx_mask** out);
tsx_status tsx_mask_write(const tsx_mask* m, const char* path);

int tsx_mask_channels(const tsx_mask* m); /* -1 on NULL */
int tsx_mask_segments(const tsx_mask* m);

/* --- models --------------------------------------------------------------- */

/* kind: ridge | rocket-logistic | rocket-ridge | channel-ensemble | gapcnn.
 * params per kind (others rejected):
 *   rocket-logistic / rocket-ridge / channel-ensemble: kernels=2000 seed=0
 *   rocket-logistic / channel-ensemble also: max_iter=1000 l2=1e-4 lr=0
 *     (lr=0 picks a step size from the feature spectrum)
 *   gapcnn: epochs=200 patience=20 batch=10 lr=1e-4 seed=0
 *           filters1=16 filters2=32 log=<epoch CSV path>
 *   ridge: none (cross-validated on the flattened raw values)            */
tsx_status tsx_train(const char* kind, const tsx_dataset* train, const char* params,
                     tsx_model** out);

tsx_status tsx_model_save(const tsx_model* m, const char* path);
tsx_status tsx_model_load(const char* path, tsx_model** out);

/* The kind string the model was trained/loaded as; NULL on NULL. */
const char* tsx_model_kind(const tsx_model* m);

tsx_status tsx_model_accuracy(const tsx_model* m, const tsx_dataset* ds, double* out);

/* --- explanations ---------------------------------------------------------- */

/* One saliency map per test instance, each explaining the model's predicted
 * class.  method / required model kind / extra inputs:
 *   ridge        ridge            -
 *   shap         rocket-logistic  train split (masking background); the
 *                                 model must be trained on the concatenated
 *                                 form (tsx_dataset_concat)
 *   shap-chbych  channel-ensemble train split
 *   dcam         gapcnn           -
 *   random       model must be NULL
 * params: segments=10 n_samples=0 k=200 seed=0                           */
tsx_status tsx_explain(const char* method, const tsx_model* model, const tsx_dataset* train,
                       const tsx_dataset* test, const char* params, tsx_saliency** out);

/* -1 on NULL. */
int tsx_saliency_count(const tsx_saliency* s);

/* Shape of one map; -1 on NULL handle or bad index. */
int tsx_saliency_channels(const tsx_saliency* s, int index);
int tsx_saliency_segments(const tsx_saliency* s, int index);

tsx_status tsx_saliency_write(const tsx_saliency* s, int index, const char* path);
tsx_status tsx_saliency_read(const char* const* paths, int count, tsx_saliency** out);

/* Pool every map to `segments` columns (counts must divide) and rescale to
 * [0,100] -- the step before ground-truth scoring. */
tsx_status tsx_saliency_align(const tsx_saliency* s, int segments, tsx_saliency** out);

/* The mask itself as an explanation, repeated `count` times. */
tsx_status tsx_mask_as_saliency(const tsx_mask* m, int count, tsx_saliency** out);

/* Uniform noise maps, the calibration baseline. */
tsx_status tsx_random_maps(int count, int channels, int segments, uint64_t seed,
                           tsx_saliency** out);

/* --- evaluation ------------------------------------------------------------ */

/* Mean over all maps of precision, recall, F1, PR-AUC, ROC-AUC (that order).
 * Maps must already sit on the mask's grid in [0,100] (tsx_saliency_align). */
tsx_status tsx_eval_gt(const tsx_saliency* maps, const tsx_mask* mask, double out_metrics[5]);

/* Channels sorted by mean rescaled saliency, top importance 1.  Arrays need
 * room for every channel; *n_out reports how many entries were written. */
tsx_status tsx_rank_channels(const tsx_saliency* maps, int* channel_out, double* importance_out,
                             int cap, int* n_out);

/* Perturbation-based faithfulness ranking over named explainers (parallel
 * arrays, one map list per explainer covering every test instance).  Maps of
 * any grid are upsampled and rescaled internally; referees are trained on
 * the train split.  params: referee_kernels=500 seed=0
 *   strategies=mean-local;mean-global;gaussian-local;gaussian-global
 *   fractions=0;0.1;...;1
 * Both outputs are malloc'd CSV texts; free with tsx_string_free.
 * curves_csv may be NULL if the raw curves are not wanted. */
tsx_status tsx_eval_amee(const tsx_dataset* train, const tsx_dataset* test,
                         const char* const* names, const tsx_saliency* const* maps,
                         int n_explainers, const char* params, char** report_csv,
                         char** curves_csv);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* TSXAI_H */

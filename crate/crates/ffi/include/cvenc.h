#ifndef CVENC_H
#define CVENC_H

/* Generated by cbindgen. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum CvStatus {
  CV_STATUS_OK = 0,
  CV_STATUS_NULL_POINTER = 1,
  CV_STATUS_INVALID_ARGUMENT = 2,
  CV_STATUS_SHAPE_MISMATCH = 3,
  CV_STATUS_DATA_ERROR = 4,
  CV_STATUS_NOT_CONVERGED = 5,
  CV_STATUS_PANIC = 6,
} CvStatus;

typedef enum CvAjiMode {
  CV_AJI_MODE_LITERAL = 0,
  CV_AJI_MODE_USED_FLAG = 1,
} CvAjiMode;

/**
 * Opaque instance label map.
 */
typedef struct CvLabelMap CvLabelMap;

/**
 * Opaque encoded training targets.
 */
typedef struct CvTargets CvTargets;

/**
 * Connectivity is 4 or 8.
 */
typedef struct CvEncodeParams {
  uint32_t erosion_radius;
  double center_distance_threshold;
  uint32_t connectivity;
} CvEncodeParams;

typedef struct CvDecodeParams {
  double inside_threshold;
  double center_threshold;
  uint32_t connectivity;
  size_t min_instance_area;
} CvDecodeParams;

typedef struct CvRwParams {
  double beta;
  double cg_tolerance;
  size_t cg_max_iters;
  uint32_t connectivity;
} CvRwParams;

typedef struct CvMetrics {
  double aji;
  double iou;
  double dice;
} CvMetrics;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message of the last failed call on this thread. Valid until the next
 * failing call on the same thread; empty if nothing has failed.
 */
const char *cvenc_last_error_message(void);

struct CvEncodeParams cvenc_encode_params_default(void);

struct CvDecodeParams cvenc_decode_params_default(void);

struct CvRwParams cvenc_rw_params_default(void);

/**
 * Copies `height * width` labels into a new label map.
 *
 * # Safety
 * `labels` must be valid for `height * width` reads and `out` for one write.
 */
enum CvStatus cvenc_label_map_new(size_t height,
                                  size_t width,
                                  const uint32_t *labels,
                                  struct CvLabelMap **out);

/**
 * # Safety
 * `map` must be null or a handle not yet freed.
 */
void cvenc_label_map_free(struct CvLabelMap *map);

/**
 * # Safety
 * `map` must be a live handle; `height` and `width` valid for one write.
 */
enum CvStatus cvenc_label_map_dims(const struct CvLabelMap *map, size_t *height, size_t *width);

/**
 * Copies the labels out; `len` must equal `height * width`.
 *
 * # Safety
 * `map` must be a live handle and `out` valid for `len` writes.
 */
enum CvStatus cvenc_label_map_copy(const struct CvLabelMap *map, uint32_t *out, size_t len);

/**
 * Synthetic scene with default shape parameters.
 *
 * # Safety
 * `out` must be valid for one write.
 */
enum CvStatus cvenc_synth_scene(uint64_t seed,
                                size_t height,
                                size_t width,
                                size_t nucleus_count,
                                struct CvLabelMap **out);

/**
 * # Safety
 * `gt` must be a live handle, `params` null (defaults) or valid, `out` valid for one write.
 */
enum CvStatus cvenc_encode(const struct CvLabelMap *gt,
                           const struct CvEncodeParams *params,
                           struct CvTargets **out);

/**
 * # Safety
 * `targets` must be null or a handle not yet freed.
 */
void cvenc_targets_free(struct CvTargets *targets);

/**
 * Copies the targets out as 0/1 masks and vector channels. Any output
 * pointer may be null to skip it; non-null buffers hold `len` elements.
 *
 * # Safety
 * `targets` must be a live handle; each non-null buffer valid for `len` writes.
 */
enum CvStatus cvenc_targets_copy(const struct CvTargets *targets,
                                 uint8_t *inside,
                                 uint8_t *center,
                                 double *dx,
                                 double *dy,
                                 size_t len);

/**
 * Number of instances with a centroid, i.e. the instance count of the ground truth.
 *
 * # Safety
 * `targets` must be a live handle and `count` valid for one write.
 */
enum CvStatus cvenc_targets_instance_count(const struct CvTargets *targets, size_t *count);

/**
 * Decodes instances from inside/center probabilities and center vectors.
 *
 * # Safety
 * The four input buffers must be valid for `height * width` reads; `params`
 * null (defaults) or valid; `out` valid for one write.
 */
enum CvStatus cvenc_decode(size_t height,
                           size_t width,
                           const double *inside_prob,
                           const double *center_prob,
                           const double *dx,
                           const double *dy,
                           const struct CvDecodeParams *params,
                           struct CvLabelMap **out);

/**
 * Random walker baseline from inside/center probabilities.
 *
 * # Safety
 * Input buffers must be valid for `height * width` reads; parameter
 * pointers null (defaults) or valid; `out` valid for one write.
 */
enum CvStatus cvenc_random_walker(size_t height,
                                  size_t width,
                                  const double *inside_prob,
                                  const double *center_prob,
                                  const struct CvDecodeParams *decode_params,
                                  const struct CvRwParams *rw_params,
                                  struct CvLabelMap **out);

/**
 * AJI, IoU and Dice of `pred` against `gt`.
 *
 * # Safety
 * `gt` and `pred` must be live handles and `out` valid for one write.
 */
enum CvStatus cvenc_evaluate(const struct CvLabelMap *gt,
                             const struct CvLabelMap *pred,
                             enum CvAjiMode mode,
                             struct CvMetrics *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* CVENC_H */

/* Generated by cbindgen; do not edit. */

#ifndef HCOSEG_H
#define HCOSEG_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Result of a fallible call.
 */
typedef enum HcStatus {
  HC_STATUS_OK = 0,
  HC_STATUS_NULL_POINTER = 1,
  /**
   * Bad configuration key or value.
   */
  HC_STATUS_CONFIG = 2,
  HC_STATUS_IO = 3,
  /**
   * Inputs violate a documented precondition.
   */
  HC_STATUS_VALIDATION = 4,
  /**
   * Caller buffer length does not match the data.
   */
  HC_STATUS_BUFFER_SIZE = 5,
  HC_STATUS_PANIC = 6,
} HcStatus;

/**
 * Pipeline settings, initially the library defaults.
 */
typedef struct HcConfig HcConfig;

/**
 * Output of [`hc_segment`].
 */
typedef struct HcResult HcResult;

/**
 * Frames collected for segmentation.
 */
typedef struct HcSequence HcSequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Library version as a static NUL-terminated string.
 */
const char *hc_version(void);

/**
 * Message for the last failure on this thread, or null if none. Valid until
 * the next failing call on the same thread.
 */
const char *hc_last_error(void);

/**
 * New empty sequence of `width`x`height` frames; null if either is zero.
 */
struct HcSequence *hc_sequence_new(size_t width, size_t height);

/**
 * Appends a frame of interleaved 8-bit RGB, row-major, `len == 3*w*h`.
 *
 * # Safety
 * `seq` must come from [`hc_sequence_new`]; `rgb` must point to `len`
 * readable bytes.
 */
enum HcStatus hc_sequence_push_rgb(struct HcSequence *seq, const uint8_t *rgb, size_t len);

/**
 * Number of frames pushed so far; 0 for a null handle.
 *
 * # Safety
 * `seq` must be null or come from [`hc_sequence_new`].
 */
size_t hc_sequence_len(const struct HcSequence *seq);

/**
 * # Safety
 * `seq` must be null or come from [`hc_sequence_new`] and not be freed twice.
 */
void hc_sequence_free(struct HcSequence *seq);

struct HcConfig *hc_config_new(void);

/**
 * Sets one configuration key, using the same names and syntax as the
 * configuration file.
 *
 * # Safety
 * `cfg` must come from [`hc_config_new`]; `key` and `value` must be
 * NUL-terminated.
 */
enum HcStatus hc_config_set(struct HcConfig *cfg, const char *key, const char *value);

/**
 * Replaces `cfg` with the contents of a configuration file.
 *
 * # Safety
 * `cfg` must come from [`hc_config_new`]; `path` must be NUL-terminated.
 */
enum HcStatus hc_config_load(struct HcConfig *cfg, const char *path);

/**
 * # Safety
 * `cfg` must be null or come from [`hc_config_new`] and not be freed twice.
 */
void hc_config_free(struct HcConfig *cfg);

/**
 * Segments `seq` and stores a new result handle in `*out`. `cfg` may be
 * null for defaults. On failure `*out` is set to null.
 *
 * # Safety
 * Handles must come from their constructors; `out` must be writable.
 */
enum HcStatus hc_segment(const struct HcSequence *seq,
                         const struct HcConfig *cfg,
                         struct HcResult **out);

/**
 * Number of frames in the result; 0 for a null handle.
 *
 * # Safety
 * `res` must be null or come from [`hc_segment`].
 */
size_t hc_result_len(const struct HcResult *res);

/**
 * Effective hierarchy depth used; 0 for a null handle.
 *
 * # Safety
 * `res` must be null or come from [`hc_segment`].
 */
size_t hc_result_depth(const struct HcResult *res);

/**
 * Number of pair co-segmentations performed; 0 for a null handle.
 *
 * # Safety
 * `res` must be null or come from [`hc_segment`].
 */
uint64_t hc_result_coseg_calls(const struct HcResult *res);

/**
 * Copies the refined probability map of `frame` (row-major, `w*h` values
 * in [0,1]) into `dst`.
 *
 * # Safety
 * `res` must come from [`hc_segment`]; `dst` must hold `len` doubles.
 */
enum HcStatus hc_result_copy_map(const struct HcResult *res, size_t frame, double *dst, size_t len);

/**
 * Copies the binary mask of `frame` as 0/1 bytes into `dst`.
 *
 * # Safety
 * `res` must come from [`hc_segment`]; `dst` must hold `len` bytes.
 */
enum HcStatus hc_result_copy_mask(const struct HcResult *res,
                                  size_t frame,
                                  uint8_t *dst,
                                  size_t len);

/**
 * # Safety
 * `res` must be null or come from [`hc_segment`] and not be freed twice.
 */
void hc_result_free(struct HcResult *res);

/**
 * Pair co-segmentations needed for `length` frames at `depth`.
 *
 * # Safety
 * `out` must be writable.
 */
enum HcStatus hc_coseg_call_count(size_t length, size_t depth, uint64_t *out);

/**
 * Intersection over union of two `width`x`height` byte masks (nonzero is
 * foreground). Two empty masks score 1.
 *
 * # Safety
 * `pred` and `gt` must each hold `width*height` bytes; `out` must be writable.
 */
enum HcStatus hc_iou(const uint8_t *pred,
                     const uint8_t *gt,
                     size_t width,
                     size_t height,
                     double *out);

/**
 * Weighted F-measure with weight `beta2` on precision.
 *
 * # Safety
 * As for [`hc_iou`].
 */
enum HcStatus hc_f_measure(const uint8_t *pred,
                           const uint8_t *gt,
                           size_t width,
                           size_t height,
                           double beta2,
                           double *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* HCOSEG_H */

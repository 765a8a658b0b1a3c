#ifndef FLMA_H
#define FLMA_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

#define FLMA_PRESET_LOG32 0

#define FLMA_PRESET_LOG64 1

#define FLMA_CLASS_ZERO 0

#define FLMA_CLASS_FINITE 1

#define FLMA_CLASS_INF 2

#define FLMA_CLASS_NAN 3

typedef enum {
  FLMA_STATUS_OK = 0,
  FLMA_STATUS_NULL_POINTER = 1,
  FLMA_STATUS_INVALID_ARGUMENT = 2,
  FLMA_STATUS_INVALID_CONFIG = 3,
  FLMA_STATUS_DIVIDE_BY_ZERO = 4,
  FLMA_STATUS_NEGATIVE_SQRT = 5,
  FLMA_STATUS_RANGE = 6,
  FLMA_STATUS_INVALID_ENCODING = 7,
  FLMA_STATUS_SINGULAR = 8,
  FLMA_STATUS_PANIC = 9,
} FlmaStatus;

/**
 * Opaque arithmetic context.
 */
typedef struct FlmaContext FlmaContext;

/**
 * Opaque exp or ln kernel.
 */
typedef struct FlmaKernel FlmaKernel;

/**
 * Parameters of a context, as reported by [`flma_context_params`].
 */
typedef struct {
  uint32_t e_bits;
  uint32_t f_bits;
  uint32_t alpha;
  uint32_t beta;
  uint32_t acc_bits;
} FlmaParams;

/**
 * A dual-base value `(-1)^negative * 2^a * e^(b / 2^F)`.
 *
 * `kind` is one of the `FLMA_CLASS_*` constants. `a` and `b` are only
 * meaningful for finite values and are zero otherwise.
 */
typedef struct {
  uint32_t kind;
  bool negative;
  int64_t a;
  uint64_t b;
} FlmaValue;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Message for the last failed call on this thread, or null if none.
 * Valid until the next failing call on the same thread.
 */
const char *flma_last_error(void);

/**
 * Static description of a status code.
 */
const char *flma_status_string(FlmaStatus status);

/**
 * Creates a context for one of the `FLMA_PRESET_*` presets.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
FlmaStatus flma_context_new(uint32_t preset_id, FlmaContext **out);

/**
 * Creates a context with kernels derived from `(E, F, alpha, beta)` the way
 * `preset_id` derives its own. `acc_bits = 0` selects `F + alpha`.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
FlmaStatus flma_context_new_custom(uint32_t preset_id,
                                   uint32_t e_bits,
                                   uint32_t f_bits,
                                   uint32_t alpha,
                                   uint32_t beta,
                                   uint32_t acc_bits,
                                   FlmaContext **out);

/**
 * # Safety
 * `ctx` must be null or a pointer returned by a `flma_context_new*` call
 * that has not been freed.
 */
void flma_context_free(FlmaContext *ctx);

/**
 * # Safety
 * `ctx` must be a live context; `out` must be valid for writes.
 */
FlmaStatus flma_context_params(const FlmaContext *ctx, FlmaParams *out);

/**
 * Nearest dual-base value to `v`. NaN and infinities map to their classes.
 *
 * # Safety
 * `ctx` must be a live context; `out` must be valid for writes.
 */
FlmaStatus flma_encode_f64(const FlmaContext *ctx, double v, FlmaValue *out);

/**
 * Value of `x` rounded to the nearest double.
 *
 * # Safety
 * `ctx` must be a live context; `x` must be readable; `out` must be valid
 * for writes.
 */
FlmaStatus flma_to_f64(const FlmaContext *ctx, const FlmaValue *x, double *out);

/**
 * Packed code of `x`: class, sign, `a` and `b` from high to low bits.
 * Fails with `FLMA_STATUS_RANGE` when the layout is wider than 64 bits.
 *
 * # Safety
 * `ctx` must be a live context; `x` must be readable; `out` must be valid
 * for writes.
 */
FlmaStatus flma_to_bits(const FlmaContext *ctx, const FlmaValue *x, uint64_t *out);

/**
 * # Safety
 * `ctx` must be a live context; `out` must be valid for writes.
 */
FlmaStatus flma_from_bits(const FlmaContext *ctx, uint64_t bits, FlmaValue *out);

/**
 * # Safety
 * `ctx` must be a live context; `x` and `y` must be readable; `out` must be
 * valid for writes. `out` may alias an input.
 */
FlmaStatus flma_add(const FlmaContext *ctx, const FlmaValue *x, const FlmaValue *y, FlmaValue *out);

/**
 * # Safety
 * Same contract as [`flma_add`].
 */
FlmaStatus flma_sub(const FlmaContext *ctx, const FlmaValue *x, const FlmaValue *y, FlmaValue *out);

/**
 * # Safety
 * Same contract as [`flma_add`].
 */
FlmaStatus flma_mul(const FlmaContext *ctx, const FlmaValue *x, const FlmaValue *y, FlmaValue *out);

/**
 * # Safety
 * Same contract as [`flma_add`].
 */
FlmaStatus flma_div(const FlmaContext *ctx, const FlmaValue *x, const FlmaValue *y, FlmaValue *out);

/**
 * # Safety
 * `ctx` must be a live context; `x` must be readable; `out` must be valid
 * for writes.
 */
FlmaStatus flma_sqrt(const FlmaContext *ctx, const FlmaValue *x, FlmaValue *out);

/**
 * `x^n` for integer `n`.
 *
 * # Safety
 * Same contract as [`flma_sqrt`].
 */
FlmaStatus flma_pow_int(const FlmaContext *ctx, const FlmaValue *x, int32_t n, FlmaValue *out);

/**
 * Fused inner product of `xs[0..n]` and `ys[0..n]`: each product is taken
 * to the linear domain, summed in order and converted back once.
 *
 * # Safety
 * `ctx` must be a live context; `xs` and `ys` must each point to `n`
 * readable values (or may be null when `n == 0`); `out` must be valid for
 * writes.
 */
FlmaStatus flma_inner_product(const FlmaContext *ctx,
                              const FlmaValue *xs,
                              const FlmaValue *ys,
                              size_t n,
                              FlmaValue *out);

/**
 * Shift-and-add `e^x` kernel: `x_bits` fractional input bits in `[0, ln 2)`,
 * `y_bits` fractional output bits, `iterations` steps, `ell`-bit constants,
 * `p`-bit datapath, `r` extra multiplier bits.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
FlmaStatus flma_exp_kernel_new(uint32_t x_bits,
                               uint32_t y_bits,
                               uint32_t iterations,
                               uint32_t ell,
                               uint32_t p,
                               uint32_t r,
                               FlmaKernel **out);

/**
 * Shift-and-add `ln x` kernel for `x` in `[1, 2)`; `s` is the fractional
 * width of the truncated divisor.
 *
 * # Safety
 * `out` must be null or valid for writes.
 */
FlmaStatus flma_log_kernel_new(uint32_t x_bits,
                               uint32_t y_bits,
                               uint32_t iterations,
                               uint32_t ell,
                               uint32_t p,
                               uint32_t r,
                               uint32_t s,
                               FlmaKernel **out);

/**
 * # Safety
 * `k` must be null or a live kernel handle.
 */
void flma_kernel_free(FlmaKernel *k);

/**
 * Half-open range `[lo, hi)` of valid input codes.
 *
 * # Safety
 * `k` must be a live kernel; `lo` and `hi` must be valid for writes.
 */
FlmaStatus flma_kernel_domain(const FlmaKernel *k, uint64_t *lo, uint64_t *hi);

/**
 * Evaluates the kernel on one input code.
 *
 * # Safety
 * `k` must be a live kernel; `out` must be valid for writes.
 */
FlmaStatus flma_kernel_eval(const FlmaKernel *k, uint64_t x_code, uint64_t *out);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* FLMA_H */

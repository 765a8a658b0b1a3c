#include "flma.h"

int demo(void) {
    FlmaContext *ctx = NULL;
    FlmaValue x, y, r;
    FlmaStatus st = flma_context_new(FLMA_PRESET_LOG32, &ctx);
    if (st != FLMA_STATUS_OK) {
        return (int)st;
    }
    flma_encode_f64(ctx, 1.5, &x);
    flma_encode_f64(ctx, -0.25, &y);
    st = flma_inner_product(ctx, &x, &y, 1, &r);
    if (st != FLMA_STATUS_OK || r.kind != FLMA_CLASS_FINITE) {
        const char *msg = flma_last_error();
        (void)msg;
    }
    double v = 0.0;
    flma_to_f64(ctx, &r, &v);
    flma_context_free(ctx);

    FlmaKernel *k = NULL;
    uint64_t lo, hi, out;
    flma_exp_kernel_new(23, 23, 14, 28, 28, 2, &k);
    flma_kernel_domain(k, &lo, &hi);
    flma_kernel_eval(k, lo, &out);
    flma_kernel_free(k);
    return v < 0.0 ? 0 : 1;
}

/* Build: cc smoke.c -I../include -L../../../target/release -lcvenc_ffi -lm -lpthread -ldl
   Run with LD_LIBRARY_PATH=../../../target/release, or link libcvenc_ffi.a statically. */
#include <stdio.h>
#include <stdlib.h>
#include "cvenc.h"

int main(void) {
    CvLabelMap *gt = NULL, *pred = NULL;
    CvTargets *targets = NULL;
    size_t h = 128, w = 128;
    if (cvenc_synth_scene(7, h, w, 12, &gt) != CV_STATUS_OK) goto fail;
    if (cvenc_encode(gt, NULL, &targets) != CV_STATUS_OK) goto fail;

    size_t n = h * w;
    unsigned char *inside = malloc(n), *center = malloc(n);
    double *dx = malloc(n * sizeof *dx), *dy = malloc(n * sizeof *dy);
    double *ip = malloc(n * sizeof *ip), *cp = malloc(n * sizeof *cp);
    if (cvenc_targets_copy(targets, inside, center, dx, dy, n) != CV_STATUS_OK) goto fail;
    for (size_t i = 0; i < n; i++) {
        ip[i] = inside[i];
        cp[i] = center[i];
    }
    if (cvenc_decode(h, w, ip, cp, dx, dy, NULL, &pred) != CV_STATUS_OK) goto fail;

    CvMetrics m;
    if (cvenc_evaluate(gt, pred, CV_AJI_MODE_LITERAL, &m) != CV_STATUS_OK) goto fail;
    printf("aji=%f iou=%f dice=%f\n", m.aji, m.iou, m.dice);

    cvenc_label_map_free(pred);
    cvenc_targets_free(targets);
    cvenc_label_map_free(gt);
    free(inside); free(center); free(dx); free(dy); free(ip); free(cp);
    return 0;

fail:
    fprintf(stderr, "error: %s\n", cvenc_last_error_message());
    return 1;
}

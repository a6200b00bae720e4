/* SPDX-License-Identifier: MIT OR Apache-2.0 */
#include <math.h>
#include <stdio.h>
#include "serialcorr.h"

int main(void) {
    ScSaddle r;
    if (serialcorr_unconditional_tail(39, 0.5, 0.6, &r) != SC_STATUS_OK) return 1;
    printf("%.10f\n", r.tail);

    ScDistribution normal = {SC_DIST_KIND_NORMAL, 0};
    ScSeries *s = NULL;
    if (serialcorr_series_simulate(39, 0.5, normal, 7, &s) != SC_STATUS_OK) return 2;
    ScConditional *c = NULL;
    if (serialcorr_conditional_gaussian(s, 0.5, &c) != SC_STATUS_OK) return 3;
    ScSaddle cr;
    if (serialcorr_conditional_tail(c, 0.6, &cr) != SC_STATUS_OK) return 4;
    printf("%.10f\n", cr.tail);
    serialcorr_conditional_free(c);
    serialcorr_series_free(s);

    if (serialcorr_unconditional_tail(39, 1.5, 0.6, &r) != SC_STATUS_INVALID_ARGUMENT) return 5;
    if (serialcorr_last_error() == NULL) return 6;
    return 0;
}

#include <math.h>
#include <stdio.h>
#include <string.h>
#include "maxstab.h"

#define CHECK(cond)                                             \
    do {                                                        \
        if (!(cond)) {                                          \
            fprintf(stderr, "check failed: %s\n", #cond);       \
            return 1;                                           \
        }                                                       \
    } while (0)

int main(void) {
    double xs[] = {0.0, 2.0};
    double ps[] = {0.5, 0.5};
    MaxstabDist *f = NULL, *g = NULL, *j = NULL;
    MaxstabMeasure *es = NULL;
    double v = 0.0;
    bool leq = false, passed = true;
    char *report = NULL;

    CHECK(maxstab_dist_new(xs, ps, 2, &f) == MAXSTAB_STATUS_OK);
    CHECK(maxstab_dist_from_json("{\"atoms\":[{\"x\":1,\"p\":1}]}", &g) == MAXSTAB_STATUS_OK);
    CHECK(maxstab_dist_join(f, g, &j) == MAXSTAB_STATUS_OK);
    CHECK(maxstab_dist_len(j) == 2);
    CHECK(maxstab_dist_cdf(j, 1.0, &v) == MAXSTAB_STATUS_OK && v == 0.5);
    CHECK(maxstab_dist_fsd_leq(f, j, &leq) == MAXSTAB_STATUS_OK && leq);

    CHECK(maxstab_measure_from_json("{\"kind\":\"es\",\"alpha\":0.5}", &es) == MAXSTAB_STATUS_OK);
    CHECK(maxstab_measure_eval(es, f, &v) == MAXSTAB_STATUS_OK && v == 2.0);
    CHECK(maxstab_check_axiom(es, "maxs", 3, 2000, 0.0, &report, &passed) == MAXSTAB_STATUS_OK);
    CHECK(!passed && strstr(report, "\"verdict\":\"fail\"") != NULL);
    maxstab_string_free(report);

    ps[1] = 0.4;
    MaxstabDist *bad = NULL;
    CHECK(maxstab_dist_new(xs, ps, 2, &bad) == MAXSTAB_STATUS_MASS_SUM);
    CHECK(bad == NULL && strstr(maxstab_last_error(), "MASS_SUM") != NULL);

    maxstab_measure_free(es);
    maxstab_dist_free(j);
    maxstab_dist_free(g);
    maxstab_dist_free(f);
    puts("ok");
    return 0;
}

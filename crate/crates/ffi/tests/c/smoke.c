#include <math.h>
#include <stdio.h>
#include <string.h>

#include "fenchel_lab.h"

#define CHECK(cond)                                                    \
    do {                                                               \
        if (!(cond)) {                                                 \
            const char *e = fl_last_error();                           \
            fprintf(stderr, "%s:%d: %s (%s)\n", __FILE__, __LINE__,    \
                    #cond, e ? e : "no error");                        \
            return 1;                                                  \
        }                                                              \
    } while (0)

int main(void) {
    const char *spec =
        "{\"kind\":\"polyhedral\",\"pieces\":["
        "{\"slope\":[1,0],\"intercept\":0},{\"slope\":[-1,0],\"intercept\":0},"
        "{\"slope\":[0,1],\"intercept\":0},{\"slope\":[0,-1],\"intercept\":0}]}";
    FlFunction *f = NULL;
    CHECK(fl_function_from_json(spec, &f) == FL_STATUS_OK);
    CHECK(fl_function_dim(f) == 2);

    double x[2] = {0.5, -2.0};
    double v = 0.0;
    CHECK(fl_function_eval(f, x, 2, &v) == FL_STATUS_OK);
    CHECK(fabs(v - 2.0) < 1e-12);

    /* the sup-norm has the l1 ball as the domain of its conjugate */
    FlFunction *c = NULL;
    CHECK(fl_function_conjugate(f, NULL, &c) == FL_STATUS_OK);
    double inside[2] = {0.5, 0.5}, outside[2] = {0.75, 0.5};
    CHECK(fl_function_eval(c, inside, 2, &v) == FL_STATUS_OK && fabs(v) < 1e-12);
    CHECK(fl_function_eval(c, outside, 2, &v) == FL_STATUS_OK && isinf(v) && v > 0);

    double zero[2] = {0.0, 0.0}, dir[2] = {1.0, 1.0};
    CHECK(fl_eps_subdiff_support(f, zero, 2, 0.0, dir, &v) == FL_STATUS_OK);
    CHECK(fabs(v - 1.0) < 1e-12);

    CHECK(fl_function_eval(f, x, 3, &v) == FL_STATUS_DIMENSION);
    CHECK(fl_last_error() != NULL && strstr(fl_last_error(), "DimensionError") != NULL);

    char *json = NULL;
    CHECK(fl_function_to_json(c, &json) == FL_STATUS_OK);
    CHECK(strstr(json, "\"kind\":\"polyhedral\"") != NULL);
    fl_string_free(json);

    fl_function_free(c);
    fl_function_free(f);
    puts("ok");
    return 0;
}

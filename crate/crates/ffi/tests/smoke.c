#include <stdio.h>
#include <string.h>
#include "suffice.h"

#define CHECK(x) do { if (!(x)) { fprintf(stderr, "failed: %s (%s)\n", #x, suffice_last_error() ? suffice_last_error() : ""); return 1; } } while (0)

int main(void) {
    SufficeSentence *s = NULL;
    SufficeParams *p = NULL;
    SufficeEstimator *e = NULL;
    bool v = false;
    CHECK(suffice_sentence_parse("EX X. AA y. X(1) & y%2=0", &s) == SUFFICE_STATUS_OK);
    CHECK(suffice_params_new(0, "lin(2)", &p) == SUFFICE_STATUS_OK);
    CHECK(suffice_saturate(s, p, &e) == SUFFICE_STATUS_OK);
    CHECK(suffice_truth_by_estimator(s, e, &v) == SUFFICE_STATUS_OK && v);
    char *text = NULL;
    CHECK(suffice_estimator_render(e, &text) == SUFFICE_STATUS_OK && strlen(text) > 0);
    suffice_string_free(text);
    CHECK(suffice_sentence_parse("AA y. y%0=0", &s) == SUFFICE_STATUS_OUT_OF_CLASS);
    CHECK(strstr(suffice_last_error(), "period") != NULL);
    suffice_estimator_free(e);
    suffice_params_free(p);
    suffice_sentence_free(s);
    printf("ok %s\n", suffice_version());
    return 0;
}

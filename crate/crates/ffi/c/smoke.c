#include <stdio.h>
#include <string.h>
#include "rankone.h"

int main(void) {
    RoTower *t = NULL;
    if (ro_tower_new("{\"family\": \"chacon\"}", &t) != RO_STATUS_OK) {
        fprintf(stderr, "%s\n", ro_last_error());
        return 1;
    }
    char *mu = NULL;
    if (ro_correlation(t, "I", "I", "1", &mu) != RO_STATUS_OK) {
        fprintf(stderr, "%s\n", ro_last_error());
        return 1;
    }
    int ok = strcmp(mu, "1/2") == 0;
    printf("mu(I & T I) = %s\n", mu);
    ro_string_free(mu);

    char *json = NULL;
    RoStatus s = ro_theorem_json(t, "srwm-search", 0, &json);
    ok = ok && s == RO_STATUS_OK && strstr(json, "\"pass\": true") != NULL;
    ro_string_free(json);

    RoTower *bad = NULL;
    ok = ok && ro_tower_new("{\"family\": \"nope\"}", &bad) == RO_STATUS_CONFIG && bad == NULL;
    ok = ok && ro_last_error() != NULL;
    ro_tower_free(t);
    return ok ? 0 : 1;
}

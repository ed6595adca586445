#include <stdio.h>
#include <stdlib.h>
#include <string.h>

#include "openxxx.h"

static const char *CONFIG =
    "{\"n\": 2, \"sites\": [{\"mu\": [1, 0], \"a\": 0.2}],"
    " \"boundary\": {\"a_split\": 1, \"c_minus\": [0.4, 0.0]}}";

int main(void) {
    OxModel *m = NULL;
    if (ox_model_from_json(CONFIG, 0, 0, &m) != OX_STATUS_OK) {
        fprintf(stderr, "%s\n", ox_last_error());
        return 1;
    }
    size_t dim = ox_model_quantum_dim(m);
    double *buf = malloc(2 * dim * dim * sizeof(double));
    if (ox_transfer_matrix(m, 0.3, 0.1, buf, 2 * dim * dim) != OX_STATUS_OK) return 2;
    if (ox_transfer_matrix(m, 0.3, 0.1, buf, 1) != OX_STATUS_BUFFER_TOO_SMALL) return 3;
    char *json = NULL;
    if (ox_identity_report(m, &json) != OX_STATUS_OK) return 4;
    if (strstr(json, "\"passed\": true") == NULL) return 5;
    ox_string_free(json);
    free(buf);
    ox_model_free(m);
    if (ox_model_from_json("{", 0, 0, &m) != OX_STATUS_CONFIG) return 6;
    printf("dim %zu ok\n", dim);
    return 0;
}

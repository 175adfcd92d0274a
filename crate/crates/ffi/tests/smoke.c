#include <stdio.h>
#include <string.h>
#include "wstate.h"

int main(void) {
    WsParams *p = ws_params_new();
    if (ws_params_set(p, "gamma", 0.0) != WS_STATUS_OK) return 1;
    double plateaus[4];
    if (ws_outcome_plateaus(p, plateaus) != WS_STATUS_OK) return 2;
    WsTrajectory *t = NULL;
    if (ws_trajectory_run(p, "separable_plus", WS_ENGINE_POLARON, WS_CONTROL_NONE, 1.0, 7, 100, &t) != WS_STATUS_OK) return 3;
    size_t n = ws_trajectory_len(t);
    double outcome[16];
    if (n != 10 || ws_trajectory_outcome(t, outcome, 16) != WS_STATUS_OK) return 4;
    if (ws_params_set(p, "nonsense", 1.0) != WS_STATUS_INVALID_ARGUMENT) return 5;
    char msg[256];
    if (ws_last_error_message(msg, sizeof msg) != WS_STATUS_OK || strstr(msg, "nonsense") == NULL) return 6;
    printf("%s %.2f %.2f\n", ws_version(), plateaus[2], plateaus[3]);
    ws_trajectory_free(t);
    ws_params_free(p);
    return 0;
}

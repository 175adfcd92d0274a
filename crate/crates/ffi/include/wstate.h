#ifndef WSTATE_H
#define WSTATE_H

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

// Feedback applied during a trajectory.
typedef enum WsControl {
  WS_CONTROL_NONE = 0,
  // Bang-bang feedback, no kick when the gradient vanishes.
  WS_CONTROL_SIGN_ZERO = 1,
  // Bang-bang feedback, positive kick when the gradient vanishes.
  WS_CONTROL_SIGN_POSITIVE = 2,
} WsControl;

typedef enum WsEngine {
  WS_ENGINE_POLARON = 0,
  WS_ENGINE_ADIABATIC = 1,
} WsEngine;

// Result code of every fallible call.
typedef enum WsStatus {
  WS_STATUS_OK = 0,
  WS_STATUS_NULL_POINTER = 1,
  WS_STATUS_INVALID_ARGUMENT = 2,
  WS_STATUS_CONFIG = 3,
  WS_STATUS_STEP_SIZE = 4,
  WS_STATUS_NUMERICAL = 5,
  WS_STATUS_UNDEFINED_RATIO = 6,
  WS_STATUS_TRUNCATION = 7,
  WS_STATUS_ENSEMBLE_FAILURE = 8,
  WS_STATUS_IO = 9,
  WS_STATUS_PARSE = 10,
  WS_STATUS_BUFFER_TOO_SMALL = 11,
  WS_STATUS_PANIC = 12,
} WsStatus;

// Physical parameters.
typedef struct WsParams WsParams;

// 8x8 qubit density matrix.
typedef struct WsState WsState;

// Completed trajectory record.
typedef struct WsTrajectory WsTrajectory;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Library version as a static NUL-terminated string.
const char *ws_version(void);

// Bytes needed to hold the last error message, including the terminator.
size_t ws_last_error_length(void);

// Copies the last error message of this thread into `buf`.
//
// # Safety
// `buf` must be valid for `len` bytes.
enum WsStatus ws_last_error_message(char *buf, size_t len);

// Parameters with the default values.
struct WsParams *ws_params_new(void);

// # Safety
// `params` must come from `ws_params_new` and not be used afterwards.
void ws_params_free(struct WsParams *params);

// Sets a parameter by name. `gamma` sets all three decay rates and
// `include_stray_drive` takes 0 or 1.
//
// # Safety
// `params` must be a live handle and `name` a NUL-terminated string.
enum WsStatus ws_params_set(struct WsParams *params, const char *name, double value);

// # Safety
// `params` must be a live handle, `name` NUL-terminated and `out` writable.
enum WsStatus ws_params_get(const struct WsParams *params, const char *name, double *out);

// # Safety
// `params` must be a live handle.
enum WsStatus ws_params_validate(const struct WsParams *params);

// Steady outcome plateaus of `<c_0 + c_0^dag>` for `|111>`, two
// excitations, one excitation and `|000>`.
//
// # Safety
// `params` must be a live handle and `out` writable for 4 values.
enum WsStatus ws_outcome_plateaus(const struct WsParams *params, double *out);

// Steady outcome gap between `|000>` and one excitation at `chi / kappa`.
//
// # Safety
// `params` must be a live handle and `out` writable.
enum WsStatus ws_outcome_separation(const struct WsParams *params,
                                    double chi_over_kappa,
                                    double *out);

// Projector onto a named state: `ground`, `excited`, `w_minus`, `w_plus`
// or `separable_plus`.
//
// # Safety
// `name` must be NUL-terminated and `out` writable.
enum WsStatus ws_state_new_named(const char *name, struct WsState **out);

// # Safety
// `state` must come from this library and not be used afterwards.
void ws_state_free(struct WsState *state);

// Element `(row, col)` of the density matrix.
//
// # Safety
// `state` must be a live handle; `re` and `im` writable.
enum WsStatus ws_state_element(const struct WsState *state,
                               size_t row,
                               size_t col,
                               double *re,
                               double *im);

// Fidelity of `state` with a named pure state.
//
// # Safety
// `state` must be a live handle, `target` NUL-terminated and `out` writable.
enum WsStatus ws_state_fidelity(const struct WsState *state, const char *target, double *out);

// Runs one trajectory from a named initial state. Fidelity is measured
// against `|W->`.
//
// # Safety
// `params` must be a live handle, `initial` NUL-terminated and `out` writable.
enum WsStatus ws_trajectory_run(const struct WsParams *params,
                                const char *initial,
                                enum WsEngine engine,
                                enum WsControl control,
                                double t_final,
                                uint64_t seed,
                                size_t stride,
                                struct WsTrajectory **out);

// # Safety
// `trajectory` must come from `ws_trajectory_run` and not be used afterwards.
void ws_trajectory_free(struct WsTrajectory *trajectory);

// Number of stored samples; 0 for a null handle.
//
// # Safety
// `trajectory` must be null or a live handle.
size_t ws_trajectory_len(const struct WsTrajectory *trajectory);

// # Safety
// `trajectory` must be a live handle and `buf` writable for `len` values.
enum WsStatus ws_trajectory_times(const struct WsTrajectory *trajectory, double *buf, size_t len);

// # Safety
// `trajectory` must be a live handle and `buf` writable for `len` values.
enum WsStatus ws_trajectory_fidelity(const struct WsTrajectory *trajectory,
                                     double *buf,
                                     size_t len);

// Noiseless `<c_0 + c_0^dag>` at each stored time.
//
// # Safety
// `trajectory` must be a live handle and `buf` writable for `len` values.
enum WsStatus ws_trajectory_outcome(const struct WsTrajectory *trajectory, double *buf, size_t len);

// Copy of the final conditional state.
//
// # Safety
// `trajectory` must be a live handle and `out` writable.
enum WsStatus ws_trajectory_final_state(const struct WsTrajectory *trajectory,
                                        struct WsState **out);

// Runs the experiment described by a flat TOML file and writes its outputs.
//
// # Safety
// `path` must be NUL-terminated.
enum WsStatus ws_experiment_run_file(const char *path);

// Runs the experiment described by TOML text. A nonzero `overwrite_seed`
// replaces the master seed.
//
// # Safety
// `toml` must be NUL-terminated.
enum WsStatus ws_experiment_run_toml(const char *toml, int overwrite_seed, uint64_t seed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* WSTATE_H */

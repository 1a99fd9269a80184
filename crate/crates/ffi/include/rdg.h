#ifndef RDG_H
#define RDG_H

/* Generated by cbindgen from crates/ffi/src/lib.rs. Do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

typedef enum RdgStatus {
  RDG_STATUS_OK = 0,
  RDG_STATUS_NULL_POINTER = 1,
  RDG_STATUS_INVALID_ARGUMENT = 2,
  RDG_STATUS_CONFIG = 3,
  RDG_STATUS_SOLVER_FAILURE = 4,
  RDG_STATUS_IO = 5,
  RDG_STATUS_PANIC = 6,
} RdgStatus;

typedef enum RdgKind {
  RDG_KIND_MEAN_VALUE = 0,
  RDG_KIND_GONZALEZ = 1,
  RDG_KIND_OSEEN_FRANK = 2,
} RdgKind;

// Opaque simulation state.
typedef struct RdgSimulation RdgSimulation;

typedef struct RdgGridSpec {
  size_t dims[3];
  double lengths[3];
  double origin[3];
} RdgGridSpec;

// Discrete gradient selection. `gauss_points` applies to the mean-value
// gradient and `eps0` to Gonzalez.
typedef struct RdgMethod {
  enum RdgKind kind;
  uint32_t gauss_points;
  double eps0;
} RdgMethod;

typedef struct RdgEnergy {
  double total;
  double splay;
  double twist;
  double bend;
} RdgEnergy;

typedef struct RdgStepInfo {
  double t;
  double tau;
  struct RdgEnergy energy;
  double linf_length_err;
  size_t newton_iters;
  size_t krylov_iters;
  size_t fevals;
} RdgStepInfo;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

// Creates a simulation from configuration text (the same format as the
// `rdg run` config file). The field starts at the configured initial
// condition and `rdg_simulation_step` with `tau <= 0` uses the configured
// fixed step, or `tau_max` for adaptive controls.
//
// # Safety
// `config` must be a NUL-terminated string and `out` a valid pointer.
enum RdgStatus rdg_simulation_from_config(const char *config, struct RdgSimulation **out);

// Creates a simulation with default solver settings. The field starts as
// the uniform director `(0, 0, 1)` at `t = 0`.
//
// # Safety
// `grid`, `method` and `out` must be valid pointers.
enum RdgStatus rdg_simulation_new(const struct RdgGridSpec *grid,
                                  double k1,
                                  double k2,
                                  double k3,
                                  const struct RdgMethod *method,
                                  struct RdgSimulation **out);

// Releases a simulation. Null is ignored.
//
// # Safety
// `sim` must come from this library and not be used afterwards.
void rdg_simulation_free(struct RdgSimulation *sim);

// Number of grid points `N`.
//
// # Safety
// `sim` and `out` must be valid pointers.
enum RdgStatus rdg_simulation_point_count(const struct RdgSimulation *sim, size_t *out);

// Replaces the field with `len = 3 N` finite values.
//
// # Safety
// `data` must point to `len` readable doubles.
enum RdgStatus rdg_simulation_set_field(struct RdgSimulation *sim, const double *data, size_t len);

// Copies the field into `out`, which must hold `len = 3 N` doubles.
//
// # Safety
// `out` must point to `len` writable doubles.
enum RdgStatus rdg_simulation_get_field(const struct RdgSimulation *sim, double *out, size_t len);

// Advances one step of size `tau` (the configured default when `tau <= 0`).
// On solver failure the state is left unchanged. `info` may be null.
//
// # Safety
// `sim` must be valid; `info` null or valid.
enum RdgStatus rdg_simulation_step(struct RdgSimulation *sim, double tau, struct RdgStepInfo *info);

// Current simulation time.
//
// # Safety
// `sim` and `out` must be valid pointers.
enum RdgStatus rdg_simulation_time(const struct RdgSimulation *sim, double *out);

// Energy of the current field.
//
// # Safety
// `sim` and `out` must be valid pointers.
enum RdgStatus rdg_simulation_energy(const struct RdgSimulation *sim, struct RdgEnergy *out);

// Largest `| |n| − 1 |` over the grid.
//
// # Safety
// `sim` and `out` must be valid pointers.
enum RdgStatus rdg_simulation_length_error(const struct RdgSimulation *sim, double *out);

// Worst discrete gradient identity residual over all gradients and `trials`
// random field pairs on an `n³` periodic cube with moduli `k1, k2, k3`.
//
// # Safety
// `max_residual` must be a valid pointer.
enum RdgStatus rdg_verify_dg(size_t n,
                             size_t trials,
                             uint64_t seed,
                             double k1,
                             double k2,
                             double k3,
                             double *max_residual);

// Description of the last failure on this thread, or an empty string. The
// pointer stays valid until the next call into this library on the thread.
const char *rdg_last_error_message(void);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* RDG_H */

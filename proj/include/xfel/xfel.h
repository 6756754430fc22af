/* C interface to the solver. All functions return an xfel_status; on failure
 * xfel_last_error() describes the problem (per thread). Handles are opaque and
 * released with the matching *_free function. */
#ifndef XFEL_XFEL_H
#define XFEL_XFEL_H

#include <stddef.h>

#if defined(XFEL_BUILDING_LIBRARY)
#define XFEL_API __attribute__((visibility("default")))
#else
#define XFEL_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum xfel_status {
  XFEL_OK = 0,
  XFEL_ERR_CONFIG = 1,
  XFEL_ERR_DOMAIN = 2,
  XFEL_ERR_UNSUPPORTED = 3,
  XFEL_ERR_BREAKDOWN = 4,
  XFEL_ERR_COMPARISON = 5,
  XFEL_ERR_CONVERGENCE = 6,
  XFEL_ERR_DIVERGING_FLOW = 7,
  XFEL_ERR_IO = 8,
  XFEL_ERR_INVALID_ARGUMENT = 9,
  XFEL_ERR_INTERNAL = 10
} xfel_status;

typedef struct xfel_grid xfel_grid;
typedef struct xfel_field xfel_field;
typedef struct xfel_scenario xfel_scenario;
typedef struct xfel_evolution xfel_evolution;

typedef struct xfel_diagnostics {
  double t, mass, kinetic, hartree, potential, nonlinear, total, h1, max_density;
} xfel_diagnostics;

typedef struct xfel_run_summary {
  int unexpected_blowup;
  int blew_up;          /* any model */
  int has_distance;     /* model "both" */
  double l2_final, l2_sup, energy_l1;
} xfel_run_summary;

typedef struct xfel_comparison_row {
  double omega, l2_final, l2_sup, energy_l1, rate, energy_rate;
} xfel_comparison_row;

typedef struct xfel_blowup_row {
  double sigma;
  int averaged_blew_up, fast_blew_up;
  double averaged_time, fast_time, h1_gap;
} xfel_blowup_row;

typedef struct xfel_ground_state_info {
  double energy, chemical_potential, residual;
  long iterations, monotonicity_violations;
} xfel_ground_state_info;

typedef struct xfel_dir_comparison {
  double energy_l1, slice_l2_final, slice_l2_sup;
  size_t frames;
} xfel_dir_comparison;

XFEL_API const char* xfel_last_error(void);
XFEL_API const char* xfel_status_name(xfel_status status);
XFEL_API const char* xfel_version(void);
XFEL_API xfel_status xfel_set_log_level(const char* level);
XFEL_API xfel_status xfel_set_threads(int threads);
XFEL_API void xfel_string_free(char* s);

/* Grids and fields. Field values are interleaved (re, im) doubles. */
XFEL_API xfel_status xfel_grid_create(int dim, const double lengths[3], const int counts[3],
                                      double epsilon, xfel_grid** out);
XFEL_API void xfel_grid_free(xfel_grid* grid);
XFEL_API size_t xfel_grid_size(const xfel_grid* grid);

XFEL_API xfel_status xfel_field_create(const xfel_grid* grid, const double* values, xfel_field** out);
XFEL_API xfel_status xfel_field_gaussian(const xfel_grid* grid, const double center[3], double width,
                                         const double wavevector[3], xfel_field** out);
XFEL_API void xfel_field_free(xfel_field* field);
XFEL_API size_t xfel_field_size(const xfel_field* field);
XFEL_API xfel_status xfel_field_values(const xfel_field* field, double* out, size_t n_complex);
XFEL_API xfel_status xfel_field_mass(const xfel_field* field, double* out);
XFEL_API xfel_status xfel_field_h1(const xfel_field* field, double* out);
XFEL_API xfel_status xfel_field_distance(const xfel_field* a, const xfel_field* b, double* out);
XFEL_API xfel_status xfel_kinetic_propagate(xfel_field* field, double dt);
XFEL_API xfel_status xfel_spectral_translate(xfel_field* field, const double shift[3]);
XFEL_API xfel_status xfel_field_save(const xfel_field* field, const char* stem);
XFEL_API xfel_status xfel_field_load(const char* stem, double epsilon, xfel_field** out);

/* Scenarios. */
XFEL_API xfel_status xfel_scenario_load(const char* path, xfel_scenario** out);
XFEL_API xfel_status xfel_scenario_parse(const char* json, xfel_scenario** out);
XFEL_API void xfel_scenario_free(xfel_scenario* scenario);
XFEL_API xfel_status xfel_scenario_set_output(xfel_scenario* scenario, const char* directory);
XFEL_API xfel_status xfel_scenario_to_json(const xfel_scenario* scenario, char** out);
/* Number of entries of a sweep list: "omegas", "sigmas" or "etas" (absolute eta values). */
XFEL_API xfel_status xfel_scenario_sweep_values(const xfel_scenario* scenario, const char* which,
                                                double* out, size_t capacity, size_t* count);

XFEL_API xfel_status xfel_run(const xfel_scenario* scenario, xfel_run_summary* summary);
XFEL_API xfel_status xfel_sweep_omega(const xfel_scenario* scenario, const double* omegas, size_t n,
                                      xfel_comparison_row* rows, int* monotone);
XFEL_API xfel_status xfel_sweep_sigma(const xfel_scenario* scenario, const double* sigmas, size_t n,
                                      int include_fast, xfel_blowup_row* rows, int* ordering_ok);
/* distances and potential_sup receive n-1 entries. */
XFEL_API xfel_status xfel_sweep_eta(const xfel_scenario* scenario, const double* etas, size_t n,
                                    double* distances, double* potential_sup, int* monotone);
XFEL_API xfel_status xfel_trap(const xfel_scenario* scenario, double* max_displacement);
XFEL_API xfel_status xfel_td(const xfel_scenario* scenario, double* ablation_l2);
XFEL_API xfel_status xfel_lattice(const xfel_scenario* scenario, double* coarse_plain_error,
                                  double* coarse_bloch_error);
/* Writes the ground state to <stem>.bin/.hdr when stem is non-null. */
XFEL_API xfel_status xfel_ground_state(const xfel_scenario* scenario, const char* stem,
                                       xfel_ground_state_info* info);
XFEL_API xfel_status xfel_compare(const char* dir_a, const char* dir_b, double window,
                                  xfel_dir_comparison* out);

/* Step-wise evolution of one model (fast != 0 keeps the oscillating potential). */
XFEL_API xfel_status xfel_evolution_create(const xfel_scenario* scenario, int fast,
                                           const xfel_field* initial, xfel_evolution** out);
XFEL_API void xfel_evolution_free(xfel_evolution* evolution);
XFEL_API xfel_status xfel_evolution_advance(xfel_evolution* evolution, int* done);
XFEL_API xfel_status xfel_evolution_diagnostics(const xfel_evolution* evolution, xfel_diagnostics* out);
XFEL_API xfel_status xfel_evolution_field(const xfel_evolution* evolution, xfel_field** out);

#ifdef __cplusplus
}
#endif

#endif

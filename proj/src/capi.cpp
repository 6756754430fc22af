#include "xfel/xfel.h"

#include <cstring>
#include <exception>
#include <memory>
#include <string>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "xfel/config.hpp"
#include "xfel/log.hpp"
#include "xfel/scenario.hpp"
#include "xfel/spectral.hpp"

struct xfel_grid {
  xfel::Grid grid;
};
struct xfel_field {
  xfel::ComplexField field;
};
struct xfel_scenario {
  xfel::ScenarioConfig config;
};
struct xfel_evolution {
  xfel::Evolution evolution;
};

namespace {

thread_local std::string g_last_error;

xfel_status status_of(xfel::ErrorKind kind) {
  using xfel::ErrorKind;
  switch (kind) {
    case ErrorKind::config: return XFEL_ERR_CONFIG;
    case ErrorKind::domain: return XFEL_ERR_DOMAIN;
    case ErrorKind::unsupported: return XFEL_ERR_UNSUPPORTED;
    case ErrorKind::numerical_breakdown: return XFEL_ERR_BREAKDOWN;
    case ErrorKind::comparison: return XFEL_ERR_COMPARISON;
    case ErrorKind::convergence: return XFEL_ERR_CONVERGENCE;
    case ErrorKind::diverging_flow: return XFEL_ERR_DIVERGING_FLOW;
    case ErrorKind::io: return XFEL_ERR_IO;
  }
  return XFEL_ERR_INTERNAL;
}

template <class Fn>
xfel_status guarded(Fn&& fn) {
  try {
    g_last_error.clear();
    fn();
    return XFEL_OK;
  } catch (const xfel::Error& e) {
    g_last_error = e.what();
    return status_of(e.kind());
  } catch (const std::invalid_argument& e) {
    g_last_error = e.what();
    return XFEL_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return XFEL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown exception";
    return XFEL_ERR_INTERNAL;
  }
}

template <class T>
void require(const T* p, const char* what) {
  if (!p) throw std::invalid_argument(std::string(what) + " is null");
}

xfel::Vec3 vec3(const double* v) { return v ? xfel::Vec3{v[0], v[1], v[2]} : xfel::Vec3{0, 0, 0}; }

xfel_diagnostics to_c(const xfel::DiagnosticsRecord& r) {
  return {r.t, r.mass, r.kinetic, r.hartree, r.potential, r.nonlinear, r.total, r.h1, r.max_density};
}

}  // namespace

extern "C" {

const char* xfel_last_error(void) { return g_last_error.c_str(); }

const char* xfel_status_name(xfel_status s) {
  switch (s) {
    case XFEL_OK: return "ok";
    case XFEL_ERR_CONFIG: return "config";
    case XFEL_ERR_DOMAIN: return "domain";
    case XFEL_ERR_UNSUPPORTED: return "unsupported";
    case XFEL_ERR_BREAKDOWN: return "numerical_breakdown";
    case XFEL_ERR_COMPARISON: return "comparison";
    case XFEL_ERR_CONVERGENCE: return "convergence";
    case XFEL_ERR_DIVERGING_FLOW: return "diverging_flow";
    case XFEL_ERR_IO: return "io";
    case XFEL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case XFEL_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* xfel_version(void) { return "0.1.0"; }

xfel_status xfel_set_log_level(const char* level) {
  return guarded([&] {
    require(level, "level");
    xfel::log::set_level(xfel::log::parse_level(level));
  });
}

xfel_status xfel_set_threads(int threads) {
  return guarded([&] {
    if (threads < 1) throw std::invalid_argument("threads must be >= 1");
#ifdef _OPENMP
    omp_set_num_threads(threads);
#endif
  });
}

void xfel_string_free(char* s) { std::free(s); }

xfel_status xfel_grid_create(int dim, const double lengths[3], const int counts[3], double epsilon,
                             xfel_grid** out) {
  return guarded([&] {
    require(lengths, "lengths");
    require(counts, "counts");
    require(out, "out");
    *out = new xfel_grid{xfel::Grid(dim, vec3(lengths), {counts[0], counts[1], counts[2]}, epsilon)};
  });
}

void xfel_grid_free(xfel_grid* grid) { delete grid; }
size_t xfel_grid_size(const xfel_grid* grid) { return grid ? grid->grid.size() : 0; }

xfel_status xfel_field_create(const xfel_grid* grid, const double* values, xfel_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    xfel::ComplexField f(grid->grid);
    if (values) std::memcpy(f.data(), values, f.size() * sizeof(xfel::cplx));
    *out = new xfel_field{std::move(f)};
  });
}

xfel_status xfel_field_gaussian(const xfel_grid* grid, const double center[3], double width,
                                const double wavevector[3], xfel_field** out) {
  return guarded([&] {
    require(grid, "grid");
    require(out, "out");
    if (!(width > 0.0)) throw std::invalid_argument("width must be positive");
    *out = new xfel_field{xfel::gaussian_packet(grid->grid, vec3(center), width, vec3(wavevector))};
  });
}

void xfel_field_free(xfel_field* field) { delete field; }
size_t xfel_field_size(const xfel_field* field) { return field ? field->field.size() : 0; }

xfel_status xfel_field_values(const xfel_field* field, double* out, size_t n) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    if (n < field->field.size()) throw std::invalid_argument("output buffer too small");
    std::memcpy(out, field->field.data(), field->field.size() * sizeof(xfel::cplx));
  });
}

xfel_status xfel_field_mass(const xfel_field* field, double* out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = xfel::mass(field->field);
  });
}

xfel_status xfel_field_h1(const xfel_field* field, double* out) {
  return guarded([&] {
    require(field, "field");
    require(out, "out");
    *out = xfel::h1_seminorm(field->field);
  });
}

xfel_status xfel_field_distance(const xfel_field* a, const xfel_field* b, double* out) {
  return guarded([&] {
    require(a, "a");
    require(b, "b");
    require(out, "out");
    if (!a->field.grid().same_mesh(b->field.grid()))
      xfel::fail(xfel::ErrorKind::comparison, "fields live on different grids");
    *out = xfel::l2_distance(a->field, b->field);
  });
}

xfel_status xfel_kinetic_propagate(xfel_field* field, double dt) {
  return guarded([&] {
    require(field, "field");
    xfel::kinetic_propagate_inplace(field->field, dt);
  });
}

xfel_status xfel_spectral_translate(xfel_field* field, const double shift[3]) {
  return guarded([&] {
    require(field, "field");
    require(shift, "shift");
    xfel::spectral_translate_inplace(field->field, vec3(shift));
  });
}

xfel_status xfel_field_save(const xfel_field* field, const char* stem) {
  return guarded([&] {
    require(field, "field");
    require(stem, "stem");
    xfel::write_field(stem, field->field);
  });
}

xfel_status xfel_field_load(const char* stem, double epsilon, xfel_field** out) {
  return guarded([&] {
    require(stem, "stem");
    require(out, "out");
    *out = new xfel_field{xfel::read_field(stem, epsilon)};
  });
}

xfel_status xfel_scenario_load(const char* path, xfel_scenario** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    *out = new xfel_scenario{xfel::load_scenario(path)};
  });
}

xfel_status xfel_scenario_parse(const char* json, xfel_scenario** out) {
  return guarded([&] {
    require(json, "json");
    require(out, "out");
    *out = new xfel_scenario{xfel::parse_scenario(json)};
  });
}

void xfel_scenario_free(xfel_scenario* scenario) { delete scenario; }

xfel_status xfel_scenario_set_output(xfel_scenario* scenario, const char* directory) {
  return guarded([&] {
    require(scenario, "scenario");
    require(directory, "directory");
    scenario->config.output.directory = directory;
  });
}

xfel_status xfel_scenario_to_json(const xfel_scenario* scenario, char** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    const std::string s = xfel::serialize_scenario(scenario->config);
    char* buf = static_cast<char*>(std::malloc(s.size() + 1));
    if (!buf) throw std::bad_alloc();
    std::memcpy(buf, s.c_str(), s.size() + 1);
    *out = buf;
  });
}

xfel_status xfel_scenario_sweep_values(const xfel_scenario* scenario, const char* which,
                                       double* out, size_t capacity, size_t* count) {
  return guarded([&] {
    require(scenario, "scenario");
    require(which, "which");
    require(count, "count");
    const auto sweep = scenario->config.sweep.value_or(xfel::SweepConfig{});
    std::vector<double> v;
    const std::string w = which;
    if (w == "omegas")
      v = sweep.omegas;
    else if (w == "sigmas")
      v = sweep.sigmas;
    else if (w == "etas")
      v = xfel::eta_sweep_values(scenario->config);
    else
      throw std::invalid_argument("unknown sweep list '" + w + "'");
    *count = v.size();
    if (out)
      for (size_t i = 0; i < std::min(capacity, v.size()); ++i) out[i] = v[i];
  });
}

xfel_status xfel_run(const xfel_scenario* scenario, xfel_run_summary* summary) {
  return guarded([&] {
    require(scenario, "scenario");
    const auto r = xfel::run_scenario(scenario->config);
    if (!summary) return;
    *summary = {};
    summary->unexpected_blowup = r.unexpected_blowup;
    for (const auto& run : r.runs) summary->blew_up |= run.record.blew_up();
    if (r.distance) {
      summary->has_distance = 1;
      summary->l2_final = r.distance->l2_final;
      summary->l2_sup = r.distance->l2_sup;
      summary->energy_l1 = r.distance->energy_l1;
    }
  });
}

xfel_status xfel_sweep_omega(const xfel_scenario* scenario, const double* omegas, size_t n,
                             xfel_comparison_row* rows, int* monotone) {
  return guarded([&] {
    require(scenario, "scenario");
    require(omegas, "omegas");
    const auto rep = xfel::run_convergence_suite(scenario->config, std::span(omegas, n));
    if (rows)
      for (size_t i = 0; i < rep.rows.size(); ++i) {
        const auto& r = rep.rows[i];
        rows[i] = {r.omega, r.l2_final, r.l2_sup, r.energy_l1, r.rate, r.energy_rate};
      }
    if (monotone) *monotone = rep.l2_monotone && rep.energy_monotone;
  });
}

xfel_status xfel_sweep_sigma(const xfel_scenario* scenario, const double* sigmas, size_t n,
                             int include_fast, xfel_blowup_row* rows, int* ordering_ok) {
  return guarded([&] {
    require(scenario, "scenario");
    require(sigmas, "sigmas");
    const auto rep = xfel::run_blowup_suite(scenario->config, std::span(sigmas, n), include_fast != 0);
    if (rows)
      for (size_t i = 0; i < rep.cases.size(); ++i) {
        const auto& c = rep.cases[i];
        rows[i] = {c.sigma, c.averaged_time.has_value(), c.fast_time.has_value(),
                   c.averaged_time.value_or(0.0), c.fast_time.value_or(0.0), c.h1_gap};
      }
    if (ordering_ok) *ordering_ok = rep.ordering_ok;
  });
}

xfel_status xfel_sweep_eta(const xfel_scenario* scenario, const double* etas, size_t n,
                           double* distances, double* potential_sup, int* monotone) {
  return guarded([&] {
    require(scenario, "scenario");
    require(etas, "etas");
    const auto rep = xfel::run_stability_sweep(scenario->config, std::span(etas, n));
    for (size_t i = 0; i < rep.solution_distance.size(); ++i) {
      if (distances) distances[i] = rep.solution_distance[i];
      if (potential_sup) potential_sup[i] = rep.potential_sup_diff[i];
    }
    if (monotone) *monotone = rep.monotone;
  });
}

xfel_status xfel_trap(const xfel_scenario* scenario, double* max_displacement) {
  return guarded([&] {
    require(scenario, "scenario");
    const auto rep = xfel::run_trap_scenario(scenario->config);
    if (max_displacement) *max_displacement = rep.max_displacement;
  });
}

xfel_status xfel_td(const xfel_scenario* scenario, double* ablation_l2) {
  return guarded([&] {
    require(scenario, "scenario");
    const auto rep = xfel::run_td_scenario(scenario->config);
    if (ablation_l2) *ablation_l2 = rep.ablation_l2;
  });
}

xfel_status xfel_lattice(const xfel_scenario* scenario, double* coarse_plain_error,
                         double* coarse_bloch_error) {
  return guarded([&] {
    require(scenario, "scenario");
    const auto rep = xfel::run_lattice_scenario(scenario->config);
    if (coarse_plain_error) *coarse_plain_error = rep.coarse_plain_error;
    if (coarse_bloch_error) *coarse_bloch_error = rep.coarse_bloch_error;
  });
}

xfel_status xfel_ground_state(const xfel_scenario* scenario, const char* stem,
                              xfel_ground_state_info* info) {
  return guarded([&] {
    require(scenario, "scenario");
    const auto& c = scenario->config;
    xfel::EvolutionConfig prep = c.evolution(false);
    prep.sigma = c.initial.prep_sigma;
    xfel::GroundStateOptions opt;
    opt.target_mass = c.initial.target_mass;
    opt.tau = c.initial.tau;
    opt.tol = c.initial.tol;
    opt.max_iterations = c.initial.max_iterations;
    const auto r = xfel::imaginary_time_ground_state(c.grid.make(), prep, opt);
    if (stem) xfel::write_field(stem, r.u);
    if (info)
      *info = {r.energy, r.chemical_potential, r.residual, r.iterations, r.monotonicity_violations};
  });
}

xfel_status xfel_compare(const char* dir_a, const char* dir_b, double window, xfel_dir_comparison* out) {
  return guarded([&] {
    require(dir_a, "dir_a");
    require(dir_b, "dir_b");
    require(out, "out");
    const auto c = xfel::compare_directories(dir_a, dir_b, window);
    *out = {c.energy_l1, c.slice_l2_final, c.slice_l2_sup, c.frames};
  });
}

xfel_status xfel_evolution_create(const xfel_scenario* scenario, int fast, const xfel_field* initial,
                                  xfel_evolution** out) {
  return guarded([&] {
    require(scenario, "scenario");
    require(out, "out");
    const auto& c = scenario->config;
    xfel::ComplexField u0 = initial ? initial->field : xfel::make_initial(c);
    *out = new xfel_evolution{xfel::Evolution(std::move(u0), c.evolution(fast != 0))};
  });
}

void xfel_evolution_free(xfel_evolution* evolution) { delete evolution; }

xfel_status xfel_evolution_advance(xfel_evolution* evolution, int* done) {
  return guarded([&] {
    require(evolution, "evolution");
    evolution->evolution.advance();
    if (done) *done = evolution->evolution.done();
  });
}

xfel_status xfel_evolution_diagnostics(const xfel_evolution* evolution, xfel_diagnostics* out) {
  return guarded([&] {
    require(evolution, "evolution");
    require(out, "out");
    *out = to_c(evolution->evolution.last_record());
  });
}

xfel_status xfel_evolution_field(const xfel_evolution* evolution, xfel_field** out) {
  return guarded([&] {
    require(evolution, "evolution");
    require(out, "out");
    *out = new xfel_field{evolution->evolution.state().u};
  });
}

}  // extern "C"

#include "xfel/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "xfel/error.hpp"
#include "xfel/log.hpp"
#include "xfel/spectral.hpp"

namespace xfel {
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

using StepHook = std::function<void(std::size_t model, const EvolutionState&)>;

std::string omega_label(double omega) {
  std::ostringstream os;
  os << "fast_omega" << omega;
  return os.str();
}

json record_summary(const RunRecord& r) {
  json j;
  j["t_final"] = r.t_final;
  j["samples"] = r.samples.size();
  j["blew_up"] = r.blew_up();
  if (r.blowup) {
    j["blowup_time"] = r.blowup->blowup_time;
    j["blowup_reason"] = r.blowup->reason;
    j["blowup_threshold"] = r.blowup->threshold;
  }
  if (!r.samples.empty()) {
    const auto& a = r.samples.front();
    const auto& b = r.samples.back();
    j["mass_drift"] = a.mass > 0.0 ? std::abs(b.mass - a.mass) / a.mass : 0.0;
    j["energy_initial"] = a.total;
    j["energy_final"] = b.total;
  }
  return j;
}

void write_json(const fs::path& path, const json& j) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io, "cannot write " + path.string());
  out << j.dump(2) << '\n';
}

json metadata(const ScenarioConfig& config, const std::string& verb) {
  json j;
  j["verb"] = verb;
  j["config"] = json::parse(serialize_scenario(config));
  const Grid g = config.grid.make();
  j["resolved"] = {{"default_eta", default_eta(g)},
                   {"max_spacing", g.max_spacing()},
                   {"steps", static_cast<long>(std::ceil(config.t_end / config.dt - 1e-9))}};
  return j;
}

// One model stream with its output files.
struct Member {
  std::string label;
  Evolution evolution;
  std::optional<SliceWriter> slices;
  fs::path directory;
  double last_slice_t = -1.0;
  long slice_stride = 1;
  bool full_volume = false;
  int volume_index = 0;

  void emit_frame() {
    const auto& s = evolution.state();
    if (slices) slices->write(s.t, s.u);
    if (full_volume) {
      std::ostringstream name;
      name << "volume_" << volume_index++;
      write_field(directory / name.str(), s.u, s.t);
    }
    last_slice_t = s.t;
  }
  void after_step() {
    const auto& s = evolution.state();
    if (s.step_index % slice_stride == 0 || evolution.done()) emit_frame();
  }
  void finish() {
    if (evolution.state().t != last_slice_t) emit_frame();
    if (!directory.empty()) write_diagnostics_csv(directory / "diagnostics.csv", evolution.record().samples);
  }
};

Member make_member(std::string label, const ComplexField& u0, EvolutionConfig evo,
                   const ScenarioConfig& config, const fs::path& root, bool write) {
  Member m{std::move(label), Evolution(u0, std::move(evo)), std::nullopt, {}};
  m.slice_stride = config.output.slice_stride;
  if (write) {
    m.directory = root / m.label;
    fs::create_directories(m.directory);
    m.slices.emplace(m.directory / "slices", u0.grid());
    m.full_volume = config.output.full_volume;
    m.emit_frame();
  }
  return m;
}

// Advances all members together; calls `on_sample` when every live member
// landed on a sample time.
void run_lockstep(std::vector<Member>& members, const std::function<void()>& on_sample,
                  const StepHook& hook = {}) {
  auto all_done = [&] {
    return std::all_of(members.begin(), members.end(),
                       [](const Member& m) { return m.evolution.done(); });
  };
  if (on_sample) on_sample();
  while (!all_done()) {
    bool any_sampled = false;
    for (std::size_t i = 0; i < members.size(); ++i) {
      auto& m = members[i];
      if (m.evolution.done()) continue;
      m.evolution.advance();
      m.after_step();
      if (hook) hook(i, m.evolution.state());
      any_sampled |= m.evolution.sampled();
    }
    if (any_sampled && on_sample) on_sample();
  }
  for (auto& m : members) m.finish();
}

ScenarioResult run_models(const ScenarioConfig& config, bool write, const StepHook& hook) {
  validate(config);
  const fs::path root = config.output.directory;
  const ComplexField u0 = make_initial(config);
  std::vector<Member> members;
  if (config.model != ModelKind::averaged)
    members.push_back(make_member("fast", u0, config.evolution(true), config, root, write));
  if (config.model != ModelKind::fast)
    members.push_back(make_member("averaged", u0, config.evolution(false), config, root, write));

  DistanceAccumulator acc;
  const bool pair = members.size() == 2;
  auto on_sample = [&] {
    if (!pair) return;
    auto& f = members[0].evolution;
    auto& a = members[1].evolution;
    if (f.done() && f.record().blew_up()) return;
    if (a.done() && a.record().blew_up()) return;
    if (!f.sampled() || !a.sampled() || f.state().t != a.state().t) return;
    acc.add(f.state().t, f.state().u, a.state().u, f.last_record().total, a.last_record().total);
  };
  run_lockstep(members, on_sample, hook);

  ScenarioResult result;
  result.directory = root;
  for (auto& m : members) {
    ModelRun run{m.label, m.evolution.record(), m.evolution.state().u};
    if (run.record.blew_up() && !config.blowup.expected) result.unexpected_blowup = true;
    result.runs.push_back(std::move(run));
  }
  if (pair) result.distance = acc.finish(config.window);

  if (write) {
    json meta = metadata(config, "run");
    for (const auto& r : result.runs) meta["runs"][r.label] = record_summary(r.record);
    if (result.distance) {
      const auto& d = *result.distance;
      meta["distance"] = {{"l2_final", d.l2_final}, {"l2_sup", d.l2_sup}, {"energy_l1", d.energy_l1}};
      const double omega = leaves(config.potential).empty() ? 0.0
                                                            : leaves(config.potential)[0].shift.omega;
      const ComparisonRow row{omega, d.l2_final, d.l2_sup, d.energy_l1, NAN, NAN};
      write_comparison_csv(root / "comparison.csv", std::span(&row, 1));
    }
    meta["unexpected_blowup"] = result.unexpected_blowup;
    write_json(root / "run_metadata.json", meta);
  }
  return result;
}

Vec3 centroid(const ComplexField& u) {
  Vec3 c{0.0, 0.0, 0.0};
  double m = 0.0;
  const Grid& g = u.grid();
  for (std::size_t i = 0; i < u.size(); ++i) {
    const double p = std::norm(u[i]);
    const Vec3 x = g.point(i);
    for (int a = 0; a < 3; ++a) c[a] += p * x[a];
    m += p;
  }
  if (m > 0.0)
    for (auto& v : c) v /= m;
  return c;
}

// Samples a fine-grid field at the coarse grid's points.
ComplexField restrict_to(const ComplexField& fine, const Grid& coarse) {
  const Grid& g = fine.grid();
  Index3 ratio{1, 1, 1};
  for (int a = 0; a < 3; ++a) {
    if (g.count(a) % coarse.count(a) != 0) fail(ErrorKind::comparison, "grids are not nested");
    ratio[a] = g.count(a) / coarse.count(a);
  }
  ComplexField out(coarse);
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto idx = coarse.unflatten(i);
    out[i] = fine[g.flatten(idx[0] * ratio[0], idx[1] * ratio[1], idx[2] * ratio[2])];
  }
  return out;
}

ComplexField run_final(const ComplexField& u0, const EvolutionConfig& evo) {
  Evolution e(u0, evo);
  while (!e.done()) e.advance();
  return e.state().u;
}

}  // namespace

ComplexField make_initial(const ScenarioConfig& config) {
  const Grid grid = config.grid.make();
  const auto& d = config.initial;
  switch (d.kind) {
    case DatumKind::zero: return ComplexField(grid);
    case DatumKind::gaussian:
      return gaussian_packet(grid, d.center, 1.0 / std::sqrt(2.0 * d.alpha), d.wavevector,
                             d.amplitude);
    case DatumKind::file: {
      ComplexField u = read_field(d.path, grid.epsilon());
      if (!u.grid().same_mesh(grid)) fail(ErrorKind::config, "initial field file grid differs from the config");
      return u;
    }
    case DatumKind::ground_state: {
      EvolutionConfig prep = config.evolution(false);
      prep.sigma = d.prep_sigma;
      prep.step_mode = StepMode::plain_spectral;
      GroundStateOptions opt;
      opt.target_mass = d.target_mass;
      opt.tau = d.tau;
      opt.tol = d.tol;
      opt.max_iterations = d.max_iterations;
      return imaginary_time_ground_state(grid, prep, opt).u;
    }
  }
  fail(ErrorKind::config, "unknown initial datum");
}

ScenarioResult run_scenario(const ScenarioConfig& config, bool write) {
  return run_models(config, write, {});
}

ConvergenceReport run_convergence_suite(const ScenarioConfig& base, std::span<const double> omegas,
                                        bool write) {
  validate(base);
  for (std::size_t i = 1; i < omegas.size(); ++i)
    if (!(omegas[i] > omegas[i - 1])) fail(ErrorKind::config, "omegas must increase");
  const fs::path root = base.output.directory;
  const ComplexField u0 = make_initial(base);
  std::vector<Member> members;
  members.push_back(make_member("averaged", u0, base.evolution(false), base, root, write));
  for (double w : omegas) {
    EvolutionConfig evo = base.evolution(true);
    evo.potential = with_omega(base.potential, w);
    members.push_back(make_member(omega_label(w), u0, evo, base, root, write));
  }
  std::vector<DistanceAccumulator> acc(omegas.size());
  auto on_sample = [&] {
    const auto& avg = members[0].evolution;
    if (!avg.sampled()) return;
    for (std::size_t i = 0; i < omegas.size(); ++i) {
      const auto& f = members[i + 1].evolution;
      if (f.record().blew_up() || !f.sampled() || f.state().t != avg.state().t) continue;
      acc[i].add(f.state().t, f.state().u, avg.state().u, f.last_record().total,
                 avg.last_record().total);
    }
  };
  run_lockstep(members, on_sample);

  ConvergenceReport rep;
  std::vector<double> sup, el1;
  for (std::size_t i = 0; i < omegas.size(); ++i) {
    const auto d = acc[i].finish(base.window);
    rep.rows.push_back({omegas[i], d.l2_final, d.l2_sup, d.energy_l1, NAN, NAN});
    sup.push_back(d.l2_sup);
    el1.push_back(d.energy_l1);
  }
  if (omegas.size() > 1) {
    const auto r = convergence_rates(sup, omegas);
    const auto re = convergence_rates(el1, omegas);
    for (std::size_t i = 1; i < omegas.size(); ++i) {
      rep.rows[i].rate = r[i - 1];
      rep.rows[i].energy_rate = re[i - 1];
    }
  }
  rep.l2_monotone = std::is_sorted(sup.rbegin(), sup.rend()) &&
                    std::adjacent_find(sup.begin(), sup.end()) == sup.end();
  rep.energy_monotone = std::is_sorted(el1.rbegin(), el1.rend()) &&
                        std::adjacent_find(el1.begin(), el1.end()) == el1.end();
  if (!rep.l2_monotone) rep.failures.push_back("sup-in-time L2 errors do not decrease strictly");
  if (!rep.energy_monotone) rep.failures.push_back("energy L1 errors do not decrease strictly");
  for (std::size_t i = 0; i < omegas.size(); ++i)
    if (members[i + 1].evolution.record().blew_up())
      rep.failures.push_back("fast run at omega " + std::to_string(omegas[i]) + " blew up");

  if (write) {
    write_comparison_csv(root / "comparison.csv", rep.rows);
    json meta = metadata(base, "sweep-omega");
    for (auto& m : members) meta["runs"][m.label] = record_summary(m.evolution.record());
    meta["failures"] = rep.failures;
    write_json(root / "run_metadata.json", meta);
  }
  return rep;
}

BlowupSuiteReport run_blowup_suite(const ScenarioConfig& base, std::span<const double> sigmas,
                                   bool include_fast, bool write) {
  validate(base);
  const fs::path root = base.output.directory;
  BlowupSuiteReport rep;
  const ComplexField u0 = make_initial(base);
  {
    EvolutionConfig prep = base.evolution(false);
    prep.sigma = base.initial.prep_sigma;
    rep.ground_state_energy = energy(u0, prep, 0.0).total;
  }
  if (write) write_field(root / "initial", u0);

  const double omega = base.sweep ? base.sweep->blowup_omega : 1e4;
  for (double sigma : sigmas) {
    ScenarioConfig c = base;
    c.sigma = sigma;
    c.blowup.enabled = true;
    c.blowup.expected = true;
    std::ostringstream tag;
    tag << "sigma" << sigma;
    std::vector<Member> members;
    members.push_back(make_member(tag.str() + "/averaged", u0, c.evolution(false), c, root, write));
    if (include_fast) {
      EvolutionConfig evo = c.evolution(true);
      evo.potential = with_omega(c.potential, omega);
      members.push_back(make_member(tag.str() + "/fast", u0, evo, c, root, write));
    }
    run_lockstep(members, {});

    BlowupCase bc;
    bc.sigma = sigma;
    const auto& ra = members[0].evolution.record();
    bc.averaged_h1 = ra.series(&DiagnosticsRecord::h1);
    if (ra.blowup) bc.averaged_time = ra.blowup->blowup_time;
    if (include_fast) {
      const auto& rf = members[1].evolution.record();
      bc.fast_h1 = rf.series(&DiagnosticsRecord::h1);
      if (rf.blowup) bc.fast_time = rf.blowup->blowup_time;
      const double h0 = bc.averaged_h1.empty() ? 0.0 : bc.averaged_h1.front().value;
      const std::size_t n = std::min(bc.averaged_h1.size(), bc.fast_h1.size());
      for (std::size_t i = 0; i < n; ++i) {
        const double ha = bc.averaged_h1[i].value;
        if (ha >= 10.0 * h0) break;
        bc.h1_gap = std::max(bc.h1_gap, std::abs(bc.fast_h1[i].value - ha) / ha);
      }
    }
    log::info("sigma=", sigma, " averaged blow-up: ",
              bc.averaged_time ? std::to_string(*bc.averaged_time) : "none");
    rep.cases.push_back(std::move(bc));
  }

  // Larger sigma must blow up strictly earlier than smaller sigma.
  std::vector<const BlowupCase*> order;
  for (const auto& bc : rep.cases) order.push_back(&bc);
  std::sort(order.begin(), order.end(), [](auto* x, auto* y) { return x->sigma > y->sigma; });
  rep.ordering_ok = true;
  for (std::size_t i = 1; i < order.size(); ++i) {
    const auto& hi = *order[i - 1];
    const auto& lo = *order[i];
    if (!hi.averaged_time && lo.averaged_time) {
      rep.ordering_ok = false;
      rep.notes.push_back("sigma " + std::to_string(lo.sigma) + " blew up but a larger sigma did not");
    } else if (hi.averaged_time && lo.averaged_time && !(*hi.averaged_time < *lo.averaged_time)) {
      rep.ordering_ok = false;
      rep.notes.push_back("blow-up times not ordered by sigma");
    }
  }

  if (write) {
    std::ofstream out(root / "blowup.csv");
    out << "sigma,averaged_blowup_time,fast_blowup_time,h1_gap\n";
    out.precision(17);
    for (const auto& bc : rep.cases) {
      out << bc.sigma << ',';
      if (bc.averaged_time) out << *bc.averaged_time;
      out << ',';
      if (bc.fast_time) out << *bc.fast_time;
      out << ',' << bc.h1_gap << '\n';
    }
    json meta = metadata(base, "sweep-sigma");
    meta["ground_state_energy"] = rep.ground_state_energy;
    meta["ordering_ok"] = rep.ordering_ok;
    meta["notes"] = rep.notes;
    write_json(root / "run_metadata.json", meta);
  }
  return rep;
}

TrapReport run_trap_scenario(const ScenarioConfig& config, bool write) {
  TrapReport rep;
  Vec3 start{};
  auto hook = [&](std::size_t model, const EvolutionState& s) {
    if (model != 0) return;
    const Vec3 c = centroid(s.u);
    rep.centroid_x.push_back({s.t, c[0]});
    rep.centroid_y.push_back({s.t, c[1]});
    rep.centroid_z.push_back({s.t, c[2]});
  };
  {
    const ComplexField u0 = make_initial(config);
    start = centroid(u0);
    rep.centroid_x.push_back({0.0, start[0]});
    rep.centroid_y.push_back({0.0, start[1]});
    rep.centroid_z.push_back({0.0, start[2]});
  }
  rep.result = run_models(config, write, hook);
  for (std::size_t i = 0; i < rep.centroid_x.size(); ++i) {
    const double dx = rep.centroid_x[i].value - start[0];
    const double dy = rep.centroid_y[i].value - start[1];
    const double dz = rep.centroid_z[i].value - start[2];
    rep.max_displacement = std::max(rep.max_displacement, std::sqrt(dx * dx + dy * dy + dz * dz));
  }
  if (write) {
    std::ofstream out(fs::path(config.output.directory) / "centroid.csv");
    out << "t,x,y,z\n";
    out.precision(17);
    for (std::size_t i = 0; i < rep.centroid_x.size(); ++i)
      out << rep.centroid_x[i].t << ',' << rep.centroid_x[i].value << ',' << rep.centroid_y[i].value
          << ',' << rep.centroid_z[i].value << '\n';
  }
  return rep;
}

namespace {
PotentialSpec frozen_at_max(const PotentialSpec& spec) {
  PotentialSpec out = spec;
  if (out.kind == PotentialKind::composite) {
    for (auto& c : out.children) c = frozen_at_max(c);
  } else {
    out.shift.law = ShiftLaw::constant;  // e0 is the amplitude of e0 sin(2 pi t)
  }
  return out;
}
}  // namespace

TdReport run_td_scenario(const ScenarioConfig& config, bool write) {
  TdReport rep;
  rep.result = run_models(config, write, {});
  ScenarioConfig frozen = config;
  frozen.potential = frozen_at_max(config.potential);
  frozen.model = ModelKind::fast;
  frozen.output.directory = (fs::path(config.output.directory) / "ablation_frozen_e").string();
  const ScenarioResult ablation = run_models(frozen, write, {});
  const ModelRun* fast = nullptr;
  for (const auto& r : rep.result.runs)
    if (r.label == "fast") fast = &r;
  const ModelRun* target = fast ? fast : &rep.result.runs.front();
  rep.ablation_l2 = l2_distance(*target->final_field, *ablation.runs.front().final_field);
  if (write) {
    json meta;
    meta["ablation_l2"] = rep.ablation_l2;
    write_json(fs::path(config.output.directory) / "td_report.json", meta);
  }
  return rep;
}

LatticeReport run_lattice_scenario(const ScenarioConfig& config, bool write) {
  validate(config);
  LatticeReport rep;
  const SweepConfig sweep = config.sweep.value_or(SweepConfig{});
  const fs::path root = config.output.directory;
  ScenarioConfig bc = config;
  bc.step_mode = StepMode::bloch;
  const ComplexField u0 = make_initial(bc);

  std::vector<Member> members;
  for (double w : sweep.lattice_omegas) {
    EvolutionConfig evo = bc.evolution(true);
    evo.potential = with_omega(bc.potential, w);
    members.push_back(make_member(omega_label(w), u0, evo, bc, root, write));
  }
  members.push_back(make_member("averaged", u0, bc.evolution(false), bc, root, write));
  run_lockstep(members, {});
  for (auto& m : members) rep.runs.push_back({m.label, m.evolution.record(), m.evolution.state().u});

  // Efficiency: coarse bloch and coarse plain against a fine plain reference.
  const double w0 = sweep.lattice_omegas.empty() ? 0.0 : sweep.lattice_omegas.front();
  ScenarioConfig fine_cfg = config;
  for (int a = 0; a < config.grid.dim; ++a) fine_cfg.grid.counts[a] *= sweep.fine_factor;
  fine_cfg.dt = config.dt / sweep.fine_factor;
  rep.fine_dt = fine_cfg.dt;
  fine_cfg.step_mode = StepMode::plain_spectral;
  EvolutionConfig fine_evo = fine_cfg.evolution(true);
  fine_evo.potential = with_omega(fine_cfg.potential, w0);
  const ComplexField reference = restrict_to(run_final(make_initial(fine_cfg), fine_evo), u0.grid());

  EvolutionConfig plain = config.evolution(true);
  plain.step_mode = StepMode::plain_spectral;
  plain.potential = with_omega(config.potential, w0);
  EvolutionConfig bloch = plain;
  bloch.step_mode = StepMode::bloch;
  rep.coarse_plain_error = l2_distance(run_final(u0, plain), reference);
  rep.coarse_bloch_error = l2_distance(run_final(u0, bloch), reference);

  if (write) {
    json meta = metadata(config, "lattice");
    for (auto& r : rep.runs) meta["runs"][r.label] = record_summary(r.record);
    meta["efficiency"] = {{"omega", w0},
                          {"fine_factor", sweep.fine_factor},
                          {"fine_dt", rep.fine_dt},
                          {"coarse_plain_error", rep.coarse_plain_error},
                          {"coarse_bloch_error", rep.coarse_bloch_error}};
    write_json(root / "run_metadata.json", meta);
  }
  return rep;
}

std::vector<double> eta_sweep_values(const ScenarioConfig& config) {
  const double h2 = std::pow(config.grid.make().max_spacing(), 2);
  const SweepConfig sweep = config.sweep.value_or(SweepConfig{});
  std::vector<double> out;
  for (double f : sweep.eta_factors) out.push_back(f * h2);
  return out;
}

StabilityReport run_stability_sweep(const ScenarioConfig& config, std::span<const double> etas,
                                    bool write) {
  validate(config);
  StabilityReport rep;
  rep.etas.assign(etas.begin(), etas.end());
  const bool fast = config.model == ModelKind::fast;
  const ComplexField u0 = make_initial(config);
  std::vector<ComplexField> finals;
  std::vector<RealField> fields;
  for (double eta : etas) {
    EvolutionConfig evo = config.evolution(fast);
    evo.potential = with_eta(evo.potential, eta);
    Propagator p(u0.grid(), evo);
    fields.push_back(p.potential_at(0.0));
    finals.push_back(run_final(u0, evo));
  }
  for (std::size_t i = 0; i + 1 < finals.size(); ++i) {
    rep.solution_distance.push_back(l2_distance(finals[i], finals[i + 1]));
    double sup = 0.0, l2 = 0.0;
    for (std::size_t k = 0; k < fields[i].size(); ++k) {
      const double d = fields[i][k] - fields[i + 1][k];
      sup = std::max(sup, std::abs(d));
      l2 += d * d;
    }
    rep.potential_sup_diff.push_back(sup);
    rep.potential_l2_diff.push_back(std::sqrt(l2 * u0.grid().cell_volume()));
  }
  rep.monotone = true;
  for (std::size_t i = 1; i < rep.solution_distance.size(); ++i)
    if (!(rep.solution_distance[i] < rep.solution_distance[i - 1])) rep.monotone = false;
  if (write) {
    const fs::path root = config.output.directory;
    fs::create_directories(root);
    std::ofstream out(root / "stability.csv");
    out << "eta_a,eta_b,solution_l2,potential_sup,potential_l2\n";
    out.precision(17);
    for (std::size_t i = 0; i < rep.solution_distance.size(); ++i)
      out << rep.etas[i] << ',' << rep.etas[i + 1] << ',' << rep.solution_distance[i] << ','
          << rep.potential_sup_diff[i] << ',' << rep.potential_l2_diff[i] << '\n';
    json meta = metadata(config, "sweep-eta");
    meta["monotone"] = rep.monotone;
    write_json(root / "run_metadata.json", meta);
  }
  return rep;
}

DirectoryComparison compare_directories(const fs::path& a, const fs::path& b, double window) {
  const auto da = read_diagnostics_csv(a / "diagnostics.csv");
  const auto db = read_diagnostics_csv(b / "diagnostics.csv");
  if (da.size() != db.size()) fail(ErrorKind::comparison, "diagnostics have different sample counts");
  Series ea, eb;
  for (std::size_t i = 0; i < da.size(); ++i) {
    if (std::abs(da[i].t - db[i].t) > 1e-12 * std::max(1.0, std::abs(da[i].t)))
      fail(ErrorKind::comparison, "diagnostics sample times differ");
    ea.push_back({da[i].t, da[i].total});
    eb.push_back({db[i].t, db[i].total});
  }
  DirectoryComparison out;
  const Series wa = window > 0.0 ? window_average(ea, window) : ea;
  for (std::size_t i = 1; i < wa.size(); ++i) {
    const double d0 = std::abs(wa[i - 1].value - eb[i - 1].value);
    const double d1 = std::abs(wa[i].value - eb[i].value);
    out.energy_l1 += 0.5 * (d0 + d1) * (wa[i].t - wa[i - 1].t);
  }
  if (wa.size() < 2) out.energy_l1 = std::numeric_limits<double>::quiet_NaN();
  const SliceFile sa = read_slices(a / "slices");
  const SliceFile sb = read_slices(b / "slices");
  if (sa.counts != sb.counts || sa.lengths != sb.lengths || sa.times.size() != sb.times.size())
    fail(ErrorKind::comparison, "slice files differ in shape or frame count");
  double w = 1.0;
  for (std::size_t k = 0; k < sa.counts.size(); ++k) w *= sa.lengths[k] / sa.counts[k];
  for (std::size_t f = 0; f < sa.frames.size(); ++f) {
    double acc = 0.0;
    for (std::size_t i = 0; i < sa.frames[f].size(); ++i) acc += std::norm(sa.frames[f][i] - sb.frames[f][i]);
    const double d = std::sqrt(acc * w);
    out.slice_l2_sup = std::max(out.slice_l2_sup, d);
    out.slice_l2_final = d;
  }
  out.frames = sa.frames.size();
  return out;
}

}  // namespace xfel

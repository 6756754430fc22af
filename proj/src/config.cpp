#include "xfel/config.hpp"

#include <fstream>
#include <numbers>
#include <set>
#include <sstream>

#include "json.hpp"

#include "xfel/error.hpp"

namespace xfel {
namespace {

using json = nlohmann::json;

// Every object is read through a Reader so unknown keys are rejected.
class Reader {
 public:
  Reader(const json& j, std::string where) : j_(j), where_(std::move(where)) {
    if (!j_.is_object()) fail(ErrorKind::config, where_ + " must be an object");
  }
  ~Reader() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key()))
        fail(ErrorKind::config, "unknown key '" + it.key() + "' in " + where_);
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  const json& at(const std::string& key) {
    seen_.insert(key);
    return j_.at(key);
  }

  template <class T>
  void get(const std::string& key, T& out) {
    if (!has(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception& e) {
      fail(ErrorKind::config, where_ + "." + key + ": " + e.what());
    }
  }
  void get_vec3(const std::string& key, Vec3& out) {
    if (!has(key)) return;
    const json& v = j_.at(key);
    if (v.is_number()) {
      out = {v.get<double>(), v.get<double>(), v.get<double>()};
      return;
    }
    if (!v.is_array() || v.size() != 3)
      fail(ErrorKind::config, where_ + "." + key + " must be a number or 3-array");
    for (int i = 0; i < 3; ++i) out[i] = v[i].get<double>();
  }
  const std::string& where() const { return where_; }

 private:
  const json& j_;
  std::string where_;
  std::set<std::string> seen_;
};

json vec3_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

json potential_json(const PotentialSpec& p) {
  json j;
  j["kind"] = to_string(p.kind);
  if (p.kind == PotentialKind::composite) {
    j["children"] = json::array();
    for (const auto& c : p.children) j["children"].push_back(potential_json(c));
    return j;
  }
  j["c"] = p.c;
  j["shift"] = {{"law", p.shift.law == ShiftLaw::constant ? "constant" : "sinusoidal"},
                {"e0", vec3_json(p.shift.e0)},
                {"omega", p.shift.omega}};
  if (p.eta) j["eta"] = *p.eta;
  j["trap_strength"] = p.trap_strength;
  j["lattice_freqs"] = vec3_json(p.lattice_freqs);
  j["lattice_depth"] = p.lattice_depth;
  j["n_quad"] = p.n_quad;
  return j;
}

PotentialSpec potential_from(const json& j, const std::string& where) {
  Reader r(j, where);
  PotentialSpec p;
  std::string kind = "composite";
  r.get("kind", kind);
  p.kind = parse_potential_kind(kind);
  r.get("c", p.c);
  if (r.has("shift")) {
    Reader s(r.at("shift"), where + ".shift");
    std::string law = "constant";
    s.get("law", law);
    if (law == "constant")
      p.shift.law = ShiftLaw::constant;
    else if (law == "sinusoidal")
      p.shift.law = ShiftLaw::sinusoidal;
    else
      fail(ErrorKind::config, "unknown shift law '" + law + "'");
    s.get_vec3("e0", p.shift.e0);
    s.get("omega", p.shift.omega);
  }
  if (r.has("eta")) {
    double eta = 0.0;
    r.get("eta", eta);
    p.eta = eta;
  }
  r.get("trap_strength", p.trap_strength);
  r.get_vec3("lattice_freqs", p.lattice_freqs);
  r.get("lattice_depth", p.lattice_depth);
  r.get("n_quad", p.n_quad);
  if (r.has("children")) {
    const json& c = r.at("children");
    if (!c.is_array()) fail(ErrorKind::config, where + ".children must be an array");
    for (std::size_t i = 0; i < c.size(); ++i)
      p.children.push_back(potential_from(c[i], where + ".children[" + std::to_string(i) + "]"));
  }
  return p;
}

const char* datum_name(DatumKind k) {
  switch (k) {
    case DatumKind::gaussian: return "gaussian";
    case DatumKind::ground_state: return "ground_state";
    case DatumKind::file: return "file";
    case DatumKind::zero: return "zero";
  }
  return "?";
}

DatumKind parse_datum(const std::string& s) {
  for (auto k : {DatumKind::gaussian, DatumKind::ground_state, DatumKind::file, DatumKind::zero})
    if (s == datum_name(k)) return k;
  fail(ErrorKind::config, "unknown initial datum kind '" + s + "'");
}

json scenario_json(const ScenarioConfig& c) {
  json j;
  j["name"] = c.name;
  j["grid"] = {{"dim", c.grid.dim},
               {"L", vec3_json(c.grid.lengths)},
               {"N", json::array({c.grid.counts[0], c.grid.counts[1], c.grid.counts[2]})},
               {"epsilon", c.grid.epsilon}};
  j["model"] = to_string(c.model);
  j["potential"] = potential_json(c.potential);
  j["nonlinearity"] = {{"a", c.a}, {"sigma", c.sigma}, {"C1", c.C1},
                        {"hartree_kernel", to_string(c.hartree_kernel)}};
  const auto& d = c.initial;
  json init = {{"kind", datum_name(d.kind)}};
  switch (d.kind) {
    case DatumKind::gaussian:
      init["center"] = vec3_json(d.center);
      init["alpha"] = d.alpha;
      init["wavevector"] = vec3_json(d.wavevector);
      init["amplitude"] = d.amplitude;
      break;
    case DatumKind::ground_state:
      init["target_mass"] = d.target_mass;
      init["prep_sigma"] = d.prep_sigma;
      init["tau"] = d.tau;
      init["tol"] = d.tol;
      init["max_iterations"] = d.max_iterations;
      break;
    case DatumKind::file: init["path"] = d.path; break;
    case DatumKind::zero: break;
  }
  j["initial"] = init;
  j["evolution"] = {{"dt", c.dt},
                    {"t_end", c.t_end},
                    {"splitting", to_string(c.splitting)},
                    {"step_mode", to_string(c.step_mode)},
                    {"n_sub", c.n_sub},
                    {"snapshot_stride", c.snapshot_stride},
                    {"n_bands", c.n_bands},
                    {"bloch_substeps", c.bloch_substeps},
                    {"window", c.window},
                    {"literal_c_squared", c.literal_c_squared}};
  j["blowup"] = {{"enabled", c.blowup.enabled},
                 {"h1_factor", c.blowup.h1_factor},
                 {"h1_absolute", c.blowup.h1_absolute},
                 {"expected", c.blowup.expected}};
  if (c.sweep) {
    const auto& s = *c.sweep;
    j["sweep"] = {{"omegas", s.omegas},
                  {"sigmas", s.sigmas},
                  {"eta_factors", s.eta_factors},
                  {"blowup_omega", s.blowup_omega},
                  {"lattice_omegas", s.lattice_omegas},
                  {"fine_factor", s.fine_factor}};
  }
  j["output"] = {{"directory", c.output.directory},
                 {"slice_stride", c.output.slice_stride},
                 {"full_volume", c.output.full_volume}};
  return j;
}

ScenarioConfig scenario_from(const json& j) {
  ScenarioConfig c;
  Reader r(j, "config");
  r.get("name", c.name);
  if (r.has("grid")) {
    Reader g(r.at("grid"), "grid");
    g.get("dim", c.grid.dim);
    g.get_vec3("L", c.grid.lengths);
    if (g.has("N")) {
      const json& n = g.at("N");
      if (n.is_number_integer()) {
        const int v = n.get<int>();
        c.grid.counts = {v, v, v};
      } else if (n.is_array() && n.size() == 3) {
        for (int i = 0; i < 3; ++i) c.grid.counts[i] = n[i].get<int>();
      } else {
        fail(ErrorKind::config, "grid.N must be an integer or 3-array");
      }
    }
    g.get("epsilon", c.grid.epsilon);
  }
  std::string model = to_string(c.model);
  r.get("model", model);
  c.model = parse_model_kind(model);
  if (r.has("potential")) c.potential = potential_from(r.at("potential"), "potential");
  if (r.has("nonlinearity")) {
    Reader n(r.at("nonlinearity"), "nonlinearity");
    n.get("a", c.a);
    n.get("sigma", c.sigma);
    n.get("C1", c.C1);
    std::string kernel = to_string(c.hartree_kernel);
    n.get("hartree_kernel", kernel);
    if (kernel == "coulomb") c.hartree_kernel = HartreeKernel::coulomb;
    else if (kernel == "poisson") c.hartree_kernel = HartreeKernel::poisson;
    else fail(ErrorKind::config, "unknown hartree_kernel '" + kernel + "'");
  }
  if (r.has("initial")) {
    Reader i(r.at("initial"), "initial");
    auto& d = c.initial;
    std::string kind = datum_name(d.kind);
    i.get("kind", kind);
    d.kind = parse_datum(kind);
    i.get_vec3("center", d.center);
    i.get("alpha", d.alpha);
    i.get_vec3("wavevector", d.wavevector);
    i.get("amplitude", d.amplitude);
    i.get("target_mass", d.target_mass);
    i.get("prep_sigma", d.prep_sigma);
    i.get("tau", d.tau);
    i.get("tol", d.tol);
    i.get("max_iterations", d.max_iterations);
    i.get("path", d.path);
  }
  if (r.has("evolution")) {
    Reader e(r.at("evolution"), "evolution");
    e.get("dt", c.dt);
    e.get("t_end", c.t_end);
    std::string split = to_string(c.splitting), mode = to_string(c.step_mode);
    e.get("splitting", split);
    e.get("step_mode", mode);
    c.splitting = parse_splitting(split);
    c.step_mode = parse_step_mode(mode);
    e.get("n_sub", c.n_sub);
    e.get("snapshot_stride", c.snapshot_stride);
    e.get("n_bands", c.n_bands);
    e.get("bloch_substeps", c.bloch_substeps);
    e.get("window", c.window);
    e.get("literal_c_squared", c.literal_c_squared);
  }
  if (r.has("blowup")) {
    Reader b(r.at("blowup"), "blowup");
    b.get("enabled", c.blowup.enabled);
    b.get("h1_factor", c.blowup.h1_factor);
    b.get("h1_absolute", c.blowup.h1_absolute);
    b.get("expected", c.blowup.expected);
  }
  if (r.has("sweep")) {
    Reader s(r.at("sweep"), "sweep");
    SweepConfig sw;
    s.get("omegas", sw.omegas);
    s.get("sigmas", sw.sigmas);
    s.get("eta_factors", sw.eta_factors);
    s.get("blowup_omega", sw.blowup_omega);
    s.get("lattice_omegas", sw.lattice_omegas);
    s.get("fine_factor", sw.fine_factor);
    c.sweep = sw;
  }
  if (r.has("output")) {
    Reader o(r.at("output"), "output");
    o.get("directory", c.output.directory);
    o.get("slice_stride", c.output.slice_stride);
    o.get("full_volume", c.output.full_volume);
  }
  return c;
}

}  // namespace

const char* to_string(ModelKind m) noexcept {
  switch (m) {
    case ModelKind::fast: return "fast";
    case ModelKind::averaged: return "averaged";
    case ModelKind::both: return "both";
  }
  return "?";
}

ModelKind parse_model_kind(const std::string& name) {
  for (auto m : {ModelKind::fast, ModelKind::averaged, ModelKind::both})
    if (name == to_string(m)) return m;
  fail(ErrorKind::config, "unknown model '" + name + "'");
}

const char* to_string(HartreeKernel k) noexcept {
  return k == HartreeKernel::coulomb ? "coulomb" : "poisson";
}

double ScenarioConfig::hartree_coupling() const noexcept {
  return hartree_kernel == HartreeKernel::poisson ? C1 / (4.0 * std::numbers::pi) : C1;
}

Grid GridConfig::make() const {
  Vec3 l = lengths;
  Index3 n = counts;
  for (int a = dim; a < 3; ++a) {
    l[a] = 1.0;
    n[a] = 1;
  }
  return Grid(dim, l, n, epsilon);
}

EvolutionConfig ScenarioConfig::evolution(bool fast) const {
  EvolutionConfig e;
  e.dt = dt;
  e.t_end = t_end;
  e.splitting = splitting;
  e.a = a;
  e.sigma = sigma;
  e.C1 = hartree_coupling();
  e.potential = fast ? potential : averaged_counterpart(potential);
  e.step_mode = step_mode;
  e.n_sub = n_sub;
  e.snapshot_stride = snapshot_stride;
  e.n_bands = n_bands;
  e.bloch_substeps = bloch_substeps;
  e.blowup = blowup;
  e.literal_c_squared = literal_c_squared;
  return e;
}

void validate(const ScenarioConfig& c) {
  if (c.grid.dim < 1 || c.grid.dim > 3) fail(ErrorKind::config, "grid.dim must be 1, 2 or 3");
  const Grid g = c.grid.make();
  validate(c.evolution(true));
  if (!(c.window > 0.0)) fail(ErrorKind::config, "evolution.window must be positive");
  if (c.output.slice_stride < 1) fail(ErrorKind::config, "output.slice_stride must be >= 1");
  if (c.output.directory.empty()) fail(ErrorKind::config, "output.directory must be set");
  for (const auto& leaf : leaves(c.potential))
    if (is_lattice(leaf.kind)) check_commensurate(g, leaf.lattice_freqs);
  const auto& d = c.initial;
  if (d.kind == DatumKind::gaussian && !(d.alpha > 0.0))
    fail(ErrorKind::config, "initial.alpha must be positive");
  if (d.kind == DatumKind::ground_state && !(d.target_mass > 0.0))
    fail(ErrorKind::config, "initial.target_mass must be positive");
  if (d.kind == DatumKind::file && d.path.empty()) fail(ErrorKind::config, "initial.path must be set");
  if (c.sweep) {
    for (double w : c.sweep->omegas)
      if (!(w > 0.0)) fail(ErrorKind::config, "sweep omegas must be positive");
    for (double f : c.sweep->eta_factors)
      if (!(f > 0.0)) fail(ErrorKind::config, "sweep eta factors must be positive");
    if (c.sweep->fine_factor < 1) fail(ErrorKind::config, "sweep.fine_factor must be >= 1");
  }
}

ScenarioConfig parse_scenario(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config is not valid JSON: ") + e.what());
  }
  ScenarioConfig c;
  try {
    c = scenario_from(j);
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("config: ") + e.what());
  }
  validate(c);
  return c;
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const ScenarioConfig& config) {
  return scenario_json(config).dump(2) + "\n";
}

std::string serialize_potential(const PotentialSpec& spec) { return potential_json(spec).dump(); }

PotentialSpec parse_potential(const std::string& text) {
  try {
    auto p = potential_from(json::parse(text), "potential");
    validate(p);
    return p;
  } catch (const json::exception& e) {
    fail(ErrorKind::config, std::string("potential: ") + e.what());
  }
}

PotentialSpec with_omega(const PotentialSpec& spec, double omega) {
  PotentialSpec out = spec;
  if (out.kind == PotentialKind::composite) {
    for (auto& c : out.children) c = with_omega(c, omega);
  } else {
    out.shift.omega = omega;
  }
  return out;
}

PotentialSpec with_eta(const PotentialSpec& spec, double eta) {
  PotentialSpec out = spec;
  if (out.kind == PotentialKind::composite) {
    for (auto& c : out.children) c = with_eta(c, eta);
  } else if (out.kind == PotentialKind::fast_coulomb || out.kind == PotentialKind::averaged_coulomb) {
    out.eta = eta;
  }
  return out;
}

}  // namespace xfel

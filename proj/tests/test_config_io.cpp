#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include "support.hpp"
#include "xfel/config.hpp"
#include "xfel/error.hpp"
#include "xfel/field_io.hpp"

using namespace xfel;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  return ErrorKind::io;  // no error
}

fs::path scratch_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("xfel_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

const char* kMinimal = R"({
  "grid": {"dim": 3, "L": [8, 8, 8], "N": 16, "epsilon": 1.0},
  "model": "averaged",
  "potential": {"kind": "fast_coulomb", "c": 1.0,
                "shift": {"law": "constant", "e0": [0, 0, 1], "omega": 5}},
  "nonlinearity": {"a": 1.0, "sigma": 0.6666666666666666, "C1": 2.0},
  "evolution": {"dt": 0.01, "t_end": 0.1}
})";

}  // namespace

TEST_CASE("every preset loads, validates and survives a serialize round trip") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(XFEL_PRESET_DIR)) {
    if (entry.path().extension() != ".json") continue;
    CAPTURE(entry.path().string());
    const ScenarioConfig c = load_scenario(entry.path());
    CHECK_NOTHROW(validate(c));
    const ScenarioConfig back = parse_scenario(serialize_scenario(c));
    CHECK(back == c);
    ++seen;
  }
  CHECK(seen >= 5);
}

TEST_CASE("unknown keys are rejected at every level") {
  CHECK(kind_of([] { parse_scenario(R"({"gird": {}})"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_scenario(R"({"grid": {"Nx": 4}})"); }) == ErrorKind::config);
  CHECK(kind_of([] {
          parse_scenario(R"({"potential": {"kind": "trap", "strenght": 2}})");
        }) == ErrorKind::config);
  CHECK(kind_of([] { parse_scenario(R"({"evolution": {"dt": 0.1, "tend": 1}})"); }) ==
        ErrorKind::config);
  CHECK(kind_of([] { parse_scenario("{not json"); }) == ErrorKind::config);
  CHECK(kind_of([] { parse_scenario(R"({"model": "slow"})"); }) == ErrorKind::config);
}

TEST_CASE("grid counts accept a scalar or a triple") {
  const ScenarioConfig c = parse_scenario(kMinimal);
  CHECK(c.grid.counts == Index3{16, 16, 16});
  const ScenarioConfig d = parse_scenario(R"({"grid": {"N": [8, 16, 32]}})");
  CHECK(d.grid.counts == Index3{8, 16, 32});
  CHECK(kind_of([] { parse_scenario(R"({"grid": {"N": [8, 16]}})"); }) == ErrorKind::config);
}

TEST_CASE("invalid values fail validation with a config error") {
  auto bad = [](auto mutate) {
    ScenarioConfig c = parse_scenario(kMinimal);
    mutate(c);
    return kind_of([&] { validate(c); });
  };
  CHECK(bad([](ScenarioConfig&) {}) == ErrorKind::io);
  CHECK(bad([](ScenarioConfig& c) { c.sigma = -0.5; }) == ErrorKind::config);
  CHECK(bad([](ScenarioConfig& c) { c.dt = 0.0; }) == ErrorKind::config);
  CHECK(bad([](ScenarioConfig& c) { c.grid.epsilon = 0.0; }) == ErrorKind::config);
  CHECK(bad([](ScenarioConfig& c) { c.window = -1.0; }) == ErrorKind::config);
  CHECK(bad([](ScenarioConfig& c) { c.output.slice_stride = 0; }) == ErrorKind::config);
  CHECK(bad([](ScenarioConfig& c) { c.grid.dim = 4; }) == ErrorKind::config);
}

TEST_CASE("hartree kernel normalization") {
  ScenarioConfig c = parse_scenario(kMinimal);
  CHECK(c.hartree_kernel == HartreeKernel::coulomb);
  CHECK(c.evolution(false).C1 == 2.0);
  c = parse_scenario(R"({"nonlinearity": {"C1": 2.0, "hartree_kernel": "poisson"}})");
  CHECK(c.evolution(true).C1 == doctest::Approx(2.0 / (4.0 * std::numbers::pi)).epsilon(1e-15));
  CHECK(parse_scenario(serialize_scenario(c)) == c);
  CHECK(kind_of([] { parse_scenario(R"({"nonlinearity": {"hartree_kernel": "yukawa"}})"); }) ==
        ErrorKind::config);
}

TEST_CASE("evolution settings pick the potential by model") {
  const ScenarioConfig c = parse_scenario(kMinimal);
  CHECK(c.evolution(true).potential.kind == PotentialKind::fast_coulomb);
  CHECK(c.evolution(false).potential.kind == PotentialKind::averaged_coulomb);
}

TEST_CASE("omega and eta overrides reach every leaf") {
  PotentialSpec comp;
  comp.kind = PotentialKind::composite;
  PotentialSpec a;
  a.kind = PotentialKind::fast_coulomb;
  a.shift.omega = 3.0;
  PotentialSpec b;
  b.kind = PotentialKind::trap;
  b.shift.omega = 3.0;
  comp.children = {a, b};
  const PotentialSpec w = with_omega(comp, 40.0);
  for (const auto& ch : w.children) CHECK(ch.shift.omega == 40.0);
  const PotentialSpec e = with_eta(comp, 0.125);
  REQUIRE(e.children[0].eta.has_value());
  CHECK(*e.children[0].eta == 0.125);
  CHECK(parse_potential(serialize_potential(w)) == w);
}

TEST_CASE("diagnostics csv has the fixed column order and round trips") {
  const fs::path dir = scratch_dir("csv");
  std::vector<DiagnosticsRecord> rows(3);
  for (int i = 0; i < 3; ++i)
    rows[i] = {0.1 * i, 1.0 + i, 2.0, -3.0, 0.5, -0.25, 1.0 / 3.0, 7.0, 1e-300};
  write_diagnostics_csv(dir / "d.csv", rows);
  const std::string text = slurp(dir / "d.csv");
  CHECK(text.rfind(std::string(kDiagnosticsHeader) + "\n", 0) == 0);
  CHECK(std::string(kDiagnosticsHeader) ==
        "t,mass,kinetic,hartree,potential,nonlinear,total,h1,max_density");
  const auto back = read_diagnostics_csv(dir / "d.csv");
  REQUIRE(back.size() == 3);
  for (int i = 0; i < 3; ++i) {
    CHECK(back[i].t == rows[i].t);
    CHECK(back[i].mass == rows[i].mass);
    CHECK(back[i].total == rows[i].total);
    CHECK(back[i].max_density == rows[i].max_density);
  }
  CHECK(kind_of([&] { read_diagnostics_csv(dir / "missing.csv"); }) == ErrorKind::io);
}

TEST_CASE("comparison csv leaves the first rate empty") {
  const fs::path dir = scratch_dir("cmp");
  std::vector<ComparisonRow> rows{{5.0, 0.2, 0.3, 0.1, std::nan(""), std::nan("")},
                                  {10.0, 0.1, 0.15, 0.05, 1.0, 1.0}};
  write_comparison_csv(dir / "c.csv", rows);
  std::istringstream in(slurp(dir / "c.csv"));
  std::string header, first, second;
  std::getline(in, header);
  std::getline(in, first);
  std::getline(in, second);
  CHECK(header == "omega,l2_final,l2_sup,energy_l1,rate,energy_rate");
  CHECK(first.substr(first.size() - 2) == ",,");
  CHECK(second.find("10") == 0);
}

TEST_CASE("slice files hold the z = 0 plane as float64 pairs") {
  const fs::path dir = scratch_dir("slices");
  const Grid g(3, {4.0, 4.0, 4.0}, {8, 6, 4});
  const ComplexField u = test::random_field(g, 11);
  ComplexField v = u;
  for (auto& z : v.values()) z *= cplx(0.0, 2.0);
  {
    SliceWriter w(dir / "s", g);
    w.write(0.0, u);
    w.write(0.5, v);
    CHECK(w.frames() == 2);
  }
  CHECK(fs::file_size(dir / "s.bin") == 2u * 8u * 6u * 16u);
  const SliceFile s = read_slices(dir / "s");
  CHECK(s.dims == 2);
  CHECK(s.counts == std::vector<int>{8, 6});
  CHECK(s.times == std::vector<double>{0.0, 0.5});
  REQUIRE(s.frames.size() == 2);
  // x3 = -L/2 + k h vanishes at k = N/2
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 6; ++j) {
      CHECK(s.frames[0][i * 6 + j] == u[g.flatten(i, j, 2)]);
      CHECK(s.frames[1][i * 6 + j] == v[g.flatten(i, j, 2)]);
    }
  // raw little-endian layout: first value is Re u(x_0), then Im u(x_0)
  std::ifstream raw(dir / "s.bin", std::ios::binary);
  double first[2];
  raw.read(reinterpret_cast<char*>(first), sizeof first);
  CHECK(first[0] == u[g.flatten(0, 0, 2)].real());
  CHECK(first[1] == u[g.flatten(0, 0, 2)].imag());
  const std::string hdr = slurp(dir / "s.hdr");
  CHECK(hdr.find("0.5") != std::string::npos);
}

TEST_CASE("full fields round trip bit-exactly") {
  const fs::path dir = scratch_dir("field");
  for (int dim = 1; dim <= 3; ++dim) {
    const Grid g(dim, {3.0, 5.0, 7.0}, {8, 4, 6});
    const ComplexField u = test::random_field(g, 3 + dim);
    write_field(dir / ("f" + std::to_string(dim)), u, 0.25);
    const ComplexField back = read_field(dir / ("f" + std::to_string(dim)), 0.5);
    CHECK(back.grid().dim() == dim);
    CHECK(back.grid().epsilon() == 0.5);
    REQUIRE(back.size() == u.size());
    CHECK(test::max_abs_diff(back, u) == 0.0);
  }
  CHECK(kind_of([&] { read_field(dir / "nothing"); }) == ErrorKind::io);
}

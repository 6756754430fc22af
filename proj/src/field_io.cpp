#include "xfel/field_io.hpp"

#include <bit>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "xfel/error.hpp"

namespace xfel {
namespace {

static_assert(std::endian::native == std::endian::little, "field files assume a little-endian host");

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const std::filesystem::path& p, std::ios::openmode mode = std::ios::out) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(p, mode);
  if (!out) fail(ErrorKind::io, "cannot write " + p.string());
  return out;
}

std::filesystem::path with_suffix(const std::filesystem::path& stem, const char* ext) {
  return std::filesystem::path(stem.string() + ext);
}

void write_frame_header(std::ostream& os, int dims, const std::vector<double>& lengths,
                        const std::vector<int>& counts, const std::vector<double>& times,
                        const char* layout) {
  os << "format xfel-field 1\n";
  os << "layout " << layout << "\n";
  os << "encoding float64le complex interleaved row-major\n";
  os << "dims " << dims << "\n";
  os << "L";
  for (double l : lengths) os << ' ' << fmt(l);
  os << "\nN";
  for (int n : counts) os << ' ' << n;
  os << "\nframes " << times.size() << "\n";
  for (double t : times) os << "t " << fmt(t) << "\n";
}

SliceFile read_header(const std::filesystem::path& hdr) {
  std::ifstream in(hdr);
  if (!in) fail(ErrorKind::io, "cannot read " + hdr.string());
  SliceFile f;
  std::string line;
  bool saw_format = false;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string key;
    ls >> key;
    if (key == "format") {
      saw_format = true;
    } else if (key == "dims") {
      ls >> f.dims;
    } else if (key == "L") {
      for (double v; ls >> v;) f.lengths.push_back(v);
    } else if (key == "N") {
      for (int v; ls >> v;) f.counts.push_back(v);
    } else if (key == "t") {
      double t;
      ls >> t;
      f.times.push_back(t);
    }
  }
  if (!saw_format || f.counts.empty() || f.counts.size() != f.lengths.size())
    fail(ErrorKind::io, "malformed field header " + hdr.string());
  return f;
}

}  // namespace

void write_diagnostics_csv(const std::filesystem::path& path,
                           std::span<const DiagnosticsRecord> records) {
  auto out = open_out(path);
  out << kDiagnosticsHeader << '\n';
  for (const auto& r : records) {
    out << fmt(r.t) << ',' << fmt(r.mass) << ',' << fmt(r.kinetic) << ',' << fmt(r.hartree) << ','
        << fmt(r.potential) << ',' << fmt(r.nonlinear) << ',' << fmt(r.total) << ',' << fmt(r.h1)
        << ',' << fmt(r.max_density) << '\n';
  }
  if (!out) fail(ErrorKind::io, "write failed for " + path.string());
}

std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io, "cannot read " + path.string());
  std::string line;
  if (!std::getline(in, line) || line != kDiagnosticsHeader)
    fail(ErrorKind::io, "unexpected diagnostics header in " + path.string());
  std::vector<DiagnosticsRecord> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::array<double, 9> v{};
    std::istringstream ls(line);
    std::string cell;
    for (int i = 0; i < 9; ++i) {
      if (!std::getline(ls, cell, ',')) fail(ErrorKind::io, "short diagnostics row");
      v[i] = std::stod(cell);
    }
    out.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]});
  }
  return out;
}

void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows) {
  auto out = open_out(path);
  out << "omega,l2_final,l2_sup,energy_l1,rate,energy_rate\n";
  auto cell = [](double v) { return std::isfinite(v) ? fmt(v) : std::string(); };
  for (const auto& r : rows)
    out << fmt(r.omega) << ',' << fmt(r.l2_final) << ',' << fmt(r.l2_sup) << ','
        << fmt(r.energy_l1) << ',' << cell(r.rate) << ',' << cell(r.energy_rate) << '\n';
}

std::vector<cplx> z0_plane(const ComplexField& u) {
  const Grid& g = u.grid();
  if (g.dim() < 3) return {u.values().begin(), u.values().end()};
  // x_j = -L/2 + j h is zero at j = N/2.
  const int k = g.count(2) / 2;
  std::vector<cplx> out;
  out.reserve(static_cast<std::size_t>(g.count(0)) * g.count(1));
  for (int i = 0; i < g.count(0); ++i)
    for (int j = 0; j < g.count(1); ++j) out.push_back(u[g.flatten(i, j, k)]);
  return out;
}

SliceWriter::SliceWriter(const std::filesystem::path& stem, const Grid& grid)
    : bin_(with_suffix(stem, ".bin")), hdr_(with_suffix(stem, ".hdr")), grid_(grid) {
  out_ = open_out(bin_, std::ios::out | std::ios::binary | std::ios::trunc);
  write_header();
}

void SliceWriter::write_header() const {
  auto out = open_out(hdr_);
  const int dims = std::min(grid_.dim(), 2);
  std::vector<double> l;
  std::vector<int> n;
  for (int a = 0; a < dims; ++a) {
    l.push_back(grid_.length(a));
    n.push_back(grid_.count(a));
  }
  write_frame_header(out, dims, l, n, times_, grid_.dim() == 3 ? "plane x3=0" : "full");
}

void SliceWriter::write(double t, const ComplexField& u) {
  if (!u.grid().same_mesh(grid_)) fail(ErrorKind::io, "slice grid mismatch");
  const auto plane = z0_plane(u);
  out_.write(reinterpret_cast<const char*>(plane.data()),
             static_cast<std::streamsize>(plane.size() * sizeof(cplx)));
  out_.flush();
  if (!out_) fail(ErrorKind::io, "write failed for " + bin_.string());
  times_.push_back(t);
  write_header();
}

SliceFile read_slices(const std::filesystem::path& stem) {
  SliceFile f = read_header(with_suffix(stem, ".hdr"));
  std::size_t per = 1;
  for (int n : f.counts) per *= static_cast<std::size_t>(n);
  std::ifstream in(with_suffix(stem, ".bin"), std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read " + with_suffix(stem, ".bin").string());
  for (std::size_t k = 0; k < f.times.size(); ++k) {
    std::vector<cplx> frame(per);
    in.read(reinterpret_cast<char*>(frame.data()), static_cast<std::streamsize>(per * sizeof(cplx)));
    if (!in) fail(ErrorKind::io, "truncated slice data in " + stem.string());
    f.frames.push_back(std::move(frame));
  }
  return f;
}

void write_field(const std::filesystem::path& stem, const ComplexField& u, double t) {
  const Grid& g = u.grid();
  {
    auto out = open_out(with_suffix(stem, ".bin"), std::ios::out | std::ios::binary | std::ios::trunc);
    out.write(reinterpret_cast<const char*>(u.data()),
              static_cast<std::streamsize>(u.size() * sizeof(cplx)));
    if (!out) fail(ErrorKind::io, "write failed for " + stem.string());
  }
  std::vector<double> l;
  std::vector<int> n;
  for (int a = 0; a < g.dim(); ++a) {
    l.push_back(g.length(a));
    n.push_back(g.count(a));
  }
  auto hdr = open_out(with_suffix(stem, ".hdr"));
  write_frame_header(hdr, g.dim(), l, n, {t}, "volume");
}

ComplexField read_field(const std::filesystem::path& stem, double epsilon) {
  SliceFile f = read_slices(stem);
  if (f.frames.size() != 1) fail(ErrorKind::io, "field file must hold one frame");
  if (f.dims < 1 || f.dims > 3 || static_cast<int>(f.counts.size()) != f.dims)
    fail(ErrorKind::io, "field header dims disagree with N");
  Vec3 l{1.0, 1.0, 1.0};
  Index3 n{1, 1, 1};
  for (int a = 0; a < f.dims; ++a) {
    l[a] = f.lengths[a];
    n[a] = f.counts[a];
  }
  const Grid g(f.dims, l, n, epsilon);
  ComplexBuffer values(f.frames[0].begin(), f.frames[0].end());
  return ComplexField(g, std::move(values));
}

}  // namespace xfel

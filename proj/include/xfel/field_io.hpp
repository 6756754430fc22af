#pragma once

#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include "xfel/diagnostics.hpp"
#include "xfel/grid.hpp"

namespace xfel {

/// Column order of diagnostics.csv.
inline constexpr const char* kDiagnosticsHeader =
    "t,mass,kinetic,hartree,potential,nonlinear,total,h1,max_density";

void write_diagnostics_csv(const std::filesystem::path& path,
                           std::span<const DiagnosticsRecord> records);
std::vector<DiagnosticsRecord> read_diagnostics_csv(const std::filesystem::path& path);

struct ComparisonRow {
  double omega = 0.0;
  double l2_final = 0.0;
  double l2_sup = 0.0;
  double energy_l1 = 0.0;
  double rate = 0.0;       ///< sup-norm rate; NaN for the first row
  double energy_rate = 0.0;
};

/// Columns omega,l2_final,l2_sup,energy_l1,rate,energy_rate; missing rates are empty.
void write_comparison_csv(const std::filesystem::path& path, std::span<const ComparisonRow> rows);

/// Appends z = 0 plane frames u(t, x, y, 0) to `<stem>.bin` as little-endian
/// float64 (re, im) pairs in row-major (x slowest) order, and keeps the text
/// header `<stem>.hdr` listing dims, L, N and the frame times.
class SliceWriter {
 public:
  SliceWriter(const std::filesystem::path& stem, const Grid& grid);
  void write(double t, const ComplexField& u);
  std::size_t frames() const noexcept { return times_.size(); }

 private:
  void write_header() const;

  std::filesystem::path bin_, hdr_;
  Grid grid_;
  std::ofstream out_;
  std::vector<double> times_;
};

/// Extracts the plane through x_3 = 0 (the whole field for dim <= 2).
std::vector<cplx> z0_plane(const ComplexField& u);

struct SliceFile {
  int dims = 2;
  std::vector<double> lengths;
  std::vector<int> counts;
  std::vector<double> times;
  std::vector<std::vector<cplx>> frames;
};
SliceFile read_slices(const std::filesystem::path& stem);

/// Full field as `<stem>.bin` plus `<stem>.hdr` (same encoding as slices).
void write_field(const std::filesystem::path& stem, const ComplexField& u, double t = 0.0);
ComplexField read_field(const std::filesystem::path& stem, double epsilon = 1.0);

}  // namespace xfel

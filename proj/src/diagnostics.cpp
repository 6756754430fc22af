#include "xfel/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "xfel/error.hpp"
#include "xfel/fft.hpp"
#include "xfel/spectral.hpp"

namespace xfel {

double mass(const ComplexField& u) {
  double acc = 0.0;
  for (const auto& v : u.values()) acc += std::norm(v);
  return acc * u.grid().cell_volume();
}

double h1_seminorm(const ComplexField& u) {
  const auto ctx = SpectralContext::get(u.grid());
  ComplexBuffer work(u.values().begin(), u.values().end());
  ctx->forward(work);
  const auto k2 = ctx->k_squared();
  double acc = 0.0;
  for (std::size_t i = 0; i < work.size(); ++i) acc += k2[i] * std::norm(work[i]);
  // |c_n|^2 = |fft|^2 / N^2 and the spectral sum carries V_box.
  const double n = static_cast<double>(u.size());
  return std::sqrt(acc * u.grid().box_volume() / (n * n));
}

DiagnosticsRecord compute_diagnostics(const ComplexField& u, const RealField* potential,
                                      const EnergyParams& params, double t) {
  const Grid& g = u.grid();
  const double dv = g.cell_volume();
  DiagnosticsRecord r;
  r.t = t;
  RealField rho = density(u);
  double m = 0.0, vpot = 0.0, nl = 0.0, peak = 0.0;
  for (std::size_t i = 0; i < rho.size(); ++i) {
    const double p = rho[i];
    m += p;
    peak = std::max(peak, p);
    if (potential) vpot += (*potential)[i] * p;
    if (params.a != 0.0 && p > 0.0) nl += std::pow(p, 0.5 * params.sigma + 1.0);
  }
  r.mass = m * dv;
  r.max_density = peak;
  r.potential = vpot * dv;
  r.nonlinear = -2.0 * params.a / (params.sigma + 2.0) * nl * dv;
  r.h1 = h1_seminorm(u);
  r.kinetic = g.epsilon() * g.epsilon() * r.h1 * r.h1;
  if (params.C1 != 0.0) {
    const RealField vh = hartree_potential(rho);
    double e = 0.0;
    for (std::size_t i = 0; i < rho.size(); ++i) e += rho[i] * vh[i];
    r.hartree = 0.5 * params.C1 * e * dv;
  }
  r.total = r.kinetic + r.hartree + r.potential + r.nonlinear;
  return r;
}

Series window_average(const Series& series, double window) {
  if (!(window > 0.0)) fail(ErrorKind::domain, "window must be positive");
  Series out;
  if (series.size() < 2) return out;
  const double t_end = series.back().t;
  // Cumulative trapezoid integral at the samples.
  std::vector<double> cum(series.size(), 0.0);
  for (std::size_t i = 1; i < series.size(); ++i)
    cum[i] = cum[i - 1] +
             0.5 * (series[i].value + series[i - 1].value) * (series[i].t - series[i - 1].t);
  auto integral_to = [&](double t) {
    auto it = std::upper_bound(series.begin(), series.end(), t,
                               [](double v, const SeriesPoint& p) { return v < p.t; });
    std::size_t j = static_cast<std::size_t>(it - series.begin());
    if (j == 0) return 0.0;
    if (j >= series.size()) return cum.back();
    const auto& a = series[j - 1];
    const auto& b = series[j];
    const double f = (t - a.t) / (b.t - a.t);
    const double vt = a.value + f * (b.value - a.value);
    return cum[j - 1] + 0.5 * (a.value + vt) * (t - a.t);
  };
  const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
  for (std::size_t i = 0; i < series.size(); ++i) {
    const double t = series[i].t;
    if (t + window > t_end + slack) break;
    out.push_back({t, (integral_to(std::min(t + window, t_end)) - cum[i]) / window});
  }
  return out;
}

Series RunRecord::series(double DiagnosticsRecord::*member) const {
  Series s;
  s.reserve(samples.size());
  for (const auto& r : samples) s.push_back({r.t, r.*member});
  return s;
}

void DistanceAccumulator::add(double t, const ComplexField& ua, const ComplexField& ub,
                              double energy_a, double energy_b) {
  const double d = l2_distance(ua, ub);
  const double nb = l2_norm(ub);
  partial_.l2_final = d;
  partial_.l2_sup = std::max(partial_.l2_sup, d);
  partial_.relative_distance.push_back({t, nb > 0.0 ? d / nb : d});
  energy_a_.push_back({t, energy_a});
  energy_b_.push_back({t, energy_b});
}

RunDistance DistanceAccumulator::finish(double window) const {
  RunDistance out = partial_;
  const Series ea = window > 0.0 ? window_average(energy_a_, window) : energy_a_;
  double l1 = 0.0;
  for (std::size_t i = 1; i < ea.size(); ++i) {
    const double d0 = std::abs(ea[i - 1].value - energy_b_[i - 1].value);
    const double d1 = std::abs(ea[i].value - energy_b_[i].value);
    l1 += 0.5 * (d0 + d1) * (ea[i].t - ea[i - 1].t);
  }
  // NaN when the window leaves fewer than two averaged samples.
  out.energy_l1 = ea.size() < 2 ? std::numeric_limits<double>::quiet_NaN() : l1;
  return out;
}

RunDistance run_distance(const RunRecord& run_a, const RunRecord& run_b, double window) {
  if (run_a.snapshots.size() != run_b.snapshots.size() ||
      run_a.samples.size() != run_b.samples.size())
    fail(ErrorKind::comparison, "runs have different snapshot schedules");
  DistanceAccumulator acc;
  for (std::size_t i = 0; i < run_a.snapshots.size(); ++i) {
    const auto& sa = run_a.snapshots[i];
    const auto& sb = run_b.snapshots[i];
    if (std::abs(sa.t - sb.t) > 1e-12 * std::max(1.0, std::abs(sa.t)))
      fail(ErrorKind::comparison, "runs have different snapshot times");
    if (!sa.u.grid().same_mesh(sb.u.grid()))
      fail(ErrorKind::comparison, "runs use different grids");
    acc.add(sa.t, sa.u, sb.u, run_a.samples[i].total, run_b.samples[i].total);
  }
  return acc.finish(window);
}

std::vector<double> convergence_rates(std::span<const double> errors,
                                      std::span<const double> omegas) {
  if (errors.size() != omegas.size())
    fail(ErrorKind::comparison, "error and frequency lists differ in length");
  std::vector<double> rates;
  for (std::size_t i = 1; i < errors.size(); ++i) {
    if (!(omegas[i] > omegas[i - 1]))
      fail(ErrorKind::comparison, "frequencies must be strictly increasing");
    rates.push_back(std::log(errors[i - 1] / errors[i]) / std::log(omegas[i] / omegas[i - 1]));
  }
  return rates;
}

BlowupDetector::BlowupDetector(BlowupSettings settings) : settings_(settings) {
  if (settings_.h1_factor <= 0.0 || settings_.h1_absolute < 0.0)
    fail(ErrorKind::config, "blow-up thresholds must be positive");
}

std::optional<BlowupReport> BlowupDetector::observe(const DiagnosticsRecord& record) {
  if (history_.empty())
    threshold_ = settings_.h1_absolute > 0.0 ? settings_.h1_absolute
                                             : settings_.h1_factor * record.h1;
  const bool finite = std::isfinite(record.h1) && std::isfinite(record.total);
  const SeriesPoint previous = history_.empty() ? SeriesPoint{record.t, record.h1} : history_.back();
  history_.push_back({record.t, record.h1});
  if (!finite) {
    return BlowupReport{record.t, record.t, threshold_, "non-finite diagnostics", history_};
  }
  if (threshold_ > 0.0 && record.h1 > threshold_) {
    double tc = record.t;
    if (record.h1 != previous.value && previous.value <= threshold_)
      tc = previous.t + (threshold_ - previous.value) / (record.h1 - previous.value) *
                            (record.t - previous.t);
    return BlowupReport{tc, record.t, threshold_, "h1 threshold exceeded", history_};
  }
  return std::nullopt;
}

}  // namespace xfel

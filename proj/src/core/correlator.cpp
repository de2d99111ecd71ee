#include "correlator.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "master_eq.hpp"

namespace qbeat {

CorrelationEstimate g2_from_clicks(const ClickRecord& record, char herald,
                                   char target, double bin_us, double max_tau_us,
                                   const FeedbackConfig* feedback) {
  if (bin_us <= 0.0) throw std::invalid_argument("bin width must be positive");
  const int n_bins = static_cast<int>(std::round(max_tau_us / bin_us));
  CorrelationEstimate est;
  est.bin_us = bin_us;
  est.tau_us.resize(n_bins);
  for (int k = 0; k < n_bins; ++k) est.tau_us[k] = (k + 0.5) * bin_us;
  est.pairs.assign(n_bins, 0);

  const double T = record.duration_us;
  const double start_cut = T - max_tau_us;  // herald usable window

  int64_t n_starts = 0, n_targets_live = 0;
  double live_time = 0.0;

  size_t i = 0;
  const auto& ev = record.events;
  std::vector<double> h_times, t_times;
  while (i < ev.size()) {
    const uint32_t traj = ev[i].trajectory;
    h_times.clear();
    t_times.clear();
    DriveSchedule sched;
    for (; i < ev.size() && ev[i].trajectory == traj; ++i) {
      if (ev[i].channel == herald) {
        h_times.push_back(ev[i].t_us);
        if (feedback) sched.on_herald(ev[i].t_us, *feedback);
      }
      if (ev[i].channel == target) t_times.push_back(ev[i].t_us);
    }
    // normalization: target rate outside intentionally altered stretches
    live_time += T - sched.altered_time(0.0, T);
    for (double tt : t_times)
      if (!sched.altered(tt)) ++n_targets_live;
    // pair histogram
    size_t lo = 0;
    for (double th : h_times) {
      if (th > start_cut) break;
      ++n_starts;
      while (lo < t_times.size() && t_times[lo] <= th) ++lo;
      for (size_t j = lo; j < t_times.size(); ++j) {
        const double tau = t_times[j] - th;
        if (tau > max_tau_us) break;
        const int k = std::min(n_bins - 1, static_cast<int>(tau / bin_us));
        est.pairs[k]++;
      }
    }
    est.heralds += static_cast<int64_t>(h_times.size());
  }

  est.g2.assign(n_bins, 0.0);
  est.stderr_.assign(n_bins, 0.0);
  if (n_starts == 0 || n_targets_live == 0 || live_time <= 0.0) {
    est.empty_estimate = true;
    return est;
  }
  est.norm_rate_per_us = static_cast<double>(n_targets_live) / live_time;
  const double denom =
      static_cast<double>(n_starts) * est.norm_rate_per_us * bin_us;
  for (int k = 0; k < n_bins; ++k) {
    est.g2[k] = est.pairs[k] / denom;
    est.stderr_[k] =
        est.pairs[k] > 0 ? std::sqrt(static_cast<double>(est.pairs[k])) / denom
                         : 0.0;
  }
  return est;
}

CorrelationEstimate g2_conditional_direct(const SystemModel& model,
                                          const FeedbackConfig& feedback,
                                          const std::vector<double>& tau_us,
                                          char herald) {
  SystemOperators ops = SystemOperators::build(model);
  std::vector<double> g_slots(model.n_slots, 0.0);
  if (model.n_slots > 0) g_slots[0] = model.g_max;

  MasterEquation me(ops, g_slots);
  const std::vector<cxd> psi0 =
      product_state(ops, AtomInit::PumpedM0, CavityInit::Steady);
  const int64_t n = ops.space.dim();
  Eigen::Map<const Eigen::VectorXcd> v0(psi0.data(), n);
  Eigen::MatrixXcd rho = me.steady_state(v0 * v0.adjoint());

  const SparseOp* herald_op = nullptr;
  for (const auto& ch : ops.channels)
    if (ch.detected && ch.label == herald) herald_op = &ch.op;
  if (herald_op == nullptr || herald_op->empty())
    throw std::runtime_error("herald detector has no operator content");

  const Eigen::MatrixXcd d = herald_op->dense();
  const Eigen::MatrixXcd dd = d.adjoint() * d;
  const double rate_ss = (dd * rho).trace().real();
  if (rate_ss <= 1e-300)
    throw std::runtime_error("zero steady-state herald rate: g2 undefined");

  Eigen::MatrixXcd cond = d * rho * d.adjoint();
  cond /= cond.trace().real();

  DriveSchedule sched;
  sched.on_herald(0.0, feedback);
  MasterEquation me_fb(ops, g_slots, &sched);

  CorrelationEstimate est;
  est.bin_us = tau_us.size() > 1 ? tau_us[1] - tau_us[0] : 0.0;
  est.heralds = 1;
  est.norm_rate_per_us = rate_ss;
  double t = 0.0;
  for (double tau : tau_us) {
    cond = me_fb.evolve(std::move(cond), t, tau);
    t = tau;
    est.tau_us.push_back(tau);
    est.g2.push_back((dd * cond).trace().real() / rate_ss);
    est.stderr_.push_back(0.0);
    est.pairs.push_back(0);
  }
  return est;
}

std::vector<SpectrumPoint> g2_spectrum(const CorrelationEstimate& est,
                                       double fmin_mhz, double fmax_mhz,
                                       double df_mhz) {
  double mean = 0.0;
  if (!est.g2.empty()) {
    for (double y : est.g2) mean += y;
    mean /= static_cast<double>(est.g2.size());
  }
  std::vector<SpectrumPoint> spec;
  for (double f = fmin_mhz; f <= fmax_mhz + 1e-12; f += df_mhz) {
    cxd z = 0.0;
    for (size_t k = 0; k < est.g2.size(); ++k) {
      const double y = est.g2[k] - mean;
      const double ph = kTwoPi * f * est.tau_us[k];
      z += y * cxd(std::cos(ph), -std::sin(ph));
    }
    spec.push_back({f, std::norm(z)});
  }
  return spec;
}

double dominant_peak_mhz(const std::vector<SpectrumPoint>& spec) {
  double best = 0.0, best_p = -1.0;
  for (const auto& p : spec)
    if (p.power > best_p) {
      best_p = p.power;
      best = p.freq_mhz;
    }
  return best;
}

}  // namespace qbeat

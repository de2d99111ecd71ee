#include "scans.hpp"

#include <Eigen/Dense>
#include <cmath>

namespace qbeat {

namespace {
double wrap_pi(double x) {
  x = std::fmod(x, kTwoPi);
  if (x <= -0.5 * kTwoPi) x += kTwoPi;
  if (x > 0.5 * kTwoPi) x -= kTwoPi;
  return x;
}
}  // namespace

LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma) {
  LinearFit f;
  double S = 0, Sx = 0, Sxx = 0, Sy = 0, Sxy = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    if (!(sigma[i] > 0.0) || !std::isfinite(y[i])) continue;
    const double w = 1.0 / (sigma[i] * sigma[i]);
    S += w;
    Sx += w * x[i];
    Sxx += w * x[i] * x[i];
    Sy += w * y[i];
    Sxy += w * x[i] * y[i];
    ++f.n;
  }
  const double D = S * Sxx - Sx * Sx;
  if (f.n < 2 || D <= 0.0) return f;
  f.slope = (S * Sxy - Sx * Sy) / D;
  f.intercept = (Sxx * Sy - Sx * Sxy) / D;
  f.err_slope = std::sqrt(S / D);
  f.err_intercept = std::sqrt(Sxx / D);

  // quadratic term for linearity checks
  if (f.n >= 3) {
    Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
    Eigen::Vector3d v = Eigen::Vector3d::Zero();
    for (size_t i = 0; i < x.size(); ++i) {
      if (!(sigma[i] > 0.0) || !std::isfinite(y[i])) continue;
      const double w = 1.0 / (sigma[i] * sigma[i]);
      Eigen::Vector3d row(1.0, x[i], x[i] * x[i]);
      m.noalias() += w * row * row.transpose();
      v.noalias() += w * y[i] * row;
    }
    const Eigen::Matrix3d cov = m.ldlt().solve(Eigen::Matrix3d::Identity());
    const Eigen::Vector3d beta = m.ldlt().solve(v);
    f.quad = beta[2];
    f.err_quad = std::sqrt(std::max(0.0, cov(2, 2)));
  }
  return f;
}

EpsilonScan scan_feedback_intensity(const SystemModel& model,
                                    const EngineConfig& base,
                                    const std::vector<double>& eps_list,
                                    double t_fb_us, const AnalysisOptions& opt) {
  EpsilonScan scan;
  scan.t_on_us = base.feedback.latency_us + t_fb_us;

  auto run_point = [&](double eps, uint64_t salt) {
    EngineConfig cfg = base;
    cfg.feedback.enabled = true;
    cfg.feedback.epsilon = eps;
    cfg.feedback.t_fb_us = t_fb_us;
    uint64_t s = base.master_seed + 0x9E37UL * (salt + 1);
    cfg.master_seed = splitmix64(s);
    EnsembleResult ens = run_ensemble(model, cfg);
    return g2_from_clicks(ens.clicks, opt.herald, opt.target, opt.bin_us,
                          opt.max_tau_us, &cfg.feedback);
  };

  // reference: epsilon = 1 (drive untouched)
  const CorrelationEstimate ref_trace = run_point(1.0, 0);
  scan.reference =
      post_revival_fit(ref_trace, scan.t_on_us, opt.fit_guard_us, opt.fit_span_us);
  const double ref_amp = scan.reference.amp_at(scan.t_on_us);
  const double ref_rel =
      scan.reference.amplitude > 0.0
          ? std::sqrt(std::pow(scan.reference.err_amplitude /
                                   scan.reference.amplitude, 2) +
                      std::pow(scan.t_on_us * scan.reference.err_decay, 2))
          : 0.0;

  double prev_shift = 0.0;
  for (size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    EpsilonScanPoint pt;
    pt.epsilon = eps;
    CorrelationEstimate trace;
    if (eps >= 1.0) {
      trace = ref_trace;
      pt.fit = scan.reference;
      pt.amp_ratio = 1.0;
      pt.amp_ratio_err = 0.0;
      pt.phase_shift = 0.0;
      pt.phase_shift_err = 0.0;
    } else {
      trace = run_point(eps, i + 1);
      pt.fit = post_revival_fit(trace, scan.t_on_us, opt.fit_guard_us,
                                opt.fit_span_us);
      const double amp = pt.fit.amp_at(scan.t_on_us);
      pt.amp_ratio = ref_amp > 0.0 ? amp / ref_amp : 0.0;
      const double rel =
          pt.fit.amplitude > 0.0
              ? std::sqrt(std::pow(pt.fit.err_amplitude / pt.fit.amplitude, 2) +
                          std::pow(scan.t_on_us * pt.fit.err_decay, 2))
              : 0.0;
      pt.amp_ratio_err = pt.amp_ratio * std::sqrt(rel * rel + ref_rel * ref_rel);
      pt.phase_shift = wrap_pi(pt.fit.phase - scan.reference.phase);
      // nearest-branch continuity across the scan
      while (pt.phase_shift - prev_shift > 0.5 * kTwoPi) pt.phase_shift -= kTwoPi;
      while (pt.phase_shift - prev_shift < -0.5 * kTwoPi) pt.phase_shift += kTwoPi;
      pt.phase_shift_err = std::sqrt(pt.fit.err_phase * pt.fit.err_phase +
                                     scan.reference.err_phase *
                                         scan.reference.err_phase);
    }
    prev_shift = pt.phase_shift;
    scan.traces.push_back(std::move(trace));
    scan.points.push_back(pt);
  }
  return scan;
}

PhotonScan scan_photon_number(const SystemModel& model, const EngineConfig& base,
                              const std::vector<double>& n_list,
                              double fit_lo_us, double fit_hi_us) {
  PhotonScan scan;
  std::vector<double> ns, freqs, freq_errs, decays, decay_errs;
  for (size_t i = 0; i < n_list.size(); ++i) {
    SystemModel m = model;
    m.set_n_photons(n_list[i]);
    EngineConfig cfg = base;
    cfg.feedback.enabled = false;
    uint64_t s = base.master_seed + 0x517CUL * (i + 1);
    cfg.master_seed = splitmix64(s);
    EnsembleResult ens = run_ensemble(m, cfg);

    std::vector<double> y(ens.grid_us.size()), sig(ens.grid_us.size());
    for (size_t k = 0; k < ens.grid_us.size(); ++k) {
      y[k] = 2.0 * ens.coh_re_mean(k);  // beat contrast ~ 2 Re rho(+,-)
      sig[k] = 2.0 * ens.coh_re_stderr(k);
    }
    PhotonScanPoint pt;
    pt.n_photons = n_list[i];
    pt.fit = fit_damped_sinusoid(ens.grid_us, y, sig, fit_lo_us, fit_hi_us);
    scan.points.push_back(pt);
    if (pt.fit.converged && pt.fit.freq_identifiable) {
      ns.push_back(n_list[i]);
      freqs.push_back(pt.fit.freq_mhz);
      freq_errs.push_back(std::max(pt.fit.err_freq, 1e-12));
      decays.push_back(pt.fit.decay);
      decay_errs.push_back(std::max(pt.fit.err_decay, 1e-12));
    }
  }
  scan.freq_vs_n = weighted_linear_fit(ns, freqs, freq_errs);
  scan.decay_vs_n = weighted_linear_fit(ns, decays, decay_errs);

  // four-level theory at |alpha|^2 = 1 (both outputs are linear in it)
  double delta = 0.0;
  for (const auto& tr : model.scheme.transitions) {
    const double eg = model.scheme.sublevels[tr.gi].energy;
    const double ee = model.scheme.sublevels[tr.ei].energy;
    if (model.scheme.sublevels[tr.gi].m > 0)
      delta = (ee - eg) + model.delta_a;
  }
  scan.theory_freq_slope_mhz =
      -2.0 * delta_jump(model.g_max, 1.0, delta, model.gamma) / kTwoPi;
  scan.theory_decay_slope = gamma_decoh(model.g_max, 1.0, delta, model.gamma);
  return scan;
}

}  // namespace qbeat

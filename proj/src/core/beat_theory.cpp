#include "beat_theory.hpp"

#include <cmath>

namespace qbeat {

namespace {
double lorentz_denominator(double delta, double gamma) {
  const double hg = 0.5 * gamma;
  return hg * hg + delta * delta;
}
}  // namespace

double delta_jump(double g, double alpha2, double delta, double gamma) {
  const double f = (0.5 * gamma) / lorentz_denominator(delta, gamma);
  return 2.0 * g * g * alpha2 * delta * f * f;
}

double gamma_decoh(double g, double alpha2, double delta, double gamma) {
  const double f = delta / lorentz_denominator(delta, gamma);
  return 2.0 * g * g * alpha2 * gamma * f * f;
}

double resolvedness(double g, double alpha2, double delta, double gamma) {
  if (delta == 0.0)
    throw std::domain_error("resolvedness undefined at delta = 0");
  return gamma_decoh(g, alpha2, delta, gamma) /
         (2.0 * delta_jump(g, alpha2, delta, gamma));
}

double ac_stark(double g, double alpha2, double delta, double gamma) {
  return g * g * alpha2 * delta / lorentz_denominator(delta, gamma);
}

BeatPrediction make_prediction(double g, double alpha2, double delta,
                               double gamma, double omega_base,
                               double shift_sign) {
  BeatPrediction p;
  p.delta_jump = delta_jump(g, alpha2, delta, gamma);
  p.gamma_decoh = gamma_decoh(g, alpha2, delta, gamma);
  p.ac_stark = ac_stark(g, alpha2, delta, gamma);
  p.omega_base = omega_base;
  p.shift_sign = shift_sign;
  return p;
}

std::vector<double> predicted_beat(const BeatPrediction& p, double gamma0,
                                   double a0, double phi0,
                                   const std::vector<double>& tau,
                                   const DriveSchedule* schedule) {
  std::vector<double> y;
  y.reserve(tau.size());
  if (schedule == nullptr || schedule->windows.empty()) {
    for (double t : tau) {
      const double damp = std::exp(-(gamma0 + p.gamma_decoh) * t);
      const double phase =
          (p.omega_base - 2.0 * p.shift_sign * p.delta_jump) * t + phi0;
      y.push_back(1.0 + a0 * damp * std::cos(phase));
    }
    return y;
  }

  // Piecewise accumulation: the jump terms follow the instantaneous drive
  // power (multiplier^2); the base precession and background damping do not.
  double prev_t = 0.0, phase = phi0, logenv = std::log(a0);
  for (double t : tau) {
    // integrate over [prev_t, t] split at window edges
    double s = prev_t;
    while (s < t) {
      double e = t;
      for (const auto& w : schedule->windows) {
        if (w.start_us > s && w.start_us < e) e = w.start_us;
        if (w.end_us > s && w.end_us < e) e = w.end_us;
      }
      const double mid = 0.5 * (s + e);
      const double m = schedule->multiplier(mid);
      const double pf = m * m;  // power fraction
      phase += (p.omega_base - 2.0 * p.shift_sign * p.delta_jump * pf) * (e - s);
      logenv += -(gamma0 + p.gamma_decoh * pf) * (e - s);
      s = e;
    }
    prev_t = t;
    y.push_back(1.0 + std::exp(logenv) * std::cos(phase));
  }
  return y;
}

}  // namespace qbeat

#pragma once

#include <vector>

#include "correlator.hpp"

namespace qbeat {

// Damped-cosine fit y = c + A exp(-Gamma tau) cos(2 pi f tau + phi).
// Canonical form: A >= 0, f >= 0, phi in (-pi, pi]. tau in us, f in MHz.
struct BeatFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double decay = 0.0;     // 1/us
  double freq_mhz = 0.0;
  double phase = 0.0;     // rad, referenced to tau = 0
  double err_offset = 0.0, err_amplitude = 0.0, err_decay = 0.0;
  double err_freq = 0.0, err_phase = 0.0;
  double window_lo = 0.0, window_hi = 0.0;
  bool converged = false;
  bool freq_identifiable = true;
  double residual_norm = 0.0;
  int n_points = 0;

  // Fitted envelope amplitude at a given tau.
  double amp_at(double tau_us) const;
};

// Weighted nonlinear least squares (Levenberg-style damping, max 200
// iterations). Points with non-finite or non-positive sigma are skipped;
// pass sigma = 1 for unweighted fits. Initial guesses come from the DFT
// peak (f), a split-window envelope (A, Gamma) and quadrature projection
// (phi) unless `guess` is supplied.
BeatFit fit_damped_sinusoid(const std::vector<double>& tau,
                            const std::vector<double>& y,
                            const std::vector<double>& sigma,
                            double window_lo, double window_hi,
                            const BeatFit* guess = nullptr);

BeatFit fit_damped_sinusoid(const CorrelationEstimate& trace, double window_lo,
                            double window_hi, const BeatFit* guess = nullptr);

// Fit restricted to the oscillations right after the drive returns at t_on:
// window [t_on + guard, t_on + guard + span]. The reported phase stays in
// the absolute tau = 0 convention so fits are comparable across feedback
// settings.
BeatFit post_revival_fit(const CorrelationEstimate& trace, double t_on_us,
                         double guard_us = 0.2, double span_us = 3.0);

}  // namespace qbeat

#pragma once

#include <vector>

#include "beat_theory.hpp"
#include "correlator.hpp"
#include "engine.hpp"
#include "fit.hpp"

namespace qbeat {

struct AnalysisOptions {
  double bin_us = 0.05;
  double max_tau_us = 10.0;
  double fit_guard_us = 0.2;
  double fit_span_us = 3.0;
  char herald = 'H';
  char target = 'H';
};

// Weighted linear regression y = a + b x; errors from the normal equations.
struct LinearFit {
  double intercept = 0.0, slope = 0.0;
  double err_intercept = 0.0, err_slope = 0.0;
  double quad = 0.0, err_quad = 0.0;  // quadratic coefficient of a 2nd-order fit
  int n = 0;
};
LinearFit weighted_linear_fit(const std::vector<double>& x,
                              const std::vector<double>& y,
                              const std::vector<double>& sigma);

// --- feedback-intensity scan (fixed window length, varying epsilon) --------
struct EpsilonScanPoint {
  double epsilon = 1.0;
  BeatFit fit;
  double amp_ratio = 1.0, amp_ratio_err = 0.0;
  double phase_shift = 0.0, phase_shift_err = 0.0;
};

struct EpsilonScan {
  std::vector<EpsilonScanPoint> points;
  BeatFit reference;  // the epsilon = 1 fit
  std::vector<CorrelationEstimate> traces;
  double t_on_us = 0.0;  // drive-return time on the tau axis
};

// For each epsilon: ensemble -> g2 -> post-revival fit. Amplitudes are
// compared at the drive-return time and normalized to the epsilon = 1 point;
// phase shifts are relative to epsilon = 1, unwrapped across the scan by
// nearest-branch continuity.
EpsilonScan scan_feedback_intensity(const SystemModel& model,
                                    const EngineConfig& base,
                                    const std::vector<double>& eps_list,
                                    double t_fb_us, const AnalysisOptions& opt);

// --- photon-number scan (no feedback) ---------------------------------------
struct PhotonScanPoint {
  double n_photons = 0.0;
  BeatFit fit;
};

struct PhotonScan {
  std::vector<PhotonScanPoint> points;
  LinearFit freq_vs_n;       // MHz per photon
  LinearFit decay_vs_n;      // 1/us per photon
  double theory_freq_slope_mhz = 0.0;  // -2 delta_jump / 2pi per photon
  double theory_decay_slope = 0.0;     // gamma_decoh per photon
};

// Beat frequency and decay versus intracavity photon number, read off the
// ensemble-mean ground-state coherence of a constant-coupling model, with a
// weighted regression against the four-level predictions.
PhotonScan scan_photon_number(const SystemModel& model, const EngineConfig& base,
                              const std::vector<double>& n_list,
                              double fit_lo_us, double fit_hi_us);

}  // namespace qbeat

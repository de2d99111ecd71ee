#pragma once

#include <vector>

#include "engine.hpp"
#include "feedback.hpp"

namespace qbeat {

// Binned conditional intensity g2(tau) with statistical errors.
struct CorrelationEstimate {
  std::vector<double> tau_us;  // bin centers
  std::vector<double> g2;
  std::vector<double> stderr_;
  std::vector<int64_t> pairs;
  int64_t heralds = 0;
  double norm_rate_per_us = 0.0;
  bool empty_estimate = false;  // no heralds or no targets: values undefined
  double bin_us = 0.0;
};

// Multi-start/multi-stop estimator over a click record. Pairs are never
// formed across trajectory boundaries. When a feedback config is given, the
// drive schedule of each trajectory is reconstructed from its herald-channel
// clicks and the intentionally altered stretches are excluded from the
// normalization rate (the paper-style steady-drive normalization).
CorrelationEstimate g2_from_clicks(const ClickRecord& record, char herald,
                                   char target, double bin_us, double max_tau_us,
                                   const FeedbackConfig* feedback = nullptr);

// Direct conditional-evolution estimator: collapse the steady state with the
// herald detector operator, evolve under the (feedback-modulated) master
// equation, return <d^dag d>(tau) normalized to the steady rate. Constant
// coupling, undisplaced models only. Throws when the steady rate vanishes.
CorrelationEstimate g2_conditional_direct(const SystemModel& model,
                                          const FeedbackConfig& feedback,
                                          const std::vector<double>& tau_us,
                                          char herald = 'H');

struct SpectrumPoint {
  double freq_mhz;
  double power;
};

// Direct DFT power of (g2 - mean) on a uniform frequency grid; empty bins are
// skipped. Used for the beat-frequency peak reports.
std::vector<SpectrumPoint> g2_spectrum(const CorrelationEstimate& est,
                                       double fmin_mhz, double fmax_mhz,
                                       double df_mhz);

double dominant_peak_mhz(const std::vector<SpectrumPoint>& spec);

}  // namespace qbeat

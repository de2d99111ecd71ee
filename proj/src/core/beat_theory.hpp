#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "feedback.hpp"

namespace qbeat {

// Closed-form four-level predictions for the jump-induced frequency shift
// and decoherence of a ground-state quantum beat. All rates in rad/us,
// |alpha|^2 is the mean intracavity photon number of the driven mode.

// Mean phase-drift rate of one leg detuned by `delta`; the beat frequency
// acquires -2*delta_jump from the two oppositely detuned legs.
double delta_jump(double g, double alpha2, double delta, double gamma);

// Added damping rate of the beat from phase diffusion of the jump process.
double gamma_decoh(double g, double alpha2, double delta, double gamma);

// gamma_decoh / (2 * delta_jump); algebraically equal to 2*delta/gamma.
// Throws std::domain_error at delta == 0 where the ratio is undefined.
double resolvedness(double g, double alpha2, double delta, double gamma);

// Conventional AC Stark shift of one leg; delta_jump approaches twice this
// value (with opposite sense relative to the Stark shift) as delta -> 0.
double ac_stark(double g, double alpha2, double delta, double gamma);

struct BeatPrediction {
  double delta_jump = 0.0;   // rad/us
  double gamma_decoh = 0.0;  // rad/us
  double ac_stark = 0.0;     // rad/us
  double omega_base = 0.0;   // rad/us; 2x Larmor for intensity, 1x homodyne
  double shift_sign = +1.0;  // +1 realizes "frequency increases" for the
                             // experimental detuning sign; -1 flips it
};

BeatPrediction make_prediction(double g, double alpha2, double delta,
                               double gamma, double omega_base,
                               double shift_sign = +1.0);

// y(tau) = 1 + A0 exp(-(Gamma0+Gamma_decoh) tau)
//            cos((omega_base - 2 sign delta_jump) tau + phi0).
// With a drive schedule attached, the jump terms are scaled by the
// instantaneous drive *power* fraction (multiplier^2), accumulated piecewise,
// so a feedback window suppresses both the extra damping and the extra phase
// drift while it is active.
std::vector<double> predicted_beat(const BeatPrediction& p, double gamma0,
                                   double a0, double phi0,
                                   const std::vector<double>& tau,
                                   const DriveSchedule* schedule = nullptr);

}  // namespace qbeat

#pragma once

#include <cstdint>

#include "rng.hpp"

namespace qbeat {

// One atom crossing the cavity mode on a straight line. Speeds in m/s are
// numerically equal to um/us, which is the unit used internally.
struct BeamTransit {
  double arrival_us = 0.0;  // window start (atom enters the 6w/v window)
  double v_mps = 13.5;      // speed along the beam
  double rho0_um = 0.0;     // impact parameter (closest distance to the axis)
  double phase0_rad = 0.0;  // standing-wave phase at closest approach
  double tilt_rad = 0.0;    // beam deviation from perpendicular to the axis

  double window_us(double waist_um) const { return 6.0 * waist_um / v_mps; }
  double t_hat(double waist_um) const {
    return arrival_us + 0.5 * window_us(waist_um);
  }
};

// Time-dependent coupling g(t) = g_max exp(-rho(t)^2/w^2) cos(2 pi x(t)/lambda)
// for straight-line motion; returns 0 outside the transit window.
double coupling_profile(const BeamTransit& tr, double g_max, double waist_um,
                        double wavelength_nm, double t_us);

struct BeamConfig {
  bool enabled = false;
  double n_eff = 0.55;
  double v_mps = 13.5;
  double waist_um = 56.0;
  double wavelength_nm = 780.24;
  double tilt_rad = 0.017;
  int max_atoms = 2;               // simultaneous transits kept in the state
  double rho0_halfwidth_w = 2.0;   // impact parameter uniform over +-(this * w)
  double rate_per_us = 0.0;        // 0 = calibrate from n_eff
};

// Draws transit geometry (impact parameter, standing-wave phase) from the
// configured distributions; arrival_us is set by the caller.
BeamTransit sample_transit(const BeamConfig& cfg, RngStream& rng);

// Mean of the per-transit integral of (g/g_max)^2 dt over the window,
// Monte-Carlo averaged over transit geometry (fixed internal seed, so the
// result is a pure function of the configuration).
double mean_transit_weight(const BeamConfig& cfg, int samples = 20000);

// Poisson arrival rate (atoms per us) such that the time-averaged
// sum_i g_i(t)^2 / g_max^2 over all in-flight transits equals n_eff.
// Throws std::runtime_error if the Monte-Carlo average fails to converge.
double calibrate_flux(double n_eff, const BeamConfig& cfg);

}  // namespace qbeat

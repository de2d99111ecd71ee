#include "beam.hpp"

#include <cmath>
#include <stdexcept>

#include "units.hpp"

namespace qbeat {

double coupling_profile(const BeamTransit& tr, double g_max, double waist_um,
                        double wavelength_nm, double t_us) {
  const double window = tr.window_us(waist_um);
  if (t_us < tr.arrival_us || t_us > tr.arrival_us + window) return 0.0;
  const double dt = t_us - tr.t_hat(waist_um);
  const double v_perp = tr.v_mps * std::cos(tr.tilt_rad);
  const double v_ax = tr.v_mps * std::sin(tr.tilt_rad);
  const double rho2 = tr.rho0_um * tr.rho0_um + v_perp * dt * v_perp * dt;
  const double axial = tr.phase0_rad + kTwoPi * v_ax * dt / (wavelength_nm * 1e-3);
  return g_max * std::exp(-rho2 / (waist_um * waist_um)) * std::cos(axial);
}

BeamTransit sample_transit(const BeamConfig& cfg, RngStream& rng) {
  BeamTransit tr;
  tr.v_mps = cfg.v_mps;
  tr.tilt_rad = cfg.tilt_rad;
  const double hw = cfg.rho0_halfwidth_w * cfg.waist_um;
  tr.rho0_um = rng.uniform_range(-hw, hw);
  tr.phase0_rad = rng.uniform_range(0.0, kTwoPi);
  return tr;
}

double mean_transit_weight(const BeamConfig& cfg, int samples) {
  RngStream rng(0xC0FFEEull, 0);  // fixed stream: pure function of cfg
  const int n_grid = 240;
  double total = 0.0;
  for (int s = 0; s < samples; ++s) {
    BeamTransit tr = sample_transit(cfg, rng);
    tr.arrival_us = 0.0;
    const double window = tr.window_us(cfg.waist_um);
    const double h = window / n_grid;
    // Simpson rule over the window
    double acc = 0.0;
    for (int i = 0; i <= n_grid; ++i) {
      const double g =
          coupling_profile(tr, 1.0, cfg.waist_um, cfg.wavelength_nm, i * h);
      const double wgt = (i == 0 || i == n_grid) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += wgt * g * g;
    }
    total += acc * h / 3.0;
  }
  return total / samples;
}

double calibrate_flux(double n_eff, const BeamConfig& cfg) {
  if (n_eff <= 0.0) return 0.0;
  const double mean = mean_transit_weight(cfg);
  if (!(mean > 0.0) || !std::isfinite(mean))
    throw std::runtime_error("flux calibration failed: degenerate transit weight");
  return n_eff / mean;
}

}  // namespace qbeat

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "beam.hpp"
#include "feedback.hpp"
#include "system.hpp"

namespace qbeat {

struct ClickEvent {
  double t_us;
  char channel;  // 'H' or 'V'
  uint32_t trajectory;
};

// Time-ordered detector events from a trajectory ensemble.
struct ClickRecord {
  std::vector<ClickEvent> events;
  double duration_us = 0.0;
  int n_trajectories = 0;
};

struct EngineConfig {
  double duration_us = 100.0;
  // Pre-roll before t = 0; clicks and samples are recorded for t >= 0 only.
  double warmup_us = 0.0;
  uint64_t master_seed = 1;
  int trajectories = 1;
  int workers = 0;  // 0: QBEAT_WORKERS env or hardware concurrency
  double dt_tol = 1e-8;
  double jump_resolution_us = 1e-4;

  BeamConfig beam;
  FeedbackConfig feedback;
  char herald_channel = 'H';

  AtomInit atom_init = AtomInit::PumpedM0;
  CavityInit cavity_init = CavityInit::Steady;

  // Observable sampling grid (0 = none) and checkpoint times for reduced
  // atomic density matrices.
  double sample_dt_us = 0.0;
  std::vector<double> checkpoints_us;

  // Pre-seeded drive schedule (applied in addition to herald triggers);
  // used by tests that need a window at a known time.
  std::optional<DriveSchedule> forced_schedule;

  // Start beam slots mid-transit with uniform window phase when the flux is
  // high enough to keep every slot busy; avoids a transit-length warm-up.
  bool stationary_start = true;

  // Diagnostics: record undetected jumps too (side emission as 's', cavity
  // loss as 'l').
  bool record_all_jumps = false;
};

// Per-trajectory output; grids are shared through the config.
struct TrajectoryResult {
  std::vector<ClickEvent> clicks;
  std::vector<double> pop_ground, pop_excited, pop_gplus, n_v, n_h;
  std::vector<cxd> coherence;  // rho_atom[g(+1), g(-1)] on the sample grid
  std::vector<Eigen::MatrixXcd> rho_checkpoints;
  DriveSchedule schedule;  // final drive timeline (diagnostics)
};

// Ensemble accumulation; merged in trajectory-index order so results are
// bitwise independent of worker count.
struct EnsembleResult {
  ClickRecord clicks;
  int count = 0;
  std::vector<double> grid_us;
  std::vector<double> sum_pg, sum_pe, sum_nv, sum_nh;
  std::vector<cxd> sum_coh;
  std::vector<double> sum_coh_re2, sum_coh_im2;
  std::vector<double> checkpoints_us;
  std::vector<Eigen::MatrixXcd> rho_sum;
  double beam_rate_per_us = 0.0;

  // Ensemble mean / standard error of Re(coherence) at grid index k.
  double coh_re_mean(size_t k) const { return sum_coh[k].real() / count; }
  double coh_re_stderr(size_t k) const;
};

// Runs one trajectory; `index` selects the random stream derived from the
// master seed. `beam_rate_per_us` must come from calibrate_flux (or 0 when
// the beam is disabled).
TrajectoryResult run_trajectory(const SystemOperators& ops,
                                const EngineConfig& cfg,
                                double beam_rate_per_us, uint32_t index);

// Runs the configured ensemble on a bounded worker pool.
EnsembleResult run_ensemble(const SystemModel& model, const EngineConfig& cfg);

int resolve_workers(int requested);

}  // namespace qbeat

#include "engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <thread>

namespace qbeat {

namespace {

// Cash-Karp embedded 5(4) tableau.
constexpr double kC[6] = {0.0, 0.2, 0.3, 0.6, 1.0, 0.875};
constexpr double kA[6][5] = {
    {},
    {0.2},
    {3.0 / 40.0, 9.0 / 40.0},
    {0.3, -0.9, 1.2},
    {-11.0 / 54.0, 2.5, -70.0 / 27.0, 35.0 / 27.0},
    {1631.0 / 55296.0, 175.0 / 512.0, 575.0 / 13824.0, 44275.0 / 110592.0,
     253.0 / 4096.0},
};
constexpr double kB5[6] = {37.0 / 378.0,  0.0, 250.0 / 621.0,
                           125.0 / 594.0, 0.0, 512.0 / 1771.0};
constexpr double kB4[6] = {2825.0 / 27648.0,  0.0,
                           18575.0 / 48384.0, 13525.0 / 55296.0,
                           277.0 / 14336.0,   0.25};

double norm2(const std::vector<cxd>& v) {
  double s = 0.0;
  for (const cxd& x : v) s += std::norm(x);
  return s;
}

struct PhaseCache {
  double h = -1.0;
  // stage s = 1..5: minus[s] = exp(-i D c_s h), plus[s] = exp(+i D c_s h)
  std::vector<cxd> minus[6], plus[6];

  void rebuild(const std::vector<cxd>& diag, double h_new) {
    h = h_new;
    const size_t n = diag.size();
    for (int s = 1; s < 6; ++s) {
      minus[s].resize(n);
      plus[s].resize(n);
      const double ch = kC[s] * h;
      for (size_t i = 0; i < n; ++i) {
        const cxd e = std::exp(cxd(0.0, -ch) * diag[i]);
        minus[s][i] = e;
        plus[s][i] = 1.0 / e;
      }
    }
  }
};

class Trajectory {
 public:
  Trajectory(const SystemOperators& ops, const EngineConfig& cfg, double rate,
             uint32_t index)
      : ops_(ops),
        cfg_(cfg),
        rate_(rate),
        rng_(cfg.master_seed, index),
        index_(index) {
    const size_t n = ops_.space.dim();
    psi_.resize(n);
    for (auto& k : k_) k.resize(n);
    tmp_.resize(n);
    wtmp_.resize(n);
    scratch_.resize(n);
    step_out_.resize(n);
    probe_out_.resize(n);
    slots_.assign(ops_.space.n_slots, std::nullopt);
    dt_max_ = 0.2 / std::max({ops_.model.kappa, ops_.model.gamma,
                              ops_.model.g_max, std::abs(ops_.model.drive_e),
                              1e-6});
    if (cfg.forced_schedule) schedule_ = *cfg.forced_schedule;
  }

  TrajectoryResult run();

 private:
  // --- drive / classical field -------------------------------------------
  double drive_multiplier(double t) const { return schedule_.multiplier(t); }

  cxd alpha_at(double t) const {
    if (!ops_.model.displaced) return 0.0;
    const cxd decay =
        std::exp(-(cxd(ops_.model.kappa, ops_.model.delta_c)) * (t - seg_t0_));
    return seg_target_ + (seg_alpha0_ - seg_target_) * decay;
  }

  void reset_drive_segment(double t) {
    const cxd denom(ops_.model.kappa, ops_.model.delta_c);
    seg_alpha0_ = alpha_at(t);
    seg_t0_ = t;
    seg_target_ = ops_.model.drive_e * drive_multiplier(t) / denom;
  }

  double next_drive_edge(double t) const {
    double next = std::numeric_limits<double>::infinity();
    for (const auto& w : schedule_.windows) {
      if (w.start_us > t) next = std::min(next, w.start_us);
      if (w.end_us > t) next = std::min(next, w.end_us);
      if (w.start_us > next) break;
    }
    return next;
  }

  // --- time-dependent weights ---------------------------------------------
  double slot_coupling(int slot, double t) const {
    if (!cfg_.beam.enabled) return slot == 0 ? ops_.model.g_max : 0.0;
    const auto& tr = slots_[slot];
    if (!tr) return 0.0;
    return coupling_profile(*tr, ops_.model.g_max, cfg_.beam.waist_um,
                            cfg_.beam.wavelength_nm, t);
  }

  // y += W(t) x
  void apply_w(double t, const cxd* x, cxd* y) {
    const cxd alpha = alpha_at(t);
    const SystemModel& m = ops_.model;
    const double eta[2] = {m.eta1, m.eta2};
    const cxd mixes[2] = {cxd(ops_.basis.sin2t()), cxd(ops_.basis.cos2t())};
    for (const auto& b : ops_.blocks) {
      cxd w = 0.0;
      switch (b.kind) {
        case BlockKind::CouplingV:
        case BlockKind::CouplingH:
          w = slot_coupling(b.slot, t);
          break;
        case BlockKind::RabiLower:
          w = slot_coupling(b.slot, t) * std::conj(alpha);
          break;
        case BlockKind::RabiRaise:
          w = slot_coupling(b.slot, t) * alpha;
          break;
        case BlockKind::Drive:
          w = kImag * m.drive_e * drive_multiplier(t);
          break;
        case BlockKind::Source:
          w = -kImag * 2.0 * m.kappa * eta[b.detector] * mixes[b.detector] *
              alpha;
          break;
        case BlockKind::ScalarNorm: {
          double r = 0.0;
          for (int k = 0; k < 2; ++k)
            r += 2.0 * m.kappa * eta[k] * std::norm(mixes[k] * alpha);
          const cxd ws(0.0, -0.5 * r);
          const size_t n = psi_.size();
          for (size_t i = 0; i < n; ++i) y[i] += ws * x[i];
          continue;
        }
      }
      if (w != cxd(0.0)) b.op.apply(x, y, w);
    }
  }

  // phi' = -i exp(+iDs) W exp(-iDs) phi; integrating factor handles the
  // diagonal (Zeeman, detunings, decay) exactly.
  void stage_derivative(int s, double t0, double h, const std::vector<cxd>& phi,
                        std::vector<cxd>& out, const PhaseCache& cache) {
    const size_t n = phi.size();
    const double ts = t0 + kC[s] * h;
    if (s == 0) {
      std::fill(out.begin(), out.end(), cxd(0.0));
      apply_w(ts, phi.data(), out.data());
      for (size_t i = 0; i < n; ++i) out[i] *= cxd(0.0, -1.0);
      return;
    }
    for (size_t i = 0; i < n; ++i) wtmp_[i] = cache.minus[s][i] * phi[i];
    std::fill(out.begin(), out.end(), cxd(0.0));
    apply_w(ts, wtmp_.data(), out.data());
    for (size_t i = 0; i < n; ++i) out[i] = cxd(0.0, -1.0) * cache.plus[s][i] * out[i];
  }

  // One Cash-Karp step of size h from state `from` at time t0; writes the
  // propagated state into `out` and returns the embedded error estimate.
  double ck_step(const std::vector<cxd>& from, double t0, double h,
                 std::vector<cxd>& out, const PhaseCache& cache) {
    const size_t n = from.size();
    for (int s = 0; s < 6; ++s) {
      if (s == 0) {
        stage_derivative(0, t0, h, from, k_[0], cache);
        continue;
      }
      for (size_t i = 0; i < n; ++i) {
        cxd acc = from[i];
        for (int j = 0; j < s; ++j) acc += h * kA[s][j] * k_[j][i];
        tmp_[i] = acc;
      }
      stage_derivative(s, t0, h, tmp_, k_[s], cache);
    }
    double err2 = 0.0, ref2 = 0.0;
    for (size_t i = 0; i < n; ++i) {
      cxd phi5 = from[i], ediff = 0.0;
      for (int s = 0; s < 6; ++s) {
        phi5 += h * kB5[s] * k_[s][i];
        ediff += h * (kB5[s] - kB4[s]) * k_[s][i];
      }
      // out = exp(-iDh) phi5; c_4 == 1 so stage-4 phases give exp(-iDh)
      out[i] = cache.minus[4][i] * phi5;
      err2 += std::norm(ediff);
      ref2 += std::norm(from[i]);
    }
    return std::sqrt(err2 / std::max(ref2, 1e-300));
  }

  // Propagate `from` by s <= h_ref using a dedicated cache (jump bisection).
  void propagate_once(const std::vector<cxd>& from, double t0, double s,
                      std::vector<cxd>& out) {
    probe_cache_.rebuild(ops_.diag, s);
    ck_step(from, t0, s, out, probe_cache_);
  }

  // --- jumps ----------------------------------------------------------------
  struct ChannelAmp {
    double weight;
    std::vector<cxd> state;
  };

  void do_jump(double t_jump, std::vector<cxd>& state_at_jump);
  void process_click(double t_jump, char label);

  // --- slot management -------------------------------------------------------
  int sample_slot_level(int slot);
  void project_slot(int slot, int level);
  void relabel_slot(int slot, int from_level, int to_level);
  int initial_atom_level();
  void admit_atom(int slot, double t);
  void remove_atom(int slot);

  // --- observables -----------------------------------------------------------
  Eigen::MatrixXcd reduced_atom() const;
  void sample_observables(TrajectoryResult& out);

  void build_initial_state(double t0);

  const SystemOperators& ops_;
  const EngineConfig& cfg_;
  double rate_;
  RngStream rng_;
  uint32_t index_;

  std::vector<cxd> psi_;
  double t_ = 0.0;
  double u_ = 1.0;
  double h_next_ = 0.0;
  double dt_max_ = 0.0;

  DriveSchedule schedule_;
  double seg_t0_ = 0.0;
  cxd seg_alpha0_ = 0.0, seg_target_ = 0.0;

  std::vector<std::optional<BeamTransit>> slots_;
  long queue_ = 0;
  double next_arrival_ = std::numeric_limits<double>::infinity();

  PhaseCache cache_, probe_cache_;
  std::vector<cxd> k_[6], tmp_, wtmp_, scratch_, step_out_, probe_out_;
  TrajectoryResult* result_ = nullptr;
};

int Trajectory::initial_atom_level() {
  const SchemeData& sc = ops_.model.scheme;
  switch (cfg_.atom_init) {
    case AtomInit::Uniform:
      return static_cast<int>(rng_.uniform() * sc.n_ground) % sc.n_ground;
    case AtomInit::GroundCoherence:
      // handled in build_initial_state; beam-injected atoms fall back to m=0
      return ops_.parked_level;
    case AtomInit::ExcitedMinus: {
      int i = sc.excited_index(-1);
      if (i < 0) i = sc.excited_offset();
      return i;
    }
    case AtomInit::PumpedM0:
    default: {
      const int i = sc.ground_index(0);
      return i >= 0 ? i : 0;
    }
  }
}

void Trajectory::build_initial_state(double t0) {
  const CompositeSpace& sp = ops_.space;
  const SchemeData& sc = ops_.model.scheme;

  // per-factor amplitude vectors
  std::vector<std::vector<cxd>> atom_amp(sp.n_slots,
                                         std::vector<cxd>(sp.atom_dim, 0.0));
  for (int s = 0; s < sp.n_slots; ++s) {
    const bool active = cfg_.beam.enabled ? slots_[s].has_value() : (s == 0);
    if (!active) {
      atom_amp[s][ops_.parked_level] = 1.0;
    } else if (cfg_.atom_init == AtomInit::GroundCoherence) {
      const int gm = sc.ground_index(-1), gp = sc.ground_index(+1);
      if (gm < 0 || gp < 0)
        throw std::runtime_error("scheme lacks m=+-1 ground levels for coherence init");
      atom_amp[s][gm] = 1.0 / std::sqrt(2.0);
      atom_amp[s][gp] = 1.0 / std::sqrt(2.0);
    } else {
      atom_amp[s][initial_atom_level()] = 1.0;
    }
  }

  std::vector<cxd> v_amp(sp.dim_v(), 0.0);
  if (cfg_.cavity_init == CavityInit::OneV) {
    v_amp[std::min(1, sp.fock_v)] = 1.0;
  } else if (!ops_.model.displaced && cfg_.cavity_init == CavityInit::Steady &&
      ops_.model.drive_e != 0.0) {
    const cxd alpha =
        ops_.model.drive_e / cxd(ops_.model.kappa, ops_.model.delta_c);
    double n2 = 0.0;
    cxd amp = std::exp(-0.5 * std::norm(alpha));
    for (int n = 0; n < sp.dim_v(); ++n) {
      v_amp[n] = amp;
      n2 += std::norm(amp);
      amp *= alpha / std::sqrt(static_cast<double>(n + 1));
    }
    const double inv = 1.0 / std::sqrt(n2);
    for (auto& a : v_amp) a *= inv;
  } else {
    v_amp[0] = 1.0;
  }

  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    cxd a = v_amp[sp.nv(idx)];
    if (sp.nh(idx) != 0) a = 0.0;
    for (int s = 0; s < sp.n_slots && a != cxd(0.0); ++s)
      a *= atom_amp[s][sp.atom_level(idx, s)];
    psi_[idx] = a;
  }

  // classical field segment
  if (ops_.model.displaced) {
    seg_t0_ = t0;
    seg_alpha0_ = (cfg_.cavity_init == CavityInit::Steady)
                      ? ops_.model.drive_e * drive_multiplier(t0) /
                            cxd(ops_.model.kappa, ops_.model.delta_c)
                      : cxd(0.0);
    seg_target_ = ops_.model.drive_e * drive_multiplier(t0) /
                  cxd(ops_.model.kappa, ops_.model.delta_c);
  }
}

int Trajectory::sample_slot_level(int slot) {
  const CompositeSpace& sp = ops_.space;
  const int64_t stride = sp.stride_atom(slot);
  std::vector<double> prob(sp.atom_dim, 0.0);
  for (int64_t idx = 0; idx < sp.dim(); ++idx)
    prob[(idx / stride) % sp.atom_dim] += std::norm(psi_[idx]);
  double total = 0.0;
  for (double p : prob) total += p;
  double x = rng_.uniform() * total;
  for (int l = 0; l < sp.atom_dim; ++l) {
    x -= prob[l];
    if (x <= 0.0) return l;
  }
  return sp.atom_dim - 1;
}

void Trajectory::project_slot(int slot, int level) {
  const CompositeSpace& sp = ops_.space;
  const int64_t stride = sp.stride_atom(slot);
  double n2 = 0.0;
  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    if ((idx / stride) % sp.atom_dim != level)
      psi_[idx] = 0.0;
    else
      n2 += std::norm(psi_[idx]);
  }
  const double inv = 1.0 / std::sqrt(n2);
  for (auto& a : psi_) a *= inv;
}

void Trajectory::relabel_slot(int slot, int from_level, int to_level) {
  if (from_level == to_level) return;
  const CompositeSpace& sp = ops_.space;
  const int64_t stride = sp.stride_atom(slot);
  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    if ((idx / stride) % sp.atom_dim != from_level) continue;
    const int64_t target = idx + (to_level - from_level) * stride;
    psi_[target] = psi_[idx];
    psi_[idx] = 0.0;
  }
}

void Trajectory::admit_atom(int slot, double t) {
  BeamTransit tr = sample_transit(cfg_.beam, rng_);
  tr.arrival_us = t;
  relabel_slot(slot, ops_.parked_level, initial_atom_level());
  slots_[slot] = tr;
}

void Trajectory::remove_atom(int slot) {
  const int level = sample_slot_level(slot);
  project_slot(slot, level);
  relabel_slot(slot, level, ops_.parked_level);
  slots_[slot] = std::nullopt;
  u_ = rng_.uniform_pos();  // state was renormalized by the projection
}

Eigen::MatrixXcd Trajectory::reduced_atom() const {
  const CompositeSpace& sp = ops_.space;
  const int d = sp.atom_dim;
  const int64_t stride = sp.stride_atom(0);  // slot 0 is the slowest factor
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(d, d);
  for (int a = 0; a < d; ++a)
    for (int b = 0; b <= a; ++b) {
      cxd acc = 0.0;
      for (int64_t o = 0; o < stride; ++o)
        acc += psi_[a * stride + o] * std::conj(psi_[b * stride + o]);
      rho(a, b) = acc;
      if (a != b) rho(b, a) = std::conj(acc);
    }
  const double tr = rho.trace().real();
  if (tr > 0.0) rho /= tr;
  return rho;
}

void Trajectory::sample_observables(TrajectoryResult& out) {
  const CompositeSpace& sp = ops_.space;
  const SchemeData& sc = ops_.model.scheme;
  const Eigen::MatrixXcd rho = reduced_atom();
  double pg = 0.0, pe = 0.0;
  for (int l = 0; l < sp.atom_dim; ++l) {
    const double p = rho(l, l).real();
    (sc.sublevels[l].manifold == Manifold::Ground ? pg : pe) += p;
  }
  out.pop_ground.push_back(pg);
  out.pop_excited.push_back(pe);

  const int gm = sc.ground_index(-1), gp = sc.ground_index(+1);
  out.coherence.push_back((gm >= 0 && gp >= 0) ? cxd(rho(gp, gm)) : cxd(0.0));
  out.pop_gplus.push_back(gp >= 0 ? rho(gp, gp).real() : 0.0);

  const double n2 = norm2(psi_);
  double nv = 0.0, nh = 0.0;
  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    const double p = std::norm(psi_[idx]) / n2;
    nv += p * sp.nv(idx);
    nh += p * sp.nh(idx);
  }
  if (ops_.model.displaced) {
    // physical V photon number: |alpha|^2 + 2 Re(alpha* <a>) + <a^dag a>
    const cxd alpha = alpha_at(t_);
    std::fill(scratch_.begin(), scratch_.end(), cxd(0.0));
    ops_.a_v.apply(psi_.data(), scratch_.data(), 1.0);
    cxd a_exp = 0.0;
    for (int64_t i = 0; i < sp.dim(); ++i)
      a_exp += std::conj(psi_[i]) * scratch_[i];
    a_exp /= n2;
    nv += std::norm(alpha) + 2.0 * std::real(std::conj(alpha) * a_exp);
  }
  out.n_v.push_back(nv);
  out.n_h.push_back(nh);
}

void Trajectory::process_click(double t_jump, char label) {
  if (t_jump >= 0.0 && t_jump <= cfg_.duration_us)
    result_->clicks.push_back({t_jump, label, index_});
  if (label == cfg_.herald_channel && cfg_.feedback.enabled) {
    const size_t before = schedule_.windows.size();
    const double prev_end =
        before ? schedule_.windows.back().end_us : -1.0;
    schedule_.on_herald(t_jump, cfg_.feedback);
    const bool changed = schedule_.windows.size() != before ||
                         (before && schedule_.windows.back().end_us != prev_end);
    if (changed && ops_.model.displaced &&
        schedule_.windows.back().start_us <= t_jump)
      reset_drive_segment(t_jump);
  }
}

void Trajectory::do_jump(double t_jump, std::vector<cxd>& state_at_jump) {
  const size_t n = psi_.size();
  const cxd alpha = alpha_at(t_jump);
  double total = 0.0;
  std::vector<double> weights(ops_.channels.size(), 0.0);
  for (size_t c = 0; c < ops_.channels.size(); ++c) {
    const JumpChannel& ch = ops_.channels[c];
    std::fill(scratch_.begin(), scratch_.end(), cxd(0.0));
    if (!ch.op.empty()) ch.op.apply(state_at_jump.data(), scratch_.data(), 1.0);
    if (ch.mix != cxd(0.0)) {
      const cxd beta = ch.mix * alpha;
      for (size_t i = 0; i < n; ++i) scratch_[i] += beta * state_at_jump[i];
    }
    weights[c] = ch.rate_scale * norm2(scratch_);
    total += weights[c];
  }
  if (total <= 0.0) {
    // no channel can fire; numerically the norm should not have decayed
    throw std::runtime_error("jump requested with zero total channel rate");
  }
  double x = rng_.uniform() * total;
  size_t sel = 0;
  for (; sel + 1 < weights.size(); ++sel) {
    x -= weights[sel];
    if (x <= 0.0) break;
  }
  const JumpChannel& ch = ops_.channels[sel];
  std::fill(scratch_.begin(), scratch_.end(), cxd(0.0));
  if (!ch.op.empty()) ch.op.apply(state_at_jump.data(), scratch_.data(), 1.0);
  if (ch.mix != cxd(0.0)) {
    const cxd beta = ch.mix * alpha;
    for (size_t i = 0; i < n; ++i) scratch_[i] += beta * state_at_jump[i];
  }
  const double nn = norm2(scratch_);
  if (nn <= 0.0) throw std::runtime_error("jump produced a zero-norm state");
  const double inv = 1.0 / std::sqrt(nn);
  for (size_t i = 0; i < n; ++i) psi_[i] = scratch_[i] * inv;
  t_ = t_jump;
  u_ = rng_.uniform_pos();
  if (ch.detected) {
    process_click(t_jump, ch.label);
  } else if (cfg_.record_all_jumps && t_jump >= 0.0 &&
             t_jump <= cfg_.duration_us) {
    result_->clicks.push_back(
        {t_jump, ch.kind == JumpChannel::Kind::Side ? 's' : 'l', index_});
  }
}

TrajectoryResult Trajectory::run() {
  TrajectoryResult out;
  result_ = &out;
  const double t0 = -cfg_.warmup_us;
  t_ = t0;

  // beam initialisation
  if (cfg_.beam.enabled) {
    const double window = 6.0 * cfg_.beam.waist_um / cfg_.beam.v_mps;
    const bool saturated =
        cfg_.stationary_start && rate_ * window >= 2.0 * slots_.size();
    if (saturated) {
      for (size_t s = 0; s < slots_.size(); ++s) {
        BeamTransit tr = sample_transit(cfg_.beam, rng_);
        tr.arrival_us = t0 - rng_.uniform() * window;
        slots_[s] = tr;
      }
    }
    next_arrival_ = t0 + rng_.exponential(rate_);
  }

  build_initial_state(t0);
  u_ = rng_.uniform_pos();
  h_next_ = dt_max_;

  // sample grids
  size_t sample_idx = 0, checkpoint_idx = 0;
  std::vector<double> sample_times;
  if (cfg_.sample_dt_us > 0.0)
    for (double ts = 0.0; ts <= cfg_.duration_us + 1e-9; ts += cfg_.sample_dt_us)
      sample_times.push_back(ts);

  const double t_end = cfg_.duration_us;
  int guard = 0;
  const int max_iterations = 500000000;

  while (t_ < t_end - 1e-12) {
    if (++guard > max_iterations)
      throw std::runtime_error("trajectory exceeded iteration budget");

    // next hard event
    double t_event = t_end;
    if (sample_idx < sample_times.size())
      t_event = std::min(t_event, sample_times[sample_idx]);
    if (checkpoint_idx < cfg_.checkpoints_us.size())
      t_event = std::min(t_event, cfg_.checkpoints_us[checkpoint_idx]);
    if (cfg_.beam.enabled) {
      t_event = std::min(t_event, next_arrival_);
      for (const auto& tr : slots_)
        if (tr)
          t_event =
              std::min(t_event, tr->arrival_us + tr->window_us(cfg_.beam.waist_um));
    }
    t_event = std::min(t_event, next_drive_edge(t_));

    if (t_event <= t_ + 1e-12) {
      // process events at the current time
      if (sample_idx < sample_times.size() &&
          sample_times[sample_idx] <= t_ + 1e-12) {
        sample_observables(out);
        ++sample_idx;
        continue;
      }
      if (checkpoint_idx < cfg_.checkpoints_us.size() &&
          cfg_.checkpoints_us[checkpoint_idx] <= t_ + 1e-12) {
        out.rho_checkpoints.push_back(reduced_atom());
        ++checkpoint_idx;
        continue;
      }
      if (cfg_.beam.enabled) {
        bool handled = false;
        for (size_t s = 0; s < slots_.size(); ++s) {
          if (slots_[s] && slots_[s]->arrival_us +
                                   slots_[s]->window_us(cfg_.beam.waist_um) <=
                               t_ + 1e-12) {
            remove_atom(static_cast<int>(s));
            if (queue_ > 0) {
              --queue_;
              admit_atom(static_cast<int>(s), t_);
            }
            handled = true;
            break;
          }
        }
        if (!handled && next_arrival_ <= t_ + 1e-12) {
          int free_slot = -1;
          for (size_t s = 0; s < slots_.size(); ++s)
            if (!slots_[s]) {
              free_slot = static_cast<int>(s);
              break;
            }
          if (free_slot >= 0)
            admit_atom(free_slot, t_);
          else if (queue_ < 4096)
            ++queue_;
          next_arrival_ = t_ + rng_.exponential(rate_);
          handled = true;
        }
        if (handled) continue;
      }
      // drive edge: refresh the classical-field segment
      if (ops_.model.displaced) reset_drive_segment(t_);
      // nudge past the edge to avoid re-processing
      t_ = std::nextafter(t_event, t_end);
      continue;
    }

    // integrate towards the event
    double h = std::min({h_next_, dt_max_, t_event - t_});
    bool accepted = false;
    const double n2_before = norm2(psi_);
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      if (cache_.h != h) cache_.rebuild(ops_.diag, h);
      const double err = ck_step(psi_, t_, h, step_out_, cache_);
      const double n2_after = norm2(step_out_);
      if (err > cfg_.dt_tol) {
        h *= std::max(0.2, 0.9 * std::pow(cfg_.dt_tol / std::max(err, 1e-300), 0.2));
        continue;
      }
      if (n2_after > n2_before * (1.0 + 1e-9)) {
        h *= 0.5;  // squared norm must not grow between jumps
        continue;
      }
      accepted = true;
      const double grow =
          0.9 * std::pow(cfg_.dt_tol / std::max(err, 1e-300), 0.2);
      h_next_ = std::min(h * std::min(5.0, std::max(grow, 0.2)), dt_max_);

      if (n2_after < u_) {
        // locate the jump by bisection on [0, h] to the configured resolution
        double lo = 0.0, hi = h;
        while (hi - lo > cfg_.jump_resolution_us) {
          const double mid = 0.5 * (lo + hi);
          propagate_once(psi_, t_, mid, probe_out_);
          (norm2(probe_out_) >= u_ ? lo : hi) = mid;
        }
        propagate_once(psi_, t_, hi, probe_out_);
        const double tj = t_ + hi;
        std::swap(psi_, probe_out_);
        do_jump(tj, psi_);  // psi_ holds the pre-jump state here
      } else {
        std::swap(psi_, step_out_);
        t_ += h;
        if (t_ > t_event - 1e-12) t_ = t_event;
      }
    }
    if (!accepted)
      throw std::runtime_error("step size underflow in trajectory integrator");
  }

  // flush trailing samples exactly at t_end
  while (sample_idx < sample_times.size() &&
         sample_times[sample_idx] <= t_end + 1e-9) {
    sample_observables(out);
    ++sample_idx;
  }
  while (checkpoint_idx < cfg_.checkpoints_us.size() &&
         cfg_.checkpoints_us[checkpoint_idx] <= t_end + 1e-9) {
    out.rho_checkpoints.push_back(reduced_atom());
    ++checkpoint_idx;
  }

  out.schedule = schedule_;
  result_ = nullptr;
  return out;
}

}  // namespace

TrajectoryResult run_trajectory(const SystemOperators& ops,
                                const EngineConfig& cfg, double beam_rate,
                                uint32_t index) {
  Trajectory tr(ops, cfg, beam_rate, index);
  return tr.run();
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("QBEAT_WORKERS")) {
    const int w = std::atoi(env);
    if (w > 0) return w;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw > 0 ? static_cast<int>(hw) : 1;
}

double EnsembleResult::coh_re_stderr(size_t k) const {
  const double mean = sum_coh[k].real() / count;
  const double var =
      std::max(0.0, sum_coh_re2[k] / count - mean * mean) / std::max(1, count - 1);
  return std::sqrt(var);
}

EnsembleResult run_ensemble(const SystemModel& model, const EngineConfig& cfg) {
  const SystemOperators ops = SystemOperators::build(model);
  double rate = 0.0;
  if (cfg.beam.enabled)
    rate = cfg.beam.rate_per_us > 0.0 ? cfg.beam.rate_per_us
                                      : calibrate_flux(cfg.beam.n_eff, cfg.beam);

  EnsembleResult res;
  res.beam_rate_per_us = rate;
  res.clicks.duration_us = cfg.duration_us;
  res.clicks.n_trajectories = cfg.trajectories;
  res.checkpoints_us = cfg.checkpoints_us;
  if (cfg.sample_dt_us > 0.0)
    for (double ts = 0.0; ts <= cfg.duration_us + 1e-9; ts += cfg.sample_dt_us)
      res.grid_us.push_back(ts);
  const size_t ng = res.grid_us.size();
  res.sum_pg.assign(ng, 0.0);
  res.sum_pe.assign(ng, 0.0);
  res.sum_nv.assign(ng, 0.0);
  res.sum_nh.assign(ng, 0.0);
  res.sum_coh.assign(ng, cxd(0.0));
  res.sum_coh_re2.assign(ng, 0.0);
  res.sum_coh_im2.assign(ng, 0.0);
  const int64_t ad = model.scheme.dim();
  res.rho_sum.assign(cfg.checkpoints_us.size(),
                     Eigen::MatrixXcd::Zero(ad, ad));

  const int workers = resolve_workers(cfg.workers);
  const int batch = std::max(workers * 16, 32);

  std::vector<TrajectoryResult> results(batch);
  for (int base = 0; base < cfg.trajectories; base += batch) {
    const int count = std::min(batch, cfg.trajectories - base);
    std::atomic<int> cursor{0};
    auto work = [&]() {
      for (;;) {
        const int i = cursor.fetch_add(1);
        if (i >= count) break;
        results[i] = run_trajectory(ops, cfg, rate,
                                    static_cast<uint32_t>(base + i));
      }
    };
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    for (auto& th : pool) th.join();

    // merge strictly in trajectory-index order
    for (int i = 0; i < count; ++i) {
      TrajectoryResult& r = results[i];
      res.clicks.events.insert(res.clicks.events.end(), r.clicks.begin(),
                               r.clicks.end());
      for (size_t k = 0; k < ng && k < r.pop_ground.size(); ++k) {
        res.sum_pg[k] += r.pop_ground[k];
        res.sum_pe[k] += r.pop_excited[k];
        res.sum_nv[k] += r.n_v[k];
        res.sum_nh[k] += r.n_h[k];
        res.sum_coh[k] += r.coherence[k];
        res.sum_coh_re2[k] += r.coherence[k].real() * r.coherence[k].real();
        res.sum_coh_im2[k] += r.coherence[k].imag() * r.coherence[k].imag();
      }
      for (size_t k = 0; k < res.rho_sum.size() && k < r.rho_checkpoints.size();
           ++k)
        res.rho_sum[k] += r.rho_checkpoints[k];
      ++res.count;
      r = TrajectoryResult{};
    }
  }
  return res;
}

}  // namespace qbeat

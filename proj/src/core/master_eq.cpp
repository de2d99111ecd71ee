#include "master_eq.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <stdexcept>

namespace qbeat {

MasterEquation::MasterEquation(const SystemOperators& ops,
                               std::vector<double> g_slots,
                               const DriveSchedule* schedule)
    : ops_(ops), g_slots_(std::move(g_slots)), schedule_(schedule) {
  if (ops_.model.displaced)
    throw std::invalid_argument("master-equation oracle requires the undisplaced frame");
  if (static_cast<int>(g_slots_.size()) != ops_.space.n_slots)
    throw std::invalid_argument("one constant coupling per atom slot required");

  const int64_t n = ops_.space.dim();
  h_static_ = Eigen::MatrixXcd::Zero(n, n);
  for (int64_t i = 0; i < n; ++i) h_static_(i, i) = ops_.diag[i];
  drive_block_ = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& b : ops_.blocks) {
    switch (b.kind) {
      case BlockKind::CouplingV:
      case BlockKind::CouplingH: {
        const double w = g_slots_.at(b.slot);
        if (w != 0.0) h_static_ += w * b.op.dense();
        break;
      }
      case BlockKind::Drive:
        drive_block_ = kImag * b.op.dense();
        break;
      default:
        throw std::invalid_argument("unexpected displaced-frame block in oracle");
    }
  }
  for (const auto& ch : ops_.channels)
    c_ops_.push_back(std::sqrt(ch.rate_scale) * ch.op.dense());
}

Eigen::MatrixXcd MasterEquation::h_eff_at(double t) const {
  const double mult = schedule_ ? schedule_->multiplier(t) : 1.0;
  return h_static_ + (ops_.model.drive_e * mult) * drive_block_;
}

Eigen::MatrixXcd MasterEquation::derivative(const Eigen::MatrixXcd& rho,
                                            double t) const {
  const Eigen::MatrixXcd h = h_eff_at(t);
  Eigen::MatrixXcd d = -kImag * (h * rho - rho * h.adjoint());
  for (const auto& c : c_ops_) d += c * rho * c.adjoint();
  return d;
}

double MasterEquation::default_dt() const {
  const SystemModel& m = ops_.model;
  const double scale = std::max(
      {m.kappa, m.gamma, m.g_max, std::abs(m.drive_e), 1.0});
  return 0.04 / scale;
}

Eigen::MatrixXcd MasterEquation::evolve(Eigen::MatrixXcd rho, double t0,
                                        double t1, double dt_us) const {
  double dt = dt_us > 0.0 ? dt_us : default_dt();
  double t = t0;
  while (t < t1 - 1e-12) {
    double h = std::min(dt, t1 - t);
    // keep drive edges on step boundaries
    if (schedule_) {
      for (const auto& w : schedule_->windows) {
        if (w.start_us > t + 1e-12 && w.start_us < t + h) h = w.start_us - t;
        if (w.end_us > t + 1e-12 && w.end_us < t + h) h = w.end_us - t;
      }
    }
    const Eigen::MatrixXcd k1 = derivative(rho, t);
    const Eigen::MatrixXcd k2 = derivative(rho + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::MatrixXcd k3 = derivative(rho + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::MatrixXcd k4 = derivative(rho + h * k3, t + h);
    rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    t += h;
  }
  return rho;
}

Eigen::MatrixXcd MasterEquation::steady_state(const Eigen::MatrixXcd& rho0,
                                              double tol, double t_max_us) const {
  Eigen::MatrixXcd rho = rho0;
  const double chunk = 4.0 / std::min(ops_.model.kappa, ops_.model.gamma);
  double t = 0.0;
  while (t < t_max_us) {
    rho = evolve(rho, t, t + chunk);
    t += chunk;
    const double change = derivative(rho, t).norm();
    if (change < tol) break;
  }
  return rho;
}

double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(a - b);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

Eigen::MatrixXcd reduced_atom_rho(const Eigen::MatrixXcd& rho,
                                  const CompositeSpace& space, int slot) {
  const int d = space.atom_dim;
  const int64_t n = space.dim();
  const int64_t stride = space.stride_atom(slot);
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(d, d);
  for (int64_t i = 0; i < n; ++i) {
    const int a = static_cast<int>((i / stride) % d);
    for (int b = 0; b < d; ++b) {
      const int64_t j = i + (b - a) * stride;
      out(a, b) += rho(i, j);
    }
  }
  return out;
}

std::vector<cxd> product_state(const SystemOperators& ops, AtomInit atom_init,
                               CavityInit cavity_init) {
  const CompositeSpace& sp = ops.space;
  const SchemeData& sc = ops.model.scheme;
  std::vector<cxd> atom_amp(sp.atom_dim, 0.0);
  switch (atom_init) {
    case AtomInit::GroundCoherence: {
      const int gm = sc.ground_index(-1), gp = sc.ground_index(+1);
      if (gm < 0 || gp < 0)
        throw std::invalid_argument("scheme lacks m=+-1 ground levels");
      atom_amp[gm] = atom_amp[gp] = 1.0 / std::sqrt(2.0);
      break;
    }
    case AtomInit::Uniform:
      throw std::invalid_argument("product_state: uniform init is sampled, not pure");
    case AtomInit::ExcitedMinus: {
      int i = sc.excited_index(-1);
      if (i < 0) i = sc.excited_offset();
      atom_amp[i] = 1.0;
      break;
    }
    case AtomInit::PumpedM0:
    default: {
      int i = sc.ground_index(0);
      if (i < 0) i = 0;
      atom_amp[i] = 1.0;
    }
  }

  std::vector<cxd> v_amp(sp.dim_v(), 0.0);
  if (cavity_init == CavityInit::OneV) {
    v_amp[std::min(1, sp.fock_v)] = 1.0;
  } else if (cavity_init == CavityInit::Steady && ops.model.drive_e != 0.0 &&
             !ops.model.displaced) {
    const cxd alpha = ops.model.drive_e / cxd(ops.model.kappa, ops.model.delta_c);
    cxd amp = std::exp(-0.5 * std::norm(alpha));
    double n2 = 0.0;
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

  std::vector<cxd> psi(sp.dim(), 0.0);
  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    if (sp.nh(idx) != 0) continue;
    cxd a = v_amp[sp.nv(idx)];
    for (int s = 0; s < sp.n_slots && a != cxd(0.0); ++s) {
      const int lvl = sp.atom_level(idx, s);
      a *= (s == 0) ? atom_amp[lvl]
                    : cxd(lvl == ops.parked_level ? 1.0 : 0.0);
    }
    psi[idx] = a;
  }
  return psi;
}

}  // namespace qbeat

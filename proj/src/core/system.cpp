#include "system.hpp"

#include <cmath>
#include <stdexcept>

namespace qbeat {

namespace {

SmallOp lowering_small(const SchemeData& scheme, int q) {
  SmallOp op;
  for (const auto& t : scheme.transitions)
    if (t.q == q) op.entries.push_back({t.gi, t.ei, t.coeff});
  return op;
}

// D_H = (D_{-1} - D_{+1}) / sqrt(2); sign convention fixed here, observables
// are insensitive to the overall sign.
SmallOp dh_small(const SchemeData& scheme) {
  const double inv = 1.0 / std::sqrt(2.0);
  return lowering_small(scheme, -1).scaled(inv).plus(
      lowering_small(scheme, +1).scaled(-inv));
}

}  // namespace

SystemOperators SystemOperators::build(const SystemModel& m) {
  SystemOperators ops;
  ops.model = m;
  ops.space = m.space();
  ops.basis = homodyne_basis(m.hwp_deg);
  const CompositeSpace& sp = ops.space;

  if (sp.dim() > m.dim_budget)
    throw std::runtime_error("composite dimension " + std::to_string(sp.dim()) +
                             " exceeds budget " + std::to_string(m.dim_budget));

  // parked level: ground m=0 when present, otherwise the first ground level
  ops.parked_level = m.scheme.ground_index(0);
  if (ops.parked_level < 0) ops.parked_level = 0;

  // static complex diagonal
  ops.diag.resize(sp.dim());
  for (int64_t idx = 0; idx < sp.dim(); ++idx) {
    double herm = 0.0;
    int excited = 0;
    for (int s = 0; s < sp.n_slots; ++s) {
      const Sublevel& lvl = m.scheme.sublevels[sp.atom_level(idx, s)];
      herm += lvl.energy;
      if (lvl.manifold == Manifold::Excited) {
        herm += m.delta_a;
        ++excited;
      }
    }
    const int n_tot = sp.nv(idx) + sp.nh(idx);
    herm += m.delta_c * n_tot;
    const double decay = 2.0 * m.kappa * n_tot + m.gamma * excited;
    ops.diag[idx] = cxd(herm, -0.5 * decay);
  }

  const SmallOp av = SmallOp::annihilate(sp.fock_v);
  const SmallOp av_dag = av.dagger();
  const SmallOp ah = sp.fock_h >= 0 ? SmallOp::annihilate(sp.fock_h) : SmallOp{};
  const SmallOp ah_dag = ah.dagger();

  ops.a_v = build_product(sp, {}, &av, nullptr);
  if (sp.fock_h >= 0) ops.a_h = build_product(sp, {}, nullptr, &ah);

  const SmallOp d0 = lowering_small(m.scheme, 0);
  const SmallOp d0_dag = d0.dagger();
  const SmallOp dh = dh_small(m.scheme);
  const SmallOp dh_dag = dh.dagger();
  const bool has_sigma = !dh.entries.empty() && sp.fock_h >= 0;

  for (int s = 0; s < sp.n_slots; ++s) {
    std::vector<const SmallOp*> at(sp.n_slots, nullptr);

    at[s] = &d0;
    ops.d0.push_back(build_product(sp, at, nullptr, nullptr));

    if (!d0.entries.empty()) {
      at[s] = &d0;
      SparseOp lower = build_product(sp, at, &av_dag, nullptr);
      at[s] = &d0_dag;
      SparseOp raise = build_product(sp, at, &av, nullptr);
      ops.blocks.push_back({BlockKind::CouplingV, s, -1, build_sum(lower, raise)});
    }
    if (has_sigma) {
      at[s] = &dh;
      SparseOp lower = build_product(sp, at, nullptr, &ah_dag);
      at[s] = &dh_dag;
      SparseOp raise = build_product(sp, at, nullptr, &ah);
      ops.blocks.push_back({BlockKind::CouplingH, s, -1, build_sum(lower, raise)});
    }
    if (m.displaced && !d0.entries.empty()) {
      at[s] = &d0;
      ops.blocks.push_back({BlockKind::RabiLower, s, -1,
                            build_product(sp, at, nullptr, nullptr)});
      at[s] = &d0_dag;
      ops.blocks.push_back({BlockKind::RabiRaise, s, -1,
                            build_product(sp, at, nullptr, nullptr)});
    }
  }

  if (!m.displaced) {
    const SmallOp av_neg = av.scaled(-1.0);
    SparseOp up = build_product(sp, {}, &av_dag, nullptr);
    SparseOp down = build_product(sp, {}, &av_neg, nullptr);
    ops.blocks.push_back({BlockKind::Drive, -1, -1, build_sum(up, down)});
  }

  // detector operators d1, d2 in the (a_H, a_V) mixing convention
  const double c2 = ops.basis.cos2t();
  const double s2 = ops.basis.sin2t();
  auto port_op = [&](double wh, double wv) {
    SparseOp op;
    if (sp.fock_h >= 0 && wh != 0.0) {
      const SmallOp sc = ah.scaled(wh);
      op = build_product(sp, {}, nullptr, &sc);
    }
    if (wv != 0.0) {
      const SmallOp sc = av.scaled(wv);
      op = build_sum(op, build_product(sp, {}, &sc, nullptr));
    }
    return op;
  };
  const SparseOp d1 = port_op(c2, s2);
  const SparseOp d2 = port_op(-s2, c2);
  const cxd mix1 = m.displaced ? cxd(s2) : cxd(0.0);
  const cxd mix2 = m.displaced ? cxd(c2) : cxd(0.0);

  auto add_port = [&](const SparseOp& d, char label, double eta, cxd mix,
                      int detector) {
    if (eta > 0.0 && (!d.empty() || (m.displaced && mix != cxd(0.0)))) {
      JumpChannel ch;
      ch.kind = JumpChannel::Kind::Detector;
      ch.detected = true;
      ch.label = label;
      ch.rate_scale = 2.0 * m.kappa * eta;
      ch.mix = mix;
      ch.op = d;
      ops.channels.push_back(std::move(ch));
      if (m.displaced && mix != cxd(0.0)) {
        // LO feed into the detected port: -i 2 kappa eta beta(t) d^dag and a
        // scalar norm-decay term; together with the affine jump operator this
        // reproduces the physical (undisplaced) master equation.
        ops.blocks.push_back({BlockKind::Source, -1, detector, d.dagger()});
      }
    }
    if (eta < 1.0 && !d.empty()) {
      JumpChannel ch;
      ch.kind = JumpChannel::Kind::Loss;
      ch.rate_scale = 2.0 * m.kappa * (1.0 - eta);
      ch.op = d;
      ops.channels.push_back(std::move(ch));
    }
  };
  add_port(d1, 'H', m.eta1, mix1, 0);
  add_port(d2, 'V', m.eta2, mix2, 1);

  if (m.displaced && (m.eta1 > 0.0 || m.eta2 > 0.0))
    ops.blocks.push_back({BlockKind::ScalarNorm, -1, -1, SparseOp{}});

  // side emission: one channel per atom slot and polarization
  for (int s = 0; s < sp.n_slots; ++s) {
    for (int q = -1; q <= 1; ++q) {
      const SmallOp dq = lowering_small(m.scheme, q);
      if (dq.entries.empty()) continue;
      std::vector<const SmallOp*> at(sp.n_slots, nullptr);
      at[s] = &dq;
      JumpChannel ch;
      ch.kind = JumpChannel::Kind::Side;
      ch.rate_scale = m.gamma;
      ch.slot = s;
      ch.q = q;
      ch.op = build_product(sp, at, nullptr, nullptr);
      ops.channels.push_back(std::move(ch));
    }
  }

  return ops;
}

Eigen::MatrixXcd SystemOperators::h_eff_dense(const std::vector<double>& g_slots,
                                              double drive_e, cxd alpha) const {
  const int64_t n = space.dim();
  Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(n, n);
  for (int64_t i = 0; i < n; ++i) h(i, i) = diag[i];
  const double eta[2] = {model.eta1, model.eta2};
  const cxd mixes[2] = {cxd(basis.sin2t()), cxd(basis.cos2t())};
  for (const auto& b : blocks) {
    cxd w = 0.0;
    switch (b.kind) {
      case BlockKind::CouplingV:
      case BlockKind::CouplingH:
        w = g_slots.at(b.slot);
        break;
      case BlockKind::RabiLower:
        w = g_slots.at(b.slot) * std::conj(alpha);
        break;
      case BlockKind::RabiRaise:
        w = g_slots.at(b.slot) * alpha;
        break;
      case BlockKind::Drive:
        w = kImag * drive_e;
        break;
      case BlockKind::Source:
        w = -kImag * 2.0 * model.kappa * eta[b.detector] * mixes[b.detector] * alpha;
        break;
      case BlockKind::ScalarNorm: {
        double r = 0.0;
        for (int k = 0; k < 2; ++k)
          r += 2.0 * model.kappa * eta[k] * std::norm(mixes[k] * alpha);
        for (int64_t i = 0; i < n; ++i) h(i, i) += cxd(0.0, -0.5 * r);
        continue;
      }
    }
    if (w == cxd(0.0)) continue;
    const auto trip = b.op.triplets();
    for (const auto& [r, c, v] : trip) h(r, c) += w * v;
  }
  return h;
}

}  // namespace qbeat

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "atom.hpp"
#include "detection.hpp"
#include "operators.hpp"

namespace qbeat {

enum class AtomInit { PumpedM0, Uniform, GroundCoherence, ExcitedMinus };
enum class CavityInit { Vacuum, Steady, OneV };

// Composite system description: K atom slots x V mode x H mode, drive,
// detunings, decay rates and detection parameters. All rates in rad/us.
struct SystemModel {
  SchemeData scheme;
  int n_slots = 1;
  int fock_v = 3;
  int fock_h = 3;  // -1: no H mode in the state space
  double g_max = mhz_to_radus(1.5);
  double kappa = mhz_to_radus(3.0);
  double gamma = mhz_to_radus(6.07);
  double delta_a = 0.0;  // atom-drive detuning
  double delta_c = 0.0;  // cavity-drive detuning
  double drive_e = 0.0;  // drive amplitude E on the V mode
  double hwp_deg = 0.0;
  double eta1 = 1.0;  // detector 1 ("H") efficiency
  double eta2 = 1.0;  // detector 2 ("V") efficiency
  // Work in the frame displaced by the classical cavity field alpha(t).
  // Physically equivalent (verified against the undisplaced master
  // equation); keeps Fock occupation and undetected-jump rates low at
  // experiment-scale drives.
  bool displaced = false;
  int64_t dim_budget = 65536;

  // Mean intracavity photon number of the driven mode at delta_c = 0;
  // this is the |alpha|^2 entering the beat-theory formulas.
  double n_photons() const { return (drive_e / kappa) * (drive_e / kappa); }
  void set_n_photons(double n) { drive_e = kappa * std::sqrt(n); }

  CompositeSpace space() const {
    CompositeSpace s;
    s.n_slots = n_slots;
    s.atom_dim = scheme.dim();
    s.fock_v = fock_v;
    s.fock_h = fock_h;
    return s;
  }
};

// Time-dependent scalar weights multiplying the static sparse blocks of
// H_eff. Couplings scale with the per-slot beam profile g_i(t); the Rabi
// and source blocks scale with the classical field alpha(t) in displaced
// mode; the drive block exists only in the undisplaced frame.
enum class BlockKind {
  CouplingV,   // g_i(t) * (a_V^dag D0_i + h.c.)
  CouplingH,   // g_i(t) * (a_H^dag DH_i + h.c.)
  RabiLower,   // g_i(t) alpha^*(t) * D0_i
  RabiRaise,   // g_i(t) alpha(t)   * D0_i^dag
  Drive,       // iE(t) * (a_V^dag - a_V)
  Source,      // -i 2 kappa eta_k beta_k(t) * d_k^dag   (displaced LO feed)
  ScalarNorm,  // -(i/2) sum_k 2 kappa eta_k |beta_k(t)|^2  (identity block)
};

struct WeightedBlock {
  BlockKind kind;
  int slot = -1;      // atom slot for coupling/Rabi kinds
  int detector = -1;  // detector index for Source
  SparseOp op;        // empty for ScalarNorm
};

// One decay/detection channel: C_k = sqrt(rate_scale) * (op + mix*alpha(t)).
// mix is zero except for detected cavity ports in the displaced frame.
struct JumpChannel {
  enum class Kind { Detector, Loss, Side };
  Kind kind = Kind::Loss;
  bool detected = false;
  char label = 0;  // 'H' (detector 1) or 'V' (detector 2)
  double rate_scale = 0.0;
  cxd mix = 0.0;
  int slot = -1;  // side emission: atom slot
  int q = 0;      // side emission: photon polarization
  SparseOp op;
};

// Immutable operator bundle for one SystemModel; shared across trajectories.
struct SystemOperators {
  CompositeSpace space;
  SystemModel model;
  DetectionBasis basis;
  std::vector<cxd> diag;  // static complex diagonal of H_eff
  std::vector<WeightedBlock> blocks;
  std::vector<JumpChannel> channels;
  int parked_level = 0;       // definite ground level for empty slots
  SparseOp a_v;               // annihilation ops for observables
  SparseOp a_h;               // empty when no H mode
  std::vector<SparseOp> d0;   // per-slot pi lowering, for diagnostics

  static SystemOperators build(const SystemModel& m);

  // Dense H_eff snapshot for given per-slot couplings and drive state
  // (tests and the master-equation oracle).
  Eigen::MatrixXcd h_eff_dense(const std::vector<double>& g_slots,
                               double drive_e, cxd alpha) const;
};

}  // namespace qbeat

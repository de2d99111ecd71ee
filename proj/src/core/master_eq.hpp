#pragma once

#include <Eigen/Dense>
#include <vector>

#include "feedback.hpp"
#include "system.hpp"

namespace qbeat {

// Dense Lindblad integrator for constant-coupling models; the validation
// oracle for the trajectory unraveling. Works in the undisplaced frame only.
class MasterEquation {
 public:
  // g_slots: constant coupling per atom slot. The drive schedule (optional)
  // modulates the drive amplitude exactly as in the trajectory engine.
  MasterEquation(const SystemOperators& ops, std::vector<double> g_slots,
                 const DriveSchedule* schedule = nullptr);

  // d rho / dt
  Eigen::MatrixXcd derivative(const Eigen::MatrixXcd& rho, double t) const;

  // Fixed-step RK4 from t0 to t1; step chosen from the system rates unless
  // dt_us > 0 is given.
  Eigen::MatrixXcd evolve(Eigen::MatrixXcd rho, double t0, double t1,
                          double dt_us = 0.0) const;

  // Relax from `rho0` until the derivative norm is below tol (steady state).
  Eigen::MatrixXcd steady_state(const Eigen::MatrixXcd& rho0,
                                double tol = 1e-9, double t_max_us = 2000.0) const;

  const SystemOperators& ops() const { return ops_; }

  double default_dt() const;

 private:
  Eigen::MatrixXcd h_eff_at(double t) const;

  const SystemOperators& ops_;
  std::vector<double> g_slots_;
  const DriveSchedule* schedule_;
  std::vector<Eigen::MatrixXcd> c_ops_;   // sqrt(rate) C_k, dense
  Eigen::MatrixXcd h_static_;             // H_eff without the drive block
  Eigen::MatrixXcd drive_block_;          // i (a_V^dag - a_V), scaled by E(t)
};

// Trace distance (1/2) || a - b ||_1 of two Hermitian matrices.
double trace_distance(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

// Partial trace onto atom slot `slot`.
Eigen::MatrixXcd reduced_atom_rho(const Eigen::MatrixXcd& rho,
                                  const CompositeSpace& space, int slot = 0);

// Pure product state: slot 0 in the configured atomic state (others parked),
// cavity vacuum or truncated coherent steady state. Undisplaced conventions.
std::vector<cxd> product_state(const SystemOperators& ops, AtomInit atom_init,
                               CavityInit cavity_init);

}  // namespace qbeat

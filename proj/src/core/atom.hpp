#pragma once

#include <string>
#include <vector>

#include "units.hpp"

namespace qbeat {

enum class Manifold { Ground, Excited };

struct Sublevel {
  Manifold manifold;
  int m;
  double energy;  // Zeeman energy, rad/us
};

// Zeeman shift of one sublevel: 2pi * gF * muB/h * m * B, in rad/us.
double zeeman_shift(double gF, int m, double b_gauss);

// Clebsch-Gordan coefficient <F m; 1 q | F' m'> in the Condon-Shortley
// convention. Returns 0 for any forbidden combination (m' != m+q, |m|>F,
// |m'|>F', |F-F'|>1).
double dipole_coupling(int F, int m, int Fp, int mp, int q);

// Engine-facing description of one atom's internal structure: sublevels
// (ground block first, then excited) and the dipole transition list.
struct SchemeData {
  struct Transition {
    int gi;        // index into sublevels, ground block
    int ei;        // index into sublevels, excited block
    int q;         // -1, 0, +1 (polarization of the emitted photon)
    double coeff;  // dimensionless coupling coefficient
  };

  std::vector<Sublevel> sublevels;
  std::vector<Transition> transitions;
  int n_ground = 0;
  int n_excited = 0;

  int dim() const { return static_cast<int>(sublevels.size()); }
  int excited_offset() const { return n_ground; }
  // Index of the ground sublevel with magnetic number m, -1 if absent.
  int ground_index(int m) const;
  int excited_index(int m) const;
};

// Full (F, F') Zeeman manifold pair.
struct LevelScheme {
  int ground_F = 3;
  int excited_F = 4;
  double ground_gF = 1.0 / 3.0;
  double excited_gF = 1.0 / 2.0;
  double b_gauss = 5.0;
  std::vector<Sublevel> sublevels;  // ground block then excited block

  SchemeData lower() const;
};

// Reduced four-level scheme: ground m=+-1 and excited m=+-1, pi-coupled leg
// by leg with equal magnitude and no cross legs. `delta` is the magnitude of
// the leg detuning: the + leg sits at +delta and the - leg at -delta once
// the drive is tuned to the line center (Zeeman contributions included).
struct FourLevelScheme {
  double g = 0.0;       // coupling magnitude, rad/us (engine scales by this)
  double gamma = 0.0;   // excited linewidth, rad/us
  double larmor = 0.0;  // ground Zeeman shift per unit m, rad/us
  double delta = 0.0;   // leg detuning magnitude, rad/us

  SchemeData lower() const;
};

// Enumerates all sublevels of the (F, F') pair with Zeeman energies.
// Throws std::invalid_argument for a dipole-forbidden pair (|F-F'| > 1) or
// negative angular momenta.
LevelScheme build_level_scheme(int ground_F, int excited_F, double ground_gF,
                               double excited_gF, double b_gauss);

// Sparse description of the atomic lowering operator
// D_q = sum_m c(m,q) |g,m><e,m+q|; entries are (ground index, excited index,
// coefficient) triples in the SchemeData sublevel numbering.
struct LoweringOp {
  int q;
  std::vector<SchemeData::Transition> entries;
};

LoweringOp lowering_operator(const SchemeData& scheme, int q);

}  // namespace qbeat

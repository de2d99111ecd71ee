#pragma once

#include <Eigen/Dense>

#include "units.hpp"

namespace qbeat {

// Detection basis after the half-wave plate and polarizing beam splitter:
//   d1 =  cos(2 theta) a_H + sin(2 theta) a_V
//   d2 = -sin(2 theta) a_H + cos(2 theta) a_V
// Detector 1 carries the "H" channel label, detector 2 the "V" label.
struct DetectionBasis {
  double hwp_deg = 0.0;
  Eigen::Matrix2cd mixing;  // rows: detector ops, columns: (a_H, a_V)

  double cos2t() const { return mixing(0, 0).real(); }
  double sin2t() const { return mixing(0, 1).real(); }
};

inline DetectionBasis homodyne_basis(double hwp_deg) {
  DetectionBasis b;
  b.hwp_deg = hwp_deg;
  const double th = 2.0 * hwp_deg * kTwoPi / 360.0;
  const double c = std::cos(th), s = std::sin(th);
  b.mixing << c, s, -s, c;
  return b;
}

}  // namespace qbeat

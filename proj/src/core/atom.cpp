#include "atom.hpp"

#include <cmath>
#include <stdexcept>

namespace qbeat {

double zeeman_shift(double gF, int m, double b_gauss) {
  return mhz_to_radus(gF * kMuBohrMHzPerGauss * static_cast<double>(m) * b_gauss);
}

namespace {

double ln_factorial(int n) {
  static const auto table = [] {
    std::vector<double> t(64, 0.0);
    for (size_t i = 2; i < t.size(); ++i)
      t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return table.at(static_cast<size_t>(n));
}

// Racah's closed form for <j1 m1; j2 m2 | J M>, integer arguments.
double clebsch_gordan(int j1, int m1, int j2, int m2, int J, int M) {
  if (m1 + m2 != M) return 0.0;
  if (J < std::abs(j1 - j2) || J > j1 + j2) return 0.0;
  if (std::abs(m1) > j1 || std::abs(m2) > j2 || std::abs(M) > J) return 0.0;

  const double ln_pre =
      0.5 * (ln_factorial(J + j1 - j2) + ln_factorial(J - j1 + j2) +
             ln_factorial(j1 + j2 - J) - ln_factorial(j1 + j2 + J + 1) +
             ln_factorial(J + M) + ln_factorial(J - M) + ln_factorial(j1 - m1) +
             ln_factorial(j1 + m1) + ln_factorial(j2 - m2) + ln_factorial(j2 + m2));

  double sum = 0.0;
  for (int k = 0;; ++k) {
    const int a = j1 + j2 - J - k;
    const int b = j1 - m1 - k;
    const int c = j2 + m2 - k;
    const int d = J - j2 + m1 + k;
    const int e = J - j1 - m2 + k;
    if (b < 0 || c < 0 || a < 0) break;
    if (d < 0 || e < 0) continue;
    const double ln_term = ln_factorial(k) + ln_factorial(a) + ln_factorial(b) +
                           ln_factorial(c) + ln_factorial(d) + ln_factorial(e);
    sum += ((k & 1) ? -1.0 : 1.0) * std::exp(ln_pre - ln_term);
  }
  return std::sqrt(2.0 * J + 1.0) * sum;
}

}  // namespace

double dipole_coupling(int F, int m, int Fp, int mp, int q) {
  if (mp != m + q) return 0.0;
  if (std::abs(F - Fp) > 1) return 0.0;
  if (std::abs(m) > F || std::abs(mp) > Fp) return 0.0;
  return clebsch_gordan(F, m, 1, q, Fp, mp);
}

int SchemeData::ground_index(int m) const {
  for (int i = 0; i < n_ground; ++i)
    if (sublevels[i].m == m) return i;
  return -1;
}

int SchemeData::excited_index(int m) const {
  for (int i = n_ground; i < dim(); ++i)
    if (sublevels[i].m == m) return i;
  return -1;
}

LevelScheme build_level_scheme(int ground_F, int excited_F, double ground_gF,
                               double excited_gF, double b_gauss) {
  if (ground_F < 0 || excited_F < 0)
    throw std::invalid_argument("angular momenta must be non-negative");
  if (std::abs(ground_F - excited_F) > 1)
    throw std::invalid_argument("dipole-forbidden manifold pair: |F-F'| > 1");

  LevelScheme s;
  s.ground_F = ground_F;
  s.excited_F = excited_F;
  s.ground_gF = ground_gF;
  s.excited_gF = excited_gF;
  s.b_gauss = b_gauss;
  for (int m = -ground_F; m <= ground_F; ++m)
    s.sublevels.push_back({Manifold::Ground, m, zeeman_shift(ground_gF, m, b_gauss)});
  for (int m = -excited_F; m <= excited_F; ++m)
    s.sublevels.push_back({Manifold::Excited, m, zeeman_shift(excited_gF, m, b_gauss)});
  return s;
}

SchemeData LevelScheme::lower() const {
  SchemeData d;
  d.sublevels = sublevels;
  d.n_ground = 2 * ground_F + 1;
  d.n_excited = 2 * excited_F + 1;
  for (int gi = 0; gi < d.n_ground; ++gi) {
    const int m = d.sublevels[gi].m;
    for (int q = -1; q <= 1; ++q) {
      const double c = dipole_coupling(ground_F, m, excited_F, m + q, q);
      if (c == 0.0) continue;
      const int ei = d.excited_index(m + q);
      d.transitions.push_back({gi, ei, q, c});
    }
  }
  return d;
}

SchemeData FourLevelScheme::lower() const {
  SchemeData d;
  d.n_ground = 2;
  d.n_excited = 2;
  d.sublevels = {
      {Manifold::Ground, -1, -larmor},
      {Manifold::Ground, +1, +larmor},
      {Manifold::Excited, -1, -larmor - delta},
      {Manifold::Excited, +1, +larmor + delta},
  };
  // pi legs only; coefficient 1 on both so branching is normalized.
  d.transitions.push_back({0, 2, 0, 1.0});
  d.transitions.push_back({1, 3, 0, 1.0});
  return d;
}

LoweringOp lowering_operator(const SchemeData& scheme, int q) {
  LoweringOp op;
  op.q = q;
  for (const auto& t : scheme.transitions)
    if (t.q == q) op.entries.push_back(t);
  return op;
}

}  // namespace qbeat

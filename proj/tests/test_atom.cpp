#include "doctest.h"

#include <Eigen/Dense>
#include <cmath>
#include <map>

#include "atom.hpp"

using namespace qbeat;

namespace {

// Independent Clebsch-Gordan oracle: construct |F' m'> states inside the
// |F m> (x) |1 q> product basis by ladder recursion from the highest-weight
// state of each F' block, fixing signs by the Condon-Shortley convention
// (coefficient of the largest m is positive at m' = F').
class CgOracle {
 public:
  CgOracle(int F, int Fp) : F_(F), Fp_(Fp) {
    // basis: (m, q) with m' = m + q
    for (int m = -F; m <= F; ++m)
      for (int q = -1; q <= 1; ++q) basis_.push_back({m, q});

    std::vector<std::map<int, std::vector<double>>> blocks;  // per J: m' -> vec
    std::vector<int> js;
    for (int J = F + 1; J >= std::max(0, F - 1); --J) js.push_back(J);

    std::map<int, std::map<int, std::vector<double>>> all;
    for (int J : js) {
      // top state |J, J>: lives in the m1+q = J subspace, orthogonal to the
      // top-magnetization states of all larger J
      std::vector<std::vector<double>> higher;
      for (int J2 : js) {
        if (J2 <= J) break;
        higher.push_back(all[J2][J]);
      }
      std::vector<double> v = top_state(J, higher);
      all[J][J] = v;
      for (int M = J; M > -J; --M) {
        v = lower(v, J, M);
        all[J][M - 1] = v;
      }
    }
    table_ = std::move(all);
  }

  double coeff(int m, int q, int mp) const {
    const auto itj = table_.find(Fp_);
    if (itj == table_.end()) return 0.0;
    const auto itm = itj->second.find(mp);
    if (itm == itj->second.end()) return 0.0;
    for (size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i].first == m && basis_[i].second == q) return itm->second[i];
    return 0.0;
  }

 private:
  std::vector<double> top_state(int J, const std::vector<std::vector<double>>& higher) {
    // candidate vectors with total magnetization J
    std::vector<double> v(basis_.size(), 0.0);
    std::vector<size_t> idx;
    for (size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i].first + basis_[i].second == J) idx.push_back(i);
    // start from the vector with the largest m (Condon-Shortley sign anchor)
    size_t anchor = idx[0];
    for (size_t i : idx)
      if (basis_[i].first > basis_[anchor].first) anchor = i;
    v[anchor] = 1.0;
    for (const auto& h : higher) {
      double ip = 0.0;
      for (size_t i = 0; i < v.size(); ++i) ip += v[i] * h[i];
      for (size_t i = 0; i < v.size(); ++i) v[i] -= ip * h[i];
    }
    double n2 = 0.0;
    for (double x : v) n2 += x * x;
    const double inv = 1.0 / std::sqrt(n2);
    for (double& x : v) x *= inv;
    if (v[anchor] < 0.0)
      for (double& x : v) x = -x;
    return v;
  }

  // J- applied to a state with total angular momentum J and magnetization M.
  std::vector<double> lower(const std::vector<double>& v, int J, int M) {
    std::vector<double> out(v.size(), 0.0);
    const double norm = std::sqrt(J * (J + 1.0) - M * (M - 1.0));
    for (size_t i = 0; i < basis_.size(); ++i) {
      if (v[i] == 0.0) continue;
      const int m = basis_[i].first, q = basis_[i].second;
      // J- = J-(atom part) + J-(photon part)
      if (m - 1 >= -F_) {
        const double c = std::sqrt(F_ * (F_ + 1.0) - m * (m - 1.0));
        add(out, m - 1, q, c * v[i]);
      }
      if (q - 1 >= -1) {
        const double c = std::sqrt(1 * 2.0 - q * (q - 1.0));
        add(out, m, q - 1, c * v[i]);
      }
    }
    for (double& x : out) x /= norm;
    return out;
  }

  void add(std::vector<double>& v, int m, int q, double val) {
    for (size_t i = 0; i < basis_.size(); ++i)
      if (basis_[i].first == m && basis_[i].second == q) {
        v[i] += val;
        return;
      }
  }

  int F_, Fp_;
  std::vector<std::pair<int, int>> basis_;
  std::map<int, std::map<int, std::vector<double>>> table_;
};

}  // namespace

TEST_CASE("zeeman_shift values and symmetries") {
  CHECK(zeeman_shift(1.0 / 3.0, 0, 5.0) == 0.0);
  // 1.3996 * (1/3) * 5 MHz, converted to rad/us
  CHECK(zeeman_shift(1.0 / 3.0, 1, 5.0) ==
        doctest::Approx(kTwoPi * 2.3326666666666664).epsilon(1e-12));
  CHECK(zeeman_shift(1.0 / 3.0, -1, 5.0) ==
        doctest::Approx(-zeeman_shift(1.0 / 3.0, 1, 5.0)).epsilon(1e-14));
  // exactly linear in m and B
  for (int m = -3; m <= 3; ++m)
    for (double b : {0.5, 2.0, 5.0, 8.0}) {
      CHECK(zeeman_shift(0.4, m, b) ==
            doctest::Approx(m * b * zeeman_shift(0.4, 1, 1.0)).epsilon(1e-12));
    }
}

TEST_CASE("build_level_scheme enumerates sublevels") {
  const LevelScheme s = build_level_scheme(3, 4, 1.0 / 3.0, 0.5, 0.0);
  CHECK(s.sublevels.size() == 16);
  for (const auto& lvl : s.sublevels) CHECK(lvl.energy == 0.0);

  const LevelScheme s5 = build_level_scheme(3, 4, 1.0 / 3.0, 0.5, 5.0);
  CHECK(s5.sublevels.size() == 16);
  // odd in m, zero at m=0, per manifold
  for (const auto& lvl : s5.sublevels) {
    if (lvl.m == 0) CHECK(lvl.energy == 0.0);
  }
  CHECK_THROWS(build_level_scheme(3, 1, 1.0 / 3.0, 0.5, 5.0));
  CHECK_THROWS(build_level_scheme(-1, 0, 0.0, 0.0, 0.0));
}

TEST_CASE("dipole_coupling against the ladder-recursion oracle") {
  CHECK(dipole_coupling(3, 0, 3, 0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(dipole_coupling(3, 3, 4, 4, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(dipole_coupling(3, 0, 4, 1, 0) == 0.0);  // m' != m + q

  for (int Fp : {2, 3, 4}) {
    CgOracle oracle(3, Fp);
    for (int m = -3; m <= 3; ++m)
      for (int q = -1; q <= 1; ++q) {
        const int mp = m + q;
        if (std::abs(mp) > Fp) continue;
        CHECK(dipole_coupling(3, m, Fp, mp, q) ==
              doctest::Approx(oracle.coeff(m, q, mp)).epsilon(1e-12));
      }
  }
}

TEST_CASE("decay branching is normalized and symmetric") {
  for (int Fp : {2, 3, 4}) {
    for (int mp = -Fp; mp <= Fp; ++mp) {
      double total = 0.0;
      for (int q = -1; q <= 1; ++q) {
        const double c = dipole_coupling(3, mp - q, Fp, mp, q);
        total += c * c;
      }
      CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (int m = -3; m <= 3; ++m)
      for (int q = -1; q <= 1; ++q)
        CHECK(std::abs(dipole_coupling(3, m, Fp, m + q, q)) ==
              doctest::Approx(std::abs(dipole_coupling(3, -m, Fp, -m - q, -q)))
                  .epsilon(1e-12));
  }
}

TEST_CASE("lowering operators: structure") {
  const SchemeData full = build_level_scheme(3, 4, 1.0 / 3.0, 0.5, 5.0).lower();
  const LoweringOp d0 = lowering_operator(full, 0);
  CHECK(d0.entries.size() == 7);  // pi lines m = -3..3

  // D_q^dag D_q diagonal
  for (int q = -1; q <= 1; ++q) {
    const LoweringOp dq = lowering_operator(full, q);
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(full.dim(), full.dim());
    for (const auto& e : dq.entries) d(e.gi, e.ei) = e.coeff;
    const Eigen::MatrixXd dd = d.transpose() * d;
    for (int i = 0; i < dd.rows(); ++i)
      for (int j = 0; j < dd.cols(); ++j)
        if (i != j) CHECK(dd(i, j) == doctest::Approx(0.0).epsilon(1e-14));
  }

  FourLevelScheme fl;
  fl.larmor = 1.0;
  fl.delta = 0.2;
  const SchemeData fls = fl.lower();
  CHECK(lowering_operator(fls, 0).entries.size() == 2);
  CHECK(lowering_operator(fls, 1).entries.empty());
  CHECK(lowering_operator(fls, -1).entries.empty());
  // branching normalized on both excited levels
  for (int ei = 2; ei < 4; ++ei) {
    double tot = 0.0;
    for (const auto& t : fls.transitions)
      if (t.ei == ei) tot += t.coeff * t.coeff;
    CHECK(tot == doctest::Approx(1.0));
  }
  // Zeeman energies odd in m
  CHECK(fls.sublevels[0].energy == doctest::Approx(-fls.sublevels[1].energy));
}

TEST_CASE("reproducibility: pure functions of inputs") {
  const SchemeData a = build_level_scheme(3, 4, 1.0 / 3.0, 0.5, 5.0).lower();
  const SchemeData b = build_level_scheme(3, 4, 1.0 / 3.0, 0.5, 5.0).lower();
  REQUIRE(a.transitions.size() == b.transitions.size());
  for (size_t i = 0; i < a.transitions.size(); ++i) {
    CHECK(a.transitions[i].coeff == b.transitions[i].coeff);
    CHECK(a.transitions[i].gi == b.transitions[i].gi);
  }
}

#include "doctest.h"

#include <cmath>

#include "beat_theory.hpp"
#include "rng.hpp"

using namespace qbeat;

TEST_CASE("closed forms: hand-evaluated points") {
  // g=1, |alpha|^2=1, delta=0.5, gamma=1: the Lorentzian factor is
  // 0.5/(0.25+0.25) = 1, so delta_jump = 2*0.5*1^2 = 1 and
  // gamma_decoh = 2*1*(0.5/0.5)^2 = 2.
  CHECK(delta_jump(1, 1, 0.5, 1) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(gamma_decoh(1, 1, 0.5, 1) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(resolvedness(1, 1, 0.5, 1) == doctest::Approx(1.0).epsilon(1e-15));

  CHECK(delta_jump(1, 1, 0, 1) == 0.0);
  CHECK(gamma_decoh(1, 1, 0, 1) == 0.0);
  CHECK(ac_stark(1, 1, 0, 1) == 0.0);
  CHECK_THROWS(resolvedness(1, 1, 0, 1));

  // doubling |alpha|^2 doubles both rates
  CHECK(delta_jump(1, 2, 0.5, 1) == doctest::Approx(2.0 * delta_jump(1, 1, 0.5, 1)));
  CHECK(gamma_decoh(1, 2, 0.5, 1) == doctest::Approx(2.0 * gamma_decoh(1, 1, 0.5, 1)));

  // gamma_decoh even in delta, delta_jump odd
  CHECK(gamma_decoh(1, 1, -0.5, 1) == doctest::Approx(gamma_decoh(1, 1, 0.5, 1)));
  CHECK(delta_jump(1, 1, -0.5, 1) == doctest::Approx(-delta_jump(1, 1, 0.5, 1)));

  CHECK(resolvedness(1, 1, 0.25, 1) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("jump shift versus AC Stark shift") {
  // ratio = 2 (gamma/2)^2 / ((gamma/2)^2 + delta^2); at delta = 0.05,
  // gamma = 1 this is 0.5/0.2525 = 1.98019801...
  const double r = delta_jump(1, 1, 0.05, 1) / ac_stark(1, 1, 0.05, 1);
  CHECK(r == doctest::Approx(1.9801980198019802).epsilon(1e-12));
  // approaches 2 from below as delta -> 0
  CHECK(delta_jump(1, 1, 1e-6, 1) / ac_stark(1, 1, 1e-6, 1) ==
        doctest::Approx(2.0).epsilon(1e-9));
  CHECK(std::signbit(ac_stark(1, 1, -0.3, 1)));
  CHECK(std::signbit(delta_jump(1, 1, -0.3, 1)));
}

TEST_CASE("ratio identity and scaling properties on a random grid") {
  RngStream rng(99, 0);
  for (int i = 0; i < 200; ++i) {
    const double g = 0.1 + 3.0 * rng.uniform();
    const double a2 = 0.01 + 2.0 * rng.uniform();
    const double delta = (rng.uniform() - 0.5) * 10.0;
    const double gamma = 0.2 + 5.0 * rng.uniform();
    if (delta == 0.0) continue;
    CHECK(resolvedness(g, a2, delta, gamma) ==
          doctest::Approx(2.0 * delta / gamma).epsilon(1e-12));
    // exact linearity in alpha^2 and g^2
    CHECK(delta_jump(g, 2.0 * a2, delta, gamma) ==
          doctest::Approx(2.0 * delta_jump(g, a2, delta, gamma)).epsilon(1e-14));
    CHECK(gamma_decoh(2.0 * g, a2, delta, gamma) ==
          doctest::Approx(4.0 * gamma_decoh(g, a2, delta, gamma)).epsilon(1e-14));
    CHECK(gamma_decoh(g, a2, delta, gamma) >= 0.0);
  }
}

TEST_CASE("predicted beat waveform") {
  BeatPrediction p;
  p.omega_base = 2.0;
  p.delta_jump = 0.0;
  p.gamma_decoh = 0.0;

  std::vector<double> tau;
  for (int i = 0; i <= 100; ++i) tau.push_back(0.1 * i);
  const auto y = predicted_beat(p, 0.0, 0.4, 0.7, tau);
  CHECK(y[0] == doctest::Approx(1.0 + 0.4 * std::cos(0.7)).epsilon(1e-14));
  for (size_t i = 0; i < tau.size(); ++i)
    CHECK(y[i] ==
          doctest::Approx(1.0 + 0.4 * std::cos(2.0 * tau[i] + 0.7)).epsilon(1e-12));
}

TEST_CASE("predicted beat with a drive-off window") {
  // omega=1, delta_jump=0.1, gamma_decoh=0.2, eps=0 window on [1,2]:
  // at tau=3 the phase is 3 - 0.2*2 + 0.3 and the envelope exp(-0.2*2)
  BeatPrediction p;
  p.omega_base = 1.0;
  p.delta_jump = 0.1;
  p.gamma_decoh = 0.2;

  DriveSchedule sched;
  sched.windows.push_back({1.0, 2.0, 0.0});

  const std::vector<double> tau = {3.0};
  const auto y = predicted_beat(p, 0.0, 0.5, 0.3, tau, &sched);
  const double expected = 1.0 + 0.5 * std::exp(-0.4) * std::cos(2.9);
  CHECK(y[0] == doctest::Approx(expected).epsilon(1e-12));

  // versus the always-on case: amplitude ratio e^{+Gamma_decoh (t2-t1)} and
  // phase difference 2*delta_jump*(t2-t1)
  const auto y_on = predicted_beat(p, 0.0, 0.5, 0.3, tau);
  const double env_off = std::exp(-0.4), env_on = std::exp(-0.6);
  CHECK(env_off / env_on == doctest::Approx(std::exp(0.2)).epsilon(1e-12));
  const double ph_off = 3.0 - 0.2 * 2.0 + 0.3, ph_on = 3.0 - 0.2 * 3.0 + 0.3;
  CHECK(ph_off - ph_on == doctest::Approx(2.0 * p.delta_jump * 1.0).epsilon(1e-12));
  CHECK(y_on[0] == doctest::Approx(1.0 + 0.5 * env_on * std::cos(ph_on)).epsilon(1e-12));

  // epsilon -> 0 limit of the window multiplier: a multiplier-1 window is a
  // no-op relative to the plain waveform
  DriveSchedule noop;
  noop.windows.push_back({1.0, 2.0, 1.0});
  const auto y_noop = predicted_beat(p, 0.0, 0.5, 0.3, tau, &noop);
  CHECK(y_noop[0] == doctest::Approx(y_on[0]).epsilon(1e-12));
}

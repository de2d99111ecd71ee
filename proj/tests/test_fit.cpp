#include "doctest.h"

#include <cmath>

#include "fit.hpp"
#include "rng.hpp"

using namespace qbeat;

namespace {

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> t;
  for (double x = lo; x <= hi + 1e-12; x += step) t.push_back(x);
  return t;
}

std::vector<double> damped(const std::vector<double>& t, double c, double a,
                           double g, double f, double phi) {
  std::vector<double> y;
  for (double x : t)
    y.push_back(c + a * std::exp(-g * x) * std::cos(kTwoPi * f * x + phi));
  return y;
}

}  // namespace

TEST_CASE("noiseless generate-then-fit round trip") {
  const auto t = grid(0.0, 10.0, 0.02);
  struct Case {
    double c, a, g, f, phi;
  };
  // documented round-trip grid
  const Case cases[] = {
      {1.0, 0.3, 0.2, 2.3, 0.7},   {0.5, 1.2, 0.05, 4.7, -2.0},
      {2.0, 0.08, 0.5, 1.1, 3.0},  {1.0, 0.6, 0.0, 2.333, 0.0},
      {0.0, 0.4, 0.35, 6.5, -0.4},
  };
  for (const auto& cs : cases) {
    const auto y = damped(t, cs.c, cs.a, cs.g, cs.f, cs.phi);
    const std::vector<double> sigma(t.size(), 1.0);
    const BeatFit fit = fit_damped_sinusoid(t, y, sigma, 0.0, 10.0);
    CHECK(fit.converged);
    CHECK(fit.freq_identifiable);
    CHECK(fit.offset == doctest::Approx(cs.c).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(cs.a).epsilon(1e-6));
    CHECK(fit.decay == doctest::Approx(cs.g).epsilon(1e-6).scale(1.0));
    CHECK(fit.freq_mhz == doctest::Approx(cs.f).epsilon(1e-6));
    const double dphi =
        std::remainder(fit.phase - std::remainder(cs.phi, kTwoPi), kTwoPi);
    CHECK(std::abs(dphi) < 1e-6);
  }
}

TEST_CASE("flat trace: amplitude ~ 0, frequency unidentifiable") {
  const auto t = grid(0.0, 5.0, 0.05);
  std::vector<double> y(t.size(), 1.0), sigma(t.size(), 0.01);
  const BeatFit fit = fit_damped_sinusoid(t, y, sigma, 0.0, 5.0);
  CHECK(std::abs(fit.amplitude) < 1e-8);
  CHECK_FALSE(fit.freq_identifiable);
}

TEST_CASE("too few points is flagged, not crashed") {
  const std::vector<double> t = {0.0, 0.1, 0.2};
  const std::vector<double> y = {1.0, 1.1, 0.9};
  const std::vector<double> s = {0.1, 0.1, 0.1};
  const BeatFit fit = fit_damped_sinusoid(t, y, s, 0.0, 1.0);
  CHECK_FALSE(fit.converged);
}

TEST_CASE("noisy fits: 3-sigma coverage over 200 repeats") {
  const auto t = grid(0.0, 8.0, 0.04);
  const double c = 1.0, a = 0.3, g = 0.2, f = 2.3, phi = 0.7;
  const auto clean = damped(t, c, a, g, f, phi);
  const double noise = 0.01;
  RngStream rng(1234, 0);

  int cover[5] = {0, 0, 0, 0, 0};
  const int reps = 200;
  for (int r = 0; r < reps; ++r) {
    std::vector<double> y(clean);
    for (auto& v : y) {
      // Box-Muller
      const double u1 = rng.uniform_pos(), u2 = rng.uniform();
      v += noise * std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
    }
    const std::vector<double> sigma(t.size(), noise);
    const BeatFit fit = fit_damped_sinusoid(t, y, sigma, 0.0, 8.0);
    REQUIRE(fit.converged);
    if (std::abs(fit.offset - c) < 3 * fit.err_offset) cover[0]++;
    if (std::abs(fit.amplitude - a) < 3 * fit.err_amplitude) cover[1]++;
    if (std::abs(fit.decay - g) < 3 * fit.err_decay) cover[2]++;
    if (std::abs(fit.freq_mhz - f) < 3 * fit.err_freq) cover[3]++;
    if (std::abs(std::remainder(fit.phase - phi, kTwoPi)) < 3 * fit.err_phase)
      cover[4]++;
  }
  for (int k = 0; k < 5; ++k)
    CHECK(cover[k] >= static_cast<int>(0.95 * reps));
}

TEST_CASE("reparameterization invariance of the canonical fit") {
  const auto t = grid(0.0, 6.0, 0.03);
  const auto y = damped(t, 1.0, 0.4, 0.1, 3.1, 1.1);
  const std::vector<double> sigma(t.size(), 1.0);

  BeatFit shifted;
  shifted.offset = 1.0;
  shifted.amplitude = 0.4;
  shifted.decay = 0.1;
  shifted.freq_mhz = 3.1;
  shifted.phase = 1.1 + kTwoPi;  // same model, phase shifted by 2 pi
  const BeatFit f1 = fit_damped_sinusoid(t, y, sigma, 0.0, 6.0, &shifted);

  BeatFit negated;
  negated.offset = 1.0;
  negated.amplitude = -0.4;  // A negated with phi + pi: identical waveform
  negated.decay = 0.1;
  negated.freq_mhz = 3.1;
  negated.phase = 1.1 + 0.5 * kTwoPi;
  const BeatFit f2 = fit_damped_sinusoid(t, y, sigma, 0.0, 6.0, &negated);

  CHECK(f1.amplitude == doctest::Approx(f2.amplitude).epsilon(1e-9));
  CHECK(f1.phase == doctest::Approx(f2.phase).epsilon(1e-9));
  CHECK(f1.freq_mhz == doctest::Approx(f2.freq_mhz).epsilon(1e-9));
  CHECK(f1.amplitude >= 0.0);
  CHECK(f1.phase > -0.5 * kTwoPi);
  CHECK(f1.phase <= 0.5 * kTwoPi + 1e-15);
}

TEST_CASE("post-revival window selection keeps the tau = 0 phase reference") {
  CorrelationEstimate trace;
  const auto t = grid(0.0, 10.0, 0.05);
  const auto y = damped(t, 1.0, 0.5, 0.05, 2.3, 0.9);
  trace.tau_us = t;
  trace.g2 = y;
  trace.stderr_.assign(t.size(), 0.01);
  trace.pairs.assign(t.size(), 100);

  const BeatFit whole = fit_damped_sinusoid(trace, 0.0, 10.0);
  const BeatFit post = post_revival_fit(trace, 3.0, 0.2, 3.0);
  CHECK(post.window_lo == doctest::Approx(3.2));
  CHECK(post.window_hi == doctest::Approx(6.2));
  // nothing changes at t_on here, so both agree within errors
  CHECK(post.freq_mhz == doctest::Approx(whole.freq_mhz).epsilon(1e-4));
  CHECK(std::abs(std::remainder(post.phase - whole.phase, kTwoPi)) < 1e-3);
}

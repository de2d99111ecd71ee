#include "doctest.h"

#include <cmath>

#include "config.hpp"

using namespace qbeat;

TEST_CASE("empty config resolves to documented defaults") {
  const RunConfig cfg = RunConfig::from_text("");
  CHECK(cfg.get("system.scheme") == "full");
  CHECK(cfg.get_double("system.g_mhz") == 1.5);
  CHECK(cfg.get_double("system.kappa_mhz") == 3.0);
  CHECK(cfg.get_double("system.gamma_mhz") == 6.07);
  CHECK(cfg.get_int("system.fock_v") == 3);
  CHECK(cfg.get_double("feedback.t_fb_us") == 3.0);
  // serialization echoes every key
  const std::string s = cfg.serialize();
  CHECK(s.find("system.g_mhz = 1.5") != std::string::npos);
  CHECK(s.find("ensemble.seed = 1") != std::string::npos);
}

TEST_CASE("line-precise diagnostics") {
  CHECK_THROWS_WITH_AS(RunConfig::from_text("foo.bar = 1\n", "cfg"),
                       doctest::Contains("cfg:1"), std::runtime_error);
  CHECK_THROWS_WITH_AS(
      RunConfig::from_text("system.g_mhz = 1.5\nfeedback.epsilon = 1.5\n", "cfg"),
      doctest::Contains("cfg:2"), std::runtime_error);
  CHECK_THROWS_AS(RunConfig::from_text("nonsense\n"), std::runtime_error);
  CHECK_THROWS_AS(RunConfig::from_text("g_mhz = 1.5\n"), std::runtime_error);
  CHECK_THROWS_AS(RunConfig::from_text("system.g_mhz = abc\n"), std::runtime_error);
  // comments and blank lines are fine
  const RunConfig ok = RunConfig::from_text("# comment\n\nsystem.g_mhz = 2.0 # x\n");
  CHECK(ok.get_double("system.g_mhz") == 2.0);
}

TEST_CASE("range validation") {
  CHECK_THROWS(RunConfig::from_text("detection.eta_h = 1.2\n"));
  CHECK_THROWS(RunConfig::from_text("system.fock_v = 0\n"));
  CHECK_THROWS(RunConfig::from_text("ensemble.trajectories = 0\n"));
  CHECK_THROWS(RunConfig::from_text("feedback.retrigger = sometimes\n"));
  RunConfig cfg;
  CHECK_THROWS(cfg.set("feedback.epsilon", "1.5"));
  CHECK_NOTHROW(cfg.set("feedback.epsilon", "0.25"));
}

TEST_CASE("MHz to rad/us conversion happens once at model build") {
  RunConfig cfg = RunConfig::from_text("system.g_mhz = 1.5\nsystem.n_photons = 1.0\n");
  const SystemModel m = cfg.system_model();
  CHECK(m.g_max == doctest::Approx(kTwoPi * 1.5).epsilon(1e-15));
  CHECK(m.kappa == doctest::Approx(kTwoPi * 3.0).epsilon(1e-15));
  CHECK(m.drive_e == doctest::Approx(m.kappa).epsilon(1e-15));  // E = kappa sqrt(n)
  CHECK(m.n_photons() == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("paper preset pins the headline parameters") {
  const RunConfig cfg = RunConfig::from_file(std::string(QBEAT_PRESET_DIR) +
                                             "/fig2.conf");
  CHECK(cfg.get_double("beam.n_eff") == 0.55);
  CHECK(cfg.get_double("detection.hwp_deg") == 1.2);
  CHECK(cfg.get_double("beam.v_mps") == 13.5);
  CHECK(cfg.get_double("beam.tilt_rad") == 0.017);
  CHECK(cfg.get_double("system.n_photons") == 1.21);
  CHECK(cfg.get_bool("beam.enabled"));
}

TEST_CASE("hash excludes the worker count, includes the physics") {
  RunConfig a = RunConfig::from_text("system.g_mhz = 1.5\n");
  RunConfig b = RunConfig::from_text("system.g_mhz = 1.5\nensemble.workers = 8\n");
  CHECK(a.hash() == b.hash());
  RunConfig c = RunConfig::from_text("system.g_mhz = 1.6\n");
  CHECK(a.hash() != c.hash());
  RunConfig d = RunConfig::from_text("ensemble.seed = 2\n");
  CHECK(a.hash() != d.hash());
}

TEST_CASE("fourlevel scheme wiring") {
  RunConfig cfg = RunConfig::from_text(
      "system.scheme = fourlevel\nsystem.fock_h = -1\n"
      "system.fourlevel_larmor_mhz = 1.5\nsystem.fourlevel_delta_mhz = 0.607\n");
  const SystemModel m = cfg.system_model();
  CHECK(m.scheme.dim() == 4);
  CHECK(m.fock_h == -1);
  CHECK(m.scheme.sublevels[1].energy == doctest::Approx(kTwoPi * 1.5));
  // leg detuning: E(e,+1) - E(g,+1) = delta
  CHECK(m.scheme.sublevels[3].energy - m.scheme.sublevels[1].energy ==
        doctest::Approx(kTwoPi * 0.607));
}

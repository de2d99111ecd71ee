#include "doctest.h"

#include <cmath>

#include "feedback.hpp"

using namespace qbeat;

TEST_CASE("amplitude multiplier is sqrt of the power fraction") {
  FeedbackConfig cfg;
  cfg.enabled = true;
  cfg.epsilon = 0.25;
  CHECK(cfg.amplitude_multiplier() == doctest::Approx(0.5));
  cfg.epsilon = 0.0;
  CHECK(cfg.amplitude_multiplier() == 0.0);
  cfg.enabled = false;
  CHECK(cfg.amplitude_multiplier() == 1.0);
}

TEST_CASE("on_herald window creation and policies") {
  FeedbackConfig cfg;
  cfg.enabled = true;
  cfg.epsilon = 0.0;
  cfg.t_fb_us = 2.5;
  cfg.latency_us = 0.0;

  DriveSchedule s;
  s.on_herald(10.0, cfg);
  REQUIRE(s.windows.size() == 1);
  CHECK(s.windows[0].start_us == 10.0);
  CHECK(s.windows[0].end_us == 12.5);

  // drive is zero inside the window, restored at and after the end
  CHECK(s.drive_amplitude(3.0, 10.0) == 0.0);
  CHECK(s.drive_amplitude(3.0, 11.0) == 0.0);
  CHECK(s.drive_amplitude(3.0, 12.5) == 3.0);  // half-open [start, end)
  CHECK(s.drive_amplitude(3.0, 9.9) == 3.0);

  // second click inside the window: ignored under the default policy
  s.on_herald(11.0, cfg);
  CHECK(s.windows.size() == 1);
  CHECK(s.windows[0].end_us == 12.5);

  // extend-window policy stretches it instead
  cfg.retrigger = RetriggerPolicy::ExtendWindow;
  s.on_herald(12.0, cfg);
  REQUIRE(s.windows.size() == 1);
  CHECK(s.windows[0].end_us == doctest::Approx(14.5));

  // disabled feedback or epsilon = 1 leaves the schedule unchanged
  DriveSchedule s2;
  FeedbackConfig off;
  off.enabled = false;
  s2.on_herald(5.0, off);
  CHECK(s2.windows.empty());
  FeedbackConfig unity;
  unity.enabled = true;
  unity.epsilon = 1.0;
  s2.on_herald(5.0, unity);
  CHECK(s2.windows.empty());
}

TEST_CASE("partial turn-off and latency") {
  FeedbackConfig cfg;
  cfg.enabled = true;
  cfg.epsilon = 0.25;
  cfg.t_fb_us = 3.0;
  cfg.latency_us = 0.5;

  DriveSchedule s;
  s.on_herald(1.0, cfg);
  REQUIRE(s.windows.size() == 1);
  CHECK(s.windows[0].start_us == doctest::Approx(1.5));
  CHECK(s.windows[0].end_us == doctest::Approx(4.5));
  // amplitude multiplier sqrt(0.25) = 0.5 -> power fraction 0.25
  CHECK(s.drive_amplitude(2.0, 2.0) == doctest::Approx(1.0));
  CHECK(s.drive_amplitude(2.0, 1.2) == doctest::Approx(2.0));

  CHECK(s.altered(2.0));
  CHECK_FALSE(s.altered(5.0));
  CHECK(s.altered_time(0.0, 10.0) == doctest::Approx(3.0));
  CHECK(s.altered_time(2.0, 3.0) == doctest::Approx(1.0));
}

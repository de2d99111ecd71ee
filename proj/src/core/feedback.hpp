#pragma once

#include <string>
#include <vector>

namespace qbeat {

enum class RetriggerPolicy { IgnoreDuringWindow, ExtendWindow };

struct FeedbackConfig {
  bool enabled = false;
  double epsilon = 0.0;     // normalized feedback intensity (power fraction)
  double t_fb_us = 3.0;     // window length, us
  double latency_us = 0.0;  // trigger-to-window delay, us
  RetriggerPolicy retrigger = RetriggerPolicy::IgnoreDuringWindow;

  // Amplitude multiplier during a window; epsilon is a power fraction.
  double amplitude_multiplier() const;
};

// Piecewise-constant drive amplitude multiplier timeline. Windows are
// half-open [start, end): at t == end the drive is already restored.
struct DriveSchedule {
  struct Window {
    double start_us;
    double end_us;
    double multiplier;
  };
  std::vector<Window> windows;

  // Herald hook: appends a window per the feedback config and retrigger
  // policy. No-op when feedback is disabled or epsilon == 1.
  void on_herald(double t_click_us, const FeedbackConfig& cfg);

  // Amplitude multiplier at time t (1 outside every window).
  double multiplier(double t_us) const;

  // E_steady scaled by the multiplier at t.
  double drive_amplitude(double e_steady, double t_us) const {
    return e_steady * multiplier(t_us);
  }

  // True if t lies inside a window whose multiplier differs from 1
  // (used by the correlator to exclude intentionally dark stretches from
  // rate normalization).
  bool altered(double t_us) const;

  // Total altered time overlapping [t0, t1).
  double altered_time(double t0, double t1) const;

  void clear() { windows.clear(); }
};

}  // namespace qbeat

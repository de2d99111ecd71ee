#include "feedback.hpp"

#include <algorithm>
#include <cmath>

namespace qbeat {

double FeedbackConfig::amplitude_multiplier() const {
  if (!enabled) return 1.0;
  return std::sqrt(std::clamp(epsilon, 0.0, 1.0));
}

void DriveSchedule::on_herald(double t_click_us, const FeedbackConfig& cfg) {
  if (!cfg.enabled || cfg.epsilon >= 1.0) return;
  const double start = t_click_us + cfg.latency_us;
  const double end = start + cfg.t_fb_us;
  if (!windows.empty()) {
    Window& last = windows.back();
    if (start < last.end_us) {
      if (cfg.retrigger == RetriggerPolicy::IgnoreDuringWindow) return;
      last.end_us = std::max(last.end_us, end);
      return;
    }
  }
  windows.push_back({start, end, cfg.amplitude_multiplier()});
}

double DriveSchedule::multiplier(double t_us) const {
  for (auto it = windows.rbegin(); it != windows.rend(); ++it) {
    if (t_us >= it->start_us && t_us < it->end_us) return it->multiplier;
    if (t_us >= it->end_us) break;  // windows are time-ordered
  }
  return 1.0;
}

bool DriveSchedule::altered(double t_us) const {
  for (auto it = windows.rbegin(); it != windows.rend(); ++it) {
    if (t_us >= it->start_us && t_us < it->end_us) return it->multiplier != 1.0;
    if (t_us >= it->end_us) break;
  }
  return false;
}

double DriveSchedule::altered_time(double t0, double t1) const {
  double total = 0.0;
  for (const auto& w : windows) {
    if (w.multiplier == 1.0) continue;
    total += std::max(0.0, std::min(t1, w.end_us) - std::max(t0, w.start_us));
  }
  return total;
}

}  // namespace qbeat

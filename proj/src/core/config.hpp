#pragma once

#include <map>
#include <string>
#include <vector>

#include "engine.hpp"
#include "scans.hpp"
#include "system.hpp"

namespace qbeat {

// Flat `section.key = value` run configuration. Unknown keys are rejected
// with line-precise diagnostics; every value is range-checked at load and
// frequencies are converted from MHz to rad/us exactly once, when the typed
// model objects are built.
class RunConfig {
 public:
  // All-defaults configuration.
  RunConfig();

  static RunConfig from_file(const std::string& path);
  static RunConfig from_text(const std::string& text,
                             const std::string& origin = "<string>");

  // Applies a single `section.key = value` assignment (CLI overrides).
  void set(const std::string& key, const std::string& value);

  std::string get(const std::string& key) const;
  double get_double(const std::string& key) const;
  int get_int(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  uint64_t get_uint64(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  // Canonical serialization of the fully resolved configuration (sorted
  // keys, defaults included).
  std::string serialize() const;

  // FNV-1a hash of the canonical serialization, excluding the runtime-only
  // keys (worker count) so outputs are identical across worker counts.
  std::string hash() const;

  SystemModel system_model() const;
  EngineConfig engine_config() const;
  AnalysisOptions analysis_options() const;

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  void validate(const std::string& key, const std::string& value,
                const std::string& where) const;
  std::map<std::string, std::string> values_;
};

}  // namespace qbeat

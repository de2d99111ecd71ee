#pragma once

#include <string>
#include <vector>

#include "config.hpp"
#include "output.hpp"

namespace qbeat {

struct RunReport {
  bool ok = true;
  std::vector<std::string> lines;      // human/machine readable check results
  std::vector<std::string> artifacts;  // files written

  void check(bool pass, const std::string& what);
  void note(const std::string& what);
};

// Executes one subcommand ("validate", "beat", "scan-epsilon", "scan-photon",
// "theory") against the configuration, writing CSV/SVG artifacts and a
// report.txt into out_dir. The report's ok flag mirrors the internal
// invariant checks; callers map it to the process exit code.
RunReport run_experiment(const RunConfig& cfg, const std::string& subcommand,
                         const std::string& out_dir);

// ClickRecord CSV: header block, then `timestamp_us,channel,trajectory_id`
// with timestamps at 1e-4 us resolution.
void write_click_record(const std::string& path, const ClickRecord& record,
                        const Provenance& prov);

}  // namespace qbeat

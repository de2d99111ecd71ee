// qbeat command-line front end. Talks to the core exclusively through the
// public C API in qbeat.h.
#include <cstdio>
#include <string>

#include "CLI11.hpp"
#include "qbeat.h"

int main(int argc, char** argv) {
  CLI::App app{"qbeat: conditional quantum-beat simulator for a driven "
               "two-mode cavity QED system"};
  app.require_subcommand(1);

  std::string config_path, out_dir = "out";
  std::string seed_override, workers_override;

  const char* names[] = {"validate", "beat", "scan-epsilon", "scan-photon",
                         "theory"};
  const char* descs[] = {
      "run the oracle-equivalence and identity checks",
      "conditional intensity g2(tau) with/without feedback",
      "amplitude and phase versus normalized feedback intensity",
      "beat frequency versus drive photon number",
      "closed-form frequency-shift/decoherence table"};
  for (int i = 0; i < 5; ++i) {
    CLI::App* sub = app.add_subcommand(names[i], descs[i]);
    sub->add_option("--config", config_path, "flat section.key=value file");
    sub->add_option("--seed", seed_override, "override ensemble.seed");
    sub->add_option("--workers", workers_override,
                    "override ensemble.workers (QBEAT_WORKERS as fallback)");
    sub->add_option("--out", out_dir, "output directory")
        ->capture_default_str();
  }

  CLI11_PARSE(app, argc, argv);
  const std::string sub = app.get_subcommands().front()->get_name();

  qbeat_config* cfg = nullptr;
  qbeat_status st;
  if (config_path.empty())
    st = qbeat_config_create(&cfg);
  else
    st = qbeat_config_load(config_path.c_str(), &cfg);
  if (st != QBEAT_OK) {
    std::fprintf(stderr, "config error: %s\n", qbeat_last_error());
    return 2;
  }
  if (!seed_override.empty() &&
      qbeat_config_set(cfg, "ensemble.seed", seed_override.c_str()) != QBEAT_OK) {
    std::fprintf(stderr, "config error: %s\n", qbeat_last_error());
    qbeat_config_free(cfg);
    return 2;
  }
  if (!workers_override.empty() &&
      qbeat_config_set(cfg, "ensemble.workers", workers_override.c_str()) !=
          QBEAT_OK) {
    std::fprintf(stderr, "config error: %s\n", qbeat_last_error());
    qbeat_config_free(cfg);
    return 2;
  }

  qbeat_report* rep = nullptr;
  st = qbeat_run(cfg, sub.c_str(), out_dir.c_str(), &rep);
  if (rep) {
    for (size_t i = 0; i < qbeat_report_line_count(rep); ++i)
      std::printf("%s\n", qbeat_report_line(rep, i));
    qbeat_report_free(rep);
  }
  qbeat_config_free(cfg);

  if (st == QBEAT_OK) {
    std::printf("OK\n");
    return 0;
  }
  std::fprintf(stderr, "%s\n", qbeat_last_error());
  return st == QBEAT_ERR_CHECK_FAILED ? 1 : 2;
}

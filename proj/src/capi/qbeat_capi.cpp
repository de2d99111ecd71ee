#include "qbeat.h"

#include <cstring>
#include <string>

#include "beat_theory.hpp"
#include "config.hpp"
#include "experiments.hpp"
#include "version.hpp"

namespace {

thread_local std::string g_last_error;

void set_error(const std::string& msg) { g_last_error = msg; }

template <typename F>
qbeat_status guarded(F&& f) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    set_error(e.what());
    return QBEAT_ERR_INVALID_ARGUMENT;
  } catch (const std::domain_error& e) {
    set_error(e.what());
    return QBEAT_ERR_INVALID_ARGUMENT;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QBEAT_ERR_RUNTIME;
  }
}

}  // namespace

struct qbeat_config {
  qbeat::RunConfig cfg;
  std::string scratch;  // backs qbeat_config_get / _hash returns
};

struct qbeat_report {
  qbeat::RunReport rep;
};

extern "C" {

const char* qbeat_version(void) { return QBEAT_VERSION; }

const char* qbeat_last_error(void) { return g_last_error.c_str(); }

qbeat_status qbeat_config_create(qbeat_config** out) {
  if (!out) return QBEAT_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *out = new qbeat_config{};
    return QBEAT_OK;
  });
}

qbeat_status qbeat_config_load(const char* path, qbeat_config** out) {
  if (!path || !out) {
    set_error("null argument");
    return QBEAT_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto* h = new qbeat_config{};
    h->cfg = qbeat::RunConfig::from_file(path);
    *out = h;
    return QBEAT_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QBEAT_ERR_CONFIG;
  }
}

qbeat_status qbeat_config_parse(const char* text, qbeat_config** out) {
  if (!text || !out) {
    set_error("null argument");
    return QBEAT_ERR_INVALID_ARGUMENT;
  }
  *out = nullptr;
  try {
    auto* h = new qbeat_config{};
    h->cfg = qbeat::RunConfig::from_text(text);
    *out = h;
    return QBEAT_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QBEAT_ERR_CONFIG;
  }
}

qbeat_status qbeat_config_set(qbeat_config* cfg, const char* key,
                              const char* value) {
  if (!cfg || !key || !value) {
    set_error("null argument");
    return QBEAT_ERR_INVALID_ARGUMENT;
  }
  try {
    cfg->cfg.set(key, value);
    return QBEAT_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QBEAT_ERR_CONFIG;
  }
}

const char* qbeat_config_get(qbeat_config* cfg, const char* key) {
  if (!cfg || !key) return nullptr;
  try {
    cfg->scratch = cfg->cfg.get(key);
    return cfg->scratch.c_str();
  } catch (const std::exception& e) {
    set_error(e.what());
    return nullptr;
  }
}

const char* qbeat_config_hash(qbeat_config* cfg) {
  if (!cfg) return nullptr;
  cfg->scratch = cfg->cfg.hash();
  return cfg->scratch.c_str();
}

void qbeat_config_free(qbeat_config* cfg) { delete cfg; }

qbeat_status qbeat_run(qbeat_config* cfg, const char* subcommand,
                       const char* out_dir, qbeat_report** out_report) {
  if (out_report) *out_report = nullptr;
  if (!cfg || !subcommand || !out_dir) {
    set_error("null argument");
    return QBEAT_ERR_INVALID_ARGUMENT;
  }
  try {
    auto* rep = new qbeat_report{};
    rep->rep = qbeat::run_experiment(cfg->cfg, subcommand, out_dir);
    const bool ok = rep->rep.ok;
    if (out_report)
      *out_report = rep;
    else
      delete rep;
    if (!ok) {
      set_error("run completed with failing checks; see report");
      return QBEAT_ERR_CHECK_FAILED;
    }
    return QBEAT_OK;
  } catch (const std::exception& e) {
    set_error(e.what());
    return QBEAT_ERR_RUNTIME;
  }
}

int qbeat_report_ok(const qbeat_report* rep) {
  return rep && rep->rep.ok ? 1 : 0;
}

size_t qbeat_report_line_count(const qbeat_report* rep) {
  return rep ? rep->rep.lines.size() : 0;
}

const char* qbeat_report_line(const qbeat_report* rep, size_t index) {
  if (!rep || index >= rep->rep.lines.size()) return nullptr;
  return rep->rep.lines[index].c_str();
}

void qbeat_report_free(qbeat_report* rep) { delete rep; }

double qbeat_delta_jump(double g, double alpha2, double delta, double gamma) {
  return qbeat::delta_jump(g, alpha2, delta, gamma);
}

double qbeat_gamma_decoh(double g, double alpha2, double delta, double gamma) {
  return qbeat::gamma_decoh(g, alpha2, delta, gamma);
}

double qbeat_ac_stark(double g, double alpha2, double delta, double gamma) {
  return qbeat::ac_stark(g, alpha2, delta, gamma);
}

qbeat_status qbeat_resolvedness(double g, double alpha2, double delta,
                                double gamma, double* out) {
  if (!out) return QBEAT_ERR_INVALID_ARGUMENT;
  return guarded([&] {
    *out = qbeat::resolvedness(g, alpha2, delta, gamma);
    return QBEAT_OK;
  });
}

}  // extern "C"

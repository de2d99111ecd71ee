/* qbeat C API: quantum-beat cavity-QED simulator.
 *
 * The core is a C++ library; this header is the stable boundary used by the
 * CLI and by external callers. Handles are opaque; every function returns a
 * qbeat_status (QBEAT_OK on success) and the last error message is available
 * per thread via qbeat_last_error().
 */
#ifndef QBEAT_H
#define QBEAT_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum qbeat_status {
  QBEAT_OK = 0,
  QBEAT_ERR_INVALID_ARGUMENT = 1,
  QBEAT_ERR_CONFIG = 2,
  QBEAT_ERR_RUNTIME = 3,
  QBEAT_ERR_CHECK_FAILED = 4 /* run finished but an internal check failed */
} qbeat_status;

typedef struct qbeat_config qbeat_config;
typedef struct qbeat_report qbeat_report;

const char* qbeat_version(void);

/* Thread-local message describing the most recent error. */
const char* qbeat_last_error(void);

/* --- configuration -------------------------------------------------------- */

/* All-defaults configuration. */
qbeat_status qbeat_config_create(qbeat_config** out);
/* Parse a flat `section.key = value` file / text buffer. */
qbeat_status qbeat_config_load(const char* path, qbeat_config** out);
qbeat_status qbeat_config_parse(const char* text, qbeat_config** out);
/* Single-key override, e.g. ("ensemble.seed", "42"). */
qbeat_status qbeat_config_set(qbeat_config* cfg, const char* key,
                              const char* value);
/* Resolved value of a key; the returned pointer stays valid until the next
 * call on the same handle. */
const char* qbeat_config_get(qbeat_config* cfg, const char* key);
/* 16-hex-digit hash of the resolved configuration (worker count excluded). */
const char* qbeat_config_hash(qbeat_config* cfg);
void qbeat_config_free(qbeat_config* cfg);

/* --- experiments ----------------------------------------------------------- */

/* Runs a subcommand ("validate", "beat", "scan-epsilon", "scan-photon",
 * "theory"); artifacts are written into out_dir. Returns QBEAT_OK when the
 * run completed and every internal check passed, QBEAT_ERR_CHECK_FAILED when
 * it completed with failing checks. A report handle is returned either way
 * unless a hard error occurs. */
qbeat_status qbeat_run(qbeat_config* cfg, const char* subcommand,
                       const char* out_dir, qbeat_report** out_report);

int qbeat_report_ok(const qbeat_report* rep);
size_t qbeat_report_line_count(const qbeat_report* rep);
const char* qbeat_report_line(const qbeat_report* rep, size_t index);
void qbeat_report_free(qbeat_report* rep);

/* --- closed-form beat theory ------------------------------------------------
 * Rates in rad/us; alpha2 is the mean intracavity photon number. */
double qbeat_delta_jump(double g, double alpha2, double delta, double gamma);
double qbeat_gamma_decoh(double g, double alpha2, double delta, double gamma);
double qbeat_ac_stark(double g, double alpha2, double delta, double gamma);
/* Returns QBEAT_ERR_INVALID_ARGUMENT at delta == 0. */
qbeat_status qbeat_resolvedness(double g, double alpha2, double delta,
                                double gamma, double* out);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* QBEAT_H */

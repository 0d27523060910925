/*
Copyright 2026 The umbilic authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

/*
 * C interface to the principal-curvature analysis library.
 *
 * A session wraps one validated configuration and, after umb_session_run,
 * the report document and rendered artifacts it produced. All strings
 * returned through char** out-parameters are heap copies owned by the
 * caller; release them with umb_string_free. Strings returned as plain
 * const char* stay owned by the library (or the session) and are valid
 * until the next call on the same handle. Sessions are not thread-safe;
 * use one per thread.
 */

#ifndef UMBILIC_H
#define UMBILIC_H

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes double as process exit codes at the CLI boundary. */
enum umb_status {
    UMB_OK = 0,
    /* Invalid configuration or expression syntax. */
    UMB_ERR_CONFIG = 2,
    /* A computation stage failed; a partial report is still available. */
    UMB_ERR_COMPUTE = 3
};

typedef struct umb_session umb_session;

/* Library version as a semver string (static storage). */
const char* umb_version(void);

/*
 * Create a session from a JSON configuration. overrides_json may be NULL
 * or a JSON object merged over the configuration (RFC 7386 merge patch)
 * before validation; the CLI uses it for flag overrides. On failure *out
 * is NULL and umb_last_error(NULL) describes the problem.
 */
int umb_session_create(const char* config_json, const char* overrides_json, umb_session** out);

void umb_session_destroy(umb_session* session);

/*
 * Execute the configured analysis. Returns UMB_OK, or UMB_ERR_COMPUTE
 * when a stage failed; either way the report (with any error entries) and
 * artifacts are available afterwards.
 */
int umb_session_run(umb_session* session);

/*
 * Serialized report of the last run: UTF-8 JSON, keys sorted, byte
 * identical across reruns of the same configuration (unless timings are
 * enabled). Fails with UMB_ERR_CONFIG before the first run.
 */
int umb_session_report(umb_session* session, char** out_json);

/* Configured file name of the report, relative to an output directory. */
const char* umb_session_report_name(umb_session* session);

/* Rendered artifacts (SVG portraits) of the last run. */
int umb_session_artifact_count(umb_session* session);
const char* umb_session_artifact_name(umb_session* session, int index);
int umb_session_artifact_content(umb_session* session, int index, char** out);

/*
 * Message of the last failure on the session, or of the last failed
 * umb_session_create when session is NULL. Empty string when none.
 */
const char* umb_last_error(const umb_session* session);

/* Evaluate a surface expression at (u, v) for a parameter value lambda. */
int umb_eval_expression(const char* expression, double u, double v, double lambda, double* out);

/*
 * Classify an umbilic from the 15 Taylor coefficients of a height
 * function over a chart at the point, packed by total degree:
 *   [h, hu, hv, huu, huv, hvv, huuu, huuv, huvv, hvvv,
 *    huuuu, huuuv, huuvv, huvvv, hvvvv].
 * Writes a JSON record {label, delta, chi, transversal, tangent_stratum,
 * curvature} (delta and chi are null where no finite value exists).
 */
int umb_classify_height_jet(const double derivs[15], char** out_json);

void umb_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif /* UMBILIC_H */

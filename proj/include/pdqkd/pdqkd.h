/* C interface to the passive decoy-state QKD rate library.
 *
 * Scenarios are built from scheme defaults or key-value config text,
 * adjusted with pdq_scenario_set, and passed to the run functions, which
 * return opaque results carrying CSV and/or JSON renderings. All handles
 * are owned by the caller and released with the matching _free call.
 */
#ifndef PDQKD_H
#define PDQKD_H

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pdq_status {
  PDQ_OK = 0,
  PDQ_ERR_INTERNAL = 1,
  PDQ_ERR_INVALID_CONFIG = 2,
  PDQ_ERR_VERIFICATION = 3,
  PDQ_ERR_NONCONVERGENCE = 4,
  PDQ_ERR_DOMAIN = 5,
  PDQ_ERR_ESTIMATION = 6
} pdq_status;

typedef struct pdq_scenario pdq_scenario;
typedef struct pdq_result pdq_result;

const char* pdq_version(void);

/* Message for the most recent failure on this thread. */
const char* pdq_last_error(void);

/* Scheme names: thermal-threshold, thermal-pnr, wcp-threshold, wcp-pnr,
 * strong-classical, active-one-decoy, active-asymptotic. */
pdq_status pdq_scenario_create(const char* scheme, pdq_scenario** out);
pdq_status pdq_scenario_parse(const char* config_text, pdq_scenario** out);
pdq_status pdq_scenario_load(const char* path, pdq_scenario** out);
pdq_status pdq_scenario_set(pdq_scenario* sc, const char* key,
                            const char* value);
void pdq_scenario_free(pdq_scenario* sc);

/* Distance sweep with per-point optimization; result has CSV and JSON. */
pdq_status pdq_run_sweep(const pdq_scenario* sc, pdq_result** out);

/* Cutoff-distance search; result JSON carries the boundary point. The
 * headline value is the cutoff in km (-1 when no cutoff was found). */
pdq_status pdq_run_cutoff(const pdq_scenario* sc, pdq_result** out);

/* Parameter optimization at one distance; headline value is the rate. */
pdq_status pdq_run_optimize(const pdq_scenario* sc, double distance_km,
                            pdq_result** out);

/* Consistency checks (sign conditions, closed forms vs oracles, Monte
 * Carlo, PNR round trip). Returns PDQ_ERR_VERIFICATION when any check
 * fails; *out is still populated with the report. */
pdq_status pdq_run_verify(const pdq_scenario* sc, pdq_result** out);

/* NULL when the result has no tabular form. */
const char* pdq_result_csv(const pdq_result* res);
const char* pdq_result_json(const pdq_result* res);
double pdq_result_value(const pdq_result* res);
void pdq_result_free(pdq_result* res);

#ifdef __cplusplus
}
#endif

#endif /* PDQKD_H */

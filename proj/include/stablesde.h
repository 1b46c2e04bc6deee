/* stablesde: simulation of SDEs driven by symmetric alpha-stable processes
 * with non-Lipschitz coefficients.
 *
 * C interface to the shared library. All functions return a status code;
 * on failure ssde_last_error() holds a message for the calling thread.
 * Handles are opaque and must be released with the matching _destroy call.
 */
#ifndef STABLESDE_H
#define STABLESDE_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

typedef enum ssde_status {
    SSDE_OK = 0,
    SSDE_ERR_PARAMETER = 1,
    SSDE_ERR_GRID = 2,
    SSDE_ERR_ALIGNMENT = 3,
    SSDE_ERR_CERTIFICATE = 4,
    SSDE_ERR_FEASIBILITY = 5,
    SSDE_ERR_NUMERICAL = 6,
    SSDE_ERR_CONFIG = 7,
    SSDE_ERR_UNKNOWN = 8
} ssde_status;

const char* ssde_version(void);

/* Message describing the last failure on the calling thread. */
const char* ssde_last_error(void);

/* Caps worker parallelism for all subsequent runs; 0 = machine default. */
void ssde_set_max_threads(unsigned n);

/* Runs one batch subcommand (sample-stable, simulate, converge, stability,
 * stability-bo, verify-generator, cauchy, tail-check) from a JSON config,
 * writing CSV/JSON artifacts under out_dir. report_exit_code receives 0 on
 * PASS/complete and 2 on a FAIL report. summary_json (optional) receives a
 * malloc'd JSON summary; release it with ssde_string_free. */
ssde_status ssde_run(const char* subcommand, const char* config_json, const char* out_dir,
                     int* report_exit_code, char** summary_json);

void ssde_string_free(char* str);

/* K_alpha = -2 pi cot(alpha pi / 2) / alpha for alpha in (1,2). */
ssde_status ssde_k_alpha(double alpha, double* out);

/* p_s(a), the transition density of Z(s); alpha in (0,2], s > 0. */
ssde_status ssde_transition_density(double s, double a, double alpha, double* out);

/* --- stable sampler (one replication stream) ------------------------------ */

typedef struct ssde_sampler ssde_sampler;

ssde_status ssde_sampler_create(uint64_t master_seed, uint64_t replication_index, double alpha,
                                ssde_sampler** out);
ssde_status ssde_sampler_draw(ssde_sampler* sampler, double* out);
void ssde_sampler_destroy(ssde_sampler* sampler);

/* --- mollifier family (Komatsu machinery) --------------------------------- */

typedef struct ssde_mollifier ssde_mollifier;

/* variant 0: Komatsu cap 1/(m rho) with rho(x) = rho_coefficient * x;
 * variant 1: Belfadli-Ouknine cap 1/(m x). */
ssde_status ssde_mollifier_create(int variant, double rho_coefficient, double alpha, int m,
                                  ssde_mollifier** out);
ssde_status ssde_mollifier_phi(const ssde_mollifier* moll, double x, double* out);
ssde_status ssde_mollifier_u(const ssde_mollifier* moll, double x, double* out);
ssde_status ssde_mollifier_support(const ssde_mollifier* moll, double* a_m, double* a_m_minus_1);
void ssde_mollifier_destroy(ssde_mollifier* moll);

#ifdef __cplusplus
}
#endif

#endif /* STABLESDE_H */

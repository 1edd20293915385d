/*
 * hola - higher-order Laplace approximations for mixed-model likelihoods.
 *
 * C interface to the shared library.  All functions return a status code
 * (HOLA_OK on success); hola_last_error() describes the most recent failure
 * on the calling thread.  Objects are opaque handles released with their
 * matching _destroy function; strings returned through char** are released
 * with hola_free().
 */
#ifndef HOLA_H
#define HOLA_H

#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define HOLA_OK 0
#define HOLA_ERR_INVALID_ARGUMENT 1
#define HOLA_ERR_PARSE 2
#define HOLA_ERR_NUMERIC 3
#define HOLA_ERR_IO 4
#define HOLA_ERR_ORACLE 5

/* Oracle method selectors for hola_model_exact_loglik. */
#define HOLA_ORACLE_AUTO 0
#define HOLA_ORACLE_FACTORIZED 1
#define HOLA_ORACLE_TENSOR 2

/* Parameterization selectors for hola_model_set_parameterization. */
#define HOLA_PARAM_COLLAPSED 0
#define HOLA_PARAM_ORIGINAL 1

typedef struct hola_model hola_model;
typedef struct hola_fit hola_fit;

const char* hola_version(void);

/* Message for the last error raised on this thread; empty string if none. */
const char* hola_last_error(void);

void hola_free(void* ptr);

/* ---- model -------------------------------------------------------- */

/* Create a model from a JSON specification (family, beta, sigma2,
 * cluster_sizes, hierarchy, seed).  The model carries no responses until
 * one of hola_model_simulate / hola_model_read_csv runs. */
int hola_model_create_from_json(const char* json_text, hola_model** out);
int hola_model_create_from_file(const char* path, hola_model** out);
void hola_model_destroy(hola_model* model);

int hola_model_dim(const hola_model* model, int* out_dim);
int hola_model_num_obs(const hola_model* model, int64_t* out_n);
int hola_model_levels(const hola_model* model, int* out_levels);

/* Simulate responses (and covariates, when beta has more than one entry).
 * Deterministic in the seed. */
int hola_model_simulate(hola_model* model, uint64_t seed);

int hola_model_write_csv(const hola_model* model, const char* path);
int hola_model_read_csv(hola_model* model, const char* path);

/* Choose which parameterization later fits use: collapsed (one effect per
 * level-2 cluster; the default) or original (separate intercepts per
 * level). */
int hola_model_set_parameterization(hola_model* model, int parameterization);

/* Exact log-likelihood by quadrature.  method is one of the HOLA_ORACLE_*
 * selectors, nodes_per_dim 0 for defaults.  out_error_estimate receives the
 * node-refinement discrepancy. */
int hola_model_exact_loglik(const hola_model* model, int method, int nodes_per_dim,
                            double* out_value, double* out_error_estimate);

/* ---- approximation ------------------------------------------------ */

/* Minimize the integrand exponent and assemble approximations up to the
 * given order (1..3). */
int hola_fit_create(const hola_model* model, int order, hola_fit** out);
void hola_fit_destroy(hola_fit* fit);

/* Order-k approximation to the log-likelihood, k <= the order fitted. */
int hola_fit_log_integral(const hola_fit* fit, int k, double* out_value);

/* Level-l series correction, 1 <= l <= order - 1. */
int hola_fit_level_term(const hola_fit* fit, int level, double* out_value);

int hola_fit_mode_dim(const hola_fit* fit, int* out_dim);
int hola_fit_mode(const hola_fit* fit, double* out_buffer, int buffer_len);

/* Row-sum norms of the normalized derivative arrays: out_deriv_norms[k-3]
 * receives the order-k norm for k = 3..max_order, out_inv2_norm the norm of
 * the normalized inverse Hessian. */
int hola_fit_condition_norms(const hola_fit* fit, int max_order,
                             double* out_deriv_norms, double* out_inv2_norm);

/* ---- bipartition catalog ------------------------------------------ */

/* CSV catalog of connected bipartition classes for levels 1..max_level
 * (columns: level,v,m,multiplicity,p_blocks,q_blocks). */
int hola_bipartition_catalog_csv(int max_level, char** out_csv);

#ifdef __cplusplus
}
#endif

#endif /* HOLA_H */

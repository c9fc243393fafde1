/* C interface to the pelhd library. All functions return a pelhd_status;
 * on failure pelhd_last_error() describes the problem (per thread). */
#ifndef PELHD_PELHD_H
#define PELHD_PELHD_H

#include <stddef.h>
#include <stdint.h>

#if defined(PELHD_BUILDING_LIBRARY)
#define PELHD_API __attribute__((visibility("default")))
#else
#define PELHD_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum pelhd_status {
    PELHD_OK = 0,
    PELHD_ERR_INVALID_ARGUMENT = 1,
    PELHD_ERR_DIMENSION = 2,
    PELHD_ERR_DOMAIN = 3,
    PELHD_ERR_CONFIG = 4,
    PELHD_ERR_NUMERIC = 5,
    PELHD_ERR_CONVERGENCE = 6,
    PELHD_ERR_REGIME = 7,
    PELHD_ERR_IO = 8,
    PELHD_ERR_INTERNAL = 9
} pelhd_status;

typedef enum pelhd_kind { PELHD_KIND_NE = 0, PELHD_KIND_LRD = 1, PELHD_KIND_SRD = 2 } pelhd_kind;

typedef enum pelhd_regime { PELHD_REGIME_NON_ERGODIC = 0, PELHD_REGIME_ERGODIC = 1 } pelhd_regime;

typedef struct pelhd_dependence {
    pelhd_kind kind;
    double alpha;  /* lrd only */
    double ar[2];  /* srd only */
    double ma[3];
    int burn_in;
} pelhd_dependence;

typedef struct pelhd_matrix pelhd_matrix;
typedef struct pelhd_curve pelhd_curve;
typedef struct pelhd_experiment pelhd_experiment;

typedef struct pelhd_test_report {
    double statistic;
    double raw_statistic;
    double threshold;
    int rejected;
    int limit_kind; /* 0 non-ergodic, 1 lrd non-normal, 2 boundary, 3 normal */
    double alpha_hat;
    int m;
    uint64_t seed_used;
} pelhd_test_report;

PELHD_API const char* pelhd_version(void);
PELHD_API const char* pelhd_last_error(void);
PELHD_API const char* pelhd_status_name(pelhd_status status);
PELHD_API void pelhd_string_free(char* s);

/* Matrices: n rows (observations) by p columns (components), row-major I/O. */
PELHD_API pelhd_status pelhd_matrix_create(size_t n, size_t p, const double* row_major, pelhd_matrix** out);
PELHD_API pelhd_status pelhd_matrix_parse_csv(const char* text, pelhd_matrix** out);
PELHD_API pelhd_status pelhd_matrix_read_csv(const char* path, pelhd_matrix** out);
PELHD_API size_t pelhd_matrix_rows(const pelhd_matrix* m);
PELHD_API size_t pelhd_matrix_cols(const pelhd_matrix* m);
PELHD_API pelhd_status pelhd_matrix_copy(const pelhd_matrix* m, double* row_major_out);
PELHD_API pelhd_status pelhd_matrix_column_means(const pelhd_matrix* m, double* out);
PELHD_API void pelhd_matrix_free(pelhd_matrix* m);

PELHD_API pelhd_dependence pelhd_dependence_default(pelhd_kind kind);
PELHD_API pelhd_status pelhd_simulate(const pelhd_dependence* dep, int n, int p, uint64_t seed, pelhd_matrix** out);
/* CSV with the "# n= p= kind= seed=" header line; free with pelhd_string_free. */
PELHD_API pelhd_status pelhd_simulate_csv(const pelhd_dependence* dep, int n, int p, uint64_t seed, char** out);
PELHD_API pelhd_status pelhd_exact_kappa_sq(const pelhd_dependence* dep, double c_star, double* out);

/* -log R_n(mu0); mu0 has p entries. pi_out (n entries) may be NULL. */
PELHD_API pelhd_status pelhd_stat(const pelhd_matrix* data, const double* mu0, double c_star, double* out);
PELHD_API pelhd_status pelhd_solve(const pelhd_matrix* data, const double* mu0, double c_star, double* stat_out,
                                   double* pi_out, int* iterations_out);

PELHD_API pelhd_status pelhd_subsample_size(int n, int p, const char* rule, double c0, double alpha, int* out);
PELHD_API pelhd_status pelhd_curve_build(const pelhd_matrix* data, const double* mu0, int m, pelhd_regime regime,
                                         double alpha_hat, double c_star, int threads, pelhd_curve** out);
PELHD_API size_t pelhd_curve_size(const pelhd_curve* c);
PELHD_API size_t pelhd_curve_failed(const pelhd_curve* c);
PELHD_API pelhd_status pelhd_curve_sorted_values(const pelhd_curve* c, double* out);
PELHD_API pelhd_status pelhd_curve_quantile(const pelhd_curve* c, double q, double* out);
PELHD_API pelhd_status pelhd_curve_csv(const pelhd_curve* c, char** out);
PELHD_API void pelhd_curve_free(pelhd_curve* c);

/* Full calibrated test; alpha is estimated from the data in the ergodic regime. */
PELHD_API pelhd_status pelhd_test(const pelhd_matrix* data, const double* mu0, pelhd_regime regime, int m,
                                  double level, double c_star, int threads, pelhd_test_report* out);

PELHD_API pelhd_status pelhd_estimate_alpha_invariant(const pelhd_matrix* data, double* out);
PELHD_API pelhd_status pelhd_estimate_alpha_hurst(const pelhd_matrix* data, double* out);
PELHD_API pelhd_status pelhd_estimate_kappa_sq_invariant(const pelhd_matrix* data, double c_star, double* out);
PELHD_API pelhd_status pelhd_estimate_kappa_sq_plugin(const pelhd_matrix* data, double c_star, double* out);

/* Reference laws; out holds n_draws values. */
PELHD_API pelhd_status pelhd_sample_ne_limit(int q, double c_star, int n_draws, uint64_t seed, double* out);
PELHD_API pelhd_status pelhd_sample_ne_limit_grid(const double* rho0_grid, int q, double c_star, int n_draws,
                                                  uint64_t seed, double* out);
PELHD_API pelhd_status pelhd_sample_lrd_limit(double alpha, int p_surrogate, double c_star, int n_draws,
                                              uint64_t seed, double* out);
PELHD_API double pelhd_normal_quantile(double q);

/* Experiments from flat key = value config text. */
PELHD_API pelhd_status pelhd_experiment_load(const char* path, pelhd_experiment** out);
PELHD_API pelhd_status pelhd_experiment_parse(const char* text, pelhd_experiment** out);
PELHD_API pelhd_status pelhd_experiment_set_seed(pelhd_experiment* e, uint64_t seed);
PELHD_API pelhd_status pelhd_experiment_set_threads(pelhd_experiment* e, int threads);
/* Output path from the config, or "" when unset. Owned by the handle. */
PELHD_API const char* pelhd_experiment_output_path(const pelhd_experiment* e);
PELHD_API pelhd_status pelhd_experiment_hash(const pelhd_experiment* e, char** out);
PELHD_API pelhd_status pelhd_experiment_run(const pelhd_experiment* e, char** csv_out);
PELHD_API void pelhd_experiment_free(pelhd_experiment* e);

#ifdef __cplusplus
}
#endif

#endif

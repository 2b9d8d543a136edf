/* C interface to the stackgibbs library. Opaque handles, status codes, and a
 * thread-local message for the last failure. */
#ifndef STACKGIBBS_H
#define STACKGIBBS_H

#include <stddef.h>
#include <stdint.h>

#if defined(SGP_BUILDING_LIBRARY)
#define SGP_API __attribute__((visibility("default")))
#else
#define SGP_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum sgp_status {
    SGP_OK = 0,
    SGP_ERR_VALIDATION = 1,
    SGP_ERR_IO = 2,
    SGP_ERR_NUMERICAL = 3,
    SGP_ERR_INTERNAL = 4
} sgp_status;

/* Message of the most recent failure on this thread ("" after success). */
SGP_API const char* sgp_last_error(void);
SGP_API const char* sgp_version(void);

/* ---- scoring ---- */
SGP_API sgp_status sgp_crps_normal(double mu, double sigma, double y, double* out);
SGP_API sgp_status sgp_crps_normal_mixture(size_t c, const double* mus, const double* sigmas,
                                           const double* weights, double y, double* out);
SGP_API sgp_status sgp_log_score(double pdf_at_y, double* out);
SGP_API sgp_status sgp_interval_score(double lower, double upper, double alpha, double y, double* out);
SGP_API sgp_status sgp_weighted_interval_score(size_t k, const double* probs, const double* values,
                                               double y, double* out);
SGP_API sgp_status sgp_uwd1(size_t n, const double* pit, double* out);
SGP_API sgp_status sgp_eqw_weights(size_t c, double* out);

/* ---- sampler settings shared by fit, tune and the pipelines ---- */
typedef struct sgp_fit_options {
    double eta;                    /* SGP learning rate */
    const double* dirichlet_alpha; /* NULL = all ones */
    size_t dirichlet_alpha_len;
    int chains;
    int draws_per_chain;           /* including burn-in */
    int burn_in;
    uint64_t seed;
    double step_scale;
    double discount;               /* dynamic risk, BMA and AVS */
    double avs_eta;
    double strong_prior;           /* Dirichlet parameter used by SGP50 */
    size_t mc_samples;             /* Monte Carlo CRPS draws per component */
} sgp_fit_options;

SGP_API void sgp_fit_options_default(sgp_fit_options* opt);

/* ---- forecast sets (forecast CSV + truth CSV) ---- */
typedef struct sgp_forecast_set sgp_forecast_set;

SGP_API sgp_status sgp_forecast_set_load(const char* forecasts_csv, const char* truth_csv,
                                         sgp_forecast_set** out);
SGP_API void sgp_forecast_set_free(sgp_forecast_set* set);
SGP_API sgp_status sgp_forecast_set_dims(const sgp_forecast_set* set, size_t* components,
                                         size_t* observations, int* dynamic);
/* Pointer stays valid for the lifetime of the set. */
SGP_API sgp_status sgp_forecast_set_component_name(const sgp_forecast_set* set, size_t i,
                                                   const char** out);
/* metric: crps, logs or wis. weights may be NULL (components only). */
SGP_API sgp_status sgp_forecast_set_score(const sgp_forecast_set* set, const char* metric,
                                          const double* weights, const sgp_fit_options* opt,
                                          const char* out_csv);

/* ---- posterior draws ---- */
typedef struct sgp_posterior sgp_posterior;

SGP_API sgp_status sgp_posterior_read_csv(const char* path, sgp_posterior** out);
SGP_API sgp_status sgp_posterior_write_csv(const sgp_posterior* p, const char* path);
SGP_API sgp_status sgp_posterior_dims(const sgp_posterior* p, size_t* draws, size_t* components,
                                      size_t* chains);
SGP_API sgp_status sgp_posterior_mean(const sgp_posterior* p, double* out);
/* rhat and ess hold `components` values each; accept may be NULL. */
SGP_API sgp_status sgp_posterior_diagnostics(const sgp_posterior* p, double* rhat, double* ess,
                                             double* accept);
SGP_API void sgp_posterior_free(sgp_posterior* p);

/* ---- fitting ---- */
/* method: sgp, sgp50, avs, bma or eqw. weights_out holds C values.
 * posterior_out (may be NULL) receives the draws for sgp and sgp50. */
SGP_API sgp_status sgp_fit_forecast_set(const sgp_forecast_set* set, const char* method,
                                        const sgp_fit_options* opt, double* weights_out,
                                        sgp_posterior** posterior_out);
/* Score panel CSV (t, component, crps, loglik); avs, bma or eqw.
 * capacity is the length of weights_out; components receives C. */
SGP_API sgp_status sgp_fit_score_panel(const char* panel_csv, const char* method,
                                       const sgp_fit_options* opt, double* weights_out,
                                       size_t capacity, size_t* components);
/* Held-out CRPS over the grid (cv_out may be NULL); iid sets only. */
SGP_API sgp_status sgp_tune_eta(const sgp_forecast_set* set, const char* method, const double* grid,
                                size_t grid_len, size_t folds, const sgp_fit_options* opt,
                                double* best_eta, double* cv_out);

/* ---- studies and the hub pipeline ----
 * Settings are passed as key/value string pairs; unknown keys are rejected. */
SGP_API sgp_status sgp_run_study(const char* study, const char* methods, const char* const* keys,
                                 const char* const* values, size_t n_settings, uint64_t seed,
                                 size_t threads, const char* long_csv, const char* summary_csv);
SGP_API sgp_status sgp_run_hub(const char* hub_csv, const char* truth_csv, const char* methods,
                               const char* const* keys, const char* const* values, size_t n_settings,
                               uint64_t seed, size_t threads, const char* out_dir);
SGP_API sgp_status sgp_write_synthetic_hub(const char* const* keys, const char* const* values,
                                           size_t n_settings, uint64_t seed, const char* hub_csv,
                                           const char* truth_csv);

#ifdef __cplusplus
}
#endif

#endif

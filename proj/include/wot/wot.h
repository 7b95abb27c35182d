#ifndef WOT_WOT_H
#define WOT_WOT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef WOT_BUILDING_LIBRARY
#    define WOT_API __declspec(dllexport)
#  else
#    define WOT_API __declspec(dllimport)
#  endif
#else
#  define WOT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

/* Status codes. Values 2, 3 and 4 double as CLI exit codes. */
typedef enum wot_status {
  WOT_OK = 0,
  WOT_ERR_ARGUMENT = 1,
  WOT_ERR_CONFIG = 2,
  WOT_ERR_NUMERICAL = 3,
  WOT_ERR_INFEASIBLE = 4,
  WOT_ERR_IO = 5,
  WOT_ERR_GROWTH = 6,
  WOT_ERR_INTERNAL = 7
} wot_status;

typedef enum wot_regime { WOT_UNCONSTRAINED = 0, WOT_MARTINGALE = 1 } wot_regime;

typedef struct wot_measure wot_measure;
typedef struct wot_payoff wot_payoff;

/* Power cost scale * t^(1 - p/2) * v^p; timescale <= 0 means unscaled. */
typedef struct wot_cost {
  double power;
  double timescale;
  double scale;
} wot_cost;

typedef struct wot_search {
  int starts;
  double radius0;
  int max_radius_doublings;
  double step_tol;
  int grid_points;
  double p_clip;
  int max_evals;
  int has_floor;
  double floor;
} wot_search;

typedef struct wot_train {
  int epochs;
  int batch;
  int hidden;
  int width;
  double learning_rate;
  uint64_t seed;
  size_t eval_samples;
} wot_train;

typedef struct wot_estimate {
  double value;
  double std_error;
  size_t samples;
  uint64_t seed;
} wot_estimate;

typedef struct wot_bounds {
  double t;
  double lower;
  double lower_se;
  double reference;
  double reference_se;
  double upper;
  double upper_se;
} wot_bounds;

typedef struct wot_run_options {
  int has_seed;
  uint64_t seed;
  const char* out_dir; /* NULL keeps the configured directory */
  int reproducible;
  int epochs; /* <= 0 keeps the configured value */
} wot_run_options;

/* Message of the last failed call on this thread ("" if none). */
WOT_API const char* wot_last_error(void);
WOT_API const char* wot_version(void);

WOT_API void wot_search_defaults(wot_search* out);
WOT_API void wot_train_defaults(wot_train* out);
WOT_API void wot_run_options_defaults(wot_run_options* out);

/* Measures and payoffs are created from the same JSON objects as the
   "measure" and "payoff" config sections. */
WOT_API wot_status wot_measure_create(const char* json, wot_measure** out);
WOT_API void wot_measure_free(wot_measure* m);
WOT_API int wot_measure_dim(const wot_measure* m);
/* Writes n points, point-major: out[j * dim + i]. */
WOT_API wot_status wot_measure_sample(const wot_measure* m, size_t n, uint64_t seed, double* out);

/* dim is used by families whose dimension is not implied by the parameters. */
WOT_API wot_status wot_payoff_create(const char* json, int dim, wot_payoff** out);
WOT_API void wot_payoff_free(wot_payoff* f);
WOT_API int wot_payoff_dim(const wot_payoff* f);
WOT_API wot_status wot_payoff_eval(const wot_payoff* f, const double* x, size_t dim, double* out);
WOT_API wot_status wot_payoff_grad(const wot_payoff* f, const double* x, size_t dim, double* out);

/* search may be NULL for defaults. */
WOT_API wot_status wot_ctransform(const wot_payoff* f, wot_cost cost, wot_regime regime, const double* x, size_t dim,
                                  const wot_search* search, double* out);
WOT_API wot_status wot_rho_pointwise(const wot_measure* m, const wot_payoff* f, wot_cost cost, wot_regime regime,
                                     size_t n, uint64_t seed, const wot_search* search, wot_estimate* out);
WOT_API wot_status wot_rho_network(const wot_measure* m, const wot_payoff* f, wot_cost cost, wot_regime regime,
                                   const wot_train* train, wot_estimate* out);
/* Martingale bounds with cost scale * t^(1 - p/2) v^p, pointwise method. */
WOT_API wot_status wot_price_bounds(const wot_measure* m, const wot_payoff* f, double p, double t, double scale,
                                    size_t n, uint64_t seed, const wot_search* search, wot_bounds* out);
WOT_API double wot_bs_call(double spot, double strike, double vol, double maturity);

/* Runs a named experiment (earthquake, bull-spread, max-call, dim-sweep,
   ctransform-grid, moment-bounds). config_path and options may be NULL. When
   summary is non-NULL it receives the result JSON, released with
   wot_string_free. Returns WOT_ERR_INFEASIBLE when the quotes admit no model. */
WOT_API wot_status wot_run_experiment(const char* experiment, const char* config_path,
                                      const wot_run_options* options, char** summary);
WOT_API void wot_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif

#ifndef MSPORT_MSPORT_H
#define MSPORT_MSPORT_H

#include <stddef.h>
#include <stdint.h>

#if defined(_WIN32)
#  ifdef MSPORT_BUILDING
#    define MSPORT_API __declspec(dllexport)
#  else
#    define MSPORT_API __declspec(dllimport)
#  endif
#else
#  define MSPORT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum msport_status {
    MSPORT_OK = 0,
    MSPORT_INVALID_ARGUMENT = 1,
    MSPORT_IO_ERROR,
    MSPORT_PARSE_ERROR,
    MSPORT_MISSING_VALUE,
    MSPORT_NON_POSITIVE_PRICE,
    MSPORT_DUPLICATE_DATE,
    MSPORT_TOO_SHORT,
    MSPORT_SCALE_TOO_LARGE,
    MSPORT_BAD_PHASE,
    MSPORT_UNIVERSE_MISMATCH,
    MSPORT_DIMENSION_MISMATCH,
    MSPORT_PANEL_TOO_SHORT,
    MSPORT_SERIES_TOO_SHORT,
    MSPORT_BAD_LENGTH,
    MSPORT_BAD_SCHEDULE,
    MSPORT_BAD_DEPTH,
    MSPORT_NOT_PSD,
    MSPORT_ZERO_MOMENT,
    MSPORT_NON_POSITIVE_MOMENT,
    MSPORT_TOO_FEW_POINTS,
    MSPORT_DEGENERATE_SEGMENTS,
    MSPORT_ZERO_VOLATILITY,
    MSPORT_NO_POSITIVE_EXCESS_RETURN,
    MSPORT_SINGULAR_COVARIANCE,
    MSPORT_MAX_ITERATIONS,
    MSPORT_INFEASIBLE,
    MSPORT_EMBEDDING_FAILURE,
    MSPORT_CALIBRATION_FAILURE,
    MSPORT_SOLVER_FAILURE,
    MSPORT_INTERNAL_ERROR = 100
} msport_status;

/* 0 ok, 1 usage, 2 data, 3 numerical. Matches the CLI exit codes. */
MSPORT_API int msport_status_category(msport_status status);
MSPORT_API const char* msport_status_name(msport_status status);
/* Message of the last failed call on this thread; "" when none. */
MSPORT_API const char* msport_last_error(void);
MSPORT_API const char* msport_version(void);

typedef struct msport_panel msport_panel;
typedef struct msport_result msport_result;

/* Panels hold daily log returns derived from prices. */
MSPORT_API msport_status msport_panel_load_csv(const char* path, msport_panel** out);
MSPORT_API msport_status msport_panel_parse_csv(const char* text, msport_panel** out);
/* Row-major rows x assets log returns; ids may be NULL. */
MSPORT_API msport_status msport_panel_from_returns(const double* returns, size_t rows, size_t assets,
                                                   const char* const* ids, msport_panel** out);
MSPORT_API size_t msport_panel_rows(const msport_panel* panel);
MSPORT_API size_t msport_panel_assets(const msport_panel* panel);
MSPORT_API const char* msport_panel_asset_id(const msport_panel* panel, size_t index);
/* Copies rows x assets returns, row-major, into out (capacity in doubles). */
MSPORT_API msport_status msport_panel_returns(const msport_panel* panel, double* out, size_t capacity);
MSPORT_API msport_status msport_panel_write_prices_csv(const msport_panel* panel, const char* path);
MSPORT_API msport_status msport_panel_prices_csv(const msport_panel* panel, msport_result** out);
MSPORT_API void msport_panel_free(msport_panel* panel);

typedef struct msport_simulate_params {
    const char* kind; /* gaussian | fgn | correlated | epps | regime_switch | cascade */
    size_t length;
    uint64_t seed;
    size_t assets;
    double sigma_daily;
    double hurst;
    double rho;
    double rho_inf;
    double h_rho;
    double sigma_low;
    double sigma_high;
    const size_t* switch_points;
    size_t n_switch_points;
    double drift;
    double intermittency;
    const double* covariance; /* assets x assets, row-major, optional */
} msport_simulate_params;

MSPORT_API void msport_simulate_params_init(msport_simulate_params* params);
MSPORT_API msport_status msport_panel_simulate(const msport_simulate_params* params, msport_panel** out);

typedef struct msport_estimate_params {
    const char* method; /* sf | mfdfa */
    const int* scales;  /* NULL: method default */
    size_t n_scales;
    const double* q_grid; /* NULL: -4..4 without 0 */
    size_t n_q;
    int detrend_order;
    int pairs; /* nonzero: correlation scaling for every asset pair */
} msport_estimate_params;

MSPORT_API void msport_estimate_params_init(msport_estimate_params* params);
MSPORT_API msport_status msport_estimate(const msport_panel* panel, const msport_estimate_params* params,
                                         msport_result** out);

typedef struct msport_optimize_params {
    const int* scales; /* NULL: 1,2,5,10,21 */
    size_t n_scales;
    const char* covariance;  /* product | l1 */
    const char* aggregation; /* nonoverlapping | overlapping */
    const char* objective;   /* minvar | maxsharpe */
    int long_only;
    int has_mu_target;
    double mu_target; /* per-day mean log return floor */
    double risk_free; /* per day */
    double ridge;     /* < 0: 1e-8 * trace / N of the daily matrix */
} msport_optimize_params;

MSPORT_API void msport_optimize_params_init(msport_optimize_params* params);
MSPORT_API msport_status msport_optimize(const msport_panel* panel, const msport_optimize_params* params,
                                         msport_result** out);

typedef struct msport_backtest_params {
    int lookback;
    int rebalance_every;
    const int* scales; /* NULL: 1,2,5,10,21 */
    size_t n_scales;
    const char* covariance;  /* product | l1 */
    const char* strategies;  /* comma list, or "table" for the four table rows */
    double risk_free;
    int long_only;
} msport_backtest_params;

MSPORT_API void msport_backtest_params_init(msport_backtest_params* params);
MSPORT_API msport_status msport_backtest(const msport_panel* panel, const msport_backtest_params* params,
                                         msport_result** out);

MSPORT_API msport_status msport_repro(uint64_t seed, size_t series_length, msport_result** out);

/* Minimum-variance weights of an n x n row-major covariance. */
MSPORT_API msport_status msport_min_variance(const double* sigma, size_t n, int long_only, double* weights);

/* Named text artifacts: "json", "csv", "text", and per operation extras
 * ("covariance_csv" for optimize). NULL when absent. */
MSPORT_API const char* msport_result_get(const msport_result* result, const char* name);
MSPORT_API const char* msport_result_json(const msport_result* result);
MSPORT_API const char* msport_result_csv(const msport_result* result);
MSPORT_API const char* msport_result_text(const msport_result* result);
MSPORT_API void msport_result_free(msport_result* result);

#ifdef __cplusplus
}
#endif

#endif

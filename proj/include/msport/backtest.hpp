#pragma once

#include "msport/covariance.hpp"
#include "msport/timeseries.hpp"

#include <string>
#include <vector>

namespace msport {

enum class Strategy { EqualWeight, MarkowitzDaily, MarkowitzMultiscale, MaxSharpeDaily, MaxSharpeMultiscale };

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct BacktestConfig {
    int lookback = 125;
    int rebalance_every = 21;
    std::vector<int> scales = {1, 2, 5, 10, 21};
    CovOptions cov;
    Strategy strategy = Strategy::EqualWeight;
    double risk_free = 0.0;  // per day
    bool long_only = true;
    std::string label;  // display name; empty means the default for the strategy

    std::string display_name() const;
    /// Throws InvalidArgument for a bad schedule and ScaleTooLarge when the
    /// lookback window cannot support the largest scale.
    void validate() const;
};

struct Fallback {
    std::size_t rebalance = 0;
    std::string date;
    std::string code;
    std::string message;
};

struct PerformanceMetrics {
    double sharpe = 0.0;
    double sortino = 0.0;
    double max_drawdown = 0.0;
    double excess_kurtosis = 0.0;
};

struct BacktestReport {
    std::string strategy;
    BacktestConfig config;
    std::vector<std::string> asset_ids;
    std::vector<std::string> dates;  // dates[0] is the last estimation day
    std::vector<double> equity;      // equity[0] == 1
    PerformanceMetrics metrics;
    std::vector<std::string> rebalance_dates;
    std::vector<Vector> weights;  // target weights at each rebalance
    std::vector<double> turnover;
    std::vector<Fallback> fallbacks;
};

/// Walk-forward backtest. At each rebalance row t the weights are fitted on
/// base rows [t - lookback, t) and held (buy and hold, no costs) for the next
/// rebalance_every rows. Throws PanelTooShort unless rows > lookback +
/// rebalance_every.
BacktestReport run_backtest(const ReturnPanel& base, const BacktestConfig& cfg);

/// Weights a strategy would set from one estimation window.
Vector fit_weights(const ReturnPanel& window, const BacktestConfig& cfg);

/// Annualized Sharpe and Sortino (MAR 0) of the curve's log returns,
/// max drawdown of the compounded curve, excess kurtosis of the log returns.
/// Sortino is +inf when no return is negative. Throws ZeroVolatility for a
/// flat return series.
PerformanceMetrics metrics(const std::vector<double>& equity, double periods_per_year = 252.0);

struct ComparisonRow {
    std::string method;
    bool ok = false;
    std::string error;
    PerformanceMetrics metrics;
};

struct Comparison {
    std::vector<ComparisonRow> rows;
    std::vector<BacktestReport> reports;  // one per successful row, same order
};

/// Runs every config concurrently. Rows follow the table order Equally
/// Weighted, Traditional Markowitz, Multiscale Markowitz, Multiscale
/// Markowitz (Overlapping), then any others in config order.
Comparison compare(const ReturnPanel& base, const std::vector<BacktestConfig>& cfgs);

/// The four table strategies with default settings.
std::vector<BacktestConfig> table_configs(CovMethod method = CovMethod::Product);

std::string format_comparison_csv(const Comparison& c);
std::string format_comparison_table(const Comparison& c);

}  // namespace msport

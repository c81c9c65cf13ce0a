#include "msport/backtest.hpp"

#include "msport/error.hpp"
#include "msport/io.hpp"
#include "msport/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <future>
#include <limits>
#include <sstream>

namespace msport {

std::string to_string(Strategy s) {
    switch (s) {
        case Strategy::EqualWeight: return "equal_weight";
        case Strategy::MarkowitzDaily: return "markowitz_daily";
        case Strategy::MarkowitzMultiscale: return "markowitz_multiscale";
        case Strategy::MaxSharpeDaily: return "max_sharpe_daily";
        case Strategy::MaxSharpeMultiscale: return "max_sharpe_multiscale";
    }
    return "unknown";
}

Strategy parse_strategy(const std::string& name) {
    for (Strategy s : {Strategy::EqualWeight, Strategy::MarkowitzDaily, Strategy::MarkowitzMultiscale,
                       Strategy::MaxSharpeDaily, Strategy::MaxSharpeMultiscale})
        if (to_string(s) == name) return s;
    throw Error(ErrorCode::InvalidArgument,
                "unknown strategy '" + name +
                    "' (equal_weight|markowitz_daily|markowitz_multiscale|max_sharpe_daily|max_sharpe_multiscale)");
}

namespace {

bool is_multiscale(Strategy s) { return s == Strategy::MarkowitzMultiscale || s == Strategy::MaxSharpeMultiscale; }

}  // namespace

std::string BacktestConfig::display_name() const {
    if (!label.empty()) return label;
    std::string name;
    switch (strategy) {
        case Strategy::EqualWeight: return "Equally Weighted";
        case Strategy::MarkowitzDaily: name = "Traditional Markowitz"; break;
        case Strategy::MarkowitzMultiscale: name = "Multiscale Markowitz"; break;
        case Strategy::MaxSharpeDaily: name = "Traditional Max Sharpe"; break;
        case Strategy::MaxSharpeMultiscale: name = "Multiscale Max Sharpe"; break;
    }
    if (is_multiscale(strategy) && cov.aggregation == Aggregation::Overlapping) name += " (Overlapping)";
    if (cov.method == CovMethod::L1) name += " (L1)";
    return name;
}

void BacktestConfig::validate() const {
    if (rebalance_every < 1) throw Error(ErrorCode::InvalidArgument, "rebalance_every must be >= 1");
    if (lookback < 4) throw Error(ErrorCode::InvalidArgument, "lookback must be >= 4");
    if (!std::isfinite(risk_free)) throw Error(ErrorCode::InvalidArgument, "risk_free must be finite");
    if (!is_multiscale(strategy)) return;
    if (scales.empty()) throw Error(ErrorCode::InvalidArgument, "scale list is empty");
    const int top = *std::max_element(scales.begin(), scales.end());
    if (*std::min_element(scales.begin(), scales.end()) < 1) throw Error(ErrorCode::InvalidArgument, "scales must be >= 1");
    if (lookback < 4 * top)
        throw Error(ErrorCode::ScaleTooLarge, "lookback " + std::to_string(lookback) + " is below 4 x largest scale " +
                                                  std::to_string(top));
    for (int dt : scales) require_estimable_scale(lookback, dt, cov.aggregation == Aggregation::Overlapping);
}

Vector fit_weights(const ReturnPanel& window, const BacktestConfig& cfg) {
    const Eigen::Index n = window.assets();
    if (cfg.strategy == Strategy::EqualWeight) return Vector::Constant(n, 1.0 / static_cast<double>(n));

    const std::vector<int> scales = is_multiscale(cfg.strategy) ? cfg.scales : std::vector<int>{1};
    const ScaledCovarianceSet set = build_covariance_set(window, scales, cfg.cov);
    const MultiscaleCovariance ms = multiscale_cov(set, default_ridge(cov_at_scale(window, 1, cfg.cov).matrix));

    if (cfg.strategy == Strategy::MarkowitzDaily || cfg.strategy == Strategy::MarkowitzMultiscale)
        return cfg.long_only ? min_variance_long_only(ms).w : min_variance_closed_form(ms).w;
    const Vector mu = window.returns.colwise().mean().transpose();
    return max_sharpe(ms.matrix, mu, cfg.risk_free, cfg.long_only).w;
}

BacktestReport run_backtest(const ReturnPanel& base, const BacktestConfig& cfg) {
    cfg.validate();
    const Eigen::Index T = base.rows();
    const Eigen::Index n = base.assets();
    if (T <= static_cast<Eigen::Index>(cfg.lookback) + cfg.rebalance_every)
        throw Error(ErrorCode::PanelTooShort, "panel has " + std::to_string(T) + " rows; need more than lookback " +
                                                  std::to_string(cfg.lookback) + " + rebalance " +
                                                  std::to_string(cfg.rebalance_every));
    if (n == 0) throw Error(ErrorCode::PanelTooShort, "panel has no assets");

    BacktestReport rep;
    rep.strategy = cfg.display_name();
    rep.config = cfg;
    rep.asset_ids = base.asset_ids;
    const auto date_of = [&](Eigen::Index t) {
        return static_cast<std::size_t>(t) < base.timestamps.size() ? base.timestamps[static_cast<std::size_t>(t)]
                                                                    : std::to_string(t);
    };
    rep.dates.push_back(date_of(cfg.lookback - 1));
    rep.equity.push_back(1.0);

    Vector held = Vector::Zero(n);  // fractions of current equity
    Vector target;
    double equity = 1.0;
    for (Eigen::Index t = cfg.lookback; t < T; ++t) {
        if ((t - cfg.lookback) % cfg.rebalance_every == 0) {
            const ReturnPanel window = select_rows(base, t - cfg.lookback, t);
            Vector w;
            try {
                w = fit_weights(window, cfg);
            } catch (const Error& e) {
                rep.fallbacks.push_back({rep.weights.size(), date_of(t), std::string(error_code_name(e.code())), e.what()});
                w = target.size() == n ? target : Vector::Constant(n, 1.0 / static_cast<double>(n));
            }
            rep.turnover.push_back((w - held).cwiseAbs().sum());
            rep.rebalance_dates.push_back(date_of(t));
            rep.weights.push_back(w);
            target = w;
            held = w;
        }
        const Vector growth = base.returns.row(t).transpose().array().exp();
        const double factor = held.dot(growth);
        equity *= factor;
        held = held.cwiseProduct(growth) / factor;
        rep.dates.push_back(date_of(t));
        rep.equity.push_back(equity);
    }
    rep.metrics = metrics(rep.equity);
    return rep;
}

PerformanceMetrics metrics(const std::vector<double>& equity, double periods_per_year) {
    if (equity.size() < 3) throw Error(ErrorCode::TooShort, "equity curve needs at least 3 points");
    for (std::size_t t = 0; t < equity.size(); ++t)
        if (!(equity[t] > 0.0) || !std::isfinite(equity[t]))
            throw Error(ErrorCode::NonPositivePrice, "equity point " + std::to_string(t) + " is not positive");

    const std::size_t n = equity.size() - 1;
    std::vector<double> r(n);
    for (std::size_t t = 0; t < n; ++t) r[t] = std::log(equity[t + 1] / equity[t]);
    double mean = 0.0;
    for (double x : r) mean += x;
    mean /= static_cast<double>(n);
    double m2 = 0.0, m4 = 0.0, down = 0.0;
    for (double x : r) {
        const double d = x - mean;
        m2 += d * d;
        m4 += d * d * d * d;
        if (x < 0.0) down += x * x;
    }
    const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
    if (sd <= 1e-12) throw Error(ErrorCode::ZeroVolatility, "equity curve has constant log returns");

    PerformanceMetrics m;
    const double ann = std::sqrt(periods_per_year);
    m.sharpe = mean / sd * ann;
    const double downside = std::sqrt(down / static_cast<double>(n));
    m.sortino = downside > 0.0 ? mean / downside * ann : std::numeric_limits<double>::infinity();
    double peak = equity.front();
    for (double e : equity) {
        peak = std::max(peak, e);
        m.max_drawdown = std::min(m.max_drawdown, e / peak - 1.0);
    }
    const double pm2 = m2 / static_cast<double>(n);
    m.excess_kurtosis = (m4 / static_cast<double>(n)) / (pm2 * pm2) - 3.0;
    return m;
}

namespace {

int table_rank(const std::string& method) {
    static const char* const order[] = {"Equally Weighted", "Traditional Markowitz", "Multiscale Markowitz",
                                        "Multiscale Markowitz (Overlapping)"};
    for (int k = 0; k < 4; ++k)
        if (method == order[k]) return k;
    return 4;
}

}  // namespace

Comparison compare(const ReturnPanel& base, const std::vector<BacktestConfig>& cfgs) {
    std::vector<std::future<BacktestReport>> jobs;
    jobs.reserve(cfgs.size());
    for (const auto& cfg : cfgs) jobs.push_back(std::async(std::launch::async, [&base, &cfg] { return run_backtest(base, cfg); }));

    struct Entry {
        ComparisonRow row;
        BacktestReport report;
    };
    std::vector<Entry> entries;
    for (std::size_t k = 0; k < cfgs.size(); ++k) {
        Entry e;
        e.row.method = cfgs[k].display_name();
        try {
            e.report = jobs[k].get();
            e.row.ok = true;
            e.row.metrics = e.report.metrics;
        } catch (const Error& err) {
            e.row.error = err.what();
        } catch (const std::exception& err) {
            e.row.error = std::string("SolverFailure: ") + err.what();
        }
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Entry& a, const Entry& b) { return table_rank(a.row.method) < table_rank(b.row.method); });
    Comparison out;
    for (auto& e : entries) {
        if (e.row.ok) out.reports.push_back(std::move(e.report));
        out.rows.push_back(std::move(e.row));
    }
    return out;
}

std::vector<BacktestConfig> table_configs(CovMethod method) {
    BacktestConfig ew;
    ew.strategy = Strategy::EqualWeight;
    BacktestConfig daily;
    daily.strategy = Strategy::MarkowitzDaily;
    daily.cov.method = method;
    BacktestConfig ms = daily;
    ms.strategy = Strategy::MarkowitzMultiscale;
    ms.cov.aggregation = Aggregation::NonOverlapping;
    BacktestConfig ms_over = ms;
    ms_over.cov.aggregation = Aggregation::Overlapping;
    return {ew, daily, ms, ms_over};
}

std::string format_comparison_csv(const Comparison& c) {
    std::ostringstream os;
    os << "method,sharpe_ratio,sortino_ratio,max_drawdown_pct,excess_kurtosis,status\n";
    for (const auto& row : c.rows) {
        os << '"' << row.method << "\",";
        if (row.ok)
            os << format_double(row.metrics.sharpe) << ',' << format_double(row.metrics.sortino) << ','
               << format_double(100.0 * row.metrics.max_drawdown) << ',' << format_double(row.metrics.excess_kurtosis)
               << ",ok\n";
        else
            os << ",,,,\"" << row.error << "\"\n";
    }
    return os.str();
}

std::string format_comparison_table(const Comparison& c) {
    std::size_t width = std::string("Method").size();
    for (const auto& row : c.rows) width = std::max(width, row.method.size());
    const auto fixed = [](double v, int digits) {
        if (std::isinf(v)) return std::string(v > 0 ? "inf" : "-inf");
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.*f", digits, v);
        return std::string(buf);
    };
    const auto pad_left = [](const std::string& s, std::size_t w) { return std::string(w > s.size() ? w - s.size() : 0, ' ') + s; };
    const auto pad_right = [](const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); };

    const std::string h1 = "Sharpe Ratio", h2 = "Sortino Ratio", h3 = "Max Drawdown (%)";
    std::ostringstream os;
    os << pad_right("Method", width) << "  " << h1 << "  " << h2 << "  " << h3 << '\n';
    os << std::string(width + 6 + h1.size() + h2.size() + h3.size(), '-') << '\n';
    for (const auto& row : c.rows) {
        os << pad_right(row.method, width) << "  ";
        if (row.ok) {
            os << pad_left(fixed(row.metrics.sharpe, 2), h1.size()) << "  " << pad_left(fixed(row.metrics.sortino, 2), h2.size())
               << "  " << pad_left(fixed(100.0 * row.metrics.max_drawdown, 1), h3.size());
        } else {
            os << "ERROR " << row.error;
        }
        os << '\n';
    }
    return os.str();
}

}  // namespace msport

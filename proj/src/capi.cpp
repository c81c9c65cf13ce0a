#include "msport/msport.h"

#include "msport/backtest.hpp"
#include "msport/error.hpp"
#include "msport/io.hpp"
#include "msport/optimizer.hpp"
#include "msport/pipeline.hpp"
#include "msport/report.hpp"
#include "msport/scaling.hpp"
#include "msport/synth.hpp"

#include <cstdio>
#include <map>
#include <sstream>
#include <string>

struct msport_panel {
    msport::ReturnPanel base;
};

struct msport_result {
    std::map<std::string, std::string> artifacts;
};

static_assert(static_cast<int>(msport::ErrorCode::SolverFailure) == MSPORT_SOLVER_FAILURE);
static_assert(static_cast<int>(msport::ErrorCode::InvalidArgument) == MSPORT_INVALID_ARGUMENT);
static_assert(static_cast<int>(msport::ErrorCode::ZeroVolatility) == MSPORT_ZERO_VOLATILITY);

namespace {

thread_local std::string last_error;

template <class F>
msport_status guarded(F&& body) {
    try {
        last_error.clear();
        body();
        return MSPORT_OK;
    } catch (const msport::Error& e) {
        last_error = e.what();
        return static_cast<msport_status>(e.code());
    } catch (const std::bad_alloc&) {
        last_error = "out of memory";
        return MSPORT_INTERNAL_ERROR;
    } catch (const std::exception& e) {
        last_error = std::string("internal error: ") + e.what();
        return MSPORT_INTERNAL_ERROR;
    } catch (...) {
        last_error = "internal error";
        return MSPORT_INTERNAL_ERROR;
    }
}

void require(bool ok, const char* what) {
    if (!ok) throw msport::Error(msport::ErrorCode::InvalidArgument, what);
}

std::vector<int> int_list(const int* values, std::size_t n, std::vector<int> fallback) {
    if (values == nullptr || n == 0) return fallback;
    return {values, values + n};
}

std::string str_or(const char* s, const char* fallback) { return s != nullptr && *s != '\0' ? s : fallback; }

std::string fixed(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, v);
    return buf;
}

std::string pad(const std::string& s, std::size_t w) { return s + std::string(w > s.size() ? w - s.size() : 0, ' '); }

}  // namespace

extern "C" {

int msport_status_category(msport_status status) {
    if (status == MSPORT_OK) return 0;
    if (status == MSPORT_INTERNAL_ERROR) return 3;
    return static_cast<int>(msport::error_category(static_cast<msport::ErrorCode>(status)));
}

const char* msport_status_name(msport_status status) {
    if (status == MSPORT_OK) return "Ok";
    if (status == MSPORT_INTERNAL_ERROR) return "InternalError";
    if (status < MSPORT_INVALID_ARGUMENT || status > MSPORT_SOLVER_FAILURE) return "Unknown";
    return msport::error_code_name(static_cast<msport::ErrorCode>(status)).data();
}

const char* msport_last_error(void) { return last_error.c_str(); }

const char* msport_version(void) { return "0.1.0"; }

msport_status msport_panel_load_csv(const char* path, msport_panel** out) {
    return guarded([&] {
        require(path != nullptr && out != nullptr, "path and out must be non-null");
        *out = new msport_panel{msport::to_log_returns(msport::load_prices(path))};
    });
}

msport_status msport_panel_parse_csv(const char* text, msport_panel** out) {
    return guarded([&] {
        require(text != nullptr && out != nullptr, "text and out must be non-null");
        *out = new msport_panel{msport::to_log_returns(msport::parse_prices(text))};
    });
}

msport_status msport_panel_from_returns(const double* returns, size_t rows, size_t assets, const char* const* ids,
                                        msport_panel** out) {
    return guarded([&] {
        require(returns != nullptr && out != nullptr, "returns and out must be non-null");
        require(rows > 0 && assets > 0, "panel must be non-empty");
        msport::ReturnPanel p;
        p.returns = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
            returns, static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(assets));
        require(p.returns.allFinite(), "returns must be finite");
        for (std::size_t a = 0; a < assets; ++a)
            p.asset_ids.push_back(ids != nullptr && ids[a] != nullptr ? ids[a] : "A" + std::to_string(a + 1));
        p.timestamps = msport::synthetic_dates(rows + 1);
        p.timestamps.erase(p.timestamps.begin());
        *out = new msport_panel{std::move(p)};
    });
}

size_t msport_panel_rows(const msport_panel* panel) {
    return panel != nullptr ? static_cast<size_t>(panel->base.rows()) : 0;
}

size_t msport_panel_assets(const msport_panel* panel) {
    return panel != nullptr ? static_cast<size_t>(panel->base.assets()) : 0;
}

const char* msport_panel_asset_id(const msport_panel* panel, size_t index) {
    if (panel == nullptr || index >= panel->base.asset_ids.size()) return nullptr;
    return panel->base.asset_ids[index].c_str();
}

msport_status msport_panel_returns(const msport_panel* panel, double* out, size_t capacity) {
    return guarded([&] {
        require(panel != nullptr && out != nullptr, "panel and out must be non-null");
        const auto& r = panel->base.returns;
        require(capacity >= static_cast<size_t>(r.size()), "output buffer too small");
        Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(out, r.rows(), r.cols()) = r;
    });
}

msport_status msport_panel_write_prices_csv(const msport_panel* panel, const char* path) {
    return guarded([&] {
        require(panel != nullptr && path != nullptr, "panel and path must be non-null");
        msport::write_prices_csv(msport::to_prices(panel->base), path);
    });
}

msport_status msport_panel_prices_csv(const msport_panel* panel, msport_result** out) {
    return guarded([&] {
        require(panel != nullptr && out != nullptr, "panel and out must be non-null");
        auto* r = new msport_result;
        r->artifacts["csv"] = msport::format_prices_csv(msport::to_prices(panel->base));
        *out = r;
    });
}

void msport_panel_free(msport_panel* panel) { delete panel; }

void msport_simulate_params_init(msport_simulate_params* p) {
    if (p == nullptr) return;
    *p = msport_simulate_params{};
    p->kind = "gaussian";
    p->length = 1024;
    p->assets = 1;
    p->sigma_daily = 0.01;
    p->hurst = 0.5;
    p->rho_inf = 0.8;
    p->h_rho = 0.3;
    p->sigma_low = 0.01;
    p->sigma_high = 0.03;
    p->intermittency = 0.2;
}

msport_status msport_panel_simulate(const msport_simulate_params* p, msport_panel** out) {
    return guarded([&] {
        require(p != nullptr && out != nullptr, "params and out must be non-null");
        msport::synth::GeneratorSpec spec;
        spec.kind = msport::synth::parse_kind(str_or(p->kind, "gaussian"));
        spec.length = p->length;
        spec.seed = p->seed;
        spec.assets = p->assets;
        spec.sigma_daily = p->sigma_daily;
        spec.hurst = p->hurst;
        spec.rho = p->rho;
        spec.rho_inf = p->rho_inf;
        spec.h_rho = p->h_rho;
        spec.sigma_low = p->sigma_low;
        spec.sigma_high = p->sigma_high;
        if (p->switch_points != nullptr) spec.switch_points.assign(p->switch_points, p->switch_points + p->n_switch_points);
        spec.drift = p->drift;
        spec.intermittency = p->intermittency;
        if (p->covariance != nullptr) {
            const auto n = static_cast<Eigen::Index>(p->assets);
            spec.covariance = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
                p->covariance, n, n);
        }
        *out = new msport_panel{msport::synth::generate(spec)};
    });
}

void msport_estimate_params_init(msport_estimate_params* p) {
    if (p == nullptr) return;
    *p = msport_estimate_params{};
    p->method = "sf";
    p->detrend_order = 1;
}

msport_status msport_estimate(const msport_panel* panel, const msport_estimate_params* p, msport_result** out) {
    return guarded([&] {
        require(panel != nullptr && p != nullptr && out != nullptr, "panel, params and out must be non-null");
        const auto& base = panel->base;
        const std::string method = str_or(p->method, "sf");
        require(method == "sf" || method == "mfdfa", "method must be sf or mfdfa");
        const std::vector<double> q = p->q_grid != nullptr && p->n_q > 0
                                          ? std::vector<double>(p->q_grid, p->q_grid + p->n_q)
                                          : msport::default_q_grid();
        const std::vector<int> sf_scales = method == "sf" ? int_list(p->scales, p->n_scales, msport::default_scales())
                                                          : msport::default_scales();

        msport::Json assets = msport::Json::array();
        std::ostringstream csv, text;
        csv << "asset_id,method,q,zeta,h,h_std_error,r2\n";
        std::size_t width = 8;
        for (const auto& id : base.asset_ids) width = std::max(width, id.size() + 2);
        text << pad("asset", width) << "H(2)      std_err   r2        h(-4)-h(4)  monotone\n";
        for (Eigen::Index a = 0; a < base.assets(); ++a) {
            msport::ScalingSpectrum spec;
            msport::Json entry{{"asset_id", base.asset_ids[static_cast<std::size_t>(a)]}};
            double h2 = 0.0, se = 0.0, r2 = 0.0;
            if (method == "sf") {
                const auto h = msport::estimate_hurst(base, a, sf_scales);
                spec = msport::structure_spectrum(base, a, q, sf_scales);
                entry["hurst"] = msport::to_json(h);
                h2 = h.hurst;
                se = h.std_error;
                r2 = h.r2;
            } else {
                spec = msport::mfdfa(base, a, q, int_list(p->scales, p->n_scales, {}), p->detrend_order);
                std::vector<double> q2{2.0};
                const auto s2 = msport::mfdfa(base, a, q2, spec.scales, p->detrend_order);
                h2 = s2.h_of_q[0];
                se = s2.h_std_error[0];
                r2 = s2.fit_r2[0];
                entry["hurst"] = {{"hurst", msport::number(h2)}, {"std_error", msport::number(se)}, {"r2", msport::number(r2)}};
            }
            entry["spectrum"] = msport::to_json(spec);
            assets.push_back(entry);
            for (std::size_t k = 0; k < spec.q_grid.size(); ++k)
                csv << spec.asset_id << ',' << spec.method << ',' << msport::format_double(spec.q_grid[k]) << ','
                    << msport::format_double(spec.zeta[k]) << ',' << msport::format_double(spec.h_of_q[k]) << ','
                    << msport::format_double(spec.h_std_error[k]) << ',' << msport::format_double(spec.fit_r2[k]) << '\n';
            const bool has_ends = spec.q_grid.front() <= -4.0 && spec.q_grid.back() >= 4.0;
            const std::string spread = has_ends ? fixed(spec.h_at(-4.0) - spec.h_at(4.0), 4) : "n/a";
            text << pad(spec.asset_id, width) << pad(fixed(h2, 4), 10) << pad(fixed(se, 4), 10) << pad(fixed(r2, 4), 10)
                 << pad(spread, 12) << (spec.monotone ? "yes" : "no") << '\n';
        }
        msport::Json report{{"method", method}, {"assets", assets}};
        if (p->pairs != 0 && base.assets() >= 2) {
            msport::Json pairs = msport::Json::array();
            text << "\npair" << std::string(width > 4 ? 2 * width - 4 : 1, ' ') << "H_rho     std_err   identity_residual\n";
            for (Eigen::Index i = 0; i < base.assets(); ++i)
                for (Eigen::Index j = i + 1; j < base.assets(); ++j) {
                    const auto cs = msport::estimate_correlation_scaling(base, i, j, sf_scales);
                    pairs.push_back(msport::to_json(cs));
                    text << pad(cs.asset_i + "/" + cs.asset_j, 2 * width) << pad(fixed(cs.h_rho.exponent, 4), 10)
                         << pad(fixed(cs.h_rho.std_error, 4), 10) << fixed(cs.identity_residual, 4)
                         << (cs.negative_correlation ? "  (negative correlation)" : "") << '\n';
                }
            report["pairs"] = pairs;
        }
        auto* r = new msport_result;
        r->artifacts["json"] = report.dump(2) + "\n";
        r->artifacts["csv"] = csv.str();
        r->artifacts["text"] = text.str();
        *out = r;
    });
}

void msport_optimize_params_init(msport_optimize_params* p) {
    if (p == nullptr) return;
    *p = msport_optimize_params{};
    p->covariance = "product";
    p->aggregation = "nonoverlapping";
    p->objective = "minvar";
    p->long_only = 1;
    p->ridge = -1.0;
}

msport_status msport_optimize(const msport_panel* panel, const msport_optimize_params* p, msport_result** out) {
    return guarded([&] {
        require(panel != nullptr && p != nullptr && out != nullptr, "panel, params and out must be non-null");
        const auto& base = panel->base;
        msport::CovOptions opts;
        opts.method = msport::parse_cov_method(str_or(p->covariance, "product"));
        opts.aggregation = msport::parse_aggregation(str_or(p->aggregation, "nonoverlapping"));
        const std::string objective = str_or(p->objective, "minvar");
        require(objective == "minvar" || objective == "maxsharpe", "objective must be minvar or maxsharpe");
        const auto scales = int_list(p->scales, p->n_scales, msport::default_scales());

        const auto set = msport::build_covariance_set(base, scales, opts);
        const double ridge = p->ridge < 0.0 ? msport::default_ridge(msport::cov_at_scale(base, 1, opts).matrix) : p->ridge;
        const auto ms = msport::multiscale_cov(set, ridge);
        const msport::Vector mu = base.returns.colwise().mean().transpose();

        msport::PortfolioWeights w;
        if (objective == "maxsharpe") {
            w = msport::max_sharpe(ms.matrix, mu, p->risk_free, p->long_only != 0);
        } else if (p->has_mu_target != 0) {
            w = msport::min_variance_with_return_floor(ms.matrix, mu, p->mu_target);
        } else {
            w = p->long_only != 0 ? msport::min_variance_long_only(ms.matrix) : msport::min_variance_closed_form(ms.matrix);
        }
        w.asset_ids = ms.asset_ids;
        w.scales = ms.scales;
        w.covariance_method = ms.covariance_method;

        msport::Json by_scale = msport::Json::array();
        for (std::size_t k = 0; k < set.scales.size(); ++k)
            by_scale.push_back({{"scale", set.scales[k]},
                                {"variance", msport::number(w.w.dot(set.matrices[k] * w.w))},
                                {"sample_count", set.sample_counts[k]}});
        msport::Json report{{"objective", objective},
                            {"weights", msport::to_json(w)},
                            {"expected_return", msport::number(mu.dot(w.w))},
                            {"portfolio_variance_by_scale", by_scale},
                            {"covariance", msport::to_json(ms)}};
        if (p->has_mu_target != 0) report["mu_target"] = msport::number(p->mu_target);

        std::ostringstream text;
        std::size_t width = 8;
        for (const auto& id : w.asset_ids) width = std::max(width, id.size() + 2);
        text << pad("asset", width) << "weight\n";
        for (Eigen::Index i = 0; i < w.w.size(); ++i)
            text << pad(w.asset_ids[static_cast<std::size_t>(i)], width) << fixed(w.w(i), 6) << '\n';

        auto* r = new msport_result;
        r->artifacts["json"] = report.dump(2) + "\n";
        r->artifacts["csv"] = msport::format_weights_csv(w);
        r->artifacts["covariance_csv"] = msport::format_matrix_csv(ms.matrix, ms.asset_ids);
        r->artifacts["text"] = text.str();
        *out = r;
    });
}

void msport_backtest_params_init(msport_backtest_params* p) {
    if (p == nullptr) return;
    *p = msport_backtest_params{};
    p->lookback = 125;
    p->rebalance_every = 21;
    p->covariance = "product";
    p->strategies = "table";
    p->long_only = 1;
}

msport_status msport_backtest(const msport_panel* panel, const msport_backtest_params* p, msport_result** out) {
    return guarded([&] {
        require(panel != nullptr && p != nullptr && out != nullptr, "panel, params and out must be non-null");
        const auto method = msport::parse_cov_method(str_or(p->covariance, "product"));
        const auto scales = int_list(p->scales, p->n_scales, msport::default_scales());
        const std::string list = str_or(p->strategies, "table");

        std::vector<msport::BacktestConfig> cfgs;
        if (list == "table") {
            cfgs = msport::table_configs(method);
        } else {
            std::stringstream ss(list);
            std::string name;
            while (std::getline(ss, name, ',')) {
                msport::BacktestConfig c;
                const std::string suffix = "_overlapping";
                if (name.size() > suffix.size() && name.compare(name.size() - suffix.size(), suffix.size(), suffix) == 0) {
                    name.resize(name.size() - suffix.size());
                    c.cov.aggregation = msport::Aggregation::Overlapping;
                }
                c.strategy = msport::parse_strategy(name);
                c.cov.method = method;
                cfgs.push_back(c);
            }
            require(!cfgs.empty(), "no strategies given");
        }
        for (auto& c : cfgs) {
            c.lookback = p->lookback;
            c.rebalance_every = p->rebalance_every;
            c.scales = scales;
            c.risk_free = p->risk_free;
            c.long_only = p->long_only != 0;
            c.validate();
        }
        const auto& base = panel->base;
        if (base.rows() <= static_cast<Eigen::Index>(p->lookback) + p->rebalance_every)
            throw msport::Error(msport::ErrorCode::PanelTooShort,
                                "panel has " + std::to_string(base.rows()) + " rows; need more than lookback " +
                                    std::to_string(p->lookback) + " + rebalance " + std::to_string(p->rebalance_every));

        const auto cmp = msport::compare(base, cfgs);
        msport::Json report{{"lookback", p->lookback},
                            {"rebalance_every", p->rebalance_every},
                            {"scales", scales},
                            {"covariance_method", msport::to_string(method)},
                            {"risk_free", msport::number(p->risk_free)},
                            {"long_only", p->long_only != 0}};
        const auto body = msport::to_json(cmp);
        report["table"] = body["table"];
        report["reports"] = body["reports"];

        auto* r = new msport_result;
        r->artifacts["json"] = report.dump(2) + "\n";
        r->artifacts["csv"] = msport::format_comparison_csv(cmp);
        r->artifacts["text"] = msport::format_comparison_table(cmp);
        *out = r;
    });
}

msport_status msport_repro(uint64_t seed, size_t series_length, msport_result** out) {
    return guarded([&] {
        require(out != nullptr, "out must be non-null");
        msport::ReproOptions opts;
        opts.seed = seed;
        if (series_length != 0) opts.series_length = series_length;
        const auto res = msport::run_repro(opts);
        auto* r = new msport_result;
        r->artifacts["json"] = res.summary.dump(2) + "\n";
        r->artifacts["csv"] = res.csv;
        r->artifacts["text"] = res.table;
        *out = r;
    });
}

msport_status msport_min_variance(const double* sigma, size_t n, int long_only, double* weights) {
    return guarded([&] {
        require(sigma != nullptr && weights != nullptr && n > 0, "sigma and weights must be non-null, n > 0");
        const auto N = static_cast<Eigen::Index>(n);
        const msport::Matrix m =
            Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(sigma, N, N);
        const auto w = long_only != 0 ? msport::min_variance_long_only(m) : msport::min_variance_closed_form(m);
        Eigen::Map<msport::Vector>(weights, N) = w.w;
    });
}

const char* msport_result_get(const msport_result* result, const char* name) {
    if (result == nullptr || name == nullptr) return nullptr;
    const auto it = result->artifacts.find(name);
    return it == result->artifacts.end() ? nullptr : it->second.c_str();
}

const char* msport_result_json(const msport_result* result) { return msport_result_get(result, "json"); }
const char* msport_result_csv(const msport_result* result) { return msport_result_get(result, "csv"); }
const char* msport_result_text(const msport_result* result) { return msport_result_get(result, "text"); }

void msport_result_free(msport_result* result) { delete result; }

}  // extern "C"

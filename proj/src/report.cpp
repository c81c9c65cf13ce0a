#include "msport/report.hpp"

#include <cmath>

namespace msport {

Json number(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

namespace {

Json vector_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(number(v(i)));
    return out;
}

Json doubles(const std::vector<double>& v) {
    Json out = Json::array();
    for (double x : v) out.push_back(number(x));
    return out;
}

Json points_json(const std::vector<MomentPoint>& pts) {
    Json out = Json::array();
    for (const auto& p : pts) out.push_back({{"scale", p.scale}, {"moment", number(p.moment)}});
    return out;
}

}  // namespace

Json matrix_json(const Matrix& m) {
    Json out = Json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_json(m.row(r).transpose()));
    return out;
}

Json to_json(const ExponentFit& f) {
    return {{"exponent", number(f.exponent)}, {"std_error", number(f.std_error)}, {"r2", number(f.r2)}};
}

Json to_json(const HurstEstimate& h) {
    return {{"hurst", number(h.hurst)}, {"std_error", number(h.std_error)}, {"r2", number(h.r2)}, {"points", points_json(h.points)}};
}

Json to_json(const ScalingSpectrum& s) {
    Json out{{"asset_id", s.asset_id},          {"method", s.method},         {"q", doubles(s.q_grid)},
             {"zeta", doubles(s.zeta)},         {"h", doubles(s.h_of_q)},     {"h_std_error", doubles(s.h_std_error)},
             {"fit_r2", doubles(s.fit_r2)},     {"scales", s.scales},         {"monotone", s.monotone}};
    if (s.method == "mfdfa") out["detrend_order"] = s.detrend_order;
    return out;
}

Json to_json(const CorrelationScaling& c) {
    return {{"asset_i", c.asset_i},
            {"asset_j", c.asset_j},
            {"scales", c.scales},
            {"rho", doubles(c.rho)},
            {"cross_moment", doubles(c.cross_moment)},
            {"h_rho", to_json(c.h_rho)},
            {"h_ij_2", to_json(c.h_ij_2)},
            {"h_i_1", to_json(c.h_i_1)},
            {"h_j_1", to_json(c.h_j_1)},
            {"identity_residual", number(c.identity_residual)},
            {"combined_std_error", number(c.combined_std_error)},
            {"negative_correlation", c.negative_correlation}};
}

Json to_json(const PortfolioWeights& w) {
    Json weights = Json::object();
    for (Eigen::Index i = 0; i < w.w.size(); ++i) {
        const auto k = static_cast<std::size_t>(i);
        weights[k < w.asset_ids.size() ? w.asset_ids[k] : "A" + std::to_string(i + 1)] = number(w.w(i));
    }
    return {{"method", to_string(w.method)},
            {"long_only", w.long_only},
            {"scales", w.scales},
            {"covariance_method", w.covariance_method},
            {"weights", weights},
            {"kkt_residual", number(w.kkt_residual)},
            {"iterations", w.iterations}};
}

Json to_json(const MultiscaleCovariance& m) {
    return {{"asset_ids", m.asset_ids},         {"scales", m.scales},   {"covariance_method", m.covariance_method},
            {"scale_weights", doubles(m.scale_weights)}, {"ridge", number(m.ridge)}, {"psd_repaired", m.psd_repaired},
            {"matrix", matrix_json(m.matrix)}};
}

Json to_json(const TargetCurveReport& r) {
    Json rows = Json::array();
    for (const auto& row : r.rows)
        rows.push_back({{"scale", row.scale},
                        {"portfolio_variance", number(row.portfolio_variance)},
                        {"target_variance", number(row.target_variance)},
                        {"ratio", number(row.ratio)},
                        {"pass", row.pass}});
    return {{"convention", r.convention}, {"rows", rows}, {"all_pass", r.all_pass}};
}

Json to_json(const SensitivityReport& r) {
    return {{"asset", r.k},
            {"S", number(r.S)},
            {"lambda", number(r.lambda)},
            {"inv_kk", number(r.inv_kk)},
            {"dw_dsigma2", number(r.dwk_dsigma2)},
            {"sign_negative", r.sign_negative},
            {"scales", r.scales},
            {"dw_dH", doubles(r.dwk_dH)}};
}

Json to_json(const BacktestConfig& c) {
    return {{"strategy", to_string(c.strategy)},
            {"label", c.display_name()},
            {"lookback", c.lookback},
            {"rebalance_every", c.rebalance_every},
            {"scales", c.scales},
            {"covariance_method", to_string(c.cov.method)},
            {"aggregation", to_string(c.cov.aggregation)},
            {"long_only", c.long_only},
            {"risk_free", number(c.risk_free)}};
}

Json to_json(const PerformanceMetrics& m) {
    return {{"sharpe", number(m.sharpe)},
            {"sortino", number(m.sortino)},
            {"max_drawdown", number(m.max_drawdown)},
            {"excess_kurtosis", number(m.excess_kurtosis)}};
}

Json to_json(const BacktestReport& r) {
    Json rebalances = Json::array();
    for (std::size_t k = 0; k < r.weights.size(); ++k)
        rebalances.push_back({{"date", r.rebalance_dates[k]}, {"weights", vector_json(r.weights[k])}, {"turnover", number(r.turnover[k])}});
    Json fallbacks = Json::array();
    for (const auto& f : r.fallbacks)
        fallbacks.push_back({{"rebalance", f.rebalance}, {"date", f.date}, {"code", f.code}, {"message", f.message}});
    return {{"strategy", r.strategy},
            {"config", to_json(r.config)},
            {"asset_ids", r.asset_ids},
            {"metrics", to_json(r.metrics)},
            {"rebalances", rebalances},
            {"fallbacks", fallbacks},
            {"dates", r.dates},
            {"equity", doubles(r.equity)}};
}

Json to_json(const Comparison& c) {
    Json rows = Json::array();
    for (const auto& row : c.rows) {
        Json j{{"method", row.method}, {"ok", row.ok}};
        if (row.ok)
            j["metrics"] = to_json(row.metrics);
        else
            j["error"] = row.error;
        rows.push_back(j);
    }
    Json reports = Json::array();
    for (const auto& r : c.reports) reports.push_back(to_json(r));
    return {{"table", rows}, {"reports", reports}};
}

}  // namespace msport

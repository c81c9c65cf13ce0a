#include "msport/optimizer.hpp"

#include "msport/error.hpp"
#include "msport/io.hpp"
#include "msport/qp.hpp"
#include "msport/scaling.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <sstream>

namespace msport {

std::string to_string(WeightMethod m) {
    switch (m) {
        case WeightMethod::MinVariance: return "min_var";
        case WeightMethod::MinVarianceReturnFloor: return "min_var_return_floor";
        case WeightMethod::MaxSharpe: return "max_sharpe";
        case WeightMethod::Averaged: return "averaged";
    }
    return "unknown";
}

namespace {

std::vector<std::string> default_ids(Eigen::Index n) {
    std::vector<std::string> ids;
    for (Eigen::Index i = 0; i < n; ++i) ids.push_back("A" + std::to_string(i + 1));
    return ids;
}

void check_square(const Matrix& sigma) {
    if (sigma.rows() == 0 || sigma.rows() != sigma.cols())
        throw Error(ErrorCode::DimensionMismatch, "covariance must be a non-empty square matrix");
    if (!sigma.allFinite()) throw Error(ErrorCode::InvalidArgument, "covariance has non-finite entries");
}

// Cholesky of a PD matrix after the condition-number gate.
Eigen::LLT<Matrix> factor_pd(const Matrix& sigma) {
    check_square(sigma);
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma, Eigen::EigenvaluesOnly);
    const double lo = eig.eigenvalues().minCoeff();
    const double hi = eig.eigenvalues().maxCoeff();
    if (!(lo > 0.0) || hi / lo > kMaxConditionNumber) {
        std::ostringstream os;
        os << "covariance eigenvalues span [" << lo << ", " << hi << "]; condition number limit is " << kMaxConditionNumber;
        throw Error(ErrorCode::SingularCovariance, os.str());
    }
    Eigen::LLT<Matrix> llt(sigma);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::SingularCovariance, "Cholesky factorization failed");
    return llt;
}

PortfolioWeights from_multiscale(PortfolioWeights w, const MultiscaleCovariance& ms) {
    if (ms.asset_ids.size() == static_cast<std::size_t>(w.w.size())) w.asset_ids = ms.asset_ids;
    w.scales = ms.scales;
    w.covariance_method = ms.covariance_method;
    return w;
}

// Feasible vertex of {1'w = 1, w >= 0}: all weight on the lowest-variance asset.
Vector lowest_variance_vertex(const Matrix& sigma) {
    Eigen::Index k = 0;
    sigma.diagonal().minCoeff(&k);
    Vector v = Vector::Zero(sigma.rows());
    v(k) = 1.0;
    return v;
}

PortfolioWeights from_qp(const QpSolution& sol, Eigen::Index n, WeightMethod method) {
    if (!sol.converged) {
        std::ostringstream os;
        os << "active-set QP stopped after " << sol.iterations << " iterations; KKT residual "
           << sol.stationarity_residual << ", best iterate sum " << sol.w.sum();
        throw Error(ErrorCode::MaxIterations, os.str());
    }
    PortfolioWeights out;
    out.asset_ids = default_ids(n);
    out.w = sol.w / sol.w.sum();
    out.method = method;
    out.long_only = true;
    out.kkt_residual = std::max(sol.stationarity_residual, sol.dual_violation);
    out.iterations = sol.iterations;
    return out;
}

}  // namespace

PortfolioWeights min_variance_closed_form(const Matrix& sigma) {
    const auto llt = factor_pd(sigma);
    const Eigen::Index n = sigma.rows();
    const Vector s = llt.solve(Vector::Ones(n));
    const double S = s.sum();
    PortfolioWeights out;
    out.asset_ids = default_ids(n);
    out.w = s / S;
    out.method = WeightMethod::MinVariance;
    out.long_only = false;
    const double lambda = 2.0 / S;
    out.kkt_residual = (2.0 * sigma * out.w - lambda * Vector::Ones(n)).cwiseAbs().maxCoeff();
    return out;
}

PortfolioWeights min_variance_closed_form(const MultiscaleCovariance& sigma) {
    return from_multiscale(min_variance_closed_form(sigma.matrix), sigma);
}

PortfolioWeights min_variance_long_only(const Matrix& sigma) {
    check_square(sigma);
    const Eigen::Index n = sigma.rows();
    try {
        PortfolioWeights cf = min_variance_closed_form(sigma);
        if ((cf.w.array() >= 0.0).all()) {
            cf.long_only = true;
            return cf;
        }
    } catch (const Error& e) {
        if (e.code() != ErrorCode::SingularCovariance) throw;
        // PSD but singular: the QP handles it directly
    }
    SimplexQp qp;
    qp.q = sigma;
    qp.a = Vector::Ones(n);
    qp.b = 1.0;
    return from_qp(solve_simplex_qp(qp, lowest_variance_vertex(sigma)), n, WeightMethod::MinVariance);
}

PortfolioWeights min_variance_long_only(const MultiscaleCovariance& sigma) {
    return from_multiscale(min_variance_long_only(sigma.matrix), sigma);
}

PortfolioWeights min_variance_with_return_floor(const Matrix& sigma, const Vector& mu, double mu_target) {
    check_square(sigma);
    const Eigen::Index n = sigma.rows();
    if (mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "one expected return per asset required");
    Eigen::Index best = 0;
    const double max_mu = mu.maxCoeff(&best);
    if (mu_target > max_mu) {
        std::ostringstream os;
        os << "return floor " << mu_target << " exceeds the largest expected return " << max_mu;
        throw Error(ErrorCode::Infeasible, os.str());
    }
    PortfolioWeights unconstrained = min_variance_long_only(sigma);
    if (mu.dot(unconstrained.w) >= mu_target) {
        unconstrained.method = WeightMethod::MinVarianceReturnFloor;
        return unconstrained;
    }
    SimplexQp qp;
    qp.q = sigma;
    qp.a = Vector::Ones(n);
    qp.b = 1.0;
    qp.d = mu;
    qp.e = mu_target;
    Vector start = Vector::Zero(n);
    start(best) = 1.0;
    return from_qp(solve_simplex_qp(qp, start), n, WeightMethod::MinVarianceReturnFloor);
}

PortfolioWeights max_sharpe(const Matrix& sigma, const Vector& mu, double risk_free, bool long_only) {
    check_square(sigma);
    const Eigen::Index n = sigma.rows();
    if (mu.size() != n) throw Error(ErrorCode::DimensionMismatch, "one expected return per asset required");
    const Vector excess = mu.array() - risk_free;
    Eigen::Index best = 0;
    if (!(excess.maxCoeff(&best) > 0.0))
        throw Error(ErrorCode::NoPositiveExcessReturn, "every expected return is at or below the risk-free rate");

    const auto llt = factor_pd(sigma);
    const Vector tangent = llt.solve(excess);
    const double total = tangent.sum();
    const bool nonneg = (tangent.array() >= 0.0).all();
    if (total > 0.0 && (nonneg || !long_only)) {
        PortfolioWeights out;
        out.asset_ids = default_ids(n);
        out.w = tangent / total;
        out.method = WeightMethod::MaxSharpe;
        out.long_only = nonneg;
        // stationarity of the Sharpe ratio: Sigma w proportional to excess
        const double k = (sigma * out.w).dot(excess) / excess.squaredNorm();
        out.kkt_residual = (sigma * out.w - k * excess).cwiseAbs().maxCoeff();
        return out;
    }
    if (!long_only) throw Error(ErrorCode::SingularCovariance, "tangency weights do not normalize (1' Sigma^-1 (mu - rf) <= 0)");

    // min y' Sigma y  s.t. excess' y = 1, y >= 0;  w = y / 1'y
    SimplexQp qp;
    qp.q = sigma;
    qp.a = excess;
    qp.b = 1.0;
    Vector start = Vector::Zero(n);
    start(best) = 1.0 / excess(best);
    return from_qp(solve_simplex_qp(qp, start), n, WeightMethod::MaxSharpe);
}

SensitivityReport sensitivity_to_variance(const Matrix& sigma, Eigen::Index k) {
    const auto llt = factor_pd(sigma);
    const Eigen::Index n = sigma.rows();
    if (k < 0 || k >= n) throw Error(ErrorCode::InvalidArgument, "asset index out of range");
    SensitivityReport r;
    r.k = k;
    r.s = llt.solve(Vector::Ones(n));
    r.S = r.s.sum();
    r.lambda = 2.0 / r.S;
    Vector ek = Vector::Zero(n);
    ek(k) = 1.0;
    r.inv_kk = llt.solve(ek)(k);
    const double sk = r.s(k);
    r.dsk_dsigma2 = -r.inv_kk * sk;
    r.dS_dsigma2 = -sk * sk;
    r.dwk_dsigma2 = sk * (-r.inv_kk * r.S + sk * sk) / (r.S * r.S);
    r.sign_negative = r.dwk_dsigma2 < 0.0;
    return r;
}

SensitivityReport sensitivity_to_variance(const Matrix& sigma, Eigen::Index k, const ScaledCovarianceSet& set) {
    SensitivityReport r = sensitivity_to_variance(sigma, k);
    r.scales = set.scales;
    for (int dt : set.scales) r.dwk_dH.push_back(sensitivity_to_hurst(set.at_scale(dt), k, dt).value);
    return r;
}

HurstSensitivity sensitivity_to_hurst(const Matrix& sigma_at_scale, Eigen::Index k, int dt) {
    if (dt < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1");
    HurstSensitivity h;
    if (k < 0 || k >= sigma_at_scale.rows()) throw Error(ErrorCode::InvalidArgument, "asset index out of range");
    h.sigma2_at_scale = sigma_at_scale(k, k);
    if (dt == 1) {
        h.scale_one = true;
        h.value = 0.0;
        return h;
    }
    const SensitivityReport r = sensitivity_to_variance(sigma_at_scale, k);
    h.value = r.dwk_dsigma2 * 2.0 * std::log(static_cast<double>(dt)) * h.sigma2_at_scale;
    return h;
}

HurstSensitivity sensitivity_to_hurst(const ScaledCovarianceSet& set, Eigen::Index k, int dt) {
    HurstSensitivity h = sensitivity_to_hurst(set.at_scale(dt), k, dt);
    if (set.scales.size() >= 3) {
        std::vector<MomentPoint> pts;
        for (std::size_t s = 0; s < set.scales.size(); ++s)
            pts.push_back({static_cast<double>(set.scales[s]), set.matrices[s](k, k)});
        try {
            h.hurst = fit_scaling_exponent(pts).exponent / 2.0;
        } catch (const Error&) {
            h.hurst = 0.5;
        }
    }
    return h;
}

CorrelationSensitivity combined_weight_correlation_sensitivity(const Matrix& sigma, Eigen::Index i, Eigen::Index j,
                                                               double step) {
    check_square(sigma);
    const Eigen::Index n = sigma.rows();
    if (i == j || i < 0 || j < 0 || i >= n || j >= n)
        throw Error(ErrorCode::InvalidArgument, "need two distinct asset indices");
    const auto llt = factor_pd(sigma);
    const double si = std::sqrt(sigma(i, i));
    const double sj = std::sqrt(sigma(j, j));

    CorrelationSensitivity out;
    out.i = i;
    out.j = j;

    auto pair_weight = [&](double bump) {
        Matrix m = sigma;
        m(i, j) += bump * si * sj;
        m(j, i) += bump * si * sj;
        const Vector w = min_variance_closed_form(m).w;
        return w(i) + w(j);
    };
    out.numeric_dsum = (pair_weight(step) - pair_weight(-step)) / (2.0 * step);

    const Vector s = llt.solve(Vector::Ones(n));
    const double S = s.sum();
    // dSigma/drho = si sj (e_i e_j' + e_j e_i')
    Vector dsigma_s = Vector::Zero(n);
    dsigma_s(i) = si * sj * s(j);
    dsigma_s(j) = si * sj * s(i);
    const Vector ds = -llt.solve(dsigma_s);
    const double dS = -2.0 * si * sj * s(i) * s(j);
    out.analytic_dwi = ds(i) / S - s(i) * dS / (S * S);
    out.analytic_dwj = ds(j) / S - s(j) * dS / (S * S);
    out.analytic_dsum = out.analytic_dwi + out.analytic_dwj;

    // Reduced problem: i and j merged with their current split frozen.
    const double wi = s(i) / S, wj = s(j) / S;
    const double pair = wi + wj;
    if (n == 2) {
        out.synthetic_weight = 1.0;
        out.synthetic_dw_drho = 0.0;
        return out;
    }
    if (pair == 0.0) throw Error(ErrorCode::SingularCovariance, "pair carries zero combined weight; split undefined");
    const double ui = wi / pair, uj = wj / pair;
    std::vector<Eigen::Index> others;
    for (Eigen::Index m = 0; m < n; ++m)
        if (m != i && m != j) others.push_back(m);
    const auto nr = static_cast<Eigen::Index>(others.size()) + 1;
    Matrix reduced(nr, nr);
    reduced(0, 0) = ui * ui * sigma(i, i) + uj * uj * sigma(j, j) + 2.0 * ui * uj * sigma(i, j);
    for (Eigen::Index a = 0; a + 1 < nr; ++a) {
        const Eigen::Index m = others[static_cast<std::size_t>(a)];
        reduced(0, a + 1) = reduced(a + 1, 0) = ui * sigma(i, m) + uj * sigma(j, m);
        for (Eigen::Index b = 0; b + 1 < nr; ++b) reduced(a + 1, b + 1) = sigma(m, others[static_cast<std::size_t>(b)]);
    }
    const SensitivityReport rs = sensitivity_to_variance(reduced, 0);
    out.synthetic_weight = rs.s(0) / rs.S;
    out.synthetic_dw_drho = rs.dwk_dsigma2 * 2.0 * ui * uj * si * sj;
    return out;
}

double combined_weight_hurst_sensitivity(double dw_drho, double h_ij, int dt, double rho_unit) {
    if (dt < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1");
    const double t = static_cast<double>(dt);
    return dw_drho * rho_unit * std::pow(t, h_ij) * std::log(t);
}

PortfolioWeights average_weights_across_scales(const std::vector<PortfolioWeights>& per_scale) {
    if (per_scale.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to average");
    const auto& first = per_scale.front();
    PortfolioWeights out;
    out.asset_ids = first.asset_ids;
    out.w = Vector::Zero(first.w.size());
    out.method = WeightMethod::Averaged;
    out.long_only = true;
    out.covariance_method = first.covariance_method;
    for (const auto& p : per_scale) {
        if (p.asset_ids != first.asset_ids || p.w.size() != first.w.size())
            throw Error(ErrorCode::UniverseMismatch, "weight vectors cover different asset universes");
        out.w += p.w;
        out.long_only = out.long_only && p.long_only;
        out.scales.insert(out.scales.end(), p.scales.begin(), p.scales.end());
        out.kkt_residual = std::max(out.kkt_residual, p.kkt_residual);
    }
    out.w /= static_cast<double>(per_scale.size());
    out.w /= out.w.sum();
    return out;
}

std::vector<PortfolioWeights> per_scale_min_variance(const ScaledCovarianceSet& set, bool long_only) {
    std::vector<PortfolioWeights> out;
    for (std::size_t k = 0; k < set.scales.size(); ++k) {
        PortfolioWeights w = long_only ? min_variance_long_only(set.matrices[k]) : min_variance_closed_form(set.matrices[k]);
        w.asset_ids = set.asset_ids;
        w.scales = {set.scales[k]};
        w.covariance_method = to_string(set.options.method);
        out.push_back(std::move(w));
    }
    return out;
}

TargetCurveReport check_target_curve(const PortfolioWeights& w, const ScaledCovarianceSet& set,
                                     const std::vector<double>& target_variances) {
    if (target_variances.size() != set.scales.size())
        throw Error(ErrorCode::DimensionMismatch, "one target variance per scale required");
    if (w.w.size() != set.assets()) throw Error(ErrorCode::UniverseMismatch, "weights and covariance set differ in size");
    TargetCurveReport report;
    for (std::size_t k = 0; k < set.scales.size(); ++k) {
        TargetCurveRow row;
        row.scale = set.scales[k];
        row.portfolio_variance = w.w.dot(set.matrices[k] * w.w);
        row.target_variance = target_variances[k];
        row.ratio = row.portfolio_variance / row.target_variance;
        row.pass = row.ratio <= 1.0 + 1e-12;
        report.all_pass = report.all_pass && row.pass;
        report.rows.push_back(row);
    }
    return report;
}

TargetCurveReport check_target_curve(const PortfolioWeights& w, const ScaledCovarianceSet& set,
                                     double sigma_target_daily, double h_target) {
    std::vector<double> targets;
    for (int dt : set.scales)
        targets.push_back(sigma_target_daily * sigma_target_daily * std::pow(static_cast<double>(dt), 2.0 * h_target));
    return check_target_curve(w, set, targets);
}

std::string format_weights_csv(const PortfolioWeights& w) {
    std::ostringstream os;
    os << "asset_id,weight\n";
    for (Eigen::Index i = 0; i < w.w.size(); ++i) {
        const std::string id = static_cast<std::size_t>(i) < w.asset_ids.size() ? w.asset_ids[static_cast<std::size_t>(i)]
                                                                               : "A" + std::to_string(i + 1);
        os << id << ',' << format_double(w.w(i)) << '\n';
    }
    return os.str();
}

}  // namespace msport

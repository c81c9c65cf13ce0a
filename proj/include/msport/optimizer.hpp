#pragma once

#include "msport/covariance.hpp"
#include "msport/timeseries.hpp"

#include <string>
#include <vector>

namespace msport {

enum class WeightMethod { MinVariance, MinVarianceReturnFloor, MaxSharpe, Averaged };

std::string to_string(WeightMethod m);

/// Allocation with provenance. Weights always sum to one; long-only vectors
/// carry no entry below -1e-12.
struct PortfolioWeights {
    std::vector<std::string> asset_ids;
    Vector w;
    WeightMethod method = WeightMethod::MinVariance;
    bool long_only = false;
    std::vector<int> scales;
    std::string covariance_method;
    double kkt_residual = 0.0;
    int iterations = 0;
};

/// Condition number above which a covariance counts as singular.
inline constexpr double kMaxConditionNumber = 1e12;

/// w = S^-1 1 / (1' S^-1 1). Throws SingularCovariance when the condition
/// number exceeds 1e12 or the matrix is not positive definite. The reported
/// KKT residual is the inf-norm of 2 Sigma w - lambda 1 with lambda = 2/S.
PortfolioWeights min_variance_closed_form(const Matrix& sigma);
PortfolioWeights min_variance_closed_form(const MultiscaleCovariance& sigma);

/// Exact long-only minimum variance via the active-set QP. If the
/// unconstrained optimum is already non-negative it is returned as is.
PortfolioWeights min_variance_long_only(const Matrix& sigma);
PortfolioWeights min_variance_long_only(const MultiscaleCovariance& sigma);

/// Long-only minimum variance subject to mu'w >= mu_target. Throws
/// Infeasible when mu_target exceeds max_i mu_i.
PortfolioWeights min_variance_with_return_floor(const Matrix& sigma, const Vector& mu, double mu_target);

/// Tangency portfolio w ~ Sigma^-1 (mu - rf). With `long_only`, a tangency
/// vector with negative entries is replaced by the exact long-only maximizer
/// of the Sharpe ratio (min y'Sigma y s.t. (mu-rf)'y = 1, y >= 0, then
/// w = y / 1'y).
PortfolioWeights max_sharpe(const Matrix& sigma, const Vector& mu, double risk_free, bool long_only = true);

/// Per-asset sensitivities of the closed-form weights to Sigma_kk.
struct SensitivityReport {
    Eigen::Index k = 0;
    Vector s;          // Sigma^-1 1
    double S = 0.0;    // 1' Sigma^-1 1
    double lambda = 0.0;       // 2 / S, reported only
    double inv_kk = 0.0;       // (Sigma^-1)_kk
    double dsk_dsigma2 = 0.0;  // -(Sigma^-1)_kk s_k
    double dS_dsigma2 = 0.0;   // -s_k^2
    double dwk_dsigma2 = 0.0;  // s_k (-(Sigma^-1)_kk S + s_k^2) / S^2
    /// dw_k/dH_k at each scale of `scales`: dwk_dsigma2(Sigma(dt)) * 2 ln(dt) Sigma_kk(dt).
    std::vector<int> scales;
    std::vector<double> dwk_dH;
    /// dwk_dsigma2 < 0 is only guaranteed when s_k > 0 (the asset carries a
    /// positive closed-form weight); false flags a violation.
    bool sign_negative = false;
};

SensitivityReport sensitivity_to_variance(const Matrix& sigma, Eigen::Index k);
/// Same, plus dw_k/dH_k evaluated on each per-scale matrix of the set.
SensitivityReport sensitivity_to_variance(const Matrix& sigma, Eigen::Index k, const ScaledCovarianceSet& set);

struct HurstSensitivity {
    double value = 0.0;            // dw_k/dH_k
    double hurst = 0.5;            // H_k fitted from the set's diagonal (0.5 if < 3 scales)
    double sigma2_at_scale = 0.0;  // Sigma_kk(dt)
    bool scale_one = false;        // dt == 1: derivative is exactly zero
};

/// Chain rule dw_k/dH_k = dw_k/dSigma_kk * 2 ln(dt) Sigma_kk(dt), with the
/// weights taken from the closed-form solution on Sigma(dt).
HurstSensitivity sensitivity_to_hurst(const ScaledCovarianceSet& set, Eigen::Index k, int dt);
HurstSensitivity sensitivity_to_hurst(const Matrix& sigma_at_scale, Eigen::Index k, int dt);

struct CorrelationSensitivity {
    Eigen::Index i = 0, j = 0;
    double numeric_dsum = 0.0;   // central difference of w_i + w_j in rho_ij
    double analytic_dwi = 0.0;
    double analytic_dwj = 0.0;
    double analytic_dsum = 0.0;
    /// Pair merged into one synthetic asset with its internal split frozen:
    /// weight of the synthetic asset and its derivative in rho_ij.
    double synthetic_weight = 0.0;
    double synthetic_dw_drho = 0.0;
};

CorrelationSensitivity combined_weight_correlation_sensitivity(const Matrix& sigma, Eigen::Index i, Eigen::Index j,
                                                               double step = 1e-6);

/// dw_ij/dH_ij = dw_ij/drho_ij * rho_unit * dt^H_ij * ln(dt), for
/// rho_ij(dt) = rho_unit * dt^H_ij.
double combined_weight_hurst_sensitivity(double dw_drho, double h_ij, int dt, double rho_unit = 1.0);

/// Elementwise mean then renormalization to sum one.
PortfolioWeights average_weights_across_scales(const std::vector<PortfolioWeights>& per_scale);

/// One allocation per scale of the set (min-variance on each Sigma(dt)).
std::vector<PortfolioWeights> per_scale_min_variance(const ScaledCovarianceSet& set, bool long_only);

struct TargetCurveRow {
    int scale = 1;
    double portfolio_variance = 0.0;
    double target_variance = 0.0;
    double ratio = 0.0;
    bool pass = false;
};

/// Per-scale comparison of w'Sigma(dt)w with a target variance. Convention:
/// target standard deviation scales as dt^H_target, so the target variance is
/// sigma_target_daily^2 * dt^(2 H_target). A scale passes when the ratio is
/// at most 1 (to 1e-12).
struct TargetCurveReport {
    std::string convention = "std ~ dt^H_target (variance ~ dt^(2 H_target))";
    std::vector<TargetCurveRow> rows;
    bool all_pass = true;
};

TargetCurveReport check_target_curve(const PortfolioWeights& w, const ScaledCovarianceSet& set,
                                     double sigma_target_daily, double h_target);
/// Arbitrary per-scale target variances, one per scale of the set.
TargetCurveReport check_target_curve(const PortfolioWeights& w, const ScaledCovarianceSet& set,
                                     const std::vector<double>& target_variances);

std::string format_weights_csv(const PortfolioWeights& w);

}  // namespace msport

#pragma once

#include "msport/timeseries.hpp"

#include <span>
#include <string>
#include <vector>

namespace msport {

/// Daily to monthly: 1, 2, 5, 10, 21 trading days.
std::vector<int> default_scales();
/// -4..4 without 0.
std::vector<double> default_q_grid();
/// Log-spaced MF-DFA segment sizes from 16 up to n/8 (at most 12 sizes).
std::vector<int> default_mfdfa_scales(std::size_t n);

struct MomentPoint {
    double scale = 0.0;
    double moment = 0.0;
};

struct ExponentFit {
    double exponent = 0.0;
    double std_error = 0.0;
    double r2 = 0.0;
};

/// Phase-averaged mean of |r_dt|^q for each scale. Every scale must leave at
/// least 4 observations in each phase panel.
std::vector<MomentPoint> structure_function(const ReturnPanel& base, Eigen::Index asset, double q,
                                            const std::vector<int>& scales);

/// OLS slope of ln(moment) on ln(scale) with its standard error and r^2.
ExponentFit fit_scaling_exponent(std::span<const MomentPoint> points);

struct HurstEstimate {
    double hurst = 0.0;  // zeta(2) / 2
    double std_error = 0.0;
    double r2 = 0.0;
    std::vector<MomentPoint> points;
};

HurstEstimate estimate_hurst(const ReturnPanel& base, Eigen::Index asset, const std::vector<int>& scales = default_scales());

/// H(q) = zeta(q)/q per moment order. `monotone` is false when H(q) rises
/// anywhere along the (ascending) q grid; that is reported, not rejected.
struct ScalingSpectrum {
    std::string asset_id;
    std::string method;  // "structure_function" or "mfdfa"
    std::vector<double> q_grid;
    std::vector<double> zeta;
    std::vector<double> h_of_q;
    std::vector<double> h_std_error;
    std::vector<double> fit_r2;
    std::vector<int> scales;
    int detrend_order = 0;
    bool monotone = true;

    double h_at(double q) const;
};

ScalingSpectrum structure_spectrum(const ReturnPanel& base, Eigen::Index asset,
                                   std::vector<double> q_grid = default_q_grid(),
                                   const std::vector<int>& scales = default_scales());

/// Multifractal detrended fluctuation analysis: cumulative profile of the
/// demeaned series, segments of size s taken from both ends, polynomial
/// detrending of `detrend_order`, F_q(s) = (mean_v F^2(v,s)^{q/2})^{1/q},
/// h(q) = slope of ln F_q(s) on ln s. Zero-variance segments are excluded.
ScalingSpectrum mfdfa(std::span<const double> series, std::vector<double> q_grid, const std::vector<int>& scales,
                      int detrend_order = 1);
ScalingSpectrum mfdfa(const ReturnPanel& base, Eigen::Index asset, std::vector<double> q_grid = default_q_grid(),
                      std::vector<int> scales = {}, int detrend_order = 1);

struct CorrelationScaling {
    std::string asset_i, asset_j;
    std::vector<int> scales;
    std::vector<double> rho;           // phase-averaged Pearson correlation per scale
    std::vector<double> cross_moment;  // phase-averaged <r_i r_j> per scale
    ExponentFit h_rho;                 // slope of ln|rho|
    ExponentFit h_ij_2;                // slope of ln|<r_i r_j>|
    ExponentFit h_i_1, h_j_1;          // zeta(1) of each asset
    double identity_residual = 0.0;    // h_rho - (h_ij_2 - h_i_1 - h_j_1)
    double combined_std_error = 0.0;
    bool negative_correlation = false;  // some rho or cross moment <= 0; fit used |.|
};

CorrelationScaling estimate_correlation_scaling(const ReturnPanel& base, Eigen::Index i, Eigen::Index j,
                                                const std::vector<int>& scales = default_scales());

double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y);

}  // namespace msport

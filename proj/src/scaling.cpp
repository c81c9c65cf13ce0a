#include "msport/scaling.hpp"

#include "msport/error.hpp"

#include <Eigen/QR>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <set>

namespace msport {

std::vector<int> default_scales() { return {1, 2, 5, 10, 21}; }

std::vector<double> default_q_grid() { return {-4, -3, -2, -1, 1, 2, 3, 4}; }

std::vector<int> default_mfdfa_scales(std::size_t n) {
    const double lo = 16.0;
    const double hi = static_cast<double>(n) / 8.0;
    if (hi < lo) throw Error(ErrorCode::SeriesTooShort, "MF-DFA needs at least 128 observations for default scales");
    constexpr int kCount = 12;
    std::set<int> sizes;
    for (int k = 0; k < kCount; ++k) {
        const double frac = static_cast<double>(k) / (kCount - 1);
        sizes.insert(static_cast<int>(std::lround(lo * std::pow(hi / lo, frac))));
    }
    return {sizes.begin(), sizes.end()};
}

namespace {

void check_scales(const std::vector<int>& scales) {
    if (scales.empty()) throw Error(ErrorCode::InvalidArgument, "scale list is empty");
    for (int s : scales)
        if (s < 1) throw Error(ErrorCode::InvalidArgument, "scales must be >= 1, got " + std::to_string(s));
}

void check_asset(const ReturnPanel& base, Eigen::Index asset) {
    if (asset < 0 || asset >= base.assets())
        throw Error(ErrorCode::InvalidArgument, "asset index " + std::to_string(asset) + " out of range");
}

// Mean over phases of (mean over rows of f(block sums)) at scale dt.
template <class RowStat>
double phase_average(const ReturnPanel& base, int dt, RowStat&& stat) {
    double acc = 0.0;
    for (int phase = 0; phase < dt; ++phase) {
        if (dt == 1) {
            acc += stat(base.returns);
        } else {
            acc += stat(aggregate_matrix(base.returns, dt, Aggregation::NonOverlapping, phase));
        }
    }
    return acc / dt;
}

}  // namespace

std::vector<MomentPoint> structure_function(const ReturnPanel& base, Eigen::Index asset, double q,
                                            const std::vector<int>& scales) {
    if (q == 0.0) throw Error(ErrorCode::InvalidArgument, "moment order q must be nonzero");
    check_scales(scales);
    check_asset(base, asset);
    for (int dt : scales) require_estimable_scale(base.rows(), dt);
    if ((base.returns.col(asset).array() == 0.0).all())
        throw Error(ErrorCode::ZeroMoment, "all returns of asset '" + base.asset_ids[static_cast<std::size_t>(asset)] + "' are zero");

    std::vector<MomentPoint> points;
    points.reserve(scales.size());
    for (int dt : scales) {
        const double m = phase_average(base, dt, [&](const Matrix& p) {
            return p.col(asset).array().abs().pow(q).mean();
        });
        points.push_back({static_cast<double>(dt), m});
    }
    return points;
}

ExponentFit fit_scaling_exponent(std::span<const MomentPoint> points) {
    if (points.size() < 3) throw Error(ErrorCode::TooFewPoints, "need >= 3 points, got " + std::to_string(points.size()));
    const auto n = static_cast<double>(points.size());
    double mx = 0.0, my = 0.0;
    for (const auto& p : points) {
        if (!(p.moment > 0.0) || !std::isfinite(p.moment))
            throw Error(ErrorCode::NonPositiveMoment, "moment " + std::to_string(p.moment) + " at scale " + std::to_string(p.scale));
        if (!(p.scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "scales must be positive");
        mx += std::log(p.scale);
        my += std::log(p.moment);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (const auto& p : points) {
        const double dx = std::log(p.scale) - mx;
        const double dy = std::log(p.moment) - my;
        sxx += dx * dx;
        sxy += dx * dy;
        syy += dy * dy;
    }
    if (sxx <= 0.0) throw Error(ErrorCode::TooFewPoints, "need at least two distinct scales");
    ExponentFit fit;
    fit.exponent = sxy / sxx;
    const double sse = std::max(0.0, syy - fit.exponent * sxy);
    fit.std_error = std::sqrt(sse / (n - 2.0) / sxx);
    fit.r2 = syy > 0.0 ? std::clamp(1.0 - sse / syy, 0.0, 1.0) : 1.0;
    return fit;
}

HurstEstimate estimate_hurst(const ReturnPanel& base, Eigen::Index asset, const std::vector<int>& scales) {
    HurstEstimate est;
    est.points = structure_function(base, asset, 2.0, scales);
    const ExponentFit fit = fit_scaling_exponent(est.points);
    est.hurst = fit.exponent / 2.0;
    est.std_error = fit.std_error / 2.0;
    est.r2 = fit.r2;
    return est;
}

double ScalingSpectrum::h_at(double q) const {
    for (std::size_t k = 0; k < q_grid.size(); ++k)
        if (q_grid[k] == q) return h_of_q[k];
    throw Error(ErrorCode::InvalidArgument, "q=" + std::to_string(q) + " not on the spectrum grid");
}

namespace {

std::vector<double> sorted_q_grid(std::vector<double> q_grid) {
    if (q_grid.empty()) throw Error(ErrorCode::InvalidArgument, "q grid is empty");
    std::sort(q_grid.begin(), q_grid.end());
    q_grid.erase(std::unique(q_grid.begin(), q_grid.end()), q_grid.end());
    if (std::find(q_grid.begin(), q_grid.end(), 0.0) != q_grid.end())
        throw Error(ErrorCode::InvalidArgument, "q = 0 is not allowed in the q grid");
    return q_grid;
}

void finish_monotone_flag(ScalingSpectrum& s) {
    s.monotone = true;
    for (std::size_t k = 1; k < s.h_of_q.size(); ++k)
        if (s.h_of_q[k] > s.h_of_q[k - 1]) s.monotone = false;
}

}  // namespace

ScalingSpectrum structure_spectrum(const ReturnPanel& base, Eigen::Index asset, std::vector<double> q_grid,
                                   const std::vector<int>& scales) {
    check_asset(base, asset);
    ScalingSpectrum s;
    s.asset_id = base.asset_ids[static_cast<std::size_t>(asset)];
    s.method = "structure_function";
    s.q_grid = sorted_q_grid(std::move(q_grid));
    s.scales = scales;
    for (double q : s.q_grid) {
        const auto pts = structure_function(base, asset, q, scales);
        const ExponentFit fit = fit_scaling_exponent(pts);
        s.zeta.push_back(fit.exponent);
        s.h_of_q.push_back(fit.exponent / q);
        s.h_std_error.push_back(fit.std_error / std::abs(q));
        s.fit_r2.push_back(fit.r2);
    }
    finish_monotone_flag(s);
    return s;
}

ScalingSpectrum mfdfa(std::span<const double> series, std::vector<double> q_grid, const std::vector<int>& scales,
                      int detrend_order) {
    if (detrend_order < 1) throw Error(ErrorCode::InvalidArgument, "detrend order must be >= 1");
    check_scales(scales);
    ScalingSpectrum out;
    out.method = "mfdfa";
    out.q_grid = sorted_q_grid(std::move(q_grid));
    out.detrend_order = detrend_order;
    out.scales = scales;
    std::sort(out.scales.begin(), out.scales.end());
    out.scales.erase(std::unique(out.scales.begin(), out.scales.end()), out.scales.end());
    if (out.scales.size() < 3) throw Error(ErrorCode::TooFewPoints, "MF-DFA needs at least 3 distinct scales");

    const auto N = static_cast<Eigen::Index>(series.size());
    const int max_scale = out.scales.back();
    if (N < 4 * static_cast<Eigen::Index>(max_scale))
        throw Error(ErrorCode::SeriesTooShort, "series of length " + std::to_string(N) + " is shorter than 4 x max scale " +
                                                   std::to_string(max_scale));
    if (out.scales.front() <= detrend_order + 1)
        throw Error(ErrorCode::InvalidArgument, "smallest scale must exceed detrend order + 1");

    Eigen::Map<const Vector> x(series.data(), N);
    const double mean = x.mean();
    Vector profile(N);
    double run = 0.0;
    for (Eigen::Index i = 0; i < N; ++i) {
        run += x(i) - mean;
        profile(i) = run;
    }

    // log F_q(s) per (q, scale)
    std::vector<std::vector<MomentPoint>> curves(out.q_grid.size());
    for (int s : out.scales) {
        // Orthonormal basis of polynomials up to detrend_order on s points.
        Matrix vander(s, detrend_order + 1);
        for (int i = 0; i < s; ++i) {
            const double u = 2.0 * i / (s - 1) - 1.0;
            double pw = 1.0;
            for (int d = 0; d <= detrend_order; ++d) {
                vander(i, d) = pw;
                pw *= u;
            }
        }
        Eigen::HouseholderQR<Matrix> qr(vander);
        const Matrix basis = qr.householderQ() * Matrix::Identity(s, detrend_order + 1);

        const Eigen::Index segments = N / s;
        std::vector<double> log_f2;
        log_f2.reserve(static_cast<std::size_t>(2 * segments));
        auto add_segment = [&](Eigen::Index start) {
            const auto y = profile.segment(start, s);
            const Vector resid = y - basis * (basis.transpose() * y);
            const double f2 = resid.squaredNorm() / s;
            if (f2 > 0.0 && std::isfinite(f2)) log_f2.push_back(std::log(f2));
        };
        for (Eigen::Index v = 0; v < segments; ++v) add_segment(v * s);
        for (Eigen::Index v = 0; v < segments; ++v) add_segment(N - (v + 1) * s);
        if (log_f2.empty())
            throw Error(ErrorCode::DegenerateSegments, "every segment has zero variance at scale " + std::to_string(s));

        for (std::size_t k = 0; k < out.q_grid.size(); ++k) {
            const double half_q = out.q_grid[k] / 2.0;
            // log-sum-exp of (q/2) log F^2
            double top = -std::numeric_limits<double>::infinity();
            for (double l : log_f2) top = std::max(top, half_q * l);
            double acc = 0.0;
            for (double l : log_f2) acc += std::exp(half_q * l - top);
            const double log_mean = top + std::log(acc / static_cast<double>(log_f2.size()));
            const double log_fq = log_mean / out.q_grid[k];
            curves[k].push_back({static_cast<double>(s), std::exp(log_fq)});
        }
    }

    for (std::size_t k = 0; k < out.q_grid.size(); ++k) {
        const ExponentFit fit = fit_scaling_exponent(curves[k]);
        out.h_of_q.push_back(fit.exponent);
        out.zeta.push_back(fit.exponent * out.q_grid[k]);
        out.h_std_error.push_back(fit.std_error);
        out.fit_r2.push_back(fit.r2);
    }
    finish_monotone_flag(out);
    return out;
}

ScalingSpectrum mfdfa(const ReturnPanel& base, Eigen::Index asset, std::vector<double> q_grid, std::vector<int> scales,
                      int detrend_order) {
    check_asset(base, asset);
    if (scales.empty()) scales = default_mfdfa_scales(static_cast<std::size_t>(base.rows()));
    const Vector col = base.returns.col(asset);
    ScalingSpectrum s = mfdfa(std::span<const double>(col.data(), static_cast<std::size_t>(col.size())),
                              std::move(q_grid), scales, detrend_order);
    s.asset_id = base.asset_ids[static_cast<std::size_t>(asset)];
    return s;
}

double pearson(const Eigen::Ref<const Vector>& x, const Eigen::Ref<const Vector>& y) {
    const Vector dx = x.array() - x.mean();
    const Vector dy = y.array() - y.mean();
    const double denom = std::sqrt(dx.squaredNorm() * dy.squaredNorm());
    if (!(denom > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return dx.dot(dy) / denom;
}

CorrelationScaling estimate_correlation_scaling(const ReturnPanel& base, Eigen::Index i, Eigen::Index j,
                                                const std::vector<int>& scales) {
    check_asset(base, i);
    check_asset(base, j);
    check_scales(scales);
    for (int dt : scales) require_estimable_scale(base.rows(), dt);

    CorrelationScaling out;
    out.asset_i = base.asset_ids[static_cast<std::size_t>(i)];
    out.asset_j = base.asset_ids[static_cast<std::size_t>(j)];
    out.scales = scales;

    std::vector<MomentPoint> rho_pts, cross_pts;
    for (int dt : scales) {
        const double rho = phase_average(base, dt, [&](const Matrix& p) {
            const double r = pearson(p.col(i), p.col(j));
            if (std::isnan(r))
                throw Error(ErrorCode::ZeroVolatility, "zero variance at scale " + std::to_string(dt) + "; correlation undefined");
            return r;
        });
        const double cross = phase_average(base, dt, [&](const Matrix& p) {
            return p.col(i).dot(p.col(j)) / static_cast<double>(p.rows());
        });
        out.rho.push_back(rho);
        out.cross_moment.push_back(cross);
        if (rho <= 0.0 || cross <= 0.0) out.negative_correlation = true;
        rho_pts.push_back({static_cast<double>(dt), std::abs(rho)});
        cross_pts.push_back({static_cast<double>(dt), std::abs(cross)});
    }
    out.h_rho = fit_scaling_exponent(rho_pts);
    out.h_ij_2 = fit_scaling_exponent(cross_pts);
    out.h_i_1 = fit_scaling_exponent(structure_function(base, i, 1.0, scales));
    out.h_j_1 = fit_scaling_exponent(structure_function(base, j, 1.0, scales));
    out.identity_residual = out.h_rho.exponent - (out.h_ij_2.exponent - out.h_i_1.exponent - out.h_j_1.exponent);
    out.combined_std_error = std::sqrt(out.h_rho.std_error * out.h_rho.std_error + out.h_ij_2.std_error * out.h_ij_2.std_error +
                                       out.h_i_1.std_error * out.h_i_1.std_error + out.h_j_1.std_error * out.h_j_1.std_error);
    return out;
}

}  // namespace msport

#include "msport/synth.hpp"

#include "msport/error.hpp"

#include <fftw3.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <mutex>
#include <numbers>
#include <random>

namespace msport::synth {

namespace {

using Rng = std::mt19937_64;

// FFTW's planner is not re-entrant.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

// In-place forward DFT of a complex buffer.
void forward_dft(std::vector<std::complex<double>>& data) {
    auto* buf = reinterpret_cast<fftw_complex*>(data.data());
    fftw_plan plan;
    {
        std::lock_guard lock(fftw_planner_mutex());
        plan = fftw_plan_dft_1d(static_cast<int>(data.size()), buf, buf, FFTW_FORWARD, FFTW_ESTIMATE);
    }
    fftw_execute(plan);
    std::lock_guard lock(fftw_planner_mutex());
    fftw_destroy_plan(plan);
}

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

ReturnPanel single_column(Vector values, std::string id = "A1") {
    ReturnPanel out;
    out.asset_ids = {std::move(id)};
    out.returns = Matrix(values.size(), 1);
    out.returns.col(0) = std::move(values);
    out.timestamps = synthetic_dates(static_cast<std::size_t>(out.returns.rows()) + 1);
    out.timestamps.erase(out.timestamps.begin());
    return out;
}

ReturnPanel with_dates(Matrix returns) {
    ReturnPanel out;
    for (Eigen::Index a = 0; a < returns.cols(); ++a) out.asset_ids.push_back("A" + std::to_string(a + 1));
    out.timestamps = synthetic_dates(static_cast<std::size_t>(returns.rows()) + 1);
    out.timestamps.erase(out.timestamps.begin());
    out.returns = std::move(returns);
    return out;
}

void check_hurst(double hurst) {
    if (!(hurst > 0.0 && hurst < 1.0))
        throw Error(ErrorCode::InvalidArgument, "Hurst exponent must lie in (0, 1), got " + std::to_string(hurst));
}

Matrix psd_sqrt(const Matrix& sigma) {
    if (sigma.rows() != sigma.cols() || sigma.rows() == 0)
        throw Error(ErrorCode::DimensionMismatch, "covariance must be a non-empty square matrix");
    if (!sigma.isApprox(sigma.transpose(), 1e-12))
        throw Error(ErrorCode::NotPSD, "covariance is not symmetric");
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sigma);
    const double top = std::max(1.0, eig.eigenvalues().cwiseAbs().maxCoeff());
    if (eig.eigenvalues().minCoeff() < -1e-10 * top)
        throw Error(ErrorCode::NotPSD, "covariance has eigenvalue " + std::to_string(eig.eigenvalues().minCoeff()));
    Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept {
    // splitmix64 finalizer
    std::uint64_t z = seed + index + 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ReturnPanel gen_gaussian_iid(std::size_t n, double sigma_daily, std::uint64_t seed, std::size_t assets) {
    if (n < 16) throw Error(ErrorCode::BadLength, "gaussian_iid needs n >= 16, got " + std::to_string(n));
    if (assets == 0) throw Error(ErrorCode::InvalidArgument, "need at least one asset");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, sigma_daily);
    Matrix r(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(assets));
    for (Eigen::Index t = 0; t < r.rows(); ++t)
        for (Eigen::Index a = 0; a < r.cols(); ++a) r(t, a) = normal(rng);
    return with_dates(std::move(r));
}

double fgn_autocovariance(std::size_t k, double hurst, double sigma) {
    const double h2 = 2.0 * hurst;
    const double kd = static_cast<double>(k);
    const double lag_minus = k == 0 ? 1.0 : std::pow(kd - 1.0, h2);
    return 0.5 * sigma * sigma * (std::pow(kd + 1.0, h2) - 2.0 * std::pow(kd, h2) + lag_minus);
}

ReturnPanel gen_fgn_cholesky(std::size_t n, double hurst, double sigma_daily, std::uint64_t seed) {
    check_hurst(hurst);
    if (n < 2 || n > 1024) throw Error(ErrorCode::BadLength, "Cholesky fGn path supports 2 <= n <= 1024");
    const auto N = static_cast<Eigen::Index>(n);
    Matrix cov(N, N);
    for (Eigen::Index i = 0; i < N; ++i)
        for (Eigen::Index j = 0; j < N; ++j)
            cov(i, j) = fgn_autocovariance(static_cast<std::size_t>(std::abs(i - j)), hurst, sigma_daily);
    Eigen::LLT<Matrix> llt(cov);
    if (llt.info() != Eigen::Success) throw Error(ErrorCode::EmbeddingFailure, "fGn covariance is not positive definite");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Vector z(N);
    for (Eigen::Index i = 0; i < N; ++i) z(i) = normal(rng);
    return single_column(llt.matrixL() * z);
}

ReturnPanel gen_fgn(std::size_t n, double hurst, double sigma_daily, std::uint64_t seed) {
    check_hurst(hurst);
    if (!is_power_of_two(n) || n < 16)
        throw Error(ErrorCode::BadLength, "fGn length must be a power of two >= 16, got " + std::to_string(n));

    // First row of the 2n circulant: c = [g(0) .. g(n), g(n-1) .. g(1)].
    const std::size_t m = 2 * n;
    std::vector<std::complex<double>> eig(m);
    for (std::size_t k = 0; k <= n; ++k) eig[k] = fgn_autocovariance(k, hurst, sigma_daily);
    for (std::size_t k = n + 1; k < m; ++k) eig[k] = eig[m - k];
    forward_dft(eig);

    double top = 0.0, bottom = std::numeric_limits<double>::infinity();
    for (const auto& e : eig) {
        top = std::max(top, e.real());
        bottom = std::min(bottom, e.real());
    }
    if (bottom < -1e-10 * top) {
        if (n <= 1024) return gen_fgn_cholesky(n, hurst, sigma_daily, seed);
        throw Error(ErrorCode::EmbeddingFailure, "circulant embedding has negative eigenvalue " + std::to_string(bottom));
    }

    Rng rng(seed);
    std::normal_distribution<double> normal;
    std::vector<std::complex<double>> w(m);
    const double inv_m = 1.0 / static_cast<double>(m);
    for (std::size_t k = 0; k < m; ++k) {
        const double amp = std::sqrt(std::max(eig[k].real(), 0.0) * inv_m);
        const double re = normal(rng);
        const double im = normal(rng);
        w[k] = amp * std::complex<double>(re, im);
    }
    forward_dft(w);
    Vector x(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) x(static_cast<Eigen::Index>(t)) = w[t].real();
    return single_column(std::move(x));
}

ReturnPanel gen_correlated(std::size_t n, const Matrix& sigma, std::uint64_t seed) {
    if (n < 2) throw Error(ErrorCode::BadLength, "need n >= 2");
    const Matrix root = psd_sqrt(sigma);
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const Eigen::Index N = sigma.rows();
    Matrix z(static_cast<Eigen::Index>(n), N);
    for (Eigen::Index t = 0; t < z.rows(); ++t)
        for (Eigen::Index a = 0; a < N; ++a) z(t, a) = normal(rng);
    return with_dates(z * root);  // root is symmetric
}

double epps_correlation(const EppsParameters& p, int dt) {
    const double phi = p.decay;
    const double a2 = p.noise_sd * p.noise_sd;
    const double D = dt;
    // cov(X, Y) = sum_{h=0}^{dt-1} (dt - h) kappa_h, kappa_h = (1-phi) phi^h
    // var(S)    = sum_{|h|<dt} (dt - |h|) gamma(h), gamma(h) = (1-phi) phi^|h| / (1+phi)
    double cov = 0.0, var_s = 0.0, pw = 1.0;
    for (int h = 0; h < dt; ++h) {
        const double wgt = D - h;
        cov += wgt * (1.0 - phi) * pw;
        var_s += (h == 0 ? 1.0 : 2.0) * wgt * (1.0 - phi) * pw / (1.0 + phi);
        pw *= phi;
    }
    const double var_x = D * (1.0 + a2);
    const double var_y = var_s + D * a2;
    return cov / std::sqrt(var_x * var_y);
}

namespace {

double loglog_slope(const std::vector<int>& scales, const std::vector<double>& values) {
    const std::size_t n = scales.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += std::log(static_cast<double>(scales[i]));
        my += std::log(values[i]);
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = std::log(static_cast<double>(scales[i])) - mx;
        sxy += dx * (std::log(values[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

EppsCalibration evaluate_epps(const EppsParameters& p, double rho_inf, const std::vector<int>& scales) {
    EppsCalibration c;
    c.params = p;
    c.rho_inf = rho_inf;
    c.scales = scales;
    for (int dt : scales) c.rho.push_back(epps_correlation(p, dt));
    c.fitted_exponent = loglog_slope(scales, c.rho);
    return c;
}

}  // namespace

EppsCalibration calibrate_epps(double rho_inf, double h_rho, const std::vector<int>& scales) {
    if (!(rho_inf > 0.0 && rho_inf <= 1.0))
        throw Error(ErrorCode::InvalidArgument, "rho_inf must lie in (0, 1]");
    if (!(h_rho > 0.0 && h_rho < 1.0)) throw Error(ErrorCode::InvalidArgument, "H_rho must lie in (0, 1)");
    if (scales.size() < 2 || std::any_of(scales.begin(), scales.end(), [](int s) { return s < 1; }))
        throw Error(ErrorCode::InvalidArgument, "calibration needs at least two positive scales");

    const double noise = std::sqrt(1.0 / rho_inf - 1.0);
    auto slope_at = [&](double decay) { return evaluate_epps({decay, noise}, rho_inf, scales).fitted_exponent; };

    // The slope rises monotonically with the kernel decay, from 0 at decay = 0.
    constexpr double kMaxDecay = 0.9999;
    const double max_slope = slope_at(kMaxDecay);
    if (h_rho >= max_slope) {
        throw Error(ErrorCode::CalibrationFailure,
                    "H_rho=" + std::to_string(h_rho) + " not reachable with rho_inf=" + std::to_string(rho_inf) +
                        "; nearest achievable pair is (rho_inf=" + std::to_string(rho_inf) +
                        ", H_rho=" + std::to_string(max_slope) + ")");
    }
    double lo = 0.0, hi = kMaxDecay;
    for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
        const double mid = 0.5 * (lo + hi);
        (slope_at(mid) < h_rho ? lo : hi) = mid;
    }
    return evaluate_epps({0.5 * (lo + hi), noise}, rho_inf, scales);
}

ReturnPanel gen_epps_raw(std::size_t n, const EppsParameters& p, double sigma_daily, std::uint64_t seed) {
    if (n < 16) throw Error(ErrorCode::BadLength, "epps needs n >= 16");
    if (!(p.decay >= 0.0 && p.decay < 1.0)) throw Error(ErrorCode::InvalidArgument, "kernel decay must lie in [0, 1)");
    if (p.noise_sd < 0.0) throw Error(ErrorCode::InvalidArgument, "noise level must be >= 0");
    Rng rng(seed);
    std::normal_distribution<double> normal;
    const double phi = p.decay;
    // stationary start: var(S) = (1-phi)/(1+phi)
    double s = std::sqrt((1.0 - phi) / (1.0 + phi)) * normal(rng);
    Matrix r(static_cast<Eigen::Index>(n), 2);
    for (Eigen::Index t = 0; t < r.rows(); ++t) {
        const double f = normal(rng);
        const double e1 = normal(rng);
        const double e2 = normal(rng);
        s = phi * s + (1.0 - phi) * f;
        r(t, 0) = sigma_daily * (f + p.noise_sd * e1);
        r(t, 1) = sigma_daily * (s + p.noise_sd * e2);
    }
    return with_dates(std::move(r));
}

ReturnPanel gen_epps(std::size_t n, double rho_inf, double h_rho, std::uint64_t seed, double sigma_daily) {
    return gen_epps_raw(n, calibrate_epps(rho_inf, h_rho).params, sigma_daily, seed);
}

ReturnPanel gen_regime_switch(const RegimeSwitchSpec& spec, std::uint64_t seed) {
    if (spec.n < 16) throw Error(ErrorCode::BadLength, "regime_switch needs n >= 16");
    if (!(spec.sigma_low > 0.0 && spec.sigma_low < spec.sigma_high))
        throw Error(ErrorCode::InvalidArgument, "need 0 < sigma_low < sigma_high");
    for (std::size_t i = 0; i < spec.switch_points.size(); ++i) {
        if (spec.switch_points[i] >= spec.n || (i > 0 && spec.switch_points[i] <= spec.switch_points[i - 1]))
            throw Error(ErrorCode::BadSchedule, "switch points must be strictly increasing and lie in [0, n)");
    }
    if (spec.assets == 0) throw Error(ErrorCode::InvalidArgument, "need at least one asset");
    const auto N = static_cast<Eigen::Index>(spec.assets);
    Vector mult = Vector::Ones(N);
    if (!spec.vol_multipliers.empty()) {
        if (spec.vol_multipliers.size() != spec.assets)
            throw Error(ErrorCode::DimensionMismatch, "one volatility multiplier per asset required");
        for (Eigen::Index a = 0; a < N; ++a) mult(a) = spec.vol_multipliers[static_cast<std::size_t>(a)];
    }
    Matrix root = Matrix::Identity(N, N);
    if (spec.correlation.size() > 0) {
        if (spec.correlation.rows() != N || spec.correlation.cols() != N)
            throw Error(ErrorCode::DimensionMismatch, "correlation matrix must be assets x assets");
        root = psd_sqrt(spec.correlation);
    }
    Rng rng(seed);
    std::normal_distribution<double> normal;
    Matrix r(static_cast<Eigen::Index>(spec.n), N);
    Vector z(N);
    std::size_t next = 0;
    bool high = false;
    for (Eigen::Index t = 0; t < r.rows(); ++t) {
        while (next < spec.switch_points.size() && spec.switch_points[next] == static_cast<std::size_t>(t)) {
            high = !high;
            ++next;
        }
        const double sigma = high ? spec.sigma_high : spec.sigma_low;
        for (Eigen::Index a = 0; a < N; ++a) z(a) = normal(rng);
        r.row(t) = (spec.drift + sigma * (root * z).cwiseProduct(mult).array()).matrix().transpose();
    }
    return with_dates(std::move(r));
}

ReturnPanel gen_regime_switch(std::size_t n, double sigma_low, double sigma_high,
                              const std::vector<std::size_t>& switch_points, std::uint64_t seed) {
    RegimeSwitchSpec spec;
    spec.n = n;
    spec.sigma_low = sigma_low;
    spec.sigma_high = sigma_high;
    spec.switch_points = switch_points;
    return gen_regime_switch(spec, seed);
}

ReturnPanel gen_multifractal(std::size_t n, double intermittency, double h_base, std::uint64_t seed,
                             double sigma_daily) {
    if (!is_power_of_two(n) || n < 16)
        throw Error(ErrorCode::BadDepth, "cascade length must be 2^depth with depth >= 4, got " + std::to_string(n));
    if (!(intermittency > 0.0 && intermittency < 0.5))
        throw Error(ErrorCode::InvalidArgument, "intermittency lambda^2 must lie in (0, 0.5)");
    check_hurst(h_base);
    int depth = 0;
    while ((std::size_t{1} << depth) < n) ++depth;

    Rng rng(derive_seed(seed, 0));
    std::normal_distribution<double> normal;
    const double level_var = intermittency * std::numbers::ln2;
    const double level_sd = std::sqrt(level_var);
    std::vector<double> log_measure(n, 0.0);
    for (int level = 1; level <= depth; ++level) {
        const std::size_t intervals = std::size_t{1} << level;
        const std::size_t width = n / intervals;
        for (std::size_t k = 0; k < intervals; ++k) {
            const double w = -0.5 * level_var + level_sd * normal(rng);
            for (std::size_t t = k * width; t < (k + 1) * width; ++t) log_measure[t] += w;
        }
    }
    Vector noise = h_base == 0.5 ? gen_gaussian_iid(n, 1.0, derive_seed(seed, 1)).returns.col(0)
                                 : gen_fgn(n, h_base, 1.0, derive_seed(seed, 1)).returns.col(0);
    Vector vol(static_cast<Eigen::Index>(n));
    for (std::size_t t = 0; t < n; ++t) vol(static_cast<Eigen::Index>(t)) = std::exp(0.5 * log_measure[t]);
    // normalize so the mean variance multiplier is one on this path
    const double mean_var = vol.squaredNorm() / static_cast<double>(n);
    vol /= std::sqrt(mean_var);
    return single_column(sigma_daily * vol.cwiseProduct(noise));
}

ReturnPanel gen_stable(std::size_t n, double alpha, double scale, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha <= 2.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0, 2]");
    if (n < 16) throw Error(ErrorCode::BadLength, "stable fixture needs n >= 16");
    Rng rng(seed);
    std::uniform_real_distribution<double> angle(-std::numbers::pi / 2.0, std::numbers::pi / 2.0);
    std::exponential_distribution<double> expo(1.0);
    Vector x(static_cast<Eigen::Index>(n));
    for (Eigen::Index t = 0; t < x.size(); ++t) {
        const double v = angle(rng);
        const double w = expo(rng);
        x(t) = scale * std::sin(alpha * v) / std::pow(std::cos(v), 1.0 / alpha) *
               std::pow(std::cos(v - alpha * v) / w, (1.0 - alpha) / alpha);
    }
    return single_column(std::move(x));
}

Kind parse_kind(const std::string& name) {
    if (name == "gaussian" || name == "gaussian_iid") return Kind::GaussianIid;
    if (name == "fgn") return Kind::Fgn;
    if (name == "correlated") return Kind::Correlated;
    if (name == "epps") return Kind::Epps;
    if (name == "regime_switch" || name == "regime") return Kind::RegimeSwitch;
    if (name == "cascade" || name == "multifractal") return Kind::Cascade;
    throw Error(ErrorCode::InvalidArgument, "unknown generator kind '" + name + "'");
}

std::string kind_name(Kind kind) {
    switch (kind) {
        case Kind::GaussianIid: return "gaussian_iid";
        case Kind::Fgn: return "fgn";
        case Kind::Correlated: return "correlated";
        case Kind::Epps: return "epps";
        case Kind::RegimeSwitch: return "regime_switch";
        case Kind::Cascade: return "cascade";
    }
    return "unknown";
}

namespace {

// Independent columns from a single-asset generator, seeded per column.
template <class Gen>
ReturnPanel stack_columns(std::size_t assets, std::uint64_t seed, Gen&& gen) {
    if (assets <= 1) return gen(seed);
    std::vector<ReturnPanel> cols;
    for (std::size_t a = 0; a < assets; ++a) cols.push_back(gen(derive_seed(seed, a)));
    Matrix r(cols[0].rows(), static_cast<Eigen::Index>(assets));
    for (std::size_t a = 0; a < assets; ++a) r.col(static_cast<Eigen::Index>(a)) = cols[a].returns.col(0);
    return with_dates(std::move(r));
}

Matrix constant_correlation(std::size_t assets, double rho) {
    const auto N = static_cast<Eigen::Index>(assets);
    Matrix c = Matrix::Constant(N, N, rho);
    c.diagonal().setOnes();
    return c;
}

}  // namespace

ReturnPanel generate(const GeneratorSpec& spec) {
    switch (spec.kind) {
        case Kind::GaussianIid:
            return gen_gaussian_iid(spec.length, spec.sigma_daily, spec.seed, spec.assets);
        case Kind::Fgn:
            return stack_columns(spec.assets, spec.seed, [&](std::uint64_t s) {
                return gen_fgn(spec.length, spec.hurst, spec.sigma_daily, s);
            });
        case Kind::Correlated: {
            Matrix cov = spec.covariance;
            if (cov.size() == 0)
                cov = spec.sigma_daily * spec.sigma_daily * constant_correlation(spec.assets, spec.rho);
            return gen_correlated(spec.length, cov, spec.seed);
        }
        case Kind::Epps:
            return gen_epps(spec.length, spec.rho_inf, spec.h_rho, spec.seed, spec.sigma_daily);
        case Kind::RegimeSwitch: {
            RegimeSwitchSpec rs;
            rs.n = spec.length;
            rs.sigma_low = spec.sigma_low;
            rs.sigma_high = spec.sigma_high;
            rs.switch_points = spec.switch_points;
            rs.assets = spec.assets;
            rs.drift = spec.drift;
            if (spec.assets > 1) {
                // spread column volatilities over [0.5, 1.5] so allocations differ
                for (std::size_t a = 0; a < spec.assets; ++a)
                    rs.vol_multipliers.push_back(0.5 + static_cast<double>(a) / static_cast<double>(spec.assets - 1));
                rs.correlation = constant_correlation(spec.assets, spec.rho);
            }
            return gen_regime_switch(rs, spec.seed);
        }
        case Kind::Cascade:
            return stack_columns(spec.assets, spec.seed, [&](std::uint64_t s) {
                return gen_multifractal(spec.length, spec.intermittency, spec.hurst, s, spec.sigma_daily);
            });
    }
    throw Error(ErrorCode::InvalidArgument, "unknown generator kind");
}

}  // namespace msport::synth

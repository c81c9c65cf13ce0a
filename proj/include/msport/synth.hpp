#pragma once

#include "msport/timeseries.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace msport::synth {

/// Seeds for batch generation: call `index` of a batch seeded with `seed`
/// uses splitmix64(seed + index).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// iid N(0, sigma_daily^2) returns. `assets` independent columns.
ReturnPanel gen_gaussian_iid(std::size_t n, double sigma_daily, std::uint64_t seed, std::size_t assets = 1);

/// Autocovariance of unit-step fractional Gaussian noise at lag k.
double fgn_autocovariance(std::size_t k, double hurst, double sigma);

/// Fractional Gaussian noise by circulant embedding; n must be a power of
/// two. Falls back to Cholesky of the Toeplitz covariance for n <= 1024 if
/// the embedding has materially negative eigenvalues.
ReturnPanel gen_fgn(std::size_t n, double hurst, double sigma_daily, std::uint64_t seed);

/// Exact Cholesky path (O(n^3)); exposed so the fallback is testable on its
/// own. Works for any n <= 1024.
ReturnPanel gen_fgn_cholesky(std::size_t n, double hurst, double sigma_daily, std::uint64_t seed);

/// iid multivariate normal rows with covariance `sigma` (PSD square root).
ReturnPanel gen_correlated(std::size_t n, const Matrix& sigma, std::uint64_t seed);

/// Lead-lag common factor pair. Asset 1 = f_t + a*e1_t; asset 2 = S_t + a*e2_t
/// where S is the geometric distributed lag S_t = decay*S_{t-1} + (1-decay)*f_t.
/// Correlation at scale dt rises towards 1/(1+a^2) as dt grows.
struct EppsParameters {
    double decay = 0.0;     // kernel ratio in [0, 1)
    double noise_sd = 0.0;  // a
};

struct EppsCalibration {
    EppsParameters params;
    double rho_inf = 1.0;
    double fitted_exponent = 0.0;  // log-log slope of the exact rho(dt) over `scales`
    std::vector<int> scales;
    std::vector<double> rho;       // exact rho(dt) per scale
};

/// Exact correlation of the dt-aggregated pair under `p`.
double epps_correlation(const EppsParameters& p, int dt);

/// Solves for the kernel decay that makes the exact log-log slope of rho(dt)
/// over `scales` equal `h_rho`, with noise fixed by rho_inf. Throws
/// CalibrationFailure naming the nearest achievable pair when out of range.
EppsCalibration calibrate_epps(double rho_inf, double h_rho, const std::vector<int>& scales = {1, 2, 5, 10, 21});

ReturnPanel gen_epps_raw(std::size_t n, const EppsParameters& p, double sigma_daily, std::uint64_t seed);
ReturnPanel gen_epps(std::size_t n, double rho_inf, double h_rho, std::uint64_t seed, double sigma_daily = 0.01);

/// Piecewise-constant volatility. The regime starts low and toggles at each
/// switch point (row index). Columns share the regime; `correlation` couples
/// them and `vol_multipliers` scales each column.
struct RegimeSwitchSpec {
    std::size_t n = 0;
    double sigma_low = 0.01;
    double sigma_high = 0.03;
    std::vector<std::size_t> switch_points;
    std::size_t assets = 1;
    std::vector<double> vol_multipliers;  // empty: all ones
    Matrix correlation;                   // empty: identity
    double drift = 0.0;                   // per-day mean log return
};
ReturnPanel gen_regime_switch(const RegimeSwitchSpec& spec, std::uint64_t seed);
ReturnPanel gen_regime_switch(std::size_t n, double sigma_low, double sigma_high,
                              const std::vector<std::size_t>& switch_points, std::uint64_t seed);

/// Lognormal multiplicative cascade volatility times fGn(h_base) noise.
/// n = 2^depth with depth >= 4; each of the depth levels multiplies every
/// dyadic interval by exp(N(-s^2/2, s^2)), s^2 = intermittency * ln 2, so the
/// multipliers have mean one.
ReturnPanel gen_multifractal(std::size_t n, double intermittency, double h_base, std::uint64_t seed,
                             double sigma_daily = 0.01);

/// Symmetric alpha-stable draws (Chambers-Mallows-Stuck), fat-tail fixture.
ReturnPanel gen_stable(std::size_t n, double alpha, double scale, std::uint64_t seed);

enum class Kind { GaussianIid, Fgn, Correlated, Epps, RegimeSwitch, Cascade };

Kind parse_kind(const std::string& name);
std::string kind_name(Kind kind);

/// One flat parameter bag for every generator kind (CLI and C API entry).
struct GeneratorSpec {
    Kind kind = Kind::GaussianIid;
    std::size_t length = 1024;
    std::uint64_t seed = 0;
    std::size_t assets = 1;
    double sigma_daily = 0.01;
    double hurst = 0.5;
    Matrix covariance;  // correlated
    double rho = 0.0;   // correlated / regime_switch constant correlation when no matrix is given
    double rho_inf = 0.8;
    double h_rho = 0.3;
    double sigma_low = 0.01;
    double sigma_high = 0.03;
    std::vector<std::size_t> switch_points;
    double drift = 0.0;
    double intermittency = 0.2;
};

ReturnPanel generate(const GeneratorSpec& spec);

}  // namespace msport::synth

#include "helpers.hpp"

#include "msport/scaling.hpp"
#include "msport/synth.hpp"

#include <algorithm>
#include <cmath>

using namespace msport;
using namespace msport::synth;

namespace {

double lag1_autocorrelation(const Vector& x) {
    const Vector c = x.array() - x.mean();
    return c.head(c.size() - 1).dot(c.tail(c.size() - 1)) / c.squaredNorm();
}

double sample_std(const Vector& x) {
    const Vector c = x.array() - x.mean();
    return std::sqrt(c.squaredNorm() / static_cast<double>(x.size() - 1));
}

// Two-sample Kolmogorov-Smirnov p-value (asymptotic Kolmogorov distribution).
double ks_two_sample_p(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    const double na = static_cast<double>(a.size()), nb = static_cast<double>(b.size());
    std::size_t i = 0, j = 0;
    double d = 0.0;
    while (i < a.size() && j < b.size()) {
        const double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    const double ne = na * nb / (na + nb);
    const double lambda = (std::sqrt(ne) + 0.12 + 0.11 / std::sqrt(ne)) * d;
    double p = 0.0;
    for (int k = 1; k <= 100; ++k) p += 2.0 * ((k % 2) ? 1.0 : -1.0) * std::exp(-2.0 * k * k * lambda * lambda);
    return std::clamp(p, 0.0, 1.0);
}

}  // namespace

TEST_CASE("seed derivation is a fixed mix") {
    CHECK(derive_seed(1, 0) != derive_seed(1, 1));
    CHECK(derive_seed(1, 0) != derive_seed(2, 0));
    CHECK(derive_seed(42, 7) == derive_seed(42, 7));
}

TEST_CASE("gaussian iid") {
    const auto p = gen_gaussian_iid(1 << 14, 0.01, 11);
    CHECK(sample_std(p.returns.col(0)) == doctest::Approx(0.01).epsilon(0.05));
    CHECK(estimate_hurst(p, 0).hurst == doctest::Approx(0.5).epsilon(0.1));
    CHECK(gen_gaussian_iid(64, 0.01, 5).returns == gen_gaussian_iid(64, 0.01, 5).returns);
    CHECK(gen_gaussian_iid(64, 0.01, 5).returns != gen_gaussian_iid(64, 0.01, 6).returns);
    CHECK_CODE(gen_gaussian_iid(8, 0.01, 1), BadLength);
}

TEST_CASE("fgn autocorrelation") {
    const auto half = gen_fgn(1 << 14, 0.5, 1.0, 3);
    CHECK(std::abs(lag1_autocorrelation(half.returns.col(0))) < 0.02);

    const double expected = std::pow(2.0, 2 * 0.7 - 1) - 1.0;
    CHECK(expected == doctest::Approx(0.3195).epsilon(1e-3));
    const auto persistent = gen_fgn(1 << 14, 0.7, 1.0, 4);
    CHECK(std::abs(lag1_autocorrelation(persistent.returns.col(0)) - expected) < 0.03);

    CHECK(fgn_autocovariance(0, 0.7, 2.0) == doctest::Approx(4.0));
    CHECK(fgn_autocovariance(1, 0.7, 1.0) == doctest::Approx(expected));
}

TEST_CASE("fgn preconditions and determinism") {
    CHECK_CODE(gen_fgn(1000, 0.7, 1.0, 1), BadLength);
    CHECK_CODE(gen_fgn(1024, 1.0, 1.0, 1), InvalidArgument);
    CHECK(gen_fgn(4096, 0.3, 0.01, 9).returns == gen_fgn(4096, 0.3, 0.01, 9).returns);
}

TEST_CASE("fgn Cholesky fallback has the right covariance") {
    // sample lag-1 autocovariance pooled over many short paths
    double acc0 = 0.0, acc1 = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) {
        const auto p = gen_fgn_cholesky(256, 0.8, 1.0, s);
        const Vector x = p.returns.col(0);
        acc0 += x.squaredNorm() / 256.0;
        acc1 += x.head(255).dot(x.tail(255)) / 255.0;
    }
    CHECK(acc0 / 200.0 == doctest::Approx(1.0).epsilon(0.05));
    CHECK(acc1 / 200.0 == doctest::Approx(fgn_autocovariance(1, 0.8, 1.0)).epsilon(0.1));
}

TEST_CASE("fgn at H = 0.5 matches iid Gaussian in distribution") {
    std::vector<double> a, b;
    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto f = gen_fgn(1024, 0.5, 1.0, derive_seed(100, s));
        const auto g = gen_gaussian_iid(1024, 1.0, derive_seed(200, s));
        for (Eigen::Index t = 0; t < 1024; ++t) {
            a.push_back(f.returns(t, 0));
            b.push_back(g.returns(t, 0));
        }
    }
    CHECK(ks_two_sample_p(a, b) > 0.01);
}

TEST_CASE("correlated panels") {
    const auto ind = gen_correlated(1 << 14, Matrix::Identity(2, 2), 21);
    CHECK(std::abs(pearson(ind.returns.col(0), ind.returns.col(1))) < 0.02);

    Matrix s(2, 2);
    s << 1, 0.5, 0.5, 1;
    const auto half = gen_correlated(1 << 14, s, 22);
    CHECK(pearson(half.returns.col(0), half.returns.col(1)) == doctest::Approx(0.5).epsilon(0.06));

    const auto same = gen_correlated(256, Matrix::Ones(2, 2), 23);
    CHECK((same.returns.col(0) - same.returns.col(1)).cwiseAbs().maxCoeff() < 1e-12);

    Matrix bad(2, 2);
    bad << 1, 2, 2, 1;
    CHECK_CODE(gen_correlated(64, bad, 1), NotPSD);
}

TEST_CASE("epps construction") {
    const auto cal = calibrate_epps(0.8, 0.3);
    CHECK(cal.fitted_exponent == doctest::Approx(0.3).epsilon(0.01));
    CHECK(epps_correlation(cal.params, 1) < epps_correlation(cal.params, 21));

    EppsParameters flat{0.0, cal.params.noise_sd};
    CHECK(epps_correlation(flat, 1) == doctest::Approx(epps_correlation(flat, 21)));
    const auto raw = gen_epps_raw(1 << 14, flat, 0.01, 5);
    CHECK(std::abs(estimate_correlation_scaling(raw, 0, 1).h_rho.exponent) < 0.05);

    for (std::uint64_t s = 0; s < 20; ++s) {
        const auto p = gen_epps(1 << 13, 0.8, 0.3, derive_seed(77, s));
        const auto cs = estimate_correlation_scaling(p, 0, 1, {1, 2, 21});
        CHECK(cs.rho.front() < cs.rho.back());
    }
    CHECK_CODE(calibrate_epps(0.05, 0.9), CalibrationFailure);
}

TEST_CASE("regime switching") {
    const auto none = gen_regime_switch(1 << 14, 0.01, 0.03, {}, 3);
    CHECK(sample_std(none.returns.col(0)) == doctest::Approx(0.01).epsilon(0.05));

    const std::size_t n = 1 << 14;
    const auto half = gen_regime_switch(n, 0.01, 0.03, {n / 2}, 4);
    const Vector x = half.returns.col(0);
    CHECK(x.squaredNorm() / static_cast<double>(n) == doctest::Approx((1e-4 + 9e-4) / 2).epsilon(0.05));
    const double before = sample_std(x.segment(n / 2 - 2000, 2000));
    const double after = sample_std(x.segment(n / 2, 2000));
    CHECK(after / before == doctest::Approx(3.0).epsilon(0.1));

    CHECK_CODE(gen_regime_switch(100, 0.01, 0.03, {50, 40}, 1), BadSchedule);
    CHECK_CODE(gen_regime_switch(100, 0.01, 0.03, {100}, 1), BadSchedule);
}

TEST_CASE("cascade") {
    CHECK_CODE(gen_multifractal(1000, 0.2, 0.5, 1), BadDepth);
    CHECK_CODE(gen_multifractal(8, 0.2, 0.5, 1), BadDepth);
    CHECK_CODE(gen_multifractal(1024, 0.6, 0.5, 1), InvalidArgument);
    CHECK(gen_multifractal(1024, 0.2, 0.5, 8).returns == gen_multifractal(1024, 0.2, 0.5, 8).returns);

    const auto weak = mfdfa(gen_multifractal(1 << 14, 1e-4, 0.5, 9), 0);
    CHECK(std::abs(weak.h_at(-4) - weak.h_at(4)) < 0.1);
}

TEST_CASE("stable fixture scales as 1/alpha at q = 1") {
    double sum = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s) {
        const auto p = gen_stable(1 << 14, 1.5, 0.01, derive_seed(5, s));
        const auto pts = structure_function(p, 0, 1.0, default_scales());
        sum += fit_scaling_exponent(pts).exponent;
    }
    CHECK(sum / 5.0 == doctest::Approx(1.0 / 1.5).epsilon(0.1));
}

TEST_CASE("generate dispatch") {
    GeneratorSpec spec;
    spec.kind = parse_kind("fgn");
    spec.length = 1024;
    spec.assets = 3;
    spec.hurst = 0.6;
    spec.seed = 4;
    const auto p = generate(spec);
    CHECK(p.assets() == 3);
    CHECK(p.rows() == 1024);
    CHECK(p.returns.col(0) != p.returns.col(1));
    CHECK(generate(spec).returns == p.returns);
    CHECK_CODE(parse_kind("brownian_bridge"), InvalidArgument);
    CHECK(kind_name(parse_kind("regime")) == kind_name(Kind::RegimeSwitch));
}

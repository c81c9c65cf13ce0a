#include "helpers.hpp"

#include "msport/scaling.hpp"
#include "msport/synth.hpp"

#include <cmath>

using namespace msport;
using testing::column;
using testing::panel_from;

TEST_CASE("fit of exact power laws") {
    const std::vector<MomentPoint> linear{{1, 1}, {2, 2}, {4, 4}};
    auto f = fit_scaling_exponent(linear);
    CHECK(f.exponent == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-14));

    const std::vector<MomentPoint> flat{{1, 1}, {2, 1}, {4, 1}};
    CHECK(fit_scaling_exponent(flat).exponent == 0.0);

    const std::vector<MomentPoint> half{{1, 1}, {4, 2}, {2, std::sqrt(2.0)}};
    CHECK(fit_scaling_exponent(half).exponent == doctest::Approx(0.5).epsilon(1e-14));

    std::vector<MomentPoint> pts;
    for (double s : {1.0, 2.0, 5.0, 10.0, 21.0}) pts.push_back({s, 3.0 * std::pow(s, 1.37)});
    f = fit_scaling_exponent(pts);
    CHECK(std::abs(f.exponent - 1.37) < 1e-12);
    CHECK(f.std_error < 1e-12);
    CHECK(f.r2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("fit preconditions") {
    const std::vector<MomentPoint> two{{1, 1}, {2, 2}};
    CHECK_CODE(fit_scaling_exponent(two), TooFewPoints);
    const std::vector<MomentPoint> zero{{1, 1}, {2, 0}, {4, 4}};
    CHECK_CODE(fit_scaling_exponent(zero), NonPositiveMoment);
}

TEST_CASE("structure function examples") {
    CHECK_CODE(structure_function(column({0, 0, 0, 0, 0, 0, 0, 0, 0, 0}), 0, 2.0, {1, 2}), ZeroMoment);

    // every aggregated pair cancels in both phases
    Matrix alt(10, 1);
    alt << 1, -1, 1, -1, 1, -1, 1, -1, 1, -1;
    const auto pts = structure_function(panel_from(alt), 0, 2.0, {1, 2});
    CHECK(pts[0].moment == doctest::Approx(1.0));
    CHECK(pts[1].moment == 0.0);

    CHECK_CODE(structure_function(panel_from(alt), 0, 2.0, {3}), ScaleTooLarge);
    CHECK_CODE(structure_function(panel_from(alt), 0, 0.0, {1}), InvalidArgument);
}

TEST_CASE("structure function matches a hand computation with phase averaging") {
    Matrix r(9, 1);
    r << 0.5, -1.0, 2.0, 0.25, -0.75, 1.5, -2.0, 1.0, 0.5;
    const auto pts = structure_function(panel_from(r), 0, 1.0, {2});
    // phase 0: |-0.5|,|2.25|,|0.75|,|-1.0| ; phase 1: |1.0|,|-0.5|,|-0.5|,|1.5|
    const double p0 = (0.5 + 2.25 + 0.75 + 1.0) / 4.0;
    const double p1 = (1.0 + 0.5 + 0.5 + 1.5) / 4.0;
    CHECK(pts[0].moment == doctest::Approx((p0 + p1) / 2.0).epsilon(1e-14));
}

TEST_CASE("hurst of iid Gaussian") {
    const auto p = synth::gen_gaussian_iid(1 << 14, 1.0, 31);
    const auto h = estimate_hurst(p, 0);
    CHECK(std::abs(h.hurst - 0.5) < 0.05);
    const auto pts = structure_function(p, 0, 2.0, default_scales());
    CHECK(std::abs(fit_scaling_exponent(pts).exponent - 1.0) < 0.1);
}

TEST_CASE("hurst recovery on fgn (20 seeds)") {
    for (double H : {0.3, 0.7}) {
        double sum = 0.0;
        for (std::uint64_t s = 0; s < 20; ++s) sum += estimate_hurst(synth::gen_fgn(1 << 14, H, 0.01, synth::derive_seed(500, s)), 0).hurst;
        CHECK(std::abs(sum / 20.0 - H) < 0.05);
    }
}

TEST_CASE("mfdfa on iid noise is flat") {
    const auto s = mfdfa(synth::gen_gaussian_iid(1 << 14, 1.0, 41), 0);
    for (double h : s.h_of_q) CHECK(std::abs(h - 0.5) < 0.1);
    for (double r2 : s.fit_r2) {
        CHECK(r2 >= 0.0);
        CHECK(r2 <= 1.0);
    }
    CHECK(s.method == "mfdfa");
    CHECK(s.detrend_order == 1);
}

TEST_CASE("mfdfa recovers fgn h(2)") {
    const auto s = mfdfa(synth::gen_fgn(1 << 14, 0.7, 1.0, 42), 0);
    CHECK(std::abs(s.h_at(2.0) - 0.7) < 0.05);
}

TEST_CASE("mfdfa sees cascade multifractality") {
    const auto s = mfdfa(synth::gen_multifractal(1 << 14, 0.2, 0.5, 43), 0);
    CHECK(s.h_at(-4) - s.h_at(4) > 0.1);
    for (std::size_t k = 1; k < s.h_of_q.size(); ++k) CHECK(s.h_of_q[k] < s.h_of_q[k - 1]);
    CHECK(s.monotone);
}

TEST_CASE("mfdfa preconditions") {
    Vector x = Vector::LinSpaced(200, 0.0, 1.0);
    const std::vector<double> qs{2.0};
    CHECK_CODE(mfdfa(std::span<const double>(x.data(), 200), qs, {16, 32, 64}), SeriesTooShort);
    const std::vector<double> with_zero{0.0, 2.0};
    CHECK_CODE(mfdfa(std::span<const double>(x.data(), 200), with_zero, {8, 16, 32}), InvalidArgument);
    Vector zeros = Vector::Zero(256);
    CHECK_CODE(mfdfa(std::span<const double>(zeros.data(), 256), qs, {8, 16, 32}), DegenerateSegments);
    CHECK_CODE(mfdfa(std::span<const double>(zeros.data(), 256), qs, {8, 16, 32}, 0), InvalidArgument);
}

TEST_CASE("mfdfa detrending removes a polynomial trend in the profile") {
    // order-2 detrending annihilates a linear drift in the returns exactly
    const auto noise = synth::gen_gaussian_iid(4096, 1.0, 44);
    Matrix drifted = noise.returns;
    for (Eigen::Index t = 0; t < drifted.rows(); ++t) drifted(t, 0) += 1e-3 * static_cast<double>(t);
    const auto a = mfdfa(noise, 0, {2.0}, {}, 2);
    const auto b = mfdfa(panel_from(drifted), 0, {2.0}, {}, 2);
    CHECK(a.h_of_q[0] == doctest::Approx(b.h_of_q[0]).epsilon(1e-6));
}

TEST_CASE("hurst estimators agree on monofractal data") {
    const auto p = synth::gen_fgn(1 << 14, 0.6, 1.0, 45);
    const auto h = estimate_hurst(p, 0);
    const auto s = mfdfa(p, 0, {2.0});
    const double se = std::hypot(h.std_error, s.h_std_error[0]);
    CHECK(std::abs(h.hurst - s.h_of_q[0]) < std::max(2.0 * se, 0.05));
}

TEST_CASE("spectrum monotonicity flag") {
    const auto s = structure_spectrum(synth::gen_gaussian_iid(4096, 1.0, 46), 0, {1.0, 2.0, 3.0});
    CHECK(s.q_grid.size() == 3);
    for (std::size_t k = 0; k < 3; ++k) CHECK(s.zeta[k] == doctest::Approx(s.q_grid[k] * s.h_of_q[k]));
}

TEST_CASE("correlation scaling") {
    const auto base = synth::gen_gaussian_iid(4096, 1.0, 47);
    Matrix twin(base.rows(), 2);
    twin.col(0) = base.returns.col(0);
    twin.col(1) = base.returns.col(0);
    const auto same = estimate_correlation_scaling(panel_from(twin), 0, 1);
    CHECK(std::abs(same.h_rho.exponent) < 1e-12);
    CHECK(!same.negative_correlation);

    const auto ind = estimate_correlation_scaling(synth::gen_gaussian_iid(4096, 1.0, 48, 2), 0, 1);
    CHECK((ind.negative_correlation || ind.h_rho.r2 < 0.9));

    double sum = 0.0;
    for (std::uint64_t s = 0; s < 5; ++s)
        sum += estimate_correlation_scaling(synth::gen_epps(1 << 14, 0.8, 0.3, synth::derive_seed(49, s)), 0, 1).h_rho.exponent;
    CHECK(std::abs(sum / 5.0 - 0.3) < 0.1);
}

TEST_CASE("correlation identity holds within twice the combined error") {
    const auto cs = estimate_correlation_scaling(synth::gen_epps(1 << 14, 0.8, 0.3, 50), 0, 1);
    CHECK(std::abs(cs.identity_residual) < 2.0 * cs.combined_std_error);
}

TEST_CASE("pearson") {
    Vector x{{1.0, 2.0, 3.0, 4.0}};
    Vector y{{2.0, 4.0, 6.0, 8.5}};
    CHECK(pearson(x, x) == doctest::Approx(1.0));
    CHECK(pearson(x, -x) == doctest::Approx(-1.0));
    CHECK(pearson(x, y) > 0.99);
}

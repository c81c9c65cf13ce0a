#include "helpers.hpp"

#include "msport/optimizer.hpp"
#include "msport/qp.hpp"
#include "msport/synth.hpp"

#include <cmath>
#include <limits>

using namespace msport;

namespace {

Matrix sym3(double a, double b, double c, double ab, double ac, double bc) {
    Matrix m(3, 3);
    m << a, ab, ac, ab, b, bc, ac, bc, c;
    return m;
}

// Exhaustive search over the 3-simplex on a grid of the given step.
template <class Objective, class Feasible>
Vector simplex_grid_argmin(Objective f, Feasible ok, int steps = 400) {
    Vector best(3);
    double best_val = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= steps; ++i)
        for (int j = 0; i + j <= steps; ++j) {
            Vector w(3);
            w << double(i) / steps, double(j) / steps, double(steps - i - j) / steps;
            if (!ok(w)) continue;
            const double v = f(w);
            if (v < best_val) {
                best_val = v;
                best = w;
            }
        }
    return best;
}

double variance(const Matrix& s, const Vector& w) { return w.dot(s * w); }

Matrix random_cov(std::uint64_t seed, int n) {
    const auto p = synth::gen_gaussian_iid(static_cast<std::size_t>(4 * n + 16), 1.0, seed, static_cast<std::size_t>(n));
    const Matrix c = p.returns.rowwise() - p.returns.colwise().mean();
    return c.transpose() * c / static_cast<double>(p.rows() - 1) + 0.05 * Matrix::Identity(n, n);
}

}  // namespace

TEST_CASE("closed form examples") {
    const auto eq = min_variance_closed_form(Matrix::Identity(3, 3));
    for (Eigen::Index i = 0; i < 3; ++i) CHECK(eq.w[i] == doctest::Approx(1.0 / 3));

    Matrix d = Matrix::Zero(2, 2);
    d(0, 0) = 1;
    d(1, 1) = 4;
    const auto inv = min_variance_closed_form(d);
    CHECK(inv.w[0] == doctest::Approx(0.8));
    CHECK(inv.w[1] == doctest::Approx(0.2));
    CHECK(inv.kkt_residual < 1e-12);

    Matrix neg(2, 2);
    neg << 1, 1.5, 1.5, 4;
    const auto w = min_variance_closed_form(neg);
    CHECK(w.w[1] < 0.0);
    CHECK(w.w.sum() == doctest::Approx(1.0));

    CHECK_CODE(min_variance_closed_form(Matrix::Ones(2, 2)), SingularCovariance);
    Matrix ill = Matrix::Identity(2, 2);
    ill(1, 1) = 1e-14;
    CHECK_CODE(min_variance_closed_form(ill), SingularCovariance);
}

TEST_CASE("closed form beats random feasible perturbations") {
    const Matrix s = random_cov(3, 5);
    const auto w = min_variance_closed_form(s);
    const double base = variance(s, w.w);
    auto src = synth::gen_gaussian_iid(200, 0.05, 4, 5);
    for (Eigen::Index t = 0; t < 200; ++t) {
        Vector e = src.returns.row(t).transpose();
        e.array() -= e.mean();
        CHECK(variance(s, w.w + e) >= base - 1e-15);
    }
}

TEST_CASE("long-only matches grid oracle") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        Matrix s = random_cov(seed + 10, 3);
        s(0, 1) = s(1, 0) = 0.9 * std::sqrt(s(0, 0) * s(1, 1));
        if (!is_psd(s)) continue;
        const auto w = min_variance_long_only(s);
        CHECK((w.w.array() >= -1e-12).all());
        CHECK(w.w.sum() == doctest::Approx(1.0).epsilon(1e-12));
        const Vector g = simplex_grid_argmin([&](const Vector& x) { return variance(s, x); },
                                             [](const Vector&) { return true; });
        CHECK(variance(s, w.w) <= variance(s, g) + 1e-12);
        CHECK((w.w - g).cwiseAbs().maxCoeff() < 0.01);
    }
}

TEST_CASE("long-only clamps a negative closed-form weight") {
    Matrix neg(2, 2);
    neg << 1, 1.5, 1.5, 4;
    const auto w = min_variance_long_only(neg);
    CHECK(w.w[0] == doctest::Approx(1.0));
    CHECK(w.w[1] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(w.long_only);

    // singular input still has a long-only minimizer
    const auto flat = min_variance_long_only(Matrix::Ones(3, 3));
    CHECK(flat.w.sum() == doctest::Approx(1.0));
    CHECK((flat.w.array() >= -1e-12).all());
}

TEST_CASE("return floor") {
    const Matrix s = sym3(0.04, 0.09, 0.16, 0.01, 0.0, 0.02);
    Vector mu(3);
    mu << 0.01, 0.02, 0.04;
    CHECK_CODE(min_variance_with_return_floor(s, mu, 0.05), Infeasible);

    const auto slack = min_variance_with_return_floor(s, mu, 0.0);
    CHECK((slack.w - min_variance_long_only(s).w).cwiseAbs().maxCoeff() < 1e-12);

    const double target = 0.03;
    const auto w = min_variance_with_return_floor(s, mu, target);
    CHECK(mu.dot(w.w) >= target - 1e-12);
    CHECK((w.w.array() >= -1e-12).all());
    const Vector g = simplex_grid_argmin([&](const Vector& x) { return variance(s, x); },
                                         [&](const Vector& x) { return mu.dot(x) >= target; });
    CHECK(variance(s, w.w) <= variance(s, g) + 1e-12);
    CHECK((w.w - g).cwiseAbs().maxCoeff() < 0.01);

    const auto top = min_variance_with_return_floor(s, mu, 0.04);
    CHECK(top.w[2] == doctest::Approx(1.0));
}

TEST_CASE("max sharpe") {
    const Matrix s = sym3(0.04, 0.09, 0.16, 0.01, 0.0, 0.02);
    Vector mu(3);
    mu << 0.01, 0.02, 0.04;
    const auto tan = max_sharpe(s, mu, 0.0, false);
    const Vector direct = s.ldlt().solve(mu);
    CHECK((tan.w - direct / direct.sum()).cwiseAbs().maxCoeff() < 1e-12);

    Vector bad = mu;
    bad << 0.03, -0.02, 0.005;
    const auto lo = max_sharpe(s, bad, 0.0, true);
    CHECK((lo.w.array() >= -1e-12).all());
    auto sharpe = [&](const Vector& x) { return -bad.dot(x) / std::sqrt(variance(s, x)); };
    const Vector g = simplex_grid_argmin(sharpe, [](const Vector&) { return true; });
    CHECK(-sharpe(lo.w) >= -sharpe(g) - 1e-12);
    CHECK((lo.w - g).cwiseAbs().maxCoeff() < 0.01);

    Vector none(3);
    none << -0.01, -0.02, 0.0;
    CHECK_CODE(max_sharpe(s, none, 0.0), NoPositiveExcessReturn);
    CHECK_CODE(max_sharpe(s, mu, 0.05), NoPositiveExcessReturn);
}

TEST_CASE("scale invariance") {
    const Matrix s = random_cov(21, 4);
    for (double c : {0.01, 7.0}) {
        CHECK((min_variance_closed_form(c * s).w - min_variance_closed_form(s).w).cwiseAbs().maxCoeff() < 1e-10);
        CHECK((min_variance_long_only(c * s).w - min_variance_long_only(s).w).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("qp reports KKT quantities") {
    SimplexQp qp;
    qp.q = 2.0 * sym3(1, 2, 3, 0.8, 0.2, 0.1);
    qp.a = Vector::Ones(3);
    const auto sol = solve_simplex_qp(qp, Vector::Constant(3, 1.0 / 3));
    CHECK(sol.converged);
    CHECK(sol.stationarity_residual < 1e-10);
    CHECK(sol.dual_violation <= 1e-10);
    CHECK(sol.w.sum() == doctest::Approx(1.0));
}

TEST_CASE("variance sensitivity examples") {
    const auto r = sensitivity_to_variance(Matrix::Identity(2, 2), 0);
    CHECK(r.dwk_dsigma2 == doctest::Approx(-0.25));
    CHECK(r.S == doctest::Approx(2.0));
    CHECK(r.lambda == doctest::Approx(1.0));
    CHECK(r.sign_negative);
    CHECK(sensitivity_to_variance(2.0 * Matrix::Identity(2, 2), 0).dwk_dsigma2 == doctest::Approx(-0.125));
}

TEST_CASE("variance sensitivity matches central differences") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix s = random_cov(seed + 30, 4);
        for (Eigen::Index k = 0; k < 4; ++k) {
            const double h = 1e-6 * s(k, k);
            Matrix up = s, dn = s;
            up(k, k) += h;
            dn(k, k) -= h;
            const double fd = (min_variance_closed_form(up).w[k] - min_variance_closed_form(dn).w[k]) / (2 * h);
            const auto r = sensitivity_to_variance(s, k);
            CHECK(std::abs(fd - r.dwk_dsigma2) <= 1e-6 * std::max(1.0, std::abs(fd)));
            if (r.s[k] > 0) CHECK(r.sign_negative);
        }
    }
}

TEST_CASE("hurst sensitivity matches central differences") {
    const Vector sd{{0.01, 0.015, 0.02}};
    const Vector hk{{0.45, 0.55, 0.6}};
    const Matrix rho = sym3(1, 1, 1, 0.3, 0.2, 0.4);
    auto sigma_at = [&](int dt, const Vector& H) {
        Matrix m(3, 3);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j)
                m(i, j) = rho(i, j) * sd[i] * sd[j] * std::pow(dt, H[i] + H[j]);
        return m;
    };
    for (int dt : {2, 5, 21}) {
        for (Eigen::Index k = 0; k < 3; ++k) {
            const Matrix s = sigma_at(dt, hk);
            Matrix up = s, dn = s;
            const double h = 1e-6;
            up(k, k) = s(k, k) * std::pow(dt, 2 * h);
            dn(k, k) = s(k, k) * std::pow(dt, -2 * h);
            const double fd = (min_variance_closed_form(up).w[k] - min_variance_closed_form(dn).w[k]) / (2 * h);
            const auto r = sensitivity_to_hurst(s, k, dt);
            CHECK(std::abs(fd - r.value) <= 1e-5 * std::max(1.0, std::abs(fd)));
        }
    }
    const auto one = sensitivity_to_hurst(sigma_at(1, hk), 0, 1);
    CHECK(one.scale_one);
    CHECK(one.value == 0.0);
}

TEST_CASE("correlation sensitivity") {
    const Matrix s = sym3(0.04, 0.09, 0.16, 0.01, 0.0, 0.02);
    const auto c = combined_weight_correlation_sensitivity(s, 0, 1);
    CHECK(std::abs(c.numeric_dsum - c.analytic_dsum) < 1e-6);
    CHECK(c.analytic_dsum < 0.0);

    const auto two = combined_weight_correlation_sensitivity(Matrix::Identity(2, 2), 0, 1);
    CHECK(two.synthetic_weight == doctest::Approx(1.0));
    CHECK(two.synthetic_dw_drho == 0.0);
    CHECK(std::abs(two.numeric_dsum) < 1e-8);

    CHECK(combined_weight_hurst_sensitivity(-0.5, 0.3, 1) == 0.0);
    CHECK(combined_weight_hurst_sensitivity(-0.5, 0.3, 10, 0.2) ==
          doctest::Approx(-0.5 * 0.2 * std::pow(10.0, 0.3) * std::log(10.0)));
}

TEST_CASE("averaging across scales") {
    PortfolioWeights a, b;
    a.asset_ids = b.asset_ids = {"X", "Y"};
    a.w = Vector{{0.2, 0.8}};
    b.w = Vector{{0.6, 0.4}};
    const auto m = average_weights_across_scales({a, b});
    CHECK(m.w[0] == doctest::Approx(0.4));
    CHECK(m.w[1] == doctest::Approx(0.6));
    CHECK(m.method == WeightMethod::Averaged);
    b.asset_ids = {"X", "Z"};
    CHECK_CODE(average_weights_across_scales({a, b}), UniverseMismatch);
}

TEST_CASE("target curve check") {
    ScaledCovarianceSet set;
    set.asset_ids = {"A1", "A2"};
    set.scales = {1, 4};
    set.matrices = {Matrix::Identity(2, 2), 4.0 * Matrix::Identity(2, 2)};
    set.sample_counts = {100, 25};
    set.degenerate = {false, false};
    PortfolioWeights w;
    w.asset_ids = set.asset_ids;
    w.w = Vector{{0.5, 0.5}};
    const auto pass = check_target_curve(w, set, std::sqrt(0.5), 0.5);
    CHECK(pass.all_pass);
    CHECK(pass.rows[1].portfolio_variance == doctest::Approx(2.0));
    CHECK(pass.rows[1].target_variance == doctest::Approx(2.0));

    const auto fail = check_target_curve(w, set, std::vector<double>{0.5, 1.0});
    CHECK(fail.rows[0].pass);
    CHECK(!fail.rows[1].pass);
    CHECK(!fail.all_pass);
}

TEST_CASE("weights csv") {
    PortfolioWeights w;
    w.asset_ids = {"X", "Y"};
    w.w = Vector{{0.25, 0.75}};
    const std::string csv = format_weights_csv(w);
    CHECK(csv.rfind("asset_id,weight\nX,", 0) == 0);
}

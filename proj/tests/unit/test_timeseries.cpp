#include "helpers.hpp"

#include "msport/io.hpp"

#include <cmath>
#include <filesystem>

using namespace msport;
using testing::column;
using testing::panel_from;

TEST_CASE("load echoes a small price file") {
    const auto p = parse_prices("date,A,B\n2024-01-02,100,50\n2024-01-03,110,51\n2024-01-04,121,52\n");
    REQUIRE(p.rows() == 3);
    REQUIRE(p.assets() == 2);
    CHECK(p.asset_ids == std::vector<std::string>{"A", "B"});
    CHECK(p.prices(0, 0) == 100.0);
    CHECK(p.prices(1, 0) == 110.0);
    CHECK(p.prices(2, 0) == 121.0);
}

TEST_CASE("load rejects bad cells and names the location") {
    CHECK_CODE(parse_prices("date,A\n2024-01-02,100\n2024-01-03,0\n"), NonPositivePrice);
    CHECK_CODE(parse_prices("date,A\n2024-01-02,100\n2024-01-03,-1\n"), NonPositivePrice);
    CHECK_CODE(parse_prices("date,A,B\n2024-01-02,100,\n2024-01-03,1,2\n"), MissingValue);
    CHECK_CODE(parse_prices("date,A\n2024-01-02,NaN\n"), MissingValue);
    CHECK_CODE(parse_prices("date,A\n2024-01-02,abc\n"), ParseError);
    CHECK_CODE(parse_prices("date,A\n2024-13-02,1\n"), ParseError);
    CHECK_CODE(parse_prices("date,A\n2024-01-02,1\n2024-01-02,2\n"), DuplicateDate);
    CHECK_CODE(parse_prices("time,A\n2024-01-02,1\n"), ParseError);
    try {
        parse_prices("date,A,B\n2024-01-02,1,2\n2024-01-03,1,0\n");
        FAIL("no throw");
    } catch (const Error& e) {
        const std::string msg = e.what();
        CHECK(msg.find("row 3") != std::string::npos);
        CHECK(msg.find("B") != std::string::npos);
    }
}

TEST_CASE("load sorts rows by date") {
    const auto sorted = parse_prices("date,A\n2024-01-02,1\n2024-01-03,2\n2024-01-04,3\n");
    const auto shuffled = parse_prices("date,A\n2024-01-04,3\n2024-01-02,1\n2024-01-03,2\n");
    CHECK(sorted.timestamps == shuffled.timestamps);
    CHECK(sorted.prices == shuffled.prices);
}

TEST_CASE("load_prices reads from disk and reports missing files") {
    const auto dir = std::filesystem::temp_directory_path() / "msport_ts_test";
    std::filesystem::create_directories(dir);
    write_file_atomic(dir / "p.csv", "date,X\n2020-01-01,10\n2020-01-02,11\n");
    CHECK(load_prices(dir / "p.csv").prices(1, 0) == 11.0);
    CHECK_CODE(load_prices(dir / "missing.csv"), IoError);
}

TEST_CASE("log returns") {
    const auto r = to_log_returns(parse_prices("date,A\n2024-01-02,100\n2024-01-03,110\n2024-01-04,121\n"));
    REQUIRE(r.rows() == 2);
    CHECK(r.returns(0, 0) == doctest::Approx(std::log(1.1)).epsilon(1e-15));
    CHECK(r.returns(1, 0) == doctest::Approx(0.09531).epsilon(1e-4));
    CHECK(r.scale == 1);
    CHECK(r.mode == Aggregation::Base);

    const auto flat = to_log_returns(parse_prices("date,A\n2024-01-02,50\n2024-01-03,50\n2024-01-04,50\n"));
    CHECK(flat.returns.isZero(0.0));

    CHECK_CODE(to_log_returns(parse_prices("date,A\n2024-01-02,50\n")), TooShort);
}

TEST_CASE("price reconstruction round-trips through CSV") {
    Matrix m(5, 2);
    m << 0.01, -0.02, 0.03, 0.0, -0.01, 0.015, 0.002, 0.001, 0.0, -0.004;
    const auto base = panel_from(m);
    const auto back = to_log_returns(parse_prices(format_prices_csv(to_prices(base))));
    CHECK((back.returns - m).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(back.asset_ids == base.asset_ids);
}

TEST_CASE("aggregation examples") {
    const auto base = column({1, 2, 3, 4});
    CHECK(aggregate(base, 2, Aggregation::NonOverlapping, 0).returns.col(0) == Vector{{3.0, 7.0}});
    CHECK(aggregate(base, 2, Aggregation::Overlapping).returns.col(0) == Vector{{3.0, 5.0, 7.0}});
    CHECK(aggregate(base, 2, Aggregation::NonOverlapping, 1).returns.col(0) == Vector{{5.0}});
    CHECK_CODE(aggregate(base, 2, Aggregation::NonOverlapping, 2), BadPhase);
    CHECK_CODE(aggregate(base, 5, Aggregation::NonOverlapping, 0), ScaleTooLarge);

    const auto agg = aggregate(base, 2, Aggregation::NonOverlapping, 0);
    CHECK(agg.scale == 2);
    CHECK(agg.timestamps[0] == base.timestamps[1]);
}

TEST_CASE("phase panel lengths") {
    CHECK(all_phase_aggregates(column({1, 2, 3, 4}), 1).size() == 1);

    Matrix five = Matrix::Ones(5, 1);
    const auto two = all_phase_aggregates(panel_from(five), 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].rows() == 2);
    CHECK(two[1].rows() == 2);

    const auto three = all_phase_aggregates(panel_from(Matrix::Ones(10, 1)), 3);
    REQUIRE(three.size() == 3);
    CHECK(three[0].rows() == 3);
    CHECK(three[1].rows() == 3);
    CHECK(three[2].rows() == 2);
    CHECK(min_phase_rows(10, 3) == 2);
}

TEST_CASE("aggregation properties") {
    Matrix m(23, 2);
    for (Eigen::Index t = 0; t < m.rows(); ++t) {
        m(t, 0) = std::sin(0.7 * static_cast<double>(t));
        m(t, 1) = 0.1 * static_cast<double>(t % 5) - 0.2;
    }
    const auto base = panel_from(m);
    for (int dt : {1, 2, 3, 5}) {
        const auto a = aggregate(base, dt, Aggregation::NonOverlapping, 0);
        const Eigen::Index used = dt * (base.rows() / dt);
        for (Eigen::Index c = 0; c < 2; ++c)
            CHECK(a.returns.col(c).sum() == doctest::Approx(m.col(c).head(used).sum()).epsilon(1e-12));
        // each base return appears once per phase panel family member, dt times in total
        double total = 0.0;
        for (const auto& p : all_phase_aggregates(base, dt)) total += p.returns.col(0).sum();
        double expect = 0.0;
        for (int phase = 0; phase < dt; ++phase) {
            const Eigen::Index k = (base.rows() - phase) / dt;
            expect += m.col(0).segment(phase, k * dt).sum();
        }
        CHECK(total == doctest::Approx(expect).epsilon(1e-12));
    }
    CHECK(aggregate(base, 1, Aggregation::Overlapping).returns == m);
}

TEST_CASE("estimability rule") {
    CHECK_NOTHROW(require_estimable_scale(125, 21));
    CHECK_CODE(require_estimable_scale(84, 21), ScaleTooLarge);
    CHECK_NOTHROW(require_estimable_scale(84, 21, true));
    CHECK_CODE(require_estimable_scale(3, 1), ScaleTooLarge);
}

TEST_CASE("synthetic calendar skips weekends") {
    const auto d = synthetic_dates(6);
    CHECK(d[0] == "2000-01-03");
    CHECK(d[4] == "2000-01-07");
    CHECK(d[5] == "2000-01-10");
}

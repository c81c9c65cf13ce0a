#pragma once

#include "msport/error.hpp"
#include "msport/timeseries.hpp"

#include <doctest.h>

#include <initializer_list>
#include <string>

namespace testing {

inline msport::ReturnPanel panel_from(const msport::Matrix& r) {
    msport::ReturnPanel p;
    p.returns = r;
    for (Eigen::Index a = 0; a < r.cols(); ++a) p.asset_ids.push_back("A" + std::to_string(a + 1));
    p.timestamps = msport::synthetic_dates(static_cast<std::size_t>(r.rows()));
    return p;
}

inline msport::ReturnPanel column(std::initializer_list<double> values) {
    msport::Matrix m(static_cast<Eigen::Index>(values.size()), 1);
    Eigen::Index k = 0;
    for (double v : values) m(k++, 0) = v;
    return panel_from(m);
}

template <class F>
msport::ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const msport::Error& e) {
        return e.code();
    }
    FAIL("expected msport::Error");
    return msport::ErrorCode::InvalidArgument;
}

}  // namespace testing

#define CHECK_CODE(expr, expected) CHECK(testing::code_of([&] { (void)(expr); }) == msport::ErrorCode::expected)

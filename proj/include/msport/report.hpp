#pragma once

#include "msport/backtest.hpp"
#include "msport/covariance.hpp"
#include "msport/optimizer.hpp"
#include "msport/scaling.hpp"

#include <json.hpp>

namespace msport {

using Json = nlohmann::ordered_json;

/// Non-finite doubles become null.
Json number(double v);

Json to_json(const ExponentFit& f);
Json to_json(const HurstEstimate& h);
Json to_json(const ScalingSpectrum& s);
Json to_json(const CorrelationScaling& c);
Json to_json(const PortfolioWeights& w);
Json to_json(const MultiscaleCovariance& m);
Json to_json(const TargetCurveReport& r);
Json to_json(const SensitivityReport& r);
Json to_json(const BacktestConfig& c);
Json to_json(const PerformanceMetrics& m);
Json to_json(const BacktestReport& r);
Json to_json(const Comparison& c);

Json matrix_json(const Matrix& m);

}  // namespace msport

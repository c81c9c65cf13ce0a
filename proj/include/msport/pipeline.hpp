#pragma once

#include "msport/backtest.hpp"
#include "msport/report.hpp"

#include <cstdint>
#include <string>

namespace msport {

/// Six assets, 1260 days, calm/turbulent volatility regimes with constant
/// correlation 0.5 and per-asset volatility multipliers 0.6..1.6.
ReturnPanel regime_fixture(std::uint64_t seed);

struct ReproOptions {
    std::uint64_t seed = 7;
    std::size_t series_length = 16384;
};

struct ReproResult {
    Json summary;
    std::string table;    // aligned text, strategy table last
    std::string csv;      // strategy table
    bool deterministic = false;
    bool multiscale_drawdown_not_worse = false;
};

/// simulate -> estimate -> optimize -> backtest on the synthetic fixtures.
ReproResult run_repro(const ReproOptions& options = {});

}  // namespace msport

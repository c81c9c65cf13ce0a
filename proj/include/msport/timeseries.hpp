#pragma once

#include <Eigen/Dense>

#include <filesystem>
#include <string>
#include <vector>

namespace msport {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Aligned price matrix (time x asset). Dates are ISO-8601 `YYYY-MM-DD`
/// strings, strictly increasing; every price is strictly positive.
struct PriceSeries {
    std::vector<std::string> asset_ids;
    std::vector<std::string> timestamps;
    Matrix prices;

    Eigen::Index rows() const { return prices.rows(); }
    Eigen::Index assets() const { return prices.cols(); }
};

enum class Aggregation { Base, Overlapping, NonOverlapping };

/// Log-return panel at scale `scale` (trading days). Row t of a scale-dt
/// panel is the sum of dt consecutive base log returns; the timestamp of a
/// row is the date closing its last base period.
struct ReturnPanel {
    std::vector<std::string> asset_ids;
    std::vector<std::string> timestamps;
    Matrix returns;
    int scale = 1;
    Aggregation mode = Aggregation::Base;
    int phase = 0;

    Eigen::Index rows() const { return returns.rows(); }
    Eigen::Index assets() const { return returns.cols(); }
    Eigen::Index asset_index(const std::string& id) const;
};

PriceSeries load_prices(const std::filesystem::path& path);
PriceSeries parse_prices(const std::string& csv_text);

ReturnPanel to_log_returns(const PriceSeries& p);

/// Inverse of to_log_returns: prices start at `start_price` and compound by
/// exp(r). Used to write synthetic panels in the loader's CSV format.
PriceSeries to_prices(const ReturnPanel& base, double start_price = 100.0);

std::string format_prices_csv(const PriceSeries& p);
void write_prices_csv(const PriceSeries& p, const std::filesystem::path& path);

/// Sums dt consecutive base rows. Non-overlapping blocks start at `phase`;
/// overlapping windows slide by one row and ignore `phase`. Throws
/// ScaleTooLarge when no complete block fits and BadPhase unless
/// 0 <= phase < dt.
ReturnPanel aggregate(const ReturnPanel& base, int dt, Aggregation mode, int phase = 0);

/// Block sums of a raw return matrix; same contract as aggregate() but
/// without the timestamp bookkeeping.
Matrix aggregate_matrix(const Matrix& base_returns, int dt, Aggregation mode, int phase = 0);

/// The dt non-overlapping panels for phases 0..dt-1.
std::vector<ReturnPanel> all_phase_aggregates(const ReturnPanel& base, int dt);

/// Smallest row count over the dt phase panels: floor((T - dt + 1) / dt).
Eigen::Index min_phase_rows(Eigen::Index base_rows, int dt);

/// Throws ScaleTooLarge unless every non-overlapping phase panel of scale dt
/// (or the overlapping panel, when `overlapping`) has at least 4 rows.
void require_estimable_scale(Eigen::Index base_rows, int dt, bool overlapping = false);

/// Trading-day calendar used for synthetic panels: `count` consecutive
/// weekdays starting at 2000-01-03.
std::vector<std::string> synthetic_dates(std::size_t count);

/// Rows [begin, end) of a panel, keeping its scale annotation.
ReturnPanel select_rows(const ReturnPanel& base, Eigen::Index begin, Eigen::Index end);

}  // namespace msport

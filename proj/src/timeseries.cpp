#include "msport/timeseries.hpp"

#include "msport/error.hpp"
#include "msport/io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>

namespace msport {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_commas(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (;;) {
        std::size_t pos = line.find(',', start);
        cells.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return cells;
}

std::optional<std::chrono::sys_days> parse_iso_date(std::string_view s) {
    // YYYY-MM-DD
    if (s.size() != 10 || s[4] != '-' || s[7] != '-') return std::nullopt;
    auto number = [&](std::size_t pos, std::size_t len) -> std::optional<int> {
        int v = 0;
        auto [p, ec] = std::from_chars(s.data() + pos, s.data() + pos + len, v);
        if (ec != std::errc() || p != s.data() + pos + len) return std::nullopt;
        return v;
    };
    auto y = number(0, 4), m = number(5, 2), d = number(8, 2);
    if (!y || !m || !d) return std::nullopt;
    std::chrono::year_month_day ymd{std::chrono::year{*y}, std::chrono::month{static_cast<unsigned>(*m)},
                                    std::chrono::day{static_cast<unsigned>(*d)}};
    if (!ymd.ok()) return std::nullopt;
    return std::chrono::sys_days{ymd};
}

std::string format_iso_date(std::chrono::sys_days d) {
    std::chrono::year_month_day ymd{d};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
    return buf;
}

std::string where(std::size_t line, const std::string& column) {
    return "row " + std::to_string(line) + ", column '" + column + "'";
}

bool is_missing_token(std::string_view cell) {
    if (cell.empty()) return true;
    std::string lower(cell);
    std::transform(lower.begin(), lower.end(), lower.begin(), [](unsigned char c) { return std::tolower(c); });
    return lower == "nan" || lower == "na" || lower == "null";
}

}  // namespace

Eigen::Index ReturnPanel::asset_index(const std::string& id) const {
    auto it = std::find(asset_ids.begin(), asset_ids.end(), id);
    if (it == asset_ids.end()) throw Error(ErrorCode::InvalidArgument, "unknown asset '" + id + "'");
    return static_cast<Eigen::Index>(it - asset_ids.begin());
}

PriceSeries parse_prices(const std::string& csv_text) {
    std::string_view text = csv_text;
    if (text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);

    std::vector<std::string_view> lines;
    {
        std::size_t start = 0;
        while (start <= text.size()) {
            std::size_t pos = text.find('\n', start);
            std::string_view line = text.substr(start, pos == std::string_view::npos ? pos : pos - start);
            lines.push_back(line);
            if (pos == std::string_view::npos) break;
            start = pos + 1;
        }
    }
    // trailing blank lines are not rows
    while (!lines.empty() && trim(lines.back()).empty()) lines.pop_back();
    if (lines.empty()) throw Error(ErrorCode::ParseError, "empty file: header row required");

    auto header = split_commas(lines[0]);
    if (header.size() < 2) throw Error(ErrorCode::ParseError, "header needs a date column and at least one asset");
    {
        std::string first(header[0]);
        std::transform(first.begin(), first.end(), first.begin(), [](unsigned char c) { return std::tolower(c); });
        if (first != "date") throw Error(ErrorCode::ParseError, "row 1: first header cell must be 'date'");
    }
    PriceSeries out;
    for (std::size_t c = 1; c < header.size(); ++c) {
        if (header[c].empty()) throw Error(ErrorCode::ParseError, "row 1: empty asset name in column " + std::to_string(c + 1));
        std::string id(header[c]);
        if (std::find(out.asset_ids.begin(), out.asset_ids.end(), id) != out.asset_ids.end())
            throw Error(ErrorCode::ParseError, "row 1: duplicate asset '" + id + "'");
        out.asset_ids.push_back(std::move(id));
    }
    const std::size_t n_assets = out.asset_ids.size();

    struct Row {
        std::chrono::sys_days date;
        std::string label;
        std::size_t line;
        std::vector<double> values;
    };
    std::vector<Row> rows;
    rows.reserve(lines.size());
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const std::size_t line_no = li + 1;
        auto cells = split_commas(lines[li]);
        if (cells.size() > n_assets + 1)
            throw Error(ErrorCode::ParseError, "row " + std::to_string(line_no) + ": too many cells");
        auto date = parse_iso_date(cells[0]);
        if (!date)
            throw Error(ErrorCode::ParseError, where(line_no, "date") + ": '" + std::string(cells[0]) + "' is not an ISO-8601 date");
        Row row{*date, std::string(cells[0]), line_no, {}};
        row.values.reserve(n_assets);
        for (std::size_t a = 0; a < n_assets; ++a) {
            const std::string& col = out.asset_ids[a];
            if (a + 1 >= cells.size() || is_missing_token(cells[a + 1]))
                throw Error(ErrorCode::MissingValue, where(line_no, col));
            std::string_view cell = cells[a + 1];
            if (cell.front() == '+') cell.remove_prefix(1);
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size())
                throw Error(ErrorCode::ParseError, where(line_no, col) + ": '" + std::string(cells[a + 1]) + "' is not a number");
            if (std::isnan(v)) throw Error(ErrorCode::MissingValue, where(line_no, col));
            if (!(v > 0.0) || !std::isfinite(v))
                throw Error(ErrorCode::NonPositivePrice, where(line_no, col) + ": " + std::string(cells[a + 1]));
            row.values.push_back(v);
        }
        rows.push_back(std::move(row));
    }

    std::stable_sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) { return a.date < b.date; });
    for (std::size_t i = 1; i < rows.size(); ++i) {
        if (rows[i].date == rows[i - 1].date)
            throw Error(ErrorCode::DuplicateDate, "row " + std::to_string(rows[i].line) + ": date " + rows[i].label +
                                                      " already appears on row " + std::to_string(rows[i - 1].line));
    }

    out.prices.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(n_assets));
    out.timestamps.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out.timestamps.push_back(format_iso_date(rows[r].date));
        for (std::size_t a = 0; a < n_assets; ++a)
            out.prices(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(a)) = rows[r].values[a];
    }
    return out;
}

PriceSeries load_prices(const std::filesystem::path& path) {
    return parse_prices(read_file(path));
}

ReturnPanel to_log_returns(const PriceSeries& p) {
    if (p.rows() < 2) throw Error(ErrorCode::TooShort, "need at least 2 price rows, got " + std::to_string(p.rows()));
    ReturnPanel out;
    out.asset_ids = p.asset_ids;
    out.timestamps.assign(p.timestamps.begin() + 1, p.timestamps.end());
    const Eigen::Index T = p.rows() - 1;
    out.returns.resize(T, p.assets());
    for (Eigen::Index t = 0; t < T; ++t)
        for (Eigen::Index a = 0; a < p.assets(); ++a)
            out.returns(t, a) = std::log(p.prices(t + 1, a) / p.prices(t, a));
    return out;
}

PriceSeries to_prices(const ReturnPanel& base, double start_price) {
    PriceSeries out;
    out.asset_ids = base.asset_ids;
    const Eigen::Index T = base.rows();
    out.prices.resize(T + 1, base.assets());
    out.prices.row(0).setConstant(start_price);
    for (Eigen::Index a = 0; a < base.assets(); ++a) {
        double log_level = std::log(start_price);
        for (Eigen::Index t = 0; t < T; ++t) {
            log_level += base.returns(t, a);
            out.prices(t + 1, a) = std::exp(log_level);
        }
    }
    if (base.timestamps.size() == static_cast<std::size_t>(T) && T > 0) {
        // one extra leading date: the weekday before the first return date
        auto first = parse_iso_date(base.timestamps.front());
        std::chrono::sys_days d = first ? *first - std::chrono::days{1} : std::chrono::sys_days{};
        while (std::chrono::weekday{d}.c_encoding() == 0 || std::chrono::weekday{d}.c_encoding() == 6)
            d -= std::chrono::days{1};
        out.timestamps.push_back(first ? format_iso_date(d) : "1999-12-31");
        out.timestamps.insert(out.timestamps.end(), base.timestamps.begin(), base.timestamps.end());
    } else {
        out.timestamps = synthetic_dates(static_cast<std::size_t>(T + 1));
    }
    return out;
}

std::string format_prices_csv(const PriceSeries& p) {
    std::ostringstream os;
    os << "date";
    for (const auto& id : p.asset_ids) os << ',' << id;
    os << '\n';
    for (Eigen::Index t = 0; t < p.rows(); ++t) {
        os << p.timestamps[static_cast<std::size_t>(t)];
        for (Eigen::Index a = 0; a < p.assets(); ++a) os << ',' << format_double(p.prices(t, a));
        os << '\n';
    }
    return os.str();
}

void write_prices_csv(const PriceSeries& p, const std::filesystem::path& path) {
    write_file_atomic(path, format_prices_csv(p));
}

Eigen::Index min_phase_rows(Eigen::Index base_rows, int dt) {
    if (dt < 1) return 0;
    Eigen::Index usable = base_rows - (dt - 1);
    return usable > 0 ? usable / dt : 0;
}

void require_estimable_scale(Eigen::Index base_rows, int dt, bool overlapping) {
    if (dt < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1, got " + std::to_string(dt));
    Eigen::Index rows = overlapping ? base_rows - dt + 1 : min_phase_rows(base_rows, dt);
    if (rows < 4)
        throw Error(ErrorCode::ScaleTooLarge, "scale " + std::to_string(dt) + " leaves " + std::to_string(std::max<Eigen::Index>(rows, 0)) +
                                                  " aggregated observations on " + std::to_string(base_rows) +
                                                  " base rows (need >= 4)");
}

Matrix aggregate_matrix(const Matrix& base_returns, int dt, Aggregation mode, int phase) {
    if (dt < 1) throw Error(ErrorCode::InvalidArgument, "scale must be >= 1, got " + std::to_string(dt));
    if (mode == Aggregation::Base) throw Error(ErrorCode::InvalidArgument, "aggregation mode must be overlapping or nonoverlapping");
    const Eigen::Index T = base_returns.rows();
    if (mode == Aggregation::Overlapping) {
        const Eigen::Index rows = T - dt + 1;
        if (rows < 1) throw Error(ErrorCode::ScaleTooLarge, "scale " + std::to_string(dt) + " exceeds panel length " + std::to_string(T));
        Matrix out(rows, base_returns.cols());
        for (Eigen::Index t = 0; t < rows; ++t) out.row(t) = base_returns.middleRows(t, dt).colwise().sum();
        return out;
    }
    if (phase < 0 || phase >= dt)
        throw Error(ErrorCode::BadPhase, "phase " + std::to_string(phase) + " outside [0, " + std::to_string(dt) + ")");
    const Eigen::Index rows = (T - phase) / dt;
    if (rows < 1) throw Error(ErrorCode::ScaleTooLarge, "scale " + std::to_string(dt) + " exceeds panel length " + std::to_string(T));
    Matrix out(rows, base_returns.cols());
    for (Eigen::Index k = 0; k < rows; ++k) out.row(k) = base_returns.middleRows(phase + k * dt, dt).colwise().sum();
    return out;
}

ReturnPanel aggregate(const ReturnPanel& base, int dt, Aggregation mode, int phase) {
    if (base.scale != 1) throw Error(ErrorCode::InvalidArgument, "aggregate expects a base (scale 1) panel");
    ReturnPanel out;
    out.asset_ids = base.asset_ids;
    out.scale = dt;
    out.mode = mode;
    out.returns = aggregate_matrix(base.returns, dt, mode, phase);
    out.phase = mode == Aggregation::Overlapping ? 0 : phase;
    const Eigen::Index T = base.rows();
    if (base.timestamps.size() == static_cast<std::size_t>(T)) {
        const Eigen::Index first = mode == Aggregation::Overlapping ? 0 : phase;
        const Eigen::Index stride = mode == Aggregation::Overlapping ? 1 : dt;
        for (Eigen::Index k = 0; k < out.returns.rows(); ++k)
            out.timestamps.push_back(base.timestamps[static_cast<std::size_t>(first + k * stride + dt - 1)]);
    }
    return out;
}

std::vector<ReturnPanel> all_phase_aggregates(const ReturnPanel& base, int dt) {
    if (dt == 1 && base.scale == 1) return {base};
    std::vector<ReturnPanel> panels;
    panels.reserve(static_cast<std::size_t>(std::max(dt, 0)));
    for (int phase = 0; phase < dt; ++phase) panels.push_back(aggregate(base, dt, Aggregation::NonOverlapping, phase));
    return panels;
}

std::vector<std::string> synthetic_dates(std::size_t count) {
    using namespace std::chrono;
    std::vector<std::string> out;
    out.reserve(count);
    sys_days d{year{2000} / January / 3};
    while (out.size() < count) {
        unsigned wd = weekday{d}.c_encoding();
        if (wd != 0 && wd != 6) out.push_back(format_iso_date(d));
        d += days{1};
    }
    return out;
}

ReturnPanel select_rows(const ReturnPanel& base, Eigen::Index begin, Eigen::Index end) {
    if (begin < 0 || end > base.rows() || begin > end)
        throw Error(ErrorCode::InvalidArgument, "row range out of bounds");
    ReturnPanel out;
    out.asset_ids = base.asset_ids;
    out.returns = base.returns.middleRows(begin, end - begin);
    out.scale = base.scale;
    out.mode = base.mode;
    out.phase = base.phase;
    if (base.timestamps.size() == static_cast<std::size_t>(base.rows()))
        out.timestamps.assign(base.timestamps.begin() + begin, base.timestamps.begin() + end);
    return out;
}

}  // namespace msport

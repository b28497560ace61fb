#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "kesten/error.hpp"
#include "kesten/estimators.hpp"
#include "kesten/process_spec.hpp"
#include "kesten/serialization.hpp"
#include "kesten/theory.hpp"

namespace kesten {

/// Shortest decimal that parses back to the same double.
[[nodiscard]] inline std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc{}) throw Error(ErrorCode::IoError, "cannot format number");
    return std::string(buf, end);
}

[[nodiscard]] inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

/// Writes path.tmp and renames it over path, so readers never see a partial file.
inline void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::IoError, "cannot write " + tmp.string());
        out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
        out.flush();
        if (!out) throw Error(ErrorCode::IoError, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot rename " + tmp.string() + ": " + ec.message());
}

// ---------------------------------------------------------------------------
// CSV

[[nodiscard]] inline std::string series_csv(std::span<const double> values) {
    std::string out = "t,r\n";
    out.reserve(values.size() * 24);
    for (std::size_t t = 0; t < values.size(); ++t) {
        out += std::to_string(t);
        out += ',';
        out += format_double(values[t]);
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::string ccdf_csv(std::span<const CcdfPoint> points) {
    std::string out = "x,p\n";
    for (const auto& pt : points) {
        out += format_double(pt.x);
        out += ',';
        out += format_double(pt.p);
        out += '\n';
    }
    return out;
}

[[nodiscard]] inline std::string acf_csv(const AcfResult& result) {
    std::string out = "lag,acf\n";
    for (std::size_t h = 0; h < result.values.size(); ++h) {
        out += std::to_string(h);
        out += ',';
        out += format_double(result.values[h]);
        out += '\n';
    }
    return out;
}

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        std::string_view cell = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
        while (!cell.empty() && (cell.front() == ' ' || cell.front() == '"')) cell.remove_prefix(1);
        while (!cell.empty() && (cell.back() == ' ' || cell.back() == '"' || cell.back() == '\r')) cell.remove_suffix(1);
        cells.push_back(cell);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return cells;
}

inline std::optional<double> parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string lower(std::string_view s) {
    std::string out(s);
    for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

/// Lines of a text file, 1-based numbering, blank lines skipped.
struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;
};

inline CsvTable parse_csv(std::string_view text, const std::string& source) {
    CsvTable table;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t nl = text.find('\n', pos);
        std::string_view line = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        std::vector<std::string> owned(cells.begin(), cells.end());
        if (table.header.empty()) {
            table.header = std::move(owned);
            continue;
        }
        if (owned.size() != table.header.size()) {
            throw Error(ErrorCode::ParseError, source + ":" + std::to_string(line_no) + ": expected " +
                                                   std::to_string(table.header.size()) + " fields, got " +
                                                   std::to_string(owned.size()));
        }
        table.rows.emplace_back(line_no, std::move(owned));
    }
    if (table.header.empty()) throw Error(ErrorCode::ParseError, source + ": empty file");
    return table;
}

}  // namespace detail

/// Reads the `r` column of a `t,r` series file.
[[nodiscard]] inline std::vector<double> read_series_csv(const std::filesystem::path& path) {
    const auto table = detail::parse_csv(read_file(path), path.string());
    std::size_t col = table.header.size();
    for (std::size_t i = 0; i < table.header.size(); ++i)
        if (detail::lower(table.header[i]) == "r") col = i;
    if (col == table.header.size()) throw Error(ErrorCode::ParseError, path.string() + ":1: no 'r' column");
    std::vector<double> out;
    out.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        auto v = detail::parse_double(cells[col]);
        if (!v || !std::isfinite(*v)) {
            throw Error(ErrorCode::ParseError, path.string() + ":" + std::to_string(line) + ": '" + cells[col] +
                                                   "' is not a finite number");
        }
        out.push_back(*v);
    }
    return out;
}

/// Reads a price column from a CSV with a header row and converts it to
/// relative returns. Without an explicit column name the first of
/// close / adj_close / price is used, falling back to the last column.
[[nodiscard]] inline ReturnSeries ingest_prices(const std::filesystem::path& path,
                                                const std::optional<std::string>& price_column = std::nullopt) {
    const std::string text = read_file(path);
    const auto table = detail::parse_csv(text, path.string());
    std::size_t col = table.header.size();
    if (price_column) {
        for (std::size_t i = 0; i < table.header.size(); ++i)
            if (table.header[i] == *price_column) col = i;
        if (col == table.header.size()) {
            throw Error(ErrorCode::ParseError, path.string() + ":1: no column named '" + *price_column + "'");
        }
    } else {
        for (std::string_view want : {"close", "adj_close", "adj close", "price"}) {
            for (std::size_t i = 0; i < table.header.size() && col == table.header.size(); ++i)
                if (detail::lower(table.header[i]) == want) col = i;
        }
        if (col == table.header.size()) col = table.header.size() - 1;
    }
    std::vector<double> prices;
    prices.reserve(table.rows.size());
    for (const auto& [line, cells] : table.rows) {
        auto v = detail::parse_double(cells[col]);
        if (!v || !std::isfinite(*v)) {
            throw Error(ErrorCode::ParseError,
                        path.string() + ":" + std::to_string(line) + ": '" + cells[col] + "' is not a number");
        }
        if (!(*v > 0.0)) {
            throw Error(ErrorCode::NonPositivePrice,
                        path.string() + ":" + std::to_string(line) + ": price " + cells[col] + " is not positive");
        }
        prices.push_back(*v);
    }
    if (prices.size() < 2) throw Error(ErrorCode::ParseError, path.string() + ": need at least two price rows");
    ReturnSeries series(returns_from_prices(prices), "file:" + content_digest(text), RngStream{});
    series.source_rows = prices.size();
    return series;
}

// ---------------------------------------------------------------------------
// JSON records

[[nodiscard]] inline Json to_json(const TailFit& f) {
    Json j;
    j["threshold"] = f.threshold;
    j["exponent"] = f.exponent;
    j["intercept"] = f.intercept;
    j["n_tail"] = f.n_tail;
    j["stderr"] = f.std_error;
    return j;
}

[[nodiscard]] inline Json to_json(const HillFit& f) {
    Json j;
    j["k"] = f.k;
    j["threshold"] = f.threshold;
    j["exponent"] = f.exponent;
    j["stderr"] = f.std_error;
    return j;
}

[[nodiscard]] inline Json to_json(const CramerSolution& s) {
    Json j;
    j["mu_star"] = s.mu_star;
    j["bracket"] = Json::array({s.bracket_lo, s.bracket_hi});
    j["residual"] = s.residual;
    j["method"] = std::string(to_string(s.method));
    j["stderr"] = s.std_error ? Json(*s.std_error) : Json(nullptr);
    return j;
}

[[nodiscard]] inline Json to_json(const LyapunovEstimate& e) {
    Json j;
    j["gamma_hat"] = e.gamma_hat;
    j["t_horizon"] = e.t_horizon;
    j["trials"] = e.trials;
    j["stderr"] = e.std_error;
    return j;
}

[[nodiscard]] inline Json to_json(const MomentLyapunovSolution& s) {
    Json j = to_json(s.solution);
    j["t_horizon"] = s.t_horizon;
    j["particles"] = s.particles;
    j["lambda_at_2t"] = s.lambda_at_2t;
    j["finite_t_shift"] = s.finite_t_shift;
    Json grid = Json::array();
    for (const auto& [mu, lam] : s.grid_values) grid.push_back(Json::array({mu, lam}));
    j["grid"] = std::move(grid);
    return j;
}

namespace detail {

inline Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace detail

[[nodiscard]] inline Json to_json(const TheoryReport& r) {
    Json j;
    Json conds = Json::array();
    for (const auto& c : r.conditions) {
        Json e;
        e["condition"] = std::string(1, c.id);
        e["status"] = std::string(to_string(c.status));
        e["evidence"] = c.evidence ? detail::finite_or_null(*c.evidence) : Json(nullptr);
        e["note"] = c.note;
        conds.push_back(std::move(e));
    }
    j["conditions"] = std::move(conds);
    j["cramer"] = r.cramer ? to_json(*r.cramer) : Json(nullptr);
    j["cramer_note"] = r.cramer_note;
    j["regime"] = r.regime ? Json(std::string(to_string(*r.regime))) : Json(nullptr);
    j["mean_a"] = r.mean_a ? Json(*r.mean_a) : Json(nullptr);
    return j;
}

/// Fixed-width text table of the condition report.
[[nodiscard]] inline std::string conditions_table(const TheoryReport& r) {
    std::ostringstream os;
    os << "cond  status         evidence\n";
    for (const auto& c : r.conditions) {
        std::string status(to_string(c.status));
        status.resize(14, ' ');
        os << "(" << c.id << ")   " << status << " " << c.note << "\n";
    }
    os << "root: " << r.cramer_note << "\n";
    if (r.regime) os << "regime: " << to_string(*r.regime) << "\n";
    return os.str();
}

}  // namespace kesten

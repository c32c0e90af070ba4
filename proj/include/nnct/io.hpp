#pragma once

// Labeled point CSV ingestion: columns x, y, label; header optional.

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "errors.hpp"
#include "geometry.hpp"

namespace nnct {

enum class HeaderMode { automatic, present, absent };

struct CsvOptions {
    char delimiter = ',';
    HeaderMode header = HeaderMode::automatic;
    /// Explicit class names: classes[0] -> label 1, classes[1] -> label 2. Rows
    /// with any other label are skipped. Empty means first-seen order.
    std::vector<std::string> classes;
};

struct PointData {
    LabeledPointSet points;
    std::array<std::string, 2> class_names;
    std::size_t skipped_rows = 0;
};

namespace detail {

inline std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

inline std::vector<std::string_view> split(std::string_view line, char delimiter)
{
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(delimiter, start);
        fields.push_back(trim(line.substr(start, pos == std::string_view::npos ? pos : pos - start)));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return fields;
}

inline std::optional<double> parse_double(std::string_view s)
{
    if (!s.empty() && s.front() == '+') {
        s.remove_prefix(1);
    }
    double value = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return value;
}

} // namespace detail

inline PointData read_points_csv(std::istream& in, const CsvOptions& options = {})
{
    if (!options.classes.empty() && options.classes.size() != 2) {
        throw InvalidInput("exactly two class names must be given");
    }
    std::vector<Point> points;
    std::vector<ClassLabel> labels;
    std::vector<std::string> names = options.classes;
    std::size_t skipped = 0;
    std::string line;
    std::size_t line_no = 0;
    bool first_row = true;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view view(line);
        if (line_no == 1 && view.starts_with("\xEF\xBB\xBF")) {
            view.remove_prefix(3);
        }
        if (detail::trim(view).empty()) {
            continue;
        }
        const auto fields = detail::split(view, options.delimiter);
        if (fields.size() != 3) {
            throw ParseError("expected 3 fields (x, y, label), found " + std::to_string(fields.size()), line_no);
        }
        const auto x = detail::parse_double(fields[0]);
        const auto y = detail::parse_double(fields[1]);
        if (first_row) {
            first_row = false;
            const bool header = options.header == HeaderMode::present ||
                                (options.header == HeaderMode::automatic && (!x || !y));
            if (header) {
                continue;
            }
        }
        if (!x || !y) {
            throw ParseError("coordinates must be numeric", line_no);
        }
        if (!std::isfinite(*x) || !std::isfinite(*y)) {
            throw ParseError("coordinates must be finite", line_no);
        }
        const std::string label(fields[2]);
        if (label.empty()) {
            throw ParseError("empty class label", line_no);
        }
        std::size_t cls = 0;
        while (cls < names.size() && names[cls] != label) {
            ++cls;
        }
        if (cls == names.size()) {
            if (!options.classes.empty()) {
                ++skipped;
                continue;
            }
            if (names.size() == 2) {
                throw InvalidInput("line " + std::to_string(line_no) + ": more than two classes (\"" + label +
                                   "\"); select two with an explicit class list");
            }
            names.push_back(label);
        }
        points.push_back({*x, *y});
        labels.push_back(static_cast<ClassLabel>(cls + 1));
    }
    if (points.empty()) {
        throw ParseError("no data rows");
    }
    if (names.size() < 2 || std::count(labels.begin(), labels.end(), 1) == 0 ||
        std::count(labels.begin(), labels.end(), 2) == 0) {
        throw InvalidInput("data must contain two classes");
    }
    return PointData{LabeledPointSet(std::move(points), std::move(labels)), {names[0], names[1]}, skipped};
}

inline PointData read_points_csv(const std::filesystem::path& path, const CsvOptions& options = {})
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path.string());
    }
    return read_points_csv(in, options);
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v)
{
    std::array<char, 64> buf{};
    const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return ec == std::errc() ? std::string(buf.data(), ptr) : std::string("nan");
}

inline void write_points_csv(std::ostream& out, const LabeledPointSet& pts,
                             const std::array<std::string, 2>& class_names = {"1", "2"})
{
    out << "x,y,label\n";
    for (std::size_t i = 0; i < pts.size(); ++i) {
        out << format_double(pts.points()[i].x) << ',' << format_double(pts.points()[i].y) << ','
            << class_names[pts.labels()[i] - 1] << '\n';
    }
}

} // namespace nnct

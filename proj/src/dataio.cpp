#include "ibcforecast/dataio.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "ibcforecast/error.hpp"

namespace ibc {

namespace {

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t pos = 0;
    for (;;) {
        const auto comma = line.find(',', pos);
        out.push_back(trim(line.substr(pos, comma - pos)));
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
    }
    return out;
}

template <class Int>
bool parse_integer(std::string_view field, Int& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc{} && ptr == field.data() + field.size();
}

std::string line_error(std::size_t line_no, const std::string& what) {
    return "line " + std::to_string(line_no) + ": " + what;
}

}  // namespace

std::vector<MonthlySeries> parse_ibc_csv(std::string_view text) {
    // route -> (ordinal -> value)
    std::map<std::string, std::map<int, std::int64_t>, std::less<>> rows;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    bool header_seen = false;
    while (pos < text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        const std::string_view line = trim(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (line.empty()) continue;

        const auto fields = split_fields(line);
        if (!header_seen) {
            header_seen = true;
            if (fields.size() != 4 || fields[0] != "route" || fields[1] != "year" ||
                fields[2] != "month" || fields[3] != "value") {
                throw Error(ErrorCode::MalformedInput,
                            line_error(line_no, "expected header 'route,year,month,value'"));
            }
            continue;
        }
        if (fields.size() != 4 || fields[0].empty()) {
            throw Error(ErrorCode::MalformedInput, line_error(line_no, "expected 4 fields"));
        }
        int year = 0;
        int month = 0;
        std::int64_t value = 0;
        if (!parse_integer(fields[1], year) || !parse_integer(fields[2], month) ||
            !parse_integer(fields[3], value)) {
            throw Error(ErrorCode::MalformedInput, line_error(line_no, "non-integer field"));
        }
        if (month < 1 || month > 12) {
            throw Error(ErrorCode::MalformedInput,
                        line_error(line_no, "month out of range: " + std::to_string(month)));
        }
        if (value < 0) {
            throw Error(ErrorCode::NegativeValue,
                        line_error(line_no, "negative value " + std::to_string(value)));
        }
        const TimePoint t{year, month};
        auto& route = rows[std::string(fields[0])];
        if (!route.emplace(t.ordinal(), value).second) {
            throw Error(ErrorCode::DuplicateEntry,
                        line_error(line_no, "duplicate entry for " + std::string(fields[0]) + " " +
                                                t.str()));
        }
    }

    std::vector<MonthlySeries> out;
    out.reserve(rows.size());
    for (const auto& [route_id, months] : rows) {
        MonthlySeries s;
        s.route_id = route_id;
        s.start = TimePoint::from_ordinal(months.begin()->first);
        int expected = months.begin()->first;
        for (const auto& [ordinal, value] : months) {
            if (ordinal != expected) {
                throw Error(ErrorCode::MissingMonth, "route " + route_id + " is missing " +
                                                         TimePoint::from_ordinal(expected).str());
            }
            s.values.push_back(value);
            ++expected;
        }
        out.push_back(std::move(s));
    }
    return out;
}

std::vector<MonthlySeries> read_ibc_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open dataset " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_ibc_csv(buf.str());
}

std::string serialize_ibc_csv(std::span<const MonthlySeries> series) {
    std::vector<const MonthlySeries*> ordered;
    for (const auto& s : series) ordered.push_back(&s);
    std::sort(ordered.begin(), ordered.end(),
              [](auto* a, auto* b) { return a->route_id < b->route_id; });

    std::string out = "route,year,month,value\n";
    for (const auto* s : ordered) {
        for (std::size_t i = 0; i < s->size(); ++i) {
            const TimePoint t = s->at(i);
            out += s->route_id;
            out += ',';
            out += std::to_string(t.year);
            out += ',';
            out += std::to_string(t.month);
            out += ',';
            out += std::to_string(s->values[i]);
            out += '\n';
        }
    }
    return out;
}

const MonthlySeries& find_route(std::span<const MonthlySeries> series, std::string_view route_id) {
    for (const auto& s : series) {
        if (s.route_id == route_id) return s;
    }
    throw Error(ErrorCode::NotFound, "unknown route '" + std::string(route_id) + "'");
}

MonthEncoding encode_month(int month) {
    if (month < 1 || month > 12) {
        throw Error(ErrorCode::InvalidArgument, "month out of range: " + std::to_string(month));
    }
    const double angle = 2.0 * M_PI * month / 12.0;
    return {std::sin(angle), std::cos(angle)};
}

CovariateRow raw_covariates(const TimePoint& t, double class_value) {
    const auto enc = encode_month(t.month);
    return {static_cast<double>(t.year), enc.sin, enc.cos, class_value};
}

AffineMap AffineMap::fit(std::span<const double> values, const char* feature_name) {
    if (values.empty()) {
        throw Error(ErrorCode::DegenerateData, std::string("no values for feature ") + feature_name);
    }
    const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
    if (!(*lo < *hi)) {
        throw Error(ErrorCode::DegenerateData,
                    std::string("constant column for feature ") + feature_name);
    }
    return {*lo, *hi};
}

CovariateRow ScalingParams::apply(const CovariateRow& raw) const {
    return {year.apply(raw.year), month_sin.apply(raw.month_sin), month_cos.apply(raw.month_cos),
            raw.class_value};
}

ScalingParams fit_scaling(std::span<const CovariateRow> raw_inputs, std::span<const double> targets) {
    std::vector<double> col(raw_inputs.size());
    ScalingParams p;
    auto fit_column = [&](double CovariateRow::*member, const char* name) {
        std::transform(raw_inputs.begin(), raw_inputs.end(), col.begin(),
                       [member](const CovariateRow& r) { return r.*member; });
        return AffineMap::fit(col, name);
    };
    p.year = fit_column(&CovariateRow::year, "year");
    p.month_sin = fit_column(&CovariateRow::month_sin, "month_sin");
    p.month_cos = fit_column(&CovariateRow::month_cos, "month_cos");
    p.target = AffineMap::fit(targets, "target");
    return p;
}

Design raw_design(const MonthlySeries& series, std::span<const double> classes) {
    if (classes.size() != series.size()) {
        throw Error(ErrorCode::LengthMismatch,
                    "class series has " + std::to_string(classes.size()) + " entries, series " +
                        series.route_id + " has " + std::to_string(series.size()));
    }
    Design d;
    d.inputs.reserve(series.size());
    d.targets.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        d.inputs.push_back(raw_covariates(series.at(i), classes[i]));
        d.targets.push_back(static_cast<double>(series.values[i]));
    }
    return d;
}

Design build_design(const MonthlySeries& series, std::span<const double> classes,
                    const ScalingParams& scaling) {
    Design d = raw_design(series, classes);
    for (auto& row : d.inputs) row = scaling.apply(row);
    for (auto& t : d.targets) t = scaling.target.apply(t);
    return d;
}

std::vector<ValidationWindow> make_windows(const MonthlySeries& tail, int horizon) {
    if (horizon < 1) throw Error(ErrorCode::InvalidArgument, "horizon must be >= 1");
    const auto h = static_cast<std::size_t>(horizon);
    if (tail.size() < h) {
        throw Error(ErrorCode::InvalidArgument, "tail of " + std::to_string(tail.size()) +
                                                    " months is shorter than horizon " +
                                                    std::to_string(horizon));
    }
    std::vector<ValidationWindow> out;
    const std::size_t count = tail.size() - h + 1;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        ValidationWindow w;
        w.index = static_cast<int>(k) + 1;
        w.start = tail.at(k);
        w.actual_monthly.assign(tail.values.begin() + static_cast<std::ptrdiff_t>(k),
                                tail.values.begin() + static_cast<std::ptrdiff_t>(k + h));
        for (auto v : w.actual_monthly) w.actual_sum += v;
        out.push_back(std::move(w));
    }
    return out;
}

}  // namespace ibc

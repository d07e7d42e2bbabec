#include "ibcforecast/series.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>

#include "ibcforecast/error.hpp"

namespace ibc {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::InvalidArgument: return "invalid_argument";
        case ErrorCode::MalformedInput: return "malformed_input";
        case ErrorCode::MissingMonth: return "missing_month";
        case ErrorCode::NegativeValue: return "negative_value";
        case ErrorCode::DuplicateEntry: return "duplicate_entry";
        case ErrorCode::LengthMismatch: return "length_mismatch";
        case ErrorCode::DegenerateData: return "degenerate_data";
        case ErrorCode::NumericalFailure: return "numerical_failure";
        case ErrorCode::NotFound: return "not_found";
        case ErrorCode::SchemaMismatch: return "schema_mismatch";
        case ErrorCode::ConfigError: return "config_error";
    }
    return "unknown";
}

TimePoint TimePoint::from_ordinal(int ordinal) {
    // floor division so negative ordinals stay well-formed
    int year = ordinal >= 0 ? ordinal / 12 : -((-ordinal + 11) / 12);
    return TimePoint{year, ordinal - year * 12 + 1};
}

std::string TimePoint::str() const {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02d", year, month);
    return buf;
}

TimePoint TimePoint::parse(std::string_view text) {
    TimePoint t;
    const auto dash = text.find('-');
    if (dash == std::string_view::npos || dash == 0 || dash + 1 >= text.size()) {
        throw Error(ErrorCode::MalformedInput, "expected YYYY-MM, got '" + std::string(text) + "'");
    }
    auto parse_int = [&](std::string_view part, int& out) {
        auto [ptr, ec] = std::from_chars(part.data(), part.data() + part.size(), out);
        if (ec != std::errc{} || ptr != part.data() + part.size()) {
            throw Error(ErrorCode::MalformedInput, "expected YYYY-MM, got '" + std::string(text) + "'");
        }
    };
    parse_int(text.substr(0, dash), t.year);
    parse_int(text.substr(dash + 1), t.month);
    t.validate();
    return t;
}

void TimePoint::validate() const {
    if (month < 1 || month > 12) {
        throw Error(ErrorCode::InvalidArgument, "month out of range: " + std::to_string(month));
    }
}

MonthlySeries MonthlySeries::slice(std::size_t begin, std::size_t count) const {
    if (begin + count > values.size()) {
        throw Error(ErrorCode::InvalidArgument, "slice beyond end of series " + route_id);
    }
    MonthlySeries out;
    out.route_id = route_id;
    out.start = at(begin);
    out.values.assign(values.begin() + static_cast<std::ptrdiff_t>(begin),
                      values.begin() + static_cast<std::ptrdiff_t>(begin + count));
    return out;
}

MonthlySeries MonthlySeries::before(const TimePoint& t) const {
    const int n = start.months_until(t);
    if (n <= 0) return MonthlySeries{route_id, start, {}};
    return slice(0, std::min<std::size_t>(static_cast<std::size_t>(n), values.size()));
}

std::size_t MonthlySeries::index_of(const TimePoint& t) const {
    const int i = start.months_until(t);
    if (i < 0 || static_cast<std::size_t>(i) >= values.size()) {
        throw Error(ErrorCode::NotFound, t.str() + " is outside series " + route_id);
    }
    return static_cast<std::size_t>(i);
}

const char* to_string(ClassProvenance p) {
    switch (p) {
        case ClassProvenance::Computed: return "computed";
        case ClassProvenance::Expert: return "expert";
        case ClassProvenance::Altered: return "altered";
    }
    return "computed";
}

const char* to_string(ClassCase c) {
    switch (c) {
        case ClassCase::Precise: return "precise";
        case ClassCase::Mean: return "mean";
        case ClassCase::Approximated: return "approx";
    }
    return "precise";
}

ClassCase parse_class_case(std::string_view text) {
    if (text == "precise") return ClassCase::Precise;
    if (text == "mean") return ClassCase::Mean;
    if (text == "approx" || text == "approximated") return ClassCase::Approximated;
    throw Error(ErrorCode::InvalidArgument, "unknown class case '" + std::string(text) + "'");
}

}  // namespace ibc

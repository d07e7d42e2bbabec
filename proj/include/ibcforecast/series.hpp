#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace ibc {

/// Calendar month, ordered by (year, month).
struct TimePoint {
    int year = 0;
    int month = 1;  // 1..12

    auto operator<=>(const TimePoint&) const = default;

    /// Months since year 0, used for arithmetic between points.
    int ordinal() const { return year * 12 + (month - 1); }
    static TimePoint from_ordinal(int ordinal);

    TimePoint plus_months(int n) const { return from_ordinal(ordinal() + n); }
    int months_until(const TimePoint& other) const { return other.ordinal() - ordinal(); }

    /// "YYYY-MM"
    std::string str() const;
    static TimePoint parse(std::string_view text);

    void validate() const;
};

/// A route's contiguous monthly count series.
struct MonthlySeries {
    std::string route_id;
    TimePoint start;
    std::vector<std::int64_t> values;

    std::size_t size() const { return values.size(); }
    bool empty() const { return values.empty(); }
    TimePoint at(std::size_t i) const { return start.plus_months(static_cast<int>(i)); }
    /// Last month covered. Undefined for an empty series.
    TimePoint last() const { return at(values.size() - 1); }

    /// Sub-series of `count` months starting at position `begin`.
    MonthlySeries slice(std::size_t begin, std::size_t count) const;
    /// All months strictly before `t`.
    MonthlySeries before(const TimePoint& t) const;
    /// Position of `t` in the series; throws NotFound when outside.
    std::size_t index_of(const TimePoint& t) const;
};

enum class ClassProvenance { Computed, Expert, Altered };

enum class ClassCase { Precise, Mean, Approximated };

const char* to_string(ClassProvenance p);
const char* to_string(ClassCase c);
ClassCase parse_class_case(std::string_view text);

/// Class covariate aligned to a series or a forecast horizon.
struct ClassSeries {
    std::vector<double> values;
    ClassProvenance provenance = ClassProvenance::Computed;
    ClassCase altered_case = ClassCase::Precise;  // meaningful when provenance == Altered
};

}  // namespace ibc

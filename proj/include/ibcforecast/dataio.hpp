#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ibcforecast/series.hpp"

namespace ibc {

// ---------------------------------------------------------------------------
// Canonical dataset CSV
//
//   route,year,month,value
//   CMR,2009,1,123
//
// Rows may arrive in any order; each route must form a gap-free run of
// months. serialize_ibc_csv writes routes in lexicographic order and months
// chronologically, which is the canonical form.
// ---------------------------------------------------------------------------

std::vector<MonthlySeries> parse_ibc_csv(std::string_view text);
std::vector<MonthlySeries> read_ibc_csv(const std::string& path);
std::string serialize_ibc_csv(std::span<const MonthlySeries> series);

const MonthlySeries& find_route(std::span<const MonthlySeries> series, std::string_view route_id);

// ---------------------------------------------------------------------------
// Covariates
// ---------------------------------------------------------------------------

struct MonthEncoding {
    double sin = 0.0;
    double cos = 1.0;
};

/// Position of `month` on the unit circle at angle 2*pi*month/12.
MonthEncoding encode_month(int month);

/// Network input row. Feature order is fixed: year, month_sin, month_cos, class.
struct CovariateRow {
    double year = 0.0;
    double month_sin = 0.0;
    double month_cos = 1.0;
    double class_value = 0.0;
};

inline constexpr int kCovariateCount = 4;

CovariateRow raw_covariates(const TimePoint& t, double class_value);

/// Affine map observed [min, max] -> [-1, 1]. Not clamped.
struct AffineMap {
    double observed_min = -1.0;
    double observed_max = 1.0;

    double apply(double x) const {
        return 2.0 * (x - observed_min) / (observed_max - observed_min) - 1.0;
    }
    double invert(double y) const {
        return observed_min + (y + 1.0) * 0.5 * (observed_max - observed_min);
    }

    static AffineMap fit(std::span<const double> values, const char* feature_name);
};

/// Scaling for year, month_sin, month_cos and the target. class_value is
/// never scaled: it already lives on [0, 1] and may exceed 1 at prediction.
struct ScalingParams {
    AffineMap year;
    AffineMap month_sin;
    AffineMap month_cos;
    AffineMap target;

    CovariateRow apply(const CovariateRow& raw) const;
};

ScalingParams fit_scaling(std::span<const CovariateRow> raw_inputs, std::span<const double> targets);

/// Scaled training set.
struct Design {
    std::vector<CovariateRow> inputs;
    std::vector<double> targets;
};

/// Raw (unscaled) covariates and targets for a series with aligned classes.
Design raw_design(const MonthlySeries& series, std::span<const double> classes);

/// Scaled design; `classes` must align 1:1 with the series values.
Design build_design(const MonthlySeries& series, std::span<const double> classes,
                    const ScalingParams& scaling);

// ---------------------------------------------------------------------------
// Rolling validation windows
// ---------------------------------------------------------------------------

struct ValidationWindow {
    int index = 1;  // 1-based
    TimePoint start;
    std::vector<std::int64_t> actual_monthly;
    std::int64_t actual_sum = 0;
};

/// T - horizon + 1 windows over a contiguous tail; window k starts one month
/// after window k-1.
std::vector<ValidationWindow> make_windows(const MonthlySeries& tail, int horizon = 12);

/// Minimum months of history before a model may be trained.
inline constexpr std::size_t kMinTrainingMonths = 24;

}  // namespace ibc

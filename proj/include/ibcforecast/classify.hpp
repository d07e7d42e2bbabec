#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "ibcforecast/series.hpp"

namespace ibc {

/// Sample moments of one group of observations.
struct DispersionStats {
    double mean = 0.0;
    double s = 0.0;    // sample standard deviation (n - 1 denominator)
    double snr = 0.0;  // mean / s
    int n = 0;
};

DispersionStats dispersion(std::span<const double> values);

/// Cyclostationary statistics: one group per calendar month, plus the
/// stationary group of all observations.
struct MonthlyStats {
    std::array<DispersionStats, 12> by_month{};  // index 0 = January
    DispersionStats stationary;

    std::array<double, 12> thresholds() const;
};

/// Requires at least two observations in each calendar month.
MonthlyStats monthly_stats(const MonthlySeries& series);

/// 0 below s, 0.5 on [s, 2s), 1 from 2s upward.
double classify_value(double x, double s);

/// Same partition written on the standard score: Z = (x - mean)/s against
/// thresholds a = 1 - SNR and b = 2 - SNR.
double zscore_classify(double x, double mean, double s);

/// Classify each observation against the threshold of its own calendar month.
ClassSeries classify_series(const MonthlySeries& series, const std::array<double, 12>& monthly_s);
ClassSeries classify_series(const MonthlySeries& series, const MonthlyStats& stats);

/// Horizon class alteration used in validation. The horizon is split into
/// two six-month halves.
///   Precise       identity
///   Mean          each half replaced by its arithmetic mean
///   Approximated  half mean rounded to the nearest of {0, 0.5, top}; exact
///                 midpoints round up
/// `top` is the value assigned to the highest class (1 by default; a larger
/// value lets the model extrapolate above the training maximum).
ClassSeries alter_case(std::span<const double> precise, ClassCase c, double top = 1.0);

/// Replace every top-class entry (== 1) with `top`.
std::vector<double> apply_class_cap(std::span<const double> classes, double top);

}  // namespace ibc

#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ibcforecast/classify.hpp"
#include "ibcforecast/series.hpp"

namespace ibc {

struct WeibullFit {
    double shape = 1.0;  // k
    double scale = 1.0;  // lambda
    int sample_n = 0;
    std::string route_id;
    int month = 0;  // 1..12, 0 for the stationary fit
    int iterations = 0;
};

/// Zero values are replaced by this before fitting (Weibull support is (0, inf)).
inline constexpr double kZeroReplacement = 0.5;

double weibull_log_likelihood(std::span<const double> values, double shape, double scale);

/// Method-of-moments start: shape from the coefficient of variation, scale
/// from the mean.
WeibullFit weibull_moments(std::span<const double> values);

/// Maximum likelihood. The shape solves the profile equation
///   sum x^k ln x / sum x^k - 1/k - mean(ln x) = 0
/// by Newton steps kept inside a bisection bracket; the scale is then
/// (mean x^k)^(1/k). Needs >= 5 values, none negative; zeros are replaced
/// by kZeroReplacement.
WeibullFit fit_weibull(std::span<const double> values);

/// mean / standard deviation of a Weibull with shape k (scale-free).
double weibull_snr(double shape);

/// Shape whose SNR equals `snr` (inverse of weibull_snr by bisection).
double weibull_shape_for_snr(double snr);

struct ClassBand {
    std::array<double, 3> q05{};  // classes 0, 0.5, 1
    std::array<double, 3> q95{};
    double snr = 0.0;
    int n_used = 0;
    bool rounded = false;
    int repetitions = 0;
    int discarded = 0;
};

struct McOptions {
    int n = 15;
    int repetitions = 10000;
    bool round_to_integer = true;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Each repetition draws n values from the fit (optionally rounded to the
/// nearest integer), classifies every draw against that sample's own
/// standard deviation, and records the class frequencies. Reports the 5% and
/// 95% quantiles of each class frequency across repetitions. Repetitions with
/// zero sample variance are discarded; more than 10% discarded is an error.
ClassBand mc_class_bands(const WeibullFit& fit, const McOptions& opts);

/// Class frequencies of one repetition, exposed for testing.
std::array<double, 3> class_frequencies(std::span<const double> values, double s);

// ---------------------------------------------------------------------------
// Route statistics report
// ---------------------------------------------------------------------------

struct ClassCounts {
    std::array<int, 3> count{};
    int n = 0;
    double freq(int c) const { return n == 0 ? 0.0 : static_cast<double>(count[c]) / n; }
};

struct RouteClassTable {
    std::string route_id;
    DispersionStats stationary;
    ClassCounts stationary_classes;  // against the stationary s
    std::array<DispersionStats, 12> month_stats{};
    std::array<ClassCounts, 12> month_classes{};  // against each month's own s
    ClassCounts cyclostationary_classes;          // pooled over the 12 months
};

RouteClassTable class_frequency_table(const MonthlySeries& series);

std::string format_class_table(std::span<const RouteClassTable> tables);
/// route,scope,month,mean,s,snr,n,freq_0,freq_05,freq_1
std::string class_table_csv(std::span<const RouteClassTable> tables);

/// One row per (route, month, class) in the figure data layout:
/// route,month,snr,class,freq_empirical,freq_weibull_q05,freq_weibull_q95,n
struct BandRow {
    std::string route_id;
    int month = 0;
    double snr = 0.0;
    double class_value = 0.0;
    double freq_empirical = 0.0;
    double q05 = 0.0;
    double q95 = 0.0;
    int n = 0;
};

std::vector<BandRow> route_band_rows(const MonthlySeries& series, const McOptions& base,
                                     std::vector<WeibullFit>* fits_out = nullptr);
std::string band_rows_csv(std::span<const BandRow> rows);

/// Reference curve: `points` log-spaced SNR values in [snr_lo, snr_hi], each
/// simulated with unit scale, n draws and no rounding.
struct ReferencePoint {
    double snr = 0.0;
    double shape = 0.0;
    ClassBand band;
};

std::vector<ReferencePoint> reference_band_curve(double snr_lo, double snr_hi, int points,
                                                 const McOptions& opts);
std::string reference_curve_csv(std::span<const ReferencePoint> curve);

}  // namespace ibc

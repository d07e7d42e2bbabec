#include "ibcforecast/classify.hpp"

#include <algorithm>
#include <cmath>

#include "ibcforecast/error.hpp"

namespace ibc {

DispersionStats dispersion(std::span<const double> values) {
    DispersionStats d;
    d.n = static_cast<int>(values.size());
    if (values.empty()) return d;
    double sum = 0.0;
    for (double v : values) sum += v;
    d.mean = sum / d.n;
    if (d.n >= 2) {
        double ss = 0.0;
        for (double v : values) ss += (v - d.mean) * (v - d.mean);
        d.s = std::sqrt(ss / (d.n - 1));
    }
    d.snr = d.mean / d.s;
    return d;
}

std::array<double, 12> MonthlyStats::thresholds() const {
    std::array<double, 12> out{};
    for (int m = 0; m < 12; ++m) out[m] = by_month[m].s;
    return out;
}

MonthlyStats monthly_stats(const MonthlySeries& series) {
    std::array<std::vector<double>, 12> groups;
    std::vector<double> all;
    all.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const double v = static_cast<double>(series.values[i]);
        groups[series.at(i).month - 1].push_back(v);
        all.push_back(v);
    }
    MonthlyStats stats;
    for (int m = 0; m < 12; ++m) {
        if (groups[m].size() < 2) {
            throw Error(ErrorCode::DegenerateData,
                        "route " + series.route_id + ": calendar month " + std::to_string(m + 1) +
                            " has " + std::to_string(groups[m].size()) +
                            " observations, need at least 2");
        }
        stats.by_month[m] = dispersion(groups[m]);
    }
    stats.stationary = dispersion(all);
    return stats;
}

double classify_value(double x, double s) {
    if (!(s > 0.0)) {
        throw Error(ErrorCode::DegenerateData,
                    "classification threshold must be positive, got s = " + std::to_string(s));
    }
    if (x < s) return 0.0;
    if (x < 2.0 * s) return 0.5;
    return 1.0;
}

double zscore_classify(double x, double mean, double s) {
    if (!(s > 0.0)) {
        throw Error(ErrorCode::DegenerateData,
                    "classification threshold must be positive, got s = " + std::to_string(s));
    }
    const double z = (x - mean) / s;
    const double snr = mean / s;
    const double a = 1.0 - snr;
    const double b = 2.0 - snr;
    if (z < a) return 0.0;
    if (z < b) return 0.5;
    return 1.0;
}

ClassSeries classify_series(const MonthlySeries& series, const std::array<double, 12>& monthly_s) {
    ClassSeries out;
    out.provenance = ClassProvenance::Computed;
    out.values.reserve(series.size());
    for (std::size_t i = 0; i < series.size(); ++i) {
        const int m = series.at(i).month - 1;
        out.values.push_back(classify_value(static_cast<double>(series.values[i]), monthly_s[m]));
    }
    return out;
}

ClassSeries classify_series(const MonthlySeries& series, const MonthlyStats& stats) {
    return classify_series(series, stats.thresholds());
}

std::vector<double> apply_class_cap(std::span<const double> classes, double top) {
    std::vector<double> out(classes.begin(), classes.end());
    for (auto& c : out) {
        if (c == 1.0) c = top;
    }
    return out;
}

namespace {

double round_to_default_class(double v, double top) {
    const double levels[3] = {0.0, 0.5, top};
    double best = levels[0];
    double best_dist = std::abs(v - levels[0]);
    for (int i = 1; i < 3; ++i) {
        const double d = std::abs(v - levels[i]);
        if (d <= best_dist) {  // ties go to the higher class
            best = levels[i];
            best_dist = d;
        }
    }
    return best;
}

}  // namespace

ClassSeries alter_case(std::span<const double> precise, ClassCase c, double top) {
    if (precise.size() != 12) {
        throw Error(ErrorCode::LengthMismatch,
                    "class alteration needs 12 monthly classes, got " +
                        std::to_string(precise.size()));
    }
    ClassSeries out;
    out.values = apply_class_cap(precise, top);
    out.provenance = ClassProvenance::Altered;
    out.altered_case = c;
    if (c == ClassCase::Precise) return out;

    for (int half = 0; half < 2; ++half) {
        auto first = out.values.begin() + half * 6;
        double sum = 0.0;
        for (auto it = first; it != first + 6; ++it) sum += *it;
        double value = sum / 6.0;
        if (c == ClassCase::Approximated) value = round_to_default_class(value, top);
        std::fill(first, first + 6, value);
    }
    return out;
}

}  // namespace ibc

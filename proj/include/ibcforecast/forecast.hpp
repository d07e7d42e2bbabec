#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ibcforecast/quantile.hpp"
#include "ibcforecast/series.hpp"
#include "ibcforecast/sieve.hpp"

namespace ibc {

struct HorizonRequest {
    std::string route_id;
    TimePoint start;
    int months = 12;
    std::vector<double> class_vector;  // one per horizon month; values > 1 allowed

    void validate() const;
};

struct ForecastOptions {
    double q_lo = 0.10;
    double q_hi = 0.90;
    int samples = 10000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// networks x months, in count units, clamped at zero.
Eigen::MatrixXd predict_months(const Ensemble& ensemble, const HorizonRequest& request,
                               unsigned threads = 0);

struct MonthTrim {
    double q_lo_value = 0.0;
    double q_hi_value = 0.0;
    std::vector<double> retained;  // ascending
};

/// Per column: keep values v with quantile(q_lo) <= v <= quantile(q_hi).
std::vector<MonthTrim> trim_quantiles(const Eigen::MatrixXd& predictions, double q_lo = 0.10,
                                      double q_hi = 0.90);

struct BootstrapSummary {
    int samples = 0;
    double min_sum = 0.0;
    double max_sum = 0.0;
    std::vector<double> sums;  // replicate sums by replicate index
};

/// Each replicate draws one value per month uniformly with replacement and
/// sums across months. Replicate r uses the stream derive_seed(seed, r), so
/// the result does not depend on how replicates are scheduled.
BootstrapSummary bootstrap_range(std::span<const std::vector<double>> per_month, int samples,
                                 std::uint64_t seed, unsigned threads = 0);

struct ForecastRange {
    std::vector<MonthTrim> per_month;
    BootstrapSummary bootstrap;
    double low = 0.0;
    double high = 0.0;
};

ForecastRange forecast_route(const Ensemble& ensemble, const HorizonRequest& request,
                             const ForecastOptions& opts);

}  // namespace ibc

#include "ibcforecast/forecast.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibcforecast/error.hpp"
#include "ibcforecast/parallel.hpp"
#include "ibcforecast/rng.hpp"

namespace ibc {

void HorizonRequest::validate() const {
    if (months < 1) throw Error(ErrorCode::InvalidArgument, "horizon months must be >= 1");
    if (static_cast<int>(class_vector.size()) != months) {
        throw Error(ErrorCode::LengthMismatch,
                    "class vector has " + std::to_string(class_vector.size()) +
                        " entries for a " + std::to_string(months) + "-month horizon");
    }
    start.validate();
    for (double c : class_vector) {
        if (!std::isfinite(c)) throw Error(ErrorCode::InvalidArgument, "class values must be finite");
    }
}

Eigen::MatrixXd predict_months(const Ensemble& ensemble, const HorizonRequest& request,
                               unsigned threads) {
    request.validate();
    std::vector<CovariateRow> rows;
    rows.reserve(static_cast<std::size_t>(request.months));
    for (int m = 0; m < request.months; ++m) {
        rows.push_back(ensemble.scaling.apply(
            raw_covariates(request.start.plus_months(m), request.class_vector[static_cast<std::size_t>(m)])));
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(ensemble.networks.size()), request.months);
    parallel_for(ensemble.networks.size(), threads, [&](std::size_t k) {
        const auto& net = ensemble.networks[k];
        for (int m = 0; m < request.months; ++m) {
            const double scaled = forward(net.spec, net.weights, rows[static_cast<std::size_t>(m)]);
            out(static_cast<Eigen::Index>(k), m) = std::max(0.0, ensemble.scaling.target.invert(scaled));
        }
    });
    return out;
}

double quantile_sorted(std::span<const double> sorted, double q) {
    if (sorted.empty()) throw Error(ErrorCode::InvalidArgument, "quantile of empty data");
    if (!(q >= 0.0 && q <= 1.0)) throw Error(ErrorCode::InvalidArgument, "quantile level outside [0,1]");
    const double pos = (static_cast<double>(sorted.size()) - 1.0) * q;
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

std::vector<MonthTrim> trim_quantiles(const Eigen::MatrixXd& predictions, double q_lo, double q_hi) {
    if (predictions.rows() < 2) {
        throw Error(ErrorCode::InvalidArgument, "quantile trimming needs at least 2 values per month");
    }
    if (!(q_lo <= q_hi)) throw Error(ErrorCode::InvalidArgument, "q_lo must not exceed q_hi");
    std::vector<MonthTrim> out(static_cast<std::size_t>(predictions.cols()));
    std::vector<double> column(static_cast<std::size_t>(predictions.rows()));
    for (Eigen::Index m = 0; m < predictions.cols(); ++m) {
        for (Eigen::Index k = 0; k < predictions.rows(); ++k) column[static_cast<std::size_t>(k)] = predictions(k, m);
        std::sort(column.begin(), column.end());
        auto& trim = out[static_cast<std::size_t>(m)];
        trim.q_lo_value = quantile_sorted(column, q_lo);
        trim.q_hi_value = quantile_sorted(column, q_hi);
        for (double v : column) {
            if (v >= trim.q_lo_value && v <= trim.q_hi_value) trim.retained.push_back(v);
        }
    }
    return out;
}

BootstrapSummary bootstrap_range(std::span<const std::vector<double>> per_month, int samples,
                                 std::uint64_t seed, unsigned threads) {
    if (samples < 1) throw Error(ErrorCode::InvalidArgument, "bootstrap samples must be >= 1");
    for (std::size_t m = 0; m < per_month.size(); ++m) {
        if (per_month[m].empty()) {
            throw Error(ErrorCode::InvalidArgument,
                        "horizon month " + std::to_string(m + 1) + " has no retained values");
        }
    }
    BootstrapSummary out;
    out.samples = samples;
    out.sums.assign(static_cast<std::size_t>(samples), 0.0);
    // Chunked so each task amortizes its engine construction.
    constexpr std::size_t kChunk = 256;
    const std::size_t chunks = (out.sums.size() + kChunk - 1) / kChunk;
    parallel_for(chunks, threads, [&](std::size_t c) {
        const std::size_t end = std::min(out.sums.size(), (c + 1) * kChunk);
        for (std::size_t r = c * kChunk; r < end; ++r) {
            Rng rng(derive_seed(seed, r));
            double sum = 0.0;
            for (const auto& values : per_month) sum += values[rng.below(values.size())];
            out.sums[r] = sum;
        }
    });
    const auto [lo, hi] = std::minmax_element(out.sums.begin(), out.sums.end());
    out.min_sum = *lo;
    out.max_sum = *hi;
    return out;
}

ForecastRange forecast_route(const Ensemble& ensemble, const HorizonRequest& request,
                             const ForecastOptions& opts) {
    const Eigen::MatrixXd predictions = predict_months(ensemble, request, opts.threads);
    ForecastRange out;
    out.per_month = trim_quantiles(predictions, opts.q_lo, opts.q_hi);
    std::vector<std::vector<double>> retained;
    retained.reserve(out.per_month.size());
    for (const auto& m : out.per_month) retained.push_back(m.retained);
    out.bootstrap = bootstrap_range(retained, opts.samples, opts.seed, opts.threads);
    out.low = out.bootstrap.min_sum;
    out.high = out.bootstrap.max_sum;
    return out;
}

}  // namespace ibc

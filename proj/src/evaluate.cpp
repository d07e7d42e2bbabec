#include "ibcforecast/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

#include "ibcforecast/classify.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/parallel.hpp"
#include "ibcforecast/rng.hpp"

namespace ibc {

BoundError nearest_bound_error(double actual_sum, double low, double high) {
    if (!(low <= high)) throw Error(ErrorCode::InvalidArgument, "range low exceeds high");
    BoundError e;
    if (actual_sum < low) {
        e.residual = actual_sum - low;
    } else if (actual_sum > high) {
        e.residual = actual_sum - high;
    }
    e.error = std::abs(e.residual);
    return e;
}

WindowResult score_window(const ValidationWindow& window, double low, double high) {
    const auto b = nearest_bound_error(static_cast<double>(window.actual_sum), low, high);
    return {window, low, high, b.residual, b.error};
}

namespace {

double variance(const std::vector<double>& v) {
    const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(v.size());
}

}  // namespace

MetricsReport metrics(std::span<const WindowResult> results) {
    if (results.empty()) throw Error(ErrorCode::InvalidArgument, "no window results to score");
    MetricsReport r;
    r.windows.assign(results.begin(), results.end());
    std::vector<double> residuals;
    std::vector<double> actuals;
    double abs_sum = 0.0;
    double pct_sum = 0.0;
    for (const auto& w : results) {
        if (w.window.actual_sum == 0) {
            throw Error(ErrorCode::DegenerateData,
                        "window " + std::to_string(w.window.index) +
                            " has an actual sum of 0; MAPE is undefined");
        }
        if (w.hit()) ++r.precision_hits;
        abs_sum += w.error;
        pct_sum += w.error / static_cast<double>(w.window.actual_sum);
        residuals.push_back(w.residual);
        actuals.push_back(static_cast<double>(w.window.actual_sum));
    }
    const auto n = static_cast<double>(results.size());
    r.mae = abs_sum / n;
    r.mape_pct = 100.0 * pct_sum / n;
    const double var_res = variance(residuals);
    const double var_act = variance(actuals);
    if (var_res == 0.0) {
        r.explained_variance = 1.0;
    } else if (var_act == 0.0) {
        r.explained_variance = std::nan("");
    } else {
        r.explained_variance = 1.0 - var_res / var_act;
    }
    return r;
}

std::vector<NetworkSpec> default_grid() {
    std::vector<NetworkSpec> grid;
    for (Activation a : {Activation::Tanh, Activation::Logistic}) {
        for (int n : {4, 8, 12, 16}) {
            NetworkSpec s;
            s.layer_sizes = {kCovariateCount, n, 1};
            s.hidden_activation = a;
            grid.push_back(s);
        }
    }
    return grid;
}

TuneResult tune_hyperparams(const Dataset& data, const AffineMap& target_scaling,
                            std::span<const NetworkSpec> grid, const CvOptions& cv,
                            const TrainOptions& lm) {
    if (grid.empty()) throw Error(ErrorCode::InvalidArgument, "tuning grid is empty");
    if (data.rows < 30) {
        throw Error(ErrorCode::InvalidArgument,
                    "tuning needs at least 30 training rows, got " + std::to_string(data.rows));
    }
    if (cv.repetitions < 1 || cv.restarts < 1) {
        throw Error(ErrorCode::InvalidArgument, "cv repetitions and restarts must be >= 1");
    }
    if (!(cv.holdout_fraction > 0.0 && cv.holdout_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "holdout_fraction must be in (0, 1)");
    }
    const int holdout = std::max(1, static_cast<int>(std::ceil(data.rows * cv.holdout_fraction)));

    // Shared splits: repetition r uses the same holdout rows for every spec.
    struct Split {
        Dataset train;
        Dataset test;
    };
    std::vector<Split> splits(static_cast<std::size_t>(cv.repetitions));
    for (int r = 0; r < cv.repetitions; ++r) {
        std::vector<int> order(static_cast<std::size_t>(data.rows));
        std::iota(order.begin(), order.end(), 0);
        Rng rng(derive_seed(cv.seed, static_cast<std::uint64_t>(r)));
        for (std::size_t i = order.size() - 1; i > 0; --i) {
            std::swap(order[i], order[rng.below(i + 1)]);
        }
        auto& split = splits[static_cast<std::size_t>(r)];
        for (Dataset* d : {&split.train, &split.test}) {
            d->cols = data.cols;
            d->rows = 0;
        }
        for (std::size_t k = 0; k < order.size(); ++k) {
            Dataset& d = static_cast<int>(k) < holdout ? split.test : split.train;
            const auto row = data.row(order[k]);
            d.x.insert(d.x.end(), row.begin(), row.end());
            d.y.push_back(data.y[static_cast<std::size_t>(order[k])]);
            ++d.rows;
        }
        const auto [lo, hi] = std::minmax_element(split.test.y.begin(), split.test.y.end());
        if (*lo == *hi) {
            throw Error(ErrorCode::DegenerateData,
                        "cv repetition " + std::to_string(r) + " drew a constant holdout");
        }
    }

    TuneResult result;
    result.grid.resize(grid.size());
    const std::size_t jobs = grid.size() * splits.size();
    std::vector<double> rmse(jobs);
    std::vector<double> mae(jobs);
    parallel_for(jobs, cv.threads, [&](std::size_t job) {
        const auto& spec = grid[job / splits.size()];
        const std::size_t r = job % splits.size();
        const auto& split = splits[r];
        TrainOptions o = lm;
        o.max_epochs = cv.epochs;
        std::optional<TrainedNetwork> best;
        for (int k = 0; k < cv.restarts; ++k) {
            const auto seed = derive_seed(derive_seed(cv.seed, r), 0x1000 + static_cast<std::uint64_t>(k));
            auto net = lm_train(spec, init_weights(spec, seed), split.train, o);
            if (!best || net.final_sse < best->final_sse) best = std::move(net);
        }
        double ss = 0.0;
        double sa = 0.0;
        for (int i = 0; i < split.test.rows; ++i) {
            const double pred = target_scaling.invert(forward(spec, best->weights, split.test.row(i)));
            const double actual = target_scaling.invert(split.test.y[static_cast<std::size_t>(i)]);
            ss += (pred - actual) * (pred - actual);
            sa += std::abs(pred - actual);
        }
        rmse[job] = std::sqrt(ss / split.test.rows);
        mae[job] = sa / split.test.rows;
    });

    for (std::size_t g = 0; g < grid.size(); ++g) {
        auto& e = result.grid[g];
        e.spec = grid[g];
        for (std::size_t r = 0; r < splits.size(); ++r) {
            e.mean_rmse += rmse[g * splits.size() + r];
            e.mean_mae += mae[g * splits.size() + r];
        }
        e.mean_rmse /= static_cast<double>(splits.size());
        e.mean_mae /= static_cast<double>(splits.size());
    }

    // Tiered selection; each tier narrows the candidate set, so the outcome
    // does not depend on grid order.
    const double tol = cv.tie_tolerance * (target_scaling.observed_max - target_scaling.observed_min);
    std::vector<const TuneEntry*> pool;
    for (const auto& e : result.grid) pool.push_back(&e);
    auto narrow = [&](auto key) {
        double best = key(*pool.front());
        for (auto* e : pool) best = std::min(best, key(*e));
        std::erase_if(pool, [&](const TuneEntry* e) { return key(*e) > best + tol; });
    };
    narrow([](const TuneEntry& e) { return e.mean_rmse; });
    narrow([](const TuneEntry& e) { return e.mean_mae; });
    const auto* chosen = *std::min_element(pool.begin(), pool.end(), [](auto* a, auto* b) {
        const int wa = a->spec.weight_count();
        const int wb = b->spec.weight_count();
        if (wa != wb) return wa < wb;
        if (a->mean_rmse != b->mean_rmse) return a->mean_rmse < b->mean_rmse;
        return a->spec.str() < b->spec.str();
    });
    result.chosen = chosen->spec;
    return result;
}

std::uint64_t window_ensemble_seed(std::uint64_t master, int window_index) {
    return derive_seed(master, static_cast<std::uint64_t>(window_index));
}

std::uint64_t window_forecast_seed(std::uint64_t master, int window_index) {
    return derive_seed(window_ensemble_seed(master, window_index), 0xB007);
}

std::uint64_t tuning_seed(std::uint64_t master) { return derive_seed(master, 0); }

BacktestRun train_backtest(const MonthlySeries& series, const BacktestConfig& config,
                           const ProgressFn& progress) {
    const auto tail_len = static_cast<std::size_t>(config.validation_tail);
    if (config.validation_tail < config.horizon || series.size() < tail_len + kMinTrainingMonths) {
        throw Error(ErrorCode::DegenerateData,
                    "route " + series.route_id + ": " + std::to_string(series.size()) +
                        " months cannot hold a " + std::to_string(config.validation_tail) +
                        "-month validation tail plus " + std::to_string(kMinTrainingMonths) +
                        " training months");
    }
    const MonthlySeries tail = series.slice(series.size() - tail_len, tail_len);
    const auto windows = make_windows(tail, config.horizon);

    BacktestRun run;
    run.route_id = series.route_id;

    std::array<double, 12> full_s{};
    if (config.class_reference == ClassReference::FullHistory) {
        full_s = monthly_stats(series).thresholds();
    }

    if (config.fixed_spec) {
        run.spec = *config.fixed_spec;
    } else {
        if (progress) progress("tuning on window 1 training span");
        const auto prep = prepare_training(series.before(windows.front().start));
        CvOptions cv = config.cv;
        cv.seed = tuning_seed(config.seed);
        cv.threads = config.threads;
        run.tuning = tune_hyperparams(prep.data, prep.scaling.target, config.grid, cv, config.lm);
        run.spec = run.tuning->chosen;
    }

    for (const auto& w : windows) {
        if (progress) progress("window " + std::to_string(w.index) + "/" + std::to_string(windows.size()));
        const MonthlySeries training = series.before(w.start);
        SieveOptions sieve = config.sieve;
        sieve.seed = window_ensemble_seed(config.seed, w.index);
        sieve.threads = config.threads;

        WindowModel model;
        model.window = w;
        model.ensemble = train_ensemble(training, run.spec, sieve, config.lm);
        const MonthlySeries actual = series.slice(series.index_of(w.start), w.actual_monthly.size());
        const auto& thresholds =
            config.class_reference == ClassReference::FullHistory ? full_s : model.ensemble.monthly_s;
        model.precise_classes = classify_series(actual, thresholds).values;
        run.windows.push_back(std::move(model));
    }
    return run;
}

MetricsReport score_backtest(const BacktestRun& run, const BacktestConfig& config,
                             ClassCase class_case, double class_top) {
    std::vector<WindowResult> results;
    results.reserve(run.windows.size());
    for (const auto& model : run.windows) {
        HorizonRequest req;
        req.route_id = run.route_id;
        req.start = model.window.start;
        req.months = static_cast<int>(model.precise_classes.size());
        if (req.months == 12) {
            req.class_vector = alter_case(model.precise_classes, class_case, class_top).values;
        } else {
            if (class_case != ClassCase::Precise) {
                throw Error(ErrorCode::InvalidArgument, "mean/approx class cases need a 12-month horizon");
            }
            req.class_vector = apply_class_cap(model.precise_classes, class_top);
        }
        ForecastOptions fo = config.forecast;
        fo.seed = window_forecast_seed(config.seed, model.window.index);
        fo.threads = config.threads;
        const auto range = forecast_route(model.ensemble, req, fo);
        results.push_back(score_window(model.window, range.low, range.high));
    }
    MetricsReport report = metrics(results);
    report.route_id = run.route_id;
    report.class_case = class_case;
    report.class_top = class_top;
    return report;
}

MetricsReport backtest(const MonthlySeries& series, const BacktestConfig& config,
                       ClassCase class_case) {
    return score_backtest(train_backtest(series, config), config, class_case);
}

SensitivityReport sensitivity(const BacktestRun& run, const BacktestConfig& config,
                              double class_top) {
    SensitivityReport s;
    s.route_id = run.route_id;
    s.mean = score_backtest(run, config, ClassCase::Mean, class_top);
    s.approximated = score_backtest(run, config, ClassCase::Approximated, class_top);
    s.precise = score_backtest(run, config, ClassCase::Precise, class_top);
    return s;
}

SensitivityReport sensitivity(const MonthlySeries& series, const BacktestConfig& config) {
    return sensitivity(train_backtest(series, config), config);
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* pattern, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.append(width - s.size(), ' ');
    return s;
}

std::string ev_text(double ev) { return std::isnan(ev) ? "nan" : fmt("%.2f", ev); }

}  // namespace

std::string format_precision(int hits, int windows) {
    return std::to_string(hits) + "/" + std::to_string(windows);
}

std::string format_metrics_table(std::span<const MetricsReport> reports) {
    std::ostringstream out;
    out << pad("Route", 10) << pad("Precision", 12) << pad("Explained Variance", 20)
        << pad("Mean Average Error", 20) << "Mean Average Percentage Error (%)\n";
    for (const auto& r : reports) {
        out << pad(r.route_id, 10) << pad(format_precision(r.precision_hits, r.window_count()), 12)
            << pad(ev_text(r.explained_variance), 20) << pad(fmt("%.0f", r.mae), 20)
            << fmt("%.2g", r.mape_pct) << "\n";
    }
    return out.str();
}

std::string metrics_csv(std::span<const MetricsReport> reports) {
    std::ostringstream out;
    out << "route,case,class_top,precision_hits,windows,explained_variance,mae,mape_pct\n";
    out.precision(17);
    for (const auto& r : reports) {
        out << r.route_id << ',' << to_string(r.class_case) << ',' << r.class_top << ','
            << r.precision_hits << ',' << r.window_count() << ',' << r.explained_variance << ','
            << r.mae << ',' << r.mape_pct << "\n";
    }
    return out.str();
}

std::string format_sensitivity_table(std::span<const SensitivityReport> reports) {
    std::ostringstream out;
    constexpr std::size_t w = 9;
    out << pad("Route/Case", 12) << pad("Precision", 3 * w) << pad("Explained Variance", 3 * w)
        << pad("Mean Average Error", 3 * w) << "Mean Average Percentage Error\n";
    out << pad("", 12);
    for (int block = 0; block < 4; ++block) out << pad("mean", w) << pad("approx", w) << pad("precise", w);
    out << "\n";
    for (const auto& s : reports) {
        const MetricsReport* cols[3] = {&s.mean, &s.approximated, &s.precise};
        out << pad(s.route_id, 12);
        for (auto* r : cols) out << pad(format_precision(r->precision_hits, r->window_count()), w);
        for (auto* r : cols) out << pad(ev_text(r->explained_variance), w);
        for (auto* r : cols) out << pad(fmt("%.0f", r->mae), w);
        for (auto* r : cols) out << pad(fmt("%.2g", r->mape_pct / 100.0), w);
        out << "\n";
    }
    return out.str();
}

std::string sensitivity_csv(std::span<const SensitivityReport> reports) {
    std::vector<MetricsReport> flat;
    for (const auto& s : reports) {
        flat.push_back(s.mean);
        flat.push_back(s.approximated);
        flat.push_back(s.precise);
    }
    return metrics_csv(flat);
}

std::string window_plot_csv(const MetricsReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "window_start,low,high,actual\n";
    for (const auto& w : report.windows) {
        out << w.window.start.str() << ',' << w.low << ',' << w.high << ',' << w.window.actual_sum
            << "\n";
    }
    return out.str();
}

std::string window_results_csv(const MetricsReport& report) {
    std::ostringstream out;
    out.precision(17);
    out << "window,start,actual_sum,low,high,residual,error\n";
    for (const auto& w : report.windows) {
        out << w.window.index << ',' << w.window.start.str() << ',' << w.window.actual_sum << ','
            << w.low << ',' << w.high << ',' << w.residual << ',' << w.error << "\n";
    }
    return out.str();
}

}  // namespace ibc

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ibcforecast/dataio.hpp"
#include "ibcforecast/forecast.hpp"
#include "ibcforecast/neuralnet.hpp"
#include "ibcforecast/sieve.hpp"

namespace ibc {

// ---------------------------------------------------------------------------
// Scoring
// ---------------------------------------------------------------------------

struct BoundError {
    double residual = 0.0;  // actual - nearest bound; 0 inside the range
    double error = 0.0;     // |residual|
};

BoundError nearest_bound_error(double actual_sum, double low, double high);

struct WindowResult {
    ValidationWindow window;
    double low = 0.0;
    double high = 0.0;
    double residual = 0.0;
    double error = 0.0;

    bool hit() const { return error == 0.0; }
};

WindowResult score_window(const ValidationWindow& window, double low, double high);

struct MetricsReport {
    std::string route_id;
    ClassCase class_case = ClassCase::Mean;
    double class_top = 1.0;
    int precision_hits = 0;
    double mae = 0.0;
    double mape_pct = 0.0;  // percent; divide by 100 for the proportional form
    /// 1 - Var(residual) / Var(actual_sum) over windows.
    double explained_variance = 0.0;
    std::vector<WindowResult> windows;

    int window_count() const { return static_cast<int>(windows.size()); }
};

MetricsReport metrics(std::span<const WindowResult> results);

// ---------------------------------------------------------------------------
// Hyperparameter tuning by repeated random sub-sampling
// ---------------------------------------------------------------------------

struct CvOptions {
    int repetitions = 20;
    double holdout_fraction = 0.15;
    int restarts = 2;      // random initializations per (spec, split); best training SSE kept
    int epochs = 100;      // LM epochs per restart
    /// Mean RMSEs (then MAEs) closer than tie_tolerance * target span count as equal.
    double tie_tolerance = 1e-3;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

struct TuneEntry {
    NetworkSpec spec;
    double mean_rmse = 0.0;
    double mean_mae = 0.0;
};

struct TuneResult {
    NetworkSpec chosen;
    std::vector<TuneEntry> grid;  // in the order given
};

/// Every spec is scored on the same splits and initial seeds. The winner has
/// the lowest mean RMSE; near-ties go to lower MAE, then fewer weights.
/// Errors are in target units of `scaling` (counts).
TuneResult tune_hyperparams(const Dataset& data, const AffineMap& target_scaling,
                            std::span<const NetworkSpec> grid, const CvOptions& cv,
                            const TrainOptions& lm);

std::vector<NetworkSpec> default_grid();

// ---------------------------------------------------------------------------
// Rolling backtest
// ---------------------------------------------------------------------------

enum class ClassReference { TrainingSpan, FullHistory };

struct BacktestConfig {
    int validation_tail = 43;
    int horizon = 12;
    std::vector<NetworkSpec> grid = default_grid();
    std::optional<NetworkSpec> fixed_spec;  // skips tuning when set
    CvOptions cv;
    SieveOptions sieve;
    TrainOptions lm;
    ForecastOptions forecast;
    ClassReference class_reference = ClassReference::TrainingSpan;
    std::uint64_t seed = 0;
    unsigned threads = 0;
};

/// Seeds used for window k (1-based) under a master seed.
std::uint64_t window_ensemble_seed(std::uint64_t master, int window_index);
std::uint64_t window_forecast_seed(std::uint64_t master, int window_index);
std::uint64_t tuning_seed(std::uint64_t master);

struct WindowModel {
    ValidationWindow window;
    Ensemble ensemble;
    std::vector<double> precise_classes;  // computed classes of the window's actual months
};

/// Trained models for every window; scoring against different class cases
/// reuses them, since horizon classes never enter training.
struct BacktestRun {
    std::string route_id;
    NetworkSpec spec;
    std::optional<TuneResult> tuning;
    std::vector<WindowModel> windows;
};

using ProgressFn = std::function<void(const std::string&)>;

BacktestRun train_backtest(const MonthlySeries& series, const BacktestConfig& config,
                           const ProgressFn& progress = {});

/// Forecast every window with its precise classes altered per `class_case`
/// (top class replaced by `class_top`) and score the ranges.
MetricsReport score_backtest(const BacktestRun& run, const BacktestConfig& config,
                             ClassCase class_case, double class_top = 1.0);

MetricsReport backtest(const MonthlySeries& series, const BacktestConfig& config,
                       ClassCase class_case);

struct SensitivityReport {
    std::string route_id;
    MetricsReport mean;
    MetricsReport approximated;
    MetricsReport precise;
};

SensitivityReport sensitivity(const BacktestRun& run, const BacktestConfig& config,
                              double class_top = 1.0);
SensitivityReport sensitivity(const MonthlySeries& series, const BacktestConfig& config);

// ---------------------------------------------------------------------------
// Report emitters
// ---------------------------------------------------------------------------

/// "30/32"
std::string format_precision(int hits, int windows);

/// Route | Precision | Explained Variance | MAE | MAPE (%)
std::string format_metrics_table(std::span<const MetricsReport> reports);
std::string metrics_csv(std::span<const MetricsReport> reports);

/// Three class-case columns for each of the four metrics.
std::string format_sensitivity_table(std::span<const SensitivityReport> reports);
std::string sensitivity_csv(std::span<const SensitivityReport> reports);

/// window_start,low,high,actual
std::string window_plot_csv(const MetricsReport& report);
/// window,start,actual_sum,low,high,residual,error
std::string window_results_csv(const MetricsReport& report);

}  // namespace ibc

#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ibcforecast/distfit.hpp"
#include "ibcforecast/evaluate.hpp"
#include "ibcforecast/series.hpp"

namespace ibc {

// Flat key-value run configuration:
//
//   # comment
//   data = data/ibc.csv
//   seed = 42
//   sieve_stages = 10,20
//
// Keys are listed in RunConfig::known_keys(); unknown keys are rejected so
// typos fail loudly. `seed` is mandatory.
struct RunConfig {
    std::string data_path;
    std::vector<std::string> routes;  // empty = every route in the dataset
    std::optional<TimePoint> cutoff;  // last training month of window 1
    BacktestConfig backtest;
    ClassCase class_case = ClassCase::Mean;
    double class_top = 1.0;
    McOptions mc;
    int reference_points = 30;
    int reference_repetitions = 1000;
    int reference_n = 10000;
    std::string artifacts_dir = "artifacts";
    std::string output_dir = "out";
    std::string bind = "127.0.0.1:8080";
    std::string created_at;
    std::uint64_t seed = 0;

    static RunConfig parse(std::string_view text, const std::string& base_dir = ".");
    static RunConfig load(const std::string& path);
    static const std::vector<std::string>& known_keys();

    /// Backtest settings for one series, with the validation tail derived
    /// from `cutoff` when one is configured.
    BacktestConfig backtest_for(const MonthlySeries& series) const;
};

/// Parse "a,b,c" into trimmed, non-empty items.
std::vector<std::string> split_list(std::string_view text);

/// Class vector from "0,0.5,1" or "@path" (file holding such a list,
/// commas or newlines).
std::vector<double> parse_class_vector(std::string_view text);

}  // namespace ibc

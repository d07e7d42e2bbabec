#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ibcforecast/config.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/evaluate.hpp"

namespace ibc {

// Command-line overrides layered on top of a RunConfig.
struct CommandOptions {
    std::optional<std::string> route;
    std::optional<ClassCase> class_case;
    std::optional<std::uint64_t> seed;
    std::optional<int> months;
    std::optional<std::string> class_vector;  // "0,1,..." or "@file"
    std::optional<std::string> out;
    std::optional<std::string> artifact;
    std::optional<TimePoint> start;
    std::optional<TimePoint> cutoff;
    std::optional<double> class_top;
    bool quiet = false;
};

/// Config with overrides applied (seed, out, case, class_top, route filter).
RunConfig apply_overrides(RunConfig config, const CommandOptions& opts);

/// Routes selected by the config filter (all when empty), in dataset order.
std::vector<MonthlySeries> selected_routes(const RunConfig& config);

// Each command writes its files under config.output_dir (created on demand)
// and returns the text it prints. Errors propagate as ibc::Error.

std::string cmd_ingest(const RunConfig& config);
std::string cmd_stats(const RunConfig& config);
std::string cmd_classify(const RunConfig& config);
std::string cmd_tune(const RunConfig& config, const ProgressFn& progress = {});
/// Writes <artifacts>/<route>_<cutoff>.json per selected route. The cutoff
/// defaults to the config cutoff, else the last observed month.
std::string cmd_train(const RunConfig& config, std::optional<TimePoint> cutoff,
                      const ProgressFn& progress = {});
std::string cmd_forecast(const RunConfig& config, const CommandOptions& opts);
std::string cmd_validate(const RunConfig& config, const ProgressFn& progress = {});
std::string cmd_sensitivity(const RunConfig& config, const ProgressFn& progress = {});
std::string cmd_distfit(const RunConfig& config);

/// Exit status for a failure code; 0 is reserved for success.
int exit_code(ErrorCode code);

}  // namespace ibc

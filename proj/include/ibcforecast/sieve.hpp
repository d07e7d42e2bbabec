#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ibcforecast/dataio.hpp"
#include "ibcforecast/neuralnet.hpp"

namespace ibc {

/// Staged train-rank-cut selection. Stage t trains every live candidate for
/// stage_epochs[t] more epochs, ranks by training SSE and keeps the best
/// ceil(count / reduction_factor). The survivors then get final_epochs more.
struct SieveOptions {
    int initial_candidates = 400;
    int survivor_target = 100;
    double reduction_factor = 2.0;
    std::vector<int> stage_epochs{10, 20};
    int final_epochs = 200;
    std::uint64_t seed = 0;
    unsigned threads = 0;  // 0 = all hardware threads

    /// Population sizes after each stage, starting with initial_candidates.
    std::vector<int> population_schedule() const;
    void validate() const;
};

struct SieveStageLog {
    int stage = 0;
    int epochs = 0;
    std::vector<int> candidate_ids;  // ids alive at this cut
    std::vector<double> sse;         // aligned with candidate_ids
    std::vector<bool> kept;          // aligned with candidate_ids
};

struct SieveResult {
    std::vector<TrainedNetwork> survivors;  // ordered by candidate id
    std::vector<int> survivor_ids;
    std::vector<SieveStageLog> stages;
};

/// Seed of candidate `index` in an ensemble seeded with `ensemble_seed`.
std::uint64_t candidate_seed(std::uint64_t ensemble_seed, std::uint64_t index);

SieveResult sieve_select(const NetworkSpec& spec, const Dataset& data, const SieveOptions& opts,
                         const TrainOptions& lm);

/// Trained ensemble plus everything needed to forecast with it.
struct Ensemble {
    std::string route_id;
    NetworkSpec spec;
    ScalingParams scaling;
    std::array<double, 12> monthly_s{};  // classification thresholds of the training span
    std::vector<TrainedNetwork> networks;
    TimePoint training_cutoff;  // last month included in training
    std::uint64_t seed = 0;
    std::string created_at;  // caller-supplied; empty keeps artifacts reproducible
};

/// Classify the training span against its own monthly thresholds, fit the
/// scaling, and run the sieve. `training` must hold at least
/// kMinTrainingMonths values.
Ensemble train_ensemble(const MonthlySeries& training, const NetworkSpec& spec,
                        const SieveOptions& sieve, const TrainOptions& lm);

/// Training-set pieces shared by train_ensemble and the tuner.
struct PreparedTraining {
    std::array<double, 12> monthly_s{};
    std::vector<double> classes;
    ScalingParams scaling;
    Dataset data;
};

PreparedTraining prepare_training(const MonthlySeries& training);

}  // namespace ibc

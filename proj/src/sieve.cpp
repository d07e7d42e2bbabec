#include "ibcforecast/sieve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ibcforecast/classify.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/parallel.hpp"
#include "ibcforecast/rng.hpp"

namespace ibc {

std::vector<int> SieveOptions::population_schedule() const {
    std::vector<int> sizes{initial_candidates};
    for (std::size_t t = 0; t < stage_epochs.size(); ++t) {
        sizes.push_back(static_cast<int>(std::ceil(sizes.back() / reduction_factor)));
    }
    return sizes;
}

void SieveOptions::validate() const {
    if (survivor_target < 1) throw Error(ErrorCode::InvalidArgument, "survivor_target must be >= 1");
    if (initial_candidates < survivor_target) {
        throw Error(ErrorCode::InvalidArgument, "initial_candidates must be >= survivor_target");
    }
    if (!(reduction_factor > 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "reduction_factor must exceed 1");
    }
    if (final_epochs < 0) throw Error(ErrorCode::InvalidArgument, "final_epochs must be >= 0");
    for (int e : stage_epochs) {
        if (e < 1) throw Error(ErrorCode::InvalidArgument, "stage budgets must be >= 1 epoch");
    }
    const auto schedule = population_schedule();
    if (schedule.back() != survivor_target) {
        throw Error(ErrorCode::InvalidArgument,
                    "sieve schedule ends with " + std::to_string(schedule.back()) +
                        " candidates, survivor_target is " + std::to_string(survivor_target));
    }
}

std::uint64_t candidate_seed(std::uint64_t ensemble_seed, std::uint64_t index) {
    return derive_seed(ensemble_seed, index);
}

SieveResult sieve_select(const NetworkSpec& spec, const Dataset& data, const SieveOptions& opts,
                         const TrainOptions& lm) {
    opts.validate();
    lm.validate();
    spec.validate();

    std::vector<int> alive(static_cast<std::size_t>(opts.initial_candidates));
    std::iota(alive.begin(), alive.end(), 0);
    std::vector<TrainedNetwork> nets(alive.size());
    std::vector<bool> started(alive.size(), false);

    auto train_all = [&](int epochs) {
        parallel_for(alive.size(), opts.threads, [&](std::size_t k) {
            const auto id = static_cast<std::size_t>(alive[k]);
            if (!started[id]) {
                TrainOptions o = lm;
                o.max_epochs = epochs;
                nets[id] = lm_train(spec, init_weights(spec, candidate_seed(opts.seed, id)), data, o);
            } else {
                nets[id] = lm_resume(nets[id], data, lm, epochs);
            }
        });
        for (int id : alive) started[static_cast<std::size_t>(id)] = true;
    };

    const auto schedule = opts.population_schedule();
    SieveResult result;
    for (std::size_t t = 0; t < opts.stage_epochs.size(); ++t) {
        train_all(opts.stage_epochs[t]);

        std::vector<int> ranked = alive;
        std::sort(ranked.begin(), ranked.end(), [&](int a, int b) {
            const double sa = nets[static_cast<std::size_t>(a)].final_sse;
            const double sb = nets[static_cast<std::size_t>(b)].final_sse;
            return sa != sb ? sa < sb : a < b;
        });
        const auto keep = static_cast<std::size_t>(schedule[t + 1]);
        std::vector<int> next(ranked.begin(), ranked.begin() + static_cast<std::ptrdiff_t>(keep));
        std::sort(next.begin(), next.end());

        SieveStageLog log;
        log.stage = static_cast<int>(t);
        log.epochs = opts.stage_epochs[t];
        log.candidate_ids = alive;
        for (int id : alive) {
            log.sse.push_back(nets[static_cast<std::size_t>(id)].final_sse);
            log.kept.push_back(std::binary_search(next.begin(), next.end(), id));
        }
        result.stages.push_back(std::move(log));

        for (int id : alive) {
            if (!std::binary_search(next.begin(), next.end(), id)) {
                nets[static_cast<std::size_t>(id)] = TrainedNetwork{};  // release discarded
            }
        }
        alive = std::move(next);
    }

    if (opts.final_epochs > 0 || opts.stage_epochs.empty()) train_all(opts.final_epochs);

    result.survivor_ids = alive;
    result.survivors.reserve(alive.size());
    for (int id : alive) result.survivors.push_back(std::move(nets[static_cast<std::size_t>(id)]));
    return result;
}

PreparedTraining prepare_training(const MonthlySeries& training) {
    if (training.size() < kMinTrainingMonths) {
        throw Error(ErrorCode::DegenerateData,
                    "route " + training.route_id + ": " + std::to_string(training.size()) +
                        " training months, need at least " + std::to_string(kMinTrainingMonths));
    }
    PreparedTraining p;
    const MonthlyStats stats = monthly_stats(training);
    p.monthly_s = stats.thresholds();
    p.classes = classify_series(training, p.monthly_s).values;
    const Design raw = raw_design(training, p.classes);
    p.scaling = fit_scaling(raw.inputs, raw.targets);
    p.data = to_dataset(build_design(training, p.classes, p.scaling));
    return p;
}

Ensemble train_ensemble(const MonthlySeries& training, const NetworkSpec& spec,
                        const SieveOptions& sieve, const TrainOptions& lm) {
    const PreparedTraining prep = prepare_training(training);
    SieveResult selected = sieve_select(spec, prep.data, sieve, lm);

    Ensemble e;
    e.route_id = training.route_id;
    e.spec = spec;
    e.scaling = prep.scaling;
    e.monthly_s = prep.monthly_s;
    e.networks = std::move(selected.survivors);
    e.training_cutoff = training.last();
    e.seed = sieve.seed;
    return e;
}

}  // namespace ibc

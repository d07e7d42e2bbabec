#pragma once

#include <string>

#include <json.hpp>

#include "ibcforecast/sieve.hpp"

namespace ibc {

/// Bumped whenever the artifact layout changes; readers reject other versions.
inline constexpr int kArtifactSchemaVersion = 1;

// Model artifact layout (JSON):
//
//   {
//     "schema_version": 1,
//     "route_id": "WAR",
//     "training_cutoff": "2021-01",
//     "created_at": "",
//     "seed": 42,
//     "spec": {"layer_sizes": [4, 8, 1], "hidden_activation": "tanh",
//              "output_activation": "linear"},
//     "scaling": {"year": [min, max], "month_sin": [min, max],
//                 "month_cos": [min, max], "target": [min, max]},
//     "monthly_s": [12 numbers, January first],
//     "networks": [{"weights": [...], "final_sse": x, "epochs_run": n}, ...]
//   }
//
// Weights follow the flat layout documented on WeightVector. Doubles are
// written in shortest round-trip form, so write -> read is lossless.

nlohmann::json ensemble_to_json(const Ensemble& ensemble);
Ensemble ensemble_from_json(const nlohmann::json& doc);

std::string serialize_ensemble(const Ensemble& ensemble);
void write_ensemble(const Ensemble& ensemble, const std::string& path);
Ensemble read_ensemble(const std::string& path);

nlohmann::json spec_to_json(const NetworkSpec& spec);

}  // namespace ibc

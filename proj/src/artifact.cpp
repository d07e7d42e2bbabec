#include "ibcforecast/artifact.hpp"

#include <fstream>
#include <sstream>

#include "ibcforecast/error.hpp"

namespace ibc {

using nlohmann::json;

namespace {

json map_to_json(const AffineMap& m) { return json::array({m.observed_min, m.observed_max}); }

AffineMap map_from_json(const json& j) {
    if (!j.is_array() || j.size() != 2) {
        throw Error(ErrorCode::SchemaMismatch, "scaling entries must be [min, max]");
    }
    AffineMap m{j[0].get<double>(), j[1].get<double>()};
    if (!(m.observed_min < m.observed_max)) {
        throw Error(ErrorCode::SchemaMismatch, "scaling entry has min >= max");
    }
    return m;
}

const json& require(const json& doc, const char* key) {
    auto it = doc.find(key);
    if (it == doc.end()) {
        throw Error(ErrorCode::SchemaMismatch, std::string("artifact is missing '") + key + "'");
    }
    return *it;
}

}  // namespace

json spec_to_json(const NetworkSpec& spec) {
    return {{"layer_sizes", spec.layer_sizes},
            {"hidden_activation", to_string(spec.hidden_activation)},
            {"output_activation", "linear"}};
}

json ensemble_to_json(const Ensemble& e) {
    json networks = json::array();
    for (const auto& net : e.networks) {
        networks.push_back({{"weights", net.weights},
                            {"final_sse", net.final_sse},
                            {"epochs_run", net.epochs_run}});
    }
    return {{"schema_version", kArtifactSchemaVersion},
            {"route_id", e.route_id},
            {"training_cutoff", e.training_cutoff.str()},
            {"created_at", e.created_at},
            {"seed", e.seed},
            {"spec", spec_to_json(e.spec)},
            {"scaling",
             {{"year", map_to_json(e.scaling.year)},
              {"month_sin", map_to_json(e.scaling.month_sin)},
              {"month_cos", map_to_json(e.scaling.month_cos)},
              {"target", map_to_json(e.scaling.target)}}},
            {"monthly_s", e.monthly_s},
            {"networks", networks}};
}

Ensemble ensemble_from_json(const json& doc) {
    try {
        const int version = require(doc, "schema_version").get<int>();
        if (version != kArtifactSchemaVersion) {
            throw Error(ErrorCode::SchemaMismatch,
                        "artifact schema version " + std::to_string(version) + ", expected " +
                            std::to_string(kArtifactSchemaVersion));
        }
        Ensemble e;
        e.route_id = require(doc, "route_id").get<std::string>();
        e.training_cutoff = TimePoint::parse(require(doc, "training_cutoff").get<std::string>());
        e.created_at = doc.value("created_at", std::string{});
        e.seed = require(doc, "seed").get<std::uint64_t>();

        const json& spec = require(doc, "spec");
        e.spec.layer_sizes = require(spec, "layer_sizes").get<std::vector<int>>();
        e.spec.hidden_activation = parse_activation(require(spec, "hidden_activation").get<std::string>());
        if (spec.value("output_activation", std::string("linear")) != "linear") {
            throw Error(ErrorCode::SchemaMismatch, "only linear output layers are supported");
        }
        e.spec.validate();

        const json& scaling = require(doc, "scaling");
        e.scaling.year = map_from_json(require(scaling, "year"));
        e.scaling.month_sin = map_from_json(require(scaling, "month_sin"));
        e.scaling.month_cos = map_from_json(require(scaling, "month_cos"));
        e.scaling.target = map_from_json(require(scaling, "target"));

        const auto s = require(doc, "monthly_s").get<std::vector<double>>();
        if (s.size() != 12) throw Error(ErrorCode::SchemaMismatch, "monthly_s must have 12 entries");
        std::copy(s.begin(), s.end(), e.monthly_s.begin());

        for (const auto& n : require(doc, "networks")) {
            TrainedNetwork net;
            net.spec = e.spec;
            net.weights = require(n, "weights").get<std::vector<double>>();
            if (static_cast<int>(net.weights.size()) != e.spec.weight_count()) {
                throw Error(ErrorCode::SchemaMismatch, "network weight count does not match spec");
            }
            net.final_sse = n.value("final_sse", 0.0);
            net.epochs_run = n.value("epochs_run", 0);
            e.networks.push_back(std::move(net));
        }
        if (e.networks.empty()) throw Error(ErrorCode::SchemaMismatch, "artifact has no networks");
        return e;
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaMismatch, std::string("invalid artifact: ") + ex.what());
    }
}

std::string serialize_ensemble(const Ensemble& ensemble) {
    return ensemble_to_json(ensemble).dump(1) + "\n";
}

void write_ensemble(const Ensemble& ensemble, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::NotFound, "cannot write artifact " + path);
    out << serialize_ensemble(ensemble);
}

Ensemble read_ensemble(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::NotFound, "cannot open artifact " + path);
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::exception& ex) {
        throw Error(ErrorCode::SchemaMismatch, "artifact " + path + " is not valid JSON: " + ex.what());
    }
    return ensemble_from_json(doc);
}

}  // namespace ibc

#pragma once

#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ibcforecast/error.hpp"
#include "ibcforecast/forecast.hpp"
#include "ibcforecast/series.hpp"
#include "ibcforecast/sieve.hpp"

namespace httplib {
class Server;
}

namespace ibc {

struct RunConfig;

/// Forecast payload shared by the CLI and POST /api/forecast:
///
///   {"schema_version": 1, "route": "WAR", "start": "2024-01", "months": 12,
///    "class_vector": [...], "seed": 42,
///    "range": {"low": x, "high": y},
///    "per_month": [{"month": "2024-01", "min", "q10", "median", "q90",
///                   "max", "retained"}, ...],
///    "model": {"training_cutoff", "spec", "seed", "networks"},
///    "bootstrap_samples": 10000}
///
/// Per-month statistics summarize the retained (trimmed) predictions.
nlohmann::json forecast_response(const Ensemble& ensemble, const HorizonRequest& request,
                                 const ForecastOptions& opts);

/// Monthly values, classes against full-history monthly thresholds, and
/// those thresholds.
nlohmann::json history_response(const MonthlySeries& series);

nlohmann::json error_body(ErrorCode code, std::string_view message);
int http_status(ErrorCode code);

struct LoadedModel {
    std::string file;  // filename within the artifacts directory
    Ensemble ensemble;
};

/// All *.json artifacts in `dir`, in filename order. Fails if none load.
std::vector<LoadedModel> load_artifacts(const std::string& dir);

class Service {
public:
    struct Response {
        int status = 200;
        nlohmann::json body;
    };

    Service(std::vector<MonthlySeries> dataset, std::vector<LoadedModel> models,
            ForecastOptions defaults);

    /// Dataset, artifacts and forecast defaults from a run config.
    static Service from_config(const RunConfig& config);

    /// Route a request. Never throws; failures become {code, message}.
    Response handle(std::string_view method, std::string_view path, std::string_view body) const;

    /// Model used for `route_id`: the artifact with the latest training
    /// cutoff, later filename winning ties.
    const LoadedModel& model_for(std::string_view route_id) const;

    const std::vector<MonthlySeries>& dataset() const { return dataset_; }
    const std::vector<LoadedModel>& models() const { return models_; }

private:
    nlohmann::json routes() const;
    nlohmann::json model_list() const;
    nlohmann::json forecast(std::string_view body) const;

    std::vector<MonthlySeries> dataset_;
    std::vector<LoadedModel> models_;
    ForecastOptions defaults_;
};

/// HTTP front end for `service`: GET/POST on /api/*, CORS headers, OPTIONS
/// preflight. The service must outlive the server.
std::unique_ptr<httplib::Server> make_http_server(const Service& service);

/// Serve `service` on host:port until the process is stopped.
void run_server(const Service& service, const std::string& bind);

}  // namespace ibc

#include "ibcforecast/service.hpp"

#include <algorithm>
#include <charconv>
#include <filesystem>

#include <httplib.h>

#include "ibcforecast/artifact.hpp"
#include "ibcforecast/classify.hpp"
#include "ibcforecast/config.hpp"
#include "ibcforecast/dataio.hpp"
#include "ibcforecast/error.hpp"

namespace ibc {

using nlohmann::json;

json forecast_response(const Ensemble& ensemble, const HorizonRequest& request,
                       const ForecastOptions& opts) {
    const ForecastRange range = forecast_route(ensemble, request, opts);

    json per_month = json::array();
    for (std::size_t m = 0; m < range.per_month.size(); ++m) {
        const auto& kept = range.per_month[m].retained;
        per_month.push_back({
            {"month", request.start.plus_months(static_cast<int>(m)).str()},
            {"min", kept.front()},
            {"q10", quantile_sorted(kept, 0.10)},
            {"median", quantile_sorted(kept, 0.50)},
            {"q90", quantile_sorted(kept, 0.90)},
            {"max", kept.back()},
            {"retained", kept.size()},
        });
    }

    return {
        {"schema_version", kArtifactSchemaVersion},
        {"route", ensemble.route_id},
        {"start", request.start.str()},
        {"months", request.months},
        {"class_vector", request.class_vector},
        {"seed", opts.seed},
        {"range", {{"low", range.low}, {"high", range.high}}},
        {"per_month", per_month},
        {"model",
         {{"training_cutoff", ensemble.training_cutoff.str()},
          {"spec", ensemble.spec.str()},
          {"seed", ensemble.seed},
          {"networks", ensemble.networks.size()}}},
        {"bootstrap_samples", range.bootstrap.samples},
    };
}

json history_response(const MonthlySeries& series) {
    const MonthlyStats stats = monthly_stats(series);
    const ClassSeries classes = classify_series(series, stats);
    json months = json::array();
    for (std::size_t i = 0; i < series.size(); ++i) {
        const TimePoint t = series.start.plus_months(static_cast<int>(i));
        months.push_back({{"month", t.str()}, {"value", series.values[i]}, {"class", classes.values[i]}});
    }
    return {
        {"schema_version", kArtifactSchemaVersion},
        {"route", series.route_id},
        {"start", series.start.str()},
        {"end", series.last().str()},
        {"values", months},
        {"monthly_s", stats.thresholds()},
    };
}

json error_body(ErrorCode code, std::string_view message) {
    return {{"code", error_code_name(code)}, {"message", std::string(message)}};
}

int http_status(ErrorCode code) {
    switch (code) {
        case ErrorCode::NotFound: return 404;
        case ErrorCode::SchemaMismatch: return 409;
        case ErrorCode::DegenerateData: return 422;
        case ErrorCode::NumericalFailure: return 500;
        default: return 400;
    }
}

std::vector<LoadedModel> load_artifacts(const std::string& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw Error(ErrorCode::NotFound, "artifacts directory " + dir + " not found");
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
    }
    std::sort(files.begin(), files.end());
    std::vector<LoadedModel> out;
    for (const auto& f : files) out.push_back({f.filename().string(), read_ensemble(f.string())});
    if (out.empty()) throw Error(ErrorCode::NotFound, "no model artifacts in " + dir);
    return out;
}

Service::Service(std::vector<MonthlySeries> dataset, std::vector<LoadedModel> models,
                 ForecastOptions defaults)
    : dataset_(std::move(dataset)), models_(std::move(models)), defaults_(defaults) {}

Service Service::from_config(const RunConfig& config) {
    ForecastOptions opts = config.backtest.forecast;
    opts.threads = config.backtest.threads;
    return Service(read_ibc_csv(config.data_path), load_artifacts(config.artifacts_dir), opts);
}

const LoadedModel& Service::model_for(std::string_view route_id) const {
    const LoadedModel* best = nullptr;
    for (const auto& m : models_) {
        if (m.ensemble.route_id != route_id) continue;
        if (!best || !(m.ensemble.training_cutoff < best->ensemble.training_cutoff)) best = &m;
    }
    if (!best) throw Error(ErrorCode::NotFound, "no model for route " + std::string(route_id));
    return *best;
}

json Service::routes() const {
    json out = json::array();
    for (const auto& s : dataset_) {
        const bool has_model = std::any_of(models_.begin(), models_.end(),
                                           [&](const LoadedModel& m) { return m.ensemble.route_id == s.route_id; });
        out.push_back({{"route", s.route_id},
                       {"start", s.start.str()},
                       {"end", s.last().str()},
                       {"months", s.size()},
                       {"has_model", has_model}});
    }
    return out;
}

json Service::model_list() const {
    json out = json::array();
    for (const auto& m : models_) {
        out.push_back({{"file", m.file},
                       {"route", m.ensemble.route_id},
                       {"training_cutoff", m.ensemble.training_cutoff.str()},
                       {"spec", m.ensemble.spec.str()},
                       {"seed", m.ensemble.seed},
                       {"networks", m.ensemble.networks.size()},
                       {"created_at", m.ensemble.created_at},
                       {"schema_version", kArtifactSchemaVersion}});
    }
    return out;
}

json Service::forecast(std::string_view body) const {
    const json req = json::parse(body, nullptr, false);
    if (req.is_discarded() || !req.is_object()) {
        throw Error(ErrorCode::MalformedInput, "request body must be a JSON object");
    }
    try {
        const std::string route = req.at("route").get<std::string>();
        const LoadedModel& model = model_for(route);

        HorizonRequest h;
        h.route_id = route;
        h.class_vector = req.at("class_vector").get<std::vector<double>>();
        h.months = req.contains("months") ? req["months"].get<int>() : static_cast<int>(h.class_vector.size());
        h.start = req.contains("start") ? TimePoint::parse(req["start"].get<std::string>())
                                        : model.ensemble.training_cutoff.plus_months(1);

        ForecastOptions opts = defaults_;
        opts.seed = req.contains("seed") ? req["seed"].get<std::uint64_t>() : model.ensemble.seed;
        return forecast_response(model.ensemble, h, opts);
    } catch (const json::exception& e) {
        throw Error(ErrorCode::MalformedInput, std::string("invalid forecast request: ") + e.what());
    }
}

Service::Response Service::handle(std::string_view method, std::string_view path,
                                  std::string_view body) const {
    constexpr std::string_view kRoutes = "/api/routes";
    try {
        if (path == kRoutes) {
            if (method != "GET") return {405, error_body(ErrorCode::InvalidArgument, "method not allowed")};
            return {200, routes()};
        }
        if (path.starts_with(kRoutes) && path.ends_with("/history")) {
            if (method != "GET") return {405, error_body(ErrorCode::InvalidArgument, "method not allowed")};
            const auto id = path.substr(kRoutes.size() + 1, path.size() - kRoutes.size() - 1 - 8);
            if (id.empty() || id.find('/') != std::string_view::npos) {
                return {404, error_body(ErrorCode::NotFound, "unknown path")};
            }
            return {200, history_response(find_route(dataset_, id))};
        }
        if (path == "/api/models") {
            if (method != "GET") return {405, error_body(ErrorCode::InvalidArgument, "method not allowed")};
            return {200, model_list()};
        }
        if (path == "/api/forecast") {
            if (method != "POST") return {405, error_body(ErrorCode::InvalidArgument, "method not allowed")};
            return {200, forecast(body)};
        }
        return {404, error_body(ErrorCode::NotFound, "unknown path " + std::string(path))};
    } catch (const Error& e) {
        return {http_status(e.code()), error_body(e.code(), e.what())};
    } catch (const std::exception& e) {
        return {500, error_body(ErrorCode::NumericalFailure, e.what())};
    }
}

std::unique_ptr<httplib::Server> make_http_server(const Service& service) {
    auto server = std::make_unique<httplib::Server>();
    auto dispatch = [&service](const httplib::Request& req, httplib::Response& res) {
        const auto r = service.handle(req.method, req.path, req.body);
        res.status = r.status;
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_content(r.body.dump(), "application/json");
    };
    server->Get(R"(/api/.*)", dispatch);
    server->Post(R"(/api/.*)", dispatch);
    server->Options(R"(/api/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    return server;
}

void run_server(const Service& service, const std::string& bind) {
    const auto colon = bind.rfind(':');
    if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "bind must be host:port, got " + bind);
    const std::string host = bind.substr(0, colon);
    int port = 0;
    const auto digits = std::string_view(bind).substr(colon + 1);
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), port);
    if (ec != std::errc{} || ptr != digits.data() + digits.size() || port < 1 || port > 65535) {
        throw Error(ErrorCode::ConfigError, "bind port must be 1..65535, got " + bind);
    }
    auto server = make_http_server(service);
    if (!server->listen(host, port)) throw Error(ErrorCode::ConfigError, "cannot listen on " + bind);
}

}  // namespace ibc

#include <doctest.h>

#include <thread>

// Project headers first: httplib pulls in <resolv.h>, whose _res macro
// collides with Eigen parameter names.
#include "helpers.hpp"
#include "ibcforecast/service.hpp"

#include <httplib.h>

using namespace ibc;
using nlohmann::json;

namespace {

Ensemble small_ensemble(const MonthlySeries& training, std::uint64_t seed) {
    SieveOptions s;
    s.initial_candidates = 6;
    s.survivor_target = 3;
    s.stage_epochs = {3};
    s.final_epochs = 10;
    s.seed = seed;
    return train_ensemble(training, NetworkSpec::parse("4:tanh"), s, TrainOptions{});
}

const Service& fixture() {
    static const Service service = [] {
        const auto series = testing::seasonal_series(60, 44);
        auto other = testing::seasonal_series(36, 45);
        other.route_id = "OTH";
        std::vector<LoadedModel> models;
        models.push_back({"TST_2011-12.json", small_ensemble(series.slice(0, 36), 5)});
        models.push_back({"TST_2012-12.json", small_ensemble(series.slice(0, 48), 6)});
        ForecastOptions opts;
        opts.samples = 2000;
        return Service({series, other}, std::move(models), opts);
    }();
    return service;
}

json twelve(double c) { return json(std::vector<double>(12, c)); }

}  // namespace

TEST_CASE("route listing") {
    const auto r = fixture().handle("GET", "/api/routes", "");
    REQUIRE(r.status == 200);
    REQUIRE(r.body.size() == 2);
    CHECK(r.body[0]["route"] == "TST");
    CHECK(r.body[0]["months"] == 60);
    CHECK(r.body[0]["start"] == "2009-01");
    CHECK(r.body[0]["end"] == "2013-12");
    CHECK(r.body[0]["has_model"] == true);
    CHECK(r.body[1]["has_model"] == false);
}

TEST_CASE("route history") {
    const auto r = fixture().handle("GET", "/api/routes/TST/history", "");
    REQUIRE(r.status == 200);
    CHECK(r.body["values"].size() == 60);
    CHECK(r.body["monthly_s"].size() == 12);
    const auto& first = r.body["values"][0];
    CHECK(first["month"] == "2009-01");
    const double c = first["class"];
    CHECK((c == 0.0 || c == 0.5 || c == 1.0));
    CHECK(fixture().handle("GET", "/api/routes/NOPE/history", "").status == 404);
}

TEST_CASE("model listing and selection") {
    const auto r = fixture().handle("GET", "/api/models", "");
    REQUIRE(r.status == 200);
    CHECK(r.body.size() == 2);
    CHECK(r.body[1]["training_cutoff"] == "2012-12");
    CHECK(r.body[1]["networks"] == 3);
    CHECK(fixture().model_for("TST").file == "TST_2012-12.json");
    CHECK_THROWS_AS(fixture().model_for("OTH"), Error);
}

TEST_CASE("forecast defaults to the month after the cutoff and the artifact seed") {
    const json req{{"route", "TST"}, {"class_vector", twelve(0.5)}};
    const auto r = fixture().handle("POST", "/api/forecast", req.dump());
    REQUIRE(r.status == 200);
    CHECK(r.body["start"] == "2013-01");
    CHECK(r.body["months"] == 12);
    CHECK(r.body["seed"] == 6);
    CHECK(r.body["per_month"].size() == 12);
    CHECK(r.body["model"]["training_cutoff"] == "2012-12");
    const double low = r.body["range"]["low"], high = r.body["range"]["high"];
    CHECK(low <= high);
    CHECK(low >= 0.0);
    double lo_sum = 0.0, hi_sum = 0.0;
    for (const auto& m : r.body["per_month"]) {
        CHECK(m["min"].get<double>() <= m["median"].get<double>());
        CHECK(m["median"].get<double>() <= m["max"].get<double>());
        lo_sum += m["min"].get<double>();
        hi_sum += m["max"].get<double>();
    }
    CHECK(low >= lo_sum - 1e-9);
    CHECK(high <= hi_sum + 1e-9);
}

TEST_CASE("forecast responses are deterministic in the seed") {
    const json req{{"route", "TST"}, {"class_vector", twelve(1.0)}, {"seed", 99}, {"start", "2014-01"}};
    const auto a = fixture().handle("POST", "/api/forecast", req.dump());
    const auto b = fixture().handle("POST", "/api/forecast", req.dump());
    REQUIRE(a.status == 200);
    CHECK(a.body.dump() == b.body.dump());
    CHECK(a.body["start"] == "2014-01");
    CHECK(a.body["seed"] == 99);

    // Same path as the CLI: the shared response builder with the same inputs.
    HorizonRequest h;
    h.route_id = "TST";
    h.start = {2014, 1};
    h.class_vector.assign(12, 1.0);
    ForecastOptions opts;
    opts.samples = 2000;
    opts.seed = 99;
    CHECK(forecast_response(fixture().model_for("TST").ensemble, h, opts).dump() == a.body.dump());
}

TEST_CASE("fifteen-month forecast") {
    const json req{{"route", "TST"}, {"class_vector", json(std::vector<double>(15, 0.0))}, {"months", 15}};
    const auto r = fixture().handle("POST", "/api/forecast", req.dump());
    REQUIRE(r.status == 200);
    CHECK(r.body["per_month"].size() == 15);
}

TEST_CASE("forecast request errors") {
    const auto& s = fixture();
    auto status_of = [&](const json& req) { return s.handle("POST", "/api/forecast", req.dump()); };

    auto r = status_of({{"route", "TST"}, {"class_vector", json(std::vector<double>(11, 0.0))}, {"months", 12}});
    CHECK(r.status == 400);
    CHECK(r.body["code"] == "length_mismatch");

    r = status_of({{"route", "OTH"}, {"class_vector", twelve(0.0)}});
    CHECK(r.status == 404);
    CHECK(r.body["code"] == "not_found");

    r = status_of({{"class_vector", twelve(0.0)}});
    CHECK(r.status == 400);

    r = status_of({{"route", "TST"}, {"class_vector", "high"}});
    CHECK(r.status == 400);

    r = s.handle("POST", "/api/forecast", "{not json");
    CHECK(r.status == 400);
    CHECK(r.body.contains("message"));
}

TEST_CASE("unknown paths and wrong methods") {
    CHECK(fixture().handle("GET", "/api/nothing", "").status == 404);
    CHECK(fixture().handle("GET", "/api/forecast", "").status == 405);
    CHECK(fixture().handle("POST", "/api/routes", "").status == 405);
    CHECK(fixture().handle("DELETE", "/api/models", "").status == 405);
}

TEST_CASE("status mapping") {
    CHECK(http_status(ErrorCode::NotFound) == 404);
    CHECK(http_status(ErrorCode::SchemaMismatch) == 409);
    CHECK(http_status(ErrorCode::DegenerateData) == 422);
    CHECK(http_status(ErrorCode::NumericalFailure) == 500);
    CHECK(http_status(ErrorCode::LengthMismatch) == 400);
    CHECK(error_body(ErrorCode::NotFound, "x") == json{{"code", "not_found"}, {"message", "x"}});
}

TEST_CASE("http front end") {
    auto server = make_http_server(fixture());
    const int port = server->bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread worker([&] { server->listen_after_bind(); });
    server->wait_until_ready();

    httplib::Client client("127.0.0.1", port);
    auto res = client.Get("/api/routes");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(res->get_header_value("Access-Control-Allow-Origin") == "*");
    CHECK(json::parse(res->body).size() == 2);

    const json req{{"route", "TST"}, {"class_vector", twelve(0.0)}, {"seed", 3}};
    res = client.Post("/api/forecast", req.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    CHECK(json::parse(res->body) == fixture().handle("POST", "/api/forecast", req.dump()).body);

    res = client.Post("/api/forecast", "{}", "application/json");
    REQUIRE(res);
    CHECK(res->status == 400);

    res = client.Options("/api/forecast");
    REQUIRE(res);
    CHECK(res->status == 204);

    server->stop();
    worker.join();
}

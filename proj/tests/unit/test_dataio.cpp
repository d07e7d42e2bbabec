#include <doctest.h>

#include <cmath>
#include <sstream>

#include "helpers.hpp"
#include "ibcforecast/dataio.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/rng.hpp"

using namespace ibc;

namespace {

std::string route_csv(const std::string& route, TimePoint from, TimePoint to) {
    std::ostringstream out;
    out << "route,year,month,value\n";
    int v = 10;
    for (TimePoint t = from; !(to < t); t = t.plus_months(1)) {
        out << route << ',' << t.year << ',' << t.month << ',' << v++ << "\n";
    }
    return out.str();
}

ErrorCode parse_error(const std::string& text) {
    try {
        parse_ibc_csv(text);
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected a parse error");
    return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("single route Jan 2009 .. Aug 2024 gives 188 values") {
    const auto series = parse_ibc_csv(route_csv("CMR", {2009, 1}, {2024, 8}));
    REQUIRE(series.size() == 1);
    CHECK(series[0].route_id == "CMR");
    CHECK(series[0].size() == 188);
    CHECK(series[0].start == TimePoint{2009, 1});
    CHECK(series[0].last() == TimePoint{2024, 8});
}

TEST_CASE("empty input") {
    CHECK(parse_ibc_csv("").empty());
    CHECK(parse_ibc_csv("route,year,month,value\n").empty());
}

TEST_CASE("gap names the missing month") {
    const std::string text = "route,year,month,value\nX,2020,1,5\nX,2020,3,7\n";
    try {
        parse_ibc_csv(text);
        FAIL("gap not detected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingMonth);
        CHECK(std::string(e.what()).find("2020-02") != std::string::npos);
    }
}

TEST_CASE("malformed, negative and duplicate rows") {
    CHECK(parse_error("route,year,month,value\nX,2020,1\n") == ErrorCode::MalformedInput);
    CHECK(parse_error("route,year,month,value\nX,2020,1,abc\n") == ErrorCode::MalformedInput);
    CHECK(parse_error("route,year,month,value\nX,2020,13,4\n") == ErrorCode::MalformedInput);
    CHECK(parse_error("route,year,month,value\nX,2020,1,-4\n") == ErrorCode::NegativeValue);
    CHECK(parse_error("route,year,month,value\nX,2020,1,4\nX,2020,1,5\n") == ErrorCode::DuplicateEntry);
    CHECK(parse_error("id,year,month,value\nX,2020,1,4\n") == ErrorCode::MalformedInput);

    try {
        parse_ibc_csv("route,year,month,value\nX,2020,1,4\nX,2020,2,x\n");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}

TEST_CASE("routes of different lengths and any row order") {
    const std::string text =
        "route,year,month,value\r\n"
        "B,2020,2,3\r\n"
        "A,2020,1,1\r\n"
        "B,2020,1,2\r\n"
        "\r\n"
        "A,2020,2,4\r\n"
        "A,2020,3,9\r\n";
    const auto series = parse_ibc_csv(text);
    REQUIRE(series.size() == 2);
    CHECK(series[0].route_id == "A");
    CHECK(series[0].values == std::vector<std::int64_t>{1, 4, 9});
    CHECK(series[1].values == std::vector<std::int64_t>{2, 3});
}

TEST_CASE("csv round trip reproduces the canonical form") {
    const std::string canonical = "route,year,month,value\nA,2020,11,5\nA,2020,12,0\nA,2021,1,7\nB,2019,6,1\n";
    const auto parsed = parse_ibc_csv(canonical);
    CHECK(serialize_ibc_csv(parsed) == canonical);

    const std::string shuffled = "route,year,month,value\nB,2019,6,1\nA,2021,1,7\nA,2020,11,5\nA,2020,12,0\n";
    CHECK(serialize_ibc_csv(parse_ibc_csv(shuffled)) == canonical);

    const auto fixture = read_ibc_csv(testing::data_path("synthetic.csv"));
    CHECK(serialize_ibc_csv(parse_ibc_csv(serialize_ibc_csv(fixture))) == serialize_ibc_csv(fixture));
}

TEST_CASE("find route") {
    const auto series = parse_ibc_csv(route_csv("WAR", {2020, 1}, {2020, 6}));
    CHECK(find_route(series, "WAR").size() == 6);
    CHECK_THROWS_AS(find_route(series, "EMR"), Error);
}

TEST_CASE("month encoding") {
    auto near = [](double a, double b) { return std::abs(a - b) < 1e-12; };
    CHECK(near(encode_month(3).sin, 1.0));
    CHECK(near(encode_month(3).cos, 0.0));
    CHECK(near(encode_month(12).sin, 0.0));
    CHECK(near(encode_month(12).cos, 1.0));
    CHECK(near(encode_month(6).sin, 0.0));
    CHECK(near(encode_month(6).cos, -1.0));
    CHECK_THROWS_AS(encode_month(0), Error);
    CHECK_THROWS_AS(encode_month(13), Error);

    for (int m = 1; m <= 12; ++m) {
        const auto e = encode_month(m);
        CHECK(near(e.sin * e.sin + e.cos * e.cos, 1.0));
    }
}

TEST_CASE("consecutive months are equidistant on the circle") {
    auto dist = [](int a, int b) {
        const auto x = encode_month(a), y = encode_month(b);
        return std::hypot(x.sin - y.sin, x.cos - y.cos);
    };
    const double ref = dist(12, 1);
    for (int m = 1; m < 12; ++m) CHECK(std::abs(dist(m, m + 1) - ref) < 1e-12);
}

TEST_CASE("affine scaling") {
    std::vector<double> years;
    for (int y = 2009; y <= 2021; ++y) years.push_back(y);
    const auto map = AffineMap::fit(years, "year");
    CHECK(map.apply(2009) == -1.0);
    CHECK(map.apply(2021) == 1.0);
    CHECK(map.apply(2024) == doctest::Approx(1.5).epsilon(1e-15));

    const std::vector<double> constant{3.0, 3.0, 3.0};
    CHECK_THROWS_AS(AffineMap::fit(constant, "x"), Error);

    Rng rng(11);
    double prev_x = -1e6, prev_y = map.apply(prev_x);
    for (int i = 0; i < 1000; ++i) {
        const double x = rng.uniform(-1e4, 1e4);
        CHECK(std::abs(map.invert(map.apply(x)) - x) < 1e-9);
        const double next_x = prev_x + std::abs(x) + 1.0;
        CHECK(map.apply(next_x) > prev_y);
        prev_x = next_x;
        prev_y = map.apply(next_x);
    }
}

TEST_CASE("design rows, shapes and target endpoint") {
    const auto s = testing::seasonal_series(36, 3);
    std::vector<double> classes(s.size(), 0.5);
    const auto raw = raw_design(s, classes);
    const auto scaling = fit_scaling(raw.inputs, raw.targets);
    const auto design = build_design(s, classes, scaling);
    CHECK(design.inputs.size() == s.size());
    CHECK(design.targets.size() == s.size());

    std::size_t argmax = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.values[i] > s.values[argmax]) argmax = i;
    }
    CHECK(design.targets[argmax] == 1.0);
    for (const auto& row : design.inputs) CHECK(row.class_value == 0.5);
    CHECK(design.inputs.front().year == -1.0);
    CHECK(design.inputs.back().year == 1.0);

    classes.pop_back();
    CHECK_THROWS_AS(build_design(s, classes, scaling), Error);
}

TEST_CASE("validation windows") {
    std::vector<std::int64_t> values(43);
    for (int i = 0; i < 43; ++i) values[static_cast<std::size_t>(i)] = i + 1;
    const auto tail = testing::make_series("X", {2021, 2}, values);

    const auto w = make_windows(tail, 12);
    REQUIRE(w.size() == 32);
    CHECK(w.front().index == 1);
    CHECK(w.front().start == TimePoint{2021, 2});
    CHECK(w.front().start.plus_months(11) == TimePoint{2022, 1});
    CHECK(w.front().actual_sum == 78);
    CHECK(w.back().index == 32);
    CHECK(w.back().start == TimePoint{2023, 9});
    for (std::size_t k = 1; k < w.size(); ++k) {
        CHECK(w[k].start == w[k - 1].start.plus_months(1));
        // consecutive windows share h - 1 months
        CHECK(std::equal(w[k].actual_monthly.begin(), w[k].actual_monthly.end() - 1,
                         w[k - 1].actual_monthly.begin() + 1));
        std::int64_t sum = 0;
        for (auto v : w[k].actual_monthly) sum += v;
        CHECK(sum == w[k].actual_sum);
    }

    CHECK(make_windows(tail.slice(0, 12), 12).size() == 1);
    CHECK_THROWS_AS(make_windows(tail.slice(0, 11), 12), Error);

    for (int T = 3; T <= 20; ++T) {
        for (int h = 1; h <= T; ++h) CHECK(make_windows(tail.slice(0, static_cast<std::size_t>(T)), h).size() ==
                                           static_cast<std::size_t>(T - h + 1));
    }
}

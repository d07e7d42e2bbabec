#include <doctest.h>

#include <cmath>

#include "helpers.hpp"
#include "ibcforecast/classify.hpp"
#include "ibcforecast/error.hpp"
#include "ibcforecast/rng.hpp"

using namespace ibc;

TEST_CASE("classify_value boundaries") {
    CHECK(classify_value(100, 300) == 0.0);
    CHECK(classify_value(300, 300) == 0.5);
    CHECK(classify_value(599.999, 300) == 0.5);
    CHECK(classify_value(600, 300) == 1.0);
    CHECK_THROWS_AS(classify_value(1, 0), Error);
    CHECK_THROWS_AS(classify_value(1, -2), Error);
}

TEST_CASE("z-score form") {
    // x = mean with SNR 1 sits on the s boundary
    CHECK(zscore_classify(5.0, 5.0, 5.0) == 0.5);
    CHECK(zscore_classify(10.0, 5.0, 5.0) == 1.0);
    CHECK_THROWS_AS(zscore_classify(1, 1, 0), Error);

    Rng rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const double s = rng.uniform(0.1, 50.0);
        const double mean = rng.uniform(0.1, 100.0);
        const double x = rng.uniform(0.0, 3.0 * s);
        CHECK(zscore_classify(x, mean, s) == classify_value(x, s));
    }
}

TEST_CASE("classify_value is monotone in x") {
    double prev = 0.0;
    for (int i = 0; i <= 1000; ++i) {
        const double c = classify_value(i * 0.01, 3.3);
        CHECK(c >= prev);
        prev = c;
    }
}

TEST_CASE("exponential draws split 63/23/14") {
    Rng rng(99);
    std::array<int, 3> count{};
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        const double c = classify_value(rng.exponential(), 1.0);
        ++count[c == 0.0 ? 0 : (c == 0.5 ? 1 : 2)];
    }
    CHECK(std::abs(count[0] / double(n) - (1.0 - std::exp(-1.0))) < 0.01);
    CHECK(std::abs(count[1] / double(n) - (std::exp(-1.0) - std::exp(-2.0))) < 0.01);
    CHECK(std::abs(count[2] / double(n) - std::exp(-2.0)) < 0.01);
}

TEST_CASE("monthly statistics against a two-pass oracle") {
    // Calendar month m in year y holds 10 y^2 + m.
    std::vector<std::int64_t> v;
    for (int y = 0; y < 4; ++y) {
        for (int m = 1; m <= 12; ++m) v.push_back(y * y * 10 + m);
    }
    const auto s = testing::make_series("X", {2015, 1}, v);
    const auto stats = monthly_stats(s);
    for (int m = 1; m <= 12; ++m) {
        double mean = 0.0;
        for (int y = 0; y < 4; ++y) mean += y * y * 10 + m;
        mean /= 4.0;
        double ss = 0.0;
        for (int y = 0; y < 4; ++y) ss += std::pow(y * y * 10 + m - mean, 2);
        const double sd = std::sqrt(ss / 3.0);
        const auto& d = stats.by_month[static_cast<std::size_t>(m - 1)];
        CHECK(d.n == 4);
        CHECK(d.mean == doctest::Approx(mean).epsilon(1e-14));
        CHECK(d.s == doctest::Approx(sd).epsilon(1e-14));
        CHECK(d.snr == doctest::Approx(mean / sd).epsilon(1e-14));
    }
    CHECK(stats.stationary.n == 48);
}

TEST_CASE("monthly statistics need two observations per month") {
    std::vector<std::int64_t> v(13, 5);
    v[3] = 9;
    CHECK_THROWS_AS(monthly_stats(testing::make_series("X", {2020, 1}, v)), Error);
}

TEST_CASE("constant series has zero thresholds") {
    const auto s = testing::make_series("X", {2020, 1}, std::vector<std::int64_t>(24, 7));
    const auto stats = monthly_stats(s);
    for (double t : stats.thresholds()) CHECK(t == 0.0);
    CHECK_THROWS_AS(classify_series(s, stats), Error);
}

TEST_CASE("classify series against its own calendar month") {
    const auto s = testing::seasonal_series(60, 5);
    const auto stats = monthly_stats(s);
    const auto classes = classify_series(s, stats);
    REQUIRE(classes.values.size() == s.size());
    CHECK(classes.provenance == ClassProvenance::Computed);
    for (std::size_t i = 0; i < s.size(); ++i) {
        const int m = s.at(i).month;
        CHECK(classes.values[i] == classify_value(static_cast<double>(s.values[i]),
                                                  stats.by_month[static_cast<std::size_t>(m - 1)].s));
    }
}

TEST_CASE("historical maximum above 2s is class 1") {
    // January values 1, 2, 1, 2, 100: s ~ 44.1, so 100 >= 2s
    std::vector<std::int64_t> v;
    for (int y = 0; y < 5; ++y) {
        for (int m = 1; m <= 12; ++m) v.push_back(m == 1 && y == 4 ? 100 : 1 + (y % 2));
    }
    const auto s = testing::make_series("X", {2010, 1}, v);
    const auto c = classify_series(s, monthly_stats(s));
    CHECK(c.values[48] == 1.0);
}

TEST_CASE("scaling a series leaves its classes unchanged") {
    const auto s = testing::seasonal_series(48, 8);
    auto scaled = s;
    for (auto& x : scaled.values) x *= 7;
    CHECK(classify_series(s, monthly_stats(s)).values ==
          classify_series(scaled, monthly_stats(scaled)).values);
}

TEST_CASE("class case alteration") {
    const std::vector<double> precise{0, 0, 0, 0.5, 0.5, 0, 1, 1, 0.5, 0, 0.5, 0.5};

    const auto same = alter_case(precise, ClassCase::Precise);
    CHECK(same.values == precise);

    const auto mean = alter_case(precise, ClassCase::Mean);
    CHECK(mean.provenance == ClassProvenance::Altered);
    CHECK(mean.altered_case == ClassCase::Mean);
    for (int i = 0; i < 6; ++i) CHECK(mean.values[static_cast<std::size_t>(i)] == doctest::Approx(1.0 / 6.0));
    for (int i = 6; i < 12; ++i) CHECK(mean.values[static_cast<std::size_t>(i)] == doctest::Approx(3.5 / 6.0));

    const auto approx = alter_case(precise, ClassCase::Approximated);
    for (int i = 0; i < 6; ++i) CHECK(approx.values[static_cast<std::size_t>(i)] == 0.0);
    for (int i = 6; i < 12; ++i) CHECK(approx.values[static_cast<std::size_t>(i)] == 0.5);

    const std::vector<double> short_vec(11, 0.0);
    CHECK_THROWS_AS(alter_case(short_vec, ClassCase::Mean), Error);
}

TEST_CASE("approximated case rounds midpoints up and stays on the grid") {
    // half means 0.25 and 0.75 exactly
    const std::vector<double> q{0.5, 0, 0.5, 0, 0.5, 0, 1, 0.5, 1, 0.5, 1, 0.5};
    const auto a = alter_case(q, ClassCase::Approximated);
    CHECK(a.values[0] == 0.5);
    CHECK(a.values[11] == 1.0);

    Rng rng(3);
    const double grid[3] = {0.0, 0.5, 1.0};
    for (int trial = 0; trial < 200; ++trial) {
        std::vector<double> p(12);
        for (auto& x : p) x = grid[rng.below(3)];
        const auto m = alter_case(p, ClassCase::Mean);
        const auto r = alter_case(p, ClassCase::Approximated);
        for (int h = 0; h < 2; ++h) {
            double avg = 0.0;
            for (int i = 0; i < 6; ++i) avg += p[static_cast<std::size_t>(h * 6 + i)];
            avg /= 6.0;
            for (int i = 0; i < 6; ++i) {
                const auto k = static_cast<std::size_t>(h * 6 + i);
                CHECK(m.values[k] == doctest::Approx(avg));
                CHECK((r.values[k] == 0.0 || r.values[k] == 0.5 || r.values[k] == 1.0));
            }
        }
    }
}

TEST_CASE("class cap replaces the top class") {
    const std::vector<double> precise{1, 1, 1, 1, 1, 1, 0.5, 0.5, 1, 1, 0, 0};
    const auto capped = apply_class_cap(precise, 1.2);
    CHECK(capped[0] == 1.2);
    CHECK(capped[6] == 0.5);
    CHECK(capped[10] == 0.0);

    const auto m = alter_case(precise, ClassCase::Mean, 1.2);
    CHECK(m.values[0] == doctest::Approx(1.2));
    CHECK(m.values[6] == doctest::Approx((0.5 + 0.5 + 1.2 + 1.2) / 6.0));
    const auto a = alter_case(precise, ClassCase::Approximated, 1.2);
    CHECK(a.values[0] == 1.2);
}

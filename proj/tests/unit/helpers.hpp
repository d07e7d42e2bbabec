#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ibcforecast/rng.hpp"
#include "ibcforecast/series.hpp"

namespace testing {

inline ibc::MonthlySeries make_series(std::string route, ibc::TimePoint start,
                                      std::vector<std::int64_t> values) {
    ibc::MonthlySeries s;
    s.route_id = std::move(route);
    s.start = start;
    s.values = std::move(values);
    return s;
}

// Seasonal counts with multiplicative noise; a level bump in the middle
// gives the class covariate something to explain.
inline ibc::MonthlySeries seasonal_series(int months, std::uint64_t seed, double noise = 0.1,
                                          ibc::TimePoint start = {2009, 1}) {
    ibc::Rng rng(seed);
    std::vector<std::int64_t> v;
    for (int t = 0; t < months; ++t) {
        const int month = (start.month - 1 + t) % 12 + 1;
        const double level = (t >= months / 2 && t < months / 2 + 10) ? 2500.0 : 900.0;
        const double season = 1.0 + 0.4 * std::sin(2.0 * M_PI * (month - 4) / 12.0);
        v.push_back(std::llround(level * season * std::exp(noise * rng.normal())));
    }
    return make_series("TST", start, std::move(v));
}

inline std::string data_path(const std::string& name) { return std::string(IBC_TEST_DATA) + "/" + name; }

}  // namespace testing

#pragma once

#include <span>

namespace ibc {

/// Inclusive linear-interpolation quantile at position (n - 1) q of sorted data.
double quantile_sorted(std::span<const double> sorted, double q);

}  // namespace ibc

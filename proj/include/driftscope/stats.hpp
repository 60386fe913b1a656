#pragma once

#include <optional>
#include <span>
#include <vector>

namespace driftscope::stats {

double mean(std::span<const double> values);
// Population variance (divide by N).
double variance(std::span<const double> values);
// Sample standard error of the mean: sd_{N-1} / sqrt(N); 0 for fewer than two values.
double standard_error(std::span<const double> values);

// Linear interpolation between closest ranks: position p/100 * (n - 1) in the
// sorted sample (the same convention as numpy's default percentile).
double percentile(std::vector<double> values, double p);

// Returns nullopt when either input has zero variance.
std::optional<double> pearson(std::span<const double> a, std::span<const double> b);

} // namespace driftscope::stats

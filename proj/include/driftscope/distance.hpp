#pragma once

#include <span>
#include <string>
#include <string_view>

namespace driftscope {

enum class Metric { euclidean, cosine };

Metric parse_metric(std::string_view name);
std::string_view to_string(Metric metric);

// euclidean: l2 norm of a - b. cosine: 1 - a.b / (|a||b|); a single zero
// vector has similarity 0, two zero vectors are rejected.
double distance(std::span<const double> a, std::span<const double> b, Metric metric);

} // namespace driftscope

#include "driftscope/stats.hpp"

#include "driftscope/error.hpp"

#include <algorithm>
#include <cmath>

namespace driftscope::stats {

double mean(std::span<const double> values) {
    if (values.empty()) fail(ErrorKind::EmptyDataset, "mean of an empty sample");
    double s = 0.0;
    for (double v : values) s += v;
    return s / static_cast<double>(values.size());
}

double variance(std::span<const double> values) {
    double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size());
}

double standard_error(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    double m = mean(values);
    double ss = 0.0;
    for (double v : values) ss += (v - m) * (v - m);
    double n = static_cast<double>(values.size());
    return std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) fail(ErrorKind::EmptyDataset, "percentile of an empty sample");
    if (!(p >= 0.0 && p <= 100.0)) fail(ErrorKind::InvalidArgument, "percentile outside [0, 100]");
    std::sort(values.begin(), values.end());
    double pos = p / 100.0 * static_cast<double>(values.size() - 1);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    auto hi = std::min(lo + 1, values.size() - 1);
    double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return values[lo];
    return values[lo] + frac * (values[hi] - values[lo]);
}

std::optional<double> pearson(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) fail(ErrorKind::LengthMismatch, "pearson inputs differ in length");
    if (a.size() < 2) return std::nullopt;
    double ma = mean(a), mb = mean(b);
    double sab = 0.0, saa = 0.0, sbb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double da = a[i] - ma, db = b[i] - mb;
        sab += da * db;
        saa += da * da;
        sbb += db * db;
    }
    if (saa <= 0.0 || sbb <= 0.0) return std::nullopt;
    return sab / std::sqrt(saa * sbb);
}

} // namespace driftscope::stats

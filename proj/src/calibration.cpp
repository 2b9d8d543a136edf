#include "stackgibbs/calibration.hpp"

#include "stackgibbs/error.hpp"

#include <algorithm>
#include <cmath>

namespace sgp {

PitSeries::PitSeries(std::vector<double> values) {
    values_.reserve(values.size());
    for (double u : values) {
        push(u);
    }
}

void PitSeries::push(double u) {
    detail::require(u >= 0.0 && u <= 1.0, "PIT values must lie in [0,1]");
    values_.push_back(u);
}

double pit(const LinearPool& pool, double y) { return pool.cdf(y); }

double uwd1(const PitSeries& p) {
    detail::require(!p.empty(), "uwd1 of an empty PIT series");
    auto u = p.values();
    std::sort(u.begin(), u.end());
    const auto n = static_cast<double>(u.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        acc += std::abs(u[i] - (2.0 * static_cast<double>(i) + 1.0) / (2.0 * n));
    }
    return acc / n;
}

std::vector<std::size_t> pit_histogram(const PitSeries& p, std::size_t bins) {
    detail::require(bins >= 1, "histogram needs at least one bin");
    std::vector<std::size_t> counts(bins, 0);
    for (double u : p.values()) {
        auto b = static_cast<std::size_t>(std::floor(u * static_cast<double>(bins)));
        counts[std::min(b, bins - 1)] += 1;
    }
    return counts;
}

} // namespace sgp

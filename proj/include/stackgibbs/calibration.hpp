#pragma once

#include "stackgibbs/distributions.hpp"

#include <cstddef>
#include <vector>

namespace sgp {

/// PIT values, each in [0,1].
class PitSeries {
public:
    PitSeries() = default;
    explicit PitSeries(std::vector<double> values);

    void push(double u);
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }
    const std::vector<double>& values() const { return values_; }

private:
    std::vector<double> values_;
};

double pit(const LinearPool& pool, double y);

/// (1/n) sum_i |u_(i) - (2i - 1)/(2n)| over the sorted series: the
/// 1-Wasserstein distance from Uniform(0,1) on the midpoint grid.
double uwd1(const PitSeries& p);

/// Equal-width bins on [0,1]; 1.0 falls in the last bin.
std::vector<std::size_t> pit_histogram(const PitSeries& p, std::size_t bins);

} // namespace sgp

#pragma once

#include "stackgibbs/random.hpp"

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

namespace sgp {

/// Length-C nonnegative vector summing to one (within 1e-9).
class SimplexWeights {
public:
    static constexpr double kSumTolerance = 1e-9;

    /// Validates without rescaling.
    explicit SimplexWeights(std::vector<double> w);

    /// Clips tiny negative round-off, then rescales to sum to one.
    static SimplexWeights normalized(std::vector<double> w);
    static SimplexWeights uniform(std::size_t c);
    static SimplexWeights vertex(std::size_t c, std::size_t j);

    std::size_t size() const { return w_.size(); }
    double operator[](std::size_t i) const { return w_[i]; }
    std::span<const double> values() const { return w_; }
    const std::vector<double>& vec() const { return w_; }

private:
    std::vector<double> w_;
};

struct Gaussian {
    double mu;
    double sigma;
};

/// Sorted samples. The CDF interpolates linearly between order statistics.
struct Empirical {
    std::vector<double> sorted;
    double bandwidth; // KDE bandwidth used for densities
};

/// CDF through (quantile_k, prob_k) knots, linear between knots and
/// exponential tails outside them.
struct PiecewiseCdf {
    std::vector<double> probs;
    std::vector<double> quantiles;
    double tail_rate;
};

/// One candidate predictive distribution. Immutable after construction.
class ComponentForecast {
public:
    static ComponentForecast gaussian(double mu, double sigma);
    static ComponentForecast empirical(std::vector<double> samples);
    static ComponentForecast piecewise_cdf(std::vector<double> probs,
                                           std::vector<double> quantiles,
                                           double tail_rate);

    bool is_gaussian() const { return std::holds_alternative<Gaussian>(repr_); }
    bool is_empirical() const { return std::holds_alternative<Empirical>(repr_); }
    bool is_piecewise() const { return std::holds_alternative<PiecewiseCdf>(repr_); }
    const Gaussian& as_gaussian() const { return std::get<Gaussian>(repr_); }
    const Empirical& as_empirical() const { return std::get<Empirical>(repr_); }
    const PiecewiseCdf& as_piecewise() const { return std::get<PiecewiseCdf>(repr_); }

    double cdf(double x) const;
    double pdf(double x) const;
    /// Inverse CDF for p in (0,1).
    double quantile(double p) const;
    std::vector<double> sample(std::size_t n, Rng& rng) const;

private:
    using Repr = std::variant<Gaussian, Empirical, PiecewiseCdf>;
    explicit ComponentForecast(Repr r) : repr_(std::move(r)) {}
    Repr repr_;
};

double eval_cdf(const ComponentForecast& f, double x);
std::vector<double> sample(const ComponentForecast& f, std::size_t n, Rng& rng);

/// Reconstructs a continuous distribution from a quantile set. Tied quantiles
/// are nudged upward by cumulative 1e-9 increments. tail_rate <= 0 selects the
/// default rate 1/(q_K - q_1 + 1).
ComponentForecast quantiles_to_piecewise_cdf(std::vector<double> probs,
                                             std::vector<double> quantiles,
                                             double tail_rate = 0.0);

/// Mixture of components (a linear opinion pool).
class LinearPool {
public:
    LinearPool(std::vector<ComponentForecast> components, SimplexWeights weights);

    std::size_t size() const { return components_.size(); }
    const std::vector<ComponentForecast>& components() const { return components_; }
    const SimplexWeights& weights() const { return weights_; }
    bool all_gaussian() const;

    double cdf(double x) const;
    double pdf(double x) const;
    /// Inverse of the pool CDF by bisection.
    double quantile(double p) const;
    std::vector<double> sample(std::size_t n, Rng& rng) const;

private:
    std::vector<ComponentForecast> components_;
    SimplexWeights weights_;
};

double pool_cdf(const LinearPool& pool, double x);

// Standard normal helpers shared across modules.
double normal_cdf(double z);
double normal_pdf(double z);
double normal_quantile(double p);

} // namespace sgp

#pragma once

#include "stackgibbs/distributions.hpp"
#include "stackgibbs/random.hpp"

#include <Eigen/Core>

#include <array>
#include <functional>
#include <span>
#include <vector>

namespace sgp {

/// The 23 quantile levels of the FluSight submission format.
inline constexpr std::array<double, 23> kFluSightProbs{
    0.01, 0.025, 0.05, 0.10, 0.15, 0.20, 0.25, 0.30, 0.35, 0.40, 0.45, 0.50,
    0.55, 0.60, 0.65, 0.70, 0.75, 0.80, 0.85, 0.90, 0.95, 0.975, 0.99};

/// Default LogS cap applied when the density vanishes.
inline constexpr double kLogScoreCap = 35.0;

double crps_normal(double mu, double sigma, double y);

/// Closed-form CRPS of a normal mixture:
///   sum_c w_c A(y - mu_c, s_c^2) - 1/2 sum_cc' w_c w_c' A(mu_c - mu_c', s_c^2 + s_c'^2)
/// with A(m, v) = m (2 Phi(m/sqrt v) - 1) + 2 sqrt(v) phi(m/sqrt v) = E|m + sqrt(v) Z|.
double crps_normal_mixture(std::span<const double> mus, std::span<const double> sigmas,
                           const SimplexWeights& w, double y);

/// E|m + s Z| for Z standard normal; s = 0 gives |m|.
double expected_abs_normal(double m, double s);

/// Trapezoidal integration of (P(x) - 1{y <= x})^2 over [lo, hi], split at y
/// so the indicator jump falls on a grid node.
double crps_numeric(const std::function<double(double)>& cdf, double y, double lo, double hi,
                    std::size_t n_grid);

enum class CrossTermEstimator {
    kAllPairs,      ///< every (i, j) pair via sorted prefix sums, O(n log n)
    kPermutedPairs, ///< n pairs from independent permutations, O(n)
};

/// Sample-based expectations for the mixture CRPS identity
///   CRPS(sum_c w_c P_c, y) = sum_c w_c E|X_c - y| - 1/2 sum_cc' w_c w_c' E|X_c - X_c'|.
/// The cross matrix depends only on the samples, so one instance serves every
/// candidate weight vector and every observation.
class MixtureCrpsTerms {
public:
    MixtureCrpsTerms() = default;

    /// rng is required only for kPermutedPairs.
    static MixtureCrpsTerms from_samples(std::vector<std::vector<double>> samples,
                                         CrossTermEstimator estimator = CrossTermEstimator::kAllPairs,
                                         Rng* rng = nullptr);

    std::size_t components() const { return sorted_.size(); }
    const Eigen::MatrixXd& cross_abs() const { return cross_; }
    /// E|X_c - y| for every component.
    Eigen::VectorXd abs_to_obs(double y) const;
    double crps(std::span<const double> w, double y) const;
    double crps(const SimplexWeights& w, double y) const { return crps(w.values(), y); }

private:
    std::vector<std::vector<double>> sorted_;
    std::vector<std::vector<double>> prefix_;
    Eigen::MatrixXd cross_;
};

double crps_mixture_mc(std::vector<std::vector<double>> component_samples, const SimplexWeights& w,
                       double y, Rng& rng,
                       CrossTermEstimator estimator = CrossTermEstimator::kAllPairs);

/// CRPS of a pool: closed form for all-Gaussian pools, otherwise Monte Carlo
/// with mc_samples draws per non-empirical component.
double crps_pool(const LinearPool& pool, double y, Rng& rng, std::size_t mc_samples = 10000);

/// -log(pdf), capped at `cap` (35 by default) for vanishing densities.
double log_score(double pdf_at_y, double cap = kLogScoreCap);

double interval_score(double lower, double upper, double alpha, double y);

/// Central-interval view of a symmetric quantile set containing the median.
class QuantileForecast {
public:
    QuantileForecast(std::vector<double> probs, std::vector<double> values);

    const std::vector<double>& probs() const { return probs_; }
    const std::vector<double>& values() const { return values_; }
    std::size_t intervals() const { return probs_.size() / 2; }
    double median() const { return values_[probs_.size() / 2]; }
    /// Interval i (0 = widest): nominal alpha, lower, upper.
    double alpha(std::size_t i) const { return 2.0 * probs_[i]; }
    double lower(std::size_t i) const { return values_[i]; }
    double upper(std::size_t i) const { return values_[values_.size() - 1 - i]; }

private:
    std::vector<double> probs_;
    std::vector<double> values_;
};

double weighted_interval_score(const QuantileForecast& qf, double y);

} // namespace sgp

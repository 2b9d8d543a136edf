#pragma once

#include "stackgibbs/distributions.hpp"
#include "stackgibbs/scoring.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

namespace sgp {

enum class RiskMode { kIid, kDynamic };
enum class ScoreBackend { kClosedFormNormalMixture, kMonteCarlo };

struct McOptions {
    std::size_t samples = 10000;
    std::uint64_t seed = 0;
    CrossTermEstimator estimator = CrossTermEstimator::kAllPairs;
};

/// The CRPS of a pool as a function of its weights at one observation:
///   CRPS(w) = abs_to_obs . w - 1/2 w' cross_abs w
struct CrpsTerms {
    Eigen::VectorXd abs_to_obs;
    Eigen::MatrixXd cross_abs;

    double crps(std::span<const double> w) const;
    /// CRPS of component c on its own.
    double component_crps(std::size_t c) const {
        const auto i = static_cast<Eigen::Index>(c);
        return abs_to_obs(i) - 0.5 * cross_abs(i, i);
    }
};

CrpsTerms crps_terms_normal(std::span<const ComponentForecast> components, double y);
CrpsTerms crps_terms_from(const MixtureCrpsTerms& terms, double y);

/// Empirical risk over candidate weight vectors, precompiled to a quadratic
/// form so each evaluation costs O(C^2).
class RiskContext {
public:
    static constexpr double kDefaultDiscount = 0.98;

    /// Fixed components scored against every observation.
    static RiskContext iid(const std::vector<ComponentForecast>& components,
                           std::vector<double> observations,
                           ScoreBackend backend = ScoreBackend::kClosedFormNormalMixture,
                           const McOptions& mc = {});

    /// One component list per time point; observation t is scored by list t.
    static RiskContext dynamic(const std::vector<std::vector<ComponentForecast>>& components,
                               std::vector<double> observations,
                               double discount = kDefaultDiscount,
                               ScoreBackend backend = ScoreBackend::kClosedFormNormalMixture,
                               const McOptions& mc = {});

    /// Context from already-computed per-observation terms (pipelines that
    /// score one new time point per step).
    static RiskContext from_terms(RiskMode mode, std::vector<CrpsTerms> terms,
                                  double discount = kDefaultDiscount);

    RiskMode mode() const { return mode_; }
    std::size_t components() const { return components_; }
    std::size_t observations() const { return terms_.size(); }
    double discount() const { return discount_; }
    const CrpsTerms& terms_at(std::size_t t) const { return terms_[t]; }
    const std::vector<CrpsTerms>& terms() const { return terms_; }

    /// The mode's risk (iid mean or discounted dynamic mean) at w.
    double risk(std::span<const double> w) const;
    /// Per-observation weights in the aggregated risk: 1/n or alpha^(T-t)/T.
    const std::vector<double>& observation_weights() const { return obs_weights_; }

    /// Context restricted to the listed observations, same mode and discount.
    RiskContext subset(std::span<const std::size_t> indices) const;

private:
    RiskContext() = default;
    void compile();

    RiskMode mode_ = RiskMode::kIid;
    std::size_t components_ = 0;
    double discount_ = 1.0;
    std::vector<CrpsTerms> terms_;
    std::vector<double> obs_weights_;
    Eigen::VectorXd linear_;
    Eigen::MatrixXd quad_;
};

double empirical_risk_iid(const RiskContext& ctx, const SimplexWeights& w);
double empirical_risk_dynamic(const RiskContext& ctx, const SimplexWeights& w);
double empirical_risk(const RiskContext& ctx, const SimplexWeights& w);

} // namespace sgp

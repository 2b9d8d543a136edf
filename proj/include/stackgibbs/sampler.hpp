#pragma once

#include "stackgibbs/distributions.hpp"
#include "stackgibbs/risk.hpp"

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace sgp {

/// Settings of the stacked Gibbs posterior and its sampler.
struct GibbsConfig {
    double eta = 1.0;                    ///< learning rate
    std::vector<double> dirichlet_alpha; ///< prior concentration; empty means all ones
    int chains = 1;
    int draws_per_chain = 60000;         ///< including burn-in
    int burn_in = 10000;
    std::uint64_t seed = 1;
    double step_scale = 1.0;             ///< multiplier on the initial proposal scale

    std::vector<double> alpha_for(std::size_t components) const;
    void validate(std::size_t components) const;

    /// Four chains of 60,000 with 10,000 burn-in.
    static GibbsConfig convergence_audit();
};

/// Post burn-in draws of all chains, concatenated chain by chain.
class PosteriorDraws {
public:
    PosteriorDraws(std::size_t components, std::vector<std::vector<double>> chain_rows,
                   std::vector<double> accept_rates, GibbsConfig config);

    std::size_t components() const { return components_; }
    std::size_t draws() const { return data_.size() / components_; }
    std::size_t chains() const { return chain_sizes_.size(); }
    std::size_t chain_size(std::size_t chain) const { return chain_sizes_[chain]; }
    std::span<const double> row(std::size_t m) const {
        return {data_.data() + m * components_, components_};
    }
    /// Coordinate c of one chain, in draw order.
    std::vector<double> chain_column(std::size_t chain, std::size_t c) const;
    double accept_rate() const;
    const std::vector<double>& accept_rates() const { return accept_rates_; }
    const GibbsConfig& config() const { return config_; }

private:
    std::size_t components_;
    std::vector<double> data_;
    std::vector<std::size_t> chain_sizes_;
    std::vector<double> accept_rates_;
    GibbsConfig config_;
};

struct Diagnostics {
    std::vector<double> rhat; ///< rank-normalized split R-hat, floored at 1
    std::vector<double> ess;  ///< bulk effective sample size, capped at the draw count
    double accept_rate = 0.0;

    double max_rhat() const;
    double min_ess() const;
};

/// Risk as a function of weights plus the observation count n in exp(-eta n S).
struct GibbsTarget {
    std::size_t components;
    double n;
    std::function<double(std::span<const double>)> risk;

    static GibbsTarget from(const RiskContext& ctx);
};

/// -eta n S(w) + sum_c (alpha_c - 1) log w_c, up to a constant.
double log_gibbs_density(const SimplexWeights& w, const RiskContext& ctx, const GibbsConfig& cfg);

/// Adaptive random-walk Metropolis in additive log-ratio coordinates.
PosteriorDraws sample_posterior(const RiskContext& ctx, const GibbsConfig& cfg);
PosteriorDraws sample_posterior(const GibbsTarget& target, const GibbsConfig& cfg);

SimplexWeights posterior_mean_weights(const PosteriorDraws& d);
/// Per-coordinate posterior standard deviation.
std::vector<double> posterior_sd(const PosteriorDraws& d);

Diagnostics diagnostics(const PosteriorDraws& d);
/// Diagnostics of arbitrary scalar chains (one vector per chain).
double split_rhat(const std::vector<std::vector<double>>& chains);
double bulk_ess(const std::vector<std::vector<double>>& chains);

using WeightFitter = std::function<SimplexWeights(const RiskContext& train, double eta)>;

/// Grid search over eta by K-fold (or leave-one-out, folds = n) held-out mean
/// CRPS. Ties go to the smaller eta. iid contexts only.
double tune_eta(const RiskContext& ctx, std::span<const double> grid, std::size_t folds,
                const WeightFitter& fit);
/// tune_eta with the SGP posterior mean as the fitter.
double tune_eta(const RiskContext& ctx, std::span<const double> grid, std::size_t folds,
                const GibbsConfig& cfg);
/// Index of the lowest score; ties go to the smaller grid value.
std::size_t select_eta(std::span<const double> grid, std::span<const double> scores);

/// Mean held-out CRPS for each grid value (same folds as tune_eta).
std::vector<double> cross_validated_crps(const RiskContext& ctx, std::span<const double> grid,
                                         std::size_t folds, const WeightFitter& fit);

/// Projected-gradient minimization (finite-difference gradients) from EQW and
/// `restarts` random starts; C <= 3 also scans a 0.01 simplex grid.
SimplexWeights risk_minimizer_oracle(const RiskContext& ctx, int restarts,
                                     std::uint64_t seed = 0);
SimplexWeights risk_minimizer_oracle(std::size_t components,
                                     const std::function<double(std::span<const double>)>& risk,
                                     int restarts, std::uint64_t seed = 0);

/// Euclidean projection onto the probability simplex.
std::vector<double> project_to_simplex(std::span<const double> v);

} // namespace sgp

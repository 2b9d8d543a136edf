#pragma once

#include "stackgibbs/baselines.hpp"
#include "stackgibbs/risk.hpp"
#include "stackgibbs/sampler.hpp"

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace sgp {

/// Component forecasts plus the observations they are scored against.
///
/// Forecast files are CSV with a `component` column and one of
///   mu,sigma            Gaussian components
///   value               sample draws (one row per draw)
///   quantile,value      quantile sets, reconstructed as piecewise CDFs
/// An optional `t` column gives one forecast per time (dynamic mode);
/// without it the same components score every observation (iid mode).
/// Truth files have a `y` column and, in dynamic mode, a matching `t`.
struct ForecastSet {
    RiskMode mode = RiskMode::kIid;
    std::vector<std::string> component_names;
    std::vector<long> times;          ///< one per observation
    std::vector<double> observations;
    /// components[i] scores observation i (a single shared entry in iid mode)
    std::vector<std::vector<ComponentForecast>> components;
    /// the submitted quantile sets, when the file carried them
    std::vector<std::vector<std::optional<std::pair<std::vector<double>, std::vector<double>>>>> quantiles;

    std::size_t size() const { return observations.size(); }
    const std::vector<ComponentForecast>& at(std::size_t i) const {
        return components.size() == 1 ? components[0] : components[i];
    }
};

ForecastSet load_forecast_set(const std::filesystem::path& forecasts,
                              const std::filesystem::path& truth);

/// Risk over the set (closed form for Gaussian components, Monte Carlo otherwise).
RiskContext make_risk_context(const ForecastSet& set, double discount, const McOptions& mc);

/// BMA/AVS evidence: log densities and component CRPS from the risk terms.
ModelEvidencePanel make_panel(const ForecastSet& set, const RiskContext& ctx, double discount);

struct ScoreRow {
    long t;
    std::string component; ///< component name or "pool"
    std::string metric;
    double value;
};

/// Scores every component (and the pool, when weights are given) at every
/// observation. metric is crps, logs or wis. CRPS comes from the risk
/// context's terms; WIS uses submitted quantile sets where available and the
/// 23 FluSight levels of the distribution otherwise.
std::vector<ScoreRow> score_forecast_set(const ForecastSet& set, const RiskContext& ctx,
                                         const std::string& metric,
                                         const std::optional<SimplexWeights>& pool_weights);

void write_score_csv(const std::filesystem::path& path, const std::vector<ScoreRow>& rows);

/// Rows component, weight.
void write_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const SimplexWeights& w);
/// Reads component, weight and orders the weights like `names`.
SimplexWeights read_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& names);

/// Columns t, component, crps, loglik (t optional; rows grouped by t).
ModelEvidencePanel load_score_panel(const std::filesystem::path& path, double discount,
                                    std::vector<std::string>* component_names = nullptr);

/// Rows chain, iteration, w1..wC.
void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& d);
PosteriorDraws read_draws_csv(const std::filesystem::path& path);

} // namespace sgp

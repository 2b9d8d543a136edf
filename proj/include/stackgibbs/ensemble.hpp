#pragma once

#include "stackgibbs/baselines.hpp"
#include "stackgibbs/risk.hpp"
#include "stackgibbs/sampler.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace sgp {

/// Weight-selection methods compared in the studies and the hub pipeline.
/// SGP50 is SGP with every Dirichlet parameter set to `strong_prior`.
enum class Method { kSgp, kSgp50, kAvs, kBma, kEqw };

std::string_view method_name(Method m);
/// Case-insensitive; ValidationError on an unknown name.
Method parse_method(std::string_view name);
/// Comma-separated list.
std::vector<Method> parse_methods(std::string_view list);

struct MethodSettings {
    GibbsConfig sgp;            ///< used by SGP and SGP50 (alpha overridden for SGP50)
    double strong_prior = 50.0;
    double avs_eta = 1.0;
};

/// Weights from past evidence. With no observations every method returns EQW.
SimplexWeights fit_method(Method m, const RiskContext& risk, const ModelEvidencePanel& panel,
                          const MethodSettings& s);

/// AVS evidence (component CRPS) read off a context's terms; log densities
/// are left at zero.
ModelEvidencePanel score_panel_from(const RiskContext& risk);

/// Fitter for eta tuning: SGP and SGP50 use `eta` as the learning rate, AVS
/// as its exponent. BMA has no learning rate and is rejected.
WeightFitter method_fitter(Method m, const MethodSettings& s);

} // namespace sgp

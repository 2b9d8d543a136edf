#pragma once

#include "stackgibbs/distributions.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>

namespace sgp {

/// Per-time, per-component evidence feeding BMA (log predictive densities)
/// and AVS (CRPS). Row t = time, column c = component.
struct ModelEvidencePanel {
    Eigen::MatrixXd loglik;
    Eigen::MatrixXd score;
    std::optional<SimplexWeights> prior; ///< uniform when unset
    double discount = 1.0;

    std::size_t times() const;
    std::size_t components() const;
    void validate() const;
};

/// Log-densities below this are treated as this value.
inline constexpr double kLogLikFloor = -745.0;

/// w_c proportional to prior_c exp(sum_t alpha^(T-t) loglik[t,c]).
SimplexWeights bma_weights(const ModelEvidencePanel& panel);
/// w_c proportional to prior_c exp(-eta sum_t alpha^(T-t) score[t,c]).
SimplexWeights avs_weights(const ModelEvidencePanel& panel, double eta);
SimplexWeights eqw_weights(std::size_t components);

} // namespace sgp

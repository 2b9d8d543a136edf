#include "stackgibbs/baselines.hpp"

#include "stackgibbs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace sgp {

namespace {

std::vector<double> discount_factors(std::size_t t, double alpha) {
    std::vector<double> out(t);
    for (std::size_t i = 0; i < t; ++i) {
        out[i] = std::pow(alpha, static_cast<double>(t - 1 - i));
    }
    return out;
}

SimplexWeights softmax_with_prior(const std::vector<double>& log_terms, const SimplexWeights& prior) {
    std::vector<double> lw(log_terms.size());
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < lw.size(); ++c) {
        lw[c] = prior[c] > 0.0 ? log_terms[c] + std::log(prior[c])
                               : -std::numeric_limits<double>::infinity();
        m = std::max(m, lw[c]);
    }
    if (!std::isfinite(m)) {
        throw ValidationError("degenerate panel: every component has zero weight");
    }
    std::vector<double> w(lw.size());
    for (std::size_t c = 0; c < w.size(); ++c) {
        w[c] = std::exp(lw[c] - m);
    }
    return SimplexWeights::normalized(std::move(w));
}

} // namespace

std::size_t ModelEvidencePanel::times() const {
    return static_cast<std::size_t>(std::max(loglik.rows(), score.rows()));
}

std::size_t ModelEvidencePanel::components() const {
    return static_cast<std::size_t>(std::max(loglik.cols(), score.cols()));
}

void ModelEvidencePanel::validate() const {
    detail::require(loglik.size() == 0 || score.size() == 0 ||
                        (loglik.rows() == score.rows() && loglik.cols() == score.cols()),
                    "evidence panel matrices differ in shape");
    detail::require(components() >= 1, "evidence panel has no components");
    detail::require(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
    if (prior) {
        detail::require(prior->size() == components(), "prior length differs from component count");
    }
}

SimplexWeights bma_weights(const ModelEvidencePanel& panel) {
    panel.validate();
    detail::require(panel.loglik.size() > 0, "BMA needs a log-likelihood matrix");
    const auto c = static_cast<std::size_t>(panel.loglik.cols());
    const auto t = static_cast<std::size_t>(panel.loglik.rows());
    const auto disc = discount_factors(t, panel.discount);
    std::vector<double> log_terms(c, 0.0);
    bool any_informative = t == 0;
    for (std::size_t j = 0; j < c; ++j) {
        bool all_floor = true;
        for (std::size_t i = 0; i < t; ++i) {
            double v = panel.loglik(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            detail::require(!std::isnan(v) && v != std::numeric_limits<double>::infinity(),
                            "log-likelihood entries must be finite or -inf");
            if (v > kLogLikFloor) {
                all_floor = false;
            }
            v = std::max(v, kLogLikFloor);
            log_terms[j] += disc[i] * v;
        }
        any_informative = any_informative || !all_floor;
    }
    detail::require(any_informative, "degenerate panel: every log-likelihood column is -inf");
    const auto prior = panel.prior.value_or(SimplexWeights::uniform(c));
    return softmax_with_prior(log_terms, prior);
}

SimplexWeights avs_weights(const ModelEvidencePanel& panel, double eta) {
    panel.validate();
    detail::require(eta >= 0.0 && std::isfinite(eta), "AVS eta must be finite and nonnegative");
    detail::require(panel.score.size() > 0, "AVS needs a score matrix");
    const auto c = static_cast<std::size_t>(panel.score.cols());
    const auto t = static_cast<std::size_t>(panel.score.rows());
    const auto disc = discount_factors(t, panel.discount);
    std::vector<double> log_terms(c, 0.0);
    for (std::size_t j = 0; j < c; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < t; ++i) {
            const double v = panel.score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
            detail::require(std::isfinite(v), "AVS score entries must be finite");
            s += disc[i] * v;
        }
        log_terms[j] = -eta * s;
    }
    const auto prior = panel.prior.value_or(SimplexWeights::uniform(c));
    return softmax_with_prior(log_terms, prior);
}

SimplexWeights eqw_weights(std::size_t components) {
    detail::require(components >= 1, "EQW needs at least one component");
    return SimplexWeights::uniform(components);
}

} // namespace sgp

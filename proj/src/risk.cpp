#include "stackgibbs/risk.hpp"

#include "stackgibbs/error.hpp"

#include <cmath>

namespace sgp {

namespace {

Eigen::Map<const Eigen::VectorXd> as_vector(std::span<const double> w) {
    return {w.data(), static_cast<Eigen::Index>(w.size())};
}

std::vector<std::vector<double>> draw_component_samples(std::span<const ComponentForecast> comps,
                                                        const McOptions& mc, std::uint64_t t) {
    std::vector<std::vector<double>> out;
    out.reserve(comps.size());
    for (std::size_t c = 0; c < comps.size(); ++c) {
        if (comps[c].is_empirical()) {
            out.push_back(comps[c].as_empirical().sorted);
        } else {
            auto rng = make_stream(mc.seed, {t, c});
            out.push_back(comps[c].sample(mc.samples, rng));
        }
    }
    return out;
}

void require_gaussian(std::span<const ComponentForecast> comps) {
    for (const auto& f : comps) {
        detail::require(f.is_gaussian(), "closed-form backend requires gaussian components");
    }
}

} // namespace

double CrpsTerms::crps(std::span<const double> w) const {
    detail::require(static_cast<Eigen::Index>(w.size()) == abs_to_obs.size(),
                    "weight length differs from component count");
    const auto wv = as_vector(w);
    return wv.dot(abs_to_obs) - 0.5 * wv.dot(cross_abs * wv);
}

CrpsTerms crps_terms_normal(std::span<const ComponentForecast> components, double y) {
    require_gaussian(components);
    const auto c = static_cast<Eigen::Index>(components.size());
    CrpsTerms t{Eigen::VectorXd(c), Eigen::MatrixXd(c, c)};
    for (Eigen::Index i = 0; i < c; ++i) {
        const auto& gi = components[static_cast<std::size_t>(i)].as_gaussian();
        t.abs_to_obs(i) = expected_abs_normal(y - gi.mu, gi.sigma);
        for (Eigen::Index j = i; j < c; ++j) {
            const auto& gj = components[static_cast<std::size_t>(j)].as_gaussian();
            const double s = std::sqrt(gi.sigma * gi.sigma + gj.sigma * gj.sigma);
            t.cross_abs(i, j) = t.cross_abs(j, i) = expected_abs_normal(gi.mu - gj.mu, s);
        }
    }
    return t;
}

CrpsTerms crps_terms_from(const MixtureCrpsTerms& terms, double y) {
    return CrpsTerms{terms.abs_to_obs(y), terms.cross_abs()};
}

RiskContext RiskContext::iid(const std::vector<ComponentForecast>& components,
                             std::vector<double> observations, ScoreBackend backend,
                             const McOptions& mc) {
    detail::require(!components.empty(), "risk context needs at least one component");
    detail::require(!observations.empty(), "risk context needs at least one observation");
    RiskContext ctx;
    ctx.mode_ = RiskMode::kIid;
    ctx.components_ = components.size();
    ctx.discount_ = 1.0;
    ctx.terms_.reserve(observations.size());
    if (backend == ScoreBackend::kClosedFormNormalMixture) {
        for (double y : observations) {
            ctx.terms_.push_back(crps_terms_normal(components, y));
        }
    } else {
        const auto mix = MixtureCrpsTerms::from_samples(draw_component_samples(components, mc, 0),
                                                        mc.estimator, nullptr);
        for (double y : observations) {
            ctx.terms_.push_back(crps_terms_from(mix, y));
        }
    }
    ctx.compile();
    return ctx;
}

RiskContext RiskContext::dynamic(const std::vector<std::vector<ComponentForecast>>& components,
                                 std::vector<double> observations, double discount,
                                 ScoreBackend backend, const McOptions& mc) {
    detail::require(!observations.empty(), "risk context needs at least one observation");
    detail::require(components.size() == observations.size(),
                    "dynamic context needs one component list per observation");
    detail::require(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
    const std::size_t c = components.front().size();
    detail::require(c >= 1, "risk context needs at least one component");
    RiskContext ctx;
    ctx.mode_ = RiskMode::kDynamic;
    ctx.components_ = c;
    ctx.discount_ = discount;
    for (std::size_t t = 0; t < components.size(); ++t) {
        detail::require(components[t].size() == c, "ragged component lists across time");
        if (backend == ScoreBackend::kClosedFormNormalMixture) {
            ctx.terms_.push_back(crps_terms_normal(components[t], observations[t]));
        } else {
            const auto mix = MixtureCrpsTerms::from_samples(
                draw_component_samples(components[t], mc, t), mc.estimator, nullptr);
            ctx.terms_.push_back(crps_terms_from(mix, observations[t]));
        }
    }
    ctx.compile();
    return ctx;
}

RiskContext RiskContext::from_terms(RiskMode mode, std::vector<CrpsTerms> terms, double discount) {
    detail::require(!terms.empty(), "risk context needs at least one observation");
    detail::require(discount > 0.0 && discount <= 1.0, "discount must lie in (0,1]");
    const auto c = terms.front().abs_to_obs.size();
    for (const auto& t : terms) {
        detail::require(t.abs_to_obs.size() == c && t.cross_abs.rows() == c &&
                            t.cross_abs.cols() == c,
                        "ragged component lists across time");
    }
    RiskContext ctx;
    ctx.mode_ = mode;
    ctx.components_ = static_cast<std::size_t>(c);
    ctx.discount_ = mode == RiskMode::kIid ? 1.0 : discount;
    ctx.terms_ = std::move(terms);
    ctx.compile();
    return ctx;
}

void RiskContext::compile() {
    const std::size_t n = terms_.size();
    obs_weights_.assign(n, 1.0 / static_cast<double>(n));
    if (mode_ == RiskMode::kDynamic) {
        for (std::size_t t = 0; t < n; ++t) {
            obs_weights_[t] = std::pow(discount_, static_cast<double>(n - 1 - t)) /
                              static_cast<double>(n);
        }
    }
    const auto c = static_cast<Eigen::Index>(components_);
    linear_ = Eigen::VectorXd::Zero(c);
    quad_ = Eigen::MatrixXd::Zero(c, c);
    for (std::size_t t = 0; t < n; ++t) {
        linear_ += obs_weights_[t] * terms_[t].abs_to_obs;
        quad_ += obs_weights_[t] * terms_[t].cross_abs;
    }
}

double RiskContext::risk(std::span<const double> w) const {
    detail::require(w.size() == components_, "weight length differs from component count");
    const auto wv = as_vector(w);
    return wv.dot(linear_) - 0.5 * wv.dot(quad_ * wv);
}

RiskContext RiskContext::subset(std::span<const std::size_t> indices) const {
    std::vector<CrpsTerms> picked;
    picked.reserve(indices.size());
    for (auto i : indices) {
        detail::require(i < terms_.size(), "subset index out of range");
        picked.push_back(terms_[i]);
    }
    return from_terms(mode_, std::move(picked), mode_ == RiskMode::kIid ? 1.0 : discount_);
}

double empirical_risk_iid(const RiskContext& ctx, const SimplexWeights& w) {
    detail::require(ctx.mode() == RiskMode::kIid, "empirical_risk_iid: context is not iid");
    return ctx.risk(w.values());
}

double empirical_risk_dynamic(const RiskContext& ctx, const SimplexWeights& w) {
    detail::require(ctx.mode() == RiskMode::kDynamic,
                    "empirical_risk_dynamic: context is not dynamic");
    return ctx.risk(w.values());
}

double empirical_risk(const RiskContext& ctx, const SimplexWeights& w) {
    return ctx.risk(w.values());
}

} // namespace sgp

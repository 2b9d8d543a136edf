#include "stackgibbs/ensemble.hpp"

#include "stackgibbs/error.hpp"

#include <algorithm>
#include <cctype>

namespace sgp {

std::string_view method_name(Method m) {
    switch (m) {
    case Method::kSgp: return "SGP";
    case Method::kSgp50: return "SGP50";
    case Method::kAvs: return "AVS";
    case Method::kBma: return "BMA";
    case Method::kEqw: return "EQW";
    }
    return "?";
}

Method parse_method(std::string_view name) {
    std::string up;
    for (char ch : name) {
        if (!std::isspace(static_cast<unsigned char>(ch))) {
            up.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(ch))));
        }
    }
    for (Method m : {Method::kSgp, Method::kSgp50, Method::kAvs, Method::kBma, Method::kEqw}) {
        if (up == method_name(m)) {
            return m;
        }
    }
    throw ValidationError("unknown method '" + std::string(name) + "'");
}

std::vector<Method> parse_methods(std::string_view list) {
    std::vector<Method> out;
    std::size_t pos = 0;
    while (pos <= list.size()) {
        auto end = list.find(',', pos);
        if (end == std::string_view::npos) {
            end = list.size();
        }
        auto item = list.substr(pos, end - pos);
        if (!item.empty()) {
            Method m = parse_method(item);
            if (std::find(out.begin(), out.end(), m) == out.end()) {
                out.push_back(m);
            }
        }
        pos = end + 1;
    }
    detail::require(!out.empty(), "empty method list");
    return out;
}

SimplexWeights fit_method(Method m, const RiskContext& risk, const ModelEvidencePanel& panel,
                          const MethodSettings& s) {
    const std::size_t c = risk.components();
    if (risk.observations() == 0 || m == Method::kEqw) {
        return eqw_weights(c);
    }
    switch (m) {
    case Method::kSgp:
        return posterior_mean_weights(sample_posterior(risk, s.sgp));
    case Method::kSgp50: {
        GibbsConfig cfg = s.sgp;
        cfg.dirichlet_alpha.assign(c, s.strong_prior);
        return posterior_mean_weights(sample_posterior(risk, cfg));
    }
    case Method::kAvs:
        return avs_weights(panel, s.avs_eta);
    case Method::kBma:
        // every density vanished at every time: nothing to learn from
        if ((panel.loglik.array() <= kLogLikFloor).all()) {
            return panel.prior.value_or(eqw_weights(c));
        }
        return bma_weights(panel);
    case Method::kEqw:
        break;
    }
    return eqw_weights(c);
}

ModelEvidencePanel score_panel_from(const RiskContext& risk) {
    ModelEvidencePanel p;
    const auto n = static_cast<Eigen::Index>(risk.observations());
    const auto c = static_cast<Eigen::Index>(risk.components());
    p.loglik = Eigen::MatrixXd::Zero(n, c);
    p.score.resize(n, c);
    for (Eigen::Index t = 0; t < n; ++t) {
        for (Eigen::Index k = 0; k < c; ++k) {
            p.score(t, k) = risk.terms_at(static_cast<std::size_t>(t)).component_crps(static_cast<std::size_t>(k));
        }
    }
    p.discount = risk.mode() == RiskMode::kDynamic ? risk.discount() : 1.0;
    return p;
}

WeightFitter method_fitter(Method m, const MethodSettings& s) {
    detail::require(m != Method::kBma, "BMA has no learning rate to tune");
    return [m, s](const RiskContext& train, double eta) {
        MethodSettings local = s;
        local.sgp.eta = eta;
        local.avs_eta = eta;
        return fit_method(m, train, score_panel_from(train), local);
    };
}

} // namespace sgp

#include "stackgibbs/forecast_io.hpp"

#include "stackgibbs/csv.hpp"
#include "stackgibbs/error.hpp"
#include "stackgibbs/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

namespace sgp {

using detail::require;

namespace {

enum class Kind { kGaussian, kSamples, kQuantiles };

struct RawComponent {
    std::vector<double> a; // mu | samples | probs
    std::vector<double> b; // sigma | - | values
};

} // namespace

ForecastSet load_forecast_set(const std::filesystem::path& forecasts,
                              const std::filesystem::path& truth) {
    const auto ft = csv::read(forecasts);
    const auto c_comp = ft.column("component");
    const auto c_t = ft.find("t");
    Kind kind;
    std::size_t c1 = 0, c2 = 0;
    if (ft.find("mu") && ft.find("sigma")) {
        kind = Kind::kGaussian;
        c1 = ft.column("mu");
        c2 = ft.column("sigma");
    } else if (ft.find("quantile") && ft.find("value")) {
        kind = Kind::kQuantiles;
        c1 = ft.column("quantile");
        c2 = ft.column("value");
    } else if (ft.find("value")) {
        kind = Kind::kSamples;
        c1 = ft.column("value");
    } else {
        throw ValidationError(forecasts.string() +
                              ": expected columns mu,sigma or value or quantile,value");
    }

    std::vector<std::string> names;
    std::map<long, std::map<std::string, RawComponent>> raw;
    for (std::size_t i = 0; i < ft.rows.size(); ++i) {
        const auto& row = ft.rows[i];
        const long t = c_t ? csv::to_long(row[*c_t], ft, i) : 0;
        const auto& name = row[c_comp];
        if (std::find(names.begin(), names.end(), name) == names.end()) {
            names.push_back(name);
        }
        auto& rc = raw[t][name];
        rc.a.push_back(csv::to_double(row[c1], ft, i));
        if (kind != Kind::kSamples) {
            rc.b.push_back(csv::to_double(row[c2], ft, i));
        }
        if (kind == Kind::kGaussian) {
            require(rc.a.size() == 1, forecasts.string() + " row " + std::to_string(i + 2) +
                                          ": duplicate Gaussian component " + name);
        }
    }
    require(!raw.empty(), forecasts.string() + ": no forecasts");

    ForecastSet set;
    set.mode = c_t ? RiskMode::kDynamic : RiskMode::kIid;
    set.component_names = names;

    const auto tt = csv::read(truth);
    const auto c_y = tt.column("y");
    const auto c_tt = tt.find("t");
    if (set.mode == RiskMode::kDynamic) {
        require(c_tt.has_value(), truth.string() + ": dynamic forecasts need a t column in truth");
    }
    for (std::size_t i = 0; i < tt.rows.size(); ++i) {
        const double y = csv::to_double(tt.rows[i][c_y], tt, i);
        require(std::isfinite(y), truth.string() + " row " + std::to_string(i + 2) + ": non-finite y");
        set.observations.push_back(y);
        set.times.push_back(c_tt ? csv::to_long(tt.rows[i][*c_tt], tt, i) : static_cast<long>(i + 1));
    }
    require(!set.observations.empty(), truth.string() + ": no observations");

    auto build = [&](const std::map<std::string, RawComponent>& at, long t) {
        std::vector<ComponentForecast> comps;
        std::vector<std::optional<std::pair<std::vector<double>, std::vector<double>>>> qs;
        for (const auto& name : names) {
            auto it = at.find(name);
            require(it != at.end(), forecasts.string() + ": component " + name +
                                        " missing at t=" + std::to_string(t));
            const auto& rc = it->second;
            switch (kind) {
            case Kind::kGaussian:
                comps.push_back(ComponentForecast::gaussian(rc.a[0], rc.b[0]));
                qs.emplace_back();
                break;
            case Kind::kSamples:
                comps.push_back(ComponentForecast::empirical(rc.a));
                qs.emplace_back();
                break;
            case Kind::kQuantiles: {
                std::vector<std::size_t> order(rc.a.size());
                for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
                std::sort(order.begin(), order.end(), [&](auto x, auto y) { return rc.a[x] < rc.a[y]; });
                std::vector<double> p, v;
                for (auto k : order) {
                    p.push_back(rc.a[k]);
                    v.push_back(rc.b[k]);
                }
                comps.push_back(quantiles_to_piecewise_cdf(p, v));
                qs.emplace_back(std::make_pair(std::move(p), std::move(v)));
                break;
            }
            }
        }
        set.components.push_back(std::move(comps));
        set.quantiles.push_back(std::move(qs));
    };

    if (set.mode == RiskMode::kIid) {
        build(raw.begin()->second, 0);
    } else {
        for (long t : set.times) {
            auto it = raw.find(t);
            require(it != raw.end(), forecasts.string() + ": no forecasts for t=" + std::to_string(t));
            build(it->second, t);
        }
    }
    return set;
}

RiskContext make_risk_context(const ForecastSet& set, double discount, const McOptions& mc) {
    bool gaussian = true;
    for (const auto& comps : set.components) {
        for (const auto& f : comps) {
            gaussian = gaussian && f.is_gaussian();
        }
    }
    const auto backend = gaussian ? ScoreBackend::kClosedFormNormalMixture : ScoreBackend::kMonteCarlo;
    if (set.mode == RiskMode::kIid) {
        return RiskContext::iid(set.components[0], set.observations, backend, mc);
    }
    return RiskContext::dynamic(set.components, set.observations, discount, backend, mc);
}

ModelEvidencePanel make_panel(const ForecastSet& set, const RiskContext& ctx, double discount) {
    ModelEvidencePanel p;
    const auto n = static_cast<Eigen::Index>(set.size());
    const auto c = static_cast<Eigen::Index>(set.component_names.size());
    p.loglik.resize(n, c);
    p.score.resize(n, c);
    for (Eigen::Index t = 0; t < n; ++t) {
        const auto& comps = set.at(static_cast<std::size_t>(t));
        for (Eigen::Index k = 0; k < c; ++k) {
            const double d = comps[static_cast<std::size_t>(k)].pdf(set.observations[static_cast<std::size_t>(t)]);
            p.loglik(t, k) = d > 0.0 ? std::max(std::log(d), kLogLikFloor) : kLogLikFloor;
            p.score(t, k) = ctx.terms_at(static_cast<std::size_t>(t)).component_crps(static_cast<std::size_t>(k));
        }
    }
    p.discount = set.mode == RiskMode::kIid ? 1.0 : discount;
    return p;
}

ModelEvidencePanel load_score_panel(const std::filesystem::path& path, double discount,
                                    std::vector<std::string>* component_names) {
    const auto t = csv::read(path);
    const auto c_comp = t.column("component");
    const auto c_crps = t.column("crps");
    const auto c_ll = t.column("loglik");
    const auto c_t = t.find("t");
    std::vector<std::string> names;
    std::vector<long> times;
    std::map<std::pair<long, std::string>, std::pair<double, double>> cells;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const long time = c_t ? csv::to_long(row[*c_t], t, i) : 0;
        if (std::find(names.begin(), names.end(), row[c_comp]) == names.end()) {
            names.push_back(row[c_comp]);
        }
        if (std::find(times.begin(), times.end(), time) == times.end()) {
            times.push_back(time);
        }
        const double crps = csv::to_double(row[c_crps], t, i);
        const double ll = row[c_ll] == "-inf" ? -INFINITY : csv::to_double(row[c_ll], t, i);
        require(cells.insert({{time, row[c_comp]}, {crps, ll}}).second,
                path.string() + " row " + std::to_string(i + 2) + ": duplicate (t, component)");
    }
    require(!names.empty(), path.string() + ": empty score panel");
    std::sort(times.begin(), times.end());
    ModelEvidencePanel p;
    p.loglik.resize(static_cast<Eigen::Index>(times.size()), static_cast<Eigen::Index>(names.size()));
    p.score.resize(p.loglik.rows(), p.loglik.cols());
    for (std::size_t i = 0; i < times.size(); ++i) {
        for (std::size_t k = 0; k < names.size(); ++k) {
            auto it = cells.find({times[i], names[k]});
            require(it != cells.end(), path.string() + ": missing component " + names[k] +
                                           " at t=" + std::to_string(times[i]));
            p.score(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = it->second.first;
            p.loglik(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = it->second.second;
        }
    }
    p.discount = discount;
    p.validate();
    if (component_names) {
        *component_names = names;
    }
    return p;
}

void write_draws_csv(const std::filesystem::path& path, const PosteriorDraws& d) {
    csv::Writer w(path);
    std::vector<std::string> head{"chain", "iteration"};
    for (std::size_t c = 0; c < d.components(); ++c) {
        head.push_back("w" + std::to_string(c + 1));
    }
    w.row(head);
    std::size_t m = 0;
    for (std::size_t ch = 0; ch < d.chains(); ++ch) {
        for (std::size_t i = 0; i < d.chain_size(ch); ++i, ++m) {
            std::vector<std::string> cells{std::to_string(ch + 1), std::to_string(i + 1)};
            for (double v : d.row(m)) {
                cells.push_back(csv::format(v));
            }
            w.row(cells);
        }
    }
}

PosteriorDraws read_draws_csv(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto c_chain = t.column("chain");
    std::vector<std::size_t> wcols;
    for (std::size_t c = 1;; ++c) {
        auto col = t.find("w" + std::to_string(c));
        if (!col) {
            break;
        }
        wcols.push_back(*col);
    }
    require(!wcols.empty(), path.string() + ": no weight columns w1..wC");
    std::vector<std::vector<double>> chains;
    long current = -1;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const long ch = csv::to_long(t.rows[i][c_chain], t, i);
        if (ch != current) {
            require(ch > current, path.string() + " row " + std::to_string(i + 2) +
                                      ": chains must be contiguous and increasing");
            chains.emplace_back();
            current = ch;
        }
        for (auto col : wcols) {
            chains.back().push_back(csv::to_double(t.rows[i][col], t, i));
        }
    }
    require(!chains.empty(), path.string() + ": no draws");
    return PosteriorDraws(wcols.size(), std::move(chains), {}, GibbsConfig{});
}

namespace {

QuantileForecast quantile_view(const ComponentForecast& f,
                               const std::optional<std::pair<std::vector<double>, std::vector<double>>>& q) {
    if (q) {
        try {
            return QuantileForecast(q->first, q->second);
        } catch (const ValidationError&) {
            // asymmetric set: fall back to the reconstructed distribution
        }
    }
    std::vector<double> v;
    for (double p : kFluSightProbs) {
        v.push_back(f.quantile(p));
    }
    return QuantileForecast({kFluSightProbs.begin(), kFluSightProbs.end()}, v);
}

} // namespace

std::vector<ScoreRow> score_forecast_set(const ForecastSet& set, const RiskContext& ctx,
                                         const std::string& metric,
                                         const std::optional<SimplexWeights>& pool_weights) {
    require(metric == "crps" || metric == "logs" || metric == "wis",
            "unknown metric '" + metric + "' (expected crps, logs or wis)");
    const std::size_t c = set.component_names.size();
    if (pool_weights) {
        require(pool_weights->size() == c, "weight count differs from component count");
    }
    std::vector<ScoreRow> rows;
    for (std::size_t i = 0; i < set.size(); ++i) {
        const auto& comps = set.at(i);
        const auto& qs = set.quantiles[set.quantiles.size() == 1 ? 0 : i];
        const double y = set.observations[i];
        const long t = set.times[i];
        for (std::size_t k = 0; k < c; ++k) {
            double v = 0.0;
            if (metric == "crps") {
                v = ctx.terms_at(i).component_crps(k);
            } else if (metric == "logs") {
                v = log_score(comps[k].pdf(y));
            } else {
                v = weighted_interval_score(quantile_view(comps[k], qs[k]), y);
            }
            rows.push_back({t, set.component_names[k], metric, v});
        }
        if (pool_weights) {
            const LinearPool pool(comps, *pool_weights);
            double v = 0.0;
            if (metric == "crps") {
                v = ctx.terms_at(i).crps(pool_weights->values());
            } else if (metric == "logs") {
                v = log_score(pool.pdf(y));
            } else {
                std::vector<double> q;
                for (double p : kFluSightProbs) {
                    q.push_back(pool.quantile(p));
                }
                v = weighted_interval_score(QuantileForecast({kFluSightProbs.begin(), kFluSightProbs.end()}, q), y);
            }
            rows.push_back({t, "pool", metric, v});
        }
    }
    return rows;
}

void write_score_csv(const std::filesystem::path& path, const std::vector<ScoreRow>& rows) {
    csv::Writer w(path);
    w.row({"t", "component", "metric", "value"});
    for (const auto& r : rows) {
        w.row({std::to_string(r.t), r.component, r.metric, csv::format(r.value)});
    }
}

void write_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& names,
                       const SimplexWeights& w) {
    require(names.size() == w.size(), "weight count differs from component count");
    csv::Writer out(path);
    out.row({"component", "weight"});
    for (std::size_t k = 0; k < names.size(); ++k) {
        out.row({names[k], csv::format(w[k])});
    }
}

SimplexWeights read_weights_csv(const std::filesystem::path& path, const std::vector<std::string>& names) {
    const auto t = csv::read(path);
    const auto c_name = t.column("component");
    const auto c_w = t.column("weight");
    std::map<std::string, double> by_name;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        require(by_name.emplace(t.rows[i][c_name], csv::to_double(t.rows[i][c_w], t, i)).second,
                path.string() + " row " + std::to_string(i + 2) + ": duplicate component");
    }
    require(by_name.size() == names.size(), path.string() + ": expected " + std::to_string(names.size()) +
                                                " weights, found " + std::to_string(by_name.size()));
    std::vector<double> w;
    for (const auto& n : names) {
        auto it = by_name.find(n);
        require(it != by_name.end(), path.string() + ": no weight for component " + n);
        w.push_back(it->second);
    }
    return SimplexWeights(std::move(w));
}

} // namespace sgp

#include "stackgibbs/calibration.hpp"
#include "stackgibbs/csv.hpp"
#include "stackgibbs/error.hpp"
#include "stackgibbs/simkit.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <tuple>

namespace sgp {

StudyKind parse_study(std::string_view name) {
    std::string low;
    for (char ch : name) {
        low.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    if (low == "iid") return StudyKind::kIid;
    if (low == "dynamic") return StudyKind::kDynamic;
    if (low == "sir") return StudyKind::kSir;
    throw ValidationError("unknown study '" + std::string(name) + "'");
}

std::string_view study_name(StudyKind k) {
    switch (k) {
    case StudyKind::kIid: return "iid";
    case StudyKind::kDynamic: return "dynamic";
    case StudyKind::kSir: return "sir";
    }
    return "?";
}

StudyOptions default_study_options(StudyKind k) {
    StudyOptions o;
    o.settings.sgp.eta = k == StudyKind::kSir ? 1.0 : 15.0;
    if (k == StudyKind::kSir) {
        o.methods = {Method::kSgp, Method::kSgp50, Method::kAvs, Method::kBma, Method::kEqw};
    }
    return o;
}

namespace {

std::uint64_t derive_seed(std::uint64_t seed, std::initializer_list<std::uint64_t> path) {
    return make_stream(seed, path)();
}

double max_of(const SimplexWeights& w) {
    return *std::max_element(w.values().begin(), w.values().end());
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

std::vector<StudyRow> concat(std::vector<std::vector<StudyRow>>& per_rep) {
    std::vector<StudyRow> out;
    for (auto& v : per_rep) {
        out.insert(out.end(), std::make_move_iterator(v.begin()), std::make_move_iterator(v.end()));
    }
    return out;
}

void check_options(const StudyOptions& opt) {
    detail::require(!opt.methods.empty(), "no methods selected");
    detail::require(opt.discount > 0.0 && opt.discount <= 1.0, "discount must lie in (0,1]");
}

/// Growing evidence for dynamic pipelines: CRPS terms, log densities and
/// component CRPS for every scored time so far.
struct History {
    std::vector<CrpsTerms> terms;
    std::vector<std::vector<double>> loglik;
    std::vector<std::vector<double>> score;

    void add(CrpsTerms t, const std::vector<ComponentForecast>& comps, double y) {
        std::vector<double> ll(comps.size()), sc(comps.size());
        for (std::size_t c = 0; c < comps.size(); ++c) {
            const double p = comps[c].pdf(y);
            ll[c] = p > 0.0 ? std::max(std::log(p), kLogLikFloor) : kLogLikFloor;
            sc[c] = t.component_crps(c);
        }
        terms.push_back(std::move(t));
        loglik.push_back(std::move(ll));
        score.push_back(std::move(sc));
    }

    ModelEvidencePanel panel(std::size_t c, double discount) const {
        ModelEvidencePanel p;
        const auto n = static_cast<Eigen::Index>(terms.size());
        p.loglik.resize(n, static_cast<Eigen::Index>(c));
        p.score.resize(n, static_cast<Eigen::Index>(c));
        for (Eigen::Index t = 0; t < n; ++t) {
            for (std::size_t k = 0; k < c; ++k) {
                p.loglik(t, static_cast<Eigen::Index>(k)) = loglik[t][k];
                p.score(t, static_cast<Eigen::Index>(k)) = score[t][k];
            }
        }
        p.discount = discount;
        return p;
    }
};

/// Settings copy with a per-fit sampler seed.
MethodSettings seeded(const StudyOptions& opt, std::uint64_t seed) {
    MethodSettings s = opt.settings;
    s.sgp.seed = seed;
    return s;
}

} // namespace

StudyReport run_iid_study(const IidStudyConfig& cfg, const StudyOptions& opt) {
    cfg.validate();
    check_options(opt);
    const auto cands = cfg.candidates();
    const std::size_t c = cands.size();
    const std::size_t n_max = *std::max_element(cfg.sample_sizes.begin(), cfg.sample_sizes.end());
    std::vector<std::vector<StudyRow>> per_rep(cfg.replicates);

    detail::parallel_for(per_rep.size(), opt.threads, [&](std::size_t r) {
        const auto ur = static_cast<std::uint64_t>(r);
        Rng data_rng = make_stream(cfg.seed, {1, ur});
        Rng eval_rng = make_stream(cfg.seed, {2, ur});
        const auto ys = gen_iid_mixture(cfg, n_max, data_rng);
        const auto ev = gen_iid_mixture(cfg, cfg.eval_draws, eval_rng);
        std::vector<CrpsTerms> eval_terms;
        eval_terms.reserve(ev.size());
        for (double y : ev) {
            eval_terms.push_back(crps_terms_normal(cands, y));
        }
        auto& rows = per_rep[r];
        for (std::size_t n : cfg.sample_sizes) {
            std::vector<double> obs(ys.begin(), ys.begin() + static_cast<std::ptrdiff_t>(n));
            const auto ctx = RiskContext::iid(cands, obs);
            History h;
            for (std::size_t i = 0; i < n; ++i) {
                h.add(ctx.terms_at(i), cands, obs[i]);
            }
            const auto panel = h.panel(c, 1.0);
            for (Method m : opt.methods) {
                const auto settings =
                    seeded(opt, derive_seed(cfg.seed, {3, ur, n, static_cast<std::uint64_t>(m)}));
                const auto w = fit_method(m, ctx, panel, settings);
                const LinearPool pool(cands, w);
                std::vector<double> crps(ev.size()), logs(ev.size());
                PitSeries pits;
                for (std::size_t k = 0; k < ev.size(); ++k) {
                    crps[k] = eval_terms[k].crps(w.values());
                    logs[k] = log_score(pool.pdf(ev[k]));
                    pits.push(pit(pool, ev[k]));
                }
                const std::string name(method_name(m));
                const long t = static_cast<long>(n);
                rows.push_back({name, static_cast<int>(r), t, "crps", mean_of(crps)});
                rows.push_back({name, static_cast<int>(r), t, "logs", mean_of(logs)});
                rows.push_back({name, static_cast<int>(r), t, "uwd1", uwd1(pits)});
                rows.push_back({name, static_cast<int>(r), t, "max_weight", max_of(w)});
                for (std::size_t k = 0; k < c; ++k) {
                    rows.push_back({name, static_cast<int>(r), t, "w" + std::to_string(k + 1), w[k]});
                }
            }
        }
    });
    return {"iid", concat(per_rep)};
}

namespace {

/// Shared week loop for the dynamic and SIR studies. `forecast(k)` returns the
/// components for index k and `truth[k]` the realized value; indices below
/// `first` are not forecast. Reported times are 1-based.
template <class ForecastFn, class TermsFn>
void dynamic_loop(const StudyOptions& opt, std::uint64_t seed, std::size_t r,
                  const std::vector<double>& truth, std::size_t first, ForecastFn&& forecast,
                  TermsFn&& terms_for, std::vector<StudyRow>& rows) {
    History h;
    struct Acc {
        PitSeries pits;
        std::vector<double> crps, logs;
    };
    std::vector<Acc> acc(opt.methods.size());
    const auto ur = static_cast<std::uint64_t>(r);
    for (std::size_t k = first; k < truth.size(); ++k) {
        const auto comps = forecast(k);
        const std::size_t c = comps.size();
        std::optional<RiskContext> ctx;
        if (!h.terms.empty()) {
            ctx = RiskContext::from_terms(RiskMode::kDynamic, h.terms, opt.discount);
        }
        const auto panel = h.panel(c, opt.discount);
        const double y = truth[k];
        CrpsTerms terms = terms_for(comps, y);
        for (std::size_t mi = 0; mi < opt.methods.size(); ++mi) {
            const Method m = opt.methods[mi];
            SimplexWeights w = eqw_weights(c);
            if (!h.terms.empty()) {
                const auto settings =
                    seeded(opt, derive_seed(seed, {3, ur, k, static_cast<std::uint64_t>(m)}));
                w = fit_method(m, *ctx, panel, settings);
            }
            const LinearPool pool(comps, w);
            const double crps = terms.crps(w.values());
            const double logs = log_score(pool.pdf(y));
            const double u = pit(pool, y);
            const std::string name(method_name(m));
            const long t = static_cast<long>(k + 1);
            rows.push_back({name, static_cast<int>(r), t, "crps", crps});
            rows.push_back({name, static_cast<int>(r), t, "logs", logs});
            rows.push_back({name, static_cast<int>(r), t, "pit", u});
            rows.push_back({name, static_cast<int>(r), t, "max_weight", max_of(w)});
            acc[mi].pits.push(u);
            acc[mi].crps.push_back(crps);
            acc[mi].logs.push_back(logs);
        }
        h.add(std::move(terms), comps, y);
    }
    for (std::size_t mi = 0; mi < opt.methods.size(); ++mi) {
        if (acc[mi].crps.empty()) {
            continue;
        }
        const std::string name(method_name(opt.methods[mi]));
        rows.push_back({name, static_cast<int>(r), -1, "uwd1", uwd1(acc[mi].pits)});
        rows.push_back({name, static_cast<int>(r), -1, "mean_crps", mean_of(acc[mi].crps)});
        rows.push_back({name, static_cast<int>(r), -1, "mean_logs", mean_of(acc[mi].logs)});
    }
}

} // namespace

StudyReport run_dynamic_study(const DynamicStudyConfig& cfg, const StudyOptions& opt) {
    cfg.validate();
    check_options(opt);
    const auto cands = cfg.candidates();
    std::vector<std::vector<StudyRow>> per_rep(cfg.replicates);
    detail::parallel_for(per_rep.size(), opt.threads, [&](std::size_t r) {
        Rng rng = make_stream(cfg.seed, {1, static_cast<std::uint64_t>(r)});
        const auto path = gen_dynamic_mixture(cfg, rng);
        dynamic_loop(
            opt, cfg.seed, r, path.y, 1, [&](std::size_t) { return cands; },
            [](const std::vector<ComponentForecast>& comps, double y) {
                return crps_terms_normal(comps, y);
            },
            per_rep[r]);
    });
    return {"dynamic", concat(per_rep)};
}

StudyReport run_sir_study(const SirStudyConfig& cfg, const StudyOptions& opt) {
    cfg.validate();
    // the generator accepts any rates; a study needs an epidemic that takes off
    detail::require(cfg.gamma > 0.0 && cfg.gamma < cfg.beta, "sir study needs 0 < gamma < beta");
    detail::require(cfg.initial_infected >= 1, "sir study needs initial_infected >= 1");
    check_options(opt);
    std::vector<std::vector<StudyRow>> per_rep(cfg.replicates);
    detail::parallel_for(per_rep.size(), opt.threads, [&](std::size_t r) {
        const auto ur = static_cast<std::uint64_t>(r);
        Rng rng = make_stream(cfg.seed, {1, ur});
        const auto weekly = gen_sir(cfg, rng).weekly_infected();
        // forecast index k uses weeks 1..k as history
        const auto first = static_cast<std::size_t>(cfg.fit_start_week);
        dynamic_loop(
            opt, cfg.seed, r, weekly, first,
            [&](std::size_t k) {
                Rng crng = make_stream(cfg.seed, {2, ur, static_cast<std::uint64_t>(k)});
                return fit_sir_components(std::span<const double>(weekly.data(), k),
                                          cfg.population, crng, cfg.forecast_draws);
            },
            [](const std::vector<ComponentForecast>& comps, double y) {
                std::vector<std::vector<double>> samples;
                for (const auto& f : comps) {
                    samples.push_back(f.as_empirical().sorted);
                }
                return crps_terms_from(MixtureCrpsTerms::from_samples(std::move(samples)), y);
            },
            per_rep[r]);
    });
    return {"sir", concat(per_rep)};
}

std::vector<SummaryRow> StudyReport::summarize() const {
    std::vector<std::string> method_order, metric_order;
    auto index_of = [](std::vector<std::string>& v, const std::string& s) {
        auto it = std::find(v.begin(), v.end(), s);
        if (it == v.end()) {
            v.push_back(s);
            return v.size() - 1;
        }
        return static_cast<std::size_t>(it - v.begin());
    };
    // key: method index, time (pooled sorts last), metric index
    std::map<std::tuple<std::size_t, long, std::size_t>, std::vector<double>> groups;
    constexpr long kPooled = std::numeric_limits<long>::max();
    for (const auto& row : rows) {
        const auto mi = index_of(method_order, row.method);
        const auto ki = index_of(metric_order, row.metric);
        if (row.t >= 0) {
            groups[{mi, row.t, ki}].push_back(row.value);
        }
        groups[{mi, kPooled, ki}].push_back(row.value);
    }
    std::vector<SummaryRow> out;
    for (auto& [key, vals] : groups) {
        const auto& [mi, t, ki] = key;
        std::sort(vals.begin(), vals.end());
        const std::size_t n = vals.size();
        const double median = n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
        out.push_back({method_order[mi], t == kPooled ? -1 : t, metric_order[ki], n, mean_of(vals),
                       median});
    }
    return out;
}

void write_study_csv(const StudyReport& r, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"study", "method", "replicate", "t", "metric", "value"});
    for (const auto& row : r.rows) {
        w.row({r.study, row.method, std::to_string(row.replicate),
               row.t < 0 ? "all" : std::to_string(row.t), row.metric, csv::format(row.value)});
    }
}

void write_summary_csv(const StudyReport& r, const std::filesystem::path& path) {
    csv::Writer w(path);
    w.row({"study", "method", "t", "metric", "count", "mean", "median"});
    for (const auto& s : r.summarize()) {
        w.row({r.study, s.method, s.t < 0 ? "all" : std::to_string(s.t), s.metric,
               std::to_string(s.count), csv::format(s.mean), csv::format(s.median)});
    }
}

} // namespace sgp

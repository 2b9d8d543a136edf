#include "stackgibbs/stackgibbs.h"

#include "stackgibbs/calibration.hpp"
#include "stackgibbs/error.hpp"
#include "stackgibbs/forecast_io.hpp"
#include "stackgibbs/hub.hpp"
#include "stackgibbs/simkit.hpp"

#include <charconv>
#include <map>
#include <memory>
#include <new>
#include <optional>
#include <string>

struct sgp_forecast_set {
    sgp::ForecastSet set;
};

struct sgp_posterior {
    sgp::PosteriorDraws draws;
};

namespace {

thread_local std::string g_last_error;

template <class Fn>
sgp_status guarded(Fn&& fn) {
    try {
        fn();
        g_last_error.clear();
        return SGP_OK;
    } catch (const sgp::ValidationError& e) {
        g_last_error = e.what();
        return SGP_ERR_VALIDATION;
    } catch (const sgp::IoError& e) {
        g_last_error = e.what();
        return SGP_ERR_IO;
    } catch (const sgp::NumericalError& e) {
        g_last_error = e.what();
        return SGP_ERR_NUMERICAL;
    } catch (const std::bad_alloc&) {
        g_last_error = "out of memory";
        return SGP_ERR_INTERNAL;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SGP_ERR_INTERNAL;
    } catch (...) {
        g_last_error = "unknown error";
        return SGP_ERR_INTERNAL;
    }
}

void need(const void* p, const char* what) {
    if (p == nullptr) {
        throw sgp::ValidationError(std::string(what) + " must not be null");
    }
}

/// Key/value settings; every key must be consumed exactly by a known option.
class Settings {
public:
    Settings(const char* const* keys, const char* const* values, std::size_t n) {
        if (n > 0) {
            need(keys, "keys");
            need(values, "values");
        }
        for (std::size_t i = 0; i < n; ++i) {
            need(keys[i], "key");
            need(values[i], "value");
            kv_[keys[i]] = values[i];
        }
    }

    template <class T>
    void get(const std::string& key, T& out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            return;
        }
        out = parse<T>(key, it->second);
        kv_.erase(it);
    }

    void get_list(const std::string& key, std::vector<double>& out) {
        auto it = kv_.find(key);
        if (it == kv_.end()) {
            return;
        }
        out.clear();
        std::size_t pos = 0;
        const std::string& s = it->second;
        while (pos <= s.size()) {
            auto end = s.find(',', pos);
            if (end == std::string::npos) {
                end = s.size();
            }
            out.push_back(parse<double>(key, s.substr(pos, end - pos)));
            pos = end + 1;
        }
        kv_.erase(it);
    }

    void finish() const {
        if (!kv_.empty()) {
            throw sgp::ValidationError("unknown setting '" + kv_.begin()->first + "'");
        }
    }

private:
    template <class T>
    static T parse(const std::string& key, const std::string& v) {
        if constexpr (std::is_same_v<T, std::string>) {
            return v;
        } else if constexpr (std::is_same_v<T, bool>) {
            if (v == "1" || v == "true") return true;
            if (v == "0" || v == "false") return false;
            throw sgp::ValidationError("setting '" + key + "': expected true or false");
        } else {
            T out{};
            auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
            if (ec != std::errc() || p != v.data() + v.size() || v.empty()) {
                throw sgp::ValidationError("setting '" + key + "': invalid value '" + v + "'");
            }
            return out;
        }
    }

    std::map<std::string, std::string> kv_;
};

sgp::GibbsConfig gibbs_from(const sgp_fit_options& o, std::size_t c) {
    sgp::GibbsConfig g;
    g.eta = o.eta;
    if (o.dirichlet_alpha != nullptr) {
        g.dirichlet_alpha.assign(o.dirichlet_alpha, o.dirichlet_alpha + o.dirichlet_alpha_len);
    }
    g.chains = o.chains;
    g.draws_per_chain = o.draws_per_chain;
    g.burn_in = o.burn_in;
    g.seed = o.seed;
    g.step_scale = o.step_scale;
    g.validate(c);
    return g;
}

sgp::MethodSettings method_settings(const sgp_fit_options& o, std::size_t c) {
    sgp::MethodSettings s;
    s.sgp = gibbs_from(o, c);
    s.avs_eta = o.avs_eta;
    s.strong_prior = o.strong_prior;
    return s;
}

sgp::McOptions mc_from(const sgp_fit_options& o) {
    sgp::McOptions mc;
    mc.samples = o.mc_samples;
    mc.seed = o.seed;
    return mc;
}

sgp_fit_options defaults() {
    sgp_fit_options o{};
    sgp_fit_options_default(&o);
    return o;
}

/// Sampler and method settings common to studies and the hub pipeline.
void read_method_settings(Settings& s, sgp::MethodSettings& m) {
    s.get("eta", m.sgp.eta);
    s.get("avs_eta", m.avs_eta);
    s.get("strong_prior", m.strong_prior);
    s.get("chains", m.sgp.chains);
    s.get("draws", m.sgp.draws_per_chain);
    s.get("burn_in", m.sgp.burn_in);
    s.get("step_scale", m.sgp.step_scale);
}

} // namespace

extern "C" {

const char* sgp_last_error(void) { return g_last_error.c_str(); }

const char* sgp_version(void) { return "0.1.0"; }

sgp_status sgp_crps_normal(double mu, double sigma, double y, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = sgp::crps_normal(mu, sigma, y);
    });
}

sgp_status sgp_crps_normal_mixture(size_t c, const double* mus, const double* sigmas,
                                   const double* weights, double y, double* out) {
    return guarded([&] {
        need(mus, "mus");
        need(sigmas, "sigmas");
        need(weights, "weights");
        need(out, "out");
        const sgp::SimplexWeights w(std::vector<double>(weights, weights + c));
        *out = sgp::crps_normal_mixture({mus, c}, {sigmas, c}, w, y);
    });
}

sgp_status sgp_log_score(double pdf_at_y, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = sgp::log_score(pdf_at_y);
    });
}

sgp_status sgp_interval_score(double lower, double upper, double alpha, double y, double* out) {
    return guarded([&] {
        need(out, "out");
        *out = sgp::interval_score(lower, upper, alpha, y);
    });
}

sgp_status sgp_weighted_interval_score(size_t k, const double* probs, const double* values, double y,
                                       double* out) {
    return guarded([&] {
        need(probs, "probs");
        need(values, "values");
        need(out, "out");
        const sgp::QuantileForecast qf({probs, probs + k}, {values, values + k});
        *out = sgp::weighted_interval_score(qf, y);
    });
}

sgp_status sgp_uwd1(size_t n, const double* pit, double* out) {
    return guarded([&] {
        need(pit, "pit");
        need(out, "out");
        *out = sgp::uwd1(sgp::PitSeries({pit, pit + n}));
    });
}

sgp_status sgp_eqw_weights(size_t c, double* out) {
    return guarded([&] {
        need(out, "out");
        const auto w = sgp::eqw_weights(c);
        std::copy(w.values().begin(), w.values().end(), out);
    });
}

void sgp_fit_options_default(sgp_fit_options* opt) {
    if (opt == nullptr) {
        return;
    }
    const sgp::GibbsConfig g;
    const sgp::MethodSettings m;
    const sgp::McOptions mc;
    *opt = sgp_fit_options{};
    opt->eta = g.eta;
    opt->dirichlet_alpha = nullptr;
    opt->dirichlet_alpha_len = 0;
    opt->chains = g.chains;
    opt->draws_per_chain = g.draws_per_chain;
    opt->burn_in = g.burn_in;
    opt->seed = g.seed;
    opt->step_scale = g.step_scale;
    opt->discount = sgp::RiskContext::kDefaultDiscount;
    opt->avs_eta = m.avs_eta;
    opt->strong_prior = m.strong_prior;
    opt->mc_samples = mc.samples;
}

sgp_status sgp_forecast_set_load(const char* forecasts_csv, const char* truth_csv, sgp_forecast_set** out) {
    return guarded([&] {
        need(forecasts_csv, "forecasts path");
        need(truth_csv, "truth path");
        need(out, "out");
        *out = nullptr;
        auto h = std::make_unique<sgp_forecast_set>();
        h->set = sgp::load_forecast_set(forecasts_csv, truth_csv);
        *out = h.release();
    });
}

void sgp_forecast_set_free(sgp_forecast_set* set) { delete set; }

sgp_status sgp_forecast_set_dims(const sgp_forecast_set* set, size_t* components, size_t* observations,
                                 int* dynamic) {
    return guarded([&] {
        need(set, "forecast set");
        if (components) *components = set->set.component_names.size();
        if (observations) *observations = set->set.size();
        if (dynamic) *dynamic = set->set.mode == sgp::RiskMode::kDynamic;
    });
}

sgp_status sgp_forecast_set_component_name(const sgp_forecast_set* set, size_t i, const char** out) {
    return guarded([&] {
        need(set, "forecast set");
        need(out, "out");
        sgp::detail::require(i < set->set.component_names.size(), "component index out of range");
        *out = set->set.component_names[i].c_str();
    });
}

sgp_status sgp_forecast_set_score(const sgp_forecast_set* set, const char* metric, const double* weights,
                                  const sgp_fit_options* opt, const char* out_csv) {
    return guarded([&] {
        need(set, "forecast set");
        need(metric, "metric");
        need(out_csv, "output path");
        const auto o = opt ? *opt : defaults();
        const auto ctx = sgp::make_risk_context(set->set, o.discount, mc_from(o));
        std::optional<sgp::SimplexWeights> w;
        if (weights) {
            const std::size_t c = set->set.component_names.size();
            w = sgp::SimplexWeights(std::vector<double>(weights, weights + c));
        }
        sgp::write_score_csv(out_csv, sgp::score_forecast_set(set->set, ctx, metric, w));
    });
}

sgp_status sgp_posterior_read_csv(const char* path, sgp_posterior** out) {
    return guarded([&] {
        need(path, "path");
        need(out, "out");
        *out = nullptr;
        *out = new sgp_posterior{sgp::read_draws_csv(path)};
    });
}

sgp_status sgp_posterior_write_csv(const sgp_posterior* p, const char* path) {
    return guarded([&] {
        need(p, "posterior");
        need(path, "path");
        sgp::write_draws_csv(path, p->draws);
    });
}

sgp_status sgp_posterior_dims(const sgp_posterior* p, size_t* draws, size_t* components, size_t* chains) {
    return guarded([&] {
        need(p, "posterior");
        if (draws) *draws = p->draws.draws();
        if (components) *components = p->draws.components();
        if (chains) *chains = p->draws.chains();
    });
}

sgp_status sgp_posterior_mean(const sgp_posterior* p, double* out) {
    return guarded([&] {
        need(p, "posterior");
        need(out, "out");
        const auto m = sgp::posterior_mean_weights(p->draws);
        std::copy(m.values().begin(), m.values().end(), out);
    });
}

sgp_status sgp_posterior_diagnostics(const sgp_posterior* p, double* rhat, double* ess, double* accept) {
    return guarded([&] {
        need(p, "posterior");
        need(rhat, "rhat");
        need(ess, "ess");
        const auto d = sgp::diagnostics(p->draws);
        std::copy(d.rhat.begin(), d.rhat.end(), rhat);
        std::copy(d.ess.begin(), d.ess.end(), ess);
        if (accept) *accept = d.accept_rate;
    });
}

void sgp_posterior_free(sgp_posterior* p) { delete p; }

sgp_status sgp_fit_forecast_set(const sgp_forecast_set* set, const char* method, const sgp_fit_options* opt,
                                double* weights_out, sgp_posterior** posterior_out) {
    return guarded([&] {
        need(set, "forecast set");
        need(method, "method");
        need(weights_out, "weights_out");
        if (posterior_out) *posterior_out = nullptr;
        const auto o = opt ? *opt : defaults();
        const auto m = sgp::parse_method(method);
        const std::size_t c = set->set.component_names.size();
        auto settings = method_settings(o, c);
        const auto ctx = sgp::make_risk_context(set->set, o.discount, mc_from(o));
        std::optional<sgp::SimplexWeights> w;
        if (m == sgp::Method::kSgp || m == sgp::Method::kSgp50) {
            auto cfg = settings.sgp;
            if (m == sgp::Method::kSgp50) cfg.dirichlet_alpha.assign(c, settings.strong_prior);
            auto draws = sgp::sample_posterior(ctx, cfg);
            w = sgp::posterior_mean_weights(draws);
            if (posterior_out) *posterior_out = new sgp_posterior{std::move(draws)};
        } else {
            w = sgp::fit_method(m, ctx, sgp::make_panel(set->set, ctx, o.discount), settings);
        }
        std::copy(w->values().begin(), w->values().end(), weights_out);
    });
}

sgp_status sgp_fit_score_panel(const char* panel_csv, const char* method, const sgp_fit_options* opt,
                               double* weights_out, size_t capacity, size_t* components) {
    return guarded([&] {
        need(panel_csv, "panel path");
        need(method, "method");
        const auto o = opt ? *opt : defaults();
        const auto m = sgp::parse_method(method);
        const auto panel = sgp::load_score_panel(panel_csv, o.discount);
        const std::size_t c = panel.components();
        if (components) *components = c;
        sgp::detail::require(weights_out != nullptr && capacity >= c, "weights buffer too small");
        sgp::SimplexWeights w = sgp::eqw_weights(c);
        switch (m) {
        case sgp::Method::kAvs: w = sgp::avs_weights(panel, o.avs_eta); break;
        case sgp::Method::kBma: w = sgp::bma_weights(panel); break;
        case sgp::Method::kEqw: break;
        default:
            throw sgp::ValidationError("a score panel carries no CRPS cross terms; fit " +
                                       std::string(method) + " from forecast and truth files");
        }
        std::copy(w.values().begin(), w.values().end(), weights_out);
    });
}

sgp_status sgp_tune_eta(const sgp_forecast_set* set, const char* method, const double* grid, size_t grid_len,
                        size_t folds, const sgp_fit_options* opt, double* best_eta, double* cv_out) {
    return guarded([&] {
        need(set, "forecast set");
        need(method, "method");
        need(grid, "grid");
        need(best_eta, "best_eta");
        const auto o = opt ? *opt : defaults();
        const std::size_t c = set->set.component_names.size();
        const auto ctx = sgp::make_risk_context(set->set, o.discount, mc_from(o));
        const std::span<const double> g(grid, grid_len);
        const auto cv = sgp::cross_validated_crps(
            ctx, g, folds, sgp::method_fitter(sgp::parse_method(method), method_settings(o, c)));
        *best_eta = grid[sgp::select_eta(g, cv)];
        if (cv_out) std::copy(cv.begin(), cv.end(), cv_out);
    });
}

sgp_status sgp_run_study(const char* study, const char* methods, const char* const* keys,
                         const char* const* values, size_t n_settings, uint64_t seed, size_t threads,
                         const char* long_csv, const char* summary_csv) {
    return guarded([&] {
        need(study, "study");
        need(long_csv, "long_csv");
        need(summary_csv, "summary_csv");
        const auto kind = sgp::parse_study(study);
        auto opt = sgp::default_study_options(kind);
        if (methods && *methods) opt.methods = sgp::parse_methods(methods);
        opt.threads = threads;
        Settings s(keys, values, n_settings);
        read_method_settings(s, opt.settings);
        s.get("discount", opt.discount);
        sgp::StudyReport report;
        int replicates = -1;
        s.get("replicates", replicates);
        switch (kind) {
        case sgp::StudyKind::kIid: {
            sgp::IidStudyConfig cfg;
            cfg.seed = seed;
            if (replicates > 0) cfg.replicates = replicates;
            s.get("nu", cfg.nu);
            s.get_list("candidate_means", cfg.candidate_means);
            s.get("candidate_sd", cfg.candidate_sd);
            std::vector<double> sizes;
            s.get_list("sample_sizes", sizes);
            if (!sizes.empty()) {
                cfg.sample_sizes.clear();
                for (double n : sizes) {
                    sgp::detail::require(n >= 1 && n == std::floor(n), "sample sizes must be positive integers");
                    cfg.sample_sizes.push_back(static_cast<std::size_t>(n));
                }
            }
            s.get("eval_draws", cfg.eval_draws);
            s.finish();
            report = sgp::run_iid_study(cfg, opt);
            break;
        }
        case sgp::StudyKind::kDynamic: {
            sgp::DynamicStudyConfig cfg;
            cfg.seed = seed;
            if (replicates > 0) cfg.replicates = replicates;
            s.get("T", cfg.T);
            s.get("sigma2", cfg.sigma2);
            s.get_list("candidate_means", cfg.candidate_means);
            s.get("candidate_sd", cfg.candidate_sd);
            s.finish();
            report = sgp::run_dynamic_study(cfg, opt);
            break;
        }
        case sgp::StudyKind::kSir: {
            sgp::SirStudyConfig cfg;
            cfg.seed = seed;
            if (replicates > 0) cfg.replicates = replicates;
            s.get("population", cfg.population);
            s.get("beta", cfg.beta);
            s.get("gamma", cfg.gamma);
            s.get("initial_infected", cfg.initial_infected);
            s.get("weeks", cfg.weeks);
            s.get("fit_start_week", cfg.fit_start_week);
            s.get("tau_step", cfg.tau_step);
            s.get("exact", cfg.exact);
            s.get("forecast_draws", cfg.forecast_draws);
            s.finish();
            report = sgp::run_sir_study(cfg, opt);
            break;
        }
        }
        sgp::write_study_csv(report, long_csv);
        sgp::write_summary_csv(report, summary_csv);
    });
}

sgp_status sgp_run_hub(const char* hub_csv, const char* truth_csv, const char* methods, const char* const* keys,
                       const char* const* values, size_t n_settings, uint64_t seed, size_t threads,
                       const char* out_dir) {
    return guarded([&] {
        need(hub_csv, "hub path");
        need(truth_csv, "truth path");
        need(out_dir, "output directory");
        sgp::HubConfig cfg;
        cfg.seed = seed;
        cfg.threads = threads;
        if (methods && *methods) cfg.methods = sgp::parse_methods(methods);
        Settings s(keys, values, n_settings);
        read_method_settings(s, cfg.methods_settings);
        s.get("discount", cfg.discount);
        s.get("horizon", cfg.horizon);
        s.get("mc_samples", cfg.mc_samples);
        s.finish();
        const auto records = sgp::parse_hub_csv(hub_csv, cfg.probs);
        const auto truth = sgp::parse_truth_csv(truth_csv);
        sgp::write_hub_report(sgp::run_hub_pipeline(records, truth, cfg), out_dir);
    });
}

sgp_status sgp_write_synthetic_hub(const char* const* keys, const char* const* values, size_t n_settings,
                                   uint64_t seed, const char* hub_csv, const char* truth_csv) {
    return guarded([&] {
        need(hub_csv, "hub path");
        need(truth_csv, "truth path");
        sgp::SyntheticHubConfig cfg;
        cfg.seed = seed;
        Settings s(keys, values, n_settings);
        s.get("teams", cfg.teams);
        s.get("good_teams", cfg.good_teams);
        s.get("locations", cfg.locations);
        s.get("weeks", cfg.weeks);
        s.get("first_date", cfg.first_reference_date);
        s.finish();
        const auto hub = sgp::gen_synthetic_hub(cfg);
        sgp::write_hub_csv(hub_csv, hub.records);
        sgp::write_truth_csv(truth_csv, hub.truth);
    });
}

} // extern "C"

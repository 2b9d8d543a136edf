// sgp: command-line front end over the stackgibbs C API.
#include "stackgibbs/stackgibbs.h"

#include <CLI11.hpp>
#include <json.hpp>

#include <charconv>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

struct Failure {
    int code;
    std::string message;
};

void check(sgp_status s) {
    if (s != SGP_OK) {
        throw Failure{static_cast<int>(s), sgp_last_error()};
    }
}

[[noreturn]] void fail(int code, const std::string& msg) { throw Failure{code, msg}; }

std::string fmt(double x) {
    char buf[64];
    auto r = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, r.ptr);
}

std::string now_iso() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void ensure_dir(const std::string& dir) {
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) fail(SGP_ERR_IO, "cannot create directory '" + dir + "': " + ec.message());
}

struct FitFlags {
    double eta = 0;
    std::vector<double> alpha;
    int chains = 0;
    int draws = 0;
    int burn_in = 0;
    double step_scale = 0;
    double discount = 0;
    double avs_eta = 0;
    double strong_prior = 0;
    std::size_t mc_samples = 0;

    FitFlags() {
        sgp_fit_options o;
        sgp_fit_options_default(&o);
        eta = o.eta;
        chains = o.chains;
        draws = o.draws_per_chain;
        burn_in = o.burn_in;
        step_scale = o.step_scale;
        discount = o.discount;
        avs_eta = o.avs_eta;
        strong_prior = o.strong_prior;
        mc_samples = o.mc_samples;
    }

    void add_to(CLI::App* app, bool sampler) {
        if (sampler) {
            app->add_option("--eta", eta, "SGP learning rate")->capture_default_str();
            app->add_option("--alpha", alpha, "Dirichlet prior parameters (default all ones)")->delimiter(',');
            app->add_option("--chains", chains, "MCMC chains")->capture_default_str();
            app->add_option("--draws", draws, "iterations per chain, burn-in included")->capture_default_str();
            app->add_option("--burn-in", burn_in, "burn-in iterations per chain")->capture_default_str();
            app->add_option("--step-scale", step_scale, "initial proposal scale")->capture_default_str();
            app->add_option("--avs-eta", avs_eta, "AVS exponent on CRPS")->capture_default_str();
            app->add_option("--strong-prior", strong_prior, "Dirichlet parameter for SGP50")
                ->capture_default_str();
        }
        app->add_option("--discount", discount, "discount for dynamic risk")->capture_default_str();
        app->add_option("--mc-samples", mc_samples, "Monte Carlo draws per non-normal component")
            ->capture_default_str();
    }

    sgp_fit_options options(std::uint64_t seed) const {
        sgp_fit_options o;
        sgp_fit_options_default(&o);
        o.eta = eta;
        o.dirichlet_alpha = alpha.empty() ? nullptr : alpha.data();
        o.dirichlet_alpha_len = alpha.size();
        o.chains = chains;
        o.draws_per_chain = draws;
        o.burn_in = burn_in;
        o.step_scale = step_scale;
        o.discount = discount;
        o.avs_eta = avs_eta;
        o.strong_prior = strong_prior;
        o.mc_samples = mc_samples;
        o.seed = seed;
        return o;
    }
};

/// Options forwarded to the pipelines as key/value settings.
struct PipelineSettings {
    std::map<std::string, std::string> kv;
    std::vector<std::string> extra;

    void add_to(CLI::App* app, const std::vector<std::pair<std::string, std::string>>& named) {
        for (const auto& [flag, key] : named) {
            app->add_option_function<std::string>(
                "--" + flag, [this, key = key](const std::string& v) { kv[key] = v; }, "sets " + key);
        }
        app->add_option("--set", extra, "extra setting as key=value (repeatable)");
    }

    std::pair<std::vector<const char*>, std::vector<const char*>> arrays() {
        for (const auto& e : extra) {
            auto eq = e.find('=');
            if (eq == std::string::npos || eq == 0) fail(SGP_ERR_VALIDATION, "--set expects key=value, got '" + e + "'");
            kv[e.substr(0, eq)] = e.substr(eq + 1);
        }
        extra.clear();
        std::vector<const char*> k, v;
        for (const auto& [key, val] : kv) {
            k.push_back(key.c_str());
            v.push_back(val.c_str());
        }
        return {k, v};
    }
};

const std::vector<std::pair<std::string, std::string>> kMethodFlags = {
    {"eta", "eta"},       {"avs-eta", "avs_eta"},   {"strong-prior", "strong_prior"},
    {"chains", "chains"}, {"draws", "draws"},       {"burn-in", "burn_in"},
    {"step-scale", "step_scale"}, {"discount", "discount"},
};

struct ForecastSet {
    sgp_forecast_set* h = nullptr;
    ForecastSet(const std::string& f, const std::string& t) { check(sgp_forecast_set_load(f.c_str(), t.c_str(), &h)); }
    ~ForecastSet() { sgp_forecast_set_free(h); }
    ForecastSet(const ForecastSet&) = delete;
    ForecastSet& operator=(const ForecastSet&) = delete;

    std::size_t components() const {
        std::size_t c = 0;
        check(sgp_forecast_set_dims(h, &c, nullptr, nullptr));
        return c;
    }
    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (std::size_t i = 0; i < components(); ++i) {
            const char* n = nullptr;
            check(sgp_forecast_set_component_name(h, i, &n));
            out.emplace_back(n);
        }
        return out;
    }
};

struct Posterior {
    sgp_posterior* h = nullptr;
    ~Posterior() { sgp_posterior_free(h); }
};

std::vector<double> read_weights(const std::string& path, const std::vector<std::string>& names) {
    std::ifstream in(path);
    if (!in) fail(SGP_ERR_IO, "cannot open weights file '" + path + "'");
    std::string line;
    std::getline(in, line);
    if (line.rfind("component,weight", 0) != 0) fail(SGP_ERR_VALIDATION, path + ": expected header component,weight");
    std::map<std::string, double> by_name;
    for (int row = 2; std::getline(in, line); ++row) {
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos) fail(SGP_ERR_VALIDATION, path + " row " + std::to_string(row) + ": missing weight");
        double w = 0;
        const std::string v = line.substr(comma + 1);
        auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), w);
        if (ec != std::errc() || p != v.data() + v.size())
            fail(SGP_ERR_VALIDATION, path + " row " + std::to_string(row) + ": invalid weight '" + v + "'");
        by_name[line.substr(0, comma)] = w;
    }
    std::vector<double> out;
    for (const auto& n : names) {
        auto it = by_name.find(n);
        if (it == by_name.end()) fail(SGP_ERR_VALIDATION, path + ": no weight for component '" + n + "'");
        out.push_back(it->second);
    }
    if (by_name.size() != names.size()) fail(SGP_ERR_VALIDATION, path + ": unexpected component names");
    return out;
}

void write_weights(const std::string& path, const std::vector<std::string>& names, const std::vector<double>& w) {
    std::ofstream out(path);
    if (!out) fail(SGP_ERR_IO, "cannot write '" + path + "'");
    out << "component,weight\n";
    for (std::size_t i = 0; i < w.size(); ++i) out << names[i] << ',' << fmt(w[i]) << '\n';
}

/// Every option that ended up set, from flags or the config file, as a flat argument list.
std::vector<std::string> resolved_args(const CLI::App& app) {
    std::vector<std::string> out;
    for (const CLI::Option* o : app.get_options()) {
        if (o->count() == 0 || (o->get_lnames().empty() && o->nonpositional())) continue;
        const std::string name = o->get_lnames().empty() ? "" : o->get_lnames().front();
        if (name == "help" || name == "config") continue;
        if (!o->nonpositional()) {
            for (const auto& r : o->results()) out.push_back(r);
            continue;
        }
        if (o->get_expected_max() == 0) {
            if (o->as<bool>()) out.push_back("--" + name);
            continue;
        }
        for (const auto& r : o->results()) out.push_back("--" + name + "=" + r);
    }
    return out;
}

struct Manifest {
    std::string started = now_iso();
    std::vector<std::string> outputs;
};

void write_manifest(const std::string& path, const std::string& command, const std::vector<std::string>& args,
                    std::uint64_t seed, std::size_t threads, const Manifest& m) {
    json j;
    j["command"] = command;
    j["argv"] = args;
    j["seed"] = seed;
    j["threads"] = threads;
    j["versions"] = {{"stackgibbs", sgp_version()},
                     {"cli11", CLI11_VERSION},
                     {"nlohmann_json", std::to_string(NLOHMANN_JSON_VERSION_MAJOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_MINOR) + "." +
                                           std::to_string(NLOHMANN_JSON_VERSION_PATCH)},
                     {"compiler", __VERSION__}};
    j["started"] = m.started;
    j["finished"] = now_iso();
    j["outputs"] = m.outputs;
    std::ofstream out(path);
    if (!out) fail(SGP_ERR_IO, "cannot write manifest '" + path + "'");
    out << j.dump(2) << '\n';
}

int run(std::vector<std::string> argv);

int run(std::vector<std::string> argv) {
    CLI::App app{"Stacked Gibbs posterior forecast ensembles", "sgp"};
    app.require_subcommand(1);
    app.set_config("--config", "", "key=value config file; command-line flags win");
    app.get_config_formatter_base()->arrayDelimiter(',');

    std::uint64_t seed = 20240101;
    std::size_t threads = 0;
    app.add_option("--seed", seed, "master random seed")->capture_default_str();
    app.add_option("--threads", threads, "worker threads (0 = all cores)")->capture_default_str();

    // score
    auto* score = app.add_subcommand("score", "score forecasts against truth");
    std::string forecasts, truth, metric = "crps", weights_in, out;
    FitFlags score_fit;
    score->add_option("--forecasts", forecasts, "forecast CSV")->required();
    score->add_option("--truth", truth, "truth CSV")->required();
    score->add_option("--metric", metric, "crps, logs or wis")->capture_default_str();
    score->add_option("--weights", weights_in, "weights CSV; adds pooled rows");
    score->add_option("--out", out, "output CSV")->required();
    score_fit.add_to(score, false);

    // fit
    auto* fit = app.add_subcommand("fit", "fit ensemble weights");
    std::string method = "sgp", panel, draws_out;
    std::size_t components = 0;
    FitFlags fit_flags;
    fit->add_option("--method", method, "sgp, sgp50, avs, bma or eqw")->capture_default_str();
    fit->add_option("--components", components, "component count (eqw without data)");
    fit->add_option("--panel", panel, "score panel CSV (t, component, crps, loglik)");
    fit->add_option("--forecasts", forecasts, "forecast CSV");
    fit->add_option("--truth", truth, "truth CSV");
    fit->add_option("--out", out, "weights CSV");
    fit->add_option("--draws-out", draws_out, "posterior draws CSV (sgp, sgp50)");
    fit_flags.add_to(fit, true);

    // simulate
    auto* sim = app.add_subcommand("simulate", "run a simulation study or write a synthetic hub archive");
    std::string study, methods, out_dir;
    PipelineSettings sim_settings;
    sim->add_option("study", study, "iid, dynamic, sir or hub-archive")->required();
    sim->add_option("--methods", methods, "comma list of methods");
    sim->add_option("--out-dir", out_dir, "output directory")->required();
    auto sim_named = kMethodFlags;
    sim_named.insert(sim_named.end(), {{"replicates", "replicates"}, {"teams", "teams"},
                                       {"locations", "locations"}, {"weeks", "weeks"}});
    sim_settings.add_to(sim, sim_named);

    // hub
    auto* hub = app.add_subcommand("hub", "run the forecast hub pipeline");
    std::string hub_csv;
    PipelineSettings hub_settings;
    hub->add_option("--hub", hub_csv, "hub submissions CSV")->required();
    hub->add_option("--truth", truth, "truth CSV")->required();
    hub->add_option("--methods", methods, "comma list of methods");
    hub->add_option("--out-dir", out_dir, "output directory")->required();
    auto hub_named = kMethodFlags;
    hub_named.insert(hub_named.end(), {{"horizon", "horizon"}, {"mc-samples", "mc_samples"}});
    hub_settings.add_to(hub, hub_named);

    // diagnose
    auto* diag = app.add_subcommand("diagnose", "R-hat and ESS for posterior draws");
    std::string draws_in;
    diag->add_option("--draws", draws_in, "posterior draws CSV")->required();
    diag->add_option("--out", out, "report CSV (default stdout)");

    // tune-eta
    auto* tune = app.add_subcommand("tune-eta", "choose eta by cross-validated CRPS");
    std::vector<double> grid{0.5, 1, 2, 5, 10, 15, 25, 50};
    std::size_t folds = 5;
    FitFlags tune_flags;
    tune->add_option("--forecasts", forecasts, "forecast CSV")->required();
    tune->add_option("--truth", truth, "truth CSV")->required();
    tune->add_option("--method", method, "sgp or sgp50")->capture_default_str();
    tune->add_option("--grid", grid, "candidate eta values")->delimiter(',');
    tune->add_option("--folds", folds, "cross-validation folds")->capture_default_str();
    tune->add_option("--out", out, "CSV of eta,cv_crps");
    tune_flags.add_to(tune, true);

    // replay
    auto* replay = app.add_subcommand("replay", "rerun the invocation recorded in a manifest");
    std::string manifest_in;
    replay->add_option("manifest", manifest_in, "manifest JSON")->required();

    try {
        std::reverse(argv.begin(), argv.end());
        app.parse(argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n\n" << app.help();
        return SGP_ERR_VALIDATION;
    }

    CLI::App* sub = app.get_subcommands().front();
    std::vector<std::string> args = resolved_args(app);
    args.push_back(sub->get_name());
    for (const auto& a : resolved_args(*sub)) args.push_back(a);
    Manifest man;

    try {
        if (sub == score) {
            ForecastSet set(forecasts, truth);
            auto opt = score_fit.options(seed);
            std::vector<double> w;
            if (!weights_in.empty()) w = read_weights(weights_in, set.names());
            check(sgp_forecast_set_score(set.h, metric.c_str(), w.empty() ? nullptr : w.data(), &opt, out.c_str()));
            man.outputs.push_back(out);
            write_manifest(out + ".manifest.json", "score", args, seed, threads, man);
        } else if (sub == fit) {
            auto opt = fit_flags.options(seed);
            std::vector<double> w;
            std::vector<std::string> names;
            if (!panel.empty()) {
                // a zero-capacity call reports the component count before failing
                std::size_t c = 0;
                const sgp_status probe = sgp_fit_score_panel(panel.c_str(), method.c_str(), &opt, nullptr, 0, &c);
                if (c == 0) check(probe);
                w.resize(c);
                check(sgp_fit_score_panel(panel.c_str(), method.c_str(), &opt, w.data(), c, &c));
                for (std::size_t i = 0; i < c; ++i) names.push_back("c" + std::to_string(i + 1));
            } else if (!forecasts.empty() || !truth.empty()) {
                if (forecasts.empty() || truth.empty()) fail(SGP_ERR_VALIDATION, "fit needs both --forecasts and --truth");
                ForecastSet set(forecasts, truth);
                names = set.names();
                w.resize(names.size());
                Posterior post;
                check(sgp_fit_forecast_set(set.h, method.c_str(), &opt, w.data(), draws_out.empty() ? nullptr : &post.h));
                if (!draws_out.empty()) {
                    if (post.h == nullptr) fail(SGP_ERR_VALIDATION, "--draws-out applies to sgp and sgp50 only");
                    check(sgp_posterior_write_csv(post.h, draws_out.c_str()));
                    man.outputs.push_back(draws_out);
                }
            } else {
                std::string lower = method;
                for (auto& ch : lower) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                if (lower != "eqw") fail(SGP_ERR_VALIDATION, "fit without data supports --method eqw only");
                if (components == 0) fail(SGP_ERR_VALIDATION, "fit needs --panel, --forecasts/--truth or --components");
                w.resize(components);
                check(sgp_eqw_weights(components, w.data()));
                for (std::size_t i = 0; i < components; ++i) names.push_back("c" + std::to_string(i + 1));
            }
            for (double x : w) std::cout << fmt(x) << '\n';
            if (!out.empty()) {
                write_weights(out, names, w);
                man.outputs.insert(man.outputs.begin(), out);
                write_manifest(out + ".manifest.json", "fit", args, seed, threads, man);
            }
        } else if (sub == sim) {
            ensure_dir(out_dir);
            auto [k, v] = sim_settings.arrays();
            if (study == "hub-archive") {
                const std::string h = (fs::path(out_dir) / "hub.csv").string();
                const std::string t = (fs::path(out_dir) / "truth.csv").string();
                if (!methods.empty()) fail(SGP_ERR_VALIDATION, "--methods does not apply to hub-archive");
                check(sgp_write_synthetic_hub(k.data(), v.data(), k.size(), seed, h.c_str(), t.c_str()));
                man.outputs = {h, t};
            } else {
                const std::string l = (fs::path(out_dir) / "study_long.csv").string();
                const std::string s = (fs::path(out_dir) / "study_summary.csv").string();
                check(sgp_run_study(study.c_str(), methods.c_str(), k.data(), v.data(), k.size(), seed, threads,
                                    l.c_str(), s.c_str()));
                man.outputs = {l, s};
            }
            write_manifest((fs::path(out_dir) / "manifest.json").string(), "simulate", args, seed, threads, man);
        } else if (sub == hub) {
            ensure_dir(out_dir);
            auto [k, v] = hub_settings.arrays();
            check(sgp_run_hub(hub_csv.c_str(), truth.c_str(), methods.c_str(), k.data(), v.data(), k.size(), seed,
                              threads, out_dir.c_str()));
            for (const char* f : {"hub_scores.csv", "hub_weights.csv", "hub_location_means.csv",
                                  "hub_week_means.csv", "hub_rank_counts.csv", "hub_notices.txt"})
                man.outputs.push_back((fs::path(out_dir) / f).string());
            write_manifest((fs::path(out_dir) / "manifest.json").string(), "hub", args, seed, threads, man);
        } else if (sub == diag) {
            Posterior post;
            check(sgp_posterior_read_csv(draws_in.c_str(), &post.h));
            std::size_t n = 0, c = 0, chains = 0;
            check(sgp_posterior_dims(post.h, &n, &c, &chains));
            std::vector<double> rhat(c), ess(c), mean(c);
            check(sgp_posterior_diagnostics(post.h, rhat.data(), ess.data(), nullptr));
            check(sgp_posterior_mean(post.h, mean.data()));
            std::ostringstream rep;
            rep << "component,mean,rhat,ess\n";
            for (std::size_t i = 0; i < c; ++i)
                rep << 'w' << i + 1 << ',' << fmt(mean[i]) << ',' << fmt(rhat[i]) << ',' << fmt(ess[i]) << '\n';
            if (out.empty()) {
                std::cout << rep.str();
            } else {
                std::ofstream f(out);
                if (!f) fail(SGP_ERR_IO, "cannot write '" + out + "'");
                f << rep.str();
                man.outputs.push_back(out);
                write_manifest(out + ".manifest.json", "diagnose", args, seed, threads, man);
            }
            std::cerr << "chains " << chains << ", draws " << n << '\n';
        } else if (sub == tune) {
            ForecastSet set(forecasts, truth);
            auto opt = tune_flags.options(seed);
            double best = 0;
            std::vector<double> cv(grid.size());
            check(sgp_tune_eta(set.h, method.c_str(), grid.data(), grid.size(), folds, &opt, &best, cv.data()));
            std::cout << fmt(best) << '\n';
            if (!out.empty()) {
                std::ofstream f(out);
                if (!f) fail(SGP_ERR_IO, "cannot write '" + out + "'");
                f << "eta,cv_crps\n";
                for (std::size_t i = 0; i < grid.size(); ++i) f << fmt(grid[i]) << ',' << fmt(cv[i]) << '\n';
                f.close();
                man.outputs.push_back(out);
                write_manifest(out + ".manifest.json", "tune-eta", args, seed, threads, man);
            }
        } else if (sub == replay) {
            std::ifstream in(manifest_in);
            if (!in) fail(SGP_ERR_IO, "cannot open manifest '" + manifest_in + "'");
            json j;
            try {
                in >> j;
            } catch (const json::exception& e) {
                fail(SGP_ERR_VALIDATION, manifest_in + ": " + e.what());
            }
            if (!j.contains("argv") || !j["argv"].is_array()) fail(SGP_ERR_VALIDATION, manifest_in + ": missing argv");
            auto recorded = j["argv"].get<std::vector<std::string>>();
            if (!recorded.empty() && std::find(recorded.begin(), recorded.end(), "replay") != recorded.end())
                fail(SGP_ERR_VALIDATION, "refusing to replay a replay");
            std::cerr << "replaying " << j.value("command", std::string("?")) << '\n';
            return run(recorded);
        }
    } catch (const Failure& f) {
        std::cerr << "error: " << f.message << '\n';
        return f.code;
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    try {
        return run(args);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return SGP_ERR_INTERNAL;
    }
}

#include "stackgibbs/simkit.hpp"

#include "stackgibbs/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

namespace sgp {

using detail::require;

void IidStudyConfig::validate() const {
    require(nu >= 0.0 && nu <= 1.0, "nu must lie in [0,1]");
    require(comp_sds[0] > 0.0 && comp_sds[1] > 0.0, "component sds must be positive");
    require(candidate_sd > 0.0, "candidate sd must be positive");
    require(!candidate_means.empty(), "need at least one candidate");
    require(!sample_sizes.empty(), "need at least one sample size");
    for (auto n : sample_sizes) {
        require(n >= 1, "sample sizes must be >= 1");
    }
    require(replicates >= 1, "replicates must be >= 1");
    require(eval_draws >= 1, "eval_draws must be >= 1");
}

std::vector<ComponentForecast> IidStudyConfig::candidates() const {
    std::vector<ComponentForecast> out;
    for (double m : candidate_means) {
        out.push_back(ComponentForecast::gaussian(m, candidate_sd));
    }
    return out;
}

void DynamicStudyConfig::validate() const {
    require(T >= 2, "T must be >= 2");
    require(sigma2 >= 0.0, "sigma2 must be nonnegative");
    require(w_init[0] > 0.0 && w_init[1] > 0.0 &&
                std::abs(w_init[0] + w_init[1] - 1.0) <= SimplexWeights::kSumTolerance,
            "w_init must be a positive weight pair summing to one");
    require(comp_sds[0] > 0.0 && comp_sds[1] > 0.0, "component sds must be positive");
    require(candidate_sd > 0.0 && !candidate_means.empty(), "invalid candidates");
    require(replicates >= 1, "replicates must be >= 1");
}

std::vector<ComponentForecast> DynamicStudyConfig::candidates() const {
    std::vector<ComponentForecast> out;
    for (double m : candidate_means) {
        out.push_back(ComponentForecast::gaussian(m, candidate_sd));
    }
    return out;
}

void SirStudyConfig::validate() const {
    require(population >= 1, "population must be >= 1");
    require(beta >= 0.0 && gamma >= 0.0, "rates must be nonnegative");
    require(initial_infected >= 0 && initial_infected <= population,
            "initial_infected must lie in [0, population]");
    require(weeks >= 1, "weeks must be >= 1");
    require(fit_start_week >= 4 && fit_start_week < weeks,
            "fit_start_week must be >= 4 and < weeks");
    require(replicates >= 1, "replicates must be >= 1");
    require(tau_step > 0.0 && tau_step <= 0.01, "tau_step must lie in (0, 0.01]");
    require(forecast_draws >= 2, "forecast_draws must be >= 2");
}

std::vector<double> gen_iid_mixture(const IidStudyConfig& cfg, std::size_t n, Rng& rng) {
    require(n >= 1, "n must be >= 1");
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(n);
    for (auto& y : out) {
        const int k = unif(rng) < cfg.nu ? 0 : 1;
        y = cfg.comp_means[k] + cfg.comp_sds[k] * z(rng);
    }
    return out;
}

DynamicPath gen_dynamic_mixture(const DynamicStudyConfig& cfg, Rng& rng) {
    cfg.validate();
    DynamicPath p;
    p.y.resize(cfg.T);
    p.weights.resize(cfg.T);
    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const double step = std::sqrt(cfg.sigma2);
    std::array<double, 2> lz{std::log(cfg.w_init[0]), std::log(cfg.w_init[1])};
    for (int t = 0; t < cfg.T; ++t) {
        if (t == 0) {
            p.weights[0] = cfg.w_init;
        } else {
            lz[0] += step * z(rng);
            lz[1] += step * z(rng);
            const double m = std::max(lz[0], lz[1]);
            const double e0 = std::exp(lz[0] - m);
            const double e1 = std::exp(lz[1] - m);
            p.weights[t] = {e0 / (e0 + e1), e1 / (e0 + e1)};
        }
        const int k = unif(rng) < p.weights[t][0] ? 0 : 1;
        p.y[t] = cfg.comp_means[k] + cfg.comp_sds[k] * z(rng);
    }
    return p;
}

std::vector<double> SirTrajectory::weekly_infected() const {
    return {infected.begin() + 1, infected.end()};
}

SirTrajectory gen_sir(const SirStudyConfig& cfg, Rng& rng) {
    require(cfg.population >= 1, "population must be >= 1");
    require(cfg.initial_infected >= 0 && cfg.initial_infected <= cfg.population,
            "initial_infected must lie in [0, population]");
    require(cfg.beta >= 0.0 && cfg.gamma >= 0.0, "rates must be nonnegative");
    require(cfg.tau_step > 0.0, "tau_step must be positive");
    const double n = cfg.population;
    long s = cfg.population - cfg.initial_infected;
    long i = cfg.initial_infected;
    long r = 0;
    SirTrajectory tr;
    auto record = [&] {
        tr.susceptible.push_back(static_cast<int>(s));
        tr.infected.push_back(static_cast<int>(i));
        tr.recovered.push_back(static_cast<int>(r));
    };
    record();
    if (cfg.exact) {
        std::exponential_distribution<double> expo(1.0);
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        double t = 0.0;
        int week = 1;
        while (week <= cfg.weeks) {
            const double a1 = cfg.beta * static_cast<double>(s) * static_cast<double>(i) / n;
            const double a2 = cfg.gamma * static_cast<double>(i);
            const double a0 = a1 + a2;
            const double next = a0 > 0.0 ? t + expo(rng) / a0 : std::numeric_limits<double>::infinity();
            while (week <= cfg.weeks && next > week) {
                record();
                ++week;
            }
            if (week > cfg.weeks) {
                break;
            }
            t = next;
            if (unif(rng) * a0 < a1) {
                --s;
                ++i;
            } else {
                --i;
                ++r;
            }
        }
        return tr;
    }
    const int steps = static_cast<int>(std::lround(1.0 / cfg.tau_step));
    const double dt = 1.0 / steps;
    for (int week = 1; week <= cfg.weeks; ++week) {
        for (int k = 0; k < steps; ++k) {
            const double inf_rate = cfg.beta * static_cast<double>(s) * static_cast<double>(i) / n * dt;
            const double rec_rate = cfg.gamma * static_cast<double>(i) * dt;
            long new_inf = 0;
            long new_rec = 0;
            if (inf_rate > 0.0) {
                new_inf = std::min<long>(std::poisson_distribution<long>(inf_rate)(rng), s);
            }
            if (rec_rate > 0.0) {
                new_rec = std::min<long>(std::poisson_distribution<long>(rec_rate)(rng), i);
            }
            s -= new_inf;
            i += new_inf - new_rec;
            r += new_rec;
        }
        record();
    }
    return tr;
}

// ---- SIR components ----

namespace {

constexpr double kLogSdFloor = 0.05;

/// Deterministic SIR from (S, I) at week 0 of the history; returns I at
/// weeks 0..len (RK4, 10 steps per week).
void sir_ode_path(double beta, double gamma, double n, double s0, double i0, std::size_t len,
                  std::vector<double>& out) {
    out.resize(len + 1);
    double s = s0;
    double i = i0;
    out[0] = i;
    constexpr int kSub = 10;
    constexpr double h = 1.0 / kSub;
    auto fs = [&](double ss, double ii) { return -beta * ss * ii / n; };
    auto fi = [&](double ss, double ii) { return beta * ss * ii / n - gamma * ii; };
    for (std::size_t w = 1; w <= len; ++w) {
        for (int k = 0; k < kSub; ++k) {
            const double k1s = fs(s, i), k1i = fi(s, i);
            const double k2s = fs(s + 0.5 * h * k1s, i + 0.5 * h * k1i);
            const double k2i = fi(s + 0.5 * h * k1s, i + 0.5 * h * k1i);
            const double k3s = fs(s + 0.5 * h * k2s, i + 0.5 * h * k2i);
            const double k3i = fi(s + 0.5 * h * k2s, i + 0.5 * h * k2i);
            const double k4s = fs(s + h * k3s, i + h * k3i);
            const double k4i = fi(s + h * k3s, i + h * k3i);
            s += h / 6.0 * (k1s + 2 * k2s + 2 * k3s + k4s);
            i += h / 6.0 * (k1i + 2 * k2i + 2 * k3i + k4i);
        }
        out[w] = i;
    }
}

ComponentForecast sir_ode_component(std::span<const double> h, double n, Rng& rng,
                                    std::size_t draws) {
    const std::size_t len = h.size();
    const double i0 = std::max(h[0], 1.0);
    const double s0 = std::max(n - i0, 0.0);
    std::vector<double> path;
    auto sse = [&](double lb, double lg) {
        sir_ode_path(std::exp(lb), std::exp(lg), n, s0, i0, len, path);
        double acc = 0.0;
        for (std::size_t w = 1; w < len; ++w) {
            const double d = path[w] - h[w];
            acc += d * d;
        }
        return acc;
    };
    // coarse log-grid, then pattern search
    const double lb_lo = std::log(0.05), lb_hi = std::log(4.0);
    const double lg_lo = std::log(0.01), lg_hi = std::log(2.0);
    constexpr int kGrid = 20;
    double best_b = lb_lo, best_g = lg_lo;
    double best = std::numeric_limits<double>::infinity();
    for (int a = 0; a < kGrid; ++a) {
        for (int b = 0; b < kGrid; ++b) {
            const double lb = lb_lo + (lb_hi - lb_lo) * a / (kGrid - 1);
            const double lg = lg_lo + (lg_hi - lg_lo) * b / (kGrid - 1);
            const double v = sse(lb, lg);
            if (v < best) {
                best = v;
                best_b = lb;
                best_g = lg;
            }
        }
    }
    double step = (lb_hi - lb_lo) / (kGrid - 1);
    for (int it = 0; it < 40 && step > 1e-4; ++it) {
        bool moved = false;
        for (auto [db, dg] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
            const double lb = std::clamp(best_b + db * step, lb_lo, lb_hi);
            const double lg = std::clamp(best_g + dg * step, lg_lo, lg_hi);
            const double v = sse(lb, lg);
            if (v < best) {
                best = v;
                best_b = lb;
                best_g = lg;
                moved = true;
            }
        }
        if (!moved) {
            step *= 0.5;
        }
    }
    sir_ode_path(std::exp(best_b), std::exp(best_g), n, s0, i0, len, path);
    const double mean = path[len];
    const double resid = len > 2 ? std::sqrt(best / static_cast<double>(len - 2)) : 1.0;
    const double sd = std::max(resid, 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(draws);
    for (auto& x : out) {
        x = std::max(0.0, mean + sd * z(rng));
    }
    return ComponentForecast::empirical(std::move(out));
}

std::vector<double> log1p_all(std::span<const double> h) {
    std::vector<double> z(h.size());
    std::transform(h.begin(), h.end(), z.begin(), [](double x) { return std::log1p(x); });
    return z;
}

ComponentForecast from_log_normal_draws(double centre, double sd, Rng& rng, std::size_t draws) {
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(draws);
    for (auto& x : out) {
        x = std::max(0.0, std::expm1(centre + sd * z(rng)));
    }
    return ComponentForecast::empirical(std::move(out));
}

ComponentForecast ar1_component(std::span<const double> h, Rng& rng, std::size_t draws) {
    const auto z = log1p_all(h);
    const std::size_t m = z.size() - 1;
    double mx = 0, my = 0;
    for (std::size_t t = 0; t < m; ++t) {
        mx += z[t];
        my += z[t + 1];
    }
    mx /= m;
    my /= m;
    double sxy = 0, sxx = 0;
    for (std::size_t t = 0; t < m; ++t) {
        sxy += (z[t] - mx) * (z[t + 1] - my);
        sxx += (z[t] - mx) * (z[t] - mx);
    }
    const double phi = sxx > 0 ? sxy / sxx : 0.0;
    const double c = my - phi * mx;
    double sse = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double e = z[t + 1] - c - phi * z[t];
        sse += e * e;
    }
    const double sd = std::max(std::sqrt(sse / static_cast<double>(m - 2)), kLogSdFloor);
    return from_log_normal_draws(c + phi * z.back(), sd, rng, draws);
}

ComponentForecast rw_drift_component(std::span<const double> h, Rng& rng, std::size_t draws) {
    const auto z = log1p_all(h);
    const std::size_t m = z.size() - 1;
    double drift = 0;
    for (std::size_t t = 0; t < m; ++t) {
        drift += z[t + 1] - z[t];
    }
    drift /= m;
    double ss = 0;
    for (std::size_t t = 0; t < m; ++t) {
        const double d = z[t + 1] - z[t] - drift;
        ss += d * d;
    }
    const double sd = std::max(std::sqrt(ss / static_cast<double>(m - 1)), kLogSdFloor);
    return from_log_normal_draws(z.back() + drift, sd, rng, draws);
}

ComponentForecast mean_component(std::span<const double> h, Rng& rng, std::size_t draws) {
    const double n = static_cast<double>(h.size());
    const double mean = std::accumulate(h.begin(), h.end(), 0.0) / n;
    double ss = 0;
    for (double x : h) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::max(std::sqrt(ss / (n - 1)), 1.0);
    std::normal_distribution<double> z(0.0, 1.0);
    std::vector<double> out(draws);
    for (auto& x : out) {
        x = std::max(0.0, mean + sd * z(rng));
    }
    return ComponentForecast::empirical(std::move(out));
}

} // namespace

std::vector<ComponentForecast> fit_sir_components(std::span<const double> history, int population,
                                                  Rng& rng, std::size_t draws) {
    require(history.size() >= 4, "history must contain at least 4 weeks");
    require(population >= 1, "population must be >= 1");
    require(draws >= 2, "draws must be >= 2");
    for (double x : history) {
        require(std::isfinite(x) && x >= 0.0, "history counts must be finite and nonnegative");
    }
    std::vector<ComponentForecast> out;
    out.push_back(sir_ode_component(history, population, rng, draws));
    out.push_back(ar1_component(history, rng, draws));
    out.push_back(rw_drift_component(history, rng, draws));
    out.push_back(mean_component(history, rng, draws));
    return out;
}

// ---- synthetic hub archive ----

SyntheticHub gen_synthetic_hub(const SyntheticHubConfig& cfg) {
    require(cfg.teams >= 1 && cfg.good_teams >= 0 && cfg.good_teams <= cfg.teams,
            "invalid team counts");
    require(cfg.locations >= 1 && cfg.weeks >= 1, "invalid archive size");
    SyntheticHub hub;
    std::vector<std::string> dates;
    for (int w = 0; w <= cfg.weeks; ++w) {
        dates.push_back(add_days(cfg.first_reference_date, 7 * w));
    }
    std::vector<std::string> teams;
    for (int k = 0; k < cfg.teams; ++k) {
        teams.push_back("team" + std::string(k + 1 < 10 ? "0" : "") + std::to_string(k + 1));
    }
    hub.good_team_names.assign(teams.begin(), teams.begin() + cfg.good_teams);

    for (int l = 0; l < cfg.locations; ++l) {
        const std::string loc = "L" + std::string(l + 1 < 10 ? "0" : "") + std::to_string(l + 1);
        Rng rng = make_stream(cfg.seed, {0x485542, static_cast<std::uint64_t>(l)});
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        std::normal_distribution<double> z(0.0, 1.0);
        const double height = 200.0 + 600.0 * unif(rng);
        const double peak = 0.4 * cfg.weeks + 0.3 * cfg.weeks * unif(rng);
        const double width = 3.0 + 2.0 * unif(rng);
        // truth at every date (index 0 is the first reference date)
        std::vector<double> truth(dates.size());
        for (std::size_t w = 0; w < dates.size(); ++w) {
            const double d = (static_cast<double>(w) - peak) / width;
            const double mean = 10.0 + height * std::exp(-0.5 * d * d);
            truth[w] = std::poisson_distribution<long>(mean)(rng);
            hub.truth.push_back({loc, dates[w], truth[w]});
        }
        for (int k = 0; k < cfg.teams; ++k) {
            const bool good = k < cfg.good_teams;
            Rng trng = make_stream(cfg.seed, {0x485543, static_cast<std::uint64_t>(l),
                                              static_cast<std::uint64_t>(k)});
            std::uniform_real_distribution<double> u(0.0, 1.0);
            std::normal_distribution<double> nz(0.0, 1.0);
            const double sign = u(trng) < 0.5 ? -1.0 : 1.0;
            const double bias = good ? 0.0 : sign * (0.4 + 0.4 * u(trng));
            const double spread = good ? 0.15 : (u(trng) < 0.5 ? 0.05 : 0.7);
            const double jitter = good ? 0.05 : 0.25;
            for (int w = 0; w < cfg.weeks; ++w) {
                const double centre = std::log1p(truth[w + 1]) + bias + jitter * nz(trng);
                for (double p : kFluSightProbs) {
                    const double q = std::max(0.0, std::expm1(centre + spread * normal_quantile(p)));
                    hub.records.push_back({teams[k], loc, dates[w], 1, p, q});
                }
            }
        }
    }
    return hub;
}

} // namespace sgp

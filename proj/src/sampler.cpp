#include "stackgibbs/sampler.hpp"

#include "stackgibbs/error.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace sgp {

namespace {

constexpr double kTargetAccept = 0.234;

// w = softmax([u, 0]); also returns log w.
void alr_inverse(const Eigen::VectorXd& u, std::vector<double>& w, std::vector<double>& log_w) {
    const auto d = static_cast<std::size_t>(u.size());
    double m = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
        m = std::max(m, u(static_cast<Eigen::Index>(i)));
    }
    double sum = std::exp(-m);
    for (std::size_t i = 0; i < d; ++i) {
        sum += std::exp(u(static_cast<Eigen::Index>(i)) - m);
    }
    const double lse = m + std::log(sum);
    for (std::size_t i = 0; i < d; ++i) {
        log_w[i] = u(static_cast<Eigen::Index>(i)) - lse;
        w[i] = std::exp(log_w[i]);
    }
    log_w[d] = -lse;
    w[d] = std::exp(-lse);
}

std::vector<double> dirichlet_draw(const std::vector<double>& alpha, Rng& rng) {
    std::vector<double> w(alpha.size());
    double sum = 0.0;
    for (std::size_t c = 0; c < alpha.size(); ++c) {
        std::gamma_distribution<double> g(alpha[c], 1.0);
        w[c] = std::max(g(rng), std::numeric_limits<double>::min());
        sum += w[c];
    }
    for (double& v : w) {
        v /= sum;
    }
    return w;
}

struct ChainResult {
    std::vector<double> rows;
    double accept_rate;
};

ChainResult run_chain(const GibbsTarget& target, const GibbsConfig& cfg,
                      const std::vector<double>& alpha, std::size_t chain) {
    const std::size_t c = target.components;
    const auto kept = static_cast<std::size_t>(cfg.draws_per_chain - cfg.burn_in);
    ChainResult out{std::vector<double>(), 0.0};
    out.rows.reserve(kept * c);
    if (c == 1) {
        out.rows.assign(kept, 1.0);
        out.accept_rate = 1.0;
        return out;
    }

    auto rng = make_stream(cfg.seed, {0x5347'5000ull, chain});
    const auto d = static_cast<Eigen::Index>(c - 1);
    std::vector<double> w(c);
    std::vector<double> log_w(c);

    auto log_target = [&](const Eigen::VectorXd& u) {
        alr_inverse(u, w, log_w);
        double lp = 0.0;
        for (std::size_t i = 0; i < c; ++i) {
            lp += alpha[i] * log_w[i];
        }
        if (cfg.eta != 0.0) {
            lp -= cfg.eta * target.n * target.risk(w);
        }
        return lp;
    };

    const auto start = dirichlet_draw(alpha, rng);
    Eigen::VectorXd u(d);
    for (Eigen::Index i = 0; i < d; ++i) {
        u(i) = std::log(start[static_cast<std::size_t>(i)]) - std::log(start[c - 1]);
    }
    double lp = log_target(u);
    if (!std::isfinite(lp)) {
        std::ostringstream os;
        os << "Gibbs log-density is not finite at the initial point of chain " << chain;
        throw NumericalError(os.str());
    }

    const double base_scale = 2.38 / std::sqrt(static_cast<double>(d));
    double log_scale = std::log(base_scale * cfg.step_scale);
    Eigen::MatrixXd chol = Eigen::MatrixXd::Identity(d, d);

    // covariance re-estimated at these burn-in iterations from the preceding window
    std::vector<int> checkpoints;
    for (double f : {0.15, 0.3, 0.5, 0.75}) {
        const auto it = static_cast<int>(f * cfg.burn_in);
        if (it > 20 && (checkpoints.empty() || it > checkpoints.back())) {
            checkpoints.push_back(it);
        }
    }
    std::size_t next_checkpoint = 0;
    Eigen::VectorXd win_sum = Eigen::VectorXd::Zero(d);
    Eigen::MatrixXd win_outer = Eigen::MatrixXd::Zero(d, d);
    double win_n = 0.0;
    double adapt_count = 0.0;

    std::normal_distribution<double> z(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    Eigen::VectorXd step(d);
    std::size_t accepted = 0;

    for (int it = 0; it < cfg.draws_per_chain; ++it) {
        for (Eigen::Index i = 0; i < d; ++i) {
            step(i) = z(rng);
        }
        const Eigen::VectorXd proposal = u + std::exp(log_scale) * (chol * step);
        const double lp_new = log_target(proposal);
        const double log_ratio = lp_new - lp;
        const bool accept = std::isfinite(lp_new) && std::log(unif(rng)) < log_ratio;
        if (accept) {
            u = proposal;
            lp = lp_new;
        }

        if (it < cfg.burn_in) {
            adapt_count += 1.0;
            const double a = std::isfinite(log_ratio) ? std::min(1.0, std::exp(log_ratio)) : 0.0;
            log_scale += std::pow(adapt_count, -0.6) * (a - kTargetAccept);
            win_sum += u;
            win_outer += u * u.transpose();
            win_n += 1.0;
            if (next_checkpoint < checkpoints.size() && it + 1 == checkpoints[next_checkpoint]) {
                ++next_checkpoint;
                const Eigen::VectorXd mean = win_sum / win_n;
                Eigen::MatrixXd cov = (win_outer - win_n * mean * mean.transpose()) / (win_n - 1.0);
                cov = (win_n / (win_n + 5.0)) * cov +
                      (1e-3 * 5.0 / (win_n + 5.0)) * Eigen::MatrixXd::Identity(d, d);
                Eigen::LLT<Eigen::MatrixXd> llt(cov);
                if (llt.info() == Eigen::Success) {
                    chol = llt.matrixL();
                    log_scale = std::log(base_scale * cfg.step_scale);
                    adapt_count = 0.0;
                }
                win_sum.setZero();
                win_outer.setZero();
                win_n = 0.0;
            }
        } else {
            if (accept) {
                ++accepted;
            }
            alr_inverse(u, w, log_w);
            out.rows.insert(out.rows.end(), w.begin(), w.end());
        }
    }
    out.accept_rate = kept > 0 ? static_cast<double>(accepted) / static_cast<double>(kept) : 0.0;
    return out;
}

// Ranks with ties averaged, scaled to normal scores.
std::vector<std::vector<double>> rank_normalize(const std::vector<std::vector<double>>& chains) {
    std::vector<std::pair<double, std::size_t>> all;
    std::size_t total = 0;
    for (const auto& ch : chains) {
        total += ch.size();
    }
    all.reserve(total);
    for (const auto& ch : chains) {
        for (double v : ch) {
            all.emplace_back(v, all.size());
        }
    }
    std::sort(all.begin(), all.end());
    std::vector<double> rank(total);
    for (std::size_t i = 0; i < total;) {
        std::size_t j = i;
        while (j < total && all[j].first == all[i].first) {
            ++j;
        }
        const double r = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k) {
            rank[all[k].second] = r;
        }
        i = j;
    }
    const auto s = static_cast<double>(total);
    std::vector<std::vector<double>> out;
    std::size_t pos = 0;
    for (const auto& ch : chains) {
        std::vector<double> z(ch.size());
        for (auto& v : z) {
            v = normal_quantile((rank[pos++] - 0.375) / (s + 0.25));
        }
        out.push_back(std::move(z));
    }
    return out;
}

std::vector<std::vector<double>> split_chains(const std::vector<std::vector<double>>& chains) {
    std::vector<std::vector<double>> out;
    for (const auto& ch : chains) {
        const std::size_t half = ch.size() / 2;
        out.emplace_back(ch.begin(), ch.begin() + static_cast<std::ptrdiff_t>(half));
        out.emplace_back(ch.end() - static_cast<std::ptrdiff_t>(half), ch.end());
    }
    return out;
}

double mean_of(const std::vector<double>& v) {
    return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

// Classic potential scale reduction on equal-length chains.
double basic_rhat(const std::vector<std::vector<double>>& chains) {
    const auto m = static_cast<double>(chains.size());
    const auto n = static_cast<double>(chains.front().size());
    std::vector<double> means;
    double w = 0.0;
    for (const auto& ch : chains) {
        const double mu = mean_of(ch);
        means.push_back(mu);
        double ss = 0.0;
        for (double v : ch) {
            ss += (v - mu) * (v - mu);
        }
        w += ss / (n - 1.0);
    }
    w /= m;
    const double grand = mean_of(means);
    double b = 0.0;
    for (double mu : means) {
        b += (mu - grand) * (mu - grand);
    }
    b *= n / (m - 1.0);
    if (w <= 0.0) {
        return b <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    const double var_plus = (n - 1.0) / n * w + b / n;
    return std::sqrt(var_plus / w);
}

double ess_of(const std::vector<std::vector<double>>& chains) {
    const auto m = chains.size();
    const auto n = chains.front().size();
    const auto nd = static_cast<double>(n);
    std::vector<double> means(m);
    std::vector<double> var(m);
    for (std::size_t j = 0; j < m; ++j) {
        means[j] = mean_of(chains[j]);
        double ss = 0.0;
        for (double v : chains[j]) {
            ss += (v - means[j]) * (v - means[j]);
        }
        var[j] = ss / (nd - 1.0);
    }
    const double w = mean_of(var);
    const double grand = mean_of(means);
    double b = 0.0;
    for (double mu : means) {
        b += (mu - grand) * (mu - grand);
    }
    b = m > 1 ? b * nd / static_cast<double>(m - 1) : 0.0;
    const double var_plus = (nd - 1.0) / nd * w + b / nd;
    const double total = nd * static_cast<double>(m);
    if (!(var_plus > 0.0)) {
        return total;
    }
    auto acov_mean = [&](std::size_t lag) {
        double acc = 0.0;
        for (std::size_t j = 0; j < m; ++j) {
            const auto& ch = chains[j];
            double s = 0.0;
            for (std::size_t i = 0; i + lag < n; ++i) {
                s += (ch[i] - means[j]) * (ch[i + lag] - means[j]);
            }
            acc += s / nd;
        }
        return acc / static_cast<double>(m);
    };
    auto rho = [&](std::size_t lag) { return 1.0 - (w - acov_mean(lag)) / var_plus; };

    // Geyer initial positive and monotone sequence on paired autocorrelations.
    double tau_sum = 0.0;
    double prev_pair = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double pair = (k == 0 ? 1.0 : rho(2 * k)) + rho(2 * k + 1);
        if (pair < 0.0) {
            break;
        }
        const double mono = std::min(pair, prev_pair);
        tau_sum += mono;
        prev_pair = mono;
    }
    const double tau = std::max(-1.0 + 2.0 * tau_sum, 1.0 / std::log10(std::max(total, 10.0)));
    return std::min(total / tau, total);
}

} // namespace

// --- GibbsConfig ------------------------------------------------------------------

std::vector<double> GibbsConfig::alpha_for(std::size_t components) const {
    if (dirichlet_alpha.empty()) {
        return std::vector<double>(components, 1.0);
    }
    detail::require(dirichlet_alpha.size() == components,
                    "dirichlet_alpha length differs from component count");
    return dirichlet_alpha;
}

void GibbsConfig::validate(std::size_t components) const {
    detail::require(eta >= 0.0 && std::isfinite(eta), "eta must be finite and nonnegative");
    detail::require(chains >= 1, "chains must be at least 1");
    detail::require(burn_in >= 0 && burn_in < draws_per_chain,
                    "burn_in must be nonnegative and below draws_per_chain");
    detail::require(step_scale > 0.0, "step_scale must be positive");
    for (double a : alpha_for(components)) {
        detail::require(a > 0.0 && std::isfinite(a), "dirichlet_alpha entries must be positive");
    }
}

GibbsConfig GibbsConfig::convergence_audit() {
    GibbsConfig cfg;
    cfg.chains = 4;
    return cfg;
}

// --- PosteriorDraws ---------------------------------------------------------------

PosteriorDraws::PosteriorDraws(std::size_t components, std::vector<std::vector<double>> chain_rows,
                               std::vector<double> accept_rates, GibbsConfig config)
    : components_(components), accept_rates_(std::move(accept_rates)), config_(std::move(config)) {
    detail::require(components_ >= 1, "posterior draws need at least one component");
    for (auto& rows : chain_rows) {
        detail::require(rows.size() % components_ == 0, "chain rows are not a multiple of C");
        chain_sizes_.push_back(rows.size() / components_);
        data_.insert(data_.end(), rows.begin(), rows.end());
    }
}

std::vector<double> PosteriorDraws::chain_column(std::size_t chain, std::size_t c) const {
    std::size_t offset = 0;
    for (std::size_t k = 0; k < chain; ++k) {
        offset += chain_sizes_[k];
    }
    std::vector<double> out(chain_sizes_[chain]);
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i] = data_[(offset + i) * components_ + c];
    }
    return out;
}

double PosteriorDraws::accept_rate() const {
    if (accept_rates_.empty()) {
        return 0.0;
    }
    return mean_of(accept_rates_);
}

double Diagnostics::max_rhat() const { return *std::max_element(rhat.begin(), rhat.end()); }
double Diagnostics::min_ess() const { return *std::min_element(ess.begin(), ess.end()); }

GibbsTarget GibbsTarget::from(const RiskContext& ctx) {
    return GibbsTarget{ctx.components(), static_cast<double>(ctx.observations()),
                       [&ctx](std::span<const double> w) { return ctx.risk(w); }};
}

double log_gibbs_density(const SimplexWeights& w, const RiskContext& ctx, const GibbsConfig& cfg) {
    const auto alpha = cfg.alpha_for(ctx.components());
    detail::require(w.size() == ctx.components(), "weight length differs from component count");
    double lp = -cfg.eta * static_cast<double>(ctx.observations()) * ctx.risk(w.values());
    for (std::size_t c = 0; c < w.size(); ++c) {
        if (alpha[c] == 1.0) {
            continue;
        }
        if (w[c] == 0.0) {
            detail::require(alpha[c] > 1.0,
                            "Gibbs density undefined on the boundary when a prior entry is below 1");
            return -std::numeric_limits<double>::infinity();
        }
        lp += (alpha[c] - 1.0) * std::log(w[c]);
    }
    return lp;
}

PosteriorDraws sample_posterior(const RiskContext& ctx, const GibbsConfig& cfg) {
    return sample_posterior(GibbsTarget::from(ctx), cfg);
}

PosteriorDraws sample_posterior(const GibbsTarget& target, const GibbsConfig& cfg) {
    cfg.validate(target.components);
    const auto alpha = cfg.alpha_for(target.components);
    std::vector<std::vector<double>> rows;
    std::vector<double> accept;
    for (int k = 0; k < cfg.chains; ++k) {
        auto res = run_chain(target, cfg, alpha, static_cast<std::size_t>(k));
        rows.push_back(std::move(res.rows));
        accept.push_back(res.accept_rate);
    }
    return PosteriorDraws(target.components, std::move(rows), std::move(accept), cfg);
}

SimplexWeights posterior_mean_weights(const PosteriorDraws& d) {
    detail::require(d.draws() >= 1, "posterior mean of an empty draw set");
    std::vector<double> mean(d.components(), 0.0);
    for (std::size_t m = 0; m < d.draws(); ++m) {
        const auto r = d.row(m);
        for (std::size_t c = 0; c < mean.size(); ++c) {
            mean[c] += r[c];
        }
    }
    return SimplexWeights::normalized(std::move(mean));
}

std::vector<double> posterior_sd(const PosteriorDraws& d) {
    detail::require(d.draws() >= 2, "posterior sd needs at least 2 draws");
    const auto mean = posterior_mean_weights(d);
    std::vector<double> ss(d.components(), 0.0);
    for (std::size_t m = 0; m < d.draws(); ++m) {
        const auto r = d.row(m);
        for (std::size_t c = 0; c < ss.size(); ++c) {
            ss[c] += (r[c] - mean[c]) * (r[c] - mean[c]);
        }
    }
    for (double& v : ss) {
        v = std::sqrt(v / static_cast<double>(d.draws() - 1));
    }
    return ss;
}

double split_rhat(const std::vector<std::vector<double>>& chains) {
    detail::require(!chains.empty(), "R-hat needs at least one chain");
    for (const auto& ch : chains) {
        detail::require(ch.size() >= 4, "R-hat needs at least 4 draws per chain");
    }
    const auto split = split_chains(chains);
    const double bulk = basic_rhat(rank_normalize(split));
    std::vector<double> pooled;
    for (const auto& ch : split) {
        pooled.insert(pooled.end(), ch.begin(), ch.end());
    }
    auto mid = pooled.begin() + static_cast<std::ptrdiff_t>(pooled.size() / 2);
    std::nth_element(pooled.begin(), mid, pooled.end());
    const double median = *mid;
    auto folded = split;
    for (auto& ch : folded) {
        for (double& v : ch) {
            v = std::abs(v - median);
        }
    }
    const double tail = basic_rhat(rank_normalize(folded));
    return std::max({1.0, bulk, tail});
}

double bulk_ess(const std::vector<std::vector<double>>& chains) {
    detail::require(!chains.empty(), "ESS needs at least one chain");
    for (const auto& ch : chains) {
        detail::require(ch.size() >= 4, "ESS needs at least 4 draws per chain");
    }
    return ess_of(rank_normalize(split_chains(chains)));
}

Diagnostics diagnostics(const PosteriorDraws& d) {
    detail::require(d.chains() >= 1, "diagnostics need at least one chain");
    for (std::size_t k = 0; k < d.chains(); ++k) {
        detail::require(d.chain_size(k) >= 4, "diagnostics need at least 4 post-burn-in draws");
    }
    Diagnostics out;
    out.accept_rate = d.accept_rate();
    const auto total = static_cast<double>(d.draws());
    for (std::size_t c = 0; c < d.components(); ++c) {
        std::vector<std::vector<double>> chains;
        bool constant = true;
        for (std::size_t k = 0; k < d.chains(); ++k) {
            chains.push_back(d.chain_column(k, c));
            const auto [lo, hi] = std::minmax_element(chains.back().begin(), chains.back().end());
            constant = constant && *lo == *hi && *lo == chains.front().front();
        }
        if (constant) {
            out.rhat.push_back(1.0);
            out.ess.push_back(total);
            continue;
        }
        out.rhat.push_back(split_rhat(chains));
        out.ess.push_back(std::min(bulk_ess(chains), total));
    }
    return out;
}

// --- tuning -----------------------------------------------------------------------

std::vector<double> cross_validated_crps(const RiskContext& ctx, std::span<const double> grid,
                                         std::size_t folds, const WeightFitter& fit) {
    detail::require(!grid.empty(), "eta grid must be nonempty");
    detail::require(ctx.mode() == RiskMode::kIid, "eta tuning requires an iid context");
    const std::size_t n = ctx.observations();
    detail::require(folds >= 2 && folds <= n, "degenerate folds: need 2 <= folds <= n");
    std::vector<double> scores;
    for (double eta : grid) {
        detail::require(eta > 0.0, "eta grid values must be positive");
        double total = 0.0;
        for (std::size_t f = 0; f < folds; ++f) {
            std::vector<std::size_t> train;
            std::vector<std::size_t> test;
            for (std::size_t i = 0; i < n; ++i) {
                (i % folds == f ? test : train).push_back(i);
            }
            detail::require(!train.empty(), "degenerate folds: empty training split");
            const auto w = fit(ctx.subset(train), eta);
            for (auto i : test) {
                total += ctx.terms_at(i).crps(w.values());
            }
        }
        scores.push_back(total / static_cast<double>(n));
    }
    return scores;
}

std::size_t select_eta(std::span<const double> grid, std::span<const double> scores) {
    detail::require(!grid.empty() && grid.size() == scores.size(), "grid and scores differ in length");
    std::vector<std::size_t> order(grid.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&grid](std::size_t a, std::size_t b) { return grid[a] < grid[b]; });
    std::size_t best = order.front();
    for (auto i : order) {
        const double tol = 1e-12 * std::max(1.0, std::abs(scores[best]));
        if (scores[i] < scores[best] - tol) {
            best = i;
        }
    }
    return best;
}

double tune_eta(const RiskContext& ctx, std::span<const double> grid, std::size_t folds,
                const WeightFitter& fit) {
    const auto scores = cross_validated_crps(ctx, grid, folds, fit);
    return grid[select_eta(grid, scores)];
}

double tune_eta(const RiskContext& ctx, std::span<const double> grid, std::size_t folds,
                const GibbsConfig& cfg) {
    return tune_eta(ctx, grid, folds, [&cfg](const RiskContext& train, double eta) {
        GibbsConfig c = cfg;
        c.eta = eta;
        return posterior_mean_weights(sample_posterior(train, c));
    });
}

// --- oracle -----------------------------------------------------------------------

std::vector<double> project_to_simplex(std::span<const double> v) {
    std::vector<double> u(v.begin(), v.end());
    std::sort(u.begin(), u.end(), std::greater<>());
    double cumsum = 0.0;
    double theta = 0.0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        cumsum += u[j];
        const double t = (cumsum - 1.0) / static_cast<double>(j + 1);
        if (u[j] - t > 0.0) {
            theta = t;
        }
    }
    std::vector<double> out(v.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[i] = std::max(v[i] - theta, 0.0);
        sum += out[i];
    }
    for (double& x : out) {
        x /= sum;
    }
    return out;
}

SimplexWeights risk_minimizer_oracle(std::size_t components,
                                     const std::function<double(std::span<const double>)>& risk,
                                     int restarts, std::uint64_t seed) {
    detail::require(components >= 1, "oracle needs at least one component");
    detail::require(restarts >= 1, "oracle needs at least one restart");
    const std::size_t c = components;
    if (c == 1) {
        return SimplexWeights({1.0});
    }

    auto descend = [&](std::vector<double> x) {
        double f = risk(x);
        double t = 1.0;
        std::vector<double> g(c);
        std::vector<double> probe(x);
        for (int it = 0; it < 5000; ++it) {
            const double h = 1e-7;
            for (std::size_t i = 0; i < c; ++i) {
                probe = x;
                probe[i] += h;
                const double up = risk(probe);
                probe[i] -= 2.0 * h;
                const double down = risk(probe);
                g[i] = (up - down) / (2.0 * h);
            }
            bool moved = false;
            t = std::min(t * 2.0, 1e3);
            while (t > 1e-14) {
                std::vector<double> step(c);
                for (std::size_t i = 0; i < c; ++i) {
                    step[i] = x[i] - t * g[i];
                }
                auto cand = project_to_simplex(step);
                double decrease = 0.0;
                for (std::size_t i = 0; i < c; ++i) {
                    decrease += g[i] * (x[i] - cand[i]);
                }
                const double fc = risk(cand);
                if (fc <= f - 1e-4 * decrease && fc < f) {
                    double moved_by = 0.0;
                    for (std::size_t i = 0; i < c; ++i) {
                        moved_by = std::max(moved_by, std::abs(cand[i] - x[i]));
                    }
                    x = std::move(cand);
                    const bool tiny = f - fc < 1e-15 * std::max(1.0, std::abs(f)) && moved_by < 1e-12;
                    f = fc;
                    moved = !tiny;
                    break;
                }
                t *= 0.5;
            }
            if (!moved) {
                break;
            }
        }
        return std::make_pair(f, x);
    };

    auto rng = make_stream(seed, {0x0A4Cull});
    std::vector<double> best_x(c, 1.0 / static_cast<double>(c));
    double best_f = std::numeric_limits<double>::infinity();
    auto consider = [&](std::pair<double, std::vector<double>> r) {
        if (r.first < best_f) {
            best_f = r.first;
            best_x = std::move(r.second);
        }
    };
    consider(descend(std::vector<double>(c, 1.0 / static_cast<double>(c))));
    const std::vector<double> ones(c, 1.0);
    for (int r = 0; r < restarts; ++r) {
        consider(descend(dirichlet_draw(ones, rng)));
    }
    if (c <= 3) {
        const int steps = 100;
        for (int i = 0; i <= steps; ++i) {
            for (int j = 0; j <= (c == 3 ? steps - i : 0); ++j) {
                std::vector<double> x(c);
                x[0] = i / static_cast<double>(steps);
                if (c == 2) {
                    x[1] = 1.0 - x[0];
                } else {
                    x[1] = j / static_cast<double>(steps);
                    x[2] = std::max(0.0, 1.0 - x[0] - x[1]);
                }
                const double f = risk(x);
                if (f < best_f) {
                    consider(descend(x));
                }
            }
        }
    }
    return SimplexWeights::normalized(std::move(best_x));
}

SimplexWeights risk_minimizer_oracle(const RiskContext& ctx, int restarts, std::uint64_t seed) {
    return risk_minimizer_oracle(
        ctx.components(), [&ctx](std::span<const double> w) { return ctx.risk(w); }, restarts,
        seed);
}

} // namespace sgp

#include <doctest.h>

#include "stackgibbs/error.hpp"
#include "stackgibbs/risk.hpp"
#include "stackgibbs/sampler.hpp"
#include "support.hpp"

#include <algorithm>
#include <numeric>

using namespace sgp;

namespace {

std::vector<ComponentForecast> six_candidates() {
    std::vector<ComponentForecast> out;
    for (double m : {0, 2, 4, 6, 8, 10}) out.push_back(ComponentForecast::gaussian(m, 1));
    return out;
}

std::vector<double> truth_draws(std::size_t n, std::uint64_t seed) {
    Rng rng = make_stream(seed);
    std::uniform_real_distribution<double> u(0, 1);
    std::normal_distribution<double> z(0, 1);
    std::vector<double> y(n);
    for (auto& v : y) v = (u(rng) < 0.65 ? 3.0 : 6.5) + z(rng);
    return y;
}

GibbsConfig quick(double eta, std::size_t c, std::uint64_t seed = 1) {
    GibbsConfig cfg;
    cfg.eta = eta;
    cfg.dirichlet_alpha.assign(c, 1.0);
    cfg.draws_per_chain = 30000;
    cfg.burn_in = 5000;
    cfg.seed = seed;
    return cfg;
}

double dist(std::span<const double> a, std::span<const double> b) {
    double s = 0;
    for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
    return std::sqrt(s);
}

} // namespace

TEST_SUITE("sampler") {

TEST_CASE("config validation") {
    GibbsConfig cfg;
    CHECK_NOTHROW(cfg.validate(3));
    cfg.burn_in = cfg.draws_per_chain;
    CHECK_THROWS_AS(cfg.validate(3), ValidationError);
    cfg = GibbsConfig{};
    cfg.dirichlet_alpha = {1, 0};
    CHECK_THROWS_AS(cfg.validate(2), ValidationError);
    cfg.dirichlet_alpha = {1, 1, 1};
    CHECK_THROWS_AS(cfg.validate(2), ValidationError);
    cfg = GibbsConfig{};
    cfg.eta = -1;
    CHECK_THROWS_AS(cfg.validate(2), ValidationError);
    CHECK(GibbsConfig::convergence_audit().chains == 4);
}

TEST_CASE("log density examples") {
    const auto comps = six_candidates();
    const auto ctx = RiskContext::iid(comps, truth_draws(20, 1));
    Rng rng = make_stream(2);
    std::exponential_distribution<double> e(1);
    auto draw = [&] {
        std::vector<double> w(6);
        for (auto& v : w) v = e(rng);
        return SimplexWeights::normalized(w);
    };
    GibbsConfig flat;
    flat.eta = 0;
    const double ref = log_gibbs_density(draw(), ctx, flat);
    for (int k = 0; k < 10; ++k) CHECK(log_gibbs_density(draw(), ctx, flat) == doctest::Approx(ref));

    GibbsConfig g;
    g.eta = 3;
    for (int k = 0; k < 10; ++k) {
        const auto a = draw(), b = draw();
        const double dd = log_gibbs_density(a, ctx, g) - log_gibbs_density(b, ctx, g);
        const double dr = -3.0 * 20 * (ctx.risk(a.values()) - ctx.risk(b.values()));
        CHECK(dd == doctest::Approx(dr).epsilon(1e-10));
    }

    const auto ctx4 = RiskContext::iid({comps.begin(), comps.begin() + 4}, {1.0});
    GibbsConfig strong;
    strong.eta = 1e-12;
    strong.dirichlet_alpha.assign(4, 50.0);
    const double at_centre = log_gibbs_density(SimplexWeights::uniform(4), ctx4, strong);
    for (int k = 0; k < 20; ++k) {
        std::vector<double> w(4);
        for (auto& v : w) v = e(rng);
        CHECK(log_gibbs_density(SimplexWeights::normalized(w), ctx4, strong) < at_centre);
    }

    GibbsConfig sparse;
    sparse.dirichlet_alpha.assign(6, 0.5);
    CHECK_THROWS_AS(log_gibbs_density(SimplexWeights::vertex(6, 0), ctx, sparse), ValidationError);
}

TEST_CASE("prior recovery, flat dirichlet on three components") {
    const auto ctx = RiskContext::iid({ComponentForecast::gaussian(0, 1), ComponentForecast::gaussian(1, 1),
                                       ComponentForecast::gaussian(2, 1)},
                                      {0.5});
    GibbsConfig cfg;
    cfg.eta = 0;
    cfg.seed = 5;
    const auto d = sample_posterior(ctx, cfg);
    REQUIRE(d.draws() == 50000);
    std::vector<double> w1(d.draws());
    for (std::size_t m = 0; m < d.draws(); ++m) w1[m] = d.row(m)[0];
    std::sort(w1.begin(), w1.end());
    double ks = 0;
    const double n = static_cast<double>(w1.size());
    for (std::size_t i = 0; i < w1.size(); ++i) {
        const double f = 1 - (1 - w1[i]) * (1 - w1[i]); // Beta(1,2)
        ks = std::max({ks, std::abs(f - i / n), std::abs(f - (i + 1) / n)});
    }
    CHECK(ks < 0.02);
    CHECK(diagnostics(d).max_rhat() < 1.01);
}

TEST_CASE("prior recovery, first and second moments") {
    const std::vector<double> alpha{2, 1, 3, 0.7};
    const auto ctx = RiskContext::iid(std::vector<ComponentForecast>(4, ComponentForecast::gaussian(0, 1)), {0.0});
    GibbsConfig cfg;
    cfg.eta = 0;
    cfg.dirichlet_alpha = alpha;
    cfg.seed = 17;
    const auto d = sample_posterior(ctx, cfg);
    const auto diag = diagnostics(d);
    const double a0 = std::accumulate(alpha.begin(), alpha.end(), 0.0);
    for (std::size_t c = 0; c < 4; ++c) {
        const double mean = alpha[c] / a0;
        const double var = alpha[c] * (a0 - alpha[c]) / (a0 * a0 * (a0 + 1));
        double m1 = 0, m2 = 0;
        for (std::size_t m = 0; m < d.draws(); ++m) {
            m1 += d.row(m)[c];
            m2 += d.row(m)[c] * d.row(m)[c];
        }
        m1 /= d.draws();
        m2 /= d.draws();
        const double se1 = std::sqrt(var / diag.ess[c]);
        CHECK(std::abs(m1 - mean) < 3 * se1);
        // second raw moment: Var(w^2) via Dirichlet fourth moments
        const double e2 = var + mean * mean;
        const double e4 = alpha[c] * (alpha[c] + 1) * (alpha[c] + 2) * (alpha[c] + 3) /
                          (a0 * (a0 + 1) * (a0 + 2) * (a0 + 3));
        const double se2 = std::sqrt((e4 - e2 * e2) / diag.ess[c]);
        CHECK(std::abs(m2 - e2) < 3 * se2);
    }
}

TEST_CASE("dirichlet mean with unequal parameters") {
    const auto ctx = RiskContext::iid(std::vector<ComponentForecast>(3, ComponentForecast::gaussian(0, 1)), {0.0});
    GibbsConfig cfg;
    cfg.eta = 0;
    cfg.dirichlet_alpha = {2, 1, 1};
    cfg.seed = 3;
    CHECK(std::abs(posterior_mean_weights(sample_posterior(ctx, cfg))[0] - 0.5) < 0.01);

    GibbsConfig five;
    five.eta = 0;
    five.seed = 4;
    const auto m = posterior_mean_weights(
        sample_posterior(RiskContext::iid(std::vector<ComponentForecast>(5, ComponentForecast::gaussian(0, 1)), {0.0}), five));
    for (double v : m.values()) CHECK(std::abs(v - 0.2) < 0.01);
}

TEST_CASE("posterior mean tracks the oracle at n = 200") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(200, 99));
    GibbsConfig cfg;
    cfg.eta = 15;
    cfg.seed = 8;
    const auto mean = posterior_mean_weights(sample_posterior(ctx, cfg));
    const auto best = risk_minimizer_oracle(ctx, 5);
    CHECK(dist(mean.values(), best.values()) < 0.05);
}

TEST_CASE("every draw lies on the simplex and sampling is deterministic") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(30, 7));
    auto cfg = quick(15, 6, 21);
    cfg.chains = 2;
    const auto a = sample_posterior(ctx, cfg);
    const auto b = sample_posterior(ctx, cfg);
    REQUIRE(a.draws() == b.draws());
    bool identical = true;
    for (std::size_t m = 0; m < a.draws(); ++m) {
        double s = 0;
        for (std::size_t c = 0; c < 6; ++c) {
            const double v = a.row(m)[c];
            CHECK_MESSAGE(v >= 0.0, "negative weight");
            s += v;
            identical = identical && v == b.row(m)[c];
        }
        if (std::abs(s - 1.0) > SimplexWeights::kSumTolerance) {
            FAIL("row does not sum to one");
        }
    }
    CHECK(identical);
    CHECK(a.accept_rate() > 0.1);
    CHECK(a.accept_rate() < 0.6);
}

TEST_CASE("single component posterior is the point mass") {
    const auto ctx = RiskContext::iid({ComponentForecast::gaussian(0, 1)}, {0.3, 1.0});
    const auto d = sample_posterior(ctx, quick(5, 1));
    for (std::size_t m = 0; m < d.draws(); m += 997) CHECK(d.row(m)[0] == 1.0);
    CHECK(posterior_mean_weights(d)[0] == 1.0);
}

TEST_CASE("posterior mean of explicit draws") {
    const PosteriorDraws one(3, {{0.2, 0.3, 0.5}}, {1.0}, GibbsConfig{});
    const auto m = posterior_mean_weights(one);
    CHECK(m[0] == doctest::Approx(0.2));
    CHECK(m[2] == doctest::Approx(0.5));
    const PosteriorDraws sym(2, {{0.1, 0.9, 0.9, 0.1, 0.3, 0.7, 0.7, 0.3}}, {1.0}, GibbsConfig{});
    CHECK(posterior_mean_weights(sym)[0] == doctest::Approx(0.5));
    CHECK_THROWS_AS(posterior_mean_weights(PosteriorDraws(2, {{}}, {}, GibbsConfig{})), ValidationError);
}

TEST_CASE("diagnostics examples") {
    Rng rng = make_stream(1);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<double> iid(4000);
    for (auto& v : iid) v = u(rng);
    const double same = split_rhat({iid, iid});
    CHECK(same >= 1.0);
    CHECK(same <= 1.01);
    std::vector<double> hi(iid);
    for (auto& v : hi) v += 2.0;
    CHECK(split_rhat({iid, hi}) > 1.5);
    CHECK_THROWS_AS(split_rhat({{0.1, 0.2, 0.3}}), ValidationError);
    CHECK(bulk_ess({iid, iid}) <= 8000.0);
    CHECK(bulk_ess({iid}) > 3000.0);

    // AR(1) chain with phi = 0.9: ESS about n (1 - phi) / (1 + phi)
    std::normal_distribution<double> z(0, 1);
    std::vector<double> ar(40000);
    double x = 0;
    for (auto& v : ar) v = x = 0.9 * x + z(rng);
    const double ess = bulk_ess({ar});
    CHECK(ess > 40000 * 0.0526 * 0.8);
    CHECK(ess < 40000 * 0.0526 * 1.2);
}

TEST_CASE("convergence audit on the reference fit") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(200, 13));
    auto cfg = GibbsConfig::convergence_audit();
    cfg.eta = 15;
    cfg.seed = 2;
    const auto d = sample_posterior(ctx, cfg);
    const auto diag = diagnostics(d);
    CHECK(diag.max_rhat() < 1.01);
    for (double e : diag.ess) CHECK(e <= static_cast<double>(d.draws()));
    for (double r : diag.rhat) CHECK(r >= 1.0 - 1e-6);
}

TEST_CASE("sharper eta concentrates the posterior") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(50, 23));
    const auto sd1 = posterior_sd(sample_posterior(ctx, quick(1, 6, 5)));
    const auto sd50 = posterior_sd(sample_posterior(ctx, quick(50, 6, 6)));
    for (std::size_t c = 0; c < 6; ++c) CHECK(sd50[c] <= sd1[c]);
}

TEST_CASE("posterior concentrates around the oracle as n grows") {
    const auto comps = six_candidates();
    const std::vector<std::size_t> sizes{10, 50, 200, 1000};
    std::vector<std::vector<double>> ball(sizes.size()), sds(sizes.size());
    for (int rep = 0; rep < 20; ++rep) {
        const auto ys = truth_draws(1000, 500 + rep);
        for (std::size_t k = 0; k < sizes.size(); ++k) {
            const auto ctx = RiskContext::iid(comps, {ys.begin(), ys.begin() + sizes[k]});
            const auto best = risk_minimizer_oracle(ctx, 3, rep);
            auto cfg = quick(15, 6, 1000 * rep + k);
            cfg.draws_per_chain = 20000;
            const auto d = sample_posterior(ctx, cfg);
            std::size_t inside = 0;
            for (std::size_t m = 0; m < d.draws(); ++m) inside += dist(d.row(m), best.values()) < 0.15;
            ball[k].push_back(static_cast<double>(inside) / d.draws());
            const auto sd = posterior_sd(d);
            sds[k].push_back(*std::max_element(sd.begin(), sd.end()));
        }
    }
    auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return 0.5 * (v[v.size() / 2 - 1] + v[v.size() / 2]);
    };
    for (std::size_t k = 1; k < sizes.size(); ++k) CHECK(median(ball[k]) >= median(ball[k - 1]));
    CHECK(median(sds.back()) < median(sds.front()));
}

TEST_CASE("tune_eta examples") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(20, 3));
    const std::vector<double> single{7.0};
    CHECK(tune_eta(ctx, single, 5, [](const RiskContext& r, double) {
              return SimplexWeights::uniform(r.components());
          }) == 7.0);
    const std::vector<double> grid{5, 1, 15};
    CHECK(tune_eta(ctx, grid, 4, [](const RiskContext& r, double) {
              return SimplexWeights::uniform(r.components());
          }) == 1.0);
    CHECK_THROWS_AS(tune_eta(ctx, grid, 1, quick(1, 6)), ValidationError);
    CHECK_THROWS_AS(tune_eta(ctx, grid, 21, quick(1, 6)), ValidationError);
    CHECK_THROWS_AS(tune_eta(ctx, std::vector<double>{}, 4, quick(1, 6)), ValidationError);
    const auto dyn = RiskContext::dynamic({six_candidates(), six_candidates()}, {1.0, 2.0});
    CHECK_THROWS_AS(tune_eta(dyn, grid, 2, quick(1, 6)), ValidationError);
}

TEST_CASE("held-out crps is nonincreasing in eta up to 15") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(100, 42));
    auto cfg = quick(1, 6, 9);
    cfg.draws_per_chain = 15000;
    cfg.burn_in = 5000;
    const std::vector<double> grid{1, 5, 15, 50};
    const auto cv = cross_validated_crps(ctx, grid, 10, [&](const RiskContext& train, double eta) {
        auto c = cfg;
        c.eta = eta;
        return posterior_mean_weights(sample_posterior(train, c));
    });
    CHECK(cv[1] <= cv[0]);
    CHECK(cv[2] <= cv[1]);
}

TEST_CASE("oracle examples") {
    const auto one = RiskContext::iid({ComponentForecast::gaussian(0, 1)}, {0.2});
    CHECK(risk_minimizer_oracle(one, 2)[0] == 1.0);
    const auto twin = RiskContext::iid({ComponentForecast::gaussian(0, 1), ComponentForecast::gaussian(0, 1)}, {0.2, 1.0});
    const auto w = risk_minimizer_oracle(twin, 3);
    CHECK(w[0] + w[1] == doctest::Approx(1.0));
    CHECK(twin.risk(w.values()) == doctest::Approx(twin.risk(SimplexWeights::vertex(2, 0).values())));

    const auto big = RiskContext::iid(six_candidates(), truth_draws(10000, 1234));
    const auto best = risk_minimizer_oracle(big, 5);
    const double rb = big.risk(best.values());
    for (std::size_t j = 0; j < 6; ++j) CHECK(rb <= big.risk(SimplexWeights::vertex(6, j).values()));
    CHECK(rb <= big.risk(SimplexWeights::uniform(6).values()));
}

TEST_CASE("oracle agrees with a grid scan for three components") {
    const auto ctx = RiskContext::iid({ComponentForecast::gaussian(2, 1), ComponentForecast::gaussian(4, 1),
                                       ComponentForecast::gaussian(7, 1)},
                                      truth_draws(100, 5));
    const auto best = risk_minimizer_oracle(ctx, 3);
    double grid_best = 1e300;
    for (int a = 0; a <= 200; ++a) {
        for (int b = 0; a + b <= 200; ++b) {
            const std::vector<double> w{a / 200.0, b / 200.0, (200 - a - b) / 200.0};
            grid_best = std::min(grid_best, ctx.risk(w));
        }
    }
    CHECK(ctx.risk(best.values()) <= grid_best + 1e-12);
}

TEST_CASE("projection onto the simplex") {
    const std::vector<double> in{0.2, 0.3, 0.5};
    CHECK(project_to_simplex(in) == std::vector<double>{0.2, 0.3, 0.5});
    const auto p = project_to_simplex(std::vector<double>{2.0, 0.0});
    CHECK(p[0] == doctest::Approx(1.0));
    CHECK(p[1] == doctest::Approx(0.0));
    const auto q = project_to_simplex(std::vector<double>{0.5, 0.5, 0.5});
    for (double v : q) CHECK(v == doctest::Approx(1.0 / 3));
}

}

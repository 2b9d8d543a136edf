#include <doctest.h>

#include "stackgibbs/error.hpp"
#include "stackgibbs/risk.hpp"
#include "stackgibbs/sampler.hpp"
#include "support.hpp"

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

std::vector<double> random_simplex(std::size_t c, Rng& rng) {
    std::exponential_distribution<double> e(1.0);
    std::vector<double> w(c);
    double s = 0;
    for (auto& v : w) s += v = e(rng);
    for (auto& v : w) v /= s;
    return w;
}

/// Direct mixture CRPS via the test oracle's closed-form pieces.
double direct_crps(const std::vector<ComponentForecast>& comps, const std::vector<double>& w, double y) {
    const auto cdf = [&](double x) {
        double s = 0;
        for (std::size_t c = 0; c < comps.size(); ++c) s += w[c] * comps[c].cdf(x);
        return s;
    };
    return oracle::crps_integral(cdf, y);
}

} // namespace

TEST_SUITE("risk") {

TEST_CASE("iid risk examples") {
    const auto comps = six_candidates();
    const auto one = RiskContext::iid(comps, {4.2});
    const auto w = SimplexWeights::uniform(6);
    CHECK(empirical_risk_iid(one, w) == doctest::Approx(direct_crps(comps, w.vec(), 4.2)).epsilon(1e-9));

    const auto ys = truth_draws(50, 3);
    const auto ctx = RiskContext::iid(comps, ys);
    double mean_j = 0;
    for (double y : ys) mean_j += crps_normal(4, 1, y) / ys.size();
    CHECK(empirical_risk_iid(ctx, SimplexWeights::vertex(6, 2)) == doctest::Approx(mean_j).epsilon(1e-12));
}

TEST_CASE("eqw risk exceeds the oracle minimizer") {
    const auto ctx = RiskContext::iid(six_candidates(), truth_draws(200, 11));
    const auto best = risk_minimizer_oracle(ctx, 5);
    CHECK(empirical_risk_iid(ctx, SimplexWeights::uniform(6)) > empirical_risk_iid(ctx, best));
}

TEST_CASE("dynamic risk examples") {
    const auto comps = six_candidates();
    const auto ys = truth_draws(10, 5);
    std::vector<std::vector<ComponentForecast>> per_t(ys.size(), comps);
    const auto w = SimplexWeights::uniform(6);

    const auto undiscounted = RiskContext::dynamic(per_t, ys, 1.0);
    double mean = 0;
    for (double y : ys) mean += direct_crps(comps, w.vec(), y) / ys.size();
    CHECK(empirical_risk_dynamic(undiscounted, w) == doctest::Approx(mean).epsilon(1e-8));

    for (double a : {0.5, 0.98, 1.0}) {
        const auto single = RiskContext::dynamic({comps}, {ys[0]}, a);
        CHECK(empirical_risk_dynamic(single, w) ==
              doctest::Approx(direct_crps(comps, w.vec(), ys[0])).epsilon(1e-8));
    }

    // constant per-time score s: s (1/50) sum_t 0.98^(50 - t)
    const auto terms = crps_terms_normal(comps, 3.3);
    const double s = terms.crps(w.values());
    const auto ctx = RiskContext::from_terms(RiskMode::kDynamic, std::vector<CrpsTerms>(50, terms), 0.98);
    double geo = 0;
    for (int t = 1; t <= 50; ++t) geo += std::pow(0.98, 50 - t);
    CHECK(empirical_risk_dynamic(ctx, w) == doctest::Approx(s * geo / 50).epsilon(1e-12));
}

TEST_CASE("risk errors") {
    const auto comps = six_candidates();
    const auto iid = RiskContext::iid(comps, {1.0, 2.0});
    const auto dyn = RiskContext::dynamic({comps, comps}, {1.0, 2.0});
    CHECK_THROWS_AS(empirical_risk_dynamic(iid, SimplexWeights::uniform(6)), ValidationError);
    CHECK_THROWS_AS(empirical_risk_iid(dyn, SimplexWeights::uniform(6)), ValidationError);
    CHECK_THROWS_AS(empirical_risk_iid(iid, SimplexWeights::uniform(5)), ValidationError);
    std::vector<ComponentForecast> five(comps.begin(), comps.begin() + 5);
    CHECK_THROWS_AS(RiskContext::dynamic({comps, five}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(RiskContext::dynamic({comps}, {1.0, 2.0}), ValidationError);
    CHECK_THROWS_AS(RiskContext::dynamic({comps}, {1.0}, 0.0), ValidationError);
    CHECK_THROWS_AS(RiskContext::iid(comps, {}), ValidationError);
    CHECK_THROWS_AS(RiskContext::iid({}, {1.0}), ValidationError);
}

TEST_CASE("risk is convex along simplex segments") {
    Rng rng = make_stream(8);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t c = 2 + rep % 5;
        std::vector<ComponentForecast> comps;
        for (std::size_t k = 0; k < c; ++k) comps.push_back(ComponentForecast::gaussian(8 * u(rng) - 4, 0.3 + 2 * u(rng)));
        std::vector<double> ys(1 + rep % 7);
        for (auto& y : ys) y = 8 * u(rng) - 4;
        const auto ctx = rep % 2 == 0 ? RiskContext::iid(comps, ys)
                                      : RiskContext::dynamic(std::vector(ys.size(), comps), ys, 0.9);
        const auto a = random_simplex(c, rng), b = random_simplex(c, rng);
        const double ra = ctx.risk(a), rb = ctx.risk(b);
        for (double lam = 0.1; lam < 1.0; lam += 0.1) {
            std::vector<double> m(c);
            for (std::size_t k = 0; k < c; ++k) m[k] = lam * a[k] + (1 - lam) * b[k];
            CHECK(ctx.risk(m) <= lam * ra + (1 - lam) * rb + 1e-9);
        }
    }
}

TEST_CASE("permutation behaviour") {
    const auto comps = six_candidates();
    auto ys = truth_draws(30, 21);
    const auto w = SimplexWeights({0.1, 0.3, 0.2, 0.2, 0.1, 0.1});
    const double iid = RiskContext::iid(comps, ys).risk(w.values());
    const double dyn = RiskContext::dynamic(std::vector(ys.size(), comps), ys, 0.9).risk(w.values());
    const double flat = RiskContext::dynamic(std::vector(ys.size(), comps), ys, 1.0).risk(w.values());
    std::reverse(ys.begin(), ys.end());
    CHECK(RiskContext::iid(comps, ys).risk(w.values()) == doctest::Approx(iid).epsilon(1e-13));
    CHECK(RiskContext::dynamic(std::vector(ys.size(), comps), ys, 1.0).risk(w.values()) ==
          doctest::Approx(flat).epsilon(1e-13));
    CHECK(std::abs(RiskContext::dynamic(std::vector(ys.size(), comps), ys, 0.9).risk(w.values()) - dyn) > 1e-6);
}

TEST_CASE("risk is Lipschitz in w") {
    Rng rng = make_stream(10);
    const auto comps = six_candidates();
    const auto ctx = RiskContext::iid(comps, truth_draws(40, 2));
    // a crude bound: |d risk / dw| <= max_c E|X_c - y| + max E|X_c - X_c'|
    double lip = 0;
    for (std::size_t t = 0; t < ctx.observations(); ++t) {
        lip = std::max(lip, ctx.terms_at(t).abs_to_obs.maxCoeff() + ctx.terms_at(t).cross_abs.maxCoeff());
    }
    for (int rep = 0; rep < 200; ++rep) {
        const auto a = random_simplex(6, rng), b = random_simplex(6, rng);
        double d = 0;
        for (int k = 0; k < 6; ++k) d += (a[k] - b[k]) * (a[k] - b[k]);
        CHECK(std::abs(ctx.risk(a) - ctx.risk(b)) <= lip * std::sqrt(6.0) * std::sqrt(d) + 1e-12);
    }
}

TEST_CASE("monte carlo backend matches the sample-based mixture crps") {
    Rng rng = make_stream(12);
    std::vector<ComponentForecast> comps{
        ComponentForecast::empirical(sample(ComponentForecast::gaussian(0, 1), 500, rng)),
        ComponentForecast::empirical(sample(ComponentForecast::gaussian(2, 1), 400, rng))};
    const std::vector<double> ys{0.3, 1.7, -0.4};
    const auto ctx = RiskContext::iid(comps, ys, ScoreBackend::kMonteCarlo);
    const SimplexWeights w({0.3, 0.7});
    double expect = 0;
    for (double y : ys) {
        expect += crps_mixture_mc({comps[0].as_empirical().sorted, comps[1].as_empirical().sorted}, w, y, rng) / 3;
    }
    CHECK(ctx.risk(w.values()) == doctest::Approx(expect).epsilon(1e-12));

    // Gaussian components under the MC backend approach the closed form
    const auto g = six_candidates();
    const auto ys2 = truth_draws(5, 4);
    McOptions mc;
    mc.samples = 20000;
    mc.seed = 3;
    const auto a = RiskContext::iid(g, ys2, ScoreBackend::kMonteCarlo, mc);
    const auto b = RiskContext::iid(g, ys2);
    const auto u = SimplexWeights::uniform(6);
    CHECK(std::abs(a.risk(u.values()) - b.risk(u.values())) / b.risk(u.values()) < 0.02);
}

TEST_CASE("subset keeps mode and discount") {
    const auto comps = six_candidates();
    const auto ys = truth_draws(6, 9);
    const auto ctx = RiskContext::dynamic(std::vector(ys.size(), comps), ys, 0.9);
    const std::vector<std::size_t> idx{1, 3};
    const auto sub = ctx.subset(idx);
    CHECK(sub.mode() == RiskMode::kDynamic);
    CHECK(sub.discount() == 0.9);
    CHECK(sub.observations() == 2);
    const auto direct = RiskContext::dynamic({comps, comps}, {ys[1], ys[3]}, 0.9);
    const auto w = SimplexWeights::uniform(6);
    CHECK(sub.risk(w.values()) == doctest::Approx(direct.risk(w.values())).epsilon(1e-13));
}

}

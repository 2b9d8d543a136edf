#include <doctest.h>

#include "stackgibbs/error.hpp"
#include "stackgibbs/forecast_io.hpp"
#include "support.hpp"

#include <iomanip>
#include <sstream>

using namespace sgp;

namespace {

std::filesystem::path write(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
    oracle::write_file(dir / name, text);
    return dir / name;
}

McOptions mc(std::size_t n = 4000) {
    McOptions o;
    o.samples = n;
    o.seed = 5;
    return o;
}

} // namespace

TEST_SUITE("forecast_io") {

TEST_CASE("gaussian iid set scores against the integral") {
    auto dir = oracle::temp_dir("fio");
    const auto f = write(dir, "f.csv", "component,mu,sigma\na,0,1\nb,2,0.5\n");
    const auto t = write(dir, "t.csv", "y\n0.3\n1.7\n-1\n");
    const auto set = load_forecast_set(f, t);
    CHECK(set.mode == RiskMode::kIid);
    CHECK(set.component_names == std::vector<std::string>{"a", "b"});
    CHECK(set.size() == 3);
    const auto ctx = make_risk_context(set, 0.98, mc());
    const auto rows = score_forecast_set(set, ctx, "crps", SimplexWeights({0.25, 0.75}));
    REQUIRE(rows.size() == 3 * 3);
    const std::vector<double> mus{0, 2}, sds{1, 0.5};
    for (const auto& r : rows) {
        const double y = set.observations[r.t - 1];
        double expected = 0;
        if (r.component == "pool") {
            expected = oracle::crps_integral(oracle::mixture_cdf(mus, sds, {0.25, 0.75}), y);
        } else {
            const std::size_t k = r.component == "a" ? 0 : 1;
            expected = oracle::crps_integral(oracle::mixture_cdf({mus[k]}, {sds[k]}, {1.0}), y);
        }
        CHECK(r.value == doctest::Approx(expected).epsilon(1e-8));
    }

    const auto logs = score_forecast_set(set, ctx, "logs", std::nullopt);
    CHECK(logs[0].value == doctest::Approx(-std::log(oracle::phi_pdf(0.3))));
    CHECK_THROWS_AS(score_forecast_set(set, ctx, "brier", std::nullopt), ValidationError);
    CHECK_THROWS_AS(score_forecast_set(set, ctx, "crps", SimplexWeights({1.0})), ValidationError);
}

TEST_CASE("dynamic set needs t in truth and every component per t") {
    auto dir = oracle::temp_dir("fio");
    const auto f = write(dir, "f.csv", "t,component,mu,sigma\n1,a,0,1\n1,b,1,1\n2,a,0.5,1\n2,b,1.5,1\n");
    const auto t = write(dir, "t.csv", "t,y\n1,0.2\n2,1.1\n");
    const auto set = load_forecast_set(f, t);
    CHECK(set.mode == RiskMode::kDynamic);
    CHECK(set.at(1)[0].as_gaussian().mu == 0.5);

    CHECK_THROWS_AS(load_forecast_set(f, write(dir, "noT.csv", "y\n0.2\n1.1\n")), ValidationError);
    CHECK_THROWS_AS(load_forecast_set(f, write(dir, "t3.csv", "t,y\n1,0.2\n3,1\n")), ValidationError);
    const auto gap = write(dir, "gap.csv", "t,component,mu,sigma\n1,a,0,1\n1,b,1,1\n2,a,0.5,1\n");
    CHECK_THROWS_AS(load_forecast_set(gap, t), ValidationError);
}

TEST_CASE("format errors") {
    auto dir = oracle::temp_dir("fio");
    const auto t = write(dir, "t.csv", "y\n1\n");
    CHECK_THROWS_AS(load_forecast_set(write(dir, "a.csv", "component,mean\na,1\n"), t), ValidationError);
    CHECK_THROWS_AS(load_forecast_set(write(dir, "b.csv", "component,mu,sigma\na,1,-1\n"), t), ValidationError);
    CHECK_THROWS_AS(load_forecast_set(write(dir, "c.csv", "component,mu,sigma\na,1,x\n"), t), ValidationError);
    CHECK_THROWS_AS(load_forecast_set(write(dir, "d.csv", "component,mu,sigma\na,1,1\na,2,1\n"), t),
                    ValidationError);
    CHECK_THROWS_AS(load_forecast_set(dir / "none.csv", t), IoError);
}

TEST_CASE("sample and quantile sets") {
    auto dir = oracle::temp_dir("fio");
    std::ostringstream samples;
    samples << "component,value\n";
    for (int i = 1; i <= 999; ++i) {
        const double z = oracle::phi_inv(i / 1000.0);
        samples << "a," << z << "\nb," << 1 + 2 * z << '\n';
    }
    const auto t = write(dir, "t.csv", "y\n0.5\n");
    const auto sset = load_forecast_set(write(dir, "s.csv", samples.str()), t);
    REQUIRE(sset.at(0)[0].is_empirical());
    const auto sctx = make_risk_context(sset, 1.0, mc(20000));
    const auto srows = score_forecast_set(sset, sctx, "crps", std::nullopt);
    CHECK(srows[0].value == doctest::Approx(crps_normal(0, 1, 0.5)).epsilon(0.02));

    std::ostringstream q;
    q << std::setprecision(17) << "component,quantile,value\n";
    for (double p : kFluSightProbs) q << "a," << p << ',' << oracle::phi_inv(p) << '\n';
    const auto qset = load_forecast_set(write(dir, "q.csv", q.str()), t);
    REQUIRE(qset.at(0)[0].is_piecewise());
    const auto qctx = make_risk_context(qset, 1.0, mc());
    const auto wis = score_forecast_set(qset, qctx, "wis", std::nullopt);
    std::vector<double> v;
    for (double p : kFluSightProbs) v.push_back(oracle::phi_inv(p));
    const QuantileForecast direct({kFluSightProbs.begin(), kFluSightProbs.end()}, v);
    CHECK(wis[0].value == doctest::Approx(weighted_interval_score(direct, 0.5)).epsilon(1e-12));
}

TEST_CASE("score panel loading") {
    auto dir = oracle::temp_dir("fio");
    const auto p = write(dir, "p.csv", "t,component,crps,loglik\n1,a,0.5,-1\n1,b,0.7,-inf\n2,b,0.6,-2\n2,a,0.4,-1.5\n");
    std::vector<std::string> names;
    const auto panel = load_score_panel(p, 0.9, &names);
    CHECK(names == std::vector<std::string>{"a", "b"});
    CHECK(panel.times() == 2);
    CHECK(panel.discount == 0.9);
    CHECK(panel.score(1, 0) == 0.4);
    CHECK(panel.loglik(0, 1) <= kLogLikFloor);
    CHECK_THROWS_AS(load_score_panel(write(dir, "q.csv", "t,component,crps,loglik\n1,a,0.5,-1\n1,a,1,1\n"), 1.0),
                    ValidationError);
    CHECK_THROWS_AS(load_score_panel(write(dir, "r.csv", "t,component,crps,loglik\n1,a,0.5,-1\n2,b,1,1\n"), 1.0),
                    ValidationError);
}

TEST_CASE("draws and weights round trip") {
    auto dir = oracle::temp_dir("fio");
    GibbsConfig cfg;
    const PosteriorDraws d(3, {{0.2, 0.3, 0.5, 0.1, 0.1, 0.8}, {0.6, 0.2, 0.2}}, {0.3, 0.25}, cfg);
    write_draws_csv(dir / "d.csv", d);
    const auto back = read_draws_csv(dir / "d.csv");
    CHECK(back.components() == 3);
    CHECK(back.chains() == 2);
    CHECK(back.chain_size(0) == 2);
    for (std::size_t m = 0; m < d.draws(); ++m)
        for (std::size_t c = 0; c < 3; ++c) CHECK(back.row(m)[c] == d.row(m)[c]);

    write_weights_csv(dir / "w.csv", {"x", "y"}, SimplexWeights({0.3, 0.7}));
    const auto w = read_weights_csv(dir / "w.csv", {"y", "x"});
    CHECK(w[0] == 0.7);
    CHECK(w[1] == 0.3);
    CHECK_THROWS_AS(read_weights_csv(dir / "w.csv", {"y", "z"}), ValidationError);
}

}

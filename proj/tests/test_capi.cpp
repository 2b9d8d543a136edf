// Exercises the shared library through its C header only.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stackgibbs/stackgibbs.h"
#include "support.hpp"

#include <cstring>
#include <string>
#include <vector>

namespace {

sgp_fit_options quick() {
    sgp_fit_options o;
    sgp_fit_options_default(&o);
    o.chains = 2;
    o.draws_per_chain = 3000;
    o.burn_in = 1000;
    return o;
}

} // namespace

TEST_CASE("scores and error codes") {
    double v = 0;
    REQUIRE(sgp_crps_normal(0, 1, 0, &v) == SGP_OK);
    CHECK(v == doctest::Approx(2 * oracle::phi_pdf(0) - 1 / std::sqrt(M_PI)));
    CHECK(std::strlen(sgp_last_error()) == 0);

    CHECK(sgp_crps_normal(0, -1, 0, &v) == SGP_ERR_VALIDATION);
    CHECK(std::strlen(sgp_last_error()) > 0);
    CHECK(sgp_crps_normal(0, 1, 0, nullptr) == SGP_ERR_VALIDATION);

    const double mus[] = {0, 1}, sds[] = {1, 2}, w[] = {0.5, 0.5};
    REQUIRE(sgp_crps_normal_mixture(2, mus, sds, w, 0.5, &v) == SGP_OK);
    CHECK(v == doctest::Approx(oracle::crps_integral(oracle::mixture_cdf({0, 1}, {1, 2}, {0.5, 0.5}), 0.5)));
    const double bad[] = {0.6, 0.6};
    CHECK(sgp_crps_normal_mixture(2, mus, sds, bad, 0.5, &v) == SGP_ERR_VALIDATION);

    REQUIRE(sgp_log_score(std::exp(-2.0), &v) == SGP_OK);
    CHECK(v == doctest::Approx(2.0));
    REQUIRE(sgp_interval_score(-1, 1, 0.2, 2, &v) == SGP_OK);
    CHECK(v == doctest::Approx(2 + 2 / 0.2 * 1));

    double eqw[4];
    REQUIRE(sgp_eqw_weights(4, eqw) == SGP_OK);
    for (double x : eqw) CHECK(x == 0.25);
    CHECK(sgp_eqw_weights(0, eqw) == SGP_ERR_VALIDATION);

    const double pit[] = {0.1, 0.3, 0.5, 0.7, 0.9};
    REQUIRE(sgp_uwd1(5, pit, &v) == SGP_OK);
    CHECK(v >= 0);
    CHECK(std::string(sgp_version()).size() > 0);
}

TEST_CASE("forecast sets, fitting and posteriors") {
    auto dir = oracle::temp_dir("capi");
    oracle::write_file(dir / "f.csv", "component,mu,sigma\ngood,0,1\nbad,3,1\n");
    std::string truth = "y\n";
    for (int i = 0; i < 40; ++i) truth += std::to_string(oracle::phi_inv((i + 0.5) / 40)) + "\n";
    oracle::write_file(dir / "t.csv", truth);

    sgp_forecast_set* set = nullptr;
    CHECK(sgp_forecast_set_load((dir / "nope.csv").c_str(), (dir / "t.csv").c_str(), &set) == SGP_ERR_IO);
    CHECK(set == nullptr);
    REQUIRE(sgp_forecast_set_load((dir / "f.csv").c_str(), (dir / "t.csv").c_str(), &set) == SGP_OK);
    size_t c = 0, n = 0;
    int dynamic = -1;
    REQUIRE(sgp_forecast_set_dims(set, &c, &n, &dynamic) == SGP_OK);
    CHECK(c == 2);
    CHECK(n == 40);
    CHECK(dynamic == 0);
    const char* name = nullptr;
    REQUIRE(sgp_forecast_set_component_name(set, 1, &name) == SGP_OK);
    CHECK(std::string(name) == "bad");
    CHECK(sgp_forecast_set_component_name(set, 2, &name) == SGP_ERR_VALIDATION);

    auto opt = quick();
    double w[2];
    for (const char* m : {"avs", "bma", "eqw"}) {
        REQUIRE(sgp_fit_forecast_set(set, m, &opt, w, nullptr) == SGP_OK);
        CHECK(w[0] + w[1] == doctest::Approx(1.0));
        CHECK(w[0] >= 0.5);
    }
    CHECK(sgp_fit_forecast_set(set, "median", &opt, w, nullptr) == SGP_ERR_VALIDATION);

    sgp_posterior* post = nullptr;
    REQUIRE(sgp_fit_forecast_set(set, "SGP", &opt, w, &post) == SGP_OK);
    REQUIRE(post != nullptr);
    CHECK(w[0] > 0.5);
    size_t draws = 0, comps = 0, chains = 0;
    REQUIRE(sgp_posterior_dims(post, &draws, &comps, &chains) == SGP_OK);
    CHECK(draws == 2 * 2000);
    CHECK(comps == 2);
    CHECK(chains == 2);
    double mean[2], rhat[2], ess[2], acc = 0;
    REQUIRE(sgp_posterior_mean(post, mean) == SGP_OK);
    CHECK(mean[0] == doctest::Approx(w[0]));
    REQUIRE(sgp_posterior_diagnostics(post, rhat, ess, &acc) == SGP_OK);
    CHECK(rhat[0] >= 1.0);
    CHECK(ess[0] > 0);
    CHECK(acc > 0);
    CHECK(acc < 1);

    const auto path = (dir / "draws.csv").string();
    REQUIRE(sgp_posterior_write_csv(post, path.c_str()) == SGP_OK);
    sgp_posterior* back = nullptr;
    REQUIRE(sgp_posterior_read_csv(path.c_str(), &back) == SGP_OK);
    double mean2[2];
    REQUIRE(sgp_posterior_mean(back, mean2) == SGP_OK);
    CHECK(mean2[0] == mean[0]);
    sgp_posterior_free(back);
    sgp_posterior_free(post);

    REQUIRE(sgp_forecast_set_score(set, "crps", w, &opt, (dir / "s.csv").c_str()) == SGP_OK);
    CHECK(oracle::read_file(dir / "s.csv").rfind("t,component,metric,value\n", 0) == 0);

    const double grid[] = {1, 15};
    double best = 0, cv[2];
    REQUIRE(sgp_tune_eta(set, "sgp", grid, 2, 4, &opt, &best, cv) == SGP_OK);
    CHECK((best == 1 || best == 15));
    CHECK(cv[0] > 0);

    sgp_forecast_set_free(set);
    sgp_forecast_set_free(nullptr);
}

TEST_CASE("score panels") {
    auto dir = oracle::temp_dir("capi");
    oracle::write_file(dir / "p.csv", "t,component,crps,loglik\n1,a,1,-1\n1,b,2,-3\n2,a,1,-1\n2,b,2,-3\n");
    auto opt = quick();
    opt.discount = 1.0;
    size_t c = 0;
    CHECK(sgp_fit_score_panel((dir / "p.csv").c_str(), "avs", &opt, nullptr, 0, &c) == SGP_ERR_VALIDATION);
    CHECK(c == 2);
    double w[2];
    REQUIRE(sgp_fit_score_panel((dir / "p.csv").c_str(), "avs", &opt, w, 2, &c) == SGP_OK);
    CHECK(w[0] == doctest::Approx(std::exp(-2.0) / (std::exp(-2.0) + std::exp(-4.0))));
    REQUIRE(sgp_fit_score_panel((dir / "p.csv").c_str(), "bma", &opt, w, 2, &c) == SGP_OK);
    CHECK(w[0] == doctest::Approx(1 / (1 + std::exp(-4.0))));
    CHECK(sgp_fit_score_panel((dir / "p.csv").c_str(), "sgp", &opt, w, 2, &c) == SGP_ERR_VALIDATION);
}

TEST_CASE("studies and the hub pipeline") {
    auto dir = oracle::temp_dir("capi");
    const char* keys[] = {"replicates", "sample_sizes", "eval_draws", "draws", "burn_in"};
    const char* vals[] = {"1", "10,20", "100", "1500", "500"};
    const auto l = (dir / "l.csv").string(), s = (dir / "s.csv").string();
    REQUIRE(sgp_run_study("iid", "sgp,eqw", keys, vals, 5, 3, 1, l.c_str(), s.c_str()) == SGP_OK);
    CHECK(oracle::read_file(l).rfind("study,method,replicate,t,metric,value\n", 0) == 0);
    CHECK(oracle::read_file(s).rfind("study,method,t,metric,count,mean,median\n", 0) == 0);

    const char* unknown[] = {"replicatez"};
    const char* one[] = {"1"};
    CHECK(sgp_run_study("iid", "eqw", unknown, one, 1, 3, 1, l.c_str(), s.c_str()) == SGP_ERR_VALIDATION);
    CHECK(std::string(sgp_last_error()).find("replicatez") != std::string::npos);
    const char* rep[] = {"replicates"};
    const char* notnum[] = {"two"};
    CHECK(sgp_run_study("iid", "eqw", rep, notnum, 1, 3, 1, l.c_str(), s.c_str()) == SGP_ERR_VALIDATION);
    CHECK(sgp_run_study("weekly", "eqw", nullptr, nullptr, 0, 3, 1, l.c_str(), s.c_str()) == SGP_ERR_VALIDATION);

    const char* hk[] = {"teams", "good_teams", "locations", "weeks"};
    const char* hv[] = {"3", "1", "1", "4"};
    const auto h = (dir / "h.csv").string(), t = (dir / "t.csv").string();
    REQUIRE(sgp_write_synthetic_hub(hk, hv, 4, 9, h.c_str(), t.c_str()) == SGP_OK);
    const char* pk[] = {"mc_samples", "draws", "burn_in"};
    const char* pv[] = {"500", "1500", "500"};
    const auto out = (dir / "hub").string();
    REQUIRE(sgp_run_hub(h.c_str(), t.c_str(), "sgp,eqw", pk, pv, 3, 9, 1, out.c_str()) == SGP_OK);
    CHECK(std::filesystem::exists(dir / "hub" / "hub_scores.csv"));
    CHECK(sgp_run_hub((dir / "x.csv").c_str(), t.c_str(), "", nullptr, nullptr, 0, 9, 1, out.c_str()) == SGP_ERR_IO);
}

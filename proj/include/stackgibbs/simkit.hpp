#pragma once

#include "stackgibbs/distributions.hpp"
#include "stackgibbs/ensemble.hpp"
#include "stackgibbs/hub.hpp"
#include "stackgibbs/random.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sgp {

/// Truth nu N(3,1) + (1-nu) N(6.5,1) against fixed N(m,1) candidates.
struct IidStudyConfig {
    double nu = 0.65;
    std::array<double, 2> comp_means{3.0, 6.5};
    std::array<double, 2> comp_sds{1.0, 1.0};
    std::vector<double> candidate_means{0, 2, 4, 6, 8, 10};
    double candidate_sd = 1.0;
    std::vector<std::size_t> sample_sizes{10, 20, 50, 100, 200};
    int replicates = 50;
    std::size_t eval_draws = 1000;
    std::uint64_t seed = 1;

    void validate() const;
    std::vector<ComponentForecast> candidates() const;
};

/// Two-component mixture whose weights follow a softmax random walk.
struct DynamicStudyConfig {
    int T = 50;
    double sigma2 = 0.01;
    std::array<double, 2> w_init{0.65, 0.35};
    std::array<double, 2> comp_means{3.0, 6.5};
    std::array<double, 2> comp_sds{1.0, 1.0};
    std::vector<double> candidate_means{0, 2, 4, 6, 8, 10};
    double candidate_sd = 1.0;
    int replicates = 50;
    std::uint64_t seed = 1;

    void validate() const;
    std::vector<ComponentForecast> candidates() const;
};

struct SirStudyConfig {
    int population = 10000;
    double beta = 0.6;          ///< per week
    double gamma = 0.2;         ///< per week
    int initial_infected = 10;
    int weeks = 35;
    int fit_start_week = 5;
    int replicates = 200;
    double tau_step = 0.01;     ///< weeks
    bool exact = false;         ///< Gillespie instead of tau-leaping
    std::size_t forecast_draws = 10000;
    std::uint64_t seed = 1;

    void validate() const;
};

std::vector<double> gen_iid_mixture(const IidStudyConfig& cfg, std::size_t n, Rng& rng);

struct DynamicPath {
    std::vector<double> y;
    std::vector<std::array<double, 2>> weights; ///< row t = mixture weights at t
};

DynamicPath gen_dynamic_mixture(const DynamicStudyConfig& cfg, Rng& rng);

/// Compartments at week boundaries; index 0 is the initial state.
struct SirTrajectory {
    std::vector<int> susceptible, infected, recovered;
    /// Infected counts at the end of weeks 1..W.
    std::vector<double> weekly_infected() const;
};

SirTrajectory gen_sir(const SirStudyConfig& cfg, Rng& rng);

/// Four one-week-ahead sample forecasts (`draws` each, clamped at zero):
/// least-squares SIR ODE fit with Gaussian noise, AR(1) on log(x+1),
/// random walk with drift on log(x+1), and a mean model.
std::vector<ComponentForecast> fit_sir_components(std::span<const double> history, int population,
                                                  Rng& rng, std::size_t draws = 10000);

/// Synthetic forecast-hub archive: `good_teams` teams are centred near the
/// truth with modest spread, the others are biased and either over- or
/// under-dispersed.
struct SyntheticHubConfig {
    int teams = 10;
    int good_teams = 3;
    int locations = 3;
    int weeks = 20;
    std::string first_reference_date = "2023-10-14";
    std::uint64_t seed = 1;
};

struct SyntheticHub {
    std::vector<HubRecord> records;
    std::vector<TruthRecord> truth;
    std::vector<std::string> good_team_names;
};

SyntheticHub gen_synthetic_hub(const SyntheticHubConfig& cfg);

// ---- study drivers ----

enum class StudyKind { kIid, kDynamic, kSir };

StudyKind parse_study(std::string_view name);
std::string_view study_name(StudyKind k);

struct StudyOptions {
    std::vector<Method> methods{Method::kSgp, Method::kAvs, Method::kBma, Method::kEqw};
    MethodSettings settings; ///< eta and sampler settings; see default_study_options
    double discount = 0.98;  ///< dynamic and SIR studies
    std::size_t threads = 0;
};

/// Per-study defaults: eta 15 for the iid and dynamic studies, eta 1 for SIR.
StudyOptions default_study_options(StudyKind k);

/// t = -1 marks replicate-level metrics (reported as "all").
struct StudyRow {
    std::string method;
    int replicate;
    long t;
    std::string metric;
    double value;
};

struct SummaryRow {
    std::string method;
    long t; ///< -1 = pooled over all times
    std::string metric;
    std::size_t count;
    double mean, median;
};

struct StudyReport {
    std::string study;
    std::vector<StudyRow> rows;

    std::vector<SummaryRow> summarize() const;
};

StudyReport run_iid_study(const IidStudyConfig& cfg, const StudyOptions& opt);
StudyReport run_dynamic_study(const DynamicStudyConfig& cfg, const StudyOptions& opt);
StudyReport run_sir_study(const SirStudyConfig& cfg, const StudyOptions& opt);

void write_study_csv(const StudyReport& r, const std::filesystem::path& path);
void write_summary_csv(const StudyReport& r, const std::filesystem::path& path);

} // namespace sgp

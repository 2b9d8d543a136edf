#pragma once

#include "stackgibbs/ensemble.hpp"
#include "stackgibbs/scoring.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace sgp {

/// One submitted quantile: P(Y < value) = prob for (team, location, week, horizon).
struct HubRecord {
    std::string team;
    std::string location;
    std::string reference_date; ///< ISO yyyy-mm-dd
    int horizon = 1;
    double prob = 0.5;
    double value = 0.0;
};

struct TruthRecord {
    std::string location;
    std::string date; ///< ISO yyyy-mm-dd
    double value = 0.0;
};

/// Reads team, location, reference_date, horizon, output_type_id, value.
/// When an output_type column is present only "quantile" rows are kept.
/// Every (team, location, reference_date, horizon) block must carry exactly
/// the configured probabilities with values nondecreasing in prob.
std::vector<HubRecord> parse_hub_csv(const std::filesystem::path& path,
                                     std::span<const double> probs = kFluSightProbs);
/// Columns location, date, value.
std::vector<TruthRecord> parse_truth_csv(const std::filesystem::path& path);

void write_hub_csv(const std::filesystem::path& path, std::span<const HubRecord> records);
void write_truth_csv(const std::filesystem::path& path, std::span<const TruthRecord> truth);

/// Teams with a full quantile set for every listed week at this location and horizon.
std::vector<std::string> filter_complete_teams(std::span<const HubRecord> records,
                                               std::span<const std::string> weeks,
                                               const std::string& location, int horizon = 1,
                                               std::span<const double> probs = kFluSightProbs);

/// Adds whole days to an ISO date.
std::string add_days(const std::string& iso_date, int days);

struct HubConfig {
    HubConfig() { methods_settings.sgp.eta = 15.0; }

    MethodSettings methods_settings;
    std::vector<Method> methods{Method::kSgp, Method::kAvs, Method::kBma, Method::kEqw};
    double discount = 0.98;
    int horizon = 1;
    std::size_t mc_samples = 10000; ///< inverse-CDF draws per team and week
    std::uint64_t seed = 1;
    std::size_t threads = 0;        ///< 0 = hardware count
    std::vector<double> probs{kFluSightProbs.begin(), kFluSightProbs.end()};
};

struct HubScoreRow {
    std::string location, reference_date, target_date, method;
    double crps_log; ///< CRPS of the pool on the log(value + 1) scale
    double wis;      ///< WIS of the weighted quantile average, raw scale
};

struct HubWeightRow {
    std::string location, reference_date, method, team;
    double weight;
};

/// Mean over scored weeks (by location) or over locations (by week).
struct HubMeanRow {
    std::string key, method;
    std::size_t count;
    double mean_crps_log, mean_wis;
    int rank; ///< 1 = lowest mean CRPS among methods for this key
};

struct HubRankCount {
    std::string by; ///< "location" or "week"
    std::string method;
    int rank;
    std::size_t count;
};

struct HubReport {
    std::vector<HubScoreRow> scores;
    std::vector<HubWeightRow> weights;
    std::vector<HubMeanRow> location_means;
    std::vector<HubMeanRow> week_means;
    std::vector<HubRankCount> rank_counts;
    std::vector<std::string> notices;
};

/// Weekly dynamic ensembles per location. The first week of each location uses
/// equal weights for every method; weeks 2..W are scored.
HubReport run_hub_pipeline(std::span<const HubRecord> records, std::span<const TruthRecord> truth,
                           const HubConfig& cfg);

/// hub_scores.csv, hub_weights.csv, hub_location_means.csv, hub_week_means.csv,
/// hub_rank_counts.csv, hub_notices.txt.
std::vector<std::filesystem::path> write_hub_report(const HubReport& report,
                                                    const std::filesystem::path& dir);

} // namespace sgp

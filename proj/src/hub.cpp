#include "stackgibbs/hub.hpp"

#include "stackgibbs/csv.hpp"
#include "stackgibbs/error.hpp"

#include "parallel.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <numeric>
#include <optional>
#include <set>
#include <sstream>
#include <tuple>

namespace sgp {

using detail::require;

std::string add_days(const std::string& iso_date, int days) {
    int y = 0;
    unsigned m = 0, d = 0;
    char extra = 0;
    if (std::sscanf(iso_date.c_str(), "%d-%u-%u%c", &y, &m, &d, &extra) != 3) {
        throw ValidationError("invalid date '" + iso_date + "'");
    }
    const std::chrono::year_month_day ymd{std::chrono::year{y}, std::chrono::month{m},
                                          std::chrono::day{d}};
    require(ymd.ok(), "invalid date '" + iso_date + "'");
    const std::chrono::year_month_day out{std::chrono::sys_days{ymd} + std::chrono::days{days}};
    char buf[16];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(out.year()),
                  static_cast<unsigned>(out.month()), static_cast<unsigned>(out.day()));
    return buf;
}

namespace {

bool prob_matches(double a, double b) { return std::abs(a - b) <= 1e-9; }

std::string block_name(const HubRecord& r) {
    std::ostringstream os;
    os << r.team << '/' << r.location << '/' << r.reference_date << "/h" << r.horizon;
    return os.str();
}

using BlockKey = std::tuple<std::string, std::string, std::string, int>;

} // namespace

std::vector<HubRecord> parse_hub_csv(const std::filesystem::path& path, std::span<const double> probs) {
    const auto t = csv::read(path);
    const auto c_team = t.column("team");
    const auto c_loc = t.column("location");
    const auto c_ref = t.column("reference_date");
    const auto c_h = t.column("horizon");
    const auto c_p = t.column("output_type_id");
    const auto c_v = t.column("value");
    const auto c_type = t.find("output_type");

    std::vector<HubRecord> out;
    std::map<BlockKey, std::vector<std::pair<std::size_t, std::size_t>>> blocks; // (file row, record)
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        if (c_type && row[*c_type] != "quantile") {
            continue;
        }
        HubRecord r;
        r.team = row[c_team];
        r.location = row[c_loc];
        r.reference_date = row[c_ref];
        add_days(r.reference_date, 0); // validates
        r.horizon = static_cast<int>(csv::to_long(row[c_h], t, i));
        r.prob = csv::to_double(row[c_p], t, i);
        r.value = csv::to_double(row[c_v], t, i);
        const std::string where = path.string() + " row " + std::to_string(i + 2);
        require(r.horizon >= 0, where + ": negative horizon");
        require(r.prob > 0.0 && r.prob < 1.0, where + ": probability outside (0,1)");
        require(std::isfinite(r.value) && r.value >= 0.0, where + ": value must be finite and nonnegative");
        blocks[{r.team, r.location, r.reference_date, r.horizon}].push_back({i + 2, out.size()});
        out.push_back(std::move(r));
    }
    for (auto& [key, members] : blocks) {
        std::sort(members.begin(), members.end(), [&](auto& a, auto& b) {
            return out[a.second].prob < out[b.second].prob;
        });
        const std::string name = block_name(out[members.front().second]);
        if (members.size() != probs.size()) {
            throw ValidationError(path.string() + ": forecast " + name + " has " +
                                  std::to_string(members.size()) + " quantiles, expected " +
                                  std::to_string(probs.size()) + " (first row " +
                                  std::to_string(members.front().first) + ")");
        }
        for (std::size_t k = 0; k < members.size(); ++k) {
            const auto& r = out[members[k].second];
            if (!prob_matches(r.prob, probs[k])) {
                throw ValidationError(path.string() + " row " + std::to_string(members[k].first) +
                                      ": unexpected probability " + csv::format(r.prob) +
                                      " in forecast " + name);
            }
            if (k > 0 && r.value < out[members[k - 1].second].value) {
                throw ValidationError(path.string() + " row " + std::to_string(members[k].first) +
                                      ": quantile values decrease in forecast " + name);
            }
        }
    }
    return out;
}

std::vector<TruthRecord> parse_truth_csv(const std::filesystem::path& path) {
    const auto t = csv::read(path);
    const auto c_loc = t.column("location");
    const auto c_date = t.column("date");
    const auto c_v = t.column("value");
    std::vector<TruthRecord> out;
    std::set<std::pair<std::string, std::string>> seen;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        TruthRecord r{t.rows[i][c_loc], t.rows[i][c_date], csv::to_double(t.rows[i][c_v], t, i)};
        add_days(r.date, 0);
        const std::string where = path.string() + " row " + std::to_string(i + 2);
        require(std::isfinite(r.value) && r.value >= 0.0, where + ": value must be finite and nonnegative");
        require(seen.insert({r.location, r.date}).second, where + ": duplicate (location, date)");
        out.push_back(std::move(r));
    }
    return out;
}

void write_hub_csv(const std::filesystem::path& path, std::span<const HubRecord> records) {
    csv::Writer w(path);
    w.row({"team", "location", "reference_date", "horizon", "output_type", "output_type_id", "value"});
    for (const auto& r : records) {
        w.row({r.team, r.location, r.reference_date, std::to_string(r.horizon), "quantile",
               csv::format(r.prob), csv::format(r.value)});
    }
}

void write_truth_csv(const std::filesystem::path& path, std::span<const TruthRecord> truth) {
    csv::Writer w(path);
    w.row({"location", "date", "value"});
    for (const auto& r : truth) {
        w.row({r.location, r.date, csv::format(r.value)});
    }
}

namespace {

/// Quantile sets keyed by (team, reference_date) for one location and horizon.
using QuantileIndex = std::map<std::pair<std::string, std::string>, std::vector<std::pair<double, double>>>;

QuantileIndex index_location(std::span<const HubRecord> records, const std::string& location,
                             int horizon) {
    QuantileIndex idx;
    for (const auto& r : records) {
        if (r.location == location && r.horizon == horizon) {
            idx[{r.team, r.reference_date}].push_back({r.prob, r.value});
        }
    }
    for (auto& [k, v] : idx) {
        std::sort(v.begin(), v.end());
    }
    return idx;
}

bool complete(const std::vector<std::pair<double, double>>& q, std::span<const double> probs) {
    if (q.size() != probs.size()) {
        return false;
    }
    for (std::size_t k = 0; k < q.size(); ++k) {
        if (!prob_matches(q[k].first, probs[k])) {
            return false;
        }
    }
    return true;
}

} // namespace

std::vector<std::string> filter_complete_teams(std::span<const HubRecord> records,
                                               std::span<const std::string> weeks,
                                               const std::string& location, int horizon,
                                               std::span<const double> probs) {
    require(!weeks.empty(), "week list must be nonempty");
    const auto idx = index_location(records, location, horizon);
    std::set<std::string> teams;
    for (const auto& [k, v] : idx) {
        teams.insert(k.first);
    }
    std::vector<std::string> out;
    for (const auto& team : teams) {
        bool ok = true;
        for (const auto& w : weeks) {
            auto it = idx.find({team, w});
            if (it == idx.end() || !complete(it->second, probs)) {
                ok = false;
                break;
            }
        }
        if (ok) {
            out.push_back(team);
        }
    }
    return out;
}

namespace {

struct LocationResult {
    std::vector<HubScoreRow> scores;
    std::vector<HubWeightRow> weights;
    std::vector<std::string> notices;
};

LocationResult run_location(std::span<const HubRecord> records,
                            const std::map<std::pair<std::string, std::string>, double>& truth,
                            const std::string& location, const HubConfig& cfg) {
    LocationResult res;
    const auto idx = index_location(records, location, cfg.horizon);
    std::set<std::string> week_set;
    for (const auto& [k, v] : idx) {
        week_set.insert(k.second);
    }
    const std::vector<std::string> weeks(week_set.begin(), week_set.end());
    if (weeks.empty()) {
        res.notices.push_back("location " + location + ": no forecasts at horizon " +
                              std::to_string(cfg.horizon) + ", skipped");
        return res;
    }
    const auto teams = filter_complete_teams(records, weeks, location, cfg.horizon, cfg.probs);
    if (teams.empty()) {
        res.notices.push_back("location " + location + ": no team submitted every week, skipped");
        return res;
    }
    const std::size_t c = teams.size();
    std::vector<CrpsTerms> hist_terms;
    std::vector<std::vector<double>> hist_ll, hist_score;
    const std::uint64_t loc_key = stable_hash(location);

    for (std::size_t wk = 0; wk < weeks.size(); ++wk) {
        const auto& ref = weeks[wk];
        const std::string target = add_days(ref, 7 * cfg.horizon);
        std::vector<ComponentForecast> comps;
        std::vector<std::vector<double>> raw_q;
        std::vector<std::vector<double>> samples;
        for (const auto& team : teams) {
            const auto& q = idx.at({team, ref});
            std::vector<double> probs, logq, raw;
            for (const auto& [p, v] : q) {
                probs.push_back(p);
                logq.push_back(std::log1p(v));
                raw.push_back(v);
            }
            comps.push_back(quantiles_to_piecewise_cdf(std::move(probs), std::move(logq)));
            Rng rng = make_stream(cfg.seed, {loc_key, stable_hash(ref), stable_hash(team)});
            samples.push_back(comps.back().sample(cfg.mc_samples, rng));
            raw_q.push_back(std::move(raw));
        }

        ModelEvidencePanel panel;
        const auto n_hist = static_cast<Eigen::Index>(hist_terms.size());
        panel.loglik.resize(n_hist, static_cast<Eigen::Index>(c));
        panel.score.resize(n_hist, static_cast<Eigen::Index>(c));
        for (Eigen::Index t = 0; t < n_hist; ++t) {
            for (std::size_t k = 0; k < c; ++k) {
                panel.loglik(t, static_cast<Eigen::Index>(k)) = hist_ll[t][k];
                panel.score(t, static_cast<Eigen::Index>(k)) = hist_score[t][k];
            }
        }
        panel.discount = cfg.discount;
        std::optional<RiskContext> ctx;
        if (!hist_terms.empty()) {
            ctx = RiskContext::from_terms(RiskMode::kDynamic, hist_terms, cfg.discount);
        }

        std::vector<SimplexWeights> weights;
        for (Method m : cfg.methods) {
            MethodSettings s = cfg.methods_settings;
            s.sgp.seed = make_stream(cfg.seed, {loc_key, stable_hash(ref), 0x5347,
                                                static_cast<std::uint64_t>(m)})();
            weights.push_back(ctx ? fit_method(m, *ctx, panel, s) : eqw_weights(c));
            for (std::size_t k = 0; k < c; ++k) {
                res.weights.push_back({location, ref, std::string(method_name(m)), teams[k],
                                       weights.back()[k]});
            }
        }

        auto truth_it = truth.find({location, target});
        if (truth_it == truth.end()) {
            res.notices.push_back("location " + location + " week " + ref + ": truth for " + target +
                                  " missing, week skipped");
            continue;
        }
        const double y_raw = truth_it->second;
        const double y = std::log1p(y_raw);
        const auto mterms = MixtureCrpsTerms::from_samples(samples);
        CrpsTerms terms = crps_terms_from(mterms, y);

        if (wk > 0) {
            for (std::size_t mi = 0; mi < cfg.methods.size(); ++mi) {
                const auto& w = weights[mi];
                std::vector<double> avg(cfg.probs.size(), 0.0);
                for (std::size_t k = 0; k < c; ++k) {
                    for (std::size_t j = 0; j < avg.size(); ++j) {
                        avg[j] += w[k] * raw_q[k][j];
                    }
                }
                for (std::size_t j = 1; j < avg.size(); ++j) {
                    avg[j] = std::max(avg[j], avg[j - 1]); // guard round-off
                }
                const QuantileForecast qf(cfg.probs, avg);
                res.scores.push_back({location, ref, target, std::string(method_name(cfg.methods[mi])),
                                      terms.crps(w.values()), weighted_interval_score(qf, y_raw)});
            }
        }

        std::vector<double> ll(c), sc(c);
        for (std::size_t k = 0; k < c; ++k) {
            const double p = comps[k].pdf(y);
            ll[k] = p > 0.0 ? std::max(std::log(p), kLogLikFloor) : kLogLikFloor;
            sc[k] = terms.component_crps(k);
        }
        hist_terms.push_back(std::move(terms));
        hist_ll.push_back(std::move(ll));
        hist_score.push_back(std::move(sc));
    }
    return res;
}

/// Means per key with ordinal ranks (ties keep method order).
std::vector<HubMeanRow> means_by(const std::vector<HubScoreRow>& scores,
                                 const std::vector<Method>& methods, bool by_location) {
    std::map<std::string, std::map<std::string, std::tuple<std::size_t, double, double>>> acc;
    for (const auto& s : scores) {
        auto& a = acc[by_location ? s.location : s.reference_date][s.method];
        std::get<0>(a) += 1;
        std::get<1>(a) += s.crps_log;
        std::get<2>(a) += s.wis;
    }
    std::vector<HubMeanRow> out;
    for (auto& [key, per_method] : acc) {
        std::vector<HubMeanRow> rows;
        for (Method m : methods) {
            auto it = per_method.find(std::string(method_name(m)));
            if (it == per_method.end()) {
                continue;
            }
            const auto& [n, crps, wis] = it->second;
            rows.push_back({key, it->first, n, crps / n, wis / n, 0});
        }
        std::vector<std::size_t> order(rows.size());
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return rows[a].mean_crps_log < rows[b].mean_crps_log;
        });
        for (std::size_t k = 0; k < order.size(); ++k) {
            rows[order[k]].rank = static_cast<int>(k + 1);
        }
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

void count_ranks(const std::vector<HubMeanRow>& means, const std::string& by,
                 const std::vector<Method>& methods, std::vector<HubRankCount>& out) {
    for (Method m : methods) {
        const std::string name(method_name(m));
        for (int rank = 1; rank <= static_cast<int>(methods.size()); ++rank) {
            std::size_t n = 0;
            for (const auto& row : means) {
                n += row.method == name && row.rank == rank;
            }
            out.push_back({by, name, rank, n});
        }
    }
}

} // namespace

HubReport run_hub_pipeline(std::span<const HubRecord> records, std::span<const TruthRecord> truth,
                           const HubConfig& cfg) {
    require(!cfg.methods.empty(), "no methods selected");
    require(cfg.discount > 0.0 && cfg.discount <= 1.0, "discount must lie in (0,1]");
    require(cfg.mc_samples >= 2, "mc_samples must be >= 2");
    require(cfg.horizon >= 0, "horizon must be nonnegative");
    std::map<std::pair<std::string, std::string>, double> truth_map;
    for (const auto& t : truth) {
        truth_map[{t.location, t.date}] = t.value;
    }
    std::set<std::string> loc_set;
    for (const auto& r : records) {
        loc_set.insert(r.location);
    }
    const std::vector<std::string> locations(loc_set.begin(), loc_set.end());
    std::vector<LocationResult> per_loc(locations.size());
    detail::parallel_for(locations.size(), cfg.threads, [&](std::size_t i) {
        per_loc[i] = run_location(records, truth_map, locations[i], cfg);
    });

    HubReport rep;
    for (auto& r : per_loc) {
        rep.scores.insert(rep.scores.end(), r.scores.begin(), r.scores.end());
        rep.weights.insert(rep.weights.end(), r.weights.begin(), r.weights.end());
        rep.notices.insert(rep.notices.end(), r.notices.begin(), r.notices.end());
    }
    rep.location_means = means_by(rep.scores, cfg.methods, true);
    rep.week_means = means_by(rep.scores, cfg.methods, false);
    count_ranks(rep.location_means, "location", cfg.methods, rep.rank_counts);
    count_ranks(rep.week_means, "week", cfg.methods, rep.rank_counts);
    return rep;
}

std::vector<std::filesystem::path> write_hub_report(const HubReport& report,
                                                    const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) {
        throw IoError("cannot create " + dir.string() + ": " + ec.message());
    }
    std::vector<std::filesystem::path> paths;
    {
        paths.push_back(dir / "hub_scores.csv");
        csv::Writer w(paths.back());
        w.row({"location", "reference_date", "target_date", "method", "crps_log", "wis"});
        for (const auto& s : report.scores) {
            w.row({s.location, s.reference_date, s.target_date, s.method, csv::format(s.crps_log),
                   csv::format(s.wis)});
        }
    }
    {
        paths.push_back(dir / "hub_weights.csv");
        csv::Writer w(paths.back());
        w.row({"location", "reference_date", "method", "team", "weight"});
        for (const auto& s : report.weights) {
            w.row({s.location, s.reference_date, s.method, s.team, csv::format(s.weight)});
        }
    }
    auto write_means = [&](const std::vector<HubMeanRow>& rows, const char* name, const char* key) {
        paths.push_back(dir / name);
        csv::Writer w(paths.back());
        w.row({key, "method", "count", "mean_crps_log", "mean_wis", "rank"});
        for (const auto& s : rows) {
            w.row({s.key, s.method, std::to_string(s.count), csv::format(s.mean_crps_log),
                   csv::format(s.mean_wis), std::to_string(s.rank)});
        }
    };
    write_means(report.location_means, "hub_location_means.csv", "location");
    write_means(report.week_means, "hub_week_means.csv", "reference_date");
    {
        paths.push_back(dir / "hub_rank_counts.csv");
        csv::Writer w(paths.back());
        w.row({"by", "method", "rank", "count"});
        for (const auto& s : report.rank_counts) {
            w.row({s.by, s.method, std::to_string(s.rank), std::to_string(s.count)});
        }
    }
    {
        paths.push_back(dir / "hub_notices.txt");
        std::ofstream out(paths.back());
        if (!out) {
            throw IoError("cannot write " + paths.back().string());
        }
        for (const auto& n : report.notices) {
            out << n << '\n';
        }
    }
    return paths;
}

} // namespace sgp

#include "stackgibbs/scoring.hpp"

#include "stackgibbs/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sgp {

namespace {

const double kInvSqrtPi = 1.0 / std::sqrt(M_PI);

// sum_{i,j} |a_i - b_j| for sorted a, b via a single merge pass.
double sum_abs_pairs(const std::vector<double>& a, const std::vector<double>& b,
                     const std::vector<double>& prefix_b) {
    const double total_b = prefix_b.back();
    const auto m = b.size();
    std::size_t k = 0;
    double acc = 0.0;
    for (double x : a) {
        while (k < m && b[k] <= x) {
            ++k;
        }
        const double below = prefix_b[k];
        acc += x * static_cast<double>(k) - below + (total_b - below) -
               x * static_cast<double>(m - k);
    }
    return acc;
}

std::vector<double> prefix_sums(const std::vector<double>& s) {
    std::vector<double> p(s.size() + 1, 0.0);
    for (std::size_t i = 0; i < s.size(); ++i) {
        p[i + 1] = p[i] + s[i];
    }
    return p;
}

} // namespace

double expected_abs_normal(double m, double s) {
    if (s <= 0.0) {
        return std::abs(m);
    }
    const double z = m / s;
    return m * (2.0 * normal_cdf(z) - 1.0) + 2.0 * s * normal_pdf(z);
}

double crps_normal(double mu, double sigma, double y) {
    detail::require(sigma > 0.0 && std::isfinite(sigma), "crps_normal: sigma must be positive");
    const double z = (y - mu) / sigma;
    return sigma * (z * (2.0 * normal_cdf(z) - 1.0) + 2.0 * normal_pdf(z) - kInvSqrtPi);
}

double crps_normal_mixture(std::span<const double> mus, std::span<const double> sigmas,
                           const SimplexWeights& w, double y) {
    detail::require(mus.size() == sigmas.size() && mus.size() == w.size(),
                    "crps_normal_mixture: dimension mismatch");
    for (double s : sigmas) {
        detail::require(s > 0.0 && std::isfinite(s), "crps_normal_mixture: sigma must be positive");
    }
    const std::size_t c = mus.size();
    double linear = 0.0;
    double quad = 0.0;
    for (std::size_t i = 0; i < c; ++i) {
        if (w[i] == 0.0) {
            continue;
        }
        linear += w[i] * expected_abs_normal(y - mus[i], sigmas[i]);
        for (std::size_t j = 0; j < c; ++j) {
            if (w[j] == 0.0) {
                continue;
            }
            const double s = std::sqrt(sigmas[i] * sigmas[i] + sigmas[j] * sigmas[j]);
            quad += w[i] * w[j] * expected_abs_normal(mus[i] - mus[j], s);
        }
    }
    return std::max(0.0, linear - 0.5 * quad);
}

double crps_numeric(const std::function<double(double)>& cdf, double y, double lo, double hi,
                    std::size_t n_grid) {
    detail::require(lo < y && y < hi, "crps_numeric: need lo < y < hi");
    detail::require(n_grid >= 1000, "crps_numeric: n_grid must be at least 1000");
    if (cdf(lo) >= 1e-8 || 1.0 - cdf(hi) >= 1e-8) {
        throw ValidationError("crps_numeric: truncation bounds leave CDF mass outside [lo, hi]");
    }
    // The indicator jumps at y, so integrate [lo, y] and [y, hi] separately.
    // The left piece takes P(y-) at its right end.
    auto integrate = [&cdf](double a, double b, std::size_t n, bool above) {
        const double h = (b - a) / static_cast<double>(n);
        const double target = above ? 1.0 : 0.0;
        auto f = [&](double x) {
            const double d = cdf(x) - target;
            return d * d;
        };
        const double b_val = above ? f(b) : [&] {
            const double d = cdf(std::nextafter(b, a)) - target;
            return d * d;
        }();
        double acc = 0.5 * (f(a) + b_val);
        for (std::size_t i = 1; i < n; ++i) {
            acc += f(a + h * static_cast<double>(i));
        }
        return acc * h;
    };
    const double frac = (y - lo) / (hi - lo);
    const auto n_left = std::clamp<std::size_t>(static_cast<std::size_t>(frac * static_cast<double>(n_grid)), 1, n_grid - 1);
    const auto n_right = n_grid - n_left;
    return integrate(lo, y, n_left, false) + integrate(y, hi, n_right, true);
}

// --- MixtureCrpsTerms -----------------------------------------------------------

MixtureCrpsTerms MixtureCrpsTerms::from_samples(std::vector<std::vector<double>> samples,
                                                CrossTermEstimator estimator, Rng* rng) {
    detail::require(!samples.empty(), "mixture CRPS needs at least one component");
    for (const auto& s : samples) {
        detail::require(s.size() >= 2, "each component needs at least 2 samples");
    }
    detail::require(estimator == CrossTermEstimator::kAllPairs || rng != nullptr,
                    "permuted-pair estimator requires a random source");
    MixtureCrpsTerms t;
    const std::size_t c = samples.size();
    t.cross_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(c));

    if (estimator == CrossTermEstimator::kPermutedPairs) {
        std::vector<std::vector<double>> perm(samples);
        for (auto& p : perm) {
            std::shuffle(p.begin(), p.end(), *rng);
        }
        for (std::size_t i = 0; i < c; ++i) {
            // diagonal: consecutive elements of a second permutation, never self-paired
            std::vector<double> d(samples[i]);
            std::shuffle(d.begin(), d.end(), *rng);
            double acc = 0.0;
            for (std::size_t k = 0; k < d.size(); ++k) {
                acc += std::abs(d[k] - d[(k + 1) % d.size()]);
            }
            t.cross_(i, i) = acc / static_cast<double>(d.size());
            for (std::size_t j = i + 1; j < c; ++j) {
                const std::size_t n = std::min(perm[i].size(), perm[j].size());
                double s = 0.0;
                for (std::size_t k = 0; k < n; ++k) {
                    s += std::abs(perm[i][k] - perm[j][k]);
                }
                t.cross_(i, j) = t.cross_(j, i) = s / static_cast<double>(n);
            }
        }
    }

    for (auto& s : samples) {
        std::sort(s.begin(), s.end());
        t.prefix_.push_back(prefix_sums(s));
    }
    t.sorted_ = std::move(samples);

    if (estimator == CrossTermEstimator::kAllPairs) {
        for (std::size_t i = 0; i < c; ++i) {
            for (std::size_t j = i; j < c; ++j) {
                const double total = sum_abs_pairs(t.sorted_[i], t.sorted_[j], t.prefix_[j]);
                const double mean = total / (static_cast<double>(t.sorted_[i].size()) *
                                             static_cast<double>(t.sorted_[j].size()));
                t.cross_(i, j) = t.cross_(j, i) = mean;
            }
        }
    }
    return t;
}

Eigen::VectorXd MixtureCrpsTerms::abs_to_obs(double y) const {
    Eigen::VectorXd out(static_cast<Eigen::Index>(sorted_.size()));
    for (std::size_t c = 0; c < sorted_.size(); ++c) {
        const auto& s = sorted_[c];
        const auto& p = prefix_[c];
        const auto k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), y) - s.begin());
        const double below = p[k];
        const double above = p.back() - below;
        const double sum = y * static_cast<double>(k) - below + above -
                           y * static_cast<double>(s.size() - k);
        out(static_cast<Eigen::Index>(c)) = sum / static_cast<double>(s.size());
    }
    return out;
}

double MixtureCrpsTerms::crps(std::span<const double> w, double y) const {
    detail::require(w.size() == sorted_.size(), "weight length differs from component count");
    const Eigen::Map<const Eigen::VectorXd> wv(w.data(), static_cast<Eigen::Index>(w.size()));
    return wv.dot(abs_to_obs(y)) - 0.5 * wv.dot(cross_ * wv);
}

double crps_mixture_mc(std::vector<std::vector<double>> component_samples, const SimplexWeights& w,
                       double y, Rng& rng, CrossTermEstimator estimator) {
    detail::require(!component_samples.empty(), "crps_mixture_mc: empty sample list");
    const auto terms = MixtureCrpsTerms::from_samples(std::move(component_samples), estimator, &rng);
    return terms.crps(w, y);
}

double crps_pool(const LinearPool& pool, double y, Rng& rng, std::size_t mc_samples) {
    if (pool.all_gaussian()) {
        std::vector<double> mus;
        std::vector<double> sigmas;
        for (const auto& f : pool.components()) {
            mus.push_back(f.as_gaussian().mu);
            sigmas.push_back(f.as_gaussian().sigma);
        }
        return crps_normal_mixture(mus, sigmas, pool.weights(), y);
    }
    std::vector<std::vector<double>> samples;
    for (const auto& f : pool.components()) {
        samples.push_back(f.is_empirical() ? f.as_empirical().sorted : f.sample(mc_samples, rng));
    }
    return crps_mixture_mc(std::move(samples), pool.weights(), y, rng);
}

double log_score(double pdf_at_y, double cap) {
    detail::require(pdf_at_y >= 0.0, "log_score: negative density");
    if (pdf_at_y == 0.0) {
        return cap;
    }
    return std::min(-std::log(pdf_at_y), cap);
}

double interval_score(double lower, double upper, double alpha, double y) {
    detail::require(lower <= upper, "interval_score: lower bound exceeds upper bound");
    detail::require(alpha > 0.0 && alpha < 1.0, "interval_score: alpha must lie in (0,1)");
    double s = upper - lower;
    if (y < lower) {
        s += 2.0 / alpha * (lower - y);
    } else if (y > upper) {
        s += 2.0 / alpha * (y - upper);
    }
    return s;
}

QuantileForecast::QuantileForecast(std::vector<double> probs, std::vector<double> values)
    : probs_(std::move(probs)), values_(std::move(values)) {
    detail::require(probs_.size() == values_.size(), "quantile forecast: length mismatch");
    detail::require(probs_.size() % 2 == 1, "quantile forecast: asymmetric probability set");
    const std::size_t k = probs_.size();
    detail::require(std::abs(probs_[k / 2] - 0.5) < 1e-9, "quantile forecast: no median present");
    for (std::size_t i = 0; i < k; ++i) {
        detail::require(probs_[i] > 0.0 && probs_[i] < 1.0, "quantile forecast: probs outside (0,1)");
        detail::require(std::abs(probs_[i] + probs_[k - 1 - i] - 1.0) < 1e-9,
                        "quantile forecast: asymmetric probability set");
        if (i > 0) {
            detail::require(probs_[i] > probs_[i - 1], "quantile forecast: probs not increasing");
            detail::require(values_[i] >= values_[i - 1], "quantile forecast: values decreasing");
        }
    }
}

double weighted_interval_score(const QuantileForecast& qf, double y) {
    const std::size_t n_int = qf.intervals();
    double acc = 0.5 * std::abs(y - qf.median());
    for (std::size_t i = 0; i < n_int; ++i) {
        const double a = qf.alpha(i);
        acc += 0.5 * a * interval_score(qf.lower(i), qf.upper(i), a, y);
    }
    return acc / (static_cast<double>(n_int) + 0.5);
}

} // namespace sgp

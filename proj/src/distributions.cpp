#include "stackgibbs/distributions.hpp"

#include "stackgibbs/error.hpp"

#include <boost/math/special_functions/erf.hpp>

#include <algorithm>
#include <limits>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sgp {

namespace {

constexpr double kTieNudge = 1e-9;

double draw_uniform_open(Rng& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double v = u(rng);
    while (v <= 0.0) {
        v = u(rng);
    }
    return v;
}

double silverman_bandwidth(const std::vector<double>& sorted) {
    const auto n = static_cast<double>(sorted.size());
    const double mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / n;
    double ss = 0.0;
    for (double x : sorted) {
        ss += (x - mean) * (x - mean);
    }
    const double sd = std::sqrt(ss / (n - 1.0));
    auto at = [&sorted](double p) {
        double pos = p * static_cast<double>(sorted.size() - 1);
        auto i = static_cast<std::size_t>(pos);
        double frac = pos - static_cast<double>(i);
        if (i + 1 >= sorted.size()) {
            return sorted.back();
        }
        return sorted[i] + frac * (sorted[i + 1] - sorted[i]);
    };
    const double iqr = at(0.75) - at(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (spread <= 0.0) {
        spread = sd;
    }
    if (spread <= 0.0) {
        // all samples identical
        return 1e-3 * std::max(1.0, std::abs(mean));
    }
    return 0.9 * spread * std::pow(n, -0.2);
}

double empirical_cdf(const Empirical& e, double x) {
    const auto& s = e.sorted;
    auto k = static_cast<std::size_t>(std::upper_bound(s.begin(), s.end(), x) - s.begin());
    if (k == 0) {
        return 0.0;
    }
    if (k == s.size()) {
        return 1.0;
    }
    const std::size_t i = k - 1;
    const double frac = (x - s[i]) / (s[i + 1] - s[i]);
    return (static_cast<double>(i) + frac) / static_cast<double>(s.size() - 1);
}

double empirical_pdf(const Empirical& e, double x) {
    const auto& s = e.sorted;
    const double h = e.bandwidth;
    auto lo = std::lower_bound(s.begin(), s.end(), x - 8.0 * h);
    auto hi = std::upper_bound(s.begin(), s.end(), x + 8.0 * h);
    double acc = 0.0;
    for (auto it = lo; it != hi; ++it) {
        acc += normal_pdf((x - *it) / h);
    }
    return acc / (static_cast<double>(s.size()) * h);
}

double empirical_quantile(const Empirical& e, double p) {
    const auto& s = e.sorted;
    const double pos = p * static_cast<double>(s.size() - 1);
    auto i = static_cast<std::size_t>(pos);
    if (i + 1 >= s.size()) {
        return s.back();
    }
    return s[i] + (pos - static_cast<double>(i)) * (s[i + 1] - s[i]);
}

double piecewise_cdf_at(const PiecewiseCdf& f, double x) {
    const auto& q = f.quantiles;
    const auto& p = f.probs;
    if (x < q.front()) {
        return p.front() * std::exp(f.tail_rate * (x - q.front()));
    }
    if (x >= q.back()) {
        return 1.0 - (1.0 - p.back()) * std::exp(-f.tail_rate * (x - q.back()));
    }
    auto k = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin()) - 1;
    return p[k] + (p[k + 1] - p[k]) * (x - q[k]) / (q[k + 1] - q[k]);
}

double piecewise_pdf_at(const PiecewiseCdf& f, double x) {
    const auto& q = f.quantiles;
    const auto& p = f.probs;
    if (x < q.front()) {
        return f.tail_rate * p.front() * std::exp(f.tail_rate * (x - q.front()));
    }
    if (x >= q.back()) {
        return f.tail_rate * (1.0 - p.back()) * std::exp(-f.tail_rate * (x - q.back()));
    }
    auto k = static_cast<std::size_t>(std::upper_bound(q.begin(), q.end(), x) - q.begin()) - 1;
    return (p[k + 1] - p[k]) / (q[k + 1] - q[k]);
}

double piecewise_quantile(const PiecewiseCdf& f, double u) {
    const auto& q = f.quantiles;
    const auto& p = f.probs;
    if (u < p.front()) {
        return q.front() + std::log(u / p.front()) / f.tail_rate;
    }
    if (u >= p.back()) {
        return q.back() - std::log((1.0 - u) / (1.0 - p.back())) / f.tail_rate;
    }
    auto k = static_cast<std::size_t>(std::upper_bound(p.begin(), p.end(), u) - p.begin()) - 1;
    return q[k] + (q[k + 1] - q[k]) * (u - p[k]) / (p[k + 1] - p[k]);
}

} // namespace

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_pdf(double z) {
    static const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * M_PI);
    return kInvSqrt2Pi * std::exp(-0.5 * z * z);
}

double normal_quantile(double p) {
    detail::require(p > 0.0 && p < 1.0, "normal_quantile: p must lie in (0,1)");
    return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

// --- SimplexWeights -----------------------------------------------------------

SimplexWeights::SimplexWeights(std::vector<double> w) : w_(std::move(w)) {
    detail::require(!w_.empty(), "simplex weights must be nonempty");
    double sum = 0.0;
    for (double v : w_) {
        if (!(v >= 0.0) || !std::isfinite(v)) {
            throw ValidationError("simplex weights must be finite and nonnegative");
        }
        sum += v;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
        std::ostringstream os;
        os << "simplex weights sum to " << sum << ", expected 1";
        throw ValidationError(os.str());
    }
}

SimplexWeights SimplexWeights::normalized(std::vector<double> w) {
    detail::require(!w.empty(), "simplex weights must be nonempty");
    double sum = 0.0;
    for (double& v : w) {
        if (!std::isfinite(v) || v < -1e-12) {
            throw ValidationError("cannot normalize negative or non-finite weights");
        }
        v = std::max(v, 0.0);
        sum += v;
    }
    detail::require(sum > 0.0, "cannot normalize an all-zero weight vector");
    for (double& v : w) {
        v /= sum;
    }
    return SimplexWeights(std::move(w));
}

SimplexWeights SimplexWeights::uniform(std::size_t c) {
    detail::require(c >= 1, "uniform weights need at least one component");
    return SimplexWeights(std::vector<double>(c, 1.0 / static_cast<double>(c)));
}

SimplexWeights SimplexWeights::vertex(std::size_t c, std::size_t j) {
    detail::require(j < c, "vertex index out of range");
    std::vector<double> w(c, 0.0);
    w[j] = 1.0;
    return SimplexWeights(std::move(w));
}

// --- ComponentForecast --------------------------------------------------------

ComponentForecast ComponentForecast::gaussian(double mu, double sigma) {
    detail::require(std::isfinite(mu), "gaussian mean must be finite");
    detail::require(sigma > 0.0 && std::isfinite(sigma), "gaussian sigma must be positive");
    return ComponentForecast(Gaussian{mu, sigma});
}

ComponentForecast ComponentForecast::empirical(std::vector<double> samples) {
    detail::require(samples.size() >= 2, "empirical forecast needs at least 2 samples");
    for (double x : samples) {
        detail::require(std::isfinite(x), "empirical samples must be finite");
    }
    std::sort(samples.begin(), samples.end());
    const double h = silverman_bandwidth(samples);
    return ComponentForecast(Empirical{std::move(samples), h});
}

ComponentForecast ComponentForecast::piecewise_cdf(std::vector<double> probs,
                                                   std::vector<double> quantiles,
                                                   double tail_rate) {
    detail::require(probs.size() == quantiles.size(), "probs and quantiles differ in length");
    detail::require(probs.size() >= 2, "piecewise CDF needs at least 2 knots");
    detail::require(tail_rate > 0.0 && std::isfinite(tail_rate), "tail rate must be positive");
    for (std::size_t k = 0; k < probs.size(); ++k) {
        detail::require(probs[k] > 0.0 && probs[k] < 1.0, "probabilities must lie in (0,1)");
        detail::require(std::isfinite(quantiles[k]), "quantiles must be finite");
        if (k > 0) {
            detail::require(probs[k] > probs[k - 1], "probabilities must be strictly increasing");
            detail::require(quantiles[k] >= quantiles[k - 1], "quantiles must be nondecreasing");
        }
    }
    for (std::size_t k = 1; k < quantiles.size(); ++k) {
        if (quantiles[k] <= quantiles[k - 1]) {
            quantiles[k] = quantiles[k - 1] + kTieNudge;
        }
    }
    return ComponentForecast(PiecewiseCdf{std::move(probs), std::move(quantiles), tail_rate});
}

double ComponentForecast::cdf(double x) const {
    if (std::isnan(x)) {
        return x;
    }
    if (const auto* g = std::get_if<Gaussian>(&repr_)) {
        return normal_cdf((x - g->mu) / g->sigma);
    }
    if (const auto* e = std::get_if<Empirical>(&repr_)) {
        return empirical_cdf(*e, x);
    }
    return piecewise_cdf_at(std::get<PiecewiseCdf>(repr_), x);
}

double ComponentForecast::pdf(double x) const {
    if (const auto* g = std::get_if<Gaussian>(&repr_)) {
        return normal_pdf((x - g->mu) / g->sigma) / g->sigma;
    }
    if (const auto* e = std::get_if<Empirical>(&repr_)) {
        return empirical_pdf(*e, x);
    }
    return piecewise_pdf_at(std::get<PiecewiseCdf>(repr_), x);
}

double ComponentForecast::quantile(double p) const {
    detail::require(p > 0.0 && p < 1.0, "quantile level must lie in (0,1)");
    if (const auto* g = std::get_if<Gaussian>(&repr_)) {
        return g->mu + g->sigma * normal_quantile(p);
    }
    if (const auto* e = std::get_if<Empirical>(&repr_)) {
        return empirical_quantile(*e, p);
    }
    return piecewise_quantile(std::get<PiecewiseCdf>(repr_), p);
}

std::vector<double> ComponentForecast::sample(std::size_t n, Rng& rng) const {
    std::vector<double> out(n);
    if (const auto* g = std::get_if<Gaussian>(&repr_)) {
        std::normal_distribution<double> z(0.0, 1.0);
        for (auto& v : out) {
            v = g->mu + g->sigma * z(rng);
        }
        return out;
    }
    for (auto& v : out) {
        v = quantile(draw_uniform_open(rng));
    }
    return out;
}

double eval_cdf(const ComponentForecast& f, double x) { return f.cdf(x); }

std::vector<double> sample(const ComponentForecast& f, std::size_t n, Rng& rng) {
    detail::require(n >= 1, "sample size must be positive");
    return f.sample(n, rng);
}

ComponentForecast quantiles_to_piecewise_cdf(std::vector<double> probs,
                                             std::vector<double> quantiles,
                                             double tail_rate) {
    detail::require(probs.size() == quantiles.size(), "probs and quantiles differ in length");
    detail::require(probs.size() >= 2, "need at least 2 quantiles");
    if (tail_rate <= 0.0) {
        tail_rate = 1.0 / (quantiles.back() - quantiles.front() + 1.0);
    }
    return ComponentForecast::piecewise_cdf(std::move(probs), std::move(quantiles), tail_rate);
}

// --- LinearPool ---------------------------------------------------------------

LinearPool::LinearPool(std::vector<ComponentForecast> components, SimplexWeights weights)
    : components_(std::move(components)), weights_(std::move(weights)) {
    detail::require(!components_.empty(), "linear pool needs at least one component");
    detail::require(components_.size() == weights_.size(),
                    "linear pool weight count differs from component count");
}

bool LinearPool::all_gaussian() const {
    return std::all_of(components_.begin(), components_.end(),
                       [](const ComponentForecast& f) { return f.is_gaussian(); });
}

double LinearPool::cdf(double x) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < components_.size(); ++c) {
        if (weights_[c] > 0.0) {
            acc += weights_[c] * components_[c].cdf(x);
        }
    }
    return std::clamp(acc, 0.0, 1.0);
}

double LinearPool::pdf(double x) const {
    double acc = 0.0;
    for (std::size_t c = 0; c < components_.size(); ++c) {
        if (weights_[c] > 0.0) {
            acc += weights_[c] * components_[c].pdf(x);
        }
    }
    return acc;
}

double LinearPool::quantile(double p) const {
    detail::require(p > 0.0 && p < 1.0, "quantile level must lie in (0,1)");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (std::size_t c = 0; c < components_.size(); ++c) {
        if (weights_[c] > 0.0) {
            lo = std::min(lo, components_[c].quantile(p));
            hi = std::max(hi, components_[c].quantile(p));
        }
    }
    double width = std::max(hi - lo, 1.0);
    while (cdf(lo) > p) {
        lo -= width;
        width *= 2.0;
    }
    width = std::max(hi - lo, 1.0);
    while (cdf(hi) < p) {
        hi += width;
        width *= 2.0;
    }
    for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(lo)); ++it) {
        const double mid = 0.5 * (lo + hi);
        if (cdf(mid) < p) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

std::vector<double> LinearPool::sample(std::size_t n, Rng& rng) const {
    std::discrete_distribution<std::size_t> pick(weights_.vec().begin(), weights_.vec().end());
    std::vector<double> out(n);
    for (auto& v : out) {
        v = components_[pick(rng)].sample(1, rng).front();
    }
    return out;
}

double pool_cdf(const LinearPool& pool, double x) { return pool.cdf(x); }

} // namespace sgp

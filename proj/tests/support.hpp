#pragma once

// Independent oracles for the unit tests. Nothing here calls into the library.

#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include <unistd.h>

namespace oracle {

inline double phi_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double phi_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }

inline double phi_inv(double p) {
    return boost::math::quantile(boost::math::normal_distribution<double>(0.0, 1.0), p);
}

/// CRPS by adaptive Gauss-Kronrod on both half-lines, split at y.
inline double crps_integral(const std::function<double(double)>& cdf, double y) {
    using GK = boost::math::quadrature::gauss_kronrod<double, 61>;
    const double inf = std::numeric_limits<double>::infinity();
    auto left = [&](double x) {
        const double f = cdf(x);
        return f * f;
    };
    auto right = [&](double x) {
        const double f = 1.0 - cdf(x);
        return f * f;
    };
    return GK::integrate(left, -inf, y, 15, 1e-13) + GK::integrate(right, y, inf, 15, 1e-13);
}

/// Gaussian mixture CDF.
inline std::function<double(double)> mixture_cdf(std::vector<double> mu, std::vector<double> sd,
                                                 std::vector<double> w) {
    return [=](double x) {
        double s = 0.0;
        for (std::size_t c = 0; c < mu.size(); ++c) {
            s += w[c] * phi_cdf((x - mu[c]) / sd[c]);
        }
        return s;
    };
}

/// Fresh empty directory under the system temp path.
inline std::filesystem::path temp_dir(const std::string& tag) {
    static std::atomic<int> counter{0};
    auto p = std::filesystem::temp_directory_path() /
             ("sgp_test_" + tag + "_" + std::to_string(::getpid()) + "_" + std::to_string(counter++));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
    std::ofstream out(p, std::ios::binary);
    out << text;
}

inline std::string read_file(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

} // namespace oracle

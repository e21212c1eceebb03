#pragma once

// Test-only reference computations. Nothing here calls into the closed forms it
// is used to check.

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/tools/minima.hpp>

#include <cmath>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

namespace qho::test {

inline double normal_pdf(double x, double mean, double std) {
    const double z = (x - mean) / std;
    return std::exp(-0.5 * z * z) / (std::sqrt(2.0 * std::numbers::pi) * std);
}

// Adaptive 61-point Gauss-Kronrod.
template <class F>
double integrate(F f, double a, double b, double tol = 1e-13) {
    return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 15, tol);
}

// Variance of D_2(x) = int D_1(y) G(x - y rho, sigma_step) dy with D_1 = G(0, sigma_first),
// computed as a nested quadrature of x^2 D_2(x) over +-12 sigma windows.
inline double convolved_second_variance(double sigma_first, double sigma_step, double rho) {
    const double inner_half = 12.0 * sigma_first;
    auto d2 = [&](double x) {
        return integrate([&](double y) { return normal_pdf(y, 0.0, sigma_first) * normal_pdf(x, y * rho, sigma_step); },
                         -inner_half, inner_half);
    };
    const double outer_half = 12.0 * std::sqrt(sigma_step * sigma_step + rho * rho * sigma_first * sigma_first);
    const double mass = integrate(d2, -outer_half, outer_half);
    const double second = integrate([&](double x) { return x * x * d2(x); }, -outer_half, outer_half);
    return second / mass;
}

// sigma_1^2 = sigma_first^2, sigma_{i+1}^2 = sigma_step^2 + rho^2 sigma_i^2, term by term.
inline std::vector<long double> variance_recursion(double sigma_first, double sigma_step, double rho, long n) {
    std::vector<long double> out;
    out.reserve(static_cast<std::size_t>(n));
    long double v = static_cast<long double>(sigma_first) * sigma_first;
    const long double q = static_cast<long double>(rho) * rho;
    const long double step = static_cast<long double>(sigma_step) * sigma_step;
    for (long i = 0; i < n; ++i) {
        out.push_back(v);
        v = step + q * v;
    }
    return out;
}

// Brent minimisation on [lo, hi]; returns (argmin, min).
template <class F>
std::pair<double, double> minimize(F f, double lo, double hi) {
    std::uintmax_t iters = 500;
    return boost::math::tools::brent_find_minima(f, lo, hi, std::numeric_limits<double>::digits, iters);
}

// Standard error of a sample std from n AR(1) samples with lag-1 correlation rho.
inline double ar1_std_error(double sigma, double rho, double n) {
    const double q = rho * rho;
    return sigma / std::sqrt(2.0 * n) * std::sqrt((1.0 + q) / (1.0 - q));
}

}  // namespace qho::test

#include "gwts/distributions.hpp"

#include <cmath>
#include <cstdint>
#include <limits>

#include <boost/math/distributions/chi_squared.hpp>
#include <boost/math/distributions/fisher_f.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/tools/roots.hpp>

#include "gwts/error.hpp"

namespace gwts::dist {

double chi2_sf(double x, double df) {
    if (!(df > 0.0)) throw DomainError("chi-square degrees of freedom must be positive");
    if (std::isnan(x)) throw DomainError("chi-square statistic is NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::chi_squared_distribution<double>(df), x));
}

double f_sf(double x, double df1, double df2) {
    if (!(df1 > 0.0) || !(df2 > 0.0)) throw DomainError("F degrees of freedom must be positive");
    if (std::isnan(x)) throw DomainError("F statistic is NaN");
    if (x <= 0.0) return 1.0;
    if (std::isinf(x)) return 0.0;
    return boost::math::cdf(boost::math::complement(boost::math::fisher_f_distribution<double>(df1, df2), x));
}

double normal_cdf(double x) {
    return 0.5 * std::erfc(-x / std::sqrt(2.0));
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) throw DomainError("normal quantile requires p in (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

double brownian_bridge_sup_sf(double x) {
    if (x <= 0.0) return 1.0;
    // Alternating series converges slowly near zero; for small x the tail is 1 to double precision.
    if (x < 0.2) return 1.0;
    double sum = 0.0;
    for (int k = 1; k < 1000; ++k) {
        const double term = std::exp(-2.0 * k * k * x * x);
        sum += (k % 2 == 1 ? term : -term);
        if (term < 1e-18) break;
    }
    double p = 2.0 * sum;
    if (p > 1.0) p = 1.0;
    if (p < 0.0) p = 0.0;
    return p;
}

double brownian_bridge_boundary(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance level must lie in (0, 1)");
    auto f = [alpha](double x) { return brownian_bridge_sup_sf(x) - alpha; };
    double lo = 0.2, hi = 10.0;
    if (f(lo) < 0.0) lo = 1e-3;
    std::uintmax_t iters = 200;
    auto tol = [](double a, double b) { return std::abs(a - b) < 1e-13; };
    auto [a, b] = boost::math::tools::toms748_solve(f, lo, hi, tol, iters);
    return 0.5 * (a + b);
}

}  // namespace gwts::dist

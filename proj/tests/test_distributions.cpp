#include <doctest.h>

#include <cmath>

#include "gwts/distributions.hpp"
#include "support/sim.hpp"

using namespace gwts;

TEST_CASE("chi-square and F tails against closed forms") {
    // df = 2: P(X > x) = exp(-x / 2).
    for (double x : {0.1, 1.0, 5.0, 20.0}) CHECK(dist::chi2_sf(x, 2.0) == doctest::Approx(std::exp(-x / 2.0)).epsilon(1e-12));
    // F(2, 2): P(X > x) = 1 / (1 + x).
    for (double x : {0.2, 1.0, 7.5}) CHECK(dist::f_sf(x, 2.0, 2.0) == doctest::Approx(1.0 / (1.0 + x)).epsilon(1e-12));
    CHECK(dist::chi2_sf(0.0, 3.0) == 1.0);
}

TEST_CASE("normal cdf and quantile") {
    for (double p : {1e-6, 0.025, 0.5, 0.9, 0.999}) {
        CHECK(dist::normal_cdf(dist::normal_quantile(p)) == doctest::Approx(p).epsilon(1e-12));
        CHECK(dist::normal_quantile(p) == doctest::Approx(testing::phi_inv(p)).epsilon(1e-9));
    }
}

TEST_CASE("Brownian bridge boundary") {
    // Frozen high-precision values of the Kolmogorov boundary.
    CHECK(dist::brownian_bridge_boundary(0.05) == doctest::Approx(1.35809863932255).epsilon(1e-10));
    CHECK(dist::brownian_bridge_boundary(0.01) == doctest::Approx(1.62762361151895).epsilon(1e-10));
    CHECK(dist::brownian_bridge_boundary(0.10) == doctest::Approx(1.22384787021708).epsilon(1e-10));
    CHECK(dist::brownian_bridge_boundary(0.05) == doctest::Approx(testing::bridge_boundary_bisection(0.05)).epsilon(1e-10));
    CHECK(dist::brownian_bridge_sup_sf(dist::brownian_bridge_boundary(0.05)) == doctest::Approx(0.05).epsilon(1e-10));
}

#pragma once

namespace gwts::dist {

/// Upper tail P(X > x) of a chi-square variable with `df` degrees of freedom.
[[nodiscard]] double chi2_sf(double x, double df);

/// Upper tail of the F(df1, df2) distribution.
[[nodiscard]] double f_sf(double x, double df1, double df2);

[[nodiscard]] double normal_cdf(double x);
[[nodiscard]] double normal_quantile(double p);

/// P(sup |B(t)| > x) for a standard Brownian bridge on [0, 1].
[[nodiscard]] double brownian_bridge_sup_sf(double x);

/// Solves brownian_bridge_sup_sf(lambda) = alpha for lambda.
[[nodiscard]] double brownian_bridge_boundary(double alpha);

}  // namespace gwts::dist

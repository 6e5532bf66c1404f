#pragma once

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "gwts/error.hpp"
#include "gwts/panel.hpp"

namespace gwts {

/// Rank-based pseudo-observations, strictly inside (0, 1).
struct PseudoSeries {
    std::vector<double> u;
    std::string source;

    [[nodiscard]] std::size_t size() const noexcept { return u.size(); }
};

/// u_i = rank(x_i) / (T + 1) with average ranks for ties.
[[nodiscard]] PseudoSeries pseudo_observations(std::span<const double> x, std::string source = {});

/// Beta regression of v on u: logit(mu_t) = beta0 + beta1 u_t, constant precision phi.
struct GcbrFit {
    double beta0 = 0.0;
    double beta1 = 0.0;
    double phi = 1.0;
    double loglik = 0.0;
    bool converged = false;
    std::size_t iterations = 0;
    double gradient_norm = 0.0;  ///< of the per-observation mean log-likelihood
    std::vector<double> fitted;  ///< mu_t = r(u_t)
};

/// Raised when the optimiser stops before the gradient tolerance; carries the last iterate.
class GcbrConvergenceError : public Error {
public:
    GcbrConvergenceError(const std::string& what, GcbrFit last) : Error(what), last_(std::move(last)) {}
    [[nodiscard]] const GcbrFit& last_iterate() const noexcept { return last_; }

private:
    GcbrFit last_;
};

struct GcbrOptions {
    std::size_t max_iterations = 200;
    double gradient_tolerance = 1e-8;
};

/// Log-likelihood at theta = (beta0, beta1, log phi).
[[nodiscard]] double gcbr_loglik(std::span<const double> u, std::span<const double> v, const std::array<double, 3>& theta);
/// Analytic gradient of gcbr_loglik with respect to (beta0, beta1, log phi).
[[nodiscard]] std::array<double, 3> gcbr_gradient(std::span<const double> u, std::span<const double> v,
                                                  const std::array<double, 3>& theta);

/// Maximum-likelihood fit by BFGS on (beta0, beta1, log phi).
[[nodiscard]] GcbrFit fit_gcbr(const PseudoSeries& u, const PseudoSeries& v, const GcbrOptions& options = {});

enum class CddEstimator { VarianceRatio, Moment };

struct CddResult {
    std::string station_u;
    std::string station_v;
    double rho_u_to_v = 0.0;  ///< reported value, clamped to [0, 1]
    double rho_v_to_u = 0.0;
    double ratio_u_to_v = 0.0;  ///< raw Var(r)/Var(v)
    double ratio_v_to_u = 0.0;
    double moment_u_to_v = 0.0;  ///< raw 12 E[r^2] - 3
    double moment_v_to_u = 0.0;
    GcbrFit fit_u_to_v;  ///< v regressed on u
    GcbrFit fit_v_to_u;  ///< u regressed on v
    CddEstimator estimator = CddEstimator::VarianceRatio;
};

[[nodiscard]] CddResult cdd(const PseudoSeries& u, const PseudoSeries& v, CddEstimator estimator = CddEstimator::VarianceRatio,
                            const GcbrOptions& options = {});

struct NetworkOptions {
    double threshold = 0.95;
    CddEstimator estimator = CddEstimator::VarianceRatio;
    std::size_t threads = 1;
};

struct DependencyNetwork {
    std::vector<StationId> nodes;  ///< stations with a complete series, sorted by name
    std::vector<CddResult> pairs;  ///< every evaluated pair, lexicographic
    std::vector<CddResult> edges;  ///< pairs with either direction >= threshold
    std::vector<std::pair<std::string, std::string>> failed_pairs;
    std::vector<std::string> failure_messages;
    double threshold = 0.95;

    [[nodiscard]] std::string edges_csv() const;
    [[nodiscard]] std::string pairs_csv() const;
    /// Point features for stations with coordinates, LineString features for edges between them.
    [[nodiscard]] std::string to_geojson() const;
};

[[nodiscard]] DependencyNetwork build_network(const TimeSeriesPanel& panel, const std::string& variable,
                                              const NetworkOptions& options = {});

}  // namespace gwts

#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gwts/var.hpp"

namespace gwts {

struct GrangerReport {
    std::vector<std::size_t> cause;
    std::vector<std::size_t> effect;
    std::vector<std::string> cause_names;
    std::vector<std::string> effect_names;
    double statistic = 0.0;  ///< F statistic
    double df1 = 0.0;
    double df2 = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;

    [[nodiscard]] std::string to_json() const;
};

/// Wald F-test that every lag coefficient of the `cause` variables is zero in
/// the `effect` equations of a VAR(p) fitted to `data`.
[[nodiscard]] GrangerReport granger_test(const Eigen::MatrixXd& data, std::size_t p, const std::vector<std::size_t>& cause,
                                         const std::vector<std::size_t>& effect, double alpha = 0.05,
                                         const std::vector<std::string>& names = {});
[[nodiscard]] GrangerReport granger_test(const VarModel& model, const std::vector<std::size_t>& cause,
                                         const std::vector<std::size_t>& effect, double alpha = 0.05);

/// Moving-average matrices Psi_0 = I, Psi_h = sum_{i<=min(h,p)} G_i Psi_{h-i}.
[[nodiscard]] std::vector<Eigen::MatrixXd> ma_matrices(const VarModel& model, std::size_t horizon);

/// Orthogonalised responses Theta_h = Psi_h P, P = chol(Sigma), h = 0..horizon.
[[nodiscard]] std::vector<Eigen::MatrixXd> orthogonal_irf(const VarModel& model, std::size_t horizon);

struct IrfOptions {
    std::size_t horizon = 20;
    std::size_t n_boot = 100;
    double ci = 0.95;
    std::uint64_t seed = 0;
    bool allow_unstable = false;
    std::size_t threads = 1;
};

struct IrfResult {
    /// responses[h](j, k): response of variable j at horizon h to a one-s.d. shock in k.
    std::vector<Eigen::MatrixXd> responses;
    std::vector<Eigen::MatrixXd> lower;
    std::vector<Eigen::MatrixXd> upper;
    std::vector<std::string> var_names;
    double ci = 0.95;
    std::size_t n_boot = 0;
    std::size_t n_boot_failed = 0;
    bool unstable = false;

    [[nodiscard]] std::size_t horizon() const noexcept { return responses.empty() ? 0 : responses.size() - 1; }
    /// Tidy CSV: horizon,impulse,response,value,lower,upper.
    [[nodiscard]] std::string to_csv() const;
};

/// Orthogonalised IRF with residual-bootstrap percentile bands.
[[nodiscard]] IrfResult irf(const VarModel& model, const IrfOptions& options = {});

struct FevdResult {
    /// proportions[h](j, k): share of variable j's (h+1)-step forecast-error variance due to shock k.
    std::vector<Eigen::MatrixXd> proportions;
    std::vector<std::string> var_names;

    [[nodiscard]] std::string to_csv() const;
};

[[nodiscard]] FevdResult fevd(const VarModel& model, std::size_t horizon);

}  // namespace gwts

#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace gwts {

enum class SigmaDivisor {
    DegreesOfFreedom,  ///< T - p - (n p + 1)
    MaximumLikelihood, ///< T - p
};

/// A fitted VAR(p):  x_t = c + G_1 x_{t-1} + ... + G_p x_{t-p} + e_t.
struct VarModel {
    Eigen::VectorXd intercept;           ///< c, length n
    std::vector<Eigen::MatrixXd> lags;   ///< G_1..G_p, each n x n
    Eigen::MatrixXd sigma;               ///< residual covariance, n x n
    Eigen::MatrixXd residuals;           ///< (T - p) x n
    Eigen::MatrixXd data;                ///< the T x n series the model was fitted on
    std::vector<std::string> var_names;
    SigmaDivisor divisor = SigmaDivisor::DegreesOfFreedom;

    [[nodiscard]] std::size_t n_vars() const noexcept { return static_cast<std::size_t>(intercept.size()); }
    [[nodiscard]] std::size_t order() const noexcept { return lags.size(); }
    [[nodiscard]] std::size_t t_effective() const noexcept { return static_cast<std::size_t>(residuals.rows()); }
    /// Regressors per equation: n p + 1.
    [[nodiscard]] std::size_t n_regressors() const noexcept { return n_vars() * order() + 1; }

    /// (n p + 1) x n stacked coefficients; row 0 is the intercept, then lag 1 block, lag 2 block...
    [[nodiscard]] Eigen::MatrixXd coefficient_matrix() const;
    /// In-sample one-step fitted values for t = p..T-1, (T - p) x n.
    [[nodiscard]] Eigen::MatrixXd fitted() const;
};

struct FitOptions {
    SigmaDivisor divisor = SigmaDivisor::DegreesOfFreedom;
    std::vector<std::string> var_names;  ///< defaults to y1..yn
};

/// Regressor matrix for a VAR(p) on `data`: rows t = p..T-1, columns [1, x_{t-1}', ..., x_{t-p}'].
[[nodiscard]] Eigen::MatrixXd lagged_design(const Eigen::MatrixXd& data, std::size_t p);

/// Equation-wise least squares via column-pivoted QR.
[[nodiscard]] VarModel fit_var(const Eigen::MatrixXd& data, std::size_t p, const FitOptions& options = {});

enum class Criterion { AIC, BIC, HQ, FPE };
inline constexpr Criterion kAllCriteria[] = {Criterion::AIC, Criterion::BIC, Criterion::HQ, Criterion::FPE};
[[nodiscard]] const char* criterion_name(Criterion c) noexcept;

struct LagSelection {
    std::size_t p_max = 0;
    /// scores[c][p - 1] for criterion c (in kAllCriteria order) and lag p = 1..p_max.
    std::vector<std::vector<double>> scores;
    std::vector<std::size_t> chosen;  ///< per criterion
    std::size_t consensus = 0;
    bool unanimous = false;

    [[nodiscard]] std::string to_csv() const;
};

/// Minimum series length accepted by select_lag_order for n variables.
[[nodiscard]] std::size_t min_length_for_lag_search(std::size_t n, std::size_t p_max) noexcept;

/// Evaluates AIC, BIC, HQ and FPE for p = 1..p_max on the common sample t > p_max.
[[nodiscard]] LagSelection select_lag_order(const Eigen::MatrixXd& data, std::size_t p_max = 8);

struct StabilityReport {
    std::vector<double> moduli;  ///< companion eigenvalue moduli, descending
    bool stable = false;
};

[[nodiscard]] Eigen::MatrixXd companion_matrix(const VarModel& model);
[[nodiscard]] StabilityReport companion_stability(const VarModel& model);

/// h x n point forecasts from the last p rows of `history` (chronological).
[[nodiscard]] Eigen::MatrixXd forecast(const VarModel& model, const Eigen::MatrixXd& history, std::size_t h);

/// (I - sum G_i)^{-1} c.
[[nodiscard]] Eigen::VectorXd unconditional_mean(const VarModel& model);

/// Generates x_t recursively from `initial` (p x n) and `innovations` (T x n); returns (p + T) x n.
[[nodiscard]] Eigen::MatrixXd simulate_var(const Eigen::VectorXd& intercept, const std::vector<Eigen::MatrixXd>& lags,
                                           const Eigen::MatrixXd& initial, const Eigen::MatrixXd& innovations);

/// d-th order differences along time.
[[nodiscard]] Eigen::MatrixXd difference(const Eigen::MatrixXd& data, std::size_t d = 1);

/// Reorders the model's variables; order[i] is the old index placed at position i.
[[nodiscard]] VarModel permute_variables(const VarModel& model, const std::vector<std::size_t>& order);

[[nodiscard]] std::string model_to_json(const VarModel& model);
[[nodiscard]] VarModel model_from_json(const std::string& text);

}  // namespace gwts

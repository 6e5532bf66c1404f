#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gwts/var.hpp"

namespace gwts {

struct DiagnosticReport {
    std::string test_name;
    double statistic = 0.0;
    double df = 0.0;
    double p_value = 1.0;
    double alpha = 0.05;
    bool reject = false;
};

/// Recomputes `reject` at a new significance level.
[[nodiscard]] DiagnosticReport at_level(DiagnosticReport report, double alpha);

inline constexpr std::size_t kDefaultPortmanteauLags = 16;
inline constexpr std::size_t kDefaultArchLags = 5;

/// Small-sample adjusted multivariate Portmanteau test on a residual matrix
/// (T x n) from a model with `model_lags` lags.
[[nodiscard]] DiagnosticReport portmanteau_test(const Eigen::MatrixXd& residuals, std::size_t model_lags,
                                                std::size_t h_lags = kDefaultPortmanteauLags, double alpha = 0.05);
[[nodiscard]] DiagnosticReport portmanteau_test(const VarModel& model, std::size_t h_lags = kDefaultPortmanteauLags,
                                                double alpha = 0.05);

/// Multivariate ARCH-LM test: vech(u_t u_t') regressed on q of its own lags.
[[nodiscard]] DiagnosticReport arch_test(const Eigen::MatrixXd& residuals, std::size_t q_lags = kDefaultArchLags,
                                         double alpha = 0.05);
[[nodiscard]] DiagnosticReport arch_test(const VarModel& model, std::size_t q_lags = kDefaultArchLags,
                                         double alpha = 0.05);

struct NormalityReports {
    DiagnosticReport jarque_bera;
    DiagnosticReport skewness;
    DiagnosticReport kurtosis;
};

/// Multivariate Jarque-Bera on Cholesky-standardised residuals, with its
/// skewness and kurtosis components.
[[nodiscard]] NormalityReports normality_tests(const Eigen::MatrixXd& residuals, double alpha = 0.05);
[[nodiscard]] NormalityReports normality_tests(const VarModel& model, double alpha = 0.05);

/// OLS-CUSUM empirical fluctuation process, one path per equation.
struct EfpPath {
    std::vector<double> times;             ///< 0, 1/T, ..., 1
    std::vector<std::vector<double>> paths; ///< paths[eq][k]
    std::vector<std::string> names;
    std::vector<double> max_abs;
    std::vector<double> p_values;
    std::vector<bool> crossed;
    double boundary = 0.0;
    double alpha = 0.05;

    [[nodiscard]] std::string to_csv() const;
};

/// `regressors` is the number of parameters per equation (for the residual scale's degrees of freedom).
[[nodiscard]] EfpPath ols_cusum(const Eigen::MatrixXd& residuals, std::size_t regressors, double alpha = 0.05,
                                std::vector<std::string> names = {});
[[nodiscard]] EfpPath ols_cusum(const VarModel& model, double alpha = 0.05);

/// Critical value of sup|B(t)| for a Brownian bridge at level alpha.
[[nodiscard]] double cusum_boundary(double alpha);

[[nodiscard]] std::string reports_to_json(const std::vector<DiagnosticReport>& reports);
[[nodiscard]] std::vector<DiagnosticReport> reports_from_json(const std::string& text);

}  // namespace gwts

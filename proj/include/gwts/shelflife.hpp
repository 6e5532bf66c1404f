#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "gwts/var.hpp"

namespace gwts {

/// A model that can be trained on a history and then asked for h-step forecasts.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual void train(const Eigen::MatrixXd& history) = 0;
    /// h x n point forecasts following the trained history.
    [[nodiscard]] virtual Eigen::MatrixXd predict(std::size_t h) const = 0;
    [[nodiscard]] virtual std::string name() const = 0;
    /// Fresh untrained copy with the same configuration.
    [[nodiscard]] virtual std::unique_ptr<Forecaster> clone() const = 0;
};

/// Repeats the value observed one period earlier at the same phase.
class SeasonalNaiveForecaster final : public Forecaster {
public:
    explicit SeasonalNaiveForecaster(std::size_t period);
    void train(const Eigen::MatrixXd& history) override;
    [[nodiscard]] Eigen::MatrixXd predict(std::size_t h) const override;
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::unique_ptr<Forecaster> clone() const override;

private:
    std::size_t period_;
    Eigen::MatrixXd tail_;  // last `period_` rows
};

/// Refits a VAR(p) by least squares on every training call.
class VarForecaster final : public Forecaster {
public:
    explicit VarForecaster(std::size_t p, SigmaDivisor divisor = SigmaDivisor::DegreesOfFreedom);
    void train(const Eigen::MatrixXd& history) override;
    [[nodiscard]] Eigen::MatrixXd predict(std::size_t h) const override;
    [[nodiscard]] std::string name() const override;
    [[nodiscard]] std::unique_ptr<Forecaster> clone() const override;

private:
    std::size_t p_;
    SigmaDivisor divisor_;
    VarModel model_;
    bool trained_ = false;
};

[[nodiscard]] std::unique_ptr<Forecaster> seasonal_naive_forecaster(std::size_t period);

struct ApeRow {
    std::size_t origin = 0;   ///< number of training points
    std::size_t horizon = 0;  ///< quarters ahead, >= 1
    std::vector<double> ape;  ///< one per target variable
    double mean_ape = 0.0;
};

struct ApeTable {
    std::vector<ApeRow> rows;
    std::vector<std::size_t> targets;
    std::size_t excluded = 0;  ///< evaluation points with a zero actual
    std::size_t h_max = 0;
    std::string forecaster;

    [[nodiscard]] std::string to_csv() const;
};

struct RollingOptions {
    std::size_t min_train = 0;
    std::size_t h_max = 0;
    std::vector<std::size_t> targets{0};
    std::size_t threads = 1;
};

/// Rolling-origin out-of-sample absolute percentage errors: for every origin
/// o = min_train..T-1, train on the first o points and forecast up to h_max steps.
[[nodiscard]] ApeTable rolling_origin_errors(const Eigen::MatrixXd& series, const Forecaster& forecaster,
                                             const RollingOptions& options);

enum class ApeRegression { HorizonMeans, Pooled };

struct ShelfLifeResult {
    ApeTable ape_table;
    std::vector<std::size_t> horizons;     ///< regression x values
    std::vector<double> horizon_mean_ape;  ///< per-horizon mean APE (always reported)
    double intercept = 0.0;
    double slope = 0.0;
    double threshold = 0.05;
    std::size_t shelf_life_quarters = 0;
    bool censored = false;
    ApeRegression mode = ApeRegression::HorizonMeans;

    [[nodiscard]] double fitted_ape(double h) const noexcept { return intercept + slope * h; }
    [[nodiscard]] std::string to_json() const;
};

/// Fits APE = a + b h and reports the largest integer horizon with a + b h <= threshold.
[[nodiscard]] ShelfLifeResult estimate_shelf_life(const ApeTable& table, double threshold = 0.05,
                                                  ApeRegression mode = ApeRegression::HorizonMeans);

struct RankedShelfLife {
    std::string forecaster;
    std::size_t shelf_life_quarters = 0;
    double fitted_ape_at_shelf_life = 0.0;
};

/// Orders results by shelf life (descending), then by fitted APE at the shelf-life horizon (ascending).
[[nodiscard]] std::vector<RankedShelfLife> compare_shelf_lives(const std::vector<ShelfLifeResult>& results);

}  // namespace gwts

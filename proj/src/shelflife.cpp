#include "gwts/shelflife.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gwts/error.hpp"
#include "gwts/parallel.hpp"
#include "gwts/report.hpp"

namespace gwts {

using Eigen::Index;
using Eigen::MatrixXd;

SeasonalNaiveForecaster::SeasonalNaiveForecaster(std::size_t period) : period_(period) {
    if (period < 1) throw DomainError("seasonal period must be at least 1");
}

void SeasonalNaiveForecaster::train(const MatrixXd& history) {
    if (static_cast<std::size_t>(history.rows()) < period_) {
        throw SampleSizeError("seasonal-naive forecaster needs at least " + std::to_string(period_) +
                              " training points, got " + std::to_string(history.rows()));
    }
    tail_ = history.bottomRows(static_cast<Index>(period_));
}

MatrixXd SeasonalNaiveForecaster::predict(std::size_t h) const {
    if (tail_.rows() == 0) throw StateError("seasonal-naive forecaster used before train()");
    if (h < 1) throw DomainError("forecast horizon must be at least 1");
    MatrixXd out(static_cast<Index>(h), tail_.cols());
    for (std::size_t k = 1; k <= h; ++k) {
        const std::size_t cycles = (k + period_ - 1) / period_;
        const std::size_t row = k + period_ - 1 - period_ * cycles;
        out.row(static_cast<Index>(k - 1)) = tail_.row(static_cast<Index>(row));
    }
    return out;
}

std::string SeasonalNaiveForecaster::name() const {
    return "seasonal-naive(" + std::to_string(period_) + ")";
}

std::unique_ptr<Forecaster> SeasonalNaiveForecaster::clone() const {
    return std::make_unique<SeasonalNaiveForecaster>(period_);
}

std::unique_ptr<Forecaster> seasonal_naive_forecaster(std::size_t period) {
    return std::make_unique<SeasonalNaiveForecaster>(period);
}

VarForecaster::VarForecaster(std::size_t p, SigmaDivisor divisor) : p_(p), divisor_(divisor) {
    if (p < 1) throw DomainError("VAR lag order must be at least 1");
}

void VarForecaster::train(const MatrixXd& history) {
    model_ = fit_var(history, p_, FitOptions{divisor_, {}});
    trained_ = true;
}

MatrixXd VarForecaster::predict(std::size_t h) const {
    if (!trained_) throw StateError("VAR forecaster used before train()");
    return forecast(model_, model_.data, h);
}

std::string VarForecaster::name() const {
    return "VAR(" + std::to_string(p_) + ")";
}

std::unique_ptr<Forecaster> VarForecaster::clone() const {
    return std::make_unique<VarForecaster>(p_, divisor_);
}

ApeTable rolling_origin_errors(const MatrixXd& series, const Forecaster& forecaster, const RollingOptions& options) {
    const std::size_t t_total = static_cast<std::size_t>(series.rows());
    if (options.min_train < 1) throw DomainError("min_train must be at least 1");
    if (options.h_max < 1) throw DomainError("h_max must be at least 1");
    if (options.min_train + options.h_max > t_total) {
        throw SampleSizeError("min_train + h_max (" + std::to_string(options.min_train + options.h_max) +
                              ") exceeds the series length " + std::to_string(t_total));
    }
    if (options.targets.empty()) throw DomainError("at least one target variable is required");
    for (auto t : options.targets) {
        if (t >= static_cast<std::size_t>(series.cols())) throw DomainError("target variable index out of range");
    }

    const std::size_t n_origins = t_total - options.min_train;
    std::vector<std::vector<ApeRow>> per_origin(n_origins);
    std::vector<std::size_t> excluded(n_origins, 0);
    parallel_for(n_origins, options.threads, [&](std::size_t i) {
        const std::size_t origin = options.min_train + i;
        const std::size_t horizon = std::min(options.h_max, t_total - origin);
        auto model = forecaster.clone();
        model->train(series.topRows(static_cast<Index>(origin)));
        const MatrixXd pred = model->predict(horizon);
        for (std::size_t h = 1; h <= horizon; ++h) {
            const Index row = static_cast<Index>(origin + h - 1);
            ApeRow r;
            r.origin = origin;
            r.horizon = h;
            bool undefined = false;
            for (auto target : options.targets) {
                const double actual = series(row, static_cast<Index>(target));
                if (actual == 0.0) {
                    undefined = true;
                    break;
                }
                r.ape.push_back(std::abs(actual - pred(static_cast<Index>(h - 1), static_cast<Index>(target))) /
                                std::abs(actual));
            }
            if (undefined) {
                ++excluded[i];
                continue;
            }
            double s = 0.0;
            for (double a : r.ape) s += a;
            r.mean_ape = s / static_cast<double>(r.ape.size());
            per_origin[i].push_back(std::move(r));
        }
    });

    ApeTable table;
    table.targets = options.targets;
    table.h_max = options.h_max;
    table.forecaster = forecaster.name();
    for (std::size_t i = 0; i < n_origins; ++i) {
        table.excluded += excluded[i];
        for (auto& r : per_origin[i]) table.rows.push_back(std::move(r));
    }
    return table;
}

std::string ApeTable::to_csv() const {
    std::ostringstream os;
    os << "origin,horizon,ape";
    if (targets.size() > 1) {
        for (auto t : targets) os << ",ape_" << t;
    }
    os << '\n';
    for (const auto& r : rows) {
        os << r.origin << ',' << r.horizon << ',' << format_double(r.mean_ape);
        if (targets.size() > 1) {
            for (double a : r.ape) os << ',' << format_double(a);
        }
        os << '\n';
    }
    return os.str();
}

ShelfLifeResult estimate_shelf_life(const ApeTable& table, double threshold, ApeRegression mode) {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw DomainError("APE threshold must be a finite value >= 0");
    std::map<std::size_t, std::pair<double, std::size_t>> by_h;
    for (const auto& r : table.rows) {
        auto& acc = by_h[r.horizon];
        acc.first += r.mean_ape;
        acc.second += 1;
    }
    if (by_h.size() < 2) throw InsufficientDataError("shelf-life regression needs at least 2 distinct horizons");

    ShelfLifeResult out;
    out.ape_table = table;
    out.threshold = threshold;
    out.mode = mode;
    for (const auto& [h, acc] : by_h) {
        out.horizons.push_back(h);
        out.horizon_mean_ape.push_back(acc.first / static_cast<double>(acc.second));
    }

    std::vector<double> xs, ys;
    if (mode == ApeRegression::HorizonMeans) {
        for (std::size_t i = 0; i < out.horizons.size(); ++i) {
            xs.push_back(static_cast<double>(out.horizons[i]));
            ys.push_back(out.horizon_mean_ape[i]);
        }
    } else {
        for (const auto& r : table.rows) {
            xs.push_back(static_cast<double>(r.horizon));
            ys.push_back(r.mean_ape);
        }
    }
    const double nx = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= nx;
    my /= nx;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxx += (xs[i] - mx) * (xs[i] - mx);
        sxy += (xs[i] - mx) * (ys[i] - my);
    }
    out.slope = sxy / sxx;
    out.intercept = my - out.slope * mx;

    const std::size_t h_last = out.horizons.back();
    const double tol = 1e-12 * std::max(1.0, threshold);
    if (out.slope > 0.0) {
        const double crossing = (threshold - out.intercept) / out.slope;
        if (crossing < 0.0) {
            out.shelf_life_quarters = 0;
        } else {
            // Floor with slack for crossings that are integers up to rounding.
            const double h = std::floor(crossing + 1e-9);
            if (h >= static_cast<double>(h_last)) {
                out.shelf_life_quarters = h_last;
                out.censored = true;
            } else {
                out.shelf_life_quarters = static_cast<std::size_t>(h);
            }
        }
    } else if (out.fitted_ape(static_cast<double>(h_last)) <= threshold + tol) {
        out.shelf_life_quarters = h_last;
        out.censored = true;
    } else {
        out.shelf_life_quarters = 0;
    }
    return out;
}

std::string ShelfLifeResult::to_json() const {
    nlohmann::ordered_json j;
    j["forecaster"] = ape_table.forecaster;
    j["threshold"] = threshold;
    j["regression"] = mode == ApeRegression::HorizonMeans ? "horizon_means" : "pooled";
    j["intercept"] = intercept;
    j["slope"] = slope;
    j["shelf_life_quarters"] = shelf_life_quarters;
    j["censored"] = censored;
    j["h_max"] = ape_table.h_max;
    j["n_rows"] = ape_table.rows.size();
    j["excluded_rows"] = ape_table.excluded;
    j["horizons"] = horizons;
    j["horizon_mean_ape"] = horizon_mean_ape;
    return j.dump(2);
}

std::vector<RankedShelfLife> compare_shelf_lives(const std::vector<ShelfLifeResult>& results) {
    if (results.size() < 2) throw ComparisonError("shelf-life comparison needs at least two results");
    for (const auto& r : results) {
        if (r.threshold != results.front().threshold) {
            throw ComparisonError("shelf-life results were computed against different APE thresholds");
        }
    }
    std::vector<RankedShelfLife> ranked;
    for (const auto& r : results) {
        ranked.push_back({r.ape_table.forecaster, r.shelf_life_quarters,
                          r.fitted_ape(static_cast<double>(r.shelf_life_quarters))});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const RankedShelfLife& a, const RankedShelfLife& b) {
        if (a.shelf_life_quarters != b.shelf_life_quarters) return a.shelf_life_quarters > b.shelf_life_quarters;
        return a.fitted_ape_at_shelf_life < b.fitted_ape_at_shelf_life;
    });
    return ranked;
}

}  // namespace gwts

#include <doctest.h>

#include <random>

#include "gwts/error.hpp"
#include "gwts/shelflife.hpp"
#include "support/sim.hpp"

using namespace gwts;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

ApeTable linear_table(double a, double b, std::size_t h_max) {
    ApeTable t;
    t.h_max = h_max;
    t.forecaster = "synthetic";
    for (std::size_t h = 1; h <= h_max; ++h) {
        ApeRow r;
        r.origin = 10;
        r.horizon = h;
        r.mean_ape = a + b * static_cast<double>(h);
        r.ape = {r.mean_ape};
        t.rows.push_back(r);
    }
    return t;
}

/// Forecaster that already knows the series.
class Oracle final : public Forecaster {
public:
    explicit Oracle(MatrixXd full) : full_(std::move(full)) {}
    void train(const MatrixXd& history) override { origin_ = history.rows(); }
    MatrixXd predict(std::size_t h) const override { return full_.middleRows(origin_, static_cast<Eigen::Index>(h)); }
    std::string name() const override { return "oracle"; }
    std::unique_ptr<Forecaster> clone() const override { return std::make_unique<Oracle>(full_); }

private:
    MatrixXd full_;
    Eigen::Index origin_ = 0;
};

}  // namespace

TEST_CASE("analytic crossing") {
    const auto r = estimate_shelf_life(linear_table(0.01, 0.005, 26), 0.05);
    CHECK(r.shelf_life_quarters == 8);
    CHECK_FALSE(r.censored);
    CHECK(r.intercept == doctest::Approx(0.01));
    CHECK(r.slope == doctest::Approx(0.005));
    std::size_t prev = 0;
    for (double tau : {0.02, 0.05, 0.10}) {
        const auto s = estimate_shelf_life(linear_table(0.01, 0.005, 26), tau);
        CHECK(s.shelf_life_quarters >= prev);
        prev = s.shelf_life_quarters;
    }
}

TEST_CASE("flat APE is censored at h_max, threshold 0 gives 0") {
    const auto r = estimate_shelf_life(linear_table(0.01, 0.0, 12), 0.05);
    CHECK(r.censored);
    CHECK(r.shelf_life_quarters == 12);
    const auto z = estimate_shelf_life(linear_table(0.01, 0.005, 12), 0.0);
    CHECK(z.shelf_life_quarters == 0);
    CHECK_THROWS_AS((void)estimate_shelf_life(linear_table(0.01, 0.005, 1), 0.05), InsufficientDataError);
    CHECK_THROWS_AS((void)estimate_shelf_life(linear_table(0.01, 0.005, 5), -1.0), DomainError);
}

TEST_CASE("rolling origins") {
    std::mt19937_64 rng(30);
    MatrixXd series = testing::gaussian_matrix(rng, 85, 2).array() + 10.0;
    Oracle oracle(series);
    const auto t = rolling_origin_errors(series, oracle, {59, 26, {0}, 1});
    CHECK(t.rows.front().origin == 59);
    CHECK(t.rows.back().origin == 84);
    std::size_t first_origin_rows = 0;
    for (const auto& r : t.rows) {
        first_origin_rows += r.origin == 59;
        CHECK(r.mean_ape == 0.0);
        CHECK(r.horizon <= 85 - r.origin);
    }
    CHECK(first_origin_rows == 26);
    CHECK(t.rows.size() == 26 * 27 / 2);

    const MatrixXd zeros = MatrixXd::Zero(20, 1);
    const auto z = rolling_origin_errors(zeros, *seasonal_naive_forecaster(1), {10, 5, {0}, 1});
    CHECK(z.rows.empty());
    CHECK(z.excluded == 5 + 5 + 5 + 5 + 5 + 5 + 4 + 3 + 2 + 1);
    CHECK_THROWS_AS((void)rolling_origin_errors(zeros, oracle, {18, 5, {0}, 1}), SampleSizeError);
}

TEST_CASE("parallel rolling origins equal sequential") {
    std::mt19937_64 rng(31);
    const MatrixXd data = testing::simulate(rng, VectorXd::Constant(2, 3.0), {0.5 * MatrixXd::Identity(2, 2)}, MatrixXd::Identity(2, 2), 80);
    VarForecaster f(1);
    const auto seq = rolling_origin_errors(data, f, {40, 10, {0, 1}, 1});
    const auto par = rolling_origin_errors(data, f, {40, 10, {0, 1}, 4});
    CHECK(seq.to_csv() == par.to_csv());
    CHECK(seq.to_csv().rfind("origin,horizon,ape,ape_0,ape_1\n", 0) == 0);
    CHECK(f.name() == "VAR(1)");
}

TEST_CASE("seasonal naive") {
    MatrixXd hist(6, 1);
    hist << 9, 9, 1, 2, 3, 4;
    SeasonalNaiveForecaster f(4);
    f.train(hist);
    const MatrixXd p = f.predict(6);
    CHECK(p(0, 0) == 1);
    CHECK(p(3, 0) == 4);
    CHECK(p(4, 0) == 1);
    CHECK(p(5, 0) == 2);
    SeasonalNaiveForecaster last(1);
    last.train(hist);
    CHECK(last.predict(3)(2, 0) == 4);
    CHECK_THROWS_AS(SeasonalNaiveForecaster(4).train(hist.topRows(3)), SampleSizeError);

    MatrixXd periodic(40, 1);
    for (int i = 0; i < 40; ++i) periodic(i, 0) = 1.0 + i % 4;
    const auto t = rolling_origin_errors(periodic, f, {8, 8, {0}, 1});
    for (const auto& r : t.rows) CHECK(r.mean_ape == 0.0);
}

TEST_CASE("comparison ordering") {
    auto a = estimate_shelf_life(linear_table(0.01, 0.0036, 20), 0.05);  // 11
    a.ape_table.forecaster = "VAR(4)";
    auto b = estimate_shelf_life(linear_table(0.01, 0.0033, 20), 0.05);  // 12
    b.ape_table.forecaster = "baseline";
    CHECK(a.shelf_life_quarters == 11);
    CHECK(b.shelf_life_quarters == 12);
    const auto ranked = compare_shelf_lives({a, b});
    CHECK(ranked[0].forecaster == "baseline");
    CHECK_THROWS_AS((void)compare_shelf_lives({a}), ComparisonError);
    auto c = estimate_shelf_life(linear_table(0.01, 0.0033, 20), 0.06);
    CHECK_THROWS_AS((void)compare_shelf_lives({a, c}), ComparisonError);

    auto lo = estimate_shelf_life(linear_table(0.00, 0.004, 20), 0.05);
    lo.ape_table.forecaster = "low";
    auto hi = estimate_shelf_life(linear_table(0.001, 0.004, 20), 0.05);
    hi.ape_table.forecaster = "high";
    REQUIRE(lo.shelf_life_quarters == hi.shelf_life_quarters);
    CHECK(compare_shelf_lives({hi, lo})[0].forecaster == "low");
}

// Acceptance suite: one PASS/FAIL line per criterion. Criteria 1-10 gate the
// exit code; 11-16 run against the field fixtures when they are available.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Cholesky>

#include "gwts/copula.hpp"
#include "gwts/diagnostics.hpp"
#include "gwts/distributions.hpp"
#include "gwts/error.hpp"
#include "gwts/reproduce.hpp"
#include "gwts/shelflife.hpp"
#include "gwts/structural.hpp"
#include "gwts/var.hpp"
#include "support/sim.hpp"

using namespace gwts;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// Tolerances, pinned.
constexpr double kCoefMeanAbsErr = 0.05;
constexpr double kNormalEqResidual = 1e-8;
constexpr double kLagHitRate = 0.90;
constexpr double kIrfTol = 1e-10;
constexpr double kFevdTol = 1e-10;
constexpr double kSizeLo = 0.035;
constexpr double kSizeHi = 0.065;
constexpr double kLambda = 1.358;
constexpr double kLambdaTol = 0.001;
constexpr double kGradRelErr = 1e-5;
constexpr double kComonotoneMin = 0.99;
constexpr double kIndependentMax = 0.05;
constexpr double kGaussianCopulaTol = 0.02;
constexpr double kPortmanteauPaper = 0.1163, kPortmanteauTol = 0.02;
constexpr double kArchPaper = 0.7252, kArchTol = 0.05;
constexpr double kSkewPaper = 0.239, kSkewTol = 0.05;
constexpr double kGrangerMax = 0.001;
constexpr double kFevdLo = 0.10, kFevdHi = 0.30;
constexpr double kPairTol = 0.01;
constexpr double kUnitPairMin = 0.995;
constexpr std::size_t kShelfLife = 11, kShelfLifeTol = 1;

struct Outcome {
    enum Status { Pass, Fail, Downgraded } status;
    std::string detail;
};

int hard_failures = 0;
int fixture_failures = 0;

void report(int id, const char* title, bool hard, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {Outcome::Fail, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    const char* tag = o.status == Outcome::Pass ? "PASS" : o.status == Outcome::Fail ? "FAIL" : "DOWNGRADED";
    std::printf("[%s] %02d %s: %s (%.1fs)\n", tag, id, title, o.detail.c_str(), secs);
    std::fflush(stdout);
    if (o.status == Outcome::Fail) ++(hard ? hard_failures : fixture_failures);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

Outcome pass_if(bool ok, std::string detail) { return {ok ? Outcome::Pass : Outcome::Fail, std::move(detail)}; }

Outcome var_recovery() {
    const MatrixXd g = 0.5 * MatrixXd::Identity(2, 2);
    double err = 0.0, resid = 0.0;
    const int seeds = 50;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(1000 + s);
        const MatrixXd data = testing::simulate(rng, VectorXd::Zero(2), {g}, MatrixXd::Identity(2, 2), 2000);
        const auto m = fit_var(data, 1);
        err += (m.lags[0] - g).cwiseAbs().mean();
        resid = std::max(resid, (lagged_design(data, 1).transpose() * m.residuals).cwiseAbs().maxCoeff());
    }
    err /= seeds;
    return pass_if(err < kCoefMeanAbsErr && resid < kNormalEqResidual,
                   fmt("mean |G-G_hat| = %.4g (< %g), max |X'E| = %.3g (< %g), 50 seeds", err, kCoefMeanAbsErr, resid,
                       kNormalEqResidual));
}

Outcome lag_selection() {
    MatrixXd g1(2, 2), g2(2, 2);
    g1 << 0.5, 0.1, 0.0, 0.4;
    g2 << -0.4, 0.0, 0.1, -0.3;
    int hits = 0;
    const int seeds = 100;
    for (int s = 0; s < seeds; ++s) {
        std::mt19937_64 rng(2000 + s);
        const MatrixXd data = testing::simulate(rng, VectorXd::Zero(2), {g1, g2}, MatrixXd::Identity(2, 2), 500);
        hits += select_lag_order(data, 8).consensus == 2;
    }
    const double rate = static_cast<double>(hits) / seeds;
    return pass_if(rate >= kLagHitRate, fmt("consensus p=2 in %d/%d seeds (>= %.0f%%)", hits, seeds, 100 * kLagHitRate));
}

VarModel random_model(std::mt19937_64& rng, Eigen::Index n, std::size_t p) {
    VarModel m;
    m.intercept = VectorXd::Zero(n);
    for (std::size_t i = 0; i < p; ++i) m.lags.push_back(testing::random_stable(rng, n, 0.9 / static_cast<double>(p)));
    m.sigma = testing::random_spd(rng, n);
    for (Eigen::Index i = 0; i < n; ++i) m.var_names.push_back("v" + std::to_string(i));
    return m;
}

Outcome irf_closed_form() {
    double worst = 0.0;
    for (int s = 0; s < 20; ++s) {
        std::mt19937_64 rng(3000 + s);
        const auto m = random_model(rng, 3, 1);
        const MatrixXd p = m.sigma.llt().matrixL();
        const auto theta = orthogonal_irf(m, 20);
        MatrixXd gh = MatrixXd::Identity(3, 3);
        for (std::size_t h = 0; h <= 20; ++h) {
            worst = std::max(worst, (theta[h] - gh * p).cwiseAbs().maxCoeff());
            gh = gh * m.lags[0];
        }
    }
    return pass_if(worst < kIrfTol, fmt("max |Theta_h - G^h P| = %.3g over 20 models, h <= 20 (< %g)", worst, kIrfTol));
}

Outcome fevd_rows() {
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
        std::mt19937_64 rng(4000 + s);
        const auto m = random_model(rng, 2 + s % 3, 1 + static_cast<std::size_t>(s % 3));
        for (const auto& share : fevd(m, 20).proportions) {
            worst = std::max(worst, (share.rowwise().sum().array() - 1.0).abs().maxCoeff());
        }
    }
    return pass_if(worst < kFevdTol, fmt("max |row sum - 1| = %.3g over 100 models (< %g)", worst, kFevdTol));
}

Outcome diagnostic_size() {
    const int sims = 1000;
    int port = 0, arch = 0, jb = 0;
    for (int s = 0; s < sims; ++s) {
        std::mt19937_64 rng(5000 + s);
        const MatrixXd e = testing::gaussian_matrix(rng, 1000, 2);
        port += portmanteau_test(e, 0, kDefaultPortmanteauLags).reject;
        arch += arch_test(e, kDefaultArchLags).reject;
        jb += normality_tests(e).jarque_bera.reject;
    }
    auto ok = [&](int r) {
        const double rate = static_cast<double>(r) / sims;
        return rate >= kSizeLo && rate <= kSizeHi;
    };
    return pass_if(ok(port) && ok(arch) && ok(jb),
                   fmt("rejection at 5%%: portmanteau %.1f%%, ARCH-LM %.1f%%, Jarque-Bera %.1f%% (each in [%.1f%%, %.1f%%], "
                       "1000 sims, T=1000, n=2)",
                       port / 10.0, arch / 10.0, jb / 10.0, 100 * kSizeLo, 100 * kSizeHi));
}

Outcome cusum_lambda() {
    const double lambda = cusum_boundary(0.05);
    const double oracle = testing::bridge_boundary_bisection(0.05);
    return pass_if(std::abs(lambda - kLambda) <= kLambdaTol && std::abs(lambda - oracle) < 1e-10,
                   fmt("lambda(0.05) = %.10f (target %.3f +- %g; bisection oracle %.10f)", lambda, kLambda, kLambdaTol, oracle));
}

Outcome gcbr_gradient_check() {
    std::mt19937_64 rng(7000);
    auto [x, y] = testing::gaussian_pairs(rng, 0.6, 400);
    const auto u = pseudo_observations(x).u;
    const auto v = pseudo_observations(y).u;
    std::uniform_real_distribution<double> b0(-2, 2), b1(-3, 3), lp(0.0, 4.0);
    double worst = 0.0;
    for (int k = 0; k < 20; ++k) {
        const std::array<double, 3> th{b0(rng), b1(rng), lp(rng)};
        const auto g = gcbr_gradient(u, v, th);
        for (int i = 0; i < 3; ++i) {
            auto up = th, dn = th;
            up[i] += 1e-6;
            dn[i] -= 1e-6;
            const double fd = (gcbr_loglik(u, v, up) - gcbr_loglik(u, v, dn)) / 2e-6;
            worst = std::max(worst, std::abs(fd - g[i]) / std::max(1.0, std::abs(g[i])));
        }
    }
    return pass_if(worst < kGradRelErr, fmt("max relative error %.3g at 20 points, step 1e-6 (< %g)", worst, kGradRelErr));
}

Outcome cdd_sanity() {
    std::mt19937_64 rng(8000);
    auto [x, y] = testing::gaussian_pairs(rng, 0.0, 2000);
    const auto u = pseudo_observations(x);
    const auto co = cdd(u, u);
    const auto ind = cdd(u, pseudo_observations(y));
    const double oracle = testing::gaussian_copula_cdd(0.9);
    double worst = 0.0;
    std::string vals;
    for (int s = 0; s < 3; ++s) {
        std::mt19937_64 r2(8100 + s);
        auto [a, b] = testing::gaussian_pairs(r2, 0.9, 5000);
        const auto res = cdd(pseudo_observations(a), pseudo_observations(b));
        worst = std::max({worst, std::abs(res.rho_u_to_v - oracle), std::abs(res.rho_v_to_u - oracle)});
        vals += fmt("%s%.4f/%.4f", s ? ", " : "", res.rho_u_to_v, res.rho_v_to_u);
    }
    const bool ok = co.rho_u_to_v >= kComonotoneMin && co.rho_v_to_u >= kComonotoneMin && ind.rho_u_to_v < kIndependentMax &&
                    ind.rho_v_to_u < kIndependentMax && worst <= kGaussianCopulaTol;
    return pass_if(ok, fmt("comonotone %.4f/%.4f (>= %g); independent %.4f/%.4f (< %g); Gaussian theta=0.9 T=5000: %s vs "
                           "oracle %.4f (+- %g)",
                           co.rho_u_to_v, co.rho_v_to_u, kComonotoneMin, ind.rho_u_to_v, ind.rho_v_to_u, kIndependentMax,
                           vals.c_str(), oracle, kGaussianCopulaTol));
}

Outcome cdd_rank_invariance() {
    int equal = 0;
    const int cases = 10;
    for (int s = 0; s < cases; ++s) {
        std::mt19937_64 rng(9000 + s);
        auto [x, y] = testing::gaussian_pairs(rng, 0.3 + 0.06 * s, 300);
        std::vector<double> fx, fy;
        for (double v : x) fx.push_back(std::exp(v));
        for (double v : y) fy.push_back(v * v * v + 2.0 * v);
        const auto a = cdd(pseudo_observations(x), pseudo_observations(y));
        const auto b = cdd(pseudo_observations(fx), pseudo_observations(fy));
        equal += a.rho_u_to_v == b.rho_u_to_v && a.rho_v_to_u == b.rho_v_to_u;
    }
    return pass_if(equal == cases, fmt("%d/%d pairs bit-identical under exp(x) and y^3+2y", equal, cases));
}

Outcome shelf_life_analytic() {
    auto table = [](std::size_t h_max) {
        ApeTable t;
        t.h_max = h_max;
        for (std::size_t h = 1; h <= h_max; ++h) {
            ApeRow r;
            r.horizon = h;
            r.mean_ape = 0.01 + 0.005 * static_cast<double>(h);
            r.ape = {r.mean_ape};
            t.rows.push_back(r);
        }
        return t;
    };
    const auto r = estimate_shelf_life(table(26), 0.05);
    std::vector<std::size_t> lives;
    for (double tau : {0.02, 0.05, 0.10}) lives.push_back(estimate_shelf_life(table(26), tau).shelf_life_quarters);
    const bool mono = std::is_sorted(lives.begin(), lives.end());
    return pass_if(r.shelf_life_quarters == 8 && !r.censored && mono,
                   fmt("APE = 0.01 + 0.005h, tau 0.05 -> %zu (exactly 8); tau 0.02/0.05/0.10 -> %zu/%zu/%zu (non-decreasing)",
                       r.shelf_life_quarters, lives[0], lives[1], lives[2]));
}

struct Fixtures {
    std::optional<SingleStationAnalysis> single;
    std::string single_error;
    std::optional<DependencyNetwork> network;
    std::string network_error;
};

Fixtures load_fixtures() {
    Fixtures f;
    const auto dir = fixture_dir(GWTS_SOURCE_DIR "/data");
    try {
        SingleStationOptions opt;
        opt.n_boot = 0;
        f.single = analyze_single_station(load_panel(require_fixture(dir, kSingleStationFile)), opt);
    } catch (const std::exception& e) {
        f.single_error = e.what();
    }
    try {
        NetworkOptions opt;
        opt.threshold = 0.95;
        f.network = build_network(load_panel(require_fixture(dir, kNetworkFile)), "gwl", opt);
    } catch (const std::exception& e) {
        f.network_error = e.what();
    }
    return f;
}

Outcome downgraded(const std::string& why) {
    return {Outcome::Downgraded, "best-effort only, property suite 1-10 is the gate; " + why};
}

}  // namespace

int main() {
    std::printf("gwts acceptance suite\n");
    report(1, "VAR OLS recovery", true, var_recovery);
    report(2, "Lag selection", true, lag_selection);
    report(3, "IRF closed form", true, irf_closed_form);
    report(4, "FEVD normalization", true, fevd_rows);
    report(5, "Diagnostic size", true, diagnostic_size);
    report(6, "OLS-CUSUM boundary", true, cusum_lambda);
    report(7, "GCBR gradient", true, gcbr_gradient_check);
    report(8, "CDD sanity", true, cdd_sanity);
    report(9, "CDD rank invariance", true, cdd_rank_invariance);
    report(10, "Shelf-life analytic", true, shelf_life_analytic);

    const auto fx = load_fixtures();
    const auto& a = fx.single;
    report(11, "Fixture lag selection", false, [&]() -> Outcome {
        if (!a) return downgraded(fx.single_error);
        std::string chosen;
        for (auto c : a->lags.chosen) chosen += std::to_string(c) + " ";
        return pass_if(a->lags.consensus == 4 && a->lags.unanimous,
                       fmt("AIC/BIC/HQ/FPE chose %son %zu training points (expect 4, unanimous)", chosen.c_str(), a->n_train));
    });
    report(12, "Fixture diagnostics", false, [&]() -> Outcome {
        if (!a) return downgraded(fx.single_error);
        const double pp = a->portmanteau.p_value, pa = a->arch.p_value, ps = a->normality.skewness.p_value;
        return pass_if(std::abs(pp - kPortmanteauPaper) <= kPortmanteauTol && std::abs(pa - kArchPaper) <= kArchTol &&
                           std::abs(ps - kSkewPaper) <= kSkewTol,
                       fmt("portmanteau p %.4f (%.4f +- %g), ARCH p %.4f (%.4f +- %g), skewness p %.4f (%.3f +- %g)", pp,
                           kPortmanteauPaper, kPortmanteauTol, pa, kArchPaper, kArchTol, ps, kSkewPaper, kSkewTol));
    });
    report(13, "Fixture Granger", false, [&]() -> Outcome {
        if (!a) return downgraded(fx.single_error);
        return pass_if(a->granger.p_value <= kGrangerMax,
                       fmt("temperature -> {others} p = %.3g (<= %g; published 3.916e-05)", a->granger.p_value, kGrangerMax));
    });
    report(14, "Fixture FEVD", false, [&]() -> Outcome {
        if (!a) return downgraded(fx.single_error);
        return pass_if(a->fevd_other_share >= kFevdLo && a->fevd_other_share <= kFevdHi,
                       fmt("GWL share from precipitation+temperature at h=10: %.4f (in [%.2f, %.2f])", a->fevd_other_share,
                           kFevdLo, kFevdHi));
    });
    report(15, "Fixture CDD network", false, [&]() -> Outcome {
        if (!fx.network) return downgraded(fx.network_error);
        int found = 0, within = 0;
        std::string misses;
        for (const auto& m : match_published_pairs(*fx.network)) {
            if (!m.computed) {
                if (misses.size() < 120) misses += m.published.station_u + "/" + m.published.station_v + "; ";
                continue;
            }
            ++found;
            const bool unit = m.published.rho_u_to_v == 1.0;
            const bool ok_uv = unit ? m.computed->rho_u_to_v >= kUnitPairMin
                                    : std::abs(m.computed->rho_u_to_v - m.published.rho_u_to_v) <= kPairTol;
            const bool ok_vu = std::abs(m.computed->rho_v_to_u - m.published.rho_v_to_u) <= kPairTol;
            const bool edge = std::max(m.computed->rho_u_to_v, m.computed->rho_v_to_u) >= 0.95;
            if (ok_uv && ok_vu && edge) ++within;
        }
        return pass_if(within == 24, fmt("%d/24 published pairs present, %d/24 within +- %g; %zu edges at 0.95%s%s", found,
                                         within, kPairTol, fx.network->edges.size(), misses.empty() ? "" : "; missing: ",
                                         misses.c_str()));
    });
    report(16, "Fixture shelf life", false, [&]() -> Outcome {
        if (!a) return downgraded(fx.single_error);
        const auto q = a->shelf_life.shelf_life_quarters;
        const bool ok = q + kShelfLifeTol >= kShelfLife && q <= kShelfLife + kShelfLifeTol;
        return pass_if(ok, fmt("VAR(%zu) shelf life %zu quarters%s (expect %zu +- %zu)", a->model.order(), q,
                               a->shelf_life.censored ? " (censored)" : "", kShelfLife, kShelfLifeTol));
    });

    std::printf("summary: %d hard failure(s) in 1-10; %d fixture mismatch(es) in 11-16 (best-effort)\n", hard_failures,
                fixture_failures);
    return hard_failures == 0 ? 0 : 1;
}

#include "gwts/structural.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <nlohmann/json.hpp>

#include "gwts/distributions.hpp"
#include "gwts/error.hpp"
#include "gwts/parallel.hpp"
#include "gwts/report.hpp"

namespace gwts {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

void validate_sets(const std::vector<std::size_t>& cause, const std::vector<std::size_t>& effect, std::size_t n) {
    if (cause.empty() || effect.empty()) throw DomainError("cause and effect sets must be non-empty");
    std::set<std::size_t> c(cause.begin(), cause.end());
    std::set<std::size_t> e(effect.begin(), effect.end());
    if (c.size() != cause.size() || e.size() != effect.size()) throw DomainError("duplicate variable in cause or effect set");
    for (auto i : c) {
        if (i >= n) throw DomainError("cause variable index out of range");
        if (e.count(i)) throw DomainError("cause and effect sets must be disjoint");
    }
    for (auto i : e) {
        if (i >= n) throw DomainError("effect variable index out of range");
    }
}

MatrixXd cholesky_lower(const MatrixXd& sigma) {
    Eigen::LLT<MatrixXd> llt(sigma);
    if (llt.info() != Eigen::Success) throw SingularityError("residual covariance is not positive definite");
    return llt.matrixL();
}

double percentile(std::vector<double>& v, double q) {
    std::sort(v.begin(), v.end());
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return v[lo] + frac * (v[hi] - v[lo]);
}

}  // namespace

GrangerReport granger_test(const VarModel& model, const std::vector<std::size_t>& cause,
                           const std::vector<std::size_t>& effect, double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance level must lie in (0, 1)");
    const std::size_t n = model.n_vars();
    const std::size_t p = model.order();
    validate_sets(cause, effect, n);

    const MatrixXd x = lagged_design(model.data, p);
    const MatrixXd xtx_inv = (x.transpose() * x).inverse();
    const MatrixXd b = model.coefficient_matrix();
    // Wald covariance uses the degrees-of-freedom adjusted residual covariance.
    const std::size_t k = model.n_regressors();
    const double dof = static_cast<double>(model.t_effective() - k);
    const MatrixXd sigma = model.residuals.transpose() * model.residuals / dof;

    struct Cell {
        Index row;
        Index eq;
    };
    std::vector<Cell> cells;
    for (std::size_t l = 0; l < p; ++l) {
        for (auto c : cause) {
            for (auto e : effect) cells.push_back({idx(1 + l * n + c), idx(e)});
        }
    }
    const Index m = static_cast<Index>(cells.size());
    VectorXd br(m);
    MatrixXd v(m, m);
    for (Index i = 0; i < m; ++i) {
        br(i) = b(cells[i].row, cells[i].eq);
        for (Index j = 0; j < m; ++j) v(i, j) = sigma(cells[i].eq, cells[j].eq) * xtx_inv(cells[i].row, cells[j].row);
    }
    Eigen::FullPivLU<MatrixXd> lu(v);
    if (!lu.isInvertible()) throw SingularityError("Wald covariance of the restricted coefficients is singular");
    const double wald = br.dot(lu.solve(br));

    GrangerReport r;
    r.cause = cause;
    r.effect = effect;
    for (auto c : cause) r.cause_names.push_back(model.var_names[c]);
    for (auto e : effect) r.effect_names.push_back(model.var_names[e]);
    r.df1 = static_cast<double>(m);
    r.df2 = static_cast<double>(n) * dof;
    r.statistic = wald / r.df1;
    r.p_value = std::clamp(dist::f_sf(r.statistic, r.df1, r.df2), 0.0, 1.0);
    r.alpha = alpha;
    r.reject = r.p_value < alpha;
    return r;
}

GrangerReport granger_test(const MatrixXd& data, std::size_t p, const std::vector<std::size_t>& cause,
                           const std::vector<std::size_t>& effect, double alpha, const std::vector<std::string>& names) {
    validate_sets(cause, effect, static_cast<std::size_t>(data.cols()));
    return granger_test(fit_var(data, p, FitOptions{SigmaDivisor::DegreesOfFreedom, names}), cause, effect, alpha);
}

std::string GrangerReport::to_json() const {
    nlohmann::ordered_json j;
    j["test"] = "granger_f";
    j["cause"] = cause_names;
    j["effect"] = effect_names;
    j["statistic"] = statistic;
    j["df1"] = df1;
    j["df2"] = df2;
    j["p_value"] = p_value;
    j["alpha"] = alpha;
    j["reject"] = reject;
    return j.dump(2);
}

std::vector<MatrixXd> ma_matrices(const VarModel& model, std::size_t horizon) {
    const std::size_t n = model.n_vars();
    const std::size_t p = model.order();
    std::vector<MatrixXd> psi;
    psi.push_back(MatrixXd::Identity(idx(n), idx(n)));
    for (std::size_t h = 1; h <= horizon; ++h) {
        MatrixXd acc = MatrixXd::Zero(idx(n), idx(n));
        for (std::size_t i = 1; i <= std::min(h, p); ++i) acc += model.lags[i - 1] * psi[h - i];
        psi.push_back(std::move(acc));
    }
    return psi;
}

std::vector<MatrixXd> orthogonal_irf(const VarModel& model, std::size_t horizon) {
    const MatrixXd chol = cholesky_lower(model.sigma);
    auto psi = ma_matrices(model, horizon);
    for (auto& m : psi) m = m * chol;
    return psi;
}

IrfResult irf(const VarModel& model, const IrfOptions& options) {
    if (options.horizon < 1) throw DomainError("IRF horizon must be at least 1");
    if (!(options.ci > 0.0 && options.ci < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
    IrfResult out;
    out.var_names = model.var_names;
    out.ci = options.ci;
    out.unstable = !companion_stability(model).stable;
    if (out.unstable && !options.allow_unstable) {
        throw DomainError("model is not stable (companion eigenvalue modulus >= 1); set allow_unstable to proceed");
    }
    out.responses = orthogonal_irf(model, options.horizon);
    out.lower = out.responses;
    out.upper = out.responses;
    if (options.n_boot == 0) return out;

    const std::size_t n = model.n_vars();
    const std::size_t p = model.order();
    const std::size_t t_eff = model.t_effective();
    const MatrixXd centered = model.residuals.rowwise() - model.residuals.colwise().mean();
    const MatrixXd initial = model.data.topRows(idx(p));
    const FitOptions fit_opts{model.divisor, model.var_names};

    std::vector<std::vector<MatrixXd>> draws(options.n_boot);
    std::vector<char> ok(options.n_boot, 0);
    parallel_for(options.n_boot, options.threads, [&](std::size_t r) {
        // One independent stream per replicate keeps results independent of scheduling.
        std::seed_seq seq{static_cast<std::uint32_t>(options.seed & 0xffffffffu),
                          static_cast<std::uint32_t>(options.seed >> 32), static_cast<std::uint32_t>(r)};
        std::mt19937_64 rng(seq);
        std::uniform_int_distribution<std::size_t> pick(0, t_eff - 1);
        MatrixXd innov(idx(t_eff), idx(n));
        for (std::size_t t = 0; t < t_eff; ++t) innov.row(idx(t)) = centered.row(idx(pick(rng)));
        try {
            const MatrixXd series = simulate_var(model.intercept, model.lags, initial, innov);
            draws[r] = orthogonal_irf(fit_var(series, p, fit_opts), options.horizon);
            ok[r] = 1;
        } catch (const Error&) {
            ok[r] = 0;
        }
    });
    std::vector<std::size_t> good;
    for (std::size_t r = 0; r < options.n_boot; ++r) {
        if (ok[r]) good.push_back(r);
    }
    out.n_boot = good.size();
    out.n_boot_failed = options.n_boot - good.size();
    if (good.empty()) return out;

    const double q_lo = (1.0 - options.ci) / 2.0;
    const double q_hi = 1.0 - q_lo;
    std::vector<double> cell(good.size());
    for (std::size_t h = 0; h <= options.horizon; ++h) {
        for (Index j = 0; j < idx(n); ++j) {
            for (Index k = 0; k < idx(n); ++k) {
                for (std::size_t i = 0; i < good.size(); ++i) cell[i] = draws[good[i]][h](j, k);
                const double point = out.responses[h](j, k);
                out.lower[h](j, k) = std::min(percentile(cell, q_lo), point);
                out.upper[h](j, k) = std::max(percentile(cell, q_hi), point);
            }
        }
    }
    return out;
}

std::string IrfResult::to_csv() const {
    std::ostringstream os;
    os << "horizon,impulse,response,value,lower,upper\n";
    const Index n = static_cast<Index>(var_names.size());
    for (std::size_t h = 0; h < responses.size(); ++h) {
        for (Index k = 0; k < n; ++k) {
            for (Index j = 0; j < n; ++j) {
                os << h << ',' << var_names[static_cast<std::size_t>(k)] << ',' << var_names[static_cast<std::size_t>(j)]
                   << ',' << format_double(responses[h](j, k)) << ',' << format_double(lower[h](j, k)) << ','
                   << format_double(upper[h](j, k)) << '\n';
            }
        }
    }
    return os.str();
}

FevdResult fevd(const VarModel& model, std::size_t horizon) {
    if (horizon < 1) throw DomainError("FEVD horizon must be at least 1");
    const auto theta = orthogonal_irf(model, horizon - 1);
    const Index n = static_cast<Index>(model.n_vars());
    FevdResult out;
    out.var_names = model.var_names;
    MatrixXd cum = MatrixXd::Zero(n, n);
    for (std::size_t h = 0; h < horizon; ++h) {
        cum += theta[h].cwiseAbs2();
        const VectorXd total = cum.rowwise().sum();
        MatrixXd share(n, n);
        for (Index j = 0; j < n; ++j) share.row(j) = cum.row(j) / total(j);
        out.proportions.push_back(std::move(share));
    }
    return out;
}

std::string FevdResult::to_csv() const {
    std::ostringstream os;
    os << "horizon,variable,shock,share\n";
    const Index n = static_cast<Index>(var_names.size());
    for (std::size_t h = 0; h < proportions.size(); ++h) {
        for (Index j = 0; j < n; ++j) {
            for (Index k = 0; k < n; ++k) {
                os << h + 1 << ',' << var_names[static_cast<std::size_t>(j)] << ',' << var_names[static_cast<std::size_t>(k)]
                   << ',' << format_double(proportions[h](j, k)) << '\n';
            }
        }
    }
    return os.str();
}

}  // namespace gwts

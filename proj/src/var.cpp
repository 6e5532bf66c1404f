#include "gwts/var.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "gwts/error.hpp"
#include "gwts/report.hpp"

namespace gwts {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

Index idx(std::size_t i) { return static_cast<Index>(i); }

std::vector<std::string> default_names(std::size_t n) {
    std::vector<std::string> names;
    for (std::size_t i = 0; i < n; ++i) names.push_back("y" + std::to_string(i + 1));
    return names;
}

std::string regressor_name(const std::vector<std::string>& names, std::size_t col) {
    if (col == 0) return "const";
    const std::size_t n = names.size();
    const std::size_t lag = (col - 1) / n + 1;
    return names[(col - 1) % n] + ".l" + std::to_string(lag);
}

void require_finite(const MatrixXd& data) {
    if (!data.allFinite()) throw DomainError("series contains non-finite values");
}

double log_det_spd(const MatrixXd& m) {
    Eigen::LLT<MatrixXd> llt(m);
    if (llt.info() != Eigen::Success) throw SingularityError("residual covariance is not positive definite");
    const auto& l = llt.matrixL();
    double s = 0.0;
    for (Index i = 0; i < m.rows(); ++i) s += std::log(l(i, i));
    return 2.0 * s;
}

nlohmann::json matrix_to_json(const MatrixXd& m) {
    auto rows = nlohmann::json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        auto row = nlohmann::json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

MatrixXd matrix_from_json(const nlohmann::json& j, Index cols_hint = -1) {
    const Index rows = static_cast<Index>(j.size());
    const Index cols = rows > 0 ? static_cast<Index>(j.at(0).size()) : std::max<Index>(cols_hint, 0);
    MatrixXd m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
        const auto& row = j.at(static_cast<std::size_t>(r));
        if (static_cast<Index>(row.size()) != cols) throw Error("ragged matrix in model JSON");
        for (Index c = 0; c < cols; ++c) m(r, c) = row.at(static_cast<std::size_t>(c)).get<double>();
    }
    return m;
}

}  // namespace

MatrixXd VarModel::coefficient_matrix() const {
    const std::size_t n = n_vars();
    MatrixXd b(idx(n_regressors()), idx(n));
    b.row(0) = intercept.transpose();
    for (std::size_t l = 0; l < order(); ++l) {
        b.block(idx(1 + l * n), 0, idx(n), idx(n)) = lags[l].transpose();
    }
    return b;
}

MatrixXd VarModel::fitted() const {
    return lagged_design(data, order()) * coefficient_matrix();
}

MatrixXd lagged_design(const MatrixXd& data, std::size_t p) {
    const Index t_total = data.rows();
    const Index n = data.cols();
    const Index rows = t_total - idx(p);
    if (rows <= 0) throw SampleSizeError("series shorter than the lag order");
    MatrixXd x(rows, 1 + n * idx(p));
    x.col(0).setOnes();
    for (std::size_t l = 1; l <= p; ++l) {
        x.block(0, 1 + idx(l - 1) * n, rows, n) = data.block(idx(p - l), 0, rows, n);
    }
    return x;
}

VarModel fit_var(const MatrixXd& data, std::size_t p, const FitOptions& options) {
    if (p < 1) throw DomainError("lag order p must be at least 1");
    if (data.cols() < 1) throw DomainError("series must have at least one variable");
    require_finite(data);
    const std::size_t n = static_cast<std::size_t>(data.cols());
    const std::size_t t_total = static_cast<std::size_t>(data.rows());
    const std::size_t k = n * p + 1;
    if (t_total <= p + k) {
        throw SampleSizeError("VAR(" + std::to_string(p) + ") with " + std::to_string(n) + " variables needs at least " +
                              std::to_string(p + k + 1) + " observations, got " + std::to_string(t_total));
    }
    auto names = options.var_names.empty() ? default_names(n) : options.var_names;
    if (names.size() != n) throw DomainError("var_names length does not match the number of series");

    const MatrixXd x = lagged_design(data, p);
    const MatrixXd y = data.bottomRows(idx(t_total - p));

    // A constant lagged column is collinear with the intercept; name it directly.
    std::vector<std::string> offending;
    for (Index c = 1; c < x.cols(); ++c) {
        if ((x.col(c).array() == x(0, c)).all()) offending.push_back(regressor_name(names, static_cast<std::size_t>(c)));
    }
    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    if (offending.empty() && qr.rank() < x.cols()) {
        const auto& perm = qr.colsPermutation().indices();
        for (Index i = qr.rank(); i < x.cols(); ++i) offending.push_back(regressor_name(names, static_cast<std::size_t>(perm(i))));
    }
    if (!offending.empty()) {
        std::string list;
        for (const auto& o : offending) list += (list.empty() ? "" : ", ") + o;
        throw SingularityError("regressor matrix is rank deficient; collinear columns: " + list);
    }

    const MatrixXd b = qr.solve(y);
    VarModel m;
    m.var_names = std::move(names);
    m.divisor = options.divisor;
    m.data = data;
    m.intercept = b.row(0).transpose();
    for (std::size_t l = 0; l < p; ++l) m.lags.push_back(b.block(idx(1 + l * n), 0, idx(n), idx(n)).transpose());
    m.residuals = y - x * b;
    const double denom = options.divisor == SigmaDivisor::DegreesOfFreedom ? static_cast<double>(t_total - p - k)
                                                                           : static_cast<double>(t_total - p);
    MatrixXd s = m.residuals.transpose() * m.residuals / denom;
    m.sigma = 0.5 * (s + s.transpose());
    return m;
}

const char* criterion_name(Criterion c) noexcept {
    switch (c) {
        case Criterion::AIC: return "AIC";
        case Criterion::BIC: return "BIC";
        case Criterion::HQ: return "HQ";
        case Criterion::FPE: return "FPE";
    }
    return "?";
}

std::size_t min_length_for_lag_search(std::size_t n, std::size_t p_max) noexcept {
    return n * p_max + p_max + 2;
}

LagSelection select_lag_order(const MatrixXd& data, std::size_t p_max) {
    if (p_max < 1) throw DomainError("p_max must be at least 1");
    const std::size_t n = static_cast<std::size_t>(data.cols());
    const std::size_t t_total = static_cast<std::size_t>(data.rows());
    const std::size_t min_t = min_length_for_lag_search(n, p_max);
    if (t_total < min_t) {
        throw SampleSizeError("lag search up to p_max=" + std::to_string(p_max) + " with " + std::to_string(n) +
                              " variables needs T >= " + std::to_string(min_t) + ", got " + std::to_string(t_total));
    }
    const double t_eff = static_cast<double>(t_total - p_max);
    const double dn = static_cast<double>(n);

    LagSelection sel;
    sel.p_max = p_max;
    sel.scores.assign(std::size(kAllCriteria), std::vector<double>(p_max));
    for (std::size_t p = 1; p <= p_max; ++p) {
        // Drop the first p_max - p rows so every p is scored on t = p_max+1..T.
        const MatrixXd sub = data.bottomRows(idx(t_total - (p_max - p)));
        const VarModel m = fit_var(sub, p, FitOptions{SigmaDivisor::MaximumLikelihood, {}});
        const double ld = log_det_spd(m.sigma);
        const double k_eq = dn * static_cast<double>(p) + 1.0;
        const double k = dn * k_eq;
        sel.scores[0][p - 1] = ld + 2.0 * k / t_eff;
        sel.scores[1][p - 1] = ld + std::log(t_eff) * k / t_eff;
        sel.scores[2][p - 1] = ld + 2.0 * std::log(std::log(t_eff)) * k / t_eff;
        sel.scores[3][p - 1] = std::pow((t_eff + k_eq) / (t_eff - k_eq), dn) * std::exp(ld);
    }
    std::map<std::size_t, int> votes;
    for (const auto& col : sel.scores) {
        const auto best = static_cast<std::size_t>(std::min_element(col.begin(), col.end()) - col.begin()) + 1;
        sel.chosen.push_back(best);
        ++votes[best];
    }
    int top = 0;
    for (const auto& [p, v] : votes) {
        if (v > top) {
            top = v;
            sel.consensus = p;
        }
    }
    sel.unanimous = votes.size() == 1;
    return sel;
}

std::string LagSelection::to_csv() const {
    std::ostringstream os;
    os << "p";
    for (Criterion c : kAllCriteria) os << ',' << criterion_name(c);
    os << '\n';
    for (std::size_t p = 1; p <= p_max; ++p) {
        os << p;
        for (const auto& col : scores) os << ',' << format_double(col[p - 1]);
        os << '\n';
    }
    return os.str();
}

MatrixXd companion_matrix(const VarModel& model) {
    const std::size_t n = model.n_vars();
    const std::size_t p = model.order();
    MatrixXd a = MatrixXd::Zero(idx(n * p), idx(n * p));
    for (std::size_t l = 0; l < p; ++l) a.block(0, idx(l * n), idx(n), idx(n)) = model.lags[l];
    if (p > 1) a.block(idx(n), 0, idx(n * (p - 1)), idx(n * (p - 1))).setIdentity();
    return a;
}

StabilityReport companion_stability(const VarModel& model) {
    const MatrixXd a = companion_matrix(model);
    Eigen::EigenSolver<MatrixXd> es(a, false);
    StabilityReport r;
    for (Index i = 0; i < a.rows(); ++i) r.moduli.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(r.moduli.begin(), r.moduli.end(), std::greater<>());
    r.stable = r.moduli.empty() || r.moduli.front() < 1.0;
    return r;
}

MatrixXd forecast(const VarModel& model, const MatrixXd& history, std::size_t h) {
    if (h < 1) throw DomainError("forecast horizon must be at least 1");
    const std::size_t p = model.order();
    const std::size_t n = model.n_vars();
    if (static_cast<std::size_t>(history.rows()) < p || static_cast<std::size_t>(history.cols()) != n) {
        throw DomainError("forecast history must have at least p rows and n columns");
    }
    MatrixXd path(idx(p + h), idx(n));
    path.topRows(idx(p)) = history.bottomRows(idx(p));
    for (std::size_t t = p; t < p + h; ++t) {
        VectorXd x = model.intercept;
        for (std::size_t l = 1; l <= p; ++l) x += model.lags[l - 1] * path.row(idx(t - l)).transpose();
        path.row(idx(t)) = x.transpose();
    }
    return path.bottomRows(idx(h));
}

VectorXd unconditional_mean(const VarModel& model) {
    const std::size_t n = model.n_vars();
    MatrixXd a = MatrixXd::Identity(idx(n), idx(n));
    for (const auto& g : model.lags) a -= g;
    Eigen::FullPivLU<MatrixXd> lu(a);
    if (!lu.isInvertible()) throw SingularityError("I - sum(G_i) is singular: the process has a unit root");
    return lu.solve(model.intercept);
}

MatrixXd simulate_var(const VectorXd& intercept, const std::vector<MatrixXd>& lags, const MatrixXd& initial,
                      const MatrixXd& innovations) {
    const std::size_t p = lags.size();
    const Index n = intercept.size();
    if (static_cast<std::size_t>(initial.rows()) != p || initial.cols() != n || innovations.cols() != n) {
        throw DomainError("simulate_var: initial must be p x n and innovations T x n");
    }
    MatrixXd out(idx(p) + innovations.rows(), n);
    out.topRows(idx(p)) = initial;
    for (Index t = idx(p); t < out.rows(); ++t) {
        VectorXd x = intercept + innovations.row(t - idx(p)).transpose();
        for (std::size_t l = 1; l <= p; ++l) x += lags[l - 1] * out.row(t - idx(l)).transpose();
        out.row(t) = x.transpose();
    }
    return out;
}

MatrixXd difference(const MatrixXd& data, std::size_t d) {
    MatrixXd out = data;
    for (std::size_t i = 0; i < d; ++i) {
        if (out.rows() < 2) throw SampleSizeError("series too short to difference");
        out = (out.bottomRows(out.rows() - 1) - out.topRows(out.rows() - 1)).eval();
    }
    return out;
}

VarModel permute_variables(const VarModel& model, const std::vector<std::size_t>& order) {
    const std::size_t n = model.n_vars();
    std::vector<std::size_t> check = order;
    std::sort(check.begin(), check.end());
    for (std::size_t i = 0; i < check.size(); ++i) {
        if (check.size() != n || check[i] != i) throw DomainError("ordering must be a permutation of 0..n-1");
    }
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(idx(n));
    for (std::size_t i = 0; i < n; ++i) perm.indices()(idx(order[i])) = static_cast<int>(i);
    VarModel out;
    out.divisor = model.divisor;
    out.intercept = perm * model.intercept;
    for (const auto& g : model.lags) out.lags.push_back(perm * g * perm.transpose());
    out.sigma = perm * model.sigma * perm.transpose();
    out.residuals = model.residuals * perm.transpose();
    out.data = model.data * perm.transpose();
    for (std::size_t i = 0; i < n; ++i) out.var_names.push_back(model.var_names[order[i]]);
    return out;
}

std::string model_to_json(const VarModel& model) {
    nlohmann::ordered_json j;
    j["format"] = "gwts.var_model";
    j["version"] = 1;
    j["p"] = model.order();
    j["n"] = model.n_vars();
    j["t_effective"] = model.t_effective();
    j["var_names"] = model.var_names;
    j["sigma_divisor"] = model.divisor == SigmaDivisor::DegreesOfFreedom ? "dof" : "ml";
    j["intercept"] = std::vector<double>(model.intercept.data(), model.intercept.data() + model.intercept.size());
    auto lags = nlohmann::json::array();
    for (const auto& g : model.lags) lags.push_back(matrix_to_json(g));
    j["lags"] = std::move(lags);
    j["sigma"] = matrix_to_json(model.sigma);
    j["residuals"] = matrix_to_json(model.residuals);
    j["data"] = matrix_to_json(model.data);
    return j.dump(1);
}

VarModel model_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("invalid model JSON: ") + e.what());
    }
    try {
        if (j.value("format", "") != "gwts.var_model") throw Error("not a gwts VAR model document");
        VarModel m;
        const auto n = j.at("n").get<std::size_t>();
        m.var_names = j.at("var_names").get<std::vector<std::string>>();
        m.divisor = j.at("sigma_divisor").get<std::string>() == "ml" ? SigmaDivisor::MaximumLikelihood
                                                                      : SigmaDivisor::DegreesOfFreedom;
        const auto c = j.at("intercept").get<std::vector<double>>();
        m.intercept = Eigen::Map<const VectorXd>(c.data(), static_cast<Index>(c.size()));
        for (const auto& g : j.at("lags")) m.lags.push_back(matrix_from_json(g));
        m.sigma = matrix_from_json(j.at("sigma"));
        m.residuals = matrix_from_json(j.at("residuals"), idx(n));
        m.data = matrix_from_json(j.at("data"), idx(n));
        if (m.intercept.size() != idx(n) || m.var_names.size() != n || m.sigma.rows() != idx(n) ||
            m.residuals.cols() != idx(n) || m.data.cols() != idx(n)) {
            throw Error("model JSON dimensions are inconsistent");
        }
        for (const auto& g : m.lags) {
            if (g.rows() != idx(n) || g.cols() != idx(n)) throw Error("model JSON lag matrix has wrong shape");
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed model JSON: ") + e.what());
    }
}

}  // namespace gwts

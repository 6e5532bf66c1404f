#include "gwts/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include "gwts/distributions.hpp"
#include "gwts/error.hpp"
#include "gwts/report.hpp"

namespace gwts {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

void check_alpha(double alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("significance level must lie in (0, 1)");
}

DiagnosticReport make_report(std::string name, double stat, double df, double p, double alpha) {
    DiagnosticReport r;
    r.test_name = std::move(name);
    r.statistic = stat;
    r.df = df;
    r.p_value = std::clamp(p, 0.0, 1.0);
    r.alpha = alpha;
    r.reject = r.p_value < alpha;
    return r;
}

MatrixXd inverse_spd(const MatrixXd& m, const char* what) {
    Eigen::FullPivLU<MatrixXd> lu(m);
    if (!lu.isInvertible()) throw SingularityError(std::string(what) + " is singular");
    return lu.inverse();
}

}  // namespace

DiagnosticReport at_level(DiagnosticReport report, double alpha) {
    check_alpha(alpha);
    report.alpha = alpha;
    report.reject = report.p_value < alpha;
    return report;
}

DiagnosticReport portmanteau_test(const MatrixXd& residuals, std::size_t model_lags, std::size_t h_lags, double alpha) {
    check_alpha(alpha);
    if (h_lags <= model_lags) throw DomainError("portmanteau lag count must exceed the model lag order");
    const Index t = residuals.rows();
    const Index n = residuals.cols();
    if (static_cast<Index>(h_lags) >= t) throw SampleSizeError("portmanteau lag count must be below the sample size");

    const double dt = static_cast<double>(t);
    const MatrixXd c0 = residuals.transpose() * residuals / dt;
    const MatrixXd c0_inv = inverse_spd(c0, "residual autocovariance at lag 0");
    double q = 0.0;
    for (std::size_t j = 1; j <= h_lags; ++j) {
        const Index lag = static_cast<Index>(j);
        const MatrixXd cj = residuals.bottomRows(t - lag).transpose() * residuals.topRows(t - lag) / dt;
        q += (cj.transpose() * c0_inv * cj * c0_inv).trace() / (dt - static_cast<double>(j));
    }
    q *= dt * dt;
    const double df = static_cast<double>(n * n) * static_cast<double>(h_lags - model_lags);
    return make_report("portmanteau", q, df, dist::chi2_sf(q, df), alpha);
}

DiagnosticReport portmanteau_test(const VarModel& model, std::size_t h_lags, double alpha) {
    return portmanteau_test(model.residuals, model.order(), h_lags, alpha);
}

DiagnosticReport arch_test(const MatrixXd& residuals, std::size_t q_lags, double alpha) {
    check_alpha(alpha);
    if (q_lags < 1) throw DomainError("ARCH lag count must be at least 1");
    const Index t = residuals.rows();
    const Index n = residuals.cols();
    const Index m = n * (n + 1) / 2;
    const Index q = static_cast<Index>(q_lags);
    const Index rows = t - q;
    const Index k = 1 + q * m;
    if (rows <= k) {
        throw SampleSizeError("ARCH-LM with q=" + std::to_string(q_lags) + " needs more than " +
                              std::to_string(k + q) + " residual rows, got " + std::to_string(t));
    }
    MatrixXd vech(t, m);
    for (Index r = 0; r < t; ++r) {
        Index c = 0;
        for (Index j = 0; j < n; ++j) {
            for (Index i = j; i < n; ++i) vech(r, c++) = residuals(r, i) * residuals(r, j);
        }
    }
    MatrixXd x(rows, k);
    x.col(0).setOnes();
    for (Index l = 1; l <= q; ++l) x.block(0, 1 + (l - 1) * m, rows, m) = vech.block(q - l, 0, rows, m);
    const MatrixXd y = vech.bottomRows(rows);

    Eigen::ColPivHouseholderQR<MatrixXd> qr(x);
    if (qr.rank() < k) throw SingularityError("ARCH-LM auxiliary regressors are rank deficient");
    const MatrixXd e = y - x * qr.solve(y);
    const double dr = static_cast<double>(rows);
    const MatrixXd omega = e.transpose() * e / dr;
    const MatrixXd yc = y.rowwise() - y.colwise().mean();
    const MatrixXd omega0 = yc.transpose() * yc / dr;
    const double dn = static_cast<double>(n);
    const double r2 = 1.0 - (2.0 / (dn * (dn + 1.0))) * (omega * inverse_spd(omega0, "ARCH-LM null covariance")).trace();
    const double stat = 0.5 * dr * dn * (dn + 1.0) * r2;
    const double df = static_cast<double>(q_lags) * dn * dn * (dn + 1.0) * (dn + 1.0) / 4.0;
    return make_report("arch_lm", stat, df, dist::chi2_sf(stat, df), alpha);
}

DiagnosticReport arch_test(const VarModel& model, std::size_t q_lags, double alpha) {
    return arch_test(model.residuals, q_lags, alpha);
}

NormalityReports normality_tests(const MatrixXd& residuals, double alpha) {
    check_alpha(alpha);
    const Index t = residuals.rows();
    const Index n = residuals.cols();
    if (t <= n + 1) throw SampleSizeError("normality tests need more than n + 1 residual rows");
    const double dt = static_cast<double>(t);
    const MatrixXd centered = residuals.rowwise() - residuals.colwise().mean();
    const MatrixXd s = centered.transpose() * centered / dt;
    Eigen::LLT<MatrixXd> llt(s);
    if (llt.info() != Eigen::Success) throw SingularityError("residual covariance is not positive definite");
    // w_t = P^{-1} u_t with P the lower Cholesky factor.
    const MatrixXd w = llt.matrixL().solve(centered.transpose()).transpose();
    VectorXd b1(n), b2(n);
    for (Index j = 0; j < n; ++j) {
        b1(j) = w.col(j).array().cube().mean();
        b2(j) = w.col(j).array().square().square().mean();
    }
    const double skew = dt * b1.squaredNorm() / 6.0;
    const double kurt = dt * (b2.array() - 3.0).matrix().squaredNorm() / 24.0;
    const double dn = static_cast<double>(n);
    NormalityReports out;
    out.skewness = make_report("skewness", skew, dn, dist::chi2_sf(skew, dn), alpha);
    out.kurtosis = make_report("kurtosis", kurt, dn, dist::chi2_sf(kurt, dn), alpha);
    out.jarque_bera = make_report("jarque_bera", skew + kurt, 2.0 * dn, dist::chi2_sf(skew + kurt, 2.0 * dn), alpha);
    return out;
}

NormalityReports normality_tests(const VarModel& model, double alpha) {
    return normality_tests(model.residuals, alpha);
}

double cusum_boundary(double alpha) {
    return dist::brownian_bridge_boundary(alpha);
}

EfpPath ols_cusum(const MatrixXd& residuals, std::size_t regressors, double alpha, std::vector<std::string> names) {
    check_alpha(alpha);
    const Index t = residuals.rows();
    const Index n = residuals.cols();
    if (t <= static_cast<Index>(regressors)) throw SampleSizeError("OLS-CUSUM needs more residuals than regressors");
    if (names.empty()) {
        for (Index j = 0; j < n; ++j) names.push_back("y" + std::to_string(j + 1));
    }
    if (static_cast<Index>(names.size()) != n) throw DomainError("EFP names do not match residual columns");

    EfpPath efp;
    efp.alpha = alpha;
    efp.boundary = cusum_boundary(alpha);
    efp.names = std::move(names);
    const double dt = static_cast<double>(t);
    for (Index k = 0; k <= t; ++k) efp.times.push_back(static_cast<double>(k) / dt);
    for (Index j = 0; j < n; ++j) {
        const double ss = residuals.col(j).squaredNorm();
        const double scale = residuals.col(j).cwiseAbs().maxCoeff();
        const double sigma = std::sqrt(ss / (dt - static_cast<double>(regressors)));
        if (!(sigma > 0.0) || sigma <= 1e-14 * std::max(scale, 1e-300)) {
            throw DegeneracyError("residual variance of equation '" + efp.names[static_cast<std::size_t>(j)] +
                                  "' is zero; the fluctuation process is undefined");
        }
        std::vector<double> path{0.0};
        double acc = 0.0, mx = 0.0;
        const double denom = sigma * std::sqrt(dt);
        for (Index k = 0; k < t; ++k) {
            acc += residuals(k, j);
            path.push_back(acc / denom);
            mx = std::max(mx, std::abs(path.back()));
        }
        efp.paths.push_back(std::move(path));
        efp.max_abs.push_back(mx);
        efp.p_values.push_back(dist::brownian_bridge_sup_sf(mx));
        efp.crossed.push_back(mx > efp.boundary);
    }
    return efp;
}

EfpPath ols_cusum(const VarModel& model, double alpha) {
    return ols_cusum(model.residuals, model.n_regressors(), alpha, model.var_names);
}

std::string EfpPath::to_csv() const {
    std::ostringstream os;
    os << "t";
    for (const auto& name : names) os << ',' << name;
    os << ",lower,upper\n";
    for (std::size_t k = 0; k < times.size(); ++k) {
        os << format_double(times[k]);
        for (const auto& p : paths) os << ',' << format_double(p[k]);
        os << ',' << format_double(-boundary) << ',' << format_double(boundary) << '\n';
    }
    return os.str();
}

std::string reports_to_json(const std::vector<DiagnosticReport>& reports) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& r : reports) {
        nlohmann::ordered_json j;
        j["test"] = r.test_name;
        j["statistic"] = r.statistic;
        j["df"] = r.df;
        j["p_value"] = r.p_value;
        j["alpha"] = r.alpha;
        j["reject"] = r.reject;
        arr.push_back(std::move(j));
    }
    return arr.dump(2);
}

std::vector<DiagnosticReport> reports_from_json(const std::string& text) {
    std::vector<DiagnosticReport> out;
    try {
        for (const auto& j : nlohmann::json::parse(text)) {
            DiagnosticReport r;
            r.test_name = j.at("test").get<std::string>();
            r.statistic = j.at("statistic").get<double>();
            r.df = j.at("df").get<double>();
            r.p_value = j.at("p_value").get<double>();
            r.alpha = j.at("alpha").get<double>();
            r.reject = j.at("reject").get<bool>();
            out.push_back(std::move(r));
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(std::string("malformed diagnostics JSON: ") + e.what());
    }
    return out;
}

}  // namespace gwts

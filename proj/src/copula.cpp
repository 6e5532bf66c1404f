#include "gwts/copula.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <Eigen/Cholesky>
#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "gwts/parallel.hpp"
#include "gwts/report.hpp"

namespace gwts {

namespace {

constexpr double kEdge = 1e-10;

using Vec3 = std::array<double, 3>;

double nudge(double x) {
    return std::clamp(x, kEdge, 1.0 - kEdge);
}

double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double lgam(double x) { return boost::math::lgamma(x); }
double digam(double x) { return boost::math::digamma(x); }

double mean(std::span<const double> x) {
    return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

double pop_variance(std::span<const double> x) {
    const double m = mean(x);
    double s = 0.0;
    for (double xi : x) s += (xi - m) * (xi - m);
    return s / static_cast<double>(x.size());
}

double norm3(const Vec3& g) { return std::sqrt(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]); }

void check_inputs(std::span<const double> u, std::span<const double> v) {
    if (u.size() != v.size()) throw DomainError("pseudo-series must have equal length");
    if (u.size() < 3) throw SampleSizeError("beta regression needs at least 3 observations");
    for (std::size_t i = 0; i < u.size(); ++i) {
        if (!(u[i] > 0.0 && u[i] < 1.0) || !(v[i] > 0.0 && v[i] < 1.0)) {
            throw DomainError("pseudo-observations must lie strictly inside (0, 1)");
        }
    }
}

/// Moment-matched start: OLS of logit(v) on u, precision from the implied variance.
Vec3 initial_values(std::span<const double> u, std::span<const double> v) {
    const std::size_t n = u.size();
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = std::log(v[i] / (1.0 - v[i]));
    const double mu_u = mean(u), mu_z = mean(z);
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        sxy += (u[i] - mu_u) * (z[i] - mu_z);
        sxx += (u[i] - mu_u) * (u[i] - mu_u);
    }
    const double b1 = sxx > 0.0 ? sxy / sxx : 0.0;
    const double b0 = mu_z - b1 * mu_u;
    double ss = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = z[i] - b0 - b1 * u[i];
        ss += r * r;
    }
    const double s2 = std::max(ss / static_cast<double>(n - 2), 1e-8);
    double phi = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double mu = logistic(b0 + b1 * u[i]);
        phi += 1.0 / (s2 * mu * (1.0 - mu)) - 1.0;
    }
    phi = std::clamp(phi / static_cast<double>(n), 1.0, 1e6);
    return {b0, b1, std::log(phi)};
}

GcbrFit finish(std::span<const double> u, const Vec3& theta, double loglik, double gnorm, std::size_t iters,
               bool converged) {
    GcbrFit fit;
    fit.beta0 = theta[0];
    fit.beta1 = theta[1];
    fit.phi = std::exp(theta[2]);
    fit.loglik = loglik;
    fit.gradient_norm = gnorm;
    fit.iterations = iters;
    fit.converged = converged;
    fit.fitted.resize(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) fit.fitted[i] = logistic(theta[0] + theta[1] * u[i]);
    return fit;
}

}  // namespace

PseudoSeries pseudo_observations(std::span<const double> x, std::string source) {
    const std::size_t n = x.size();
    if (n < 3) throw SampleSizeError("pseudo-observations need at least 3 values");
    for (double xi : x) {
        if (!std::isfinite(xi)) throw DomainError("pseudo-observations need finite values");
    }
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
    PseudoSeries out;
    out.source = std::move(source);
    out.u.resize(n);
    const double denom = static_cast<double>(n + 1);
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        // Ranks i+1..j+1 share their average.
        const double rank = 0.5 * static_cast<double>(i + 1 + j + 1);
        for (std::size_t k = i; k <= j; ++k) out.u[order[k]] = rank / denom;
        i = j + 1;
    }
    return out;
}

double gcbr_loglik(std::span<const double> u, std::span<const double> v, const Vec3& theta) {
    const double phi = std::exp(theta[2]);
    const double lg_phi = lgam(phi);
    double ll = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double mu = logistic(theta[0] + theta[1] * u[i]);
        const double a = mu * phi;
        const double b = (1.0 - mu) * phi;
        ll += lg_phi - lgam(a) - lgam(b) + (a - 1.0) * std::log(v[i]) + (b - 1.0) * std::log1p(-v[i]);
    }
    return ll;
}

Vec3 gcbr_gradient(std::span<const double> u, std::span<const double> v, const Vec3& theta) {
    const double phi = std::exp(theta[2]);
    const double dg_phi = digam(phi);
    Vec3 g{0.0, 0.0, 0.0};
    for (std::size_t i = 0; i < u.size(); ++i) {
        const double mu = logistic(theta[0] + theta[1] * u[i]);
        const double a = mu * phi;
        const double b = (1.0 - mu) * phi;
        const double dg_b = digam(b);
        const double ystar = std::log(v[i]) - std::log1p(-v[i]);
        const double mustar = digam(a) - dg_b;
        const double dmu = phi * (ystar - mustar) * mu * (1.0 - mu);
        g[0] += dmu;
        g[1] += dmu * u[i];
        const double dphi = dg_phi - dg_b + mu * (ystar - mustar) + std::log1p(-v[i]);
        g[2] += dphi * phi;
    }
    return g;
}

GcbrFit fit_gcbr(const PseudoSeries& us, const PseudoSeries& vs, const GcbrOptions& options) {
    if (us.size() != vs.size()) throw DomainError("pseudo-series must have equal length");
    std::vector<double> u(us.u.size()), v(vs.u.size());
    std::transform(us.u.begin(), us.u.end(), u.begin(), nudge);
    std::transform(vs.u.begin(), vs.u.end(), v.begin(), nudge);
    check_inputs(u, v);
    if (pop_variance(v) < 1e-12) throw DegeneracyError("response series is (near) constant");
    if (pop_variance(u) < 1e-12) throw DegeneracyError("predictor series is (near) constant");

    const double scale = 1.0 / static_cast<double>(u.size());
    // Minimise the negative mean log-likelihood.
    auto objective = [&](const Vec3& t) { return -gcbr_loglik(u, v, t) * scale; };
    auto gradient = [&](const Vec3& t) {
        auto g = gcbr_gradient(u, v, t);
        for (double& gi : g) gi *= -scale;
        return g;
    };

    Vec3 x = initial_values(u, v);
    double f = objective(x);
    Vec3 g = gradient(x);
    std::array<std::array<double, 3>, 3> h{};
    auto reset_h = [&](double diag) {
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) h[i][j] = i == j ? diag : 0.0;
    };
    reset_h(1.0);
    bool fresh = true;
    std::size_t iter = 0;
    bool converged = norm3(g) < options.gradient_tolerance;

    while (!converged && iter < options.max_iterations) {
        ++iter;
        Vec3 d{};
        for (int i = 0; i < 3; ++i) d[i] = -(h[i][0] * g[0] + h[i][1] * g[1] + h[i][2] * g[2]);
        double slope = d[0] * g[0] + d[1] * g[1] + d[2] * g[2];
        if (!(slope < 0.0)) {
            reset_h(1.0);
            fresh = true;
            d = {-g[0], -g[1], -g[2]};
            slope = -(g[0] * g[0] + g[1] * g[1] + g[2] * g[2]);
        }
        double step = 1.0;
        const double dmax = std::max({std::abs(d[0]), std::abs(d[1]), std::abs(d[2])});
        if (dmax * step > 5.0) step = 5.0 / dmax;

        Vec3 xn{};
        double fn = 0.0;
        bool accepted = false;
        for (int k = 0; k < 80; ++k) {
            for (int i = 0; i < 3; ++i) xn[i] = x[i] + step * d[i];
            fn = objective(xn);
            if (std::isfinite(fn) && fn <= f + 1e-4 * step * slope) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            if (!fresh) {
                reset_h(1.0);
                fresh = true;
                continue;
            }
            break;  // stalled at the numerical floor
        }
        const Vec3 gn = gradient(xn);
        Vec3 s{}, y{};
        for (int i = 0; i < 3; ++i) {
            s[i] = xn[i] - x[i];
            y[i] = gn[i] - g[i];
        }
        const double sy = s[0] * y[0] + s[1] * y[1] + s[2] * y[2];
        const double yy = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
        if (sy > 1e-14 * std::sqrt(yy) * norm3(s)) {
            if (fresh) reset_h(sy / yy);
            Vec3 hy{};
            for (int i = 0; i < 3; ++i) hy[i] = h[i][0] * y[0] + h[i][1] * y[1] + h[i][2] * y[2];
            const double yhy = y[0] * hy[0] + y[1] * hy[1] + y[2] * hy[2];
            const double rho = 1.0 / sy;
            for (int i = 0; i < 3; ++i) {
                for (int j = 0; j < 3; ++j) {
                    h[i][j] += (1.0 + yhy * rho) * rho * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            }
            fresh = false;
        }
        x = xn;
        f = fn;
        g = gn;
        converged = norm3(g) < options.gradient_tolerance;
    }

    // Near the optimum the objective changes by less than its rounding error, so
    // the line search above can stall. Finish with Newton steps accepted on the
    // gradient norm, using a Hessian from central differences of the gradient.
    for (std::size_t k = 0; !converged && k < 50; ++k) {
        Eigen::Matrix3d hess;
        for (int j = 0; j < 3; ++j) {
            const double delta = 1e-5 * std::max(1.0, std::abs(x[j]));
            Vec3 xp = x, xm = x;
            xp[j] += delta;
            xm[j] -= delta;
            const Vec3 gp = gradient(xp), gm = gradient(xm);
            for (int i = 0; i < 3; ++i) hess(i, j) = (gp[i] - gm[i]) / (2.0 * delta);
        }
        hess = 0.5 * (hess + hess.transpose()).eval();
        const Eigen::Vector3d step = hess.ldlt().solve(-Eigen::Vector3d(g[0], g[1], g[2]));
        if (!step.allFinite()) break;
        const double gnorm = norm3(g);
        double t = 1.0;
        bool improved = false;
        for (int m = 0; m < 30 && !improved; ++m, t *= 0.5) {
            Vec3 xn{x[0] + t * step(0), x[1] + t * step(1), x[2] + t * step(2)};
            const Vec3 gn = gradient(xn);
            const double fn = objective(xn);
            if (std::isfinite(fn) && norm3(gn) < gnorm && fn <= f + 1e-12 * std::max(1.0, std::abs(f))) {
                x = xn;
                g = gn;
                f = fn;
                improved = true;
            }
        }
        if (!improved) break;
        ++iter;
        converged = norm3(g) < options.gradient_tolerance;
    }

    GcbrFit fit = finish(u, x, -f / scale, norm3(g), iter, converged);
    if (!converged) {
        throw GcbrConvergenceError("beta regression did not converge after " + std::to_string(iter) +
                                       " iterations (gradient norm " + format_double(fit.gradient_norm) + ")",
                                   std::move(fit));
    }
    return fit;
}

CddResult cdd(const PseudoSeries& u, const PseudoSeries& v, CddEstimator estimator, const GcbrOptions& options) {
    CddResult r;
    r.station_u = u.source;
    r.station_v = v.source;
    r.estimator = estimator;
    r.fit_u_to_v = fit_gcbr(u, v, options);
    r.fit_v_to_u = fit_gcbr(v, u, options);

    auto measures = [](const GcbrFit& fit, const PseudoSeries& response, double& ratio, double& moment) {
        ratio = pop_variance(fit.fitted) / pop_variance(response.u);
        double sq = 0.0;
        for (double f : fit.fitted) sq += f * f;
        moment = 12.0 * sq / static_cast<double>(fit.fitted.size()) - 3.0;
    };
    measures(r.fit_u_to_v, v, r.ratio_u_to_v, r.moment_u_to_v);
    measures(r.fit_v_to_u, u, r.ratio_v_to_u, r.moment_v_to_u);
    const bool ratio = estimator == CddEstimator::VarianceRatio;
    r.rho_u_to_v = std::clamp(ratio ? r.ratio_u_to_v : r.moment_u_to_v, 0.0, 1.0);
    r.rho_v_to_u = std::clamp(ratio ? r.ratio_v_to_u : r.moment_v_to_u, 0.0, 1.0);
    return r;
}

DependencyNetwork build_network(const TimeSeriesPanel& panel, const std::string& variable, const NetworkOptions& options) {
    auto var = panel.variable_index(variable);
    if (!var) throw DomainError("unknown variable '" + variable + "'");
    DependencyNetwork net;
    net.threshold = options.threshold;

    std::vector<std::size_t> stations;
    for (std::size_t s = 0; s < panel.n_stations(); ++s) {
        if (panel.n_times() >= 3 && panel.complete(s, *var)) stations.push_back(s);
    }
    std::sort(stations.begin(), stations.end(), [&](std::size_t a, std::size_t b) {
        return panel.stations()[a].name < panel.stations()[b].name;
    });
    std::vector<PseudoSeries> pseudo;
    for (auto s : stations) {
        net.nodes.push_back(panel.stations()[s]);
        std::vector<double> x(panel.n_times());
        for (std::size_t t = 0; t < x.size(); ++t) x[t] = panel.value(s, t, *var);
        pseudo.push_back(pseudo_observations(x, panel.stations()[s].name));
    }

    std::vector<std::pair<std::size_t, std::size_t>> jobs;
    for (std::size_t i = 0; i < pseudo.size(); ++i)
        for (std::size_t j = i + 1; j < pseudo.size(); ++j) jobs.emplace_back(i, j);
    std::vector<CddResult> results(jobs.size());
    std::vector<std::string> errors(jobs.size());
    parallel_for(jobs.size(), options.threads, [&](std::size_t k) {
        try {
            results[k] = cdd(pseudo[jobs[k].first], pseudo[jobs[k].second], options.estimator);
        } catch (const Error& e) {
            errors[k] = e.what();
        }
    });
    for (std::size_t k = 0; k < jobs.size(); ++k) {
        if (!errors[k].empty()) {
            net.failed_pairs.emplace_back(pseudo[jobs[k].first].source, pseudo[jobs[k].second].source);
            net.failure_messages.push_back(errors[k]);
            continue;
        }
        if (std::max(results[k].rho_u_to_v, results[k].rho_v_to_u) >= options.threshold) net.edges.push_back(results[k]);
        net.pairs.push_back(std::move(results[k]));
    }
    return net;
}

namespace {

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    return out + "\"";
}

}  // namespace

std::string DependencyNetwork::edges_csv() const {
    std::ostringstream os;
    os << "station_u,station_v,rho_uv,rho_vu\n";
    for (const auto& e : edges) {
        os << csv_field(e.station_u) << ',' << csv_field(e.station_v) << ',' << format_double(e.rho_u_to_v) << ','
           << format_double(e.rho_v_to_u) << '\n';
    }
    return os.str();
}

std::string DependencyNetwork::pairs_csv() const {
    std::ostringstream os;
    os << "station_u,station_v,rho_uv,rho_vu,ratio_uv,ratio_vu,moment_uv,moment_vu\n";
    for (const auto& e : pairs) {
        os << csv_field(e.station_u) << ',' << csv_field(e.station_v) << ',' << format_double(e.rho_u_to_v) << ','
           << format_double(e.rho_v_to_u) << ',' << format_double(e.ratio_u_to_v) << ',' << format_double(e.ratio_v_to_u)
           << ',' << format_double(e.moment_u_to_v) << ',' << format_double(e.moment_v_to_u) << '\n';
    }
    return os.str();
}

std::string DependencyNetwork::to_geojson() const {
    nlohmann::ordered_json fc;
    fc["type"] = "FeatureCollection";
    auto features = nlohmann::ordered_json::array();
    auto coords_of = [&](const std::string& name) -> const StationId* {
        for (const auto& s : nodes) {
            if (s.name == name && s.has_coordinates()) return &s;
        }
        return nullptr;
    };
    for (const auto& s : nodes) {
        if (!s.has_coordinates()) continue;
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "Point"}, {"coordinates", {*s.longitude, *s.latitude}}};
        f["properties"] = {{"name", s.name}};
        features.push_back(std::move(f));
    }
    for (const auto& e : edges) {
        const StationId* a = coords_of(e.station_u);
        const StationId* b = coords_of(e.station_v);
        if (!a || !b) continue;
        nlohmann::ordered_json f;
        f["type"] = "Feature";
        f["geometry"] = {{"type", "LineString"},
                         {"coordinates", {{*a->longitude, *a->latitude}, {*b->longitude, *b->latitude}}}};
        nlohmann::ordered_json props;
        props["station_u"] = e.station_u;
        props["station_v"] = e.station_v;
        props["rho_uv"] = e.rho_u_to_v;
        props["rho_vu"] = e.rho_v_to_u;
        f["properties"] = std::move(props);
        features.push_back(std::move(f));
    }
    fc["features"] = std::move(features);
    return fc.dump(2);
}

}  // namespace gwts

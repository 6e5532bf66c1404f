#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "gwts/copula.hpp"
#include "gwts/diagnostics.hpp"
#include "gwts/error.hpp"
#include "gwts/panel.hpp"
#include "gwts/reproduce.hpp"
#include "gwts/shelflife.hpp"
#include "gwts/structural.hpp"
#include "gwts/var.hpp"

namespace py = pybind11;
using namespace gwts;

namespace {

/// Stacks h matrices of equal shape into an (h, rows, cols) array.
py::array_t<double> stack(const std::vector<Eigen::MatrixXd>& mats) {
    const auto h = static_cast<py::ssize_t>(mats.size());
    const py::ssize_t r = mats.empty() ? 0 : mats.front().rows();
    const py::ssize_t c = mats.empty() ? 0 : mats.front().cols();
    py::array_t<double> out({h, r, c});
    auto view = out.mutable_unchecked<3>();
    for (py::ssize_t k = 0; k < h; ++k)
        for (py::ssize_t i = 0; i < r; ++i)
            for (py::ssize_t j = 0; j < c; ++j) view(k, i, j) = mats[static_cast<std::size_t>(k)](i, j);
    return out;
}

SigmaDivisor parse_divisor(const std::string& s) {
    if (s == "dof") return SigmaDivisor::DegreesOfFreedom;
    if (s == "ml") return SigmaDivisor::MaximumLikelihood;
    throw DomainError("divisor must be 'dof' or 'ml', got '" + s + "'");
}

CddEstimator parse_estimator(const std::string& s) {
    if (s == "ratio") return CddEstimator::VarianceRatio;
    if (s == "moment") return CddEstimator::Moment;
    throw DomainError("estimator must be 'ratio' or 'moment', got '" + s + "'");
}

ApeRegression parse_regression(const std::string& s) {
    if (s == "means") return ApeRegression::HorizonMeans;
    if (s == "pooled") return ApeRegression::Pooled;
    throw DomainError("regression must be 'means' or 'pooled', got '" + s + "'");
}

py::dict report_dict(const DiagnosticReport& r) {
    py::dict d;
    d["test"] = r.test_name;
    d["statistic"] = r.statistic;
    d["df"] = r.df;
    d["p_value"] = r.p_value;
    d["alpha"] = r.alpha;
    d["reject"] = r.reject;
    return d;
}

}  // namespace

PYBIND11_MODULE(_gwts, m) {
    m.doc() = "VAR modelling, residual diagnostics, copula directional dependence and model shelf life";

    auto base = py::register_exception<Error>(m, "GwtsError", PyExc_RuntimeError);
    py::register_exception<ParseError>(m, "ParseError", base.ptr());
    py::register_exception<ConflictError>(m, "ConflictError", base.ptr());
    py::register_exception<EmptyInputError>(m, "EmptyInputError", base.ptr());
    py::register_exception<DomainError>(m, "DomainError", base.ptr());
    py::register_exception<SampleSizeError>(m, "SampleSizeError", base.ptr());
    py::register_exception<MissingDataError>(m, "MissingDataError", base.ptr());
    py::register_exception<SingularityError>(m, "SingularityError", base.ptr());
    py::register_exception<DegeneracyError>(m, "DegeneracyError", base.ptr());
    py::register_exception<ComparisonError>(m, "ComparisonError", base.ptr());
    py::register_exception<InsufficientDataError>(m, "InsufficientDataError", base.ptr());
    py::register_exception<StateError>(m, "StateError", base.ptr());
    py::register_exception<GcbrConvergenceError>(m, "GcbrConvergenceError", base.ptr());

    // Panels

    py::class_<TimeSeriesPanel>(m, "Panel")
        .def_property_readonly("stations",
                               [](const TimeSeriesPanel& p) {
                                   std::vector<std::string> names;
                                   for (const auto& s : p.stations()) names.push_back(s.name);
                                   return names;
                               })
        .def_property_readonly("variables", &TimeSeriesPanel::variables)
        .def_property_readonly("index",
                               [](const TimeSeriesPanel& p) {
                                   std::vector<std::string> q;
                                   for (const auto& x : p.index()) q.push_back(x.to_string());
                                   return q;
                               })
        .def_property_readonly("n_stations", &TimeSeriesPanel::n_stations)
        .def_property_readonly("n_times", &TimeSeriesPanel::n_times)
        .def_property_readonly("n_variables", &TimeSeriesPanel::n_variables)
        .def("coordinates",
             [](const TimeSeriesPanel& p, const std::string& station) -> std::optional<std::pair<double, double>> {
                 auto s = p.station_index(station);
                 if (!s) throw DomainError("unknown station '" + station + "'");
                 const auto& id = p.stations()[*s];
                 if (!id.has_coordinates()) return std::nullopt;
                 return std::make_pair(*id.latitude, *id.longitude);
             })
        .def("matrix", &extract_matrix, py::arg("station"), py::arg("variables"),
             "T x n matrix for one station, columns in the given order")
        .def("slice", &TimeSeriesPanel::slice, py::arg("begin"), py::arg("end"))
        .def("fill_gaps", &fill_gaps)
        .def("holdout_split",
             [](const TimeSeriesPanel& p, double ratio) {
                 auto split = holdout_split(p, ratio);
                 return py::make_tuple(split.train, split.test);
             },
             py::arg("ratio"))
        .def("to_csv", &format_panel)
        .def("summary_json", &panel_summary_json)
        .def("__eq__", [](const TimeSeriesPanel& a, const TimeSeriesPanel& b) { return a == b; })
        .def("__repr__", [](const TimeSeriesPanel& p) {
            return "<Panel " + std::to_string(p.n_stations()) + " stations x " + std::to_string(p.n_times()) +
                   " quarters x " + std::to_string(p.n_variables()) + " variables>";
        });

    m.def("load_panel", [](const std::filesystem::path& path) { return load_panel(path); }, py::arg("path"),
          "Read a long-format station,date,variable,value CSV");
    m.def("parse_panel", [](const std::string& text) { return parse_panel(text); }, py::arg("text"));
    m.def("holdout_train_size", &holdout_train_size, py::arg("n"), py::arg("ratio"));

    // VAR

    py::class_<VarModel>(m, "VarModel")
        .def_readonly("intercept", &VarModel::intercept)
        .def_readonly("sigma", &VarModel::sigma)
        .def_readonly("residuals", &VarModel::residuals)
        .def_readonly("data", &VarModel::data)
        .def_readonly("var_names", &VarModel::var_names)
        .def_property_readonly("lags", [](const VarModel& v) { return stack(v.lags); })
        .def_property_readonly("p", &VarModel::order)
        .def_property_readonly("n_vars", &VarModel::n_vars)
        .def_property_readonly("t_effective", &VarModel::t_effective)
        .def("coefficient_matrix", &VarModel::coefficient_matrix)
        .def("fitted", &VarModel::fitted)
        .def("forecast", [](const VarModel& v, std::size_t h) { return forecast(v, v.data, h); }, py::arg("h"))
        .def("stability",
             [](const VarModel& v) {
                 auto s = companion_stability(v);
                 return py::make_tuple(s.stable, s.moduli);
             })
        .def("unconditional_mean", &unconditional_mean)
        .def("to_json", &model_to_json)
        .def_static("from_json", &model_from_json, py::arg("text"));

    m.def(
        "fit_var",
        [](const Eigen::MatrixXd& data, std::size_t p, const std::string& divisor, std::vector<std::string> names) {
            return fit_var(data, p, FitOptions{parse_divisor(divisor), std::move(names)});
        },
        py::arg("data"), py::arg("p"), py::arg("divisor") = "dof", py::arg("var_names") = std::vector<std::string>{},
        "Least-squares VAR(p) on a T x n array");

    py::class_<LagSelection>(m, "LagSelection")
        .def_readonly("p_max", &LagSelection::p_max)
        .def_readonly("scores", &LagSelection::scores)
        .def_readonly("chosen", &LagSelection::chosen)
        .def_readonly("consensus", &LagSelection::consensus)
        .def_readonly("unanimous", &LagSelection::unanimous)
        .def("to_csv", &LagSelection::to_csv);
    m.def("select_lag_order", &select_lag_order, py::arg("data"), py::arg("p_max") = 8,
          "AIC, BIC, HQ and FPE for p = 1..p_max with a consensus choice");
    m.def("difference", &difference, py::arg("data"), py::arg("d") = 1);

    // Diagnostics

    m.def("portmanteau_test",
          [](const VarModel& v, std::size_t h, double alpha) { return report_dict(portmanteau_test(v, h, alpha)); },
          py::arg("model"), py::arg("lags") = kDefaultPortmanteauLags, py::arg("alpha") = 0.05);
    m.def("arch_test", [](const VarModel& v, std::size_t q, double alpha) { return report_dict(arch_test(v, q, alpha)); },
          py::arg("model"), py::arg("lags") = kDefaultArchLags, py::arg("alpha") = 0.05);
    m.def(
        "normality_tests",
        [](const VarModel& v, double alpha) {
            auto r = normality_tests(v, alpha);
            py::dict d;
            d["jarque_bera"] = report_dict(r.jarque_bera);
            d["skewness"] = report_dict(r.skewness);
            d["kurtosis"] = report_dict(r.kurtosis);
            return d;
        },
        py::arg("model"), py::arg("alpha") = 0.05);

    py::class_<EfpPath>(m, "EfpPath")
        .def_readonly("times", &EfpPath::times)
        .def_readonly("paths", &EfpPath::paths)
        .def_readonly("names", &EfpPath::names)
        .def_readonly("max_abs", &EfpPath::max_abs)
        .def_readonly("p_values", &EfpPath::p_values)
        .def_readonly("crossed", &EfpPath::crossed)
        .def_readonly("boundary", &EfpPath::boundary)
        .def("to_csv", &EfpPath::to_csv);
    m.def("ols_cusum", [](const VarModel& v, double alpha) { return ols_cusum(v, alpha); }, py::arg("model"),
          py::arg("alpha") = 0.05);
    m.def("cusum_boundary", &cusum_boundary, py::arg("alpha"));

    // Structural analysis

    py::class_<GrangerReport>(m, "GrangerReport")
        .def_readonly("cause", &GrangerReport::cause_names)
        .def_readonly("effect", &GrangerReport::effect_names)
        .def_readonly("statistic", &GrangerReport::statistic)
        .def_readonly("df1", &GrangerReport::df1)
        .def_readonly("df2", &GrangerReport::df2)
        .def_readonly("p_value", &GrangerReport::p_value)
        .def_readonly("reject", &GrangerReport::reject)
        .def("to_json", &GrangerReport::to_json);
    m.def("granger_test",
          [](const VarModel& v, const std::vector<std::size_t>& cause, const std::vector<std::size_t>& effect, double alpha) {
              return granger_test(v, cause, effect, alpha);
          },
          py::arg("model"), py::arg("cause"), py::arg("effect"), py::arg("alpha") = 0.05,
          "Wald F-test that the cause variables' lags are zero in the effect equations");

    py::class_<IrfResult>(m, "IrfResult")
        .def_property_readonly("responses", [](const IrfResult& r) { return stack(r.responses); })
        .def_property_readonly("lower", [](const IrfResult& r) { return stack(r.lower); })
        .def_property_readonly("upper", [](const IrfResult& r) { return stack(r.upper); })
        .def_readonly("var_names", &IrfResult::var_names)
        .def_readonly("ci", &IrfResult::ci)
        .def_readonly("n_boot", &IrfResult::n_boot)
        .def_readonly("n_boot_failed", &IrfResult::n_boot_failed)
        .def_readonly("unstable", &IrfResult::unstable)
        .def("to_csv", &IrfResult::to_csv);
    m.def(
        "irf",
        [](const VarModel& v, std::size_t horizon, std::size_t n_boot, double ci, std::uint64_t seed, bool allow_unstable,
           std::size_t threads) {
            py::gil_scoped_release release;
            return irf(v, IrfOptions{horizon, n_boot, ci, seed, allow_unstable, threads});
        },
        py::arg("model"), py::arg("horizon") = 20, py::arg("n_boot") = 0, py::arg("ci") = 0.95, py::arg("seed") = 0,
        py::arg("allow_unstable") = false, py::arg("threads") = 1,
        "Orthogonalised impulse responses; responses[h, j, k] is variable j's response to shock k");

    py::class_<FevdResult>(m, "FevdResult")
        .def_property_readonly("proportions", [](const FevdResult& r) { return stack(r.proportions); })
        .def_readonly("var_names", &FevdResult::var_names)
        .def("to_csv", &FevdResult::to_csv);
    m.def("fevd", &fevd, py::arg("model"), py::arg("horizon"));

    // Copula directional dependence

    m.def("pseudo_observations",
          [](const std::vector<double>& x) { return pseudo_observations(x).u; }, py::arg("x"),
          "rank / (T + 1) with average ranks for ties");

    py::class_<CddResult>(m, "CddResult")
        .def_readonly("station_u", &CddResult::station_u)
        .def_readonly("station_v", &CddResult::station_v)
        .def_readonly("rho_u_to_v", &CddResult::rho_u_to_v)
        .def_readonly("rho_v_to_u", &CddResult::rho_v_to_u)
        .def_readonly("ratio_u_to_v", &CddResult::ratio_u_to_v)
        .def_readonly("ratio_v_to_u", &CddResult::ratio_v_to_u)
        .def_readonly("moment_u_to_v", &CddResult::moment_u_to_v)
        .def_readonly("moment_v_to_u", &CddResult::moment_v_to_u);
    m.def(
        "cdd",
        [](const std::vector<double>& x, const std::vector<double>& y, const std::string& estimator) {
            return cdd(pseudo_observations(x, "u"), pseudo_observations(y, "v"), parse_estimator(estimator));
        },
        py::arg("x"), py::arg("y"), py::arg("estimator") = "ratio",
        "Directional dependence between two raw series via beta regressions on their pseudo-observations");

    py::class_<DependencyNetwork>(m, "DependencyNetwork")
        .def_property_readonly("nodes",
                               [](const DependencyNetwork& n) {
                                   std::vector<std::string> names;
                                   for (const auto& s : n.nodes) names.push_back(s.name);
                                   return names;
                               })
        .def_readonly("pairs", &DependencyNetwork::pairs)
        .def_readonly("edges", &DependencyNetwork::edges)
        .def_readonly("failed_pairs", &DependencyNetwork::failed_pairs)
        .def_readonly("threshold", &DependencyNetwork::threshold)
        .def("edges_csv", &DependencyNetwork::edges_csv)
        .def("pairs_csv", &DependencyNetwork::pairs_csv)
        .def("to_geojson", &DependencyNetwork::to_geojson);
    m.def(
        "build_network",
        [](const TimeSeriesPanel& panel, const std::string& variable, double threshold, const std::string& estimator,
           std::size_t threads) {
            NetworkOptions options{threshold, parse_estimator(estimator), threads};
            py::gil_scoped_release release;
            return build_network(panel, variable, options);
        },
        py::arg("panel"), py::arg("variable") = "gwl", py::arg("threshold") = 0.95, py::arg("estimator") = "ratio",
        py::arg("threads") = 1);
    m.def("published_network", [] {
        std::vector<py::tuple> out;
        for (const auto& p : published_network()) out.push_back(py::make_tuple(p.station_u, p.station_v, p.rho_u_to_v, p.rho_v_to_u));
        return out;
    });

    // Shelf life

    py::class_<Forecaster>(m, "Forecaster")
        .def("train", &Forecaster::train, py::arg("history"))
        .def("predict", &Forecaster::predict, py::arg("h"))
        .def_property_readonly("name", &Forecaster::name);
    py::class_<VarForecaster, Forecaster>(m, "VarForecaster")
        .def(py::init([](std::size_t p, const std::string& divisor) { return VarForecaster(p, parse_divisor(divisor)); }),
             py::arg("p"), py::arg("divisor") = "dof");
    py::class_<SeasonalNaiveForecaster, Forecaster>(m, "SeasonalNaiveForecaster").def(py::init<std::size_t>(), py::arg("period"));

    py::class_<ApeTable>(m, "ApeTable")
        .def_property_readonly("origin",
                               [](const ApeTable& t) {
                                   std::vector<std::size_t> v;
                                   for (const auto& r : t.rows) v.push_back(r.origin);
                                   return v;
                               })
        .def_property_readonly("horizon",
                               [](const ApeTable& t) {
                                   std::vector<std::size_t> v;
                                   for (const auto& r : t.rows) v.push_back(r.horizon);
                                   return v;
                               })
        .def_property_readonly("ape",
                               [](const ApeTable& t) {
                                   std::vector<double> v;
                                   for (const auto& r : t.rows) v.push_back(r.mean_ape);
                                   return v;
                               })
        .def_readonly("excluded", &ApeTable::excluded)
        .def_readonly("forecaster", &ApeTable::forecaster)
        .def("__len__", [](const ApeTable& t) { return t.rows.size(); })
        .def("to_csv", &ApeTable::to_csv);
    m.def(
        "rolling_origin_errors",
        [](const Eigen::MatrixXd& series, const Forecaster& forecaster, std::size_t min_train, std::size_t h_max,
           std::vector<std::size_t> targets, std::size_t threads) {
            RollingOptions options{min_train, h_max, std::move(targets), threads};
            py::gil_scoped_release release;
            return rolling_origin_errors(series, forecaster, options);
        },
        py::arg("series"), py::arg("forecaster"), py::arg("min_train"), py::arg("h_max"),
        py::arg("targets") = std::vector<std::size_t>{0}, py::arg("threads") = 1);

    py::class_<ShelfLifeResult>(m, "ShelfLifeResult")
        .def_readonly("shelf_life_quarters", &ShelfLifeResult::shelf_life_quarters)
        .def_readonly("censored", &ShelfLifeResult::censored)
        .def_readonly("intercept", &ShelfLifeResult::intercept)
        .def_readonly("slope", &ShelfLifeResult::slope)
        .def_readonly("threshold", &ShelfLifeResult::threshold)
        .def_readonly("horizons", &ShelfLifeResult::horizons)
        .def_readonly("horizon_mean_ape", &ShelfLifeResult::horizon_mean_ape)
        .def("fitted_ape", &ShelfLifeResult::fitted_ape, py::arg("h"))
        .def("to_json", &ShelfLifeResult::to_json);
    m.def(
        "estimate_shelf_life",
        [](const ApeTable& table, double threshold, const std::string& regression) {
            return estimate_shelf_life(table, threshold, parse_regression(regression));
        },
        py::arg("table"), py::arg("threshold") = 0.05, py::arg("regression") = "means",
        "Largest horizon whose fitted APE stays at or below the threshold");
    m.def(
        "compare_shelf_lives",
        [](const std::vector<ShelfLifeResult>& results) {
            std::vector<py::tuple> out;
            for (const auto& r : compare_shelf_lives(results))
                out.push_back(py::make_tuple(r.forecaster, r.shelf_life_quarters, r.fitted_ape_at_shelf_life));
            return out;
        },
        py::arg("results"));
}

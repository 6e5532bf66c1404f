// gwts: command-line front end for the groundwater time-series toolkit.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "gwts/copula.hpp"
#include "gwts/diagnostics.hpp"
#include "gwts/error.hpp"
#include "gwts/panel.hpp"
#include "gwts/report.hpp"
#include "gwts/reproduce.hpp"
#include "gwts/shelflife.hpp"
#include "gwts/structural.hpp"
#include "gwts/svg.hpp"
#include "gwts/var.hpp"

namespace fs = std::filesystem;
using namespace gwts;

namespace {

/// Bad combination of otherwise valid flags; exits with status 2 like a parse error.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct Common {
    std::string input;
    std::string station;
    std::vector<std::string> vars{"precipitation", "temperature", "gwl"};
    std::string out = "out";
};

struct FitArgs {
    std::optional<std::size_t> lag;
    bool auto_lag = false;
    std::size_t p_max = 8;
    std::optional<double> holdout;
    bool difference = false;
    std::string divisor = "dof";
};

struct DiagnoseArgs {
    std::string model;
    double alpha = 0.05;
    std::size_t portmanteau_lags = kDefaultPortmanteauLags;
    std::size_t arch_lags = kDefaultArchLags;
};

struct StructuralArgs {
    std::string model;
    std::string cause = "temperature";
    std::vector<std::string> effect;
    std::size_t horizon = 20;
    std::size_t fevd_horizon = 10;
    std::size_t boot = 100;
    std::optional<std::uint64_t> seed;
    double ci = 0.95;
    double alpha = 0.05;
    bool allow_unstable = false;
    std::size_t threads = 1;
};

struct CddArgs {
    std::string variable = "gwl";
    double threshold = 0.95;
    std::string estimator = "ratio";
    std::size_t threads = 1;
};

struct ShelfArgs {
    std::string target = "gwl";
    std::string forecaster = "var";
    std::optional<std::size_t> lag;
    std::size_t p_max = 8;
    std::size_t period = 4;
    double holdout = 0.7;
    std::optional<std::size_t> h_max;
    double threshold = 0.05;
    std::string regression = "means";
    std::size_t threads = 1;
};

struct ReproduceArgs {
    std::string data_dir;
    std::size_t boot = 100;
    std::optional<std::uint64_t> seed;
    std::size_t threads = 1;
    std::optional<std::size_t> lag;
};

void say(const std::string& line) { std::cout << line << '\n'; }

void write(const fs::path& dir, const std::string& name, const std::string& text) {
    write_text_file(dir / name, text);
    say("wrote " + (dir / name).string());
}

std::size_t index_in(const std::vector<std::string>& names, const std::string& name, const char* what) {
    for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == name) return i;
    }
    throw UsageError(std::string(what) + " '" + name + "' is not one of the model variables");
}

/// Loads the panel and picks the station (the only one, unless --station is given).
std::pair<TimeSeriesPanel, std::string> load_station(const Common& c) {
    auto panel = load_panel(c.input);
    std::string station = c.station;
    if (station.empty()) {
        if (panel.n_stations() != 1) {
            throw UsageError("input has " + std::to_string(panel.n_stations()) + " stations; choose one with --station");
        }
        station = panel.stations().front().name;
    }
    return {std::move(panel), station};
}

VarModel load_model(const std::string& path) {
    if (!fs::exists(path)) {
        throw StateError("no fitted model at " + path + "; run `gwts fit` first (or pass --model)");
    }
    return model_from_json(read_text_file(path));
}

std::string model_path(const std::string& explicit_path, const Common& c) {
    return explicit_path.empty() ? (fs::path(c.out) / "var_model.json").string() : explicit_path;
}

std::uint64_t require_seed(const std::optional<std::uint64_t>& seed, std::size_t boot) {
    if (boot > 0 && !seed) throw UsageError("--seed (or GWTS_SEED) is required when --boot > 0");
    return seed.value_or(0);
}

std::vector<double> iota_d(std::size_t n, double start = 0.0) {
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = start + static_cast<double>(i);
    return v;
}

std::string efp_svg(const EfpPath& efp) {
    svg::Chart c;
    c.title = "OLS-CUSUM empirical fluctuation process";
    c.x_label = "time (fraction of sample)";
    c.y_label = "W(t)";
    for (std::size_t j = 0; j < efp.paths.size(); ++j) c.lines.push_back({efp.names[j], efp.times, efp.paths[j]});
    c.hlines = {{"+boundary", efp.boundary}, {"-boundary", -efp.boundary}};
    return svg::render(c);
}

std::string irf_svg(const IrfResult& r) {
    std::vector<svg::Chart> charts;
    const std::size_t n = r.var_names.size();
    const auto hs = iota_d(r.responses.size());
    for (std::size_t k = 0; k < n; ++k) {
        for (std::size_t j = 0; j < n; ++j) {
            svg::Chart c;
            c.title = "shock " + r.var_names[k] + " -> " + r.var_names[j];
            c.x_label = "horizon";
            c.y_label = "response";
            svg::Series v{"response", hs, {}}, lo{"lower", hs, {}}, hi{"upper", hs, {}};
            for (std::size_t h = 0; h < r.responses.size(); ++h) {
                const auto jj = static_cast<Eigen::Index>(j), kk = static_cast<Eigen::Index>(k);
                v.y.push_back(r.responses[h](jj, kk));
                lo.y.push_back(r.lower[h](jj, kk));
                hi.y.push_back(r.upper[h](jj, kk));
            }
            c.lines = {v, lo, hi};
            c.hlines = {{"zero", 0.0}};
            c.height = 260;
            charts.push_back(std::move(c));
        }
    }
    return svg::render_column(charts);
}

std::string fevd_svg(const FevdResult& f) {
    std::vector<svg::Chart> charts;
    const std::size_t n = f.var_names.size();
    const auto hs = iota_d(f.proportions.size(), 1.0);
    for (std::size_t j = 0; j < n; ++j) {
        svg::Chart c;
        c.title = "FEVD of " + f.var_names[j];
        c.x_label = "horizon";
        c.y_label = "share";
        for (std::size_t k = 0; k < n; ++k) {
            svg::Series s{f.var_names[k], hs, {}};
            for (const auto& p : f.proportions) s.y.push_back(p(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(k)));
            c.stacked.push_back(std::move(s));
        }
        c.height = 280;
        charts.push_back(std::move(c));
    }
    return svg::render_column(charts);
}

std::string shelf_svg(const ShelfLifeResult& r) {
    svg::Chart c;
    c.title = "APE by horizon, " + r.ape_table.forecaster;
    c.x_label = "horizon (quarters)";
    c.y_label = "APE";
    svg::Series rows{"APE", {}, {}};
    for (const auto& row : r.ape_table.rows) {
        rows.x.push_back(static_cast<double>(row.horizon));
        rows.y.push_back(row.mean_ape);
    }
    svg::Series means{"mean APE", {}, r.horizon_mean_ape};
    svg::Series fit{"fitted", {}, {}};
    for (auto h : r.horizons) {
        means.x.push_back(static_cast<double>(h));
        fit.x.push_back(static_cast<double>(h));
        fit.y.push_back(r.fitted_ape(static_cast<double>(h)));
    }
    c.points = {rows, means};
    c.lines = {fit};
    c.hlines = {{"threshold", r.threshold}};
    return svg::render(c);
}

std::string diagnostics_json(const VarModel& m, const DiagnoseArgs& a, const EfpPath& efp) {
    const auto norm = normality_tests(m, a.alpha);
    const std::vector<DiagnosticReport> reports{portmanteau_test(m, a.portmanteau_lags, a.alpha), arch_test(m, a.arch_lags, a.alpha),
                                                norm.jarque_bera, norm.skewness, norm.kurtosis};
    nlohmann::ordered_json j;
    j["alpha"] = a.alpha;
    j["portmanteau_lags"] = a.portmanteau_lags;
    j["arch_lags"] = a.arch_lags;
    j["tests"] = nlohmann::ordered_json::parse(reports_to_json(reports));
    nlohmann::ordered_json cusum;
    cusum["boundary"] = efp.boundary;
    for (std::size_t i = 0; i < efp.names.size(); ++i) {
        cusum["equations"].push_back(
            {{"name", efp.names[i]}, {"max_abs", efp.max_abs[i]}, {"p_value", efp.p_values[i]}, {"crossed", static_cast<bool>(efp.crossed[i])}});
    }
    j["ols_cusum"] = cusum;
    const auto stab = companion_stability(m);
    j["stable"] = stab.stable;
    j["companion_moduli"] = stab.moduli;
    return j.dump(2);
}

int cmd_fit(const Common& c, const FitArgs& a) {
    auto [panel, station] = load_station(c);
    Eigen::MatrixXd data = extract_matrix(panel, station, c.vars);
    if (a.difference) data = difference(data);
    if (a.holdout) data = data.topRows(static_cast<Eigen::Index>(holdout_train_size(static_cast<std::size_t>(data.rows()), *a.holdout)));
    const auto sel = select_lag_order(data, a.p_max);
    const std::size_t p = a.lag.value_or(sel.consensus);
    const auto divisor = a.divisor == "ml" ? SigmaDivisor::MaximumLikelihood : SigmaDivisor::DegreesOfFreedom;
    const auto model = fit_var(data, p, FitOptions{divisor, c.vars});
    const fs::path out(c.out);
    write(out, "var_model.json", model_to_json(model));
    write(out, "lag_selection.csv", sel.to_csv());
    std::string votes;
    for (std::size_t i = 0; i < sel.chosen.size(); ++i) {
        votes += std::string(i ? ", " : "") + criterion_name(kAllCriteria[i]) + "=" + std::to_string(sel.chosen[i]);
    }
    say("station " + station + ": " + std::to_string(data.rows()) + " points; lag criteria " + votes + "; consensus p=" +
        std::to_string(sel.consensus) + (sel.unanimous ? " (unanimous)" : "") + "; fitted p=" + std::to_string(p));
    return 0;
}

int cmd_diagnose(const Common& c, const DiagnoseArgs& a) {
    const auto m = load_model(model_path(a.model, c));
    const auto efp = ols_cusum(m, a.alpha);
    const fs::path out(c.out);
    write(out, "diagnostics.json", diagnostics_json(m, a, efp));
    write(out, "efp.csv", efp.to_csv());
    write(out, "efp.svg", efp_svg(efp));
    return 0;
}

int cmd_structural(const Common& c, const StructuralArgs& a) {
    const auto m = load_model(model_path(a.model, c));
    const std::size_t cause = index_in(m.var_names, a.cause, "cause");
    std::vector<std::size_t> effect;
    if (a.effect.empty()) {
        for (std::size_t i = 0; i < m.n_vars(); ++i) {
            if (i != cause) effect.push_back(i);
        }
    } else {
        for (const auto& e : a.effect) effect.push_back(index_in(m.var_names, e, "effect"));
    }
    IrfOptions io;
    io.horizon = a.horizon;
    io.n_boot = a.boot;
    io.seed = require_seed(a.seed, a.boot);
    io.ci = a.ci;
    io.allow_unstable = a.allow_unstable;
    io.threads = a.threads;
    const auto g = granger_test(m, {cause}, effect, a.alpha);
    const auto r = irf(m, io);
    const auto f = fevd(m, a.fevd_horizon);
    const fs::path out(c.out);
    write(out, "granger.json", g.to_json());
    write(out, "irf.csv", r.to_csv());
    write(out, "irf.svg", irf_svg(r));
    write(out, "fevd.csv", f.to_csv());
    write(out, "fevd.svg", fevd_svg(f));
    if (r.n_boot_failed > 0) say("note: " + std::to_string(r.n_boot_failed) + " bootstrap replicate(s) failed and were dropped");
    return 0;
}

int cmd_cdd(const Common& c, const CddArgs& a) {
    const auto panel = load_panel(c.input);
    NetworkOptions opt;
    opt.threshold = a.threshold;
    opt.estimator = a.estimator == "moment" ? CddEstimator::Moment : CddEstimator::VarianceRatio;
    opt.threads = a.threads;
    const auto net = build_network(panel, a.variable, opt);
    const fs::path out(c.out);
    write(out, "edges.csv", net.edges_csv());
    write(out, "pairs.csv", net.pairs_csv());
    write(out, "network.geojson", net.to_geojson());
    say(std::to_string(net.nodes.size()) + " stations, " + std::to_string(net.pairs.size()) + " pairs, " +
        std::to_string(net.edges.size()) + " edges at threshold " + format_short(a.threshold));
    for (std::size_t i = 0; i < net.failed_pairs.size(); ++i) {
        say("skipped pair " + net.failed_pairs[i].first + "/" + net.failed_pairs[i].second + ": " + net.failure_messages[i]);
    }
    return 0;
}

int cmd_shelflife(const Common& c, const ShelfArgs& a) {
    auto [panel, station] = load_station(c);
    const Eigen::MatrixXd data = extract_matrix(panel, station, c.vars);
    const std::size_t target = index_in(c.vars, a.target, "target");
    const std::size_t t_total = static_cast<std::size_t>(data.rows());
    const std::size_t min_train = holdout_train_size(t_total, a.holdout);
    if (min_train == 0 || min_train >= t_total) throw UsageError("--holdout leaves no training or evaluation points");

    std::unique_ptr<Forecaster> f;
    if (a.forecaster == "seasonal-naive") {
        f = seasonal_naive_forecaster(a.period);
    } else {
        const std::size_t p = a.lag ? *a.lag : select_lag_order(data.topRows(static_cast<Eigen::Index>(min_train)), a.p_max).consensus;
        f = std::make_unique<VarForecaster>(p);
    }
    RollingOptions ro;
    ro.min_train = min_train;
    ro.h_max = a.h_max.value_or(t_total - min_train);
    ro.targets = {target};
    ro.threads = a.threads;
    const auto table = rolling_origin_errors(data, *f, ro);
    const auto r = estimate_shelf_life(table, a.threshold, a.regression == "pooled" ? ApeRegression::Pooled : ApeRegression::HorizonMeans);
    const fs::path out(c.out);
    write(out, "shelf_life.json", r.to_json());
    write(out, "ape.csv", table.to_csv());
    write(out, "plot.svg", shelf_svg(r));
    say(r.ape_table.forecaster + ": shelf life " + std::to_string(r.shelf_life_quarters) + " quarter(s)" +
        (r.censored ? " (censored at the last evaluated horizon)" : ""));
    return 0;
}

struct SummaryRow {
    std::string criterion;
    std::string quantity;
    std::string published;
    std::string computed;
    std::string tolerance;
    std::string status;
};

std::string status_of(bool ok) { return ok ? "match" : "mismatch"; }

int cmd_reproduce(const Common& c, const ReproduceArgs& a) {
    const fs::path dir = a.data_dir.empty() ? fixture_dir("data") : fs::path(a.data_dir);
    const auto single_path = require_fixture(dir, kSingleStationFile);
    const auto network_path = require_fixture(dir, kNetworkFile);
    const fs::path out(c.out);

    SingleStationOptions so;
    so.variables = c.vars;
    if (!c.station.empty()) so.station = c.station;
    so.n_boot = a.boot;
    so.seed = require_seed(a.seed, a.boot);
    so.threads = a.threads;
    so.lag = a.lag;
    const auto s = analyze_single_station(load_panel(single_path), so);

    NetworkOptions no;
    no.threads = a.threads;
    const auto net = build_network(load_panel(network_path), "gwl", no);

    write(out, "var_model.json", model_to_json(s.model));
    write(out, "lag_selection.csv", s.lags.to_csv());
    DiagnoseArgs da;
    write(out, "diagnostics.json", diagnostics_json(s.model, da, s.efp));
    write(out, "efp.csv", s.efp.to_csv());
    write(out, "efp.svg", efp_svg(s.efp));
    write(out, "granger.json", s.granger.to_json());
    write(out, "irf.csv", s.irf.to_csv());
    write(out, "irf.svg", irf_svg(s.irf));
    write(out, "fevd.csv", s.fevd.to_csv());
    write(out, "fevd.svg", fevd_svg(s.fevd));
    write(out, "edges.csv", net.edges_csv());
    write(out, "pairs.csv", net.pairs_csv());
    write(out, "network.geojson", net.to_geojson());
    write(out, "shelf_life.json", s.shelf_life.to_json());
    write(out, "ape.csv", s.shelf_life.ape_table.to_csv());
    write(out, "plot.svg", shelf_svg(s.shelf_life));

    std::vector<SummaryRow> rows;
    std::string chosen;
    for (auto p : s.lags.chosen) chosen += (chosen.empty() ? "" : "/") + std::to_string(p);
    rows.push_back({"11", "lag order (AIC/BIC/HQ/FPE)", "4/4/4/4", chosen, "exact", status_of(s.lags.unanimous && s.lags.consensus == 4)});
    rows.push_back({"12", "portmanteau p", "0.1163", format_double(s.portmanteau.p_value), "+-0.02",
                    status_of(std::abs(s.portmanteau.p_value - 0.1163) <= 0.02)});
    rows.push_back({"12", "ARCH-LM p", "0.7252", format_double(s.arch.p_value), "+-0.05", status_of(std::abs(s.arch.p_value - 0.7252) <= 0.05)});
    rows.push_back({"12", "skewness p", "0.239", format_double(s.normality.skewness.p_value), "+-0.05",
                    status_of(std::abs(s.normality.skewness.p_value - 0.239) <= 0.05)});
    rows.push_back({"13", "Granger p (temperature -> others)", "3.916e-05", format_double(s.granger.p_value), "<= 0.001",
                    status_of(s.granger.p_value <= 0.001)});
    rows.push_back({"14", "FEVD share of GWL from other variables, h=10", "about 0.20", format_double(s.fevd_other_share), "[0.10, 0.30]",
                    status_of(s.fevd_other_share >= 0.10 && s.fevd_other_share <= 0.30)});
    bool any_crossed = false;
    for (bool x : s.efp.crossed) any_crossed = any_crossed || x;
    rows.push_back({"-", "OLS-CUSUM crossing", "none", any_crossed ? "crossed" : "none", "exact", status_of(!any_crossed)});
    int within = 0;
    for (const auto& m : match_published_pairs(net)) {
        const auto& p = m.published;
        std::string computed = "not found";
        bool ok = false;
        if (m.computed) {
            computed = format_double(m.computed->rho_u_to_v) + " / " + format_double(m.computed->rho_v_to_u);
            const bool uv = p.rho_u_to_v == 1.0 ? m.computed->rho_u_to_v >= 0.995 : std::abs(m.computed->rho_u_to_v - p.rho_u_to_v) <= 0.01;
            ok = uv && std::abs(m.computed->rho_v_to_u - p.rho_v_to_u) <= 0.01;
        }
        within += ok;
        rows.push_back({"15", "CDD " + p.station_u + " / " + p.station_v, format_short(p.rho_u_to_v) + " / " + format_short(p.rho_v_to_u),
                        computed, "+-0.01", status_of(ok)});
    }
    rows.push_back({"15", "edges at 0.95", "24", std::to_string(net.edges.size()), "24 published pairs", status_of(within == 24)});
    const auto q = s.shelf_life.shelf_life_quarters;
    rows.push_back({"16", "VAR shelf life (quarters)", "11", std::to_string(q) + (s.shelf_life.censored ? " (censored)" : ""), "+-1",
                    status_of(q >= 10 && q <= 12)});

    std::size_t mismatches = 0;
    for (const auto& r : rows) mismatches += r.status != "match";

    std::ostringstream csv, md;
    csv << "criterion,quantity,published,computed,tolerance,status\n";
    auto q_csv = [](const std::string& s) { return s.find(',') == std::string::npos ? s : "\"" + s + "\""; };
    for (const auto& r : rows) {
        csv << r.criterion << ',' << q_csv(r.quantity) << ',' << q_csv(r.published) << ',' << q_csv(r.computed) << ','
            << q_csv(r.tolerance) << ',' << r.status << '\n';
    }
    md << "# Reproduction summary\n\n";
    md << "Single-station series: " << s.n_points << " points, " << s.n_train << " for training, " << s.filled_cells
       << " interpolated cell(s); VAR(" << s.model.order() << ") on " << s.model.var_names.size() << " variables";
    md << "; IRF bootstrap " << s.irf.n_boot << " replicate(s), seed " << so.seed << ".\n";
    md << "Network: " << net.nodes.size() << " stations, " << net.pairs.size() << " pairs, " << net.edges.size() << " edges at 0.95.\n\n";
    md << "| criterion | quantity | published | computed | tolerance | status |\n|---|---|---|---|---|---|\n";
    for (const auto& r : rows) {
        md << "| " << r.criterion << " | " << r.quantity << " | " << r.published << " | " << r.computed << " | " << r.tolerance << " | "
           << r.status << " |\n";
    }
    md << "\n";
    if (mismatches == 0) {
        md << "All published values reproduced within tolerance.\n";
    } else {
        md << "Downgrade note: " << mismatches
           << " published value(s) were not reproduced within tolerance. The published numbers depend on preprocessing that is "
              "not fully stated (quarterly aggregation, variable ordering, lag choices for the diagnostics), so fixture "
              "comparisons are best-effort; the property and oracle acceptance suite is the correctness gate.\n";
    }
    write(out, "summary.csv", csv.str());
    write(out, "summary.md", md.str());
    say(std::to_string(rows.size() - mismatches) + "/" + std::to_string(rows.size()) + " published values reproduced");
    return 0;
}

const CLI::Validator kOpenUnit(
    [](std::string& text) -> std::string {
        double v = 0.0;
        try {
            v = std::stod(text);
        } catch (const std::exception&) {
            return "'" + text + "' is not a number";
        }
        return v > 0.0 && v < 1.0 ? std::string{} : "value " + text + " not in (0, 1)";
    },
    "in (0, 1)");

void add_common(CLI::App* sub, Common& c, bool input, bool station) {
    if (input) sub->add_option("-i,--input", c.input, "Long-format CSV: station,date,variable,value[,latitude,longitude]")->required();
    if (station) {
        sub->add_option("--station", c.station, "Station to analyse (required when the input has several)");
        sub->add_option("--vars", c.vars, "Variables in model order (also the Cholesky ordering)")->delimiter(',')->capture_default_str();
    }
    sub->add_option("-o,--out", c.out, "Output directory")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gwts: VAR modelling, residual diagnostics, copula directional dependence and model shelf life for groundwater series"};
    app.set_config("--config", "", "key=value config file; [section] tables apply to subcommands; command-line flags win");
    app.require_subcommand(1);
    app.set_version_flag("--version", "gwts 0.1.0");

    Common c_fit, c_diag, c_st, c_cdd, c_sh, c_rp;
    c_rp.out = "report";
    FitArgs fit;
    DiagnoseArgs diag;
    StructuralArgs st;
    CddArgs cd;
    ShelfArgs sh;
    ReproduceArgs rp;

    auto* s_fit = app.add_subcommand("fit", "Select the lag order and fit a VAR(p); writes var_model.json, lag_selection.csv");
    add_common(s_fit, c_fit, true, true);
    s_fit->add_option("--lag", fit.lag, "Fixed lag order p (default: consensus of AIC/BIC/HQ/FPE)")->check(CLI::Range(1, 64));
    s_fit->add_flag("--auto-lag", fit.auto_lag, "Use the criterion consensus (the default when --lag is absent)");
    s_fit->add_option("--p-max", fit.p_max, "Largest lag order searched")->check(CLI::Range(1, 64))->capture_default_str();
    s_fit->add_option("--holdout", fit.holdout, "Fit on the first floor(ratio*T) points only")->check(kOpenUnit);
    s_fit->add_flag("--difference", fit.difference, "First-difference the series before fitting");
    s_fit->add_option("--divisor", fit.divisor, "Residual covariance divisor: dof = T-p-(np+1), ml = T-p")
        ->check(CLI::IsMember({"dof", "ml"}))
        ->capture_default_str();
    s_fit->get_option("--auto-lag")->excludes("--lag");

    auto* s_diag = app.add_subcommand("diagnose", "Residual diagnostics of a fitted model; writes diagnostics.json, efp.csv, efp.svg");
    add_common(s_diag, c_diag, false, false);
    s_diag->add_option("--model", diag.model, "Model JSON (default: <out>/var_model.json)");
    s_diag->add_option("--alpha", diag.alpha, "Significance level")->check(kOpenUnit)->capture_default_str();
    s_diag->add_option("--portmanteau-lags", diag.portmanteau_lags, "Portmanteau lag count h")->check(CLI::PositiveNumber)->capture_default_str();
    s_diag->add_option("--arch-lags", diag.arch_lags, "ARCH-LM lag count q")->check(CLI::PositiveNumber)->capture_default_str();

    auto* s_st = app.add_subcommand("structural", "Granger test, orthogonalised IRF and FEVD; writes granger.json, irf.csv/svg, fevd.csv/svg");
    s_st->set_help_flag("--help", "Print this help message and exit");  // frees the name "h" for the horizon
    add_common(s_st, c_st, false, false);
    s_st->add_option("--model", st.model, "Model JSON (default: <out>/var_model.json)");
    s_st->add_option("--cause", st.cause, "Causing variable for the Granger test")->capture_default_str();
    s_st->add_option("--effect", st.effect, "Effect variables (default: all others)")->delimiter(',');
    s_st->add_option("--h,--horizon", st.horizon, "IRF horizon")->check(CLI::Range(1, 1000))->capture_default_str();
    s_st->add_option("--fevd-h", st.fevd_horizon, "FEVD horizon")->check(CLI::Range(1, 1000))->capture_default_str();
    s_st->add_option("--boot", st.boot, "Bootstrap replicates for IRF bands (0 disables)")->capture_default_str();
    s_st->add_option("--seed", st.seed, "Bootstrap seed (required when --boot > 0)")->envname("GWTS_SEED");
    s_st->add_option("--ci", st.ci, "IRF band coverage")->check(kOpenUnit)->capture_default_str();
    s_st->add_option("--alpha", st.alpha, "Granger significance level")->check(kOpenUnit)->capture_default_str();
    s_st->add_flag("--allow-unstable", st.allow_unstable, "Compute IRFs for a model with a companion root on or outside the unit circle");
    s_st->add_option("--threads", st.threads, "Bootstrap worker threads (0 = all cores)")->capture_default_str();

    auto* s_cdd = app.add_subcommand("cdd", "Copula directional dependence network; writes edges.csv, pairs.csv, network.geojson");
    add_common(s_cdd, c_cdd, true, false);
    s_cdd->add_option("--variable", cd.variable, "Variable compared across stations")->capture_default_str();
    s_cdd->add_option("--threshold", cd.threshold, "Edge threshold on max(rho_UV, rho_VU)")->check(CLI::NonNegativeNumber)->capture_default_str();
    s_cdd->add_option("--estimator", cd.estimator, "ratio = Var(r)/Var(v), moment = 12 E[r^2] - 3")
        ->check(CLI::IsMember({"ratio", "moment"}))
        ->capture_default_str();
    s_cdd->add_option("--threads", cd.threads, "Worker threads over pairs (0 = all cores)")->capture_default_str();

    auto* s_sh = app.add_subcommand("shelflife", "Rolling-origin APE and shelf life; writes shelf_life.json, ape.csv, plot.svg");
    add_common(s_sh, c_sh, true, true);
    s_sh->add_option("--target", sh.target, "Variable whose APE is evaluated")->capture_default_str();
    s_sh->add_option("--forecaster", sh.forecaster, "var or seasonal-naive")->check(CLI::IsMember({"var", "seasonal-naive"}))->capture_default_str();
    s_sh->add_option("--lag", sh.lag, "VAR lag order (default: consensus on the first training window)")->check(CLI::Range(1, 64));
    s_sh->add_option("--p-max", sh.p_max, "Largest lag order searched")->check(CLI::Range(1, 64))->capture_default_str();
    s_sh->add_option("--period", sh.period, "Season length for seasonal-naive")->check(CLI::Range(1, 1000))->capture_default_str();
    s_sh->add_option("--holdout", sh.holdout, "First origin = floor(ratio*T)")->check(kOpenUnit)->capture_default_str();
    s_sh->add_option("--h-max", sh.h_max, "Largest horizon (default: T - first origin)")->check(CLI::PositiveNumber);
    s_sh->add_option("--threshold", sh.threshold, "APE threshold")->check(CLI::NonNegativeNumber)->capture_default_str();
    s_sh->add_option("--regression", sh.regression, "means = per-horizon mean APE, pooled = every row")
        ->check(CLI::IsMember({"means", "pooled"}))
        ->capture_default_str();
    s_sh->add_option("--threads", sh.threads, "Worker threads over origins (0 = all cores)")->capture_default_str();

    auto* s_rp = app.add_subcommand("reproduce", "Run every analysis on the field fixtures; writes all artifacts plus summary.md/csv");
    add_common(s_rp, c_rp, false, true);
    s_rp->add_option("--data-dir", rp.data_dir, "Fixture directory (default: $GWTS_FIXTURE_DIR, else ./data)");
    s_rp->add_option("--boot", rp.boot, "IRF bootstrap replicates")->capture_default_str();
    s_rp->add_option("--seed", rp.seed, "Bootstrap seed (required when --boot > 0)")->envname("GWTS_SEED");
    s_rp->add_option("--lag", rp.lag, "Override the consensus lag order")->check(CLI::Range(1, 64));
    s_rp->add_option("--threads", rp.threads, "Worker threads (0 = all cores)")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    try {
        if (s_fit->parsed()) return cmd_fit(c_fit, fit);
        if (s_diag->parsed()) return cmd_diagnose(c_diag, diag);
        if (s_st->parsed()) return cmd_structural(c_st, st);
        if (s_cdd->parsed()) return cmd_cdd(c_cdd, cd);
        if (s_sh->parsed()) return cmd_shelflife(c_sh, sh);
        if (s_rp->parsed()) return cmd_reproduce(c_rp, rp);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}

#include "gwts/reproduce.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <map>

#include "gwts/error.hpp"

namespace gwts {

std::filesystem::path require_fixture(const std::filesystem::path& dir, const std::string& name) {
    const auto path = dir / name;
    if (!std::filesystem::is_regular_file(path)) {
        throw Error("fixture not found: expected " + path.string() +
                    " (run tools/fetch_fixtures.sh or set GWTS_FIXTURE_DIR; see data/README.md)");
    }
    return path;
}

std::filesystem::path fixture_dir(const std::filesystem::path& fallback) {
    if (const char* env = std::getenv("GWTS_FIXTURE_DIR"); env && *env) return env;
    return fallback;
}

std::string normalize_station_name(std::string_view name) {
    std::string out;
    bool space = false;
    for (char c : name) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == '_' || c == '-') {
            space = !out.empty();
            continue;
        }
        if (space) out.push_back(' ');
        space = false;
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    for (std::size_t pos; (pos = out.find("chowki")) != std::string::npos;) out.replace(pos, 6, "chouki");
    return out;
}

const std::vector<PublishedPair>& published_network() {
    static const std::vector<PublishedPair> pairs{
        {"Alladpur", "Chisadia", 1.0, 0.94683},
        {"Alladpur", "Segwa Chowki I", 0.96587, 0.9674},
        {"Amreshwar", "Handod I", 0.96479, 0.96443},
        {"Amreshwar", "Makni", 0.97426, 0.974},
        {"Amreshwar", "Segwa Chouki II", 0.98572, 0.98474},
        {"Amreshwar", "Vadodara II", 0.96374, 0.96193},
        {"Asala", "Chitral PZ II", 0.97568, 0.9752},
        {"Baladgam", "Makni", 0.95694, 0.95908},
        {"Bhindol", "Kosindra Pz I", 0.99311, 0.9933},
        {"Bhindol", "Pitha", 0.96079, 0.96143},
        {"Bhindol", "Vadtalav PZ", 0.97362, 0.97328},
        {"Bodeli", "Kosindra PZ I", 0.96573, 0.96685},
        {"Chisadia", "Panwad", 0.9631, 0.96486},
        {"Chitral PZ II", "Makni", 0.99218, 0.99237},
        {"Chitral PZ II", "Vadodara I", 0.96172, 0.96216},
        {"Devat (Thadgam)", "Saidivasana", 0.95406, 0.96142},
        {"Ghayaj II", "Makni", 0.99612, 0.99629},
        {"Handod I", "Karamasiya", 0.95198, 0.95206},
        {"Handod I", "Segwa Chouki II", 0.98175, 0.98154},
        {"Handod I", "Vadodara I", 0.95313, 0.95351},
        {"Kaprali", "Pitha", 0.97459, 0.97362},
        {"Karamasiya", "Kosindra PZ I", 0.95942, 0.95911},
        {"Pavi", "Vadtalav PZ", 0.97843, 0.9787},
        {"Segwa chouki II", "Vadtalav PZ", 0.97647, 0.97773},
    };
    return pairs;
}

SingleStationAnalysis analyze_single_station(const TimeSeriesPanel& panel, const SingleStationOptions& options) {
    auto index_of = [&](const std::string& name) {
        const auto it = std::find(options.variables.begin(), options.variables.end(), name);
        if (it == options.variables.end()) throw DomainError("'" + name + "' is not among the analysed variables");
        return static_cast<std::size_t>(it - options.variables.begin());
    };
    const std::size_t target = index_of(options.target);
    const std::size_t cause = index_of(options.cause);

    SingleStationAnalysis out;
    const auto filled = fill_gaps(panel);
    const auto s = panel.station_index(options.station);
    if (!s) throw DomainError("station '" + options.station + "' is not in the panel");
    for (const auto& v : options.variables) {
        const auto vi = panel.variable_index(v);
        if (!vi) continue;  // extract_matrix reports the unknown name
        for (std::size_t t = 0; t < panel.n_times(); ++t) {
            out.filled_cells += !panel.present(*s, t, *vi) && filled.present(*s, t, *vi);
        }
    }
    Eigen::MatrixXd series = extract_matrix(filled, options.station, options.variables);
    if (options.difference) series = difference(series);
    out.n_points = static_cast<std::size_t>(series.rows());
    out.n_train = holdout_train_size(out.n_points, options.holdout);
    if (out.n_train == 0 || out.n_train == out.n_points) throw DomainError("holdout ratio leaves an empty partition");
    const Eigen::MatrixXd train = series.topRows(static_cast<Eigen::Index>(out.n_train));

    out.lags = select_lag_order(train, options.p_max);
    const std::size_t p = options.lag.value_or(out.lags.consensus);
    out.model = fit_var(train, p, FitOptions{SigmaDivisor::DegreesOfFreedom, options.variables});

    out.portmanteau = portmanteau_test(out.model, options.portmanteau_lags, options.alpha);
    out.arch = arch_test(out.model, options.arch_lags, options.alpha);
    out.normality = normality_tests(out.model, options.alpha);
    out.efp = ols_cusum(out.model, options.alpha);

    std::vector<std::size_t> effect;
    for (std::size_t i = 0; i < options.variables.size(); ++i) {
        if (i != cause) effect.push_back(i);
    }
    out.granger = granger_test(out.model, {cause}, effect, options.alpha);

    IrfOptions irf_opts;
    irf_opts.horizon = options.irf_horizon;
    irf_opts.n_boot = options.n_boot;
    irf_opts.seed = options.seed;
    irf_opts.threads = options.threads;
    irf_opts.allow_unstable = true;  // the report flags it instead of aborting
    out.irf = irf(out.model, irf_opts);

    out.fevd = fevd(out.model, options.fevd_horizon);
    const auto& share = out.fevd.proportions.back();
    out.fevd_other_share = 1.0 - share(static_cast<Eigen::Index>(target), static_cast<Eigen::Index>(target));

    VarForecaster forecaster(p);
    RollingOptions roll;
    roll.min_train = out.n_train;
    roll.h_max = out.n_points - out.n_train;
    roll.targets = {target};
    roll.threads = options.threads;
    out.shelf_life = estimate_shelf_life(rolling_origin_errors(series, forecaster, roll), options.shelf_threshold);
    return out;
}

std::vector<PairMatch> match_published_pairs(const DependencyNetwork& network) {
    std::map<std::pair<std::string, std::string>, const CddResult*> by_key;
    for (const auto& r : network.pairs) {
        by_key[{normalize_station_name(r.station_u), normalize_station_name(r.station_v)}] = &r;
    }
    std::vector<PairMatch> out;
    for (const auto& pub : published_network()) {
        PairMatch m{pub, std::nullopt};
        const auto u = normalize_station_name(pub.station_u);
        const auto v = normalize_station_name(pub.station_v);
        if (auto it = by_key.find({u, v}); it != by_key.end()) {
            m.computed = *it->second;
        } else if (auto jt = by_key.find({v, u}); jt != by_key.end()) {
            CddResult flipped = *jt->second;
            std::swap(flipped.station_u, flipped.station_v);
            std::swap(flipped.rho_u_to_v, flipped.rho_v_to_u);
            std::swap(flipped.ratio_u_to_v, flipped.ratio_v_to_u);
            std::swap(flipped.moment_u_to_v, flipped.moment_v_to_u);
            std::swap(flipped.fit_u_to_v, flipped.fit_v_to_u);
            m.computed = std::move(flipped);
        }
        out.push_back(std::move(m));
    }
    return out;
}

}  // namespace gwts

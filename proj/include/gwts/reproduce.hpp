#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "gwts/copula.hpp"
#include "gwts/diagnostics.hpp"
#include "gwts/panel.hpp"
#include "gwts/shelflife.hpp"
#include "gwts/structural.hpp"
#include "gwts/var.hpp"

namespace gwts {

inline constexpr const char* kSingleStationFile = "patiyapura.csv";
inline constexpr const char* kNetworkFile = "vadodara_gwl.csv";

/// Looks for `name` in `dir`; throws gwts::Error naming the expected path and the fetch script otherwise.
[[nodiscard]] std::filesystem::path require_fixture(const std::filesystem::path& dir, const std::string& name);

/// Fixture directory: $GWTS_FIXTURE_DIR if set, else `fallback`.
[[nodiscard]] std::filesystem::path fixture_dir(const std::filesystem::path& fallback);

/// Case-folded, whitespace-collapsed station key; "chowki" and "chouki" spell the same place.
[[nodiscard]] std::string normalize_station_name(std::string_view name);

struct PublishedPair {
    std::string station_u;
    std::string station_v;
    double rho_u_to_v;
    double rho_v_to_u;
};

/// The 24 station pairs published with CDD above 0.95.
[[nodiscard]] const std::vector<PublishedPair>& published_network();

struct SingleStationOptions {
    std::string station = "Patiyapura";
    /// Column order of the VAR (also the Cholesky ordering).
    std::vector<std::string> variables{"precipitation", "temperature", "gwl"};
    std::string target = "gwl";
    std::string cause = "temperature";
    double holdout = 0.7;
    std::size_t p_max = 8;
    std::optional<std::size_t> lag;  ///< overrides the consensus order
    std::size_t portmanteau_lags = kDefaultPortmanteauLags;
    std::size_t arch_lags = kDefaultArchLags;
    std::size_t irf_horizon = 20;
    std::size_t fevd_horizon = 10;
    std::size_t n_boot = 100;
    std::uint64_t seed = 0;
    double alpha = 0.05;
    double shelf_threshold = 0.05;
    std::size_t threads = 1;
    bool difference = false;
};

struct SingleStationAnalysis {
    std::size_t n_points = 0;
    std::size_t n_train = 0;
    std::size_t filled_cells = 0;
    LagSelection lags;
    VarModel model;
    DiagnosticReport portmanteau;
    DiagnosticReport arch;
    NormalityReports normality;
    EfpPath efp;
    GrangerReport granger;
    IrfResult irf;
    FevdResult fevd;
    double fevd_other_share = 0.0;  ///< target's share from the other variables at the FEVD horizon
    ShelfLifeResult shelf_life;
};

[[nodiscard]] SingleStationAnalysis analyze_single_station(const TimeSeriesPanel& panel,
                                                           const SingleStationOptions& options = {});

struct PairMatch {
    PublishedPair published;
    std::optional<CddResult> computed;  ///< oriented like the published pair
};

/// Finds every published pair in the network's evaluated pairs by normalized name.
[[nodiscard]] std::vector<PairMatch> match_published_pairs(const DependencyNetwork& network);

}  // namespace gwts

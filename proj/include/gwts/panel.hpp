#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace gwts {

/// A calendar quarter. `quarter` is 1..4.
struct Quarter {
    int year = 0;
    int quarter = 1;

    [[nodiscard]] constexpr long ordinal() const noexcept { return static_cast<long>(year) * 4 + (quarter - 1); }
    [[nodiscard]] static constexpr Quarter from_ordinal(long ord) noexcept {
        long y = ord >= 0 ? ord / 4 : (ord - 3) / 4;
        return Quarter{static_cast<int>(y), static_cast<int>(ord - y * 4) + 1};
    }
    [[nodiscard]] std::string to_string() const;  // "2000-Q1"

    friend constexpr auto operator<=>(const Quarter&, const Quarter&) = default;
};

/// Parses "YYYY-Qn", "YYYY-MM-DD" or "YYYY-MM" into the containing quarter.
[[nodiscard]] std::optional<Quarter> parse_quarter(std::string_view text);

struct StationId {
    std::string name;
    std::optional<double> latitude;
    std::optional<double> longitude;

    [[nodiscard]] bool has_coordinates() const noexcept { return latitude && longitude; }
};

/// Stations x quarters x variables, with a missing-value mask.
///
/// The time index is a contiguous run of quarters; quarters without an
/// observation are masked rather than dropped, so every station shares the
/// same index. Panels are immutable once built.
class TimeSeriesPanel {
public:
    TimeSeriesPanel() = default;
    TimeSeriesPanel(std::vector<StationId> stations, std::vector<std::string> variables,
                    std::vector<Quarter> index, std::vector<double> values, std::vector<char> present);

    [[nodiscard]] const std::vector<StationId>& stations() const noexcept { return stations_; }
    [[nodiscard]] const std::vector<std::string>& variables() const noexcept { return variables_; }
    [[nodiscard]] const std::vector<Quarter>& index() const noexcept { return index_; }

    [[nodiscard]] std::size_t n_stations() const noexcept { return stations_.size(); }
    [[nodiscard]] std::size_t n_times() const noexcept { return index_.size(); }
    [[nodiscard]] std::size_t n_variables() const noexcept { return variables_.size(); }
    [[nodiscard]] bool empty() const noexcept { return index_.empty(); }

    [[nodiscard]] bool present(std::size_t s, std::size_t t, std::size_t v) const { return present_[offset(s, t, v)] != 0; }
    /// NaN where masked.
    [[nodiscard]] double value(std::size_t s, std::size_t t, std::size_t v) const { return values_[offset(s, t, v)]; }

    [[nodiscard]] std::optional<std::size_t> station_index(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> variable_index(std::string_view name) const;

    /// Rows [begin, end) of the time index.
    [[nodiscard]] TimeSeriesPanel slice(std::size_t begin, std::size_t end) const;

    /// True when the station has no masked value for the variable.
    [[nodiscard]] bool complete(std::size_t s, std::size_t v) const;

    friend bool operator==(const TimeSeriesPanel& a, const TimeSeriesPanel& b);

private:
    [[nodiscard]] std::size_t offset(std::size_t s, std::size_t t, std::size_t v) const {
        return (s * index_.size() + t) * variables_.size() + v;
    }

    std::vector<StationId> stations_;
    std::vector<std::string> variables_;
    std::vector<Quarter> index_;
    std::vector<double> values_;
    std::vector<char> present_;
};

enum class Aggregation { Mean, Sum };

/// Column mapping for long-format CSV input.
struct CsvSchema {
    std::string station = "station";
    std::string date = "date";
    std::string variable = "variable";
    std::string value = "value";
    std::string latitude = "latitude";    // optional column
    std::string longitude = "longitude";  // optional column
    Aggregation default_aggregation = Aggregation::Mean;
    /// Per-variable override of how sub-quarterly rows are combined.
    std::map<std::string, Aggregation> aggregation;
};

/// Reads a long-format CSV (station,date,variable,value). Rows sharing a
/// quarter but with distinct dates are aggregated; two rows with the same
/// station, date and variable are a conflict.
[[nodiscard]] TimeSeriesPanel load_panel(const std::filesystem::path& path, const CsvSchema& schema = {});
[[nodiscard]] TimeSeriesPanel parse_panel(std::string_view csv_text, const CsvSchema& schema = {});

/// Writes the panel in the same long format (dates as YYYY-Qn), omitting masked cells.
void write_panel(const TimeSeriesPanel& panel, const std::filesystem::path& path);
[[nodiscard]] std::string format_panel(const TimeSeriesPanel& panel);

/// JSON summary: stations, variables, span and missing counts.
[[nodiscard]] std::string panel_summary_json(const TimeSeriesPanel& panel);

/// Linear interpolation of interior gaps; leading and trailing gaps stay masked.
[[nodiscard]] TimeSeriesPanel fill_gaps(const TimeSeriesPanel& panel);

struct HoldoutSplit {
    TimeSeriesPanel train;
    TimeSeriesPanel test;
    double ratio = 0.0;
};

/// Chronological split with floor(ratio * T) training quarters.
[[nodiscard]] HoldoutSplit holdout_split(const TimeSeriesPanel& panel, double ratio);
[[nodiscard]] std::size_t holdout_train_size(std::size_t n, double ratio);

/// T x n matrix for one station; columns follow `variables`.
[[nodiscard]] Eigen::MatrixXd extract_matrix(const TimeSeriesPanel& panel, std::string_view station,
                                             const std::vector<std::string>& variables);

}  // namespace gwts

#include "gwts/panel.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <tuple>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "gwts/error.hpp"
#include "gwts/report.hpp"

namespace gwts {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::vector<std::string> split_csv_line(std::string_view line, std::size_t line_no) {
    std::vector<std::string> out;
    std::string field;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                field.push_back(ch);
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(std::move(field));
            field.clear();
        } else {
            field.push_back(ch);
        }
    }
    if (quoted) throw ParseError(line_no, "unterminated quoted field");
    out.push_back(std::move(field));
    return out;
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::optional<double> parse_double(std::string_view s) {
    s = trim(s);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
    return v;
}

bool is_missing_token(std::string_view s) {
    s = trim(s);
    return s.empty() || s == "NA" || s == "na" || s == "NaN" || s == "nan" || s == "null";
}

std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char ch : s) {
        if (ch == '"') out.push_back('"');
        out.push_back(ch);
    }
    out.push_back('"');
    return out;
}

int parse_int(std::string_view s) {
    int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return -1;
    return v;
}

}  // namespace

std::string Quarter::to_string() const {
    std::ostringstream os;
    os << year << "-Q" << quarter;
    return os.str();
}

std::optional<Quarter> parse_quarter(std::string_view text) {
    text = trim(text);
    auto dash = text.find('-');
    if (dash == std::string_view::npos || dash == 0) return std::nullopt;
    int year = parse_int(text.substr(0, dash));
    if (year < 0) return std::nullopt;
    std::string_view rest = text.substr(dash + 1);
    if (!rest.empty() && (rest.front() == 'Q' || rest.front() == 'q')) {
        int q = parse_int(rest.substr(1));
        if (q < 1 || q > 4) return std::nullopt;
        return Quarter{year, q};
    }
    auto dash2 = rest.find('-');
    int month = parse_int(rest.substr(0, dash2));
    if (month < 1 || month > 12) return std::nullopt;
    if (dash2 != std::string_view::npos) {
        int day = parse_int(rest.substr(dash2 + 1));
        if (day < 1 || day > 31) return std::nullopt;
    }
    return Quarter{year, (month - 1) / 3 + 1};
}

TimeSeriesPanel::TimeSeriesPanel(std::vector<StationId> stations, std::vector<std::string> variables,
                                 std::vector<Quarter> index, std::vector<double> values, std::vector<char> present)
    : stations_(std::move(stations)),
      variables_(std::move(variables)),
      index_(std::move(index)),
      values_(std::move(values)),
      present_(std::move(present)) {
    const std::size_t expected = stations_.size() * index_.size() * variables_.size();
    if (values_.size() != expected || present_.size() != expected) {
        throw DomainError("panel storage does not match stations x times x variables");
    }
    for (std::size_t t = 1; t < index_.size(); ++t) {
        if (!(index_[t - 1] < index_[t])) throw DomainError("panel time index must be strictly increasing");
    }
    for (const auto& st : stations_) {
        if (st.name.empty()) throw DomainError("station name must be non-empty");
        if (st.latitude && (*st.latitude < -90.0 || *st.latitude > 90.0)) {
            throw DomainError("latitude out of range for station " + st.name);
        }
        if (st.longitude && (*st.longitude < -180.0 || *st.longitude > 180.0)) {
            throw DomainError("longitude out of range for station " + st.name);
        }
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (present_[i]) {
            if (!std::isfinite(values_[i])) throw DomainError("non-finite value marked present");
        } else {
            values_[i] = kNaN;
        }
    }
}

std::optional<std::size_t> TimeSeriesPanel::station_index(std::string_view name) const {
    for (std::size_t i = 0; i < stations_.size(); ++i) {
        if (stations_[i].name == name) return i;
    }
    return std::nullopt;
}

std::optional<std::size_t> TimeSeriesPanel::variable_index(std::string_view name) const {
    for (std::size_t i = 0; i < variables_.size(); ++i) {
        if (variables_[i] == name) return i;
    }
    return std::nullopt;
}

TimeSeriesPanel TimeSeriesPanel::slice(std::size_t begin, std::size_t end) const {
    if (begin > end || end > index_.size()) throw DomainError("slice bounds out of range");
    const std::size_t nt = end - begin;
    const std::size_t nv = variables_.size();
    std::vector<double> vals(stations_.size() * nt * nv);
    std::vector<char> pres(vals.size());
    for (std::size_t s = 0; s < stations_.size(); ++s) {
        for (std::size_t t = 0; t < nt; ++t) {
            for (std::size_t v = 0; v < nv; ++v) {
                const std::size_t dst = (s * nt + t) * nv + v;
                vals[dst] = value(s, begin + t, v);
                pres[dst] = present_[offset(s, begin + t, v)];
            }
        }
    }
    std::vector<Quarter> idx(index_.begin() + static_cast<std::ptrdiff_t>(begin),
                             index_.begin() + static_cast<std::ptrdiff_t>(end));
    return TimeSeriesPanel(stations_, variables_, std::move(idx), std::move(vals), std::move(pres));
}

bool TimeSeriesPanel::complete(std::size_t s, std::size_t v) const {
    for (std::size_t t = 0; t < index_.size(); ++t) {
        if (!present(s, t, v)) return false;
    }
    return true;
}

bool operator==(const TimeSeriesPanel& a, const TimeSeriesPanel& b) {
    if (a.variables_ != b.variables_ || a.index_ != b.index_ || a.present_ != b.present_) return false;
    if (a.stations_.size() != b.stations_.size()) return false;
    for (std::size_t i = 0; i < a.stations_.size(); ++i) {
        const auto& x = a.stations_[i];
        const auto& y = b.stations_[i];
        if (x.name != y.name || x.latitude != y.latitude || x.longitude != y.longitude) return false;
    }
    for (std::size_t i = 0; i < a.values_.size(); ++i) {
        if (a.present_[i] && a.values_[i] != b.values_[i]) return false;
    }
    return true;
}

TimeSeriesPanel parse_panel(std::string_view csv_text, const CsvSchema& schema) {
    std::istringstream in{std::string(csv_text)};
    std::string line;
    std::size_t line_no = 0;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            if (line_no == 1 && line.starts_with("\xEF\xBB\xBF")) line.erase(0, 3);
            header = split_csv_line(line, line_no);
            break;
        }
    }
    if (header.empty()) throw EmptyInputError("input is empty: a header row is required");

    auto find_col = [&](const std::string& name) -> std::optional<std::size_t> {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (trim(header[i]) == name) return i;
        }
        return std::nullopt;
    };
    auto require_col = [&](const std::string& name) {
        auto c = find_col(name);
        if (!c) throw ParseError(line_no, "missing required column '" + name + "'");
        return *c;
    };
    const std::size_t c_station = require_col(schema.station);
    const std::size_t c_date = require_col(schema.date);
    const std::size_t c_var = require_col(schema.variable);
    const std::size_t c_value = require_col(schema.value);
    const auto c_lat = find_col(schema.latitude);
    const auto c_lon = find_col(schema.longitude);

    std::vector<StationId> stations;
    std::unordered_map<std::string, std::size_t> station_pos;
    std::vector<std::string> variables;
    std::unordered_map<std::string, std::size_t> variable_pos;

    struct Cell {
        double sum = 0.0;
        int count = 0;
    };
    std::map<std::tuple<std::size_t, long, std::size_t>, Cell> cells;
    std::set<std::tuple<std::size_t, std::size_t, std::string>> seen;
    std::optional<long> min_q, max_q;
    std::size_t data_rows = 0;

    auto set_coord = [&](std::optional<double>& slot, std::string_view field, double lo, double hi,
                         const char* what, const std::string& station) {
        if (is_missing_token(field)) return;
        auto v = parse_double(field);
        if (!v || !std::isfinite(*v)) throw ParseError(line_no, std::string("invalid ") + what);
        if (*v < lo || *v > hi) throw ParseError(line_no, std::string(what) + " out of range");
        if (slot && *slot != *v) {
            throw ConflictError("line " + std::to_string(line_no) + ": conflicting " + what + " for station '" +
                                station + "'");
        }
        slot = *v;
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        auto fields = split_csv_line(line, line_no);
        if (fields.size() != header.size()) {
            throw ParseError(line_no, "expected " + std::to_string(header.size()) + " fields, found " +
                                          std::to_string(fields.size()));
        }
        ++data_rows;
        std::string station{trim(fields[c_station])};
        std::string variable{trim(fields[c_var])};
        std::string date_text{trim(fields[c_date])};
        if (station.empty()) throw ParseError(line_no, "empty station name");
        if (variable.empty()) throw ParseError(line_no, "empty variable name");
        auto q = parse_quarter(date_text);
        if (!q) throw ParseError(line_no, "unrecognised date '" + date_text + "' (expected YYYY-MM-DD or YYYY-Qn)");

        auto [sit, s_new] = station_pos.try_emplace(station, stations.size());
        if (s_new) stations.push_back(StationId{station, std::nullopt, std::nullopt});
        auto [vit, v_new] = variable_pos.try_emplace(variable, variables.size());
        if (v_new) variables.push_back(variable);
        const std::size_t s = sit->second;
        const std::size_t v = vit->second;

        if (c_lat) set_coord(stations[s].latitude, fields[*c_lat], -90.0, 90.0, "latitude", station);
        if (c_lon) set_coord(stations[s].longitude, fields[*c_lon], -180.0, 180.0, "longitude", station);

        std::string date_key = (date_text.find('Q') != std::string::npos || date_text.find('q') != std::string::npos)
                                   ? q->to_string()
                                   : date_text;
        if (!seen.emplace(s, v, date_key).second) {
            throw ConflictError("line " + std::to_string(line_no) + ": duplicate row for station '" + station +
                                "', date " + date_text + ", variable '" + variable + "'");
        }

        const long ord = q->ordinal();
        min_q = min_q ? std::min(*min_q, ord) : ord;
        max_q = max_q ? std::max(*max_q, ord) : ord;

        if (is_missing_token(fields[c_value])) continue;
        auto val = parse_double(fields[c_value]);
        if (!val || !std::isfinite(*val)) {
            throw ParseError(line_no, "invalid value '" + std::string(trim(fields[c_value])) + "'");
        }
        auto& cell = cells[{s, ord, v}];
        cell.sum += *val;
        cell.count += 1;
    }
    if (data_rows == 0) throw EmptyInputError("input has a header but no data rows");

    std::vector<Quarter> index;
    for (long o = *min_q; o <= *max_q; ++o) index.push_back(Quarter::from_ordinal(o));
    const std::size_t nt = index.size();
    const std::size_t nv = variables.size();
    std::vector<double> values(stations.size() * nt * nv, kNaN);
    std::vector<char> present(values.size(), 0);
    for (const auto& [key, cell] : cells) {
        const auto [s, ord, v] = key;
        const std::size_t t = static_cast<std::size_t>(ord - *min_q);
        auto agg = schema.default_aggregation;
        if (auto it = schema.aggregation.find(variables[v]); it != schema.aggregation.end()) agg = it->second;
        const std::size_t off = (s * nt + t) * nv + v;
        values[off] = agg == Aggregation::Sum ? cell.sum : cell.sum / cell.count;
        present[off] = 1;
    }
    return TimeSeriesPanel(std::move(stations), std::move(variables), std::move(index), std::move(values),
                           std::move(present));
}

TimeSeriesPanel load_panel(const std::filesystem::path& path, const CsvSchema& schema) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open input file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_panel(buf.str(), schema);
}

std::string format_panel(const TimeSeriesPanel& panel) {
    const bool coords = std::any_of(panel.stations().begin(), panel.stations().end(),
                                    [](const StationId& s) { return s.latitude || s.longitude; });
    std::ostringstream os;
    os << "station,date,variable,value";
    if (coords) os << ",latitude,longitude";
    os << '\n';
    for (std::size_t s = 0; s < panel.n_stations(); ++s) {
        const auto& st = panel.stations()[s];
        for (std::size_t t = 0; t < panel.n_times(); ++t) {
            for (std::size_t v = 0; v < panel.n_variables(); ++v) {
                if (!panel.present(s, t, v)) continue;
                os << csv_escape(st.name) << ',' << panel.index()[t].to_string() << ','
                   << csv_escape(panel.variables()[v]) << ',' << format_double(panel.value(s, t, v));
                if (coords) {
                    os << ',' << (st.latitude ? format_double(*st.latitude) : std::string{}) << ','
                       << (st.longitude ? format_double(*st.longitude) : std::string{});
                }
                os << '\n';
            }
        }
    }
    return os.str();
}

void write_panel(const TimeSeriesPanel& panel, const std::filesystem::path& path) {
    write_text_file(path, format_panel(panel));
}

std::string panel_summary_json(const TimeSeriesPanel& panel) {
    nlohmann::ordered_json j;
    j["n_stations"] = panel.n_stations();
    j["n_times"] = panel.n_times();
    j["variables"] = panel.variables();
    if (!panel.empty()) {
        j["start"] = panel.index().front().to_string();
        j["end"] = panel.index().back().to_string();
    }
    auto stations = nlohmann::ordered_json::array();
    for (std::size_t s = 0; s < panel.n_stations(); ++s) {
        nlohmann::ordered_json st;
        st["name"] = panel.stations()[s].name;
        if (panel.stations()[s].latitude) st["latitude"] = *panel.stations()[s].latitude;
        if (panel.stations()[s].longitude) st["longitude"] = *panel.stations()[s].longitude;
        nlohmann::ordered_json missing;
        for (std::size_t v = 0; v < panel.n_variables(); ++v) {
            std::size_t m = 0;
            for (std::size_t t = 0; t < panel.n_times(); ++t) m += panel.present(s, t, v) ? 0 : 1;
            missing[panel.variables()[v]] = m;
        }
        st["missing"] = std::move(missing);
        stations.push_back(std::move(st));
    }
    j["stations"] = std::move(stations);
    return j.dump(2);
}

TimeSeriesPanel fill_gaps(const TimeSeriesPanel& panel) {
    const std::size_t ns = panel.n_stations(), nt = panel.n_times(), nv = panel.n_variables();
    std::vector<double> vals(ns * nt * nv, kNaN);
    std::vector<char> pres(vals.size(), 0);
    for (std::size_t s = 0; s < ns; ++s) {
        for (std::size_t v = 0; v < nv; ++v) {
            std::optional<std::size_t> last;
            for (std::size_t t = 0; t < nt; ++t) {
                const std::size_t off = (s * nt + t) * nv + v;
                if (!panel.present(s, t, v)) continue;
                vals[off] = panel.value(s, t, v);
                pres[off] = 1;
                if (last && t - *last > 1) {
                    const double a = panel.value(s, *last, v);
                    const double b = panel.value(s, t, v);
                    const double span = static_cast<double>(t - *last);
                    for (std::size_t k = *last + 1; k < t; ++k) {
                        const std::size_t o = (s * nt + k) * nv + v;
                        vals[o] = a + (b - a) * static_cast<double>(k - *last) / span;
                        pres[o] = 1;
                    }
                }
                last = t;
            }
        }
    }
    return TimeSeriesPanel(panel.stations(), panel.variables(), panel.index(), std::move(vals), std::move(pres));
}

std::size_t holdout_train_size(std::size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw DomainError("holdout ratio must lie in (0, 1)");
    // Small slack so that e.g. 0.7 * 30 (= 20.999...) floors to 21.
    return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n) + 1e-9));
}

HoldoutSplit holdout_split(const TimeSeriesPanel& panel, double ratio) {
    const std::size_t n_train = holdout_train_size(panel.n_times(), ratio);
    if (panel.empty()) throw EmptyInputError("cannot split an empty panel");
    if (n_train == 0 || n_train == panel.n_times()) {
        throw DomainError("holdout ratio " + format_double(ratio) + " leaves an empty partition for " +
                          std::to_string(panel.n_times()) + " time points");
    }
    return HoldoutSplit{panel.slice(0, n_train), panel.slice(n_train, panel.n_times()), ratio};
}

Eigen::MatrixXd extract_matrix(const TimeSeriesPanel& panel, std::string_view station,
                               const std::vector<std::string>& variables) {
    if (variables.empty()) throw DomainError("at least one variable must be requested");
    auto s = panel.station_index(station);
    if (!s) throw DomainError("unknown station '" + std::string(station) + "'");
    std::vector<std::size_t> cols;
    for (const auto& name : variables) {
        auto v = panel.variable_index(name);
        if (!v) throw DomainError("unknown variable '" + name + "'");
        cols.push_back(*v);
    }
    Eigen::MatrixXd out(static_cast<Eigen::Index>(panel.n_times()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t t = 0; t < panel.n_times(); ++t) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            if (!panel.present(*s, t, cols[j])) {
                throw MissingDataError("missing value for station '" + std::string(station) + "' at " +
                                       panel.index()[t].to_string() + ", variable '" + variables[j] + "'");
            }
            out(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(j)) = panel.value(*s, t, cols[j]);
        }
    }
    return out;
}

}  // namespace gwts

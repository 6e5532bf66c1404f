#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "gwts/error.hpp"
#include "gwts/panel.hpp"

using namespace gwts;

namespace {

std::string long_csv(std::size_t quarters, const std::vector<std::string>& stations) {
    std::ostringstream os;
    os << "station,date,variable,value\n";
    for (const auto& s : stations) {
        for (std::size_t t = 0; t < quarters; ++t) {
            const auto q = Quarter::from_ordinal(2000 * 4 + static_cast<long>(t));
            os << s << ',' << q.to_string() << ",gwl," << 10.0 + 0.25 * static_cast<double>(t) << '\n';
            os << s << ',' << q.to_string() << ",rain," << 1.5 * static_cast<double>(t % 4) << '\n';
        }
    }
    return os.str();
}

}  // namespace

TEST_CASE("quarter parsing") {
    CHECK(parse_quarter("2000-Q1") == Quarter{2000, 1});
    CHECK(parse_quarter("2021-03-31") == Quarter{2021, 1});
    CHECK(parse_quarter("2010-07") == Quarter{2010, 3});
    CHECK(parse_quarter("2010-12-01") == Quarter{2010, 4});
    CHECK_FALSE(parse_quarter("2010-13-01"));
    CHECK_FALSE(parse_quarter("2010-Q5"));
    CHECK_FALSE(parse_quarter("garbage"));
    CHECK(Quarter::from_ordinal(Quarter{1999, 4}.ordinal()) == Quarter{1999, 4});
    CHECK(Quarter{2001, 2}.to_string() == "2001-Q2");
}

TEST_CASE("85 quarters load with a contiguous index") {
    const auto panel = parse_panel(long_csv(85, {"A"}));
    CHECK(panel.n_times() == 85);
    CHECK(panel.n_stations() == 1);
    CHECK(panel.n_variables() == 2);
    CHECK(panel.index().front() == Quarter{2000, 1});
    CHECK(panel.index().back() == Quarter{2021, 1});
    for (std::size_t t = 1; t < panel.n_times(); ++t) {
        CHECK(panel.index()[t].ordinal() == panel.index()[t - 1].ordinal() + 1);
    }
}

TEST_CASE("single row gives a 1x1x1 panel") {
    const auto panel = parse_panel("station,date,variable,value\nX,2005-Q3,gwl,4.5\n");
    CHECK(panel.n_stations() == 1);
    CHECK(panel.n_times() == 1);
    CHECK(panel.n_variables() == 1);
    CHECK(panel.value(0, 0, 0) == 4.5);
}

TEST_CASE("duplicate station/date/variable is a conflict") {
    CHECK_THROWS_AS((void)parse_panel("station,date,variable,value\nX,2005-Q3,gwl,1\nX,2005-Q3,gwl,2\n"), ConflictError);
}

TEST_CASE("monthly rows in one quarter are aggregated") {
    const std::string csv =
        "station,date,variable,value\n"
        "X,2005-01-15,gwl,1\nX,2005-02-15,gwl,2\nX,2005-03-15,gwl,6\n"
        "X,2005-01-15,rain,1\nX,2005-02-15,rain,2\nX,2005-03-15,rain,6\n";
    CsvSchema schema;
    schema.aggregation["rain"] = Aggregation::Sum;
    const auto panel = parse_panel(csv, schema);
    CHECK(panel.value(0, 0, *panel.variable_index("gwl")) == doctest::Approx(3.0));
    CHECK(panel.value(0, 0, *panel.variable_index("rain")) == doctest::Approx(9.0));
}

TEST_CASE("ragged stations share one index with gaps masked") {
    const std::string csv =
        "station,date,variable,value\n"
        "A,2000-Q1,gwl,1\nA,2000-Q2,gwl,2\nA,2000-Q3,gwl,3\n"
        "B,2000-Q2,gwl,5\nB,2000-Q4,gwl,NA\n";
    const auto panel = parse_panel(csv);
    CHECK(panel.n_times() == 4);
    const auto b = *panel.station_index("B");
    CHECK_FALSE(panel.present(b, 0, 0));
    CHECK(panel.present(b, 1, 0));
    CHECK_FALSE(panel.present(b, 3, 0));
    CHECK(std::isnan(panel.value(b, 0, 0)));
    CHECK_FALSE(panel.complete(b, 0));
}

TEST_CASE("malformed input reports the line") {
    CHECK_THROWS_AS((void)parse_panel(""), EmptyInputError);
    CHECK_THROWS_AS((void)parse_panel("station,date,variable,value\n"), EmptyInputError);
    try {
        (void)parse_panel("station,date,variable,value\nA,2000-Q1,gwl,1\nA,notadate,gwl,2\n");
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
    }
    CHECK_THROWS_AS((void)parse_panel("station,date,value\nA,2000-Q1,1\n"), ParseError);
    CHECK_THROWS_AS((void)parse_panel("station,date,variable,value\nA,2000-Q1,gwl,abc\n"), ParseError);
}

TEST_CASE("write then load round-trips bit for bit") {
    const std::string csv =
        "station,date,variable,value,latitude,longitude\n"
        "A,2000-Q1,gwl,0.1,22.3,73.1\nA,2000-Q2,gwl,0.30000000000000004,22.3,73.1\n"
        "B,2000-Q1,gwl,-7.125,,\n";
    const auto panel = parse_panel(csv);
    const auto path = std::filesystem::temp_directory_path() / "gwts_panel_roundtrip.csv";
    write_panel(panel, path);
    const auto back = load_panel(path);
    CHECK(back == panel);
    CHECK(back.stations()[0].has_coordinates());
    CHECK_FALSE(back.stations()[1].has_coordinates());
    std::filesystem::remove(path);
}

TEST_CASE("missing file is an I/O error") {
    CHECK_THROWS_AS((void)load_panel("/nonexistent/gwts/panel.csv"), Error);
}

TEST_CASE("holdout split sizes") {
    CHECK(holdout_train_size(85, 0.7) == 59);
    CHECK(holdout_train_size(10, 0.5) == 5);
    CHECK(holdout_train_size(2, 0.7) == 1);
    CHECK_THROWS_AS((void)holdout_train_size(10, 0.0), DomainError);
    CHECK_THROWS_AS((void)holdout_train_size(10, 1.0), DomainError);
    CHECK_THROWS_AS((void)holdout_split(parse_panel("station,date,variable,value\nX,2000-Q1,g,1\n"), 0.5), DomainError);

    const auto panel = parse_panel(long_csv(85, {"A", "B"}));
    const auto split = holdout_split(panel, 0.7);
    CHECK(split.train.n_times() == 59);
    CHECK(split.test.n_times() == 26);
    CHECK(split.train.index().back().ordinal() + 1 == split.test.index().front().ordinal());
    // Partition: concatenation reproduces the original values.
    for (std::size_t s = 0; s < 2; ++s) {
        for (std::size_t t = 0; t < 85; ++t) {
            const double v = t < 59 ? split.train.value(s, t, 0) : split.test.value(s, t - 59, 0);
            CHECK(v == panel.value(s, t, 0));
        }
    }
}

TEST_CASE("extract_matrix") {
    const auto panel = parse_panel(long_csv(85, {"A"}));
    const auto m = extract_matrix(panel, "A", {"rain", "gwl"});
    CHECK(m.rows() == 85);
    CHECK(m.cols() == 2);
    CHECK(m(3, 1) == doctest::Approx(10.75));
    CHECK(m(3, 0) == doctest::Approx(4.5));
    CHECK_THROWS_AS((void)extract_matrix(panel, "A", {}), DomainError);
    CHECK_THROWS_AS((void)extract_matrix(panel, "A", {"nope"}), DomainError);
    CHECK_THROWS_AS((void)extract_matrix(panel, "Z", {"gwl"}), DomainError);

    const auto gappy = parse_panel("station,date,variable,value\nA,2000-Q1,gwl,1\nA,2000-Q3,gwl,3\n");
    try {
        (void)extract_matrix(gappy, "A", {"gwl"});
        FAIL("expected missing data");
    } catch (const MissingDataError& e) {
        CHECK(std::string(e.what()).find("2000-Q2") != std::string::npos);
    }
    const auto filled = fill_gaps(gappy);
    CHECK(extract_matrix(filled, "A", {"gwl"})(1, 0) == doctest::Approx(2.0));
}

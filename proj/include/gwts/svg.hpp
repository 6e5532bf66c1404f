#pragma once

#include <string>
#include <vector>

namespace gwts::svg {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct HLine {
    std::string label;
    double y = 0.0;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    std::vector<Series> lines;
    std::vector<Series> points;
    std::vector<HLine> hlines;
    /// Stacked areas share `lines`-style x values; each y is a layer thickness.
    std::vector<Series> stacked;
    double width = 640;
    double height = 400;
};

[[nodiscard]] std::string render(const Chart& chart);

/// Several charts stacked vertically into one document.
[[nodiscard]] std::string render_column(const std::vector<Chart>& charts);

}  // namespace gwts::svg

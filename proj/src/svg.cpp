#include "gwts/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

namespace gwts::svg {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#17becf"};

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out.push_back(c);
        }
    }
    return out;
}

struct Frame {
    double x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    double left = 60, right = 20, top = 40, bottom = 45;
    double w = 0, h = 0;
    double px(double x) const { return left + (x - x0) / (x1 - x0) * (w - left - right); }
    double py(double y) const { return h - bottom - (y - y0) / (y1 - y0) * (h - top - bottom); }
};

void body(std::ostringstream& os, const Chart& c, double y_offset) {
    double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
    double ymin = xmin, ymax = -xmin;
    auto take = [&](const Series& s) {
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) continue;
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    };
    for (const auto& s : c.lines) take(s);
    for (const auto& s : c.points) take(s);
    if (!c.stacked.empty()) {
        ymin = std::min(ymin, 0.0);
        for (std::size_t i = 0; i < c.stacked.front().x.size(); ++i) {
            double total = 0.0;
            for (const auto& s : c.stacked) total += s.y[i];
            xmin = std::min(xmin, c.stacked.front().x[i]);
            xmax = std::max(xmax, c.stacked.front().x[i]);
            ymax = std::max(ymax, total);
        }
    }
    for (const auto& h : c.hlines) {
        ymin = std::min(ymin, h.y);
        ymax = std::max(ymax, h.y);
    }
    if (!std::isfinite(xmin)) xmin = 0, xmax = 1, ymin = 0, ymax = 1;
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    const double pad = 0.05 * (ymax - ymin);
    Frame f;
    f.x0 = xmin;
    f.x1 = xmax;
    f.y0 = ymin - (c.stacked.empty() ? pad : 0.0);
    f.y1 = ymax + pad;
    f.w = c.width;
    f.h = c.height;

    os << "<g transform=\"translate(0," << num(y_offset) << ")\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << num(c.width) << "\" height=\"" << num(c.height) << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << num(c.width / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"15\">" << escape(c.title)
       << "</text>\n";
    os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(f.y0)) << "\" x2=\"" << num(c.width - f.right)
       << "\" y2=\"" << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.top) << "\" x2=\"" << num(f.left) << "\" y2=\""
       << num(f.py(f.y0)) << "\" stroke=\"black\"/>\n";
    for (int k = 0; k <= 4; ++k) {
        const double xv = f.x0 + (f.x1 - f.x0) * k / 4.0;
        const double yv = f.y0 + (f.y1 - f.y0) * k / 4.0;
        os << "<text x=\"" << num(f.px(xv)) << "\" y=\"" << num(c.height - f.bottom + 16)
           << "\" text-anchor=\"middle\" font-size=\"11\">" << num(xv) << "</text>\n";
        os << "<text x=\"" << num(f.left - 6) << "\" y=\"" << num(f.py(yv) + 4)
           << "\" text-anchor=\"end\" font-size=\"11\">" << num(yv) << "</text>\n";
    }
    os << "<text x=\"" << num(c.width / 2) << "\" y=\"" << num(c.height - 6) << "\" text-anchor=\"middle\" font-size=\"12\">"
       << escape(c.x_label) << "</text>\n";
    os << "<text x=\"14\" y=\"" << num(c.height / 2) << "\" transform=\"rotate(-90 14 " << num(c.height / 2)
       << ")\" text-anchor=\"middle\" font-size=\"12\">" << escape(c.y_label) << "</text>\n";

    std::size_t color = 0;
    std::vector<std::pair<std::string, std::string>> legend;
    if (!c.stacked.empty()) {
        const auto& xs = c.stacked.front().x;
        std::vector<double> base(xs.size(), 0.0);
        for (const auto& s : c.stacked) {
            const char* col = kPalette[color++ % std::size(kPalette)];
            os << "<polygon fill=\"" << col << "\" fill-opacity=\"0.7\" points=\"";
            for (std::size_t i = 0; i < xs.size(); ++i) os << num(f.px(xs[i])) << ',' << num(f.py(base[i] + s.y[i])) << ' ';
            for (std::size_t i = xs.size(); i-- > 0;) os << num(f.px(xs[i])) << ',' << num(f.py(base[i])) << ' ';
            os << "\"/>\n";
            for (std::size_t i = 0; i < xs.size(); ++i) base[i] += s.y[i];
            legend.emplace_back(s.label, col);
        }
    }
    for (const auto& s : c.lines) {
        const char* col = kPalette[color++ % std::size(kPalette)];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (std::isfinite(s.y[i])) os << num(f.px(s.x[i])) << ',' << num(f.py(s.y[i])) << ' ';
        }
        os << "\"/>\n";
        legend.emplace_back(s.label, col);
    }
    for (const auto& s : c.points) {
        const char* col = kPalette[color++ % std::size(kPalette)];
        for (std::size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
            if (!std::isfinite(s.y[i])) continue;
            os << "<circle cx=\"" << num(f.px(s.x[i])) << "\" cy=\"" << num(f.py(s.y[i])) << "\" r=\"2.5\" fill=\"" << col
               << "\" fill-opacity=\"0.6\"/>\n";
        }
        legend.emplace_back(s.label, col);
    }
    for (const auto& hl : c.hlines) {
        os << "<line x1=\"" << num(f.left) << "\" y1=\"" << num(f.py(hl.y)) << "\" x2=\"" << num(c.width - f.right)
           << "\" y2=\"" << num(f.py(hl.y)) << "\" stroke=\"gray\" stroke-dasharray=\"5,4\"/>\n";
        if (!hl.label.empty()) {
            os << "<text x=\"" << num(c.width - f.right - 4) << "\" y=\"" << num(f.py(hl.y) - 4)
               << "\" text-anchor=\"end\" font-size=\"10\" fill=\"gray\">" << escape(hl.label) << "</text>\n";
        }
    }
    for (std::size_t i = 0; i < legend.size(); ++i) {
        const double ly = f.top + 14.0 * static_cast<double>(i);
        os << "<rect x=\"" << num(f.left + 10) << "\" y=\"" << num(ly) << "\" width=\"10\" height=\"10\" fill=\""
           << legend[i].second << "\"/>\n";
        os << "<text x=\"" << num(f.left + 24) << "\" y=\"" << num(ly + 9) << "\" font-size=\"11\">"
           << escape(legend[i].first) << "</text>\n";
    }
    os << "</g>\n";
}

}  // namespace

std::string render(const Chart& chart) {
    return render_column({chart});
}

std::string render_column(const std::vector<Chart>& charts) {
    double width = 0, height = 0;
    for (const auto& c : charts) {
        width = std::max(width, c.width);
        height += c.height;
    }
    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" font-family=\"sans-serif\">\n";
    double offset = 0;
    for (const auto& c : charts) {
        body(os, c, offset);
        offset += c.height;
    }
    os << "</svg>\n";
    return os.str();
}

}  // namespace gwts::svg

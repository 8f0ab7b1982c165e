#include "plot_svg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace klb::cli {

namespace {

constexpr double kWidth = 860.0;
constexpr double kHeight = 540.0;
constexpr double kMarginL = 72.0;
constexpr double kMarginR = 24.0;
constexpr double kMarginT = 40.0;
constexpr double kMarginB = 56.0;

struct Scale {
    double lo, hi, px0, px1;
    double operator()(double v) const { return px0 + (v - lo) / (hi - lo) * (px1 - px0); }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::vector<double> ticks(double lo, double hi, int target = 6) {
    const double span = hi - lo;
    const double raw = span / target;
    const double mag = std::pow(10.0, std::floor(std::log10(raw)));
    double step = mag;
    for (double m : {1.0, 2.0, 5.0, 10.0})
        if (mag * m >= raw) {
            step = mag * m;
            break;
        }
    std::vector<double> out;
    for (double v = std::ceil(lo / step) * step; v <= hi + 0.5 * step; v += step)
        out.push_back(v);
    return out;
}

}  // namespace

void render_bounds_svg(const inversion::BoundsTable& table, const std::string& path,
                       const std::string& title) {
    std::vector<const inversion::BoundsRow*> rows;
    for (const auto& r : table.rows)
        if (r.lower_status == lpcore::SolveStatus::OPTIMAL &&
            r.upper_status == lpcore::SolveStatus::OPTIMAL && std::isfinite(r.lower) &&
            std::isfinite(r.upper))
            rows.push_back(&r);
    if (rows.empty()) throw std::runtime_error("render_bounds_svg: no plottable rows");

    double xlo = rows.front()->parameter, xhi = rows.front()->parameter;
    double ylo = rows.front()->lower, yhi = rows.front()->upper;
    for (const auto* r : rows) {
        xlo = std::min(xlo, r->parameter);
        xhi = std::max(xhi, r->parameter);
        ylo = std::min(ylo, r->lower);
        yhi = std::max(yhi, r->upper);
    }
    if (xhi == xlo) xhi = xlo + 1.0;
    const double pad = (yhi - ylo) * 0.06 + 1e-12;
    ylo -= pad;
    yhi += pad;

    const Scale sx{xlo, xhi, kMarginL, kWidth - kMarginR};
    const Scale sy{ylo, yhi, kHeight - kMarginB, kMarginT};

    std::ofstream out(path);
    if (!out) throw std::runtime_error("render_bounds_svg: cannot open " + path);
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << ' ' << kHeight << "\">\n"
        << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";

    // band between the bounds
    out << "<polygon fill=\"#9ecae1\" fill-opacity=\"0.55\" stroke=\"none\" points=\"";
    for (const auto* r : rows) out << sx(r->parameter) << ',' << sy(r->lower) << ' ';
    for (auto it = rows.rbegin(); it != rows.rend(); ++it)
        out << sx((*it)->parameter) << ',' << sy((*it)->upper) << ' ';
    out << "\"/>\n";

    auto polyline = [&](auto value, const char* color) {
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.6\" points=\"";
        for (const auto* r : rows) out << sx(r->parameter) << ',' << sy(value(r)) << ' ';
        out << "\"/>\n";
    };
    polyline([](const inversion::BoundsRow* r) { return r->lower; }, "#08519c");
    polyline([](const inversion::BoundsRow* r) { return r->upper; }, "#a63603");

    // axes
    out << "<rect x=\"" << kMarginL << "\" y=\"" << kMarginT << "\" width=\""
        << kWidth - kMarginL - kMarginR << "\" height=\"" << kHeight - kMarginT - kMarginB
        << "\" fill=\"none\" stroke=\"black\" stroke-width=\"1\"/>\n";
    for (double v : ticks(xlo, xhi)) {
        const double px = sx(v);
        out << "<line x1=\"" << px << "\" y1=\"" << kHeight - kMarginB << "\" x2=\"" << px
            << "\" y2=\"" << kHeight - kMarginB + 5 << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << px << "\" y=\"" << kHeight - kMarginB + 20
            << "\" font-size=\"12\" text-anchor=\"middle\">" << fmt(v) << "</text>\n";
    }
    for (double v : ticks(ylo, yhi)) {
        const double py = sy(v);
        out << "<line x1=\"" << kMarginL - 5 << "\" y1=\"" << py << "\" x2=\"" << kMarginL
            << "\" y2=\"" << py << "\" stroke=\"black\"/>\n"
            << "<text x=\"" << kMarginL - 8 << "\" y=\"" << py + 4
            << "\" font-size=\"12\" text-anchor=\"end\">" << fmt(v) << "</text>\n";
    }
    const std::string shown = title.empty() ? table.objective : title;
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" font-size=\"15\" text-anchor=\"middle\">"
        << shown << "</text>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 16
        << "\" font-size=\"13\" text-anchor=\"middle\">parameter</text>\n";
    out << "</svg>\n";
    if (!out.good()) throw std::runtime_error("render_bounds_svg: write failed for " + path);
}

}  // namespace klb::cli

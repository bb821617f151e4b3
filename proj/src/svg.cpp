#include "survmine/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace survmine {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 500.0;
constexpr double kMarginLeft = 70.0;
constexpr double kMarginRight = 30.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 60.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Frame {
    double x_min, x_max, y_min, y_max;
    double px(double x) const {
        return kMarginLeft + (x - x_min) / (x_max - x_min) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_min) / (y_max - y_min) * (kHeight - kMarginTop - kMarginBottom);
    }
};

void open_svg(std::ostringstream& out) {
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"" << kWidth << "\" height=\"" << kHeight << "\" fill=\"white\"/>\n";
}

void draw_axes(std::ostringstream& out, const Frame& f, const std::string& x_label,
               const std::string& y_label, int x_ticks, int y_ticks) {
    out << "<g class=\"axes\" stroke=\"#333\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << fmt(f.px(f.x_min)) << "\" y1=\"" << fmt(f.py(f.y_min))
        << "\" x2=\"" << fmt(f.px(f.x_max)) << "\" y2=\"" << fmt(f.py(f.y_min)) << "\"/>\n";
    out << "<line x1=\"" << fmt(f.px(f.x_min)) << "\" y1=\"" << fmt(f.py(f.y_min))
        << "\" x2=\"" << fmt(f.px(f.x_min)) << "\" y2=\"" << fmt(f.py(f.y_max)) << "\"/>\n";
    out << "</g>\n";
    out << "<g class=\"ticks\" font-size=\"12\" fill=\"#333\" text-anchor=\"middle\">\n";
    for (int i = 0; i <= x_ticks; ++i) {
        const double x = f.x_min + (f.x_max - f.x_min) * i / x_ticks;
        out << "<text x=\"" << fmt(f.px(x)) << "\" y=\"" << fmt(f.py(f.y_min) + 18.0) << "\">"
            << fmt(x) << "</text>\n";
    }
    for (int i = 0; i <= y_ticks; ++i) {
        const double y = f.y_min + (f.y_max - f.y_min) * i / y_ticks;
        out << "<text x=\"" << fmt(f.px(f.x_min) - 26.0) << "\" y=\"" << fmt(f.py(y) + 4.0)
            << "\">" << fmt(y) << "</text>\n";
    }
    out << "<text x=\"" << fmt((kMarginLeft + kWidth - kMarginRight) / 2.0) << "\" y=\""
        << fmt(kHeight - 14.0) << "\">" << x_label << "</text>\n";
    out << "<text transform=\"translate(16," << fmt(kHeight / 2.0)
        << ") rotate(-90)\">" << y_label << "</text>\n";
    out << "</g>\n";
}

// Right-continuous step path: horizontal run to each event time, then the
// vertical drop at it.
std::vector<std::pair<double, double>> step_points(const PlotSeries& s, double x_max) {
    std::vector<std::pair<double, double>> pts;
    double y = 1.0;
    pts.emplace_back(0.0, y);
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        pts.emplace_back(s.times[i], y);
        y = s.values[i];
        pts.emplace_back(s.times[i], y);
    }
    if (pts.back().first < x_max) pts.emplace_back(x_max, y);
    return pts;
}

std::vector<std::pair<double, double>> line_points(const PlotSeries& s) {
    std::vector<std::pair<double, double>> pts;
    for (std::size_t i = 0; i < s.times.size(); ++i) {
        pts.emplace_back(s.times[i], s.values[i]);
    }
    return pts;
}

void emit_polyline(std::ostringstream& out, const Frame& f,
                   const std::vector<std::pair<double, double>>& pts, const char* color,
                   double width, double opacity = 1.0) {
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"" << width
        << "\"";
    if (opacity < 1.0) out << " stroke-opacity=\"" << opacity << "\"";
    out << " points=\"";
    for (const auto& [x, y] : pts) out << fmt(f.px(x)) << "," << fmt(f.py(y)) << " ";
    out << "\"/>\n";
}

}  // namespace

std::string render_step_svg(const PlotSpec& spec) {
    if (spec.series.empty()) throw PlotError("render_step_svg: no series");

    double x_max = spec.x_max;
    if (x_max <= 0.0) {
        for (const auto& s : spec.series) {
            for (double t : s.times) x_max = std::max(x_max, t);
            for (double t : s.censor_marks) x_max = std::max(x_max, t);
        }
        if (x_max <= 0.0) x_max = 1.0;
    }
    if (!std::isfinite(x_max)) throw PlotError("render_step_svg: non-finite axis range");

    Frame f{0.0, x_max, 0.0, 1.0};
    std::ostringstream out;
    open_svg(out);
    draw_axes(out, f, spec.x_label, spec.y_label, 6, 5);

    // Bands first so every polyline sits on top of its shading.
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        if (s.band_lower.empty()) continue;
        const char* color = kPalette[si % std::size(kPalette)];
        PlotSeries lower = s, upper = s;
        lower.values = s.band_lower;
        upper.values = s.band_upper;
        auto lo = spec.step_interpolation ? step_points(lower, x_max) : line_points(lower);
        auto hi = spec.step_interpolation ? step_points(upper, x_max) : line_points(upper);
        out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.15\" stroke=\"none\""
            << " points=\"";
        for (const auto& [x, y] : hi) out << fmt(f.px(x)) << "," << fmt(f.py(y)) << " ";
        for (auto it = lo.rbegin(); it != lo.rend(); ++it) {
            out << fmt(f.px(it->first)) << "," << fmt(f.py(it->second)) << " ";
        }
        out << "\"/>\n";
    }

    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const auto& s = spec.series[si];
        const char* color = kPalette[si % std::size(kPalette)];
        for (const auto& extra : s.spaghetti) {
            PlotSeries ghost;
            ghost.times = s.times;
            ghost.values = extra;
            emit_polyline(out, f, line_points(ghost), color, 0.6, 0.12);
        }
        auto pts = spec.step_interpolation ? step_points(s, x_max) : line_points(s);
        emit_polyline(out, f, pts, color, 2.0);
        // Censor ticks ride on the curve.
        for (double t : s.censor_marks) {
            double y = 1.0;
            for (std::size_t i = 0; i < s.times.size() && s.times[i] <= t; ++i) {
                y = s.values[i];
            }
            out << "<line class=\"censor\" stroke=\"" << color << "\" stroke-width=\"1\" x1=\""
                << fmt(f.px(t)) << "\" y1=\"" << fmt(f.py(y) - 5.0) << "\" x2=\"" << fmt(f.px(t))
                << "\" y2=\"" << fmt(f.py(y) + 5.0) << "\"/>\n";
        }
    }

    out << "<g class=\"legend\" font-size=\"13\">\n";
    double ly = kMarginTop + 8.0;
    for (std::size_t si = 0; si < spec.series.size(); ++si) {
        const char* color = kPalette[si % std::size(kPalette)];
        out << "<line stroke=\"" << color << "\" stroke-width=\"3\" x1=\""
            << fmt(kWidth - 230.0) << "\" y1=\"" << fmt(ly) << "\" x2=\"" << fmt(kWidth - 205.0)
            << "\" y2=\"" << fmt(ly) << "\"/>\n";
        out << "<text x=\"" << fmt(kWidth - 198.0) << "\" y=\"" << fmt(ly + 4.0) << "\">"
            << spec.series[si].label << "</text>\n";
        ly += 18.0;
    }
    if (spec.annotation) {
        out << "<text x=\"" << fmt(kWidth - 230.0) << "\" y=\"" << fmt(ly + 4.0) << "\">"
            << *spec.annotation << "</text>\n";
    }
    out << "</g>\n";
    if (!spec.title.empty()) {
        out << "<text x=\"" << fmt(kWidth / 2.0)
            << "\" y=\"24\" font-size=\"16\" text-anchor=\"middle\">" << spec.title
            << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_duration_strips(const Cohort& cohort) {
    if (cohort.records.empty()) throw PlotError("render_duration_strips: empty cohort");

    std::vector<const ProjectRecord*> ordered;
    ordered.reserve(cohort.records.size());
    for (const auto& r : cohort.records) ordered.push_back(&r);
    std::sort(ordered.begin(), ordered.end(), [](const ProjectRecord* a, const ProjectRecord* b) {
        if (a->duration_days != b->duration_days) return a->duration_days < b->duration_days;
        return a->project_id < b->project_id;
    });

    const double x_max = static_cast<double>(cohort.window.total_months);
    Frame f{0.0, std::max(x_max, 1.0), 0.0, static_cast<double>(ordered.size())};
    std::ostringstream out;
    open_svg(out);
    draw_axes(out, f, "study month", "projects (ordered by duration)", 6, 4);

    const auto start = cohort.window.start_instant();
    const double month_days = cohort.window.month_length_days;
    out << "<g class=\"strips\" stroke=\"black\" stroke-width=\"1\">\n";
    for (std::size_t i = 0; i < ordered.size(); ++i) {
        const auto* r = ordered[i];
        const double from =
            static_cast<double>(whole_days_between(start, r->first_observed)) / month_days;
        const double to =
            static_cast<double>(whole_days_between(start, r->last_observed)) / month_days;
        const double y = static_cast<double>(i) + 0.5;
        out << "<line x1=\"" << fmt(f.px(from)) << "\" y1=\"" << fmt(f.py(y)) << "\" x2=\""
            << fmt(f.px(std::max(to, from + 0.1))) << "\" y2=\"" << fmt(f.py(y)) << "\"/>\n";
    }
    out << "</g>\n</svg>\n";
    return out.str();
}

std::string render_forest_svg(const std::vector<HazardRow>& rows) {
    if (rows.empty()) throw PlotError("render_forest_svg: empty table");

    double hr_min = 1.0, hr_max = 1.0;
    for (const auto& r : rows) {
        if (r.is_reference) continue;
        hr_min = std::min(hr_min, r.ci_low);
        hr_max = std::max(hr_max, r.ci_high);
    }
    const double log_min = std::log(hr_min) - 0.3;
    const double log_max = std::log(hr_max) + 0.3;

    Frame f{log_min, log_max, 0.0, static_cast<double>(rows.size())};
    std::ostringstream out;
    open_svg(out);
    draw_axes(out, f, "hazard ratio (log scale)", "", 4, 1);

    out << "<line stroke=\"#999\" stroke-dasharray=\"4 3\" x1=\"" << fmt(f.px(0.0))
        << "\" y1=\"" << fmt(f.py(f.y_min)) << "\" x2=\"" << fmt(f.px(0.0)) << "\" y2=\""
        << fmt(f.py(f.y_max)) << "\"/>\n";

    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i];
        const double y = static_cast<double>(rows.size() - i) - 0.5;
        out << "<text x=\"8\" y=\"" << fmt(f.py(y) + 4.0) << "\" font-size=\"12\">"
            << r.attribute << "=" << r.level << " (n=" << r.count << ")</text>\n";
        if (r.is_reference) {
            out << "<text x=\"" << fmt(f.px(0.0) - 8.0) << "\" y=\"" << fmt(f.py(y) + 4.0)
                << "\" font-size=\"12\">1.00</text>\n";
            continue;
        }
        out << "<line class=\"whisker\" stroke=\"#1f77b4\" stroke-width=\"2\" x1=\""
            << fmt(f.px(std::log(r.ci_low))) << "\" y1=\"" << fmt(f.py(y)) << "\" x2=\""
            << fmt(f.px(std::log(r.ci_high))) << "\" y2=\"" << fmt(f.py(y)) << "\"/>\n";
        out << "<circle cx=\"" << fmt(f.px(std::log(r.hazard_ratio))) << "\" cy=\""
            << fmt(f.py(y)) << "\" r=\"4\" fill=\"#1f77b4\"/>\n";
    }
    out << "</svg>\n";
    return out.str();
}

}  // namespace survmine

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "survmine/cohort.hpp"
#include "survmine/coxph.hpp"

namespace survmine {

enum class PlotKind : std::uint8_t { km_steps, posterior_bands, duration_strips, forest };

// One plotted series: a step or smooth curve with an optional shaded band
// and optional censor tick marks.
struct PlotSeries {
    std::string label;
    std::vector<double> times;
    std::vector<double> values;            // survival at each time, post-drop
    std::vector<double> band_lower;        // empty when the series has no band
    std::vector<double> band_upper;
    std::vector<double> censor_marks;      // times of censoring ticks
    std::vector<std::vector<double>> spaghetti;  // faint per-draw curves
};

struct PlotSpec {
    PlotKind kind = PlotKind::km_steps;
    std::string title;
    std::string x_label = "months";
    std::string y_label = "survival probability";
    double x_max = 0.0;  // 0 = derive from the data
    std::vector<PlotSeries> series;
    std::optional<std::string> annotation;  // e.g. a log-rank p-value
    bool step_interpolation = true;         // right-continuous steps vs. straight lines
};

class PlotError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Step/band chart: one polygon per band (drawn behind its polyline), one
// polyline per series, censor marks as short vertical ticks, legend with
// the optional annotation.
std::string render_step_svg(const PlotSpec& spec);

// One horizontal segment per project, ordered by duration, x in study months.
std::string render_duration_strips(const Cohort& cohort);

// Hazard ratios with Wald whiskers on a log axis, reference line at 1.
std::string render_forest_svg(const std::vector<HazardRow>& rows);

}  // namespace survmine

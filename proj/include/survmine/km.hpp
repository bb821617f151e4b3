#pragma once

#include <cstddef>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace survmine {

// Product-limit estimate: one entry per distinct death time, plus the
// censoring times kept separately so plots can draw their tick marks.
struct SurvivalCurve {
    std::vector<double> event_times;  // ascending distinct death times
    std::vector<double> survival;     // S(t) just after each death time
    std::vector<std::int64_t> at_risk;  // risk-set size just before the deaths
    std::vector<std::int64_t> deaths;
    std::vector<double> censor_times;  // sorted, with multiplicity
    std::vector<double> variance;      // Greenwood variance of S at each death time
    std::string label;

    std::size_t n_subjects = 0;
    double max_time = 0.0;  // largest observed duration, censored or not
};

struct ConfidenceBand {
    std::vector<double> lower;  // one per event time
    std::vector<double> upper;
};

struct LogRankResult {
    double statistic = 0.0;
    std::size_t degrees_of_freedom = 0;
    double p_value = 1.0;
};

struct GroupData {
    std::vector<double> durations;
    std::vector<bool> events;  // true = death observed
    std::string label;
};

// Kaplan-Meier fit. Ties at one time are processed together; censored
// observations tied with deaths leave the risk set after those deaths.
SurvivalCurve fit_km(std::span<const double> durations, std::span<const bool> event_flags,
                     std::string label = {});

// Pointwise confidence band via Greenwood's variance on the log(-log S)
// scale, so the band stays inside [0,1]. `level` is two-sided, e.g. 0.95.
ConfidenceBand greenwood_band(const SurvivalCurve& curve, double level);

// Right-continuous step evaluation; 1 before the first death time.
double survival_at(const SurvivalCurve& curve, double t);

// Observed-minus-expected chi-square over pooled event times, hypergeometric
// variance with tie correction; df = groups - 1.
LogRankResult log_rank_test(const std::vector<GroupData>& groups);

// One row per event time: time, survival, lower, upper, at_risk, deaths.
void write_curve_csv(std::ostream& out, const SurvivalCurve& curve,
                     const ConfidenceBand& band);

// Censor marks as a second table: time, count.
void write_censor_csv(std::ostream& out, const SurvivalCurve& curve);

}  // namespace survmine

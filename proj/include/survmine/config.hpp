#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

#include "survmine/cohort.hpp"
#include "survmine/coxph.hpp"

namespace survmine {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Every field carries the default that reproduces the study settings, so an
// empty config file is a valid one (apart from the input paths).
struct RunConfig {
    struct Window {
        std::string end_date = "2018-01-01";
        int total_months = 165;
        int month_length_days = 28;
    } window;

    struct Thresholds {
        std::int64_t authors = 20;
        double rev_per_day = 1.0;
    } thresholds;

    struct Bayes {
        int chains = 4;
        int warmup = 1000;
        int draws = 2000;
        std::uint64_t seed = 20180101;
        double prior_sd = 10.0;
    } bayes;

    struct Cox {
        std::string ties = "efron";
        double tol = 1e-8;
        int max_iter = 50;
    } cox;

    struct Io {
        std::string revisions;
        std::string releases;
        std::string origins;
        std::string out_dir = "out";
    } io;

    StudyWindow study_window() const;
    AttributeThresholds attribute_thresholds() const;
    TieMethod tie_method() const;

    // Throws ConfigError when an invariant is violated (non-positive
    // thresholds, negative months, empty input paths).
    void validate() const;
};

// `key = value` lines with '#' comments; unknown keys are rejected.
RunConfig parse_config_text(const std::string& text);
RunConfig load_config_file(const std::string& path);

// Emits every effective key, defaults included, in a fixed order.
// serialize(parse(text)) is a fixed point.
std::string serialize_config(const RunConfig& config);

}  // namespace survmine

#pragma once

#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "survmine/csv.hpp"
#include "survmine/dates.hpp"

namespace survmine {

// GitHub and GitLab repositories are folded into one host class; every
// result in this pipeline distinguishes exactly three hosting services.
enum class Host : std::uint8_t { github = 0, pypi = 1, debian = 2 };

const char* host_name(Host h);
std::optional<Host> parse_host(std::string_view token);

struct RevisionEvent {
    std::string project_id;
    UtcInstant timestamp{};
    std::string author_id;
    Host host = Host::github;
};

// The observation frame: `end` is exclusive, `start` is derived by counting
// total_months fixed-length months backwards from it.
struct StudyWindow {
    UtcDate end{};
    int total_months = 0;
    int month_length_days = 28;
    UtcDate start{};

    UtcInstant start_instant() const { return UtcInstant{start.time_since_epoch()}; }
    UtcInstant end_instant() const { return UtcInstant{end.time_since_epoch()}; }
    bool contains(UtcInstant t) const { return t >= start_instant() && t < end_instant(); }
    // Month index m covers day offsets [L*m, L*(m+1)) from start.
    std::int64_t month_index(UtcInstant t) const;
};

StudyWindow build_study_window(UtcDate end_date, int total_months, int month_length_days = 28);

struct ProjectRecord {
    std::string project_id;
    UtcInstant first_observed{};  // first revision inside the window
    UtcInstant last_observed{};   // last revision inside the window
    UtcInstant last_in_scope{};   // last revision anywhere in the dataset
    std::int64_t duration_days = 0;
    double duration_months = 0.0;
    bool censored = false;  // death observed iff last_in_scope == last_observed
    std::int64_t revision_count = 0;
    std::int64_t unique_authors = 0;
    Host host = Host::github;
    bool has_major_release = false;
    bool multi_repo = false;
    double revision_frequency = 0.0;  // revisions per day over the observed lifetime
    bool high_rev_frequency = false;  // strictly more than rev_per_day_threshold
    bool high_author_count = false;   // strictly more than author_threshold
};

struct AttributeThresholds {
    std::int64_t authors = 20;
    double rev_per_day = 1.0;
};

struct CohortSummary {
    std::size_t size = 0;
    std::size_t censored_count = 0;
    std::optional<double> censored_fraction;  // null for an empty cohort
    std::optional<double> mean_duration_months;
    std::optional<double> median_duration_months;
    std::size_t with_major_release = 0;
    std::size_t multi_repo = 0;
    std::size_t high_author_count = 0;
    std::size_t high_rev_frequency = 0;
    std::size_t host_counts[3] = {0, 0, 0};
};

struct Cohort {
    std::vector<ProjectRecord> records;  // ordered by project_id
    StudyWindow window;
    CohortSummary summary;
};

// Raised when event lists violate ordering or identity preconditions.
class CohortError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct ParsedRevisions {
    std::vector<RevisionEvent> events;
    std::vector<RowError> row_errors;
};

// Column names used to locate the required fields in the header row.
struct RevisionSchema {
    std::string project_id = "project_id";
    std::string timestamp = "timestamp";
    std::string author_id = "author_id";
    std::string host = "host";
    char delimiter = ',';
};

// One event per valid row, in input order. Malformed timestamps are
// row-level errors; a missing column or an unknown host token is fatal.
ParsedRevisions parse_revision_log(std::istream& in, const RevisionSchema& schema = {});

struct ParsedReleases {
    // project_id -> release timestamps, in input order
    std::map<std::string, std::vector<UtcInstant>> by_project;
    std::vector<RowError> row_errors;
};

ParsedReleases parse_release_log(std::istream& in, char delimiter = ',');

// project_id -> count of distinct origin hosts
std::map<std::string, int> parse_origin_log(std::istream& in, char delimiter = ',');

// Returns nullopt when the project has no revision inside the window.
// `events` must be sorted by timestamp and belong to one project.
std::optional<ProjectRecord> derive_project_record(
    const std::vector<RevisionEvent>& events, const std::vector<UtcInstant>& releases,
    int origin_count, const StudyWindow& window, const AttributeThresholds& thresholds = {});

Cohort build_cohort(std::vector<ProjectRecord> records, const StudyWindow& window);

// Full pipeline: group revisions by project, derive records, assemble.
Cohort build_cohort_from_inputs(const ParsedRevisions& revisions, const ParsedReleases& releases,
                                const std::map<std::string, int>& origins,
                                const StudyWindow& window,
                                const AttributeThresholds& thresholds = {});

// One row per record, columns mirroring the attribute table:
// project_id, duration_months, censored, host, major_releases,
// high_rev_frequency, multi_repo, high_author_count.
void write_cohort_csv(std::ostream& out, const Cohort& cohort);

}  // namespace survmine

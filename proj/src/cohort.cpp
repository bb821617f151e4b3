#include "survmine/cohort.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <set>
#include <unordered_set>

namespace survmine {

const char* host_name(Host h) {
    switch (h) {
        case Host::github: return "github";
        case Host::pypi: return "pypi";
        case Host::debian: return "debian";
    }
    return "?";
}

std::optional<Host> parse_host(std::string_view token) {
    if (token == "github" || token == "gitlab") return Host::github;
    if (token == "pypi") return Host::pypi;
    if (token == "debian") return Host::debian;
    return std::nullopt;
}

std::int64_t StudyWindow::month_index(UtcInstant t) const {
    const std::int64_t day = whole_days_between(start_instant(), t);
    std::int64_t m = day / month_length_days;
    if (day < 0 && day % month_length_days != 0) --m;
    return m;
}

StudyWindow build_study_window(UtcDate end_date, int total_months, int month_length_days) {
    if (total_months < 0) throw CohortError("total_months must be >= 0");
    if (month_length_days < 1) throw CohortError("month_length_days must be >= 1");
    StudyWindow w;
    w.end = end_date;
    w.total_months = total_months;
    w.month_length_days = month_length_days;
    w.start = end_date - std::chrono::days{static_cast<std::int64_t>(total_months) *
                                           month_length_days};
    return w;
}

ParsedRevisions parse_revision_log(std::istream& in, const RevisionSchema& schema) {
    ParsedRevisions out;
    load_delimited(in, schema.delimiter,
                   {schema.project_id, schema.timestamp, schema.author_id, schema.host},
                   out.row_errors,
                   [&](std::size_t line, const std::vector<std::string>& f,
                       const std::vector<std::size_t>& idx) {
                       auto ts = parse_iso8601(f[idx[1]]);
                       if (!ts) {
                           out.row_errors.push_back(
                               {line, "malformed timestamp '" + f[idx[1]] + "'"});
                           return;
                       }
                       auto host = parse_host(f[idx[3]]);
                       if (!host) {
                           throw CohortError("line " + std::to_string(line) +
                                             ": unknown host token '" + f[idx[3]] + "'");
                       }
                       out.events.push_back({f[idx[0]], *ts, f[idx[2]], *host});
                   });
    return out;
}

ParsedReleases parse_release_log(std::istream& in, char delimiter) {
    ParsedReleases out;
    load_delimited(in, delimiter, {"project_id", "timestamp"}, out.row_errors,
                   [&](std::size_t line, const std::vector<std::string>& f,
                       const std::vector<std::size_t>& idx) {
                       auto ts = parse_iso8601(f[idx[1]]);
                       if (!ts) {
                           out.row_errors.push_back(
                               {line, "malformed timestamp '" + f[idx[1]] + "'"});
                           return;
                       }
                       out.by_project[f[idx[0]]].push_back(*ts);
                   });
    return out;
}

std::map<std::string, int> parse_origin_log(std::istream& in, char delimiter) {
    std::map<std::string, std::set<Host>> hosts;
    std::vector<RowError> row_errors;
    load_delimited(in, delimiter, {"project_id", "host"}, row_errors,
                   [&](std::size_t line, const std::vector<std::string>& f,
                       const std::vector<std::size_t>& idx) {
                       auto host = parse_host(f[idx[1]]);
                       if (!host) {
                           throw CohortError("line " + std::to_string(line) +
                                             ": unknown host token '" + f[idx[1]] + "'");
                       }
                       hosts[f[idx[0]]].insert(*host);
                   });
    std::map<std::string, int> out;
    for (const auto& [id, hs] : hosts) out[id] = static_cast<int>(hs.size());
    return out;
}

std::optional<ProjectRecord> derive_project_record(const std::vector<RevisionEvent>& events,
                                                   const std::vector<UtcInstant>& releases,
                                                   int origin_count, const StudyWindow& window,
                                                   const AttributeThresholds& thresholds) {
    if (events.empty()) throw CohortError("derive_project_record: empty event list");
    for (std::size_t i = 1; i < events.size(); ++i) {
        if (events[i].timestamp < events[i - 1].timestamp) {
            throw CohortError("derive_project_record: events for project '" +
                              events[0].project_id + "' are not sorted by timestamp");
        }
    }

    ProjectRecord rec;
    rec.project_id = events.front().project_id;
    rec.last_in_scope = events.back().timestamp;

    std::unordered_set<std::string> authors;
    std::size_t host_votes[3] = {0, 0, 0};
    bool any_in_window = false;
    for (const auto& ev : events) {
        if (!window.contains(ev.timestamp)) continue;
        if (!any_in_window) {
            rec.first_observed = ev.timestamp;
            any_in_window = true;
        }
        rec.last_observed = ev.timestamp;
        ++rec.revision_count;
        authors.insert(ev.author_id);
        ++host_votes[static_cast<int>(ev.host)];
    }
    if (!any_in_window) return std::nullopt;

    rec.unique_authors = static_cast<std::int64_t>(authors.size());
    // Project host = modal host of in-window revisions, ties to the lower enum.
    int best = 0;
    for (int h = 1; h < 3; ++h) {
        if (host_votes[h] > host_votes[best]) best = h;
    }
    rec.host = static_cast<Host>(best);

    rec.duration_days = whole_days_between(rec.first_observed, rec.last_observed);
    rec.duration_months =
        static_cast<double>(rec.duration_days) / window.month_length_days;
    rec.censored = rec.last_in_scope != rec.last_observed;
    rec.revision_frequency = static_cast<double>(rec.revision_count) /
                             static_cast<double>(std::max<std::int64_t>(rec.duration_days, 1));
    rec.high_rev_frequency = rec.revision_frequency > thresholds.rev_per_day;
    rec.high_author_count = rec.unique_authors > thresholds.authors;
    rec.has_major_release =
        std::any_of(releases.begin(), releases.end(),
                    [&](UtcInstant t) { return t < window.end_instant(); });
    rec.multi_repo = origin_count > 1;
    return rec;
}

Cohort build_cohort(std::vector<ProjectRecord> records, const StudyWindow& window) {
    std::sort(records.begin(), records.end(),
              [](const ProjectRecord& a, const ProjectRecord& b) {
                  return a.project_id < b.project_id;
              });
    for (std::size_t i = 1; i < records.size(); ++i) {
        if (records[i].project_id == records[i - 1].project_id) {
            throw CohortError("duplicate project_id '" + records[i].project_id + "'");
        }
    }
    Cohort cohort;
    cohort.window = window;
    cohort.records = std::move(records);

    CohortSummary& s = cohort.summary;
    s.size = cohort.records.size();
    if (s.size > 0) {
        double total_months = 0.0;
        std::vector<double> durations;
        durations.reserve(s.size);
        for (const auto& r : cohort.records) {
            if (r.censored) ++s.censored_count;
            if (r.has_major_release) ++s.with_major_release;
            if (r.multi_repo) ++s.multi_repo;
            if (r.high_author_count) ++s.high_author_count;
            if (r.high_rev_frequency) ++s.high_rev_frequency;
            ++s.host_counts[static_cast<int>(r.host)];
            total_months += r.duration_months;
            durations.push_back(r.duration_months);
        }
        s.censored_fraction = static_cast<double>(s.censored_count) / s.size;
        s.mean_duration_months = total_months / s.size;
        std::sort(durations.begin(), durations.end());
        const std::size_t mid = s.size / 2;
        s.median_duration_months = (s.size % 2 == 1)
                                       ? durations[mid]
                                       : 0.5 * (durations[mid - 1] + durations[mid]);
    }
    return cohort;
}

Cohort build_cohort_from_inputs(const ParsedRevisions& revisions, const ParsedReleases& releases,
                                const std::map<std::string, int>& origins,
                                const StudyWindow& window,
                                const AttributeThresholds& thresholds) {
    std::map<std::string, std::vector<RevisionEvent>> by_project;
    for (const auto& ev : revisions.events) by_project[ev.project_id].push_back(ev);

    static const std::vector<UtcInstant> no_releases;
    std::vector<ProjectRecord> records;
    for (auto& [id, events] : by_project) {
        std::stable_sort(events.begin(), events.end(),
                         [](const RevisionEvent& a, const RevisionEvent& b) {
                             return a.timestamp < b.timestamp;
                         });
        auto rel_it = releases.by_project.find(id);
        const auto& rel = rel_it == releases.by_project.end() ? no_releases : rel_it->second;
        auto org_it = origins.find(id);
        const int origin_count = org_it == origins.end() ? 1 : org_it->second;
        auto rec = derive_project_record(events, rel, origin_count, window, thresholds);
        if (rec) records.push_back(std::move(*rec));
    }
    return build_cohort(std::move(records), window);
}

void write_cohort_csv(std::ostream& out, const Cohort& cohort) {
    out << "project_id,duration_months,censored,host,major_releases,"
           "high_rev_frequency,multi_repo,high_author_count\n";
    char buf[64];
    for (const auto& r : cohort.records) {
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, r.duration_months);
        out << r.project_id << ',' << std::string_view(buf, ptr - buf) << ','
            << (r.censored ? "true" : "false") << ',' << host_name(r.host) << ','
            << (r.has_major_release ? "true" : "false") << ','
            << (r.high_rev_frequency ? "true" : "false") << ','
            << (r.multi_repo ? "true" : "false") << ','
            << (r.high_author_count ? "true" : "false") << '\n';
    }
}

}  // namespace survmine

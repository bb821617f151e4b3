// Deterministic synthetic revision-log bundle for tests and demos.
//
// Produces revisions.csv / releases.csv / origins.csv with project lifetimes
// whose hazards depend on the study attributes, so every downstream stage
// has real contrasts to estimate. Same seed, same bytes.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "survmine/dates.hpp"

namespace {

using survmine::UtcInstant;

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed) {}
    std::uint64_t next() { return state = mix64(state); }
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
        return lo + static_cast<std::int64_t>(uniform() * static_cast<double>(hi - lo + 1));
    }
    bool bernoulli(double p) { return uniform() < p; }
    double exponential(double rate) { return -std::log(1.0 - uniform()) / rate; }
};

struct Project {
    std::string id;
    std::string host;
    std::int64_t first_day = 0;   // day offset from window start
    std::int64_t last_day = 0;    // last revision day offset (may exceed the window)
    std::int64_t revisions = 0;
    int authors = 1;
    std::vector<std::int64_t> release_days;
    std::vector<std::string> origin_hosts;
};

constexpr std::int64_t kWindowDays = 165 * 28;  // matches the default config

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"generate a synthetic revision-log bundle"};
    std::string out_dir = ".";
    std::uint64_t seed = 42;
    int n_projects = 150;
    app.add_option("--out", out_dir, "output directory");
    app.add_option("--seed", seed, "generator seed");
    app.add_option("--projects", n_projects, "number of in-window projects");
    CLI11_PARSE(app, argc, argv);

    const auto window_start = *survmine::parse_iso_date("2005-05-09");
    Rng rng(mix64(seed) ^ 0xabcdef12345ULL);

    std::vector<Project> projects;
    const char* hosts[] = {"github", "pypi", "debian"};

    for (int i = 0; i < n_projects; ++i) {
        Project p;
        char buf[32];
        std::snprintf(buf, sizeof buf, "proj-%04d", i);
        p.id = buf;

        const double hr = rng.uniform();
        p.host = hr < 0.55 ? "github" : (hr < 0.82 ? "pypi" : "debian");
        const bool has_release = rng.bernoulli(0.45);
        const bool multi = rng.bernoulli(0.30);
        const bool big_team = rng.bernoulli(0.35);

        // Monthly abandonment hazard grows when the healthy attributes are
        // absent, mirroring the effect directions under study.
        double rate = 0.012;
        if (!has_release) rate *= 2.6;
        if (!multi) rate *= 2.2;
        if (!big_team) rate *= 2.8;
        if (p.host == std::string("pypi")) rate *= 1.4;
        if (p.host == std::string("debian")) rate *= 1.9;

        p.first_day = rng.uniform_int(0, kWindowDays - 60);
        const double lifetime_months = rng.exponential(rate);
        std::int64_t lifetime_days =
            static_cast<std::int64_t>(std::ceil(lifetime_months * 28.0));
        lifetime_days = std::max<std::int64_t>(lifetime_days, 0);
        p.last_day = p.first_day + lifetime_days;
        if (p.last_day >= kWindowDays) {
            // Alive past the window: keep committing into 2018-2019.
            p.last_day = kWindowDays + rng.uniform_int(30, 500);
        }

        const std::int64_t observed_days =
            std::min(p.last_day, kWindowDays - 1) - p.first_day;
        const bool short_lived = observed_days <= 1100;
        const bool high_freq = short_lived && rng.bernoulli(0.45);
        const double freq = high_freq ? rng.uniform(1.1, 2.6) : rng.uniform(0.03, 0.85);
        p.revisions = std::max<std::int64_t>(
            1, static_cast<std::int64_t>(freq * static_cast<double>(
                                             std::max<std::int64_t>(observed_days, 1))));
        p.revisions = std::min<std::int64_t>(p.revisions, 2800);

        p.authors = big_team ? static_cast<int>(rng.uniform_int(21, 55))
                             : static_cast<int>(rng.uniform_int(1, 18));
        p.authors = static_cast<int>(
            std::min<std::int64_t>(p.authors, std::max<std::int64_t>(p.revisions, 1)));

        if (has_release) {
            const int n_rel = static_cast<int>(rng.uniform_int(1, 4));
            for (int r = 0; r < n_rel; ++r) {
                p.release_days.push_back(
                    p.first_day + rng.uniform_int(0, std::max<std::int64_t>(observed_days, 1)));
            }
        }
        p.origin_hosts.push_back(p.host);
        if (multi) {
            for (const char* h : hosts) {
                if (h != p.host && rng.bernoulli(0.7)) p.origin_hosts.push_back(h);
            }
            if (p.origin_hosts.size() == 1) {
                p.origin_hosts.push_back(p.host == std::string("github") ? "pypi" : "github");
            }
        }
        projects.push_back(std::move(p));
    }

    // Seasoning: projects that exercise the exclusion and clamping paths.
    {
        Project dead_early;
        dead_early.id = "pre-window-only";
        dead_early.host = "github";
        dead_early.first_day = -900;
        dead_early.last_day = -400;
        dead_early.revisions = 25;
        dead_early.authors = 2;
        dead_early.origin_hosts = {"github"};
        projects.push_back(dead_early);

        Project straddler;
        straddler.id = "straddles-window-start";
        straddler.host = "debian";
        straddler.first_day = -500;
        straddler.last_day = 700;
        straddler.revisions = 180;
        straddler.authors = 5;
        straddler.origin_hosts = {"debian"};
        projects.push_back(straddler);

        Project one_shot;
        one_shot.id = "single-revision";
        one_shot.host = "pypi";
        one_shot.first_day = 2000;
        one_shot.last_day = 2000;
        one_shot.revisions = 1;
        one_shot.authors = 1;
        one_shot.origin_hosts = {"pypi"};
        projects.push_back(one_shot);
    }

    std::filesystem::create_directories(out_dir);
    std::ofstream revisions(std::filesystem::path(out_dir) / "revisions.csv");
    std::ofstream releases(std::filesystem::path(out_dir) / "releases.csv");
    std::ofstream origins(std::filesystem::path(out_dir) / "origins.csv");
    revisions << "project_id,timestamp,author_id,host\n";
    releases << "project_id,timestamp\n";
    origins << "project_id,host\n";

    auto stamp = [&](std::int64_t day, std::int64_t second) {
        return survmine::format_iso8601(
            UtcInstant{window_start.time_since_epoch() + std::chrono::days{day} +
                       std::chrono::seconds{second}});
    };

    for (const auto& p : projects) {
        const std::int64_t span = std::max<std::int64_t>(p.last_day - p.first_day, 0);
        std::vector<std::int64_t> offsets;  // seconds from first_day midnight
        offsets.push_back(0);
        for (std::int64_t k = 1; k + 1 < p.revisions; ++k) {
            offsets.push_back(rng.uniform_int(0, span * 86400));
        }
        if (p.revisions > 1) offsets.push_back(span * 86400);
        std::sort(offsets.begin(), offsets.end());
        for (std::size_t k = 0; k < offsets.size(); ++k) {
            const std::int64_t day = p.first_day + offsets[k] / 86400;
            const std::int64_t sec = offsets[k] % 86400;
            const int author = static_cast<int>(
                rng.uniform_int(0, std::max(p.authors - 1, 0)));
            // Every author shows up at least once among the first revisions.
            const int forced = static_cast<int>(k) < p.authors ? static_cast<int>(k)
                                                               : author;
            revisions << p.id << ',' << stamp(day, sec) << ',' << p.id << "-dev"
                      << forced << ',' << p.host << '\n';
        }
        for (std::int64_t day : p.release_days) {
            releases << p.id << ',' << stamp(day, 43200) << '\n';
        }
        for (const auto& h : p.origin_hosts) {
            origins << p.id << ',' << h << '\n';
        }
    }

    std::cout << "wrote " << projects.size() << " projects under " << out_dir << "\n";
    return 0;
}

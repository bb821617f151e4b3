#include "survmine/report.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <sstream>

#include "survmine/svg.hpp"

namespace survmine {

namespace {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed ^ (salt * 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open input file: " + path);
    return in;
}

void report_row_errors(std::ostream* diagnostics, const std::string& file,
                       const std::vector<RowError>& errors) {
    if (!diagnostics) return;
    for (const auto& e : errors) {
        *diagnostics << file << ":" << e.line << ": " << e.message << "\n";
    }
}

// Groups the cohort by an attribute's observed levels, reference level first.
struct LevelGroup {
    std::string level;
    std::vector<double> durations;
    std::vector<bool> events;
};

std::vector<LevelGroup> split_by_attribute(const Cohort& cohort, Attribute attribute) {
    std::vector<LevelGroup> groups;
    for (const auto& level : attribute_levels(attribute)) {
        LevelGroup g;
        g.level = level;
        groups.push_back(std::move(g));
    }
    for (const auto& r : cohort.records) {
        const std::string level = attribute_level(r, attribute);
        for (auto& g : groups) {
            if (g.level == level) {
                g.durations.push_back(r.duration_months);
                g.events.push_back(!r.censored);
                break;
            }
        }
    }
    std::erase_if(groups, [](const LevelGroup& g) { return g.durations.empty(); });
    return groups;
}

nlohmann::json logrank_json(const LogRankResult& r) {
    return {{"statistic", r.statistic},
            {"df", r.degrees_of_freedom},
            {"p_value", r.p_value}};
}

std::string attr_filename(const char* prefix, Attribute a, const char* suffix) {
    return std::string(prefix) + attribute_name(a) + suffix;
}

}  // namespace

void atomic_write_file(const std::filesystem::path& path, const std::string& content) {
    std::filesystem::create_directories(path.parent_path());
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << content;
        out.flush();
        if (!out) {
            std::filesystem::remove(tmp);
            throw IoError("short write to " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

Cohort load_cohort(const RunConfig& config, std::ostream* diagnostics) {
    auto revisions_in = open_input(config.io.revisions);
    auto releases_in = open_input(config.io.releases);
    auto origins_in = open_input(config.io.origins);

    const auto revisions = parse_revision_log(revisions_in);
    report_row_errors(diagnostics, config.io.revisions, revisions.row_errors);
    const auto releases = parse_release_log(releases_in);
    report_row_errors(diagnostics, config.io.releases, releases.row_errors);
    const auto origins = parse_origin_log(origins_in);

    return build_cohort_from_inputs(revisions, releases, origins, config.study_window(),
                                    config.attribute_thresholds());
}

KmStage run_km_stage(const Cohort& cohort) {
    KmStage stage;
    for (Attribute attribute : all_attributes()) {
        auto groups = split_by_attribute(cohort, attribute);
        if (groups.empty()) continue;
        KmAttributeResult result;
        result.attribute = attribute;
        for (const auto& g : groups) {
            auto curve = fit_km(g.durations, g.events, g.level);
            result.bands.push_back(greenwood_band(curve, 0.95));
            result.curves.push_back(std::move(curve));
        }
        if (groups.size() >= 2) {
            std::vector<GroupData> gd;
            for (const auto& g : groups) gd.push_back({g.durations, g.events, g.level});
            result.omnibus = log_rank_test(gd);
            if (groups.size() >= 3) {
                for (std::size_t i = 0; i < groups.size(); ++i) {
                    for (std::size_t j = i + 1; j < groups.size(); ++j) {
                        PairwiseLogRank pw;
                        pw.level_a = groups[i].level;
                        pw.level_b = groups[j].level;
                        pw.result = log_rank_test({gd[i], gd[j]});
                        result.pairwise.push_back(std::move(pw));
                    }
                }
            }
        }
        stage.per_attribute.push_back(std::move(result));
    }
    return stage;
}

CoxStage run_cox_stage(const Cohort& cohort, const RunConfig& config) {
    std::vector<Attribute> formula;
    for (Attribute a : all_attributes()) {
        std::map<std::string, std::size_t> levels;
        for (const auto& r : cohort.records) ++levels[attribute_level(r, a)];
        if (levels.size() >= 2) formula.push_back(a);
    }
    if (formula.empty()) {
        throw CoxError("run_cox_stage: no identifiable attribute in the cohort");
    }
    CoxStage stage;
    stage.design = encode_covariates(cohort, formula);
    CoxOptions options;
    options.ties = config.tie_method();
    options.tol = config.cox.tol;
    options.max_iter = config.cox.max_iter;
    stage.fit = fit_cox(stage.design, options);
    stage.table = hazard_table(stage.fit, stage.design, cohort);
    return stage;
}

BayesStage run_bayes_stage(const Cohort& cohort, const RunConfig& config) {
    BayesStage stage;
    const int months = config.window.total_months;
    for (int m = 0; m <= months; ++m) stage.grid.push_back(static_cast<double>(m));
    if (stage.grid.empty()) stage.grid.push_back(0.0);

    std::uint64_t salt = 0;
    for (Attribute attribute : all_attributes()) {
        ++salt;
        std::map<std::string, std::size_t> levels;
        for (const auto& r : cohort.records) ++levels[attribute_level(r, attribute)];
        if (levels.size() < 2) continue;  // no contrast to model

        BayesAttributeResult result;
        result.attribute = attribute;
        ExpSurvModel model = build_exp_model(cohort, attribute);
        model.prior_sd = config.bayes.prior_sd;
        const DesignMatrix dm = encode_covariates(cohort, {attribute});

        SamplerConfig sampler;
        sampler.chains = config.bayes.chains;
        sampler.warmup = config.bayes.warmup;
        sampler.draws = config.bayes.draws;
        sampler.seed = mix_seed(config.bayes.seed, salt);
        result.draws = sample_posterior(model, sampler);
        result.draws.coding = dm.coding;
        result.diag = diagnostics(result.draws);

        for (const auto& profile : covariate_profiles(model, dm.coding)) {
            auto ps = posterior_survival(result.draws, profile.x, stage.grid, 60);
            ps.label = profile.label;
            result.groups.push_back(std::move(ps));
        }
        stage.per_attribute.push_back(std::move(result));
    }
    return stage;
}

nlohmann::json emit_summary(const Cohort& cohort, const KmStage* km, const CoxStage* cox,
                            const BayesStage* bayes) {
    nlohmann::json doc;
    doc["schema"] = "survmine-summary/1";

    const auto& s = cohort.summary;
    nlohmann::json jc;
    jc["size"] = s.size;
    jc["censored_count"] = s.censored_count;
    jc["censored_fraction"] =
        s.censored_fraction ? nlohmann::json(*s.censored_fraction) : nlohmann::json(nullptr);
    jc["mean_duration_months"] = s.mean_duration_months
                                     ? nlohmann::json(*s.mean_duration_months)
                                     : nlohmann::json(nullptr);
    jc["median_duration_months"] = s.median_duration_months
                                       ? nlohmann::json(*s.median_duration_months)
                                       : nlohmann::json(nullptr);
    jc["window"] = {{"start", format_iso_date(cohort.window.start)},
                    {"end", format_iso_date(cohort.window.end)},
                    {"total_months", cohort.window.total_months},
                    {"month_length_days", cohort.window.month_length_days}};
    jc["attributes"] = {
        {"major_releases", s.with_major_release},
        {"multi_repo", s.multi_repo},
        {"high_author_count", s.high_author_count},
        {"high_rev_frequency", s.high_rev_frequency},
        {"host",
         {{"github", s.host_counts[0]}, {"pypi", s.host_counts[1]},
          {"debian", s.host_counts[2]}}}};
    doc["cohort"] = jc;

    if (km) {
        nlohmann::json jk = nlohmann::json::object();
        for (const auto& res : km->per_attribute) {
            nlohmann::json ja;
            ja["omnibus"] = res.omnibus ? logrank_json(*res.omnibus) : nlohmann::json(nullptr);
            nlohmann::json pw = nlohmann::json::array();
            for (const auto& p : res.pairwise) {
                nlohmann::json jp = logrank_json(p.result);
                jp["levels"] = {p.level_a, p.level_b};
                pw.push_back(jp);
            }
            ja["pairwise"] = pw;
            jk[attribute_name(res.attribute)] = ja;
        }
        doc["km"] = jk;
    } else {
        doc["km"] = nullptr;
    }

    if (cox) {
        nlohmann::json rows = nlohmann::json::array();
        for (const auto& r : cox->table) {
            nlohmann::json jr;
            jr["attribute"] = r.attribute;
            jr["level"] = r.level;
            jr["n"] = r.count;
            jr["hazard_ratio"] = r.hazard_ratio;
            if (r.is_reference) {
                jr["reference"] = true;
            } else {
                jr["ci_low"] = r.ci_low;
                jr["ci_high"] = r.ci_high;
                jr["p_value"] = r.p_value;
            }
            rows.push_back(jr);
        }
        doc["cox"] = {{"rows", rows},
                      {"converged", cox->fit.converged},
                      {"iterations", cox->fit.iterations},
                      {"log_likelihood", cox->fit.log_likelihood}};
    } else {
        doc["cox"] = nullptr;
    }

    if (bayes) {
        nlohmann::json jb = nlohmann::json::object();
        std::vector<double> report_months = {120.0, 150.0, 165.0};
        for (const auto& res : bayes->per_attribute) {
            nlohmann::json ja = nlohmann::json::object();
            for (const auto& g : res.groups) {
                nlohmann::json jg = nlohmann::json::object();
                for (double month : report_months) {
                    auto it = std::lower_bound(g.times.begin(), g.times.end(), month);
                    if (it == g.times.end() || *it != month) continue;
                    const auto idx = static_cast<std::size_t>(it - g.times.begin());
                    jg[std::to_string(static_cast<int>(month))] = {
                        {"mean", g.mean_curve[idx]},
                        {"q025", g.q025_curve[idx]},
                        {"q975", g.q975_curve[idx]}};
                }
                ja[g.label] = jg;
            }
            nlohmann::json diag;
            diag["rhat"] = res.diag.rhat;
            diag["ess"] = res.diag.ess;
            diag["acceptance_rate"] = res.draws.acceptance_rate;
            jb[attribute_name(res.attribute)] = {{"survival_at", ja}, {"diagnostics", diag}};
        }
        doc["bayes"] = jb;
    } else {
        doc["bayes"] = nullptr;
    }
    return doc;
}

void write_cohort_artifacts(const std::filesystem::path& out_dir, const Cohort& cohort) {
    std::ostringstream csv;
    write_cohort_csv(csv, cohort);
    atomic_write_file(out_dir / "cohort.csv", csv.str());
    if (!cohort.records.empty()) {
        atomic_write_file(out_dir / "cohort_strips.svg", render_duration_strips(cohort));
    }
}

void write_km_artifacts(const std::filesystem::path& out_dir, const KmStage& stage,
                        const Cohort& cohort) {
    for (const auto& res : stage.per_attribute) {
        // Stacked per-group curve tables with a leading group column.
        std::ostringstream curves;
        curves << "group,time,survival,lower,upper,at_risk,deaths\n";
        std::ostringstream censors;
        censors << "group,time,count\n";
        for (std::size_t g = 0; g < res.curves.size(); ++g) {
            const auto& curve = res.curves[g];
            const auto& band = res.bands[g];
            std::ostringstream one, two;
            write_curve_csv(one, curve, band);
            write_censor_csv(two, curve);
            auto append_with_group = [&](std::ostringstream& src, std::ostringstream& dst) {
                std::istringstream lines(src.str());
                std::string line;
                std::getline(lines, line);  // drop the header
                while (std::getline(lines, line)) dst << curve.label << ',' << line << '\n';
            };
            append_with_group(one, curves);
            append_with_group(two, censors);
        }
        atomic_write_file(out_dir / attr_filename("km_", res.attribute, ".csv"), curves.str());
        atomic_write_file(out_dir / attr_filename("km_", res.attribute, "_censors.csv"),
                          censors.str());

        PlotSpec spec;
        spec.kind = PlotKind::km_steps;
        spec.title = std::string("K-M survival by ") + attribute_name(res.attribute);
        spec.x_max = static_cast<double>(cohort.window.total_months);
        for (std::size_t g = 0; g < res.curves.size(); ++g) {
            PlotSeries series;
            series.label = res.curves[g].label;
            series.times = res.curves[g].event_times;
            series.values = res.curves[g].survival;
            series.band_lower = res.bands[g].lower;
            series.band_upper = res.bands[g].upper;
            series.censor_marks = res.curves[g].censor_times;
            spec.series.push_back(std::move(series));
        }
        if (res.omnibus) {
            char ann[64];
            std::snprintf(ann, sizeof ann, "log-rank p = %.3g", res.omnibus->p_value);
            spec.annotation = ann;
        }
        atomic_write_file(out_dir / attr_filename("km_", res.attribute, ".svg"),
                          render_step_svg(spec));

        if (!res.pairwise.empty()) {
            std::ostringstream pw;
            pw << "level_a,level_b,statistic,df,p_value\n";
            for (const auto& p : res.pairwise) {
                pw << p.level_a << ',' << p.level_b << ',' << p.result.statistic << ','
                   << p.result.degrees_of_freedom << ',' << p.result.p_value << '\n';
            }
            atomic_write_file(out_dir / attr_filename("km_", res.attribute, "_pairwise.csv"),
                              pw.str());
        }
    }
}

void write_cox_artifacts(const std::filesystem::path& out_dir, const CoxStage& stage) {
    std::ostringstream csv;
    write_hazard_table_csv(csv, stage.table);
    atomic_write_file(out_dir / "hazard_table.csv", csv.str());
    atomic_write_file(out_dir / "hazard_forest.svg", render_forest_svg(stage.table));
}

void write_bayes_artifacts(const std::filesystem::path& out_dir, const BayesStage& stage) {
    for (const auto& res : stage.per_attribute) {
        std::ostringstream bands;
        write_posterior_csv(bands, res.groups);
        atomic_write_file(out_dir / attr_filename("posterior_", res.attribute, ".csv"),
                          bands.str());

        std::ostringstream draws;
        write_draws_csv(draws, res.draws);
        atomic_write_file(out_dir / attr_filename("draws_", res.attribute, ".csv"),
                          draws.str());

        PlotSpec spec;
        spec.kind = PlotKind::posterior_bands;
        spec.title = std::string("posterior survival by ") + attribute_name(res.attribute);
        spec.step_interpolation = false;
        spec.x_max = stage.grid.empty() ? 0.0 : stage.grid.back();
        for (const auto& g : res.groups) {
            PlotSeries series;
            series.label = g.label;
            series.times = g.times;
            series.values = g.mean_curve;
            series.band_lower = g.q025_curve;
            series.band_upper = g.q975_curve;
            series.spaghetti = g.sample_curves;
            spec.series.push_back(std::move(series));
        }
        atomic_write_file(out_dir / attr_filename("posterior_", res.attribute, ".svg"),
                          render_step_svg(spec));
    }
}

void write_summary_artifact(const std::filesystem::path& out_dir,
                            const nlohmann::json& summary) {
    atomic_write_file(out_dir / "summary.json", summary.dump(2) + "\n");
}

}  // namespace survmine

#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "survmine/bayes.hpp"
#include "survmine/cohort.hpp"
#include "survmine/config.hpp"
#include "survmine/coxph.hpp"
#include "survmine/km.hpp"

namespace survmine {

// Unreadable or missing input files; the CLI maps this to exit 2.
class IoError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Writes via a temp file in the same directory plus an atomic rename, so an
// aborted run never leaves a truncated artifact behind.
void atomic_write_file(const std::filesystem::path& path, const std::string& content);

// Loads the three input files and assembles the cohort. Row-level parse
// errors are reported on `diagnostics` (one line each) and skipped.
Cohort load_cohort(const RunConfig& config, std::ostream* diagnostics = nullptr);

struct PairwiseLogRank {
    std::string level_a;
    std::string level_b;
    LogRankResult result;
};

struct KmAttributeResult {
    Attribute attribute;
    std::vector<SurvivalCurve> curves;  // one per observed level, reference first
    std::vector<ConfidenceBand> bands;
    std::optional<LogRankResult> omnibus;  // absent with a single observed level
    std::vector<PairwiseLogRank> pairwise;  // filled for 3+ level attributes
};

struct KmStage {
    std::vector<KmAttributeResult> per_attribute;
};

KmStage run_km_stage(const Cohort& cohort);

struct CoxStage {
    DesignMatrix design;
    CoxFit fit;
    std::vector<HazardRow> table;
};

// One joint multivariate model over every identifiable attribute.
CoxStage run_cox_stage(const Cohort& cohort, const RunConfig& config);

struct BayesAttributeResult {
    Attribute attribute;
    PosteriorDraws draws;
    Diagnostics diag;
    std::vector<PosteriorSurvival> groups;
};

struct BayesStage {
    std::vector<BayesAttributeResult> per_attribute;
    std::vector<double> grid;  // months, 0..total_months step 1
};

BayesStage run_bayes_stage(const Cohort& cohort, const RunConfig& config);

// The JSON report: cohort summary, log-rank table, hazard table and the
// posterior survival probabilities at the reporting months (120/150/165).
// Sections for stages that did not run are null.
nlohmann::json emit_summary(const Cohort& cohort, const KmStage* km, const CoxStage* cox,
                            const BayesStage* bayes);

// Artifact emitters, one per stage. All paths are atomic writes.
void write_cohort_artifacts(const std::filesystem::path& out_dir, const Cohort& cohort);
void write_km_artifacts(const std::filesystem::path& out_dir, const KmStage& stage,
                        const Cohort& cohort);
void write_cox_artifacts(const std::filesystem::path& out_dir, const CoxStage& stage);
void write_bayes_artifacts(const std::filesystem::path& out_dir, const BayesStage& stage);
void write_summary_artifact(const std::filesystem::path& out_dir, const nlohmann::json& summary);

}  // namespace survmine

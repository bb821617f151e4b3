// survmine: survival analysis of project revision histories.
//
// Subcommands: cohort | km | cox | bayes | all
// Each stage reads the three event logs named in the config, rebuilds the
// cohort, and writes its artifacts atomically into the output directory.

#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "survmine/report.hpp"

namespace {

constexpr const char* kOutDirEnvVar = "SURVMINE_OUT_DIR";

int fail(const char* kind, const std::string& message, int code) {
    nlohmann::json err = {{"error", kind}, {"message", message}};
    std::cerr << err.dump() << "\n";
    return code;
}

int run_stage(const std::string& stage, const survmine::RunConfig& config) {
    using namespace survmine;
    const std::filesystem::path out_dir = config.io.out_dir;

    Cohort cohort = load_cohort(config, &std::cerr);

    std::optional<KmStage> km;
    std::optional<CoxStage> cox;
    std::optional<BayesStage> bayes;

    if (stage == "cohort" || stage == "all") {
        write_cohort_artifacts(out_dir, cohort);
    }
    if (stage == "km" || stage == "all") {
        km = run_km_stage(cohort);
        write_km_artifacts(out_dir, *km, cohort);
    }
    if (stage == "cox" || stage == "all") {
        cox = run_cox_stage(cohort, config);
        write_cox_artifacts(out_dir, *cox);
    }
    if (stage == "bayes" || stage == "all") {
        bayes = run_bayes_stage(cohort, config);
        write_bayes_artifacts(out_dir, *bayes);
    }

    auto summary = emit_summary(cohort, km ? &*km : nullptr, cox ? &*cox : nullptr,
                                bayes ? &*bayes : nullptr);
    write_summary_artifact(out_dir, summary);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"survival analysis of project revision histories"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_override;
    std::optional<std::uint64_t> seed_override;

    for (const char* name : {"cohort", "km", "cox", "bayes", "all"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "path to the run config file")->required();
        sub->add_option("--out", out_override, "output directory override");
        sub->add_option("--seed", seed_override, "sampler seed override");
    }

    CLI11_PARSE(app, argc, argv);
    const std::string stage = app.get_subcommands().front()->get_name();

    survmine::RunConfig config;
    try {
        config = survmine::load_config_file(config_path);
        if (const char* env_out = std::getenv(kOutDirEnvVar); env_out && *env_out) {
            config.io.out_dir = env_out;
        }
        if (!out_override.empty()) config.io.out_dir = out_override;
        if (seed_override) config.bayes.seed = *seed_override;
        config.validate();
    } catch (const survmine::ConfigError& e) {
        return fail("config", e.what(), 3);
    }

    try {
        return run_stage(stage, config);
    } catch (const survmine::IoError& e) {
        return fail("io", e.what(), 2);
    } catch (const survmine::ConfigError& e) {
        return fail("config", e.what(), 3);
    } catch (const std::exception& e) {
        return fail("estimator", e.what(), 4);
    }
}

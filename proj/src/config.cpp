#include "survmine/config.hpp"

#include <charconv>
#include <fstream>
#include <sstream>

namespace survmine {

StudyWindow RunConfig::study_window() const {
    auto end = parse_iso_date(window.end_date);
    if (!end) throw ConfigError("window.end_date is not a valid date: " + window.end_date);
    return build_study_window(*end, window.total_months, window.month_length_days);
}

AttributeThresholds RunConfig::attribute_thresholds() const {
    return {thresholds.authors, thresholds.rev_per_day};
}

TieMethod RunConfig::tie_method() const {
    if (cox.ties == "efron") return TieMethod::efron;
    if (cox.ties == "breslow") return TieMethod::breslow;
    throw ConfigError("cox.ties must be 'efron' or 'breslow', got '" + cox.ties + "'");
}

void RunConfig::validate() const {
    if (!parse_iso_date(window.end_date)) {
        throw ConfigError("window.end_date is not a valid date: " + window.end_date);
    }
    if (window.total_months < 0) throw ConfigError("window.total_months must be >= 0");
    if (window.month_length_days < 1) throw ConfigError("window.month_length_days must be >= 1");
    if (thresholds.authors <= 0) throw ConfigError("thresholds.authors must be positive");
    if (!(thresholds.rev_per_day > 0.0)) {
        throw ConfigError("thresholds.rev_per_day must be positive");
    }
    if (bayes.chains < 1) throw ConfigError("bayes.chains must be >= 1");
    if (bayes.warmup < 0) throw ConfigError("bayes.warmup must be >= 0");
    if (bayes.draws < 1) throw ConfigError("bayes.draws must be >= 1");
    if (!(bayes.prior_sd > 0.0)) throw ConfigError("bayes.prior_sd must be positive");
    tie_method();
    if (!(cox.tol > 0.0)) throw ConfigError("cox.tol must be positive");
    if (cox.max_iter < 1) throw ConfigError("cox.max_iter must be >= 1");
    if (io.revisions.empty()) throw ConfigError("io.revisions path is required");
    if (io.releases.empty()) throw ConfigError("io.releases path is required");
    if (io.origins.empty()) throw ConfigError("io.origins path is required");
    if (io.out_dir.empty()) throw ConfigError("io.out_dir must not be empty");
}

namespace {

std::string trim(std::string_view s) {
    std::size_t b = 0, e = s.size();
    while (b < e && (s[b] == ' ' || s[b] == '\t')) ++b;
    while (e > b && (s[e - 1] == ' ' || s[e - 1] == '\t' || s[e - 1] == '\r')) --e;
    return std::string(s.substr(b, e - b));
}

template <typename T>
T parse_number(const std::string& key, const std::string& value) {
    T out{};
    auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
    if (ec != std::errc{} || ptr != value.data() + value.size()) {
        throw ConfigError("invalid numeric value for " + key + ": '" + value + "'");
    }
    return out;
}

double parse_real(const std::string& key, const std::string& value) {
    // from_chars<double> is unreliable on older toolchains; go through strtod.
    std::size_t pos = 0;
    double out = 0.0;
    try {
        out = std::stod(value, &pos);
    } catch (const std::exception&) {
        throw ConfigError("invalid numeric value for " + key + ": '" + value + "'");
    }
    if (pos != value.size()) {
        throw ConfigError("invalid numeric value for " + key + ": '" + value + "'");
    }
    return out;
}

}  // namespace

RunConfig parse_config_text(const std::string& text) {
    RunConfig cfg;
    std::istringstream in(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string stripped = trim(line);
        if (stripped.empty() || stripped[0] == '#') continue;
        const auto eq = stripped.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
        }
        const std::string key = trim(stripped.substr(0, eq));
        const std::string value = trim(stripped.substr(eq + 1));

        if (key == "window.end_date") cfg.window.end_date = value;
        else if (key == "window.total_months") cfg.window.total_months = parse_number<int>(key, value);
        else if (key == "window.month_length_days") cfg.window.month_length_days = parse_number<int>(key, value);
        else if (key == "thresholds.authors") cfg.thresholds.authors = parse_number<std::int64_t>(key, value);
        else if (key == "thresholds.rev_per_day") cfg.thresholds.rev_per_day = parse_real(key, value);
        else if (key == "bayes.chains") cfg.bayes.chains = parse_number<int>(key, value);
        else if (key == "bayes.warmup") cfg.bayes.warmup = parse_number<int>(key, value);
        else if (key == "bayes.draws") cfg.bayes.draws = parse_number<int>(key, value);
        else if (key == "bayes.seed") cfg.bayes.seed = parse_number<std::uint64_t>(key, value);
        else if (key == "bayes.prior_sd") cfg.bayes.prior_sd = parse_real(key, value);
        else if (key == "cox.ties") cfg.cox.ties = value;
        else if (key == "cox.tol") cfg.cox.tol = parse_real(key, value);
        else if (key == "cox.max_iter") cfg.cox.max_iter = parse_number<int>(key, value);
        else if (key == "io.revisions") cfg.io.revisions = value;
        else if (key == "io.releases") cfg.io.releases = value;
        else if (key == "io.origins") cfg.io.origins = value;
        else if (key == "io.out_dir") cfg.io.out_dir = value;
        else throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    }
    return cfg;
}

RunConfig load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

std::string serialize_config(const RunConfig& c) {
    std::ostringstream out;
    auto put_real = [&out](const char* key, double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << key << " = " << std::string_view(buf, ptr - buf) << '\n';
    };
    out << "window.end_date = " << c.window.end_date << '\n';
    out << "window.total_months = " << c.window.total_months << '\n';
    out << "window.month_length_days = " << c.window.month_length_days << '\n';
    out << "thresholds.authors = " << c.thresholds.authors << '\n';
    put_real("thresholds.rev_per_day", c.thresholds.rev_per_day);
    out << "bayes.chains = " << c.bayes.chains << '\n';
    out << "bayes.warmup = " << c.bayes.warmup << '\n';
    out << "bayes.draws = " << c.bayes.draws << '\n';
    out << "bayes.seed = " << c.bayes.seed << '\n';
    put_real("bayes.prior_sd", c.bayes.prior_sd);
    out << "cox.ties = " << c.cox.ties << '\n';
    put_real("cox.tol", c.cox.tol);
    out << "cox.max_iter = " << c.cox.max_iter << '\n';
    out << "io.revisions = " << c.io.revisions << '\n';
    out << "io.releases = " << c.io.releases << '\n';
    out << "io.origins = " << c.io.origins << '\n';
    out << "io.out_dir = " << c.io.out_dir << '\n';
    return out.str();
}

}  // namespace survmine

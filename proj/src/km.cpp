#include "survmine/km.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "survmine/stats.hpp"

namespace survmine {

namespace {

void format_double(std::ostream& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out << std::string_view(buf, ptr - buf);
}

}  // namespace

SurvivalCurve fit_km(std::span<const double> durations, std::span<const bool> event_flags,
                     std::string label) {
    if (durations.empty()) throw std::invalid_argument("fit_km: empty input");
    if (durations.size() != event_flags.size()) {
        throw std::invalid_argument("fit_km: durations and event_flags differ in length");
    }
    for (double t : durations) {
        if (!(t >= 0.0)) throw std::invalid_argument("fit_km: negative or NaN duration");
    }

    const std::size_t n = durations.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return durations[a] < durations[b];
    });

    SurvivalCurve curve;
    curve.label = std::move(label);
    curve.n_subjects = n;
    curve.max_time = durations[order.back()];

    double s = 1.0;
    double greenwood_sum = 0.0;  // sum of d / (n (n - d))
    std::int64_t at_risk = static_cast<std::int64_t>(n);
    for (std::size_t k = 0; k < n;) {
        const double t = durations[order[k]];
        std::int64_t d = 0, c = 0;
        while (k < n && durations[order[k]] == t) {
            if (event_flags[order[k]]) ++d; else ++c;
            ++k;
        }
        if (d > 0) {
            curve.event_times.push_back(t);
            curve.at_risk.push_back(at_risk);
            curve.deaths.push_back(d);
            s *= 1.0 - static_cast<double>(d) / static_cast<double>(at_risk);
            if (at_risk > d) {
                greenwood_sum += static_cast<double>(d) /
                                 (static_cast<double>(at_risk) *
                                  static_cast<double>(at_risk - d));
            }
            // At S = 0 the Greenwood sum diverges; the variance of an exact
            // zero is reported as zero.
            curve.survival.push_back(s);
            curve.variance.push_back(s > 0.0 ? s * s * greenwood_sum : 0.0);
        }
        for (std::int64_t i = 0; i < c; ++i) curve.censor_times.push_back(t);
        at_risk -= d + c;
    }
    return curve;
}

ConfidenceBand greenwood_band(const SurvivalCurve& curve, double level) {
    if (!(level > 0.0 && level < 1.0)) {
        throw std::invalid_argument("greenwood_band: level must be in (0,1)");
    }
    const double z = stats::normal_quantile(1.0 - (1.0 - level) / 2.0);
    ConfidenceBand band;
    band.lower.reserve(curve.survival.size());
    band.upper.reserve(curve.survival.size());
    for (std::size_t i = 0; i < curve.survival.size(); ++i) {
        const double s = curve.survival[i];
        if (s >= 1.0) {
            band.lower.push_back(1.0);
            band.upper.push_back(1.0);
            continue;
        }
        if (s <= 0.0) {
            band.lower.push_back(0.0);
            band.upper.push_back(0.0);
            continue;
        }
        // se of log(-log S) from Greenwood: sqrt(var) / (S |log S|)
        const double se = std::sqrt(curve.variance[i]) / (s * std::fabs(std::log(s)));
        const double theta = std::log(-std::log(s));
        band.lower.push_back(std::exp(-std::exp(theta + z * se)));
        band.upper.push_back(std::exp(-std::exp(theta - z * se)));
    }
    return band;
}

double survival_at(const SurvivalCurve& curve, double t) {
    if (!(t >= 0.0)) throw std::invalid_argument("survival_at: t must be >= 0");
    // Right-continuous: the drop at an event time applies at that time.
    auto it = std::upper_bound(curve.event_times.begin(), curve.event_times.end(), t);
    if (it == curve.event_times.begin()) return 1.0;
    return curve.survival[static_cast<std::size_t>(it - curve.event_times.begin()) - 1];
}

LogRankResult log_rank_test(const std::vector<GroupData>& groups) {
    const std::size_t g = groups.size();
    if (g < 2) throw std::invalid_argument("log_rank_test: need at least 2 groups");
    for (const auto& grp : groups) {
        if (grp.durations.empty()) {
            throw std::invalid_argument("log_rank_test: empty group");
        }
        if (grp.durations.size() != grp.events.size()) {
            throw std::invalid_argument("log_rank_test: durations/events length mismatch");
        }
    }

    // Pooled distinct death times.
    std::vector<double> death_times;
    for (const auto& grp : groups) {
        for (std::size_t i = 0; i < grp.durations.size(); ++i) {
            if (grp.events[i]) death_times.push_back(grp.durations[i]);
        }
    }
    std::sort(death_times.begin(), death_times.end());
    death_times.erase(std::unique(death_times.begin(), death_times.end()),
                      death_times.end());

    const std::size_t k = g - 1;  // work with the first g-1 groups
    std::vector<double> observed_minus_expected(k, 0.0);
    std::vector<double> cov(k * k, 0.0);

    for (double t : death_times) {
        std::vector<double> n_at(g, 0.0), d_at(g, 0.0);
        double n_tot = 0.0, d_tot = 0.0;
        for (std::size_t j = 0; j < g; ++j) {
            for (std::size_t i = 0; i < groups[j].durations.size(); ++i) {
                if (groups[j].durations[i] >= t) n_at[j] += 1.0;
                if (groups[j].durations[i] == t && groups[j].events[i]) d_at[j] += 1.0;
            }
            n_tot += n_at[j];
            d_tot += d_at[j];
        }
        if (n_tot <= 0.0 || d_tot <= 0.0) continue;
        for (std::size_t j = 0; j < k; ++j) {
            observed_minus_expected[j] += d_at[j] - d_tot * n_at[j] / n_tot;
        }
        if (n_tot < 2.0) continue;  // no variance contribution from a lone subject
        const double tie_factor = d_tot * (n_tot - d_tot) / (n_tot - 1.0);
        for (std::size_t j = 0; j < k; ++j) {
            for (std::size_t l = 0; l < k; ++l) {
                const double delta = j == l ? 1.0 : 0.0;
                cov[j * k + l] +=
                    tie_factor * n_at[j] * (delta * n_tot - n_at[l]) / (n_tot * n_tot);
            }
        }
    }

    // statistic = (O-E)' V^{-1} (O-E), via Cholesky of V
    std::vector<double> chol(cov);
    for (std::size_t i = 0; i < k; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = chol[i * k + j];
            for (std::size_t m = 0; m < j; ++m) sum -= chol[i * k + m] * chol[j * k + m];
            if (i == j) {
                if (sum <= 0.0) {
                    throw std::invalid_argument(
                        "log_rank_test: degenerate input, a group contributes no "
                        "variance (singular covariance)");
                }
                chol[i * k + i] = std::sqrt(sum);
            } else {
                chol[i * k + j] = sum / chol[j * k + j];
            }
        }
    }
    // Solve L y = (O-E), statistic = y'y
    std::vector<double> y(k);
    for (std::size_t i = 0; i < k; ++i) {
        double sum = observed_minus_expected[i];
        for (std::size_t m = 0; m < i; ++m) sum -= chol[i * k + m] * y[m];
        y[i] = sum / chol[i * k + i];
    }
    LogRankResult result;
    result.statistic = std::inner_product(y.begin(), y.end(), y.begin(), 0.0);
    result.degrees_of_freedom = k;
    result.p_value = stats::chi_square_upper_tail(result.statistic, static_cast<double>(k));
    return result;
}

void write_curve_csv(std::ostream& out, const SurvivalCurve& curve,
                     const ConfidenceBand& band) {
    out << "time,survival,lower,upper,at_risk,deaths\n";
    for (std::size_t i = 0; i < curve.event_times.size(); ++i) {
        format_double(out, curve.event_times[i]);
        out << ',';
        format_double(out, curve.survival[i]);
        out << ',';
        format_double(out, band.lower[i]);
        out << ',';
        format_double(out, band.upper[i]);
        out << ',' << curve.at_risk[i] << ',' << curve.deaths[i] << '\n';
    }
}

void write_censor_csv(std::ostream& out, const SurvivalCurve& curve) {
    out << "time,count\n";
    for (std::size_t i = 0; i < curve.censor_times.size();) {
        const double t = curve.censor_times[i];
        std::size_t c = 0;
        while (i < curve.censor_times.size() && curve.censor_times[i] == t) {
            ++c;
            ++i;
        }
        format_double(out, t);
        out << ',' << c << '\n';
    }
}

}  // namespace survmine

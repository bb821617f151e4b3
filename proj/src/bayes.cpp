#include "survmine/bayes.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>

namespace survmine {

namespace {

constexpr double kTwoPi = 6.283185307179586476;

// splitmix64; used to derive independent per-chain seeds from the master.
std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

// xoshiro256++ with a Box-Muller normal layer. Self-contained so draws are
// reproducible across standard libraries.
class RngStream {
  public:
    explicit RngStream(std::uint64_t seed) {
        std::uint64_t s = seed;
        for (auto& word : state_) {
            s = mix64(s);
            word = s;
        }
    }

    std::uint64_t next_u64() {
        const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
        const std::uint64_t t = state_[1] << 17;
        state_[2] ^= state_[0];
        state_[3] ^= state_[1];
        state_[1] ^= state_[2];
        state_[0] ^= state_[3];
        state_[2] ^= t;
        state_[3] = rotl(state_[3], 45);
        return result;
    }

    double uniform01() {
        // 53-bit mantissa in (0, 1); zero is nudged away for log().
        double u = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
        return u > 0.0 ? u : 0x1.0p-53;
    }

    double normal() {
        if (have_spare_) {
            have_spare_ = false;
            return spare_;
        }
        const double u1 = uniform01();
        const double u2 = uniform01();
        const double r = std::sqrt(-2.0 * std::log(u1));
        spare_ = r * std::sin(kTwoPi * u2);
        have_spare_ = true;
        return r * std::cos(kTwoPi * u2);
    }

  private:
    static std::uint64_t rotl(std::uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }
    std::uint64_t state_[4]{};
    double spare_ = 0.0;
    bool have_spare_ = false;
};

void format_double(std::ostream& out, double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    out << std::string_view(buf, ptr - buf);
}

// Type-7 quantile of a sorted sample.
double sorted_quantile(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw BayesError("quantile of empty sample");
    const double h = q * (static_cast<double>(sorted.size()) - 1.0);
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

}  // namespace

ExpSurvModel build_exp_model(const Cohort& cohort) {
    ExpSurvModel model;
    model.n = cohort.records.size();
    model.dim = 1;
    model.y.reserve(model.n);
    model.v.reserve(model.n);
    model.x.assign(model.n, 1.0);
    for (const auto& r : cohort.records) {
        model.y.push_back(r.duration_months);
        model.v.push_back(r.censored ? 0 : 1);
    }
    return model;
}

ExpSurvModel build_exp_model(const Cohort& cohort, Attribute attribute) {
    const DesignMatrix dm = encode_covariates(cohort, {attribute});
    ExpSurvModel model;
    model.n = dm.n;
    model.dim = dm.p + 1;
    model.y = dm.durations;
    model.v = dm.events;
    model.x.assign(model.n * model.dim, 0.0);
    for (std::size_t i = 0; i < model.n; ++i) {
        model.x[i * model.dim] = 1.0;
        for (std::size_t j = 0; j < dm.p; ++j) {
            model.x[i * model.dim + 1 + j] = dm.x(i, j);
        }
    }
    return model;
}

std::vector<CovariateProfile> covariate_profiles(const ExpSurvModel& model,
                                                 const std::vector<ColumnCoding>& coding) {
    if (coding.size() + 1 != model.dim) {
        throw BayesError("covariate_profiles: coding does not match model dimension");
    }
    std::vector<CovariateProfile> profiles;
    CovariateProfile ref;
    ref.label = coding.empty() ? "all" : coding.front().reference;
    ref.x.assign(model.dim, 0.0);
    ref.x[0] = 1.0;
    profiles.push_back(std::move(ref));
    for (std::size_t j = 0; j < coding.size(); ++j) {
        CovariateProfile p;
        p.label = coding[j].level;
        p.x.assign(model.dim, 0.0);
        p.x[0] = 1.0;
        p.x[1 + j] = 1.0;
        profiles.push_back(std::move(p));
    }
    return profiles;
}

double log_likelihood(std::span<const double> beta, const ExpSurvModel& model) {
    if (beta.size() != model.dim) {
        throw BayesError("log_likelihood: beta dimension does not match model");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < model.n; ++i) {
        double eta = 0.0;
        for (std::size_t j = 0; j < model.dim; ++j) {
            eta += beta[j] * model.covariate(i, j);
        }
        const double lambda = std::exp(eta);
        const double term = model.v[i] ? eta - lambda * model.y[i] : -lambda * model.y[i];
        if (!std::isfinite(term)) {
            throw BayesError("log_likelihood: overflow in exp at row " + std::to_string(i));
        }
        total += term;
    }
    return total;
}

double log_prior(std::span<const double> beta, double prior_sd) {
    if (!(prior_sd > 0.0)) throw BayesError("log_prior: prior_sd must be positive");
    const double log_norm = -0.5 * std::log(kTwoPi) - std::log(prior_sd);
    double total = 0.0;
    for (double b : beta) {
        total += log_norm - 0.5 * (b / prior_sd) * (b / prior_sd);
    }
    return total;
}

double log_posterior(std::span<const double> beta, const ExpSurvModel& model) {
    return log_likelihood(beta, model) + log_prior(beta, model.prior_sd);
}

PosteriorDraws sample_posterior(const ExpSurvModel& model, const SamplerConfig& config) {
    if (config.chains < 1) throw BayesError("sample_posterior: chains must be >= 1");
    if (config.draws < 1) throw BayesError("sample_posterior: draws must be >= 1");
    if (config.warmup < 0) throw BayesError("sample_posterior: warmup must be >= 0");
    if (model.dim == 0) throw BayesError("sample_posterior: zero-dimensional model");

    const std::size_t dim = model.dim;
    PosteriorDraws out;
    out.chains = config.chains;
    out.draws_per_chain = config.draws;
    out.warmup = config.warmup;
    out.dim = dim;
    out.seed = config.seed;
    out.samples.assign(static_cast<std::size_t>(config.chains) * config.draws * dim, 0.0);
    out.acceptance_rate.assign(config.chains, 0.0);

    for (int chain = 0; chain < config.chains; ++chain) {
        RngStream rng(mix64(config.seed) ^ mix64(0x517cc1b727220a95ULL * (chain + 1)));

        std::vector<double> beta(dim), proposal(dim);
        for (auto& b : beta) b = rng.normal() * model.prior_sd;
        double lp = log_posterior(beta, model);

        double log_scale = 0.0;
        std::int64_t accepted_post_warmup = 0;
        const int total_iters = config.warmup + config.draws;
        for (int t = 0; t < total_iters; ++t) {
            const double scale = std::exp(log_scale);
            for (std::size_t j = 0; j < dim; ++j) {
                proposal[j] = beta[j] + scale * rng.normal();
            }
            const double lp_new = log_posterior(proposal, model);
            const double log_ratio = lp_new - lp;
            const double alpha = log_ratio >= 0.0 ? 1.0 : std::exp(log_ratio);
            if (rng.uniform01() < alpha) {
                beta = proposal;
                lp = lp_new;
                if (t >= config.warmup) ++accepted_post_warmup;
            }
            if (t < config.warmup) {
                // Robbins-Monro step toward the target acceptance rate.
                log_scale += std::pow(t + 1.0, -0.6) * (alpha - config.target_accept);
            } else {
                const int draw = t - config.warmup;
                for (std::size_t j = 0; j < dim; ++j) {
                    out.samples[(static_cast<std::size_t>(chain) * config.draws + draw) * dim +
                                j] = beta[j];
                }
            }
        }
        const double rate =
            static_cast<double>(accepted_post_warmup) / static_cast<double>(config.draws);
        out.acceptance_rate[chain] = rate;
        if (rate < 0.01 || rate > 0.99) {
            out.warnings.push_back("chain " + std::to_string(chain) +
                                   ": pathological acceptance rate " + std::to_string(rate));
        }
    }
    return out;
}

Diagnostics diagnostics(const PosteriorDraws& draws) {
    if (draws.chains < 1 || draws.draws_per_chain < 2) {
        throw BayesError("diagnostics: need at least one chain with two draws");
    }
    const std::size_t dim = draws.dim;
    const int half = draws.draws_per_chain / 2;
    const int n_seq = draws.chains * 2;

    Diagnostics diag;
    diag.rhat.assign(dim, 0.0);
    diag.ess.assign(dim, 0.0);

    for (std::size_t j = 0; j < dim; ++j) {
        // Split every chain into halves.
        std::vector<std::vector<double>> seqs;
        seqs.reserve(n_seq);
        for (int c = 0; c < draws.chains; ++c) {
            std::vector<double> first, second;
            first.reserve(half);
            second.reserve(half);
            for (int d = 0; d < half; ++d) first.push_back(draws.sample(c, d, j));
            for (int d = half; d < 2 * half; ++d) second.push_back(draws.sample(c, d, j));
            seqs.push_back(std::move(first));
            seqs.push_back(std::move(second));
        }
        const double n = static_cast<double>(half);
        const double m = static_cast<double>(n_seq);

        std::vector<double> means(n_seq), vars(n_seq);
        for (int s = 0; s < n_seq; ++s) {
            const auto& q = seqs[s];
            double mu = std::accumulate(q.begin(), q.end(), 0.0) / n;
            double var = 0.0;
            for (double v : q) var += (v - mu) * (v - mu);
            var /= n - 1.0;
            means[s] = mu;
            vars[s] = var;
        }
        const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
        double b = 0.0;
        for (double mu : means) b += (mu - grand) * (mu - grand);
        b *= n / (m - 1.0);
        const double w = std::accumulate(vars.begin(), vars.end(), 0.0) / m;
        const double var_plus = (n - 1.0) / n * w + b / n;

        if (w <= 0.0) {
            diag.rhat[j] = std::numeric_limits<double>::quiet_NaN();
            diag.ess[j] = std::numeric_limits<double>::quiet_NaN();
            diag.warnings.push_back("coordinate " + std::to_string(j) +
                                    ": zero-variance chains, Rhat undefined");
            continue;
        }
        diag.rhat[j] = std::sqrt(var_plus / w);

        // Combined autocorrelations with Geyer's initial monotone sequence.
        const int max_lag = half - 1;
        std::vector<double> rho(max_lag + 1, 0.0);
        rho[0] = 1.0;
        for (int lag = 1; lag <= max_lag; ++lag) {
            double acov = 0.0;
            for (int s = 0; s < n_seq; ++s) {
                const auto& q = seqs[s];
                double sum = 0.0;
                for (int i = 0; i + lag < half; ++i) {
                    sum += (q[i] - means[s]) * (q[i + lag] - means[s]);
                }
                acov += sum / n;
            }
            acov /= m;
            rho[lag] = 1.0 - (w - acov) / var_plus;
        }
        double tau = 0.0;
        double prev_pair = std::numeric_limits<double>::infinity();
        for (int k = 0; 2 * k + 1 <= max_lag; ++k) {
            double pair = rho[2 * k] + rho[2 * k + 1];
            if (pair <= 0.0) break;
            pair = std::min(pair, prev_pair);
            prev_pair = pair;
            tau += 2.0 * pair;
        }
        tau = std::max(tau - 1.0, 1.0 / static_cast<double>(n_seq));
        diag.ess[j] = m * n / tau;
    }
    return diag;
}

PosteriorSurvival posterior_survival(const PosteriorDraws& draws,
                                     std::span<const double> covariate_profile,
                                     std::span<const double> times,
                                     std::size_t max_sample_curves) {
    if (covariate_profile.size() != draws.dim) {
        throw BayesError("posterior_survival: profile dimension does not match draws");
    }
    for (std::size_t i = 0; i < times.size(); ++i) {
        if (!(times[i] >= 0.0)) throw BayesError("posterior_survival: negative time");
        if (i > 0 && times[i] < times[i - 1]) {
            throw BayesError("posterior_survival: times must be ascending");
        }
    }

    const std::size_t total =
        static_cast<std::size_t>(draws.chains) * draws.draws_per_chain;
    std::vector<double> lambdas;
    lambdas.reserve(total);
    for (int c = 0; c < draws.chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d) {
            double eta = 0.0;
            for (std::size_t j = 0; j < draws.dim; ++j) {
                eta += covariate_profile[j] * draws.sample(c, d, j);
            }
            lambdas.push_back(std::exp(eta));
        }
    }

    PosteriorSurvival ps;
    ps.times.assign(times.begin(), times.end());
    ps.mean_curve.reserve(times.size());
    ps.q025_curve.reserve(times.size());
    ps.q975_curve.reserve(times.size());

    std::vector<double> sorted(lambdas);
    std::sort(sorted.begin(), sorted.end());
    // S(t) = exp(-lambda t) is decreasing in lambda, so the survival
    // quantiles come from the opposite lambda quantiles.
    const double lambda_hi = sorted_quantile(sorted, 0.975);
    const double lambda_lo = sorted_quantile(sorted, 0.025);

    for (double t : times) {
        double mean = 0.0;
        for (double l : lambdas) mean += std::exp(-l * t);
        mean /= static_cast<double>(lambdas.size());
        ps.mean_curve.push_back(mean);
        ps.q025_curve.push_back(std::exp(-lambda_hi * t));
        ps.q975_curve.push_back(std::exp(-lambda_lo * t));
    }

    if (max_sample_curves > 0) {
        const std::size_t stride = std::max<std::size_t>(1, total / max_sample_curves);
        for (std::size_t i = 0; i < total && ps.sample_curves.size() < max_sample_curves;
             i += stride) {
            std::vector<double> curve;
            curve.reserve(times.size());
            for (double t : times) curve.push_back(std::exp(-lambdas[i] * t));
            ps.sample_curves.push_back(std::move(curve));
        }
    }
    return ps;
}

void write_posterior_csv(std::ostream& out, const std::vector<PosteriorSurvival>& groups) {
    out << "group,time,mean,q025,q975\n";
    for (const auto& g : groups) {
        for (std::size_t i = 0; i < g.times.size(); ++i) {
            out << g.label << ',';
            format_double(out, g.times[i]);
            out << ',';
            format_double(out, g.mean_curve[i]);
            out << ',';
            format_double(out, g.q025_curve[i]);
            out << ',';
            format_double(out, g.q975_curve[i]);
            out << '\n';
        }
    }
}

void write_draws_csv(std::ostream& out, const PosteriorDraws& draws) {
    out << "chain,draw";
    for (std::size_t j = 0; j < draws.dim; ++j) out << ",beta" << j;
    out << '\n';
    for (int c = 0; c < draws.chains; ++c) {
        for (int d = 0; d < draws.draws_per_chain; ++d) {
            out << c << ',' << d;
            for (std::size_t j = 0; j < draws.dim; ++j) {
                out << ',';
                format_double(out, draws.sample(c, d, j));
            }
            out << '\n';
        }
    }
}

}  // namespace survmine

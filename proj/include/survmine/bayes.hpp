#pragma once

#include <cstdint>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "survmine/cohort.hpp"
#include "survmine/coxph.hpp"

namespace survmine {

// Exponential survival model: event times y are exponential with rate
// lambda = exp(x'beta); censored rows contribute the survival factor only.
// Every covariate vector begins with the intercept element 1.
struct ExpSurvModel {
    std::size_t n = 0;
    std::size_t dim = 0;            // includes the intercept
    std::vector<double> y;          // duration in study months, >= 0
    std::vector<std::uint8_t> v;    // 1 = death observed
    std::vector<double> x;          // row-major n x dim
    double prior_sd = 10.0;

    double covariate(std::size_t row, std::size_t col) const { return x[row * dim + col]; }
};

class BayesError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Intercept plus the attribute's indicator columns, coded exactly like the
// Cox design so the posterior groups line up with the K-M groups.
ExpSurvModel build_exp_model(const Cohort& cohort, Attribute attribute);
// Intercept-only variant.
ExpSurvModel build_exp_model(const Cohort& cohort);

struct CovariateProfile {
    std::string label;      // level name
    std::vector<double> x;  // covariate vector with leading 1
};

// One profile per level of the attribute, reference profile first.
std::vector<CovariateProfile> covariate_profiles(const ExpSurvModel& model,
                                                 const std::vector<ColumnCoding>& coding);

double log_likelihood(std::span<const double> beta, const ExpSurvModel& model);
double log_prior(std::span<const double> beta, double prior_sd);
double log_posterior(std::span<const double> beta, const ExpSurvModel& model);

struct SamplerConfig {
    int chains = 4;
    int warmup = 1000;
    int draws = 2000;
    std::uint64_t seed = 1;
    double target_accept = 0.35;
};

struct PosteriorDraws {
    int chains = 0;
    int draws_per_chain = 0;
    int warmup = 0;
    std::size_t dim = 0;
    std::uint64_t seed = 0;
    // samples[(chain * draws_per_chain + draw) * dim + j]
    std::vector<double> samples;
    std::vector<double> acceptance_rate;  // per chain, post-warmup
    std::vector<std::string> warnings;
    std::vector<ColumnCoding> coding;  // empty for intercept-only models

    double sample(int chain, int draw, std::size_t j) const {
        return samples[(static_cast<std::size_t>(chain) * draws_per_chain + draw) * dim + j];
    }
};

// Adaptive random-walk Metropolis. The per-chain proposal scale is adapted
// toward target_accept during warmup (Robbins-Monro on the log scale) and
// frozen afterwards. Chains start from prior draws and use independent
// streams derived from the master seed, so output is bit-identical for a
// given (seed, config) and does not depend on scheduling.
PosteriorDraws sample_posterior(const ExpSurvModel& model, const SamplerConfig& config = {});

struct Diagnostics {
    std::vector<double> rhat;  // split-Rhat per coordinate
    std::vector<double> ess;   // effective sample size per coordinate, all chains pooled
    std::vector<std::string> warnings;
};

Diagnostics diagnostics(const PosteriorDraws& draws);

struct PosteriorSurvival {
    std::vector<double> times;
    std::vector<double> mean_curve;
    std::vector<double> q025_curve;
    std::vector<double> q975_curve;
    // Thinned subset of per-draw curves for spaghetti plots.
    std::vector<std::vector<double>> sample_curves;
    std::string label;
};

// Per draw, lambda = exp(x'beta) and S(t) = exp(-lambda t); the mean and the
// pointwise 2.5/97.5% quantiles are taken across draws.
PosteriorSurvival posterior_survival(const PosteriorDraws& draws,
                                     std::span<const double> covariate_profile,
                                     std::span<const double> times,
                                     std::size_t max_sample_curves = 0);

// Band export: label, time, mean, q025, q975 per row.
void write_posterior_csv(std::ostream& out, const std::vector<PosteriorSurvival>& groups);

// Raw draws as a flat table: chain, draw, beta components.
void write_draws_csv(std::ostream& out, const PosteriorDraws& draws);

}  // namespace survmine

#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "survmine/cohort.hpp"

namespace survmine {

enum class Attribute : std::uint8_t {
    major_releases,
    host,
    multi_repo,
    high_author_count,
    high_rev_frequency,
};

const char* attribute_name(Attribute a);
std::optional<Attribute> parse_attribute(std::string_view token);
std::vector<Attribute> all_attributes();

// The level a record exhibits for an attribute ("true"/"false" or a host name).
std::string attribute_level(const ProjectRecord& record, Attribute attribute);
// Canonical level order per attribute; the reference level comes first.
std::vector<std::string> attribute_levels(Attribute attribute);
// Reference levels are fixed so the emitted ratios read as "risk of the
// deprived level vs. the healthy one": major_releases=true, multi_repo=true,
// high_author_count=true, high_rev_frequency=false, host=github.
std::string reference_level(Attribute attribute);

struct ColumnCoding {
    Attribute attribute;
    std::string level;      // the level this indicator marks
    std::string reference;  // the level coded as all-zeros
};

struct DesignMatrix {
    std::vector<double> durations;
    std::vector<std::uint8_t> events;  // 1 = death observed
    std::vector<double> covariates;    // row-major, n x p
    std::size_t n = 0;
    std::size_t p = 0;
    std::vector<ColumnCoding> coding;

    double x(std::size_t row, std::size_t col) const { return covariates[row * p + col]; }
    std::size_t event_count() const;
};

enum class TieMethod : std::uint8_t { efron, breslow };

class CoxError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

// Indicator coding over the observed levels of each requested attribute,
// reference level omitted. An attribute with a single observed level is
// non-identifiable and rejected.
DesignMatrix encode_covariates(const Cohort& cohort, const std::vector<Attribute>& formula);

double partial_log_likelihood(std::span<const double> beta, const DesignMatrix& dm,
                              TieMethod ties);

// Log-likelihood together with its analytic gradient and the observed
// information matrix (negative Hessian, row-major p x p).
struct PartialLikelihoodDerivatives {
    double loglik = 0.0;
    std::vector<double> score;
    std::vector<double> information;
};

PartialLikelihoodDerivatives partial_loglik_derivatives(std::span<const double> beta,
                                                        const DesignMatrix& dm,
                                                        TieMethod ties);

struct CoxOptions {
    TieMethod ties = TieMethod::efron;
    int max_iter = 50;
    double tol = 1e-8;
};

struct CoxFit {
    std::vector<double> beta;
    std::vector<double> covariance;  // row-major p x p
    std::vector<double> hazard_ratios;
    std::vector<double> ci_lower;  // 95% Wald, on the hazard-ratio scale
    std::vector<double> ci_upper;
    std::vector<double> p_values;  // Wald
    double log_likelihood = 0.0;
    int iterations = 0;
    bool converged = false;
    std::vector<ColumnCoding> coding;

    double standard_error(std::size_t j) const;
};

// Newton-Raphson on the partial likelihood from beta = 0 with step-halving.
// Throws CoxError on a singular information matrix (monotone likelihood);
// non-convergence is flagged on the result, never silent.
CoxFit fit_cox(const DesignMatrix& dm, const CoxOptions& options = {});

struct HazardRow {
    std::string attribute;
    std::string level;
    std::size_t count = 0;
    bool is_reference = false;
    double hazard_ratio = 1.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double p_value = 1.0;
};

// One row per level of every attribute in the fit, reference rows first
// within each attribute with hazard ratio pinned at 1.
std::vector<HazardRow> hazard_table(const CoxFit& fit, const DesignMatrix& dm,
                                    const Cohort& cohort);

void write_hazard_table_csv(std::ostream& out, const std::vector<HazardRow>& rows);

}  // namespace survmine

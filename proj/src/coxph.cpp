#include "survmine/coxph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "survmine/stats.hpp"

namespace survmine {

const char* attribute_name(Attribute a) {
    switch (a) {
        case Attribute::major_releases: return "major_releases";
        case Attribute::host: return "host";
        case Attribute::multi_repo: return "multi_repo";
        case Attribute::high_author_count: return "high_author_count";
        case Attribute::high_rev_frequency: return "high_rev_frequency";
    }
    return "?";
}

std::optional<Attribute> parse_attribute(std::string_view token) {
    for (Attribute a : all_attributes()) {
        if (token == attribute_name(a)) return a;
    }
    return std::nullopt;
}

std::vector<Attribute> all_attributes() {
    return {Attribute::major_releases, Attribute::host, Attribute::multi_repo,
            Attribute::high_author_count, Attribute::high_rev_frequency};
}

std::string attribute_level(const ProjectRecord& r, Attribute attribute) {
    switch (attribute) {
        case Attribute::major_releases: return r.has_major_release ? "true" : "false";
        case Attribute::host: return host_name(r.host);
        case Attribute::multi_repo: return r.multi_repo ? "true" : "false";
        case Attribute::high_author_count: return r.high_author_count ? "true" : "false";
        case Attribute::high_rev_frequency: return r.high_rev_frequency ? "true" : "false";
    }
    return "?";
}

std::vector<std::string> attribute_levels(Attribute attribute) {
    switch (attribute) {
        case Attribute::host: return {"github", "pypi", "debian"};
        case Attribute::high_rev_frequency: return {"false", "true"};
        default: return {"true", "false"};
    }
}

std::string reference_level(Attribute attribute) { return attribute_levels(attribute)[0]; }

std::size_t DesignMatrix::event_count() const {
    return static_cast<std::size_t>(std::count(events.begin(), events.end(), 1));
}

DesignMatrix encode_covariates(const Cohort& cohort, const std::vector<Attribute>& formula) {
    DesignMatrix dm;
    dm.n = cohort.records.size();

    // Observed levels decide the columns; the reference level is dropped.
    for (Attribute a : formula) {
        std::map<std::string, std::size_t> observed;
        for (const auto& r : cohort.records) ++observed[attribute_level(r, a)];
        if (observed.size() < 2) {
            throw CoxError(std::string("attribute '") + attribute_name(a) +
                           "' has a single observed level, non-identifiable");
        }
        std::string ref = reference_level(a);
        if (!observed.count(ref)) ref = attribute_levels(a)[1];
        for (const auto& level : attribute_levels(a)) {
            if (level == ref || !observed.count(level)) continue;
            dm.coding.push_back({a, level, ref});
        }
    }
    dm.p = dm.coding.size();

    dm.durations.reserve(dm.n);
    dm.events.reserve(dm.n);
    dm.covariates.assign(dm.n * dm.p, 0.0);
    for (std::size_t i = 0; i < dm.n; ++i) {
        const auto& r = cohort.records[i];
        dm.durations.push_back(r.duration_months);
        dm.events.push_back(r.censored ? 0 : 1);
        for (std::size_t j = 0; j < dm.p; ++j) {
            if (attribute_level(r, dm.coding[j].attribute) == dm.coding[j].level) {
                dm.covariates[i * dm.p + j] = 1.0;
            }
        }
    }
    return dm;
}

namespace {

// Shared walk over the risk sets: times descending, risk sums accumulated
// incrementally, tied deaths handled per `ties`. The score/information
// computation can be switched off for plain likelihood evaluation.
PartialLikelihoodDerivatives evaluate(std::span<const double> beta, const DesignMatrix& dm,
                                      TieMethod ties, bool with_derivatives) {
    const std::size_t n = dm.n;
    const std::size_t p = dm.p;
    if (beta.size() != p) throw CoxError("beta dimension does not match design matrix");
    for (double b : beta) {
        if (!std::isfinite(b)) throw CoxError("non-finite beta");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return dm.durations[a] > dm.durations[b];
    });

    std::vector<double> risk(n);  // exp(x'beta) per subject
    std::vector<double> eta(n);
    for (std::size_t i = 0; i < n; ++i) {
        double e = 0.0;
        for (std::size_t j = 0; j < p; ++j) e += beta[j] * dm.x(i, j);
        eta[i] = e;
        risk[i] = std::exp(e);
        if (!std::isfinite(risk[i])) throw CoxError("overflow in relative risk");
    }

    PartialLikelihoodDerivatives out;
    out.score.assign(p, 0.0);
    out.information.assign(p * p, 0.0);

    double denom = 0.0;
    std::vector<double> a(p, 0.0);
    std::vector<double> cmat(p * p, 0.0);
    std::vector<double> a_adj(p), xbar(p);

    std::size_t k = 0;
    while (k < n) {
        const double t = dm.durations[order[k]];
        double denom_dead = 0.0, dead = 0.0;
        std::vector<double> a_dead(p, 0.0);
        std::vector<double> c_dead(p * p, 0.0);
        // All subjects tied at t enter the risk set before the deaths at t
        // are scored.
        while (k < n && dm.durations[order[k]] == t) {
            const std::size_t i = order[k];
            const double r = risk[i];
            denom += r;
            for (std::size_t u = 0; u < p; ++u) {
                const double xu = dm.x(i, u);
                a[u] += r * xu;
                if (with_derivatives) {
                    for (std::size_t v = 0; v <= u; ++v) {
                        cmat[u * p + v] += r * xu * dm.x(i, v);
                    }
                }
            }
            if (dm.events[i]) {
                dead += 1.0;
                denom_dead += r;
                out.loglik += eta[i];
                for (std::size_t u = 0; u < p; ++u) {
                    const double xu = dm.x(i, u);
                    a_dead[u] += r * xu;
                    if (with_derivatives) out.score[u] += xu;
                    if (with_derivatives) {
                        for (std::size_t v = 0; v <= u; ++v) {
                            c_dead[u * p + v] += r * xu * dm.x(i, v);
                        }
                    }
                }
            }
            ++k;
        }
        if (dead == 0.0) continue;

        const int d = static_cast<int>(dead);
        for (int l = 0; l < d; ++l) {
            // Efron thins the death mass uniformly across the tied deaths;
            // Breslow keeps the full risk set for every one of them.
            const double f = ties == TieMethod::efron ? static_cast<double>(l) / dead : 0.0;
            const double dl = denom - f * denom_dead;
            out.loglik -= std::log(dl);
            if (!with_derivatives) continue;
            for (std::size_t u = 0; u < p; ++u) {
                a_adj[u] = a[u] - f * a_dead[u];
                xbar[u] = a_adj[u] / dl;
                out.score[u] -= xbar[u];
            }
            for (std::size_t u = 0; u < p; ++u) {
                for (std::size_t v = 0; v <= u; ++v) {
                    const double c = cmat[u * p + v] - f * c_dead[u * p + v];
                    out.information[u * p + v] += c / dl - xbar[u] * xbar[v];
                }
            }
        }
    }

    if (with_derivatives) {
        for (std::size_t u = 0; u < p; ++u) {
            for (std::size_t v = u + 1; v < p; ++v) {
                out.information[u * p + v] = out.information[v * p + u];
            }
        }
    }
    return out;
}

// Cholesky factorization in place; returns false when not positive definite.
bool cholesky(std::vector<double>& m, std::size_t p) {
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
            double sum = m[i * p + j];
            for (std::size_t s = 0; s < j; ++s) sum -= m[i * p + s] * m[j * p + s];
            if (i == j) {
                if (!(sum > 0.0)) return false;
                m[i * p + i] = std::sqrt(sum);
            } else {
                m[i * p + j] = sum / m[j * p + j];
            }
        }
    }
    return true;
}

// Solve (L L') x = b given the Cholesky factor L in the lower triangle.
std::vector<double> cholesky_solve(const std::vector<double>& chol, std::size_t p,
                                   std::span<const double> b) {
    std::vector<double> y(p);
    for (std::size_t i = 0; i < p; ++i) {
        double sum = b[i];
        for (std::size_t s = 0; s < i; ++s) sum -= chol[i * p + s] * y[s];
        y[i] = sum / chol[i * p + i];
    }
    for (std::size_t ii = p; ii-- > 0;) {
        double sum = y[ii];
        for (std::size_t s = ii + 1; s < p; ++s) sum -= chol[s * p + ii] * y[s];
        y[ii] = sum / chol[ii * p + ii];
    }
    return y;
}

std::vector<double> cholesky_inverse(const std::vector<double>& chol, std::size_t p) {
    std::vector<double> inv(p * p, 0.0);
    std::vector<double> e(p, 0.0);
    for (std::size_t j = 0; j < p; ++j) {
        std::fill(e.begin(), e.end(), 0.0);
        e[j] = 1.0;
        auto col = cholesky_solve(chol, p, e);
        for (std::size_t i = 0; i < p; ++i) inv[i * p + j] = col[i];
    }
    return inv;
}

}  // namespace

double partial_log_likelihood(std::span<const double> beta, const DesignMatrix& dm,
                              TieMethod ties) {
    return evaluate(beta, dm, ties, false).loglik;
}

PartialLikelihoodDerivatives partial_loglik_derivatives(std::span<const double> beta,
                                                        const DesignMatrix& dm,
                                                        TieMethod ties) {
    return evaluate(beta, dm, ties, true);
}

double CoxFit::standard_error(std::size_t j) const {
    return std::sqrt(covariance[j * beta.size() + j]);
}

CoxFit fit_cox(const DesignMatrix& dm, const CoxOptions& options) {
    const std::size_t p = dm.p;
    if (dm.event_count() == 0) throw CoxError("fit_cox: no events in the design matrix");
    for (std::size_t j = 0; j < p; ++j) {
        const double first = dm.x(0, j);
        bool constant = true;
        for (std::size_t i = 1; i < dm.n && constant; ++i) {
            if (dm.x(i, j) != first) constant = false;
        }
        if (constant) {
            throw CoxError("fit_cox: covariate column " + std::to_string(j) +
                           " is constant, non-identifiable");
        }
    }

    CoxFit fit;
    fit.coding = dm.coding;
    fit.beta.assign(p, 0.0);

    auto state = partial_loglik_derivatives(fit.beta, dm, options.ties);
    double ll = state.loglik;
    bool converged = false;
    int iter = 0;
    for (; iter < options.max_iter && !converged; ++iter) {
        auto chol = state.information;
        if (!cholesky(chol, p)) {
            throw CoxError(
                "fit_cox: singular information matrix (monotone likelihood / separation)");
        }
        auto step = cholesky_solve(chol, p, state.score);

        std::vector<double> candidate(p);
        double ll_new = -std::numeric_limits<double>::infinity();
        for (int halving = 0; halving <= 10; ++halving) {
            for (std::size_t j = 0; j < p; ++j) candidate[j] = fit.beta[j] + step[j];
            ll_new = partial_log_likelihood(candidate, dm, options.ties);
            if (ll_new >= ll || halving == 10) break;
            for (auto& s : step) s *= 0.5;
        }
        fit.beta = candidate;
        state = partial_loglik_derivatives(fit.beta, dm, options.ties);

        double max_score = 0.0;
        for (double s : state.score) max_score = std::max(max_score, std::fabs(s));
        const double rel_change = std::fabs(ll_new - ll) / (std::fabs(ll) + 1e-4);
        ll = state.loglik;
        if (max_score < options.tol && rel_change < options.tol) converged = true;
    }

    fit.iterations = iter;
    fit.converged = converged;
    fit.log_likelihood = ll;

    auto chol = state.information;
    if (!cholesky(chol, p)) {
        throw CoxError(
            "fit_cox: singular information matrix (monotone likelihood / separation)");
    }
    fit.covariance = cholesky_inverse(chol, p);

    const double z975 = stats::normal_quantile(0.975);
    fit.hazard_ratios.resize(p);
    fit.ci_lower.resize(p);
    fit.ci_upper.resize(p);
    fit.p_values.resize(p);
    for (std::size_t j = 0; j < p; ++j) {
        const double se = std::sqrt(fit.covariance[j * p + j]);
        fit.hazard_ratios[j] = std::exp(fit.beta[j]);
        fit.ci_lower[j] = std::exp(fit.beta[j] - z975 * se);
        fit.ci_upper[j] = std::exp(fit.beta[j] + z975 * se);
        fit.p_values[j] = stats::two_sided_p_from_z(fit.beta[j] / se);
    }
    return fit;
}

std::vector<HazardRow> hazard_table(const CoxFit& fit, const DesignMatrix& dm,
                                    const Cohort& cohort) {
    if (!fit.converged) throw CoxError("hazard_table: fit did not converge");

    std::map<std::string, std::map<std::string, std::size_t>> counts;
    for (const auto& r : cohort.records) {
        for (Attribute a : all_attributes()) {
            ++counts[attribute_name(a)][attribute_level(r, a)];
        }
    }

    std::vector<HazardRow> rows;
    std::optional<Attribute> current;
    for (std::size_t j = 0; j < fit.coding.size(); ++j) {
        const auto& col = fit.coding[j];
        if (!current || *current != col.attribute) {
            current = col.attribute;
            HazardRow ref;
            ref.attribute = attribute_name(col.attribute);
            ref.level = col.reference;
            ref.count = counts[ref.attribute][ref.level];
            ref.is_reference = true;
            ref.hazard_ratio = 1.0;
            rows.push_back(std::move(ref));
        }
        HazardRow row;
        row.attribute = attribute_name(col.attribute);
        row.level = col.level;
        row.count = counts[row.attribute][row.level];
        row.hazard_ratio = fit.hazard_ratios[j];
        row.ci_low = fit.ci_lower[j];
        row.ci_high = fit.ci_upper[j];
        row.p_value = fit.p_values[j];
        rows.push_back(std::move(row));
    }
    return rows;
}

void write_hazard_table_csv(std::ostream& out, const std::vector<HazardRow>& rows) {
    auto put = [&out](double v) {
        char buf[64];
        auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
        out << std::string_view(buf, ptr - buf);
    };
    out << "attribute,level,n,hazard_ratio,ci_low,ci_high,p_value\n";
    for (const auto& r : rows) {
        out << r.attribute << ',' << r.level << ',' << r.count << ',';
        put(r.hazard_ratio);
        if (r.is_reference) {
            out << ",,,\n";
            continue;
        }
        out << ',';
        put(r.ci_low);
        out << ',';
        put(r.ci_high);
        out << ',';
        put(r.p_value);
        out << '\n';
    }
}

}  // namespace survmine

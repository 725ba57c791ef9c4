#pragma once

#include "pcbff/pcstats.hpp"

namespace pcbff::densities {

/// Normal moment prior π_nm(λ | τ², ν) ∝ |λ|^{2ν} exp(−λ²/(2τ²)).
/// Vanishes at λ = 0 and has modes at ±√(2ν)·τ.
struct NormalMomentPrior {
    double tau2 = 1.0;
    double nu = 1.0;
};

/// Inverse moment prior π_I(θ | θ₀, r, ν) with scale τ.
struct InverseMomentPrior {
    double theta0 = 0.0;
    double r_order = 1.0;
    double nu = 1.0;
    double tau = 1.0;
};

/// Which constants the non-null density of the sample partial correlation uses.
///
/// `exact` is Hotelling's density of a sample correlation with effective
/// sample size n − p + 1, so that ρ = 0 gives the central t on n − p − 1
/// degrees of freedom. `reference` uses effective size n − p for ρ ≠ 0 and
/// switches to the central t at ρ = 0.
enum class DensityForm { exact, reference };

void validate(const NormalMomentPrior& prior);
void validate(const InverseMomentPrior& prior);

/// Log density of the normal moment prior; −∞ at λ = 0.
[[nodiscard]] double nm_prior_logpdf(double lambda, const NormalMomentPrior& prior);

/// Log density of the inverse moment prior; −∞ at θ = θ₀.
[[nodiscard]] double imom_prior_logpdf(double theta, const InverseMomentPrior& prior);

/**
 * @brief Sampling density of r* and of t₁ for a fixed residual degrees of freedom.
 *
 * Holds the df-dependent constants so that repeated evaluation (quadrature
 * over λ, simulation studies) only pays for the ρ- and r-dependent terms.
 * Immutable after construction and safe to share across threads.
 */
class PartialCorrDensity {
public:
    /// @throws DomainError if df < 2
    explicit PartialCorrDensity(int df, DensityForm form = DensityForm::exact);

    [[nodiscard]] int df() const { return df_; }
    [[nodiscard]] DensityForm form() const { return form_; }

    /// log f(r* | ρ*). Requires |r| < 1, |ρ| < 1 and |ρ·r| ≤ 1 − 1e-12.
    [[nodiscard]] double log_r(double r, double rho) const;

    /// log f(t₁ | λ) via r = v(t₁), ρ = u(λ) and the Jacobian df/(df + t²)^{3/2}.
    [[nodiscard]] double log_t(double t, double lambda) const;

    /// Terms of log f(t₁ | λ) that depend on t only (r, log(1−r²) and the Jacobian).
    struct PreparedStatistic {
        double t = 0.0;
        double r = 0.0;
        double log_terms = 0.0;
    };
    /// Terms that depend on λ only.
    struct PreparedNode {
        double lambda = 0.0;
        double rho = 0.0;
        double log_terms = 0.0;
    };

    [[nodiscard]] PreparedStatistic prepare_statistic(double t) const;
    [[nodiscard]] PreparedNode prepare_node(double lambda) const;

    /// log f(t₁ | λ) from prepared pieces; equal to log_t(stat.t, node.lambda).
    [[nodiscard]] double log_t(const PreparedStatistic& stat, const PreparedNode& node) const;

private:
    [[nodiscard]] double log_kernel(double rho, double r) const;

    int df_;
    DensityForm form_;
    double big_n_;       // effective sample size
    double log_const_;
    double exp_rho_;     // multiplies log(1 − ρ²)
    double exp_r_;       // multiplies log(1 − r²)
    double exp_cross_;   // multiplies log(1 − ρr)
    double hyp_c_;
    double log_df_;
};

/// log f(r* | ρ*) for a dataset with n observations and p predictors.
[[nodiscard]] double r_cond_logdensity(pcstats::PartialCorr r, pcstats::PartialCorr rho, int n,
                                       int p, DensityForm form = DensityForm::exact);

/// log f(t₁ | λ) for a dataset with n observations and p predictors.
[[nodiscard]] double t_cond_logdensity(double t, double lambda, int n, int p,
                                       DensityForm form = DensityForm::exact);

/**
 * @brief Prior mass that π_nm on λ induces on an interval of ρ* = u(λ).
 *
 * The ρ*-interval (lo, hi) is mapped to a λ-interval, and the mass of each
 * signed branch follows from the Gamma(ν + ½, 2τ²) law of λ².
 *
 * @throws DomainError unless −1 ≤ lo < hi ≤ 1
 */
[[nodiscard]] double prior_mass_rho_interval(const NormalMomentPrior& prior, int n, int p,
                                             double lo, double hi);

}  // namespace pcbff::densities

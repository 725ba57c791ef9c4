#pragma once

#include "pcbff/pcstats.hpp"

#include <cstdint>

namespace pcbff::baselines {

/**
 * @brief Log Bayes factor for a partial correlation under a stretched-beta(α) prior.
 *
 *     log BF₁₀ = ln B(½, α + m/2) − ln B(½, α) + ln ₂F₁(m/2, m/2; α + (n − k)/2; r²),
 *
 * with m = n − k − 1 and k the number of conditioning variables (k = 0 is the
 * ordinary Pearson correlation test).
 *
 * @throws DomainError if |r| ≥ 1, n − k − 1 < 1 or α ≤ 0
 */
[[nodiscard]] double stretched_beta_log_bf(pcstats::PartialCorr r, int n, int k, double alpha);

/// Inputs of the Monte Carlo mixture-of-g-priors Bayes factor comparing a
/// regression with p1 predictors (R² = r2_full) to one with p0 (R² = r2_null).
struct JzsInput {
    double r2_null = 0.0;
    double r2_full = 0.0;
    int n = 0;
    int p0 = 0;
    int p1 = 1;
    int mc_samples = 10000;
    std::uint64_t seed = 1;
};

struct JzsEstimate {
    double log_bf = 0.0;
    /// Delta-method Monte Carlo standard error of log_bf.
    double std_error = 0.0;
};

/// Minimum Monte Carlo sample size accepted by jzs_estimate.
inline constexpr int kMinJzsSamples = 1000;

/**
 * Monte Carlo estimate of log(E[h(g; R₁², p1)] / E[h(g; R₀², p0)]), with
 *
 *     h(g; R², p) = (1 + g)^{−(n − 1 − p)/2} (1 + (1 − R²) g)^{−(n − 1)/2},
 *
 * g ~ Gamma(shape ½, scale n/2), and the same draws for both expectations.
 * Deterministic for a given (seed, mc_samples).
 *
 * @throws DomainError on invalid inputs
 */
[[nodiscard]] JzsEstimate jzs_estimate(const JzsInput& input);

[[nodiscard]] double jzs_log_bf(const JzsInput& input);

/// log h(g; R², p) for the integrand above.
[[nodiscard]] double jzs_log_integrand(double g, double r2, int p, int n);

}  // namespace pcbff::baselines

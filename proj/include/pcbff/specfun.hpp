#pragma once

#include <cstdint>

namespace pcbff::specfun {

/// ln Γ(x) for x > 0. Throws DomainError otherwise.
[[nodiscard]] double log_gamma(double x);

/// ln Γ(a) − ln Γ(a + δ) without cancellation for large a.
[[nodiscard]] double log_gamma_ratio(double a, double delta);

/// ln B(a, b) = ln Γ(a) + ln Γ(b) − ln Γ(a + b).
[[nodiscard]] double log_beta(double a, double b);

struct Hyp2f1Params {
    double a = 0.0;
    double b = 0.0;
    double c = 1.0;
    double x = 0.0;
};

/// Iteration cap for the ₂F₁ power series.
inline constexpr int kHyp2f1MaxTerms = 10000;

/// Relative term size at which the ₂F₁ series is truncated.
inline constexpr double kHyp2f1Tolerance = 1e-15;

/**
 * @brief Gaussian hypergeometric function ₂F₁(a, b; c; x) for real x < 1.
 *
 * For 0 ≤ x < 1 the power series is summed directly. For x < 0 the Pfaff
 * transformation
 *
 *     ₂F₁(a, b; c; x) = (1 − x)^(−b) ₂F₁(c − a, b; c; x / (x − 1))
 *
 * maps the argument into [0, 1) before summing.
 *
 * @throws DomainError if x ≥ 1, x is not finite, or c is zero or a negative integer
 * @throws NumericalError if the series has not converged after kHyp2f1MaxTerms terms
 */
[[nodiscard]] double gauss_2f1(const Hyp2f1Params& p);

/// Direct power series for 0 ≤ x < 1, no transformation applied.
[[nodiscard]] double hyp2f1_series(double a, double b, double c, double x);

/// Floor applied to ₂F₁ values that feed a logarithm inside the densities.
inline constexpr double kHyp2f1Floor = 1e-15;

/// Returns max(value, kHyp2f1Floor), counting how often the floor is hit
/// (non-finite values are floored too).
[[nodiscard]] double clamp_hyp2f1(double value) noexcept;

/// Number of times clamp_hyp2f1 has replaced a value since process start.
[[nodiscard]] std::uint64_t hyp2f1_clamp_count() noexcept;

/// Log density of the central Student t distribution.
[[nodiscard]] double student_t_logpdf(double t, double df);

/// Lower-tail probability P(T ≤ t) of the central Student t distribution.
[[nodiscard]] double student_t_cdf(double t, double df);

/// Two-sided p-value 2·P(T ≥ |t|), evaluated without cancellation.
[[nodiscard]] double student_t_two_sided_p(double t, double df);

/// Regularized lower incomplete gamma P(shape, x / scale).
[[nodiscard]] double gamma_cdf(double x, double shape, double scale);

/**
 * @brief Quantile of the Gamma(shape, scale) distribution.
 *
 * Safeguarded Newton iteration on gamma_cdf inside a bracket that is kept
 * valid at every step, so it degrades to bisection rather than diverging.
 * Relative accuracy is about 1e-12.
 */
[[nodiscard]] double gamma_quantile(double q, double shape, double scale);

}  // namespace pcbff::specfun

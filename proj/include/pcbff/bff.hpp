#pragma once

#include "pcbff/densities.hpp"
#include "pcbff/pcstats.hpp"

#include <span>
#include <string_view>
#include <vector>

namespace pcbff::bff {

/// How the λ-integral over the symmetric prior is discretized.
///
/// `symmetric` averages f(t|λᵢ) and f(t|−λᵢ) and integrates over the whole
/// real line. `positive` uses only +λᵢ; this is
/// the Bayes factor for a prior restricted to λ > 0.
enum class Branch { symmetric, positive };

[[nodiscard]] std::string_view to_string(Branch branch);
[[nodiscard]] Branch parse_branch(std::string_view text);

inline constexpr int kDefaultBins = 10000;

struct QuadratureOptions {
    int bins = kDefaultBins;
    Branch branch = Branch::symmetric;
    densities::DensityForm form = densities::DensityForm::exact;
    unsigned threads = 0;  ///< 0 = hardware concurrency; only used by bff_curve
};

struct BffPoint {
    double rho_mode = 0.0;
    double omega = 0.0;
    double tau2 = 0.0;
    double log_bf10 = 0.0;
};

struct BffCurve {
    pcstats::TestSummary summary;
    double nu = 1.0;
    std::vector<BffPoint> points;
    int quadrature_bins = kDefaultBins;
    Branch branch = Branch::symmetric;
    densities::DensityForm form = densities::DensityForm::exact;
};

struct BffMaximum {
    double rho_mode = 0.0;
    double omega = 0.0;
    double log_bf = 0.0;
};

/// τ² = (n − p − 1)·ω² / (2ν): places the prior modes ±√(2ν)τ at √(n − p − 1)·ω.
/// @throws DomainError if ω = 0, ν < 1 or n − p − 1 < 1
[[nodiscard]] double tau2_from_omega(pcstats::EffectSize omega, int n, int p, double nu);

/**
 * @brief Quadrature nodes for the marginal likelihood m₁(t | τ², ν).
 *
 * λ² under π_nm(·|τ², ν) is Gamma(ν + ½, scale 2τ²). With B bins the nodes are
 * λᵢ = √Q((i − ½)/B), Q the Gamma quantile, and every node carries weight 1/B.
 * The nodes depend only on (df, prior, bins), so one instance can serve many
 * statistics; log_m1 is const and thread-safe.
 */
class MarginalQuadrature {
public:
    MarginalQuadrature(int df, const densities::NormalMomentPrior& prior,
                       const QuadratureOptions& options = {});

    /// log m₁(t). Throws NumericalError naming λ if the integrand is not finite.
    [[nodiscard]] double log_m1(double t) const;

    [[nodiscard]] const densities::PartialCorrDensity& density() const { return density_; }
    [[nodiscard]] int bins() const { return static_cast<int>(nodes_.size()); }

private:
    densities::PartialCorrDensity density_;
    Branch branch_;
    std::vector<densities::PartialCorrDensity::PreparedNode> nodes_;
    std::vector<densities::PartialCorrDensity::PreparedNode> mirrored_;
};

/// log m₁(t₁ | τ², ν) = log ∫ f(t₁|λ) π_nm(λ|τ², ν) dλ.
[[nodiscard]] double log_marginal_m1(const pcstats::TestSummary& summary,
                                     const densities::NormalMomentPrior& prior,
                                     const QuadratureOptions& options = {});

/// log BF₁₀ for the prior whose modes sit at the effect size implied by
/// rho_mode. Exactly 0 when rho_mode = 0.
[[nodiscard]] double log_bf10(const pcstats::TestSummary& summary, double rho_mode, double nu,
                              const QuadratureOptions& options = {});

/// Evenly spaced ρ* grid; the default matches a 199-point sweep over [−0.99, 0.99].
[[nodiscard]] std::vector<double> default_rho_grid(int count = 199, double lo = -0.99,
                                                   double hi = 0.99);

/// One BffPoint per grid value, evaluated in parallel; results do not depend
/// on the thread count.
[[nodiscard]] BffCurve bff_curve(const pcstats::TestSummary& summary,
                                 std::span<const double> rho_grid, double nu,
                                 const QuadratureOptions& options = {});

/// Largest log BF over the points with ω ≥ omega_min; ties go to the smaller ω.
/// @throws DomainError if no point satisfies the restriction
[[nodiscard]] BffMaximum max_bff(const BffCurve& curve, double omega_min);

/// ρ* values where the curve crosses `level`, by linear interpolation between
/// neighbouring grid points (grid order).
[[nodiscard]] std::vector<double> find_crossings(const BffCurve& curve, double level);

/// log f(t₁|λ) − log f(t₁|0): the Bayes factor of a point alternative.
[[nodiscard]] double true_log_bf(const pcstats::TestSummary& summary, double lambda,
                                 densities::DensityForm form = densities::DensityForm::exact);

enum class Sidedness { two_sided, positive };

/**
 * @brief Closed-form BF₁₀ for a noncentral-t statistic under a normal moment prior.
 *
 * H₀: t ~ T_μ(0) against H₁: t | λ ~ T_μ(λ), λ ~ π_nm(τ², ν). With
 * y = τt / √((μ + t²)(1 + τ²)) and c = (1 + τ²)^{−(ν + ½)}:
 *
 *     two-sided:  c · ₂F₁((μ+1)/2, ν+½; ½; y²)
 *     positive:   two-sided + 2cy · Γ(μ/2+1)/Γ((μ+1)/2) · Γ(ν+1)/Γ(ν+½) · ₂F₁(μ/2+1, ν+1; 3/2; y²)
 *
 * The odd term vanishes for the symmetric prior; `positive` is the prior
 * restricted to λ > 0.
 */
[[nodiscard]] double closed_form_t_bf(double t, double df_mu, double tau2, double nu,
                                      Sidedness sides = Sidedness::two_sided);

}  // namespace pcbff::bff

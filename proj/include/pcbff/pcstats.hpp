#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

namespace pcbff::pcstats {

/// Response vector, predictor matrix, and the predictor whose partial
/// correlation with the response is tested. All remaining predictor columns
/// form the conditioning set.
struct DataMatrix {
    Eigen::VectorXd y;
    Eigen::MatrixXd x;
    Eigen::Index target = 0;
    /// Optional, used only in error messages.
    std::vector<std::string> predictor_names;

    [[nodiscard]] int n() const { return static_cast<int>(y.size()); }
    [[nodiscard]] int p() const { return static_cast<int>(x.cols()); }
};

/// Summary statistics of the multivariate normal correlation model. Predictor
/// quantities are stored with the target predictor permuted into position 0.
struct SufficientStats {
    int n = 0;
    int p = 0;
    double gamma1_hat = 0.0;  ///< regression coefficient of the target predictor
    double xi112_hat = 0.0;   ///< residual variance of the target given the others
    double sigma2_hat = 0.0;  ///< residual variance, divisor n - p - 1
    Eigen::VectorXd beta_hat;  ///< (intercept, γ̂), length p + 1
    Eigen::VectorXd mu_hat;    ///< (mean of y, means of x), length p + 1
    double sigma11 = 0.0;
    Eigen::RowVectorXd sigma12;
    Eigen::MatrixXd sigma22;
};

struct PartialCorr {
    double value = 0.0;
};

struct EffectSize {
    double omega = 0.0;
};

struct TestSummary {
    double t1 = 0.0;
    int n = 0;
    int p = 0;

    [[nodiscard]] int df() const { return n - p - 1; }
};

/// Condition-number bound above which the predictor block is declared singular.
inline constexpr double kMaxConditionNumber = 1e12;

/**
 * @brief Least-squares fit and centered covariance blocks for one dataset.
 *
 * Requires n > p + 1 and a design [1 X] of full column rank. Rank is judged
 * on the centered, column-normalized predictors with a column-pivoted QR.
 *
 * @throws DomainError on shape mismatches or non-finite values
 * @throws ModelError if the design is rank deficient (names the offending columns)
 */
[[nodiscard]] SufficientStats sufficient_stats(const DataMatrix& data);

/// Maximum likelihood estimate r* of the partial correlation.
/// Throws ModelError when the target predictor has no variation left after
/// conditioning (xi112_hat == 0).
[[nodiscard]] PartialCorr partial_corr_mle(const SufficientStats& stats);

/// t₁ = √(n − p − 1)·r / √(1 − r²). Throws DomainError if |r| ≥ 1.
[[nodiscard]] TestSummary t_statistic(PartialCorr r, int n, int p);

/// Inverse of t_statistic: v(t) = t / √(t² + df).
[[nodiscard]] PartialCorr r_from_t(double t, int df);

[[nodiscard]] EffectSize omega_from_rho(PartialCorr rho);
[[nodiscard]] PartialCorr rho_from_omega(EffectSize omega);

/// Non-centrality λ = √(n − p − 1)·ω.
[[nodiscard]] double lambda_from_omega(EffectSize omega, int n, int p);

/// u(λ) = λ / √(df + λ²), the partial correlation implied by λ.
[[nodiscard]] PartialCorr rho_from_lambda(double lambda, int df);

/// Fisher's z = atanh(r). Throws DomainError if |r| ≥ 1.
[[nodiscard]] double fisher_z(PartialCorr r);

}  // namespace pcbff::pcstats

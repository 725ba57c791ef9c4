#include "pcbff/densities.hpp"

#include "pcbff/error.hpp"
#include "pcbff/specfun.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace pcbff::densities {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kMaxRhoR = 1.0 - 1e-12;

int df_of(int n, int p) {
    return n - p - 1;
}

}  // namespace

void validate(const NormalMomentPrior& prior) {
    if (!(prior.tau2 > 0.0) || !std::isfinite(prior.tau2)) {
        throw DomainError("normal moment prior: tau2 must be positive and finite");
    }
    if (!(prior.nu >= 1.0) || !std::isfinite(prior.nu)) {
        throw DomainError("normal moment prior: nu must be >= 1");
    }
}

void validate(const InverseMomentPrior& prior) {
    if (!(prior.r_order > 0.0) || !(prior.nu > 0.0) || !(prior.tau > 0.0) ||
        !std::isfinite(prior.theta0)) {
        throw DomainError("inverse moment prior: r, nu and tau must be positive");
    }
}

double nm_prior_logpdf(double lambda, const NormalMomentPrior& prior) {
    validate(prior);
    if (lambda == 0.0) {
        return kNegInf;
    }
    return 2.0 * prior.nu * std::log(std::abs(lambda)) -
           (prior.nu + 0.5) * std::log(2.0 * prior.tau2) - specfun::log_gamma(prior.nu + 0.5) -
           lambda * lambda / (2.0 * prior.tau2);
}

double imom_prior_logpdf(double theta, const InverseMomentPrior& prior) {
    validate(prior);
    const double d2 = (theta - prior.theta0) * (theta - prior.theta0);
    if (d2 == 0.0) {
        return kNegInf;
    }
    return std::log(prior.r_order) + 0.5 * prior.nu * std::log(prior.tau) -
           specfun::log_gamma(prior.nu / (2.0 * prior.r_order)) -
           0.5 * (prior.nu + 1.0) * std::log(d2) - std::pow(d2 / prior.tau, -prior.r_order);
}

PartialCorrDensity::PartialCorrDensity(int df, DensityForm form) : df_(df), form_(form) {
    if (df < 2) {
        throw DomainError("partial correlation density requires n - p - 1 >= 2, got " +
                          std::to_string(df));
    }
    big_n_ = form == DensityForm::exact ? df + 2.0 : df + 1.0;
    log_const_ = std::log(big_n_ - 2.0) + specfun::log_gamma_ratio(big_n_ - 1.0, 0.5) -
                 0.5 * std::log(2.0 * std::numbers::pi);
    exp_rho_ = 0.5 * (big_n_ - 1.0);
    exp_r_ = 0.5 * (big_n_ - 4.0);
    exp_cross_ = -(big_n_ - 1.5);
    hyp_c_ = big_n_ - 0.5;
    log_df_ = std::log(static_cast<double>(df));
}

double PartialCorrDensity::log_kernel(double rho, double r) const {
    const double rho_r = rho * r;
    if (std::abs(rho_r) > kMaxRhoR) {
        std::ostringstream msg;
        msg << "partial correlation density: |rho*r| = " << std::abs(rho_r)
            << " is too close to 1 (rho=" << rho << ", r=" << r << ")";
        throw DomainError(msg.str());
    }
    const double hyp = specfun::clamp_hyp2f1(
        specfun::gauss_2f1({0.5, 0.5, hyp_c_, 0.5 * (1.0 + rho_r)}));
    return exp_cross_ * std::log1p(-rho_r) + std::log(hyp);
}

double PartialCorrDensity::log_r(double r, double rho) const {
    if (!(std::abs(r) < 1.0) || !(std::abs(rho) < 1.0)) {
        std::ostringstream msg;
        msg << "partial correlation density: need |r| < 1 and |rho| < 1 (r=" << r
            << ", rho=" << rho << ")";
        throw DomainError(msg.str());
    }
    const double log1m_r2 = std::log1p(-r * r);
    if (form_ == DensityForm::reference && rho == 0.0) {
        const double t = r * std::sqrt(static_cast<double>(df_)) / std::sqrt(1.0 - r * r);
        return specfun::student_t_logpdf(t, df_) + 0.5 * log_df_ - 1.5 * log1m_r2;
    }
    return log_const_ + exp_rho_ * std::log1p(-rho * rho) + exp_r_ * log1m_r2 +
           log_kernel(rho, r);
}

PartialCorrDensity::PreparedStatistic PartialCorrDensity::prepare_statistic(double t) const {
    if (!std::isfinite(t)) {
        throw DomainError("partial correlation density: t must be finite");
    }
    const double denom = df_ + t * t;
    // 1 − r² = df / (df + t²), written without cancellation.
    const double log1m_r2 = -std::log1p(t * t / df_);
    PreparedStatistic s;
    s.t = t;
    s.r = t / std::sqrt(denom);
    s.log_terms = (exp_r_ + 1.5) * log1m_r2 - 0.5 * log_df_;
    return s;
}

PartialCorrDensity::PreparedNode PartialCorrDensity::prepare_node(double lambda) const {
    if (!std::isfinite(lambda)) {
        throw DomainError("partial correlation density: lambda must be finite");
    }
    const double denom = df_ + lambda * lambda;
    PreparedNode node;
    node.lambda = lambda;
    node.rho = lambda / std::sqrt(denom);
    node.log_terms = log_const_ - exp_rho_ * std::log1p(lambda * lambda / df_);
    return node;
}

double PartialCorrDensity::log_t(const PreparedStatistic& stat, const PreparedNode& node) const {
    if (form_ == DensityForm::reference && node.lambda == 0.0) {
        return specfun::student_t_logpdf(stat.t, df_);
    }
    return node.log_terms + stat.log_terms + log_kernel(node.rho, stat.r);
}

double PartialCorrDensity::log_t(double t, double lambda) const {
    return log_t(prepare_statistic(t), prepare_node(lambda));
}

double r_cond_logdensity(pcstats::PartialCorr r, pcstats::PartialCorr rho, int n, int p,
                         DensityForm form) {
    return PartialCorrDensity(df_of(n, p), form).log_r(r.value, rho.value);
}

double t_cond_logdensity(double t, double lambda, int n, int p, DensityForm form) {
    return PartialCorrDensity(df_of(n, p), form).log_t(t, lambda);
}

double prior_mass_rho_interval(const NormalMomentPrior& prior, int n, int p, double lo,
                               double hi) {
    validate(prior);
    if (!(lo >= -1.0 && lo < hi && hi <= 1.0)) {
        std::ostringstream msg;
        msg << "prior_mass_rho_interval: need -1 <= lo < hi <= 1 (lo=" << lo << ", hi=" << hi
            << ")";
        throw DomainError(msg.str());
    }
    const int df = df_of(n, p);
    if (df < 1) {
        throw DomainError("prior_mass_rho_interval: need n - p - 1 >= 1");
    }
    const double shape = prior.nu + 0.5;
    const double scale = 2.0 * prior.tau2;
    // P(λ ≤ u⁻¹(ρ)) for the symmetric prior.
    auto cdf_at_rho = [&](double rho) {
        if (rho <= -1.0) {
            return 0.0;
        }
        if (rho >= 1.0) {
            return 1.0;
        }
        const double lambda2 = df * rho * rho / (1.0 - rho * rho);
        const double half = 0.5 * specfun::gamma_cdf(lambda2, shape, scale);
        return rho < 0.0 ? 0.5 - half : 0.5 + half;
    };
    return cdf_at_rho(hi) - cdf_at_rho(lo);
}

}  // namespace pcbff::densities

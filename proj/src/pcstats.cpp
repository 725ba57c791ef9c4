#include "pcbff/pcstats.hpp"

#include "pcbff/error.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pcbff::pcstats {

namespace {

std::string column_label(const DataMatrix& data, Eigen::Index original_col) {
    if (static_cast<std::size_t>(original_col) < data.predictor_names.size()) {
        return data.predictor_names[static_cast<std::size_t>(original_col)];
    }
    return "x" + std::to_string(original_col + 1);
}

void validate(const DataMatrix& data) {
    const auto n = data.y.size();
    const auto p = data.x.cols();
    if (data.x.rows() != n) {
        throw DomainError("predictor matrix has " + std::to_string(data.x.rows()) +
                          " rows but the response has " + std::to_string(n));
    }
    if (p < 1) {
        throw DomainError("at least one predictor (the target) is required");
    }
    if (data.target < 0 || data.target >= p) {
        throw DomainError("target column index " + std::to_string(data.target) +
                          " out of range for " + std::to_string(p) + " predictors");
    }
    if (n <= p + 1) {
        throw DomainError("need n > p + 1 observations (n=" + std::to_string(n) +
                          ", p=" + std::to_string(p) + ")");
    }
    if (!data.y.allFinite() || !data.x.allFinite()) {
        throw DomainError("data contain non-finite values");
    }
}

}  // namespace

SufficientStats sufficient_stats(const DataMatrix& data) {
    validate(data);
    const Eigen::Index n = data.y.size();
    const Eigen::Index p = data.x.cols();

    // Target predictor first, the rest in their original order.
    std::vector<Eigen::Index> order;
    order.reserve(static_cast<std::size_t>(p));
    order.push_back(data.target);
    for (Eigen::Index j = 0; j < p; ++j) {
        if (j != data.target) {
            order.push_back(j);
        }
    }
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        x.col(j) = data.x.col(order[static_cast<std::size_t>(j)]);
    }

    const double y_mean = data.y.mean();
    const Eigen::RowVectorXd x_mean = x.colwise().mean();
    const Eigen::VectorXd yc = data.y.array() - y_mean;
    const Eigen::MatrixXd xc = x.rowwise() - x_mean;

    // Rank check on unit-norm centered columns, so it is insensitive to units.
    const Eigen::VectorXd norms = xc.colwise().norm();
    for (Eigen::Index j = 0; j < p; ++j) {
        if (!(norms(j) > 0.0)) {
            throw ModelError("design matrix is rank deficient: predictor '" +
                             column_label(data, order[static_cast<std::size_t>(j)]) +
                             "' is constant (collinear with the intercept)");
        }
    }
    const Eigen::MatrixXd xs = xc * norms.cwiseInverse().asDiagonal();
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> scaled_qr(xs);
    const Eigen::VectorXd rdiag = scaled_qr.matrixR().diagonal().cwiseAbs();
    const double rmax = rdiag(0);
    std::vector<std::string> offending;
    for (Eigen::Index k = 0; k < p; ++k) {
        if (!(rdiag(k) * kMaxConditionNumber > rmax)) {
            const Eigen::Index col = scaled_qr.colsPermutation().indices()(k);
            offending.push_back(column_label(data, order[static_cast<std::size_t>(col)]));
        }
    }
    if (!offending.empty()) {
        std::ostringstream msg;
        msg << "design matrix is rank deficient (condition number above "
            << kMaxConditionNumber << "); collinear predictor(s):";
        for (const auto& name : offending) {
            msg << " '" << name << "'";
        }
        throw ModelError(msg.str());
    }

    SufficientStats s;
    s.n = static_cast<int>(n);
    s.p = static_cast<int>(p);

    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(xc);
    const Eigen::VectorXd gamma = qr.solve(yc);
    const Eigen::VectorXd resid = yc - xc * gamma;
    const double df = static_cast<double>(n - p - 1);
    s.sigma2_hat = resid.squaredNorm() / df;
    s.gamma1_hat = gamma(0);

    s.beta_hat.resize(p + 1);
    s.beta_hat(0) = y_mean - x_mean.dot(gamma);
    s.beta_hat.tail(p) = gamma;

    s.mu_hat.resize(p + 1);
    s.mu_hat(0) = y_mean;
    s.mu_hat.tail(p) = x_mean.transpose();

    const double denom = static_cast<double>(n - 1);
    s.sigma11 = yc.squaredNorm() / denom;
    s.sigma12 = (yc.transpose() * xc) / denom;
    s.sigma22 = (xc.transpose() * xc) / denom;

    // Ξ̂₁₁.₂ as the residual variance of the target regressed on the others.
    if (p == 1) {
        s.xi112_hat = s.sigma22(0, 0);
    } else {
        const Eigen::MatrixXd others = xc.rightCols(p - 1);
        const Eigen::VectorXd coef = others.colPivHouseholderQr().solve(xc.col(0));
        s.xi112_hat = (xc.col(0) - others * coef).squaredNorm() / denom;
    }
    return s;
}

PartialCorr partial_corr_mle(const SufficientStats& stats) {
    if (!(stats.xi112_hat > 0.0)) {
        throw ModelError(
            "degenerate design: the target predictor is collinear with the conditioning set");
    }
    const double shrink = static_cast<double>(stats.n - stats.p - 1) / (stats.n - 1);
    const double signal = stats.gamma1_hat * stats.gamma1_hat * stats.xi112_hat;
    const double denom = std::sqrt(shrink * std::max(stats.sigma2_hat, 0.0) + signal);
    if (!(denom > 0.0)) {
        return PartialCorr{0.0};
    }
    const double r = stats.gamma1_hat * std::sqrt(stats.xi112_hat) / denom;
    return PartialCorr{std::clamp(r, -1.0, 1.0)};
}

TestSummary t_statistic(PartialCorr r, int n, int p) {
    const int df = n - p - 1;
    if (df < 1) {
        throw DomainError("t_statistic: need n - p - 1 >= 1");
    }
    if (!(std::abs(r.value) < 1.0)) {
        std::ostringstream msg;
        msg << "t statistic is infinite: |r*| = " << std::abs(r.value)
            << " (perfect conditional fit)";
        throw DomainError(msg.str());
    }
    const double t1 = std::sqrt(static_cast<double>(df)) * r.value / std::sqrt(1.0 - r.value * r.value);
    return TestSummary{t1, n, p};
}

PartialCorr r_from_t(double t, int df) {
    if (df < 1) {
        throw DomainError("r_from_t: df must be >= 1");
    }
    return PartialCorr{t / std::sqrt(t * t + df)};
}

EffectSize omega_from_rho(PartialCorr rho) {
    if (!(std::abs(rho.value) < 1.0)) {
        throw DomainError("omega_from_rho: |rho| must be < 1");
    }
    return EffectSize{rho.value / std::sqrt(1.0 - rho.value * rho.value)};
}

PartialCorr rho_from_omega(EffectSize omega) {
    if (!std::isfinite(omega.omega)) {
        throw DomainError("rho_from_omega: omega must be finite");
    }
    return PartialCorr{omega.omega / std::sqrt(1.0 + omega.omega * omega.omega)};
}

double lambda_from_omega(EffectSize omega, int n, int p) {
    const int df = n - p - 1;
    if (df < 1) {
        throw DomainError("lambda_from_omega: need n - p - 1 >= 1");
    }
    return std::sqrt(static_cast<double>(df)) * omega.omega;
}

PartialCorr rho_from_lambda(double lambda, int df) {
    if (df < 1) {
        throw DomainError("rho_from_lambda: df must be >= 1");
    }
    return PartialCorr{lambda / std::sqrt(df + lambda * lambda)};
}

double fisher_z(PartialCorr r) {
    if (!(std::abs(r.value) < 1.0)) {
        throw DomainError("fisher_z: |r| must be < 1");
    }
    return std::atanh(r.value);
}

}  // namespace pcbff::pcstats

#include "pcbff/bff.hpp"

#include "pcbff/error.hpp"
#include "pcbff/parallel.hpp"
#include "pcbff/specfun.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <string>

namespace pcbff::bff {

using densities::NormalMomentPrior;
using densities::PartialCorrDensity;
using pcstats::EffectSize;
using pcstats::PartialCorr;
using pcstats::TestSummary;

namespace {

// Unit-scale Gamma(shape) quantiles at the bin midpoints. Quantiles scale
// linearly, so one set serves every τ² with the same (shape, bins).
std::shared_ptr<const std::vector<double>> unit_gamma_nodes(double shape, int bins) {
    static std::mutex mutex;
    static std::map<std::pair<double, int>, std::shared_ptr<const std::vector<double>>> cache;
    const auto key = std::make_pair(shape, bins);
    {
        std::lock_guard lock(mutex);
        if (const auto it = cache.find(key); it != cache.end()) {
            return it->second;
        }
    }
    auto nodes = std::make_shared<std::vector<double>>(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) {
        const double q = (i + 0.5) / bins;
        (*nodes)[static_cast<std::size_t>(i)] = specfun::gamma_quantile(q, shape, 1.0);
    }
    std::lock_guard lock(mutex);
    return cache.emplace(key, std::move(nodes)).first->second;
}

}  // namespace

std::string_view to_string(Branch branch) {
    return branch == Branch::symmetric ? "symmetric" : "positive";
}

Branch parse_branch(std::string_view text) {
    if (text == "symmetric") {
        return Branch::symmetric;
    }
    if (text == "positive") {
        return Branch::positive;
    }
    throw DomainError("unknown branch mode '" + std::string(text) +
                      "' (expected symmetric or positive)");
}

double tau2_from_omega(EffectSize omega, int n, int p, double nu) {
    const int df = n - p - 1;
    if (df < 1) {
        throw DomainError("tau2_from_omega: need n - p - 1 >= 1");
    }
    if (!(nu >= 1.0)) {
        throw DomainError("tau2_from_omega: nu must be >= 1");
    }
    if (omega.omega == 0.0 || !std::isfinite(omega.omega)) {
        throw DomainError("tau2_from_omega: omega must be finite and non-zero");
    }
    return df * omega.omega * omega.omega / (2.0 * nu);
}

MarginalQuadrature::MarginalQuadrature(int df, const NormalMomentPrior& prior,
                                       const QuadratureOptions& options)
    : density_(df, options.form), branch_(options.branch) {
    densities::validate(prior);
    if (options.bins < 1) {
        throw DomainError("quadrature needs at least one bin");
    }
    const double scale = 2.0 * prior.tau2;
    const auto unit = unit_gamma_nodes(prior.nu + 0.5, options.bins);
    nodes_.reserve(unit->size());
    if (branch_ == Branch::symmetric) {
        mirrored_.reserve(unit->size());
    }
    for (double g : *unit) {
        const double lambda = std::sqrt(g * scale);
        nodes_.push_back(density_.prepare_node(lambda));
        if (branch_ == Branch::symmetric) {
            mirrored_.push_back(density_.prepare_node(-lambda));
        }
    }
}

double MarginalQuadrature::log_m1(double t) const {
    const auto stat = density_.prepare_statistic(t);
    double max_log = -std::numeric_limits<double>::infinity();
    double scaled_sum = 0.0;
    auto accumulate = [&](const PartialCorrDensity::PreparedNode& node) {
        const double v = density_.log_t(stat, node);
        if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
            std::ostringstream msg;
            msg << "non-finite integrand log f(t|lambda) at lambda=" << node.lambda
                << " (t=" << t << ")";
            throw NumericalError(msg.str());
        }
        if (v <= max_log) {
            scaled_sum += std::exp(v - max_log);
        } else {
            scaled_sum = scaled_sum * std::exp(max_log - v) + 1.0;
            max_log = v;
        }
    };
    for (const auto& node : nodes_) {
        accumulate(node);
    }
    double count = static_cast<double>(nodes_.size());
    if (branch_ == Branch::symmetric) {
        for (const auto& node : mirrored_) {
            accumulate(node);
        }
        count *= 2.0;
    }
    return max_log + std::log(scaled_sum) - std::log(count);
}

double log_marginal_m1(const TestSummary& summary, const NormalMomentPrior& prior,
                       const QuadratureOptions& options) {
    return MarginalQuadrature(summary.df(), prior, options).log_m1(summary.t1);
}

double log_bf10(const TestSummary& summary, double rho_mode, double nu,
                const QuadratureOptions& options) {
    if (!(std::abs(rho_mode) < 1.0)) {
        throw DomainError("log_bf10: |rho_mode| must be < 1");
    }
    if (!(nu >= 1.0)) {
        throw DomainError("log_bf10: nu must be >= 1");
    }
    if (rho_mode == 0.0) {
        return 0.0;
    }
    const auto omega = pcstats::omega_from_rho(PartialCorr{rho_mode});
    const NormalMomentPrior prior{tau2_from_omega(omega, summary.n, summary.p, nu), nu};
    return log_marginal_m1(summary, prior, options) -
           specfun::student_t_logpdf(summary.t1, summary.df());
}

std::vector<double> default_rho_grid(int count, double lo, double hi) {
    if (count < 1) {
        throw DomainError("grid needs at least one point");
    }
    if (!(lo > -1.0 && hi < 1.0 && lo <= hi)) {
        throw DomainError("grid bounds must satisfy -1 < lo <= hi < 1");
    }
    if (count == 1) {
        return {lo};
    }
    if (lo == hi) {
        throw DomainError("grid with more than one point needs lo < hi");
    }
    std::vector<double> grid(static_cast<std::size_t>(count));
    const double last = count - 1.0;
    for (int i = 0; i < count; ++i) {
        // Weighted form keeps the midpoint of a symmetric grid exactly 0.
        grid[static_cast<std::size_t>(i)] = (lo * (last - i) + hi * i) / last;
    }
    grid.front() = lo;
    grid.back() = hi;
    return grid;
}

BffCurve bff_curve(const TestSummary& summary, std::span<const double> rho_grid, double nu,
                   const QuadratureOptions& options) {
    if (rho_grid.empty()) {
        throw DomainError("bff_curve: empty grid");
    }
    std::set<double> seen;
    for (double rho : rho_grid) {
        if (!(std::abs(rho) < 1.0)) {
            throw DomainError("bff_curve: grid values must lie in (-1, 1)");
        }
        if (!seen.insert(rho).second) {
            throw DomainError("bff_curve: grid values must be distinct");
        }
    }

    BffCurve curve;
    curve.summary = summary;
    curve.nu = nu;
    curve.quadrature_bins = options.bins;
    curve.branch = options.branch;
    curve.form = options.form;
    curve.points.resize(rho_grid.size());

    parallel_for(rho_grid.size(), options.threads, [&](std::size_t i) {
        BffPoint& pt = curve.points[i];
        pt.rho_mode = rho_grid[i];
        pt.omega = pcstats::omega_from_rho(PartialCorr{pt.rho_mode}).omega;
        pt.tau2 = pt.omega == 0.0
                      ? 0.0
                      : tau2_from_omega(EffectSize{pt.omega}, summary.n, summary.p, nu);
        pt.log_bf10 = log_bf10(summary, pt.rho_mode, nu, options);
    });
    return curve;
}

BffMaximum max_bff(const BffCurve& curve, double omega_min) {
    const BffPoint* best = nullptr;
    for (const auto& pt : curve.points) {
        if (pt.omega < omega_min) {
            continue;
        }
        if (best == nullptr || pt.log_bf10 > best->log_bf10 ||
            (pt.log_bf10 == best->log_bf10 && pt.omega < best->omega)) {
            best = &pt;
        }
    }
    if (best == nullptr) {
        std::ostringstream msg;
        msg << "max_bff: no grid point with omega >= " << omega_min;
        throw DomainError(msg.str());
    }
    return BffMaximum{best->rho_mode, best->omega, best->log_bf10};
}

std::vector<double> find_crossings(const BffCurve& curve, double level) {
    std::vector<double> out;
    const auto& pts = curve.points;
    for (std::size_t i = 1; i < pts.size(); ++i) {
        const double a = pts[i - 1].log_bf10 - level;
        const double b = pts[i].log_bf10 - level;
        if (a == 0.0) {
            out.push_back(pts[i - 1].rho_mode);
        } else if ((a < 0.0) != (b < 0.0) && b != 0.0) {
            const double w = a / (a - b);
            out.push_back(pts[i - 1].rho_mode + w * (pts[i].rho_mode - pts[i - 1].rho_mode));
        }
    }
    if (!pts.empty() && pts.back().log_bf10 == level) {
        out.push_back(pts.back().rho_mode);
    }
    return out;
}

double true_log_bf(const TestSummary& summary, double lambda, densities::DensityForm form) {
    if (lambda == 0.0) {
        return 0.0;
    }
    const PartialCorrDensity density(summary.df(), form);
    return density.log_t(summary.t1, lambda) - specfun::student_t_logpdf(summary.t1, summary.df());
}

double closed_form_t_bf(double t, double df_mu, double tau2, double nu, Sidedness sides) {
    if (!(tau2 > 0.0) || !(df_mu >= 1.0) || !(nu >= 1.0) || !std::isfinite(t)) {
        throw DomainError("closed_form_t_bf: need tau2 > 0, df >= 1, nu >= 1 and finite t");
    }
    const double tau = std::sqrt(tau2);
    const double y = tau * t / std::sqrt((df_mu + t * t) * (1.0 + tau2));
    const double y2 = y * y;
    const double log_c = -(nu + 0.5) * std::log1p(tau2);
    const double even = specfun::gauss_2f1({0.5 * (df_mu + 1.0), nu + 0.5, 0.5, y2});
    double total = even;
    if (sides == Sidedness::positive && y != 0.0) {
        const double log_ratio = specfun::log_gamma(0.5 * df_mu + 1.0) -
                                 specfun::log_gamma(0.5 * (df_mu + 1.0)) +
                                 specfun::log_gamma(nu + 1.0) - specfun::log_gamma(nu + 0.5);
        const double odd = specfun::gauss_2f1({0.5 * df_mu + 1.0, nu + 1.0, 1.5, y2});
        total += 2.0 * y * std::exp(log_ratio) * odd;
    }
    return std::exp(log_c) * total;
}

}  // namespace pcbff::bff

#include "pcbff/baselines.hpp"

#include "pcbff/error.hpp"
#include "pcbff/random.hpp"
#include "pcbff/specfun.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

namespace pcbff::baselines {

double stretched_beta_log_bf(pcstats::PartialCorr r, int n, int k, double alpha) {
    const int m = n - k - 1;
    if (!(std::abs(r.value) < 1.0)) {
        throw DomainError("stretched_beta_log_bf: |r| must be < 1");
    }
    if (m < 1 || k < 0) {
        throw DomainError("stretched_beta_log_bf: need k >= 0 and n - k - 1 >= 1");
    }
    if (!(alpha > 0.0)) {
        throw DomainError("stretched_beta_log_bf: alpha must be positive");
    }
    const double half_m = 0.5 * m;
    const double hyp =
        specfun::gauss_2f1({half_m, half_m, alpha + 0.5 * (n - k), r.value * r.value});
    return specfun::log_beta(0.5, alpha + half_m) - specfun::log_beta(0.5, alpha) +
           std::log(hyp);
}

double jzs_log_integrand(double g, double r2, int p, int n) {
    return -0.5 * (n - 1 - p) * std::log1p(g) - 0.5 * (n - 1) * std::log1p((1.0 - r2) * g);
}

JzsEstimate jzs_estimate(const JzsInput& in) {
    if (!(in.r2_null >= 0.0 && in.r2_null < 1.0 && in.r2_full >= 0.0 && in.r2_full < 1.0)) {
        throw DomainError("jzs: R^2 values must lie in [0, 1)");
    }
    if (in.r2_full < in.r2_null) {
        throw DomainError("jzs: the full model cannot have a smaller R^2 than the null model");
    }
    if (in.p0 < 0 || in.p1 < in.p0) {
        throw DomainError("jzs: need 0 <= p0 <= p1");
    }
    if (in.n - 1 - in.p1 < 1) {
        throw DomainError("jzs: need n - 1 - p1 >= 1");
    }
    if (in.mc_samples < kMinJzsSamples) {
        std::ostringstream msg;
        msg << "jzs: mc_samples must be at least " << kMinJzsSamples;
        throw DomainError(msg.str());
    }

    const auto count = static_cast<std::size_t>(in.mc_samples);
    std::vector<double> log_num(count);
    std::vector<double> log_den(count);
    CounterRng rng(in.seed, 0);
    for (std::size_t i = 0; i < count; ++i) {
        // Gamma(1/2, scale n/2) = (n/2)·χ²₁/2.
        const double z = rng.normal();
        const double g = 0.25 * in.n * z * z;
        log_num[i] = jzs_log_integrand(g, in.r2_full, in.p1, in.n);
        log_den[i] = jzs_log_integrand(g, in.r2_null, in.p0, in.n);
    }

    const double num_shift = *std::max_element(log_num.begin(), log_num.end());
    const double den_shift = *std::max_element(log_den.begin(), log_den.end());
    double sum_a = 0.0;
    double sum_b = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        sum_a += std::exp(log_num[i] - num_shift);
        sum_b += std::exp(log_den[i] - den_shift);
    }
    const double size = static_cast<double>(count);
    const double mean_a = sum_a / size;
    const double mean_b = sum_b / size;

    double var_a = 0.0;
    double var_b = 0.0;
    double cov = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double da = std::exp(log_num[i] - num_shift) - mean_a;
        const double db = std::exp(log_den[i] - den_shift) - mean_b;
        var_a += da * da;
        var_b += db * db;
        cov += da * db;
    }
    var_a /= size - 1.0;
    var_b /= size - 1.0;
    cov /= size - 1.0;

    JzsEstimate est;
    est.log_bf = (num_shift + std::log(mean_a)) - (den_shift + std::log(mean_b));
    const double rel_var = var_a / (mean_a * mean_a) + var_b / (mean_b * mean_b) -
                           2.0 * cov / (mean_a * mean_b);
    est.std_error = std::sqrt(std::max(rel_var, 0.0) / size);
    return est;
}

double jzs_log_bf(const JzsInput& input) {
    return jzs_estimate(input).log_bf;
}

}  // namespace pcbff::baselines

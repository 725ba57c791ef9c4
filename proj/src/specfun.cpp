#include "pcbff/specfun.hpp"

#include "pcbff/error.hpp"

#include <atomic>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/erf.hpp>
#include <boost/math/special_functions/gamma.hpp>

namespace pcbff::specfun {

namespace {

std::atomic<std::uint64_t> g_clamp_count{0};

bool is_nonpositive_integer(double v) {
    return v <= 0.0 && v == std::round(v);
}

void require_positive(double v, const char* what) {
    if (!(v > 0.0) || !std::isfinite(v)) {
        std::ostringstream msg;
        msg << what << " must be positive and finite, got " << v;
        throw DomainError(msg.str());
    }
}

}  // namespace

double log_gamma(double x) {
    require_positive(x, "log_gamma argument");
    return boost::math::lgamma(x);
}

double log_gamma_ratio(double a, double delta) {
    require_positive(a, "log_gamma_ratio a");
    if (!(a + delta > 0.0)) {
        throw DomainError("log_gamma_ratio: a + delta must be positive");
    }
    return std::log(boost::math::tgamma_delta_ratio(a, delta));
}

double log_beta(double a, double b) {
    require_positive(a, "log_beta a");
    require_positive(b, "log_beta b");
    // Put the larger argument in the ratio; differencing two big lgammas loses digits.
    if (a > b) {
        std::swap(a, b);
    }
    return log_gamma(a) + log_gamma_ratio(b, a);
}

double hyp2f1_series(double a, double b, double c, double x) {
    double sum = 1.0;
    double term = 1.0;
    for (int k = 0; k < kHyp2f1MaxTerms; ++k) {
        term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * x;
        sum += term;
        if (std::abs(term) <= kHyp2f1Tolerance * std::abs(sum)) {
            return sum;
        }
    }
    std::ostringstream msg;
    msg << "2F1 series did not converge after " << kHyp2f1MaxTerms << " terms (a=" << a
        << ", b=" << b << ", c=" << c << ", x=" << x << ", partial sum=" << sum
        << ", last term=" << term << ")";
    throw NumericalError(msg.str());
}

double gauss_2f1(const Hyp2f1Params& p) {
    if (!std::isfinite(p.a) || !std::isfinite(p.b) || !std::isfinite(p.c) || !std::isfinite(p.x)) {
        throw DomainError("gauss_2f1: non-finite parameter");
    }
    if (is_nonpositive_integer(p.c)) {
        std::ostringstream msg;
        msg << "gauss_2f1: c must not be zero or a negative integer, got " << p.c;
        throw DomainError(msg.str());
    }
    if (p.x >= 1.0) {
        std::ostringstream msg;
        msg << "gauss_2f1: argument must be < 1, got " << p.x;
        throw DomainError(msg.str());
    }
    if (p.x == 0.0) {
        return 1.0;
    }
    if (p.x > 0.0) {
        return hyp2f1_series(p.a, p.b, p.c, p.x);
    }
    // Pfaff: maps x < 0 onto z = x / (x - 1) in (0, 1).
    const double one_minus_x = 1.0 - p.x;
    const double z = 1.0 - 1.0 / one_minus_x;
    return std::pow(one_minus_x, -p.b) * hyp2f1_series(p.c - p.a, p.b, p.c, z);
}

double clamp_hyp2f1(double value) noexcept {
    if (!std::isfinite(value) || value < kHyp2f1Floor) {
        g_clamp_count.fetch_add(1, std::memory_order_relaxed);
        return kHyp2f1Floor;
    }
    return value;
}

std::uint64_t hyp2f1_clamp_count() noexcept {
    return g_clamp_count.load(std::memory_order_relaxed);
}

double student_t_logpdf(double t, double df) {
    require_positive(df, "degrees of freedom");
    if (std::isnan(t)) {
        throw DomainError("student_t_logpdf: t is NaN");
    }
    return -log_gamma_ratio(0.5 * df, 0.5) - 0.5 * std::log(df * std::numbers::pi) -
           0.5 * (df + 1.0) * std::log1p(t * t / df);
}

double student_t_two_sided_p(double t, double df) {
    require_positive(df, "degrees of freedom");
    if (std::isnan(t)) {
        throw DomainError("student_t_two_sided_p: t is NaN");
    }
    if (std::isinf(t)) {
        return 0.0;
    }
    const double t2 = t * t;
    // I_{df/(df+t²)}(df/2, 1/2), written via the complement when t² is small
    // relative to df so that the argument near 1 does not lose digits.
    if (t2 < df) {
        return boost::math::ibetac(0.5, 0.5 * df, t2 / (df + t2));
    }
    return boost::math::ibeta(0.5 * df, 0.5, df / (df + t2));
}

double student_t_cdf(double t, double df) {
    const double tail = 0.5 * student_t_two_sided_p(t, df);
    return t < 0.0 ? tail : 1.0 - tail;
}

double gamma_cdf(double x, double shape, double scale) {
    require_positive(shape, "gamma shape");
    require_positive(scale, "gamma scale");
    if (std::isnan(x)) {
        throw DomainError("gamma_cdf: x is NaN");
    }
    if (x <= 0.0) {
        return 0.0;
    }
    if (std::isinf(x)) {
        return 1.0;
    }
    return boost::math::gamma_p(shape, x / scale);
}

double gamma_quantile(double q, double shape, double scale) {
    require_positive(shape, "gamma shape");
    require_positive(scale, "gamma scale");
    if (!(q > 0.0 && q < 1.0)) {
        std::ostringstream msg;
        msg << "gamma_quantile: probability must lie in (0, 1), got " << q;
        throw DomainError(msg.str());
    }

    // Solve on the unit-scale variable. Upper half works on the survival
    // function so that 1 - q is exact and the residual keeps its digits.
    const bool upper = q > 0.5;
    const double target = upper ? 1.0 - q : q;
    auto residual = [&](double x) {
        return upper ? target - boost::math::gamma_q(shape, x)
                     : boost::math::gamma_p(shape, x) - target;
    };

    double lo = 0.0;
    double hi = std::max(1.0, shape);
    while (residual(hi) < 0.0) {
        lo = hi;
        hi *= 2.0;
        if (!std::isfinite(hi)) {
            throw NumericalError("gamma_quantile: failed to bracket the quantile");
        }
    }

    // Wilson-Hilferty starting point, pulled back into the bracket if needed.
    const double z = std::numbers::sqrt2 * boost::math::erf_inv(2.0 * q - 1.0);
    const double h = 1.0 / (9.0 * shape);
    double x = shape * std::pow(std::max(1.0 - h + z * std::sqrt(h), 1e-3), 3.0);
    if (!(x > lo && x < hi)) {
        x = 0.5 * (lo + hi);
    }

    for (int iter = 0; iter < 300; ++iter) {
        const double f = residual(x);
        if (f == 0.0) {
            return x * scale;
        }
        if (f < 0.0) {
            lo = x;
        } else {
            hi = x;
        }
        const double slope = boost::math::gamma_p_derivative(shape, x);
        double next = slope > 0.0 ? x - f / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) {
            next = 0.5 * (lo + hi);
        }
        if (std::abs(next - x) <= 1e-14 * x || hi - lo <= 1e-15 * hi) {
            return next * scale;
        }
        x = next;
    }
    std::ostringstream msg;
    msg << "gamma_quantile did not converge (q=" << q << ", shape=" << shape << ")";
    throw NumericalError(msg.str());
}

}  // namespace pcbff::specfun

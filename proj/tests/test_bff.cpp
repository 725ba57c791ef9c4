#include "pcbff/bff.hpp"
#include "pcbff/error.hpp"
#include "pcbff/simulate.hpp"
#include "pcbff/specfun.hpp"

#include <cmath>
#include <random>

#include <doctest.h>

using namespace pcbff;
using namespace pcbff::bff;
using pcstats::EffectSize;
using pcstats::TestSummary;

namespace {

const TestSummary kExample{-0.06, 40, 2};

double lse_add(double acc, double v) {
    if (acc == -INFINITY) {
        return v;
    }
    const double hi = std::max(acc, v);
    return hi + std::log(std::exp(acc - hi) + std::exp(v - hi));
}

}  // namespace

TEST_SUITE("bff") {

TEST_CASE("tau2 from omega") {
    CHECK(tau2_from_omega(EffectSize{0.5}, 40, 2, 1.0) == doctest::Approx(4.625).epsilon(1e-15));
    CHECK(tau2_from_omega(EffectSize{0.5}, 40, 2, 2.0) ==
          doctest::Approx(0.5 * tau2_from_omega(EffectSize{0.5}, 40, 2, 1.0)).epsilon(1e-15));
    std::mt19937_64 gen(31);
    std::uniform_real_distribution<double> w(0.01, 3.0);
    std::uniform_real_distribution<double> nu(1.0, 5.0);
    for (int i = 0; i < 50; ++i) {
        const double om = w(gen);
        const double v = nu(gen);
        const double tau = std::sqrt(tau2_from_omega(EffectSize{om}, 30, 3, v));
        CHECK(std::sqrt(2 * v) * tau == doctest::Approx(std::sqrt(26.0) * om).epsilon(1e-14));
    }
    CHECK_THROWS_AS((void)tau2_from_omega(EffectSize{0.0}, 40, 2, 1.0), DomainError);
    CHECK_THROWS_AS((void)tau2_from_omega(EffectSize{0.3}, 40, 2, 0.5), DomainError);
}

TEST_CASE("log BF against adaptive high-precision quadrature") {
    struct Case {
        double t;
        int n;
        double rho;
        double expected;
    };
    // mpmath adaptive quadrature over lambda of the same density and prior.
    const Case cases[] = {
        {-0.06, 40, 0.1, -0.25995074774416339},  {-0.06, 40, 0.37, -2.0251165459201344},
        {-0.06, 40, 0.52, -3.0455520178494318},  {-0.06, 40, 0.8, -5.2221728783371972},
        {-0.06, 40, -0.5, -2.9095439925483071},  {2.8, 25, 0.45, 2.3146519580158482},
    };
    for (const auto& c : cases) {
        CAPTURE(c.rho);
        CHECK(log_bf10(TestSummary{c.t, c.n, 2}, c.rho, 1.0) ==
              doctest::Approx(c.expected).epsilon(1e-4));
    }
    QuadratureOptions positive;
    positive.branch = Branch::positive;
    CHECK(log_bf10(TestSummary{2.8, 25, 2}, 0.45, 1.0, positive) ==
          doctest::Approx(3.0072007266662648).epsilon(1e-4));
}

TEST_CASE("log m1 against a dense trapezoid over lambda") {
    const TestSummary s{2.0, 50, 2};
    const densities::NormalMomentPrior prior{1.0, 1.0};
    const densities::PartialCorrDensity d(s.df());
    const auto stat = d.prepare_statistic(s.t1);
    const int nodes = 1000000;
    const double h = 40.0 / nodes;
    double acc = -INFINITY;
    for (int i = 0; i <= nodes; ++i) {
        const double lambda = -20.0 + i * h;
        if (lambda == 0.0) {
            continue;
        }
        const double w = (i == 0 || i == nodes) ? 0.5 : 1.0;
        acc = lse_add(acc, std::log(w * h) + d.log_t(stat, d.prepare_node(lambda)) +
                               densities::nm_prior_logpdf(lambda, prior));
    }
    CHECK(std::abs(log_marginal_m1(s, prior) - acc) < 1e-5);
}

TEST_CASE("quadrature self-convergence") {
    for (double t : {-2.5, -0.06, 1.0, 3.5}) {
        for (double tau2 : {0.05, 1.0, 8.0}) {
            const densities::NormalMomentPrior prior{tau2, 1.0};
            QuadratureOptions fine;
            fine.bins = 100000;
            const TestSummary s{t, 40, 2};
            CAPTURE(t);
            CAPTURE(tau2);
            CHECK(std::abs(log_marginal_m1(s, prior) - log_marginal_m1(s, prior, fine)) < 1e-4);
        }
    }
}

TEST_CASE("coarse quadrature used for simulation studies") {
    // The OC studies run with 1000 bins. The midpoint-quantile rule is weakest
    // when t sits in the prior's tail (measured worst: -0.031 at n=50, t=8,
    // omega=0.25); near the prior bulk it is within 2e-3.
    QuadratureOptions coarse;
    coarse.bins = 1000;
    for (int n : {25, 50, 100}) {
        for (double t : {-3.0, 0.0, 1.0, 4.0, 8.0}) {
            for (double omega : {0.05, 0.25, 0.6, 1.0}) {
                const double tau2 = tau2_from_omega(EffectSize{omega}, n, 2, 1.0);
                const TestSummary s{t, n, 2};
                const double diff =
                    log_marginal_m1(s, {tau2, 1.0}, coarse) - log_marginal_m1(s, {tau2, 1.0});
                CAPTURE(n);
                CAPTURE(t);
                CAPTURE(omega);
                CHECK(std::abs(diff) < 0.04);
                const double lambda = std::sqrt(n - 3.0) * omega;
                if (std::abs(std::abs(t) - lambda) < 3.0) {
                    CHECK(std::abs(diff) < 2e-3);
                }
            }
        }
    }
}

TEST_CASE("log BF limits") {
    CHECK(log_bf10(kExample, 0.0, 1.0) == 0.0);
    CHECK(std::abs(log_bf10(kExample, 1e-4, 1.0)) < 1e-3);
    const TestSummary s{2.0, 50, 2};
    const double tiny = log_marginal_m1(s, {1e-12, 1.0}) - specfun::student_t_logpdf(2.0, 47);
    CHECK(std::abs(tiny) < 1e-9);
    CHECK_THROWS_AS((void)log_bf10(kExample, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS((void)log_bf10(kExample, 0.3, 0.9), DomainError);
}

TEST_CASE("rapid resumption thresholds") {
    // Evidence for the null exceeds 2 beyond |rho*| = 0.37 and 3 beyond 0.52.
    CHECK(log_bf10(kExample, 0.37, 1.0) == doctest::Approx(-2.0).epsilon(0.25 / 2.0));
    CHECK(log_bf10(kExample, 0.52, 1.0) == doctest::Approx(-3.0).epsilon(0.25 / 3.0));
    const auto grid = default_rho_grid();
    const auto curve = bff_curve(kExample, grid, 1.0);
    const auto two = find_crossings(curve, -2.0);
    REQUIRE(two.size() == 2);
    CHECK(two[1] > 0.34);
    CHECK(two[1] < 0.40);
    CHECK(two[0] == doctest::Approx(-two[1]).epsilon(1e-12));
}

TEST_CASE("default grid") {
    const auto grid = default_rho_grid();
    REQUIRE(grid.size() == 199);
    CHECK(grid.front() == -0.99);
    CHECK(grid.back() == 0.99);
    CHECK(grid[99] == 0.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(grid[i] == -grid[grid.size() - 1 - i]);
    }
    CHECK_THROWS_AS((void)default_rho_grid(0), DomainError);
    CHECK_THROWS_AS((void)default_rho_grid(5, -1.0, 0.5), DomainError);
}

TEST_CASE("curve properties") {
    const double zero[] = {0.0};
    const auto single = bff_curve(kExample, zero, 1.0);
    REQUIRE(single.points.size() == 1);
    CHECK(single.points[0].log_bf10 == 0.0);
    CHECK(max_bff(single, 0.0).rho_mode == 0.0);

    const double pm[] = {-0.4, 0.4};
    const auto even = bff_curve(TestSummary{1.7, 30, 3}, pm, 1.0);
    CHECK(even.points[0].log_bf10 == doctest::Approx(even.points[1].log_bf10).epsilon(1e-12));

    const double dup[] = {0.1, 0.2, 0.1};
    CHECK_THROWS_AS((void)bff_curve(kExample, dup, 1.0), DomainError);
    const double outside[] = {0.1, 1.0};
    CHECK_THROWS_AS((void)bff_curve(kExample, outside, 1.0), DomainError);
}

TEST_CASE("curve does not depend on the worker count") {
    const auto grid = default_rho_grid(41);
    QuadratureOptions one;
    one.threads = 1;
    one.bins = 2000;
    QuadratureOptions four = one;
    four.threads = 4;
    const auto a = bff_curve(TestSummary{1.2, 35, 2}, grid, 1.0, one);
    const auto b = bff_curve(TestSummary{1.2, 35, 2}, grid, 1.0, four);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(a.points[i].log_bf10 == b.points[i].log_bf10);
    }
}

TEST_CASE("maximum of the curve") {
    BffCurve c;
    c.points = {{0.1, 0.1, 0.0, 3.0}, {0.2, 0.2, 0.0, 2.0}, {0.3, 0.3, 0.0, 1.0}};
    CHECK(max_bff(c, 0.0).omega == 0.1);
    CHECK(max_bff(c, 0.15).omega == 0.2);
    c.points[2].log_bf10 = 2.0;
    CHECK(max_bff(c, 0.15).omega == 0.2);  // ties go to the smaller omega
    CHECK_THROWS_AS((void)max_bff(c, 0.5), DomainError);
}

TEST_CASE("crossings") {
    BffCurve c;
    c.points = {{-0.5, 0, 0, -3.0}, {0.0, 0, 0, 0.0}, {0.5, 0, 0, -3.0}};
    const auto xs = find_crossings(c, -1.5);
    REQUIRE(xs.size() == 2);
    CHECK(xs[0] == doctest::Approx(-0.25));
    CHECK(xs[1] == doctest::Approx(0.25));
    CHECK(find_crossings(c, 1.0).empty());
}

TEST_CASE("true log BF") {
    const TestSummary s{2.5, 60, 2};
    CHECK(true_log_bf(s, 0.0) == 0.0);
    const double lambda = 2.5;
    const densities::PartialCorrDensity d(s.df());
    CHECK(true_log_bf(s, lambda) ==
          doctest::Approx(d.log_t(2.5, lambda) - specfun::student_t_logpdf(2.5, 57)).epsilon(1e-14));
    // t at the mode of f(.|lambda) favours the alternative.
    double mode = 0.0;
    double best = -INFINITY;
    for (int i = 0; i < 20000; ++i) {
        const double t = -5.0 + i * 1e-3 * 1.0;
        const double v = d.log_t(t, lambda);
        if (v > best) {
            best = v;
            mode = t;
        }
    }
    CHECK(true_log_bf(TestSummary{mode, 60, 2}, lambda) > 0.0);
}

TEST_CASE("max BFF tracks the true BF on a simulated dataset") {
    const auto sigma = simulate::build_sigma_with_partial(0.5, 0.3);
    CounterRng rng(2024, 0);
    const auto data = simulate::xyz_to_data(simulate::sample_mvn(sigma, 100, rng));
    const auto r = pcstats::partial_corr_mle(pcstats::sufficient_stats(data));
    const auto s = pcstats::t_statistic(r, 100, 2);
    std::vector<double> grid;
    for (int i = 1; i <= 98; ++i) {
        grid.push_back(i / 100.0);
    }
    const auto curve = bff_curve(s, grid, 1.0);
    const double lambda = pcstats::lambda_from_omega(EffectSize{0.5 / std::sqrt(0.75)}, 100, 2);
    CHECK(std::abs(max_bff(curve, 0.0).log_bf - true_log_bf(s, lambda)) < 3.0);
}

TEST_CASE("closed-form t Bayes factor") {
    CHECK(closed_form_t_bf(1.7, 20, 1e-14, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(closed_form_t_bf(0.0, 20, 2.0, 1.0) ==
          doctest::Approx(std::pow(3.0, -1.5)).epsilon(1e-14));
    // scipy noncentral-t quadrature over the symmetric moment prior.
    CHECK(closed_form_t_bf(1.3, 20, 2.0, 1.0) == doctest::Approx(0.724635255707214).epsilon(1e-8));
    CHECK(closed_form_t_bf(-2.7, 8, 0.5, 1.0) == doctest::Approx(3.20314244137466).epsilon(1e-8));
    CHECK(closed_form_t_bf(0.4, 50, 10.0, 1.0) == doctest::Approx(0.0338949289534941).epsilon(1e-8));
    // One-sided prior: the two halves average to the two-sided value.
    const double plus = closed_form_t_bf(1.3, 20, 2.0, 1.0, Sidedness::positive);
    const double minus = closed_form_t_bf(-1.3, 20, 2.0, 1.0, Sidedness::positive);
    CHECK(0.5 * (plus + minus) == doctest::Approx(0.724635255707214).epsilon(1e-8));
    CHECK_THROWS_AS((void)closed_form_t_bf(1.0, 20, 0.0, 1.0), DomainError);
}

TEST_CASE("branch choice changes the example curve by less than 0.01" * doctest::may_fail()) {
    QuadratureOptions positive;
    positive.branch = Branch::positive;
    const auto grid = default_rho_grid();
    const auto sym = bff_curve(kExample, grid, 1.0);
    const auto pos = bff_curve(kExample, grid, 1.0, positive);
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        worst = std::max(worst, std::abs(sym.points[i].log_bf10 - pos.points[i].log_bf10));
    }
    MESSAGE("largest branch difference: " << worst);
    CHECK(worst < 0.01);
}

}  // TEST_SUITE

#include "doctest.h"

#include "fdaloha/spatial.hpp"
#include "golden.hpp"
#include "oracles.hpp"

#include <cmath>
#include <numbers>
#include <vector>

using namespace fdaloha;

namespace {

const std::vector<double> alphas{2.5, 3.0, 4.0, 6.0};
const std::vector<double> radii{1.0, 2.0};
const std::vector<double> thetas{0.5, 1.0, 2.0, 10.0};

} // namespace

TEST_CASE("omega1 closed form")
{
    const double pi = std::numbers::pi;
    CHECK(omega1({4.0, 1.0, 2.0}) == doctest::Approx(pi * pi * std::sqrt(2.0) / 2.0).epsilon(1e-13));
    CHECK(omega1({4.0, 1.0, 2.0}) == doctest::Approx(6.978864).epsilon(1e-6));
    CHECK(omega1({4.0, 2.0, 2.0}) == doctest::Approx(4.0 * omega1({4.0, 1.0, 2.0})).epsilon(1e-14));
    CHECK(omega1({4.0, 1.0, 1e-12}) < 1e-5);
    CHECK(omega1({4.0, 1.0, 0.0}) == 0.0);
}

TEST_CASE("omega1 rejects alpha <= 2")
{
    CHECK_THROWS_AS(omega1({2.0, 1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(omega1({1.5, 1.0, 2.0}), DomainError);
    CHECK_THROWS_AS(omega1({4.0, 0.5, 2.0}), DomainError);
    CHECK_THROWS_AS(omega1({4.0, 1.0, -1.0}), DomainError);
}

TEST_CASE("Gamma product matches the reflection identity")
{
    const double pi = std::numbers::pi;
    for (const double alpha : alphas) {
        const double delta = 2.0 / alpha;
        const double product = std::tgamma(1.0 - delta) * std::tgamma(1.0 + delta);
        const double reflection = (pi * delta) / std::sin(pi * delta);
        CHECK(product == doctest::Approx(reflection).epsilon(1e-10));
    }
}

TEST_CASE("omega1 closed form agrees with the integral oracle on the grid")
{
    QuadratureConfig grid;
    grid.rel_tol = 1e-7;
    for (const double alpha : alphas) {
        for (const double r : radii) {
            for (const double theta : thetas) {
                const ChannelParams ch{alpha, r, theta};
                const double closed = omega1(ch);
                const double oracle = oracles::omega1_integral_oracle(ch, grid);
                CAPTURE(alpha);
                CAPTURE(r);
                CAPTURE(theta);
                CHECK(std::abs(closed - oracle) / closed < 5e-3);
            }
        }
    }
    CHECK(oracles::omega1_integral_oracle({3.0, 1.0, 1.0}, grid)
          == doctest::Approx(omega1({3.0, 1.0, 1.0})).epsilon(5e-3));
    CHECK(oracles::omega1_integral_oracle({4.0, 1.0, 0.0}, grid) == 0.0);
}

TEST_CASE("omega2 golden value and MC identity oracle")
{
    const ChannelParams ch{4.0, 1.0, 2.0};
    const double quad = omega2(ch);
    CHECK(quad >= 6.979);
    CHECK(quad <= 13.958);

    const auto mc = oracles::omega2_mc_oracle(ch, golden::omega2_samples, golden::omega2_seed);
    // The frozen constant is exactly what the oracle produces for its seed.
    CHECK(mc.omega2 == doctest::Approx(golden::omega2).epsilon(1e-12));
    CHECK(std::abs(quad - mc.omega2) <= 3.0 * mc.std_error);
    CHECK(std::abs(quad - (2.0 * omega1(ch) - mc.cross_term)) / quad < 1e-2);
    CHECK(mc.cross_term >= 0.0);
    CHECK(mc.omega2 <= 2.0 * omega1(ch));
}

TEST_CASE("omega2 MC oracle at a zero threshold and with too few samples")
{
    const auto mc = oracles::omega2_mc_oracle({4.0, 1.0, 0.0}, 100000, 7);
    CHECK(mc.omega2 == 0.0);
    CHECK(mc.std_error == 0.0);
    CHECK_THROWS_AS(oracles::omega2_mc_oracle({4.0, 1.0, 2.0}, 1000, 7), DomainError);
}

TEST_CASE("omega2 vanishes with the threshold")
{
    CHECK(omega2({4.0, 1.0, 0.0}) == 0.0);
    // the 64-node inner rule resolves peaks of angular width ~theta^(1/alpha)
    CHECK(omega2({4.0, 1.0, 1e-4}) < 0.1);
    CHECK(omega2({4.0, 1.0, 1e-4}) >= omega1({4.0, 1.0, 1e-4}));
}

TEST_CASE("omega2 is sandwiched between omega1 and 2 omega1 on the grid")
{
    for (const double alpha : alphas) {
        for (const double r : radii) {
            for (const double theta : thetas) {
                const ChannelParams ch{alpha, r, theta};
                const double o1 = omega1(ch);
                const double o2 = omega2(ch);
                CAPTURE(alpha);
                CAPTURE(r);
                CAPTURE(theta);
                CHECK(o2 >= o1);
                CHECK(o2 <= 2.0 * o1);
            }
        }
    }
}

TEST_CASE("omega2 cross-check against the MC identity on a coarse grid")
{
    std::uint64_t seed = 11;
    for (const double alpha : {2.5, 4.0, 6.0}) {
        for (const double theta : {0.5, 10.0}) {
            const ChannelParams ch{alpha, 2.0, theta};
            const auto mc = oracles::omega2_mc_oracle(ch, 1000000, seed++);
            const double quad = omega2(ch);
            CAPTURE(alpha);
            CAPTURE(theta);
            CHECK(std::abs(quad - mc.omega2) / quad < 1e-2);
            CHECK(std::abs(quad - mc.omega2) <= 4.0 * mc.std_error);
        }
    }
}

TEST_CASE("omega functionals increase strictly in theta and r")
{
    for (const double alpha : alphas) {
        double prev1 = 0.0;
        double prev2 = 0.0;
        for (const double theta : thetas) {
            const ChannelParams ch{alpha, 1.0, theta};
            const double o1 = omega1(ch);
            const double o2 = omega2(ch);
            CHECK(o1 > prev1);
            CHECK(o2 > prev2);
            prev1 = o1;
            prev2 = o2;
        }
        for (const double theta : thetas) {
            CHECK(omega1({alpha, 2.0, theta}) > omega1({alpha, 1.0, theta}));
            CHECK(omega2({alpha, 2.0, theta}) > omega2({alpha, 1.0, theta}));
        }
    }
}

TEST_CASE("omega2 quadrature options")
{
    const ChannelParams ch{4.0, 1.0, 2.0};
    QuadratureConfig rational;
    rational.mapping = OuterMapping::rational;
    CHECK(omega2(ch, rational) == doctest::Approx(omega2(ch)).epsilon(1e-8));

    QuadratureConfig coarse;
    coarse.inner_nodes = 16;
    coarse.rel_tol = 1e-6;
    CHECK(omega2(ch, coarse) == doctest::Approx(omega2(ch)).epsilon(1e-5));

    QuadratureConfig bad;
    bad.inner_nodes = 8;
    CHECK_THROWS_AS(omega2(ch, bad), DomainError);
    bad = {};
    bad.rel_tol = 0.0;
    CHECK_THROWS_AS(omega2(ch, bad), DomainError);

    // The plain rational map has an integrable endpoint singularity for
    // alpha < 3, which a tight tolerance cannot resolve.
    QuadratureConfig strict = rational;
    strict.max_depth = 8;
    CHECK_THROWS_AS(omega2({2.5, 1.0, 2.0}, strict), ConvergenceError);
}

TEST_CASE("Gauss-Legendre rule integrates polynomials exactly")
{
    const auto rule = GaussLegendreRule::on_interval(8, 0.0, 2.0);
    double weight_sum = 0.0;
    for (const double w : rule.weights) {
        weight_sum += w;
    }
    CHECK(weight_sum == doctest::Approx(2.0).epsilon(1e-14));
    // degree 15 is the exactness limit for 8 nodes
    CHECK(rule.integrate([](double x) { return std::pow(x, 15); })
          == doctest::Approx(std::pow(2.0, 16) / 16.0).epsilon(1e-12));
    const auto on_pi = GaussLegendreRule::on_interval(64, 0.0, std::numbers::pi);
    CHECK(on_pi.integrate([](double x) { return std::sin(x); }) == doctest::Approx(2.0).epsilon(1e-14));
}

TEST_CASE("imperfect-IC scale beta")
{
    const ChannelParams ch{4.0, 1.0, 2.0};
    CHECK(ic_scale_beta(0.0, ch) == 1.0);
    CHECK(ic_scale_beta(0.0, {3.0, 2.0, 10.0}) == 1.0);
    CHECK(ic_scale_beta(0.05, ch) == doctest::Approx(std::exp(-0.1)).epsilon(1e-15));
    CHECK(ic_scale_beta(0.05, ch) == doctest::Approx(0.904837).epsilon(1e-6));
    CHECK(ic_scale_beta(0.1, {4.0, 2.0, 2.0}) == doctest::Approx(0.040762).epsilon(1e-5));
    CHECK_THROWS_AS(ic_scale_beta(1.0, ch), DomainError);
    CHECK_THROWS_AS(ic_scale_beta(-0.1, ch), DomainError);

    // strictly decreasing in eta, theta and r
    CHECK(ic_scale_beta(0.1, ch) < ic_scale_beta(0.05, ch));
    CHECK(ic_scale_beta(0.05, {4.0, 1.0, 3.0}) < ic_scale_beta(0.05, ch));
    CHECK(ic_scale_beta(0.05, {4.0, 1.5, 2.0}) < ic_scale_beta(0.05, ch));
}

TEST_CASE("spatial_constants bundles the three values")
{
    const auto sc = spatial_constants({4.0, 1.0, 2.0}, 0.05);
    CHECK(sc.omega1 == omega1({4.0, 1.0, 2.0}));
    CHECK(sc.omega2 == omega2({4.0, 1.0, 2.0}));
    CHECK(sc.beta == ic_scale_beta(0.05, {4.0, 1.0, 2.0}));
    CHECK(sc.pair_correction() < 0.0);
    CHECK(sc.ideal().beta == 1.0);
}

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "toricvol/quadrature.hpp"
#include "toricvol/supports.hpp"
#include "toricvol/systems.hpp"

using namespace toricvol;

namespace {

SystemSpec univariate(std::vector<double> exps) {
    Eigen::MatrixXd e(static_cast<int>(exps.size()), 1);
    for (int i = 0; i < e.rows(); ++i) e(i, 0) = exps[static_cast<size_t>(i)];
    return SystemSpec(Field::complex_coeffs, {SupportSpec(e)});
}

SystemSpec bilinear() {
    Eigen::MatrixXd e(4, 2);
    e << 0, 0, 1, 0, 0, 1, 1, 1;
    SupportSpec s(e);
    return SystemSpec(Field::complex_coeffs, {s, s});
}

double sigmoid2(double p) { return std::exp(2 * p) / (1 + std::exp(2 * p)); }

}  // namespace

TEST_SUITE("quadrature") {

TEST_CASE("gauss legendre rules") {
    for (int order : {2, 8, 33, 64}) {
        const auto& [x, w] = gauss_legendre(order);
        REQUIRE(static_cast<int>(x.size()) == order);
        double sum = 0.0;
        for (double wk : w) sum += wk;
        CHECK(sum == doctest::Approx(2.0).epsilon(1e-13));
        // Nodes are inside (-1,1), sorted, symmetric.
        for (int k = 0; k < order; ++k) {
            CHECK(std::abs(x[static_cast<size_t>(k)]) < 1.0);
            CHECK(x[static_cast<size_t>(k)] ==
                  doctest::Approx(-x[static_cast<size_t>(order - 1 - k)]).epsilon(1e-13));
            if (k > 0) CHECK(x[static_cast<size_t>(k)] > x[static_cast<size_t>(k - 1)]);
        }
    }
    // Order m integrates monomials up to degree 2m-1 exactly.
    const auto& [x, w] = gauss_legendre(8);
    double i14 = 0.0, i16 = 0.0;
    for (size_t k = 0; k < x.size(); ++k) {
        i14 += w[k] * std::pow(x[k], 14);
        i16 += w[k] * std::pow(x[k], 16);
    }
    CHECK(i14 == doctest::Approx(2.0 / 15.0).epsilon(1e-13));
    CHECK(i16 != doctest::Approx(2.0 / 17.0).epsilon(1e-6));  // degree 16 is beyond order 8

    // The same rule object is cached.
    CHECK(&gauss_legendre(8) == &gauss_legendre(8));
}

TEST_CASE("interval and region plumbing") {
    Interval b{-1.0, 2.5};
    CHECK(b.bounded());
    CHECK(b.length() == doctest::Approx(3.5));
    Interval u{0.0, std::numeric_limits<double>::infinity()};
    CHECK_FALSE(u.bounded());

    Region full = Region::full_space(2);
    CHECK(full.p.size() == 2);
    CHECK(full.q_full);
    CHECK_FALSE(full.p_bounded());
    CHECK(full.q_measure(2) == doctest::Approx(4 * M_PI * M_PI));

    Region box = Region::p_box({Interval{0, 1}, Interval{-2, 2}});
    CHECK(box.p_bounded());
    CHECK(box.q_measure(2) == doctest::Approx(4 * M_PI * M_PI));

    Region qpart = box;
    qpart.q_full = false;
    qpart.q = {Interval{0, M_PI}, Interval{-1, 1}};
    CHECK(qpart.q_measure(2) == doctest::Approx(2 * M_PI));
}

TEST_CASE("expected roots telescope in one variable") {
    // For a univariate support the expected count in {a <= p <= b} is
    // momentum(b) - momentum(a); with rows {0,1} that is the sigmoid.
    SystemSpec spec = univariate({0, 1});
    auto full = integrate_density(spec, Region::full_space(1));
    CHECK(full.converged);
    CHECK(full.value == doctest::Approx(1.0).epsilon(1e-8));

    auto part = integrate_density(spec, Region::p_box({Interval{-0.7, 1.2}}), 1e-9);
    CHECK(part.value ==
          doctest::Approx(sigmoid2(1.2) - sigmoid2(-0.7)).epsilon(1e-8));

    // Half-infinite side.
    Region half;
    half.p = {Interval{0.0, std::numeric_limits<double>::infinity()}};
    auto tail = integrate_density(spec, half, 1e-9);
    CHECK(tail.value == doctest::Approx(1.0 - sigmoid2(0.0)).epsilon(1e-7));

    // Full space equals the generic count for wider supports too.
    CHECK(integrate_density(univariate({0, 3, 7}), Region::full_space(1)).value ==
          doctest::Approx(7.0).epsilon(1e-7));
}

TEST_CASE("full space matches the polytope count in two variables") {
    SystemSpec spec = bilinear();
    auto r = integrate_density(spec, Region::full_space(2));
    std::vector<Polytope> polys{polytope_of(spec.support(0)),
                                polytope_of(spec.support(1))};
    CHECK(r.value == doctest::Approx(bernshtein_count(polys)).epsilon(1e-7));
    CHECK(r.converged);
    CHECK(r.evals > 0);
}

TEST_CASE("partial angle regions scale the density") {
    // The density does not depend on q, so restricting angles multiplies
    // the count by the angle fraction.
    SystemSpec spec = univariate({0, 1});
    Region wedge;
    wedge.p = {Interval{-2.0, 2.0}};
    wedge.q_full = false;
    wedge.q = {Interval{0.0, M_PI / 2}};
    auto quarter = integrate_density(spec, wedge, 1e-9);
    auto whole = integrate_density(spec, Region::p_box({Interval{-2, 2}}), 1e-9);
    CHECK(quarter.value == doctest::Approx(whole.value / 4.0).epsilon(1e-10));
}

TEST_CASE("monte carlo agrees with quadrature and ignores worker count") {
    SystemSpec spec = bilinear();
    Region region = Region::p_box({Interval{-1, 1}, Interval{-1, 1}});
    auto quad = integrate_density(spec, region, 1e-9);
    auto mc1 = integrate_mc(spec, region, 20000, 31);
    CHECK(std::abs(mc1.value - quad.value) < 3.0 * mc1.stderr_);
    CHECK(mc1.stderr_ > 0.0);
    CHECK(mc1.samples == 20000);

    auto mc3 = integrate_mc(spec, region, 20000, 31, 3);
    CHECK(mc1.value == mc3.value);  // bitwise: fixed block reduction
    CHECK(mc1.stderr_ == mc3.stderr_);

    auto other = integrate_mc(spec, region, 20000, 32);
    CHECK(other.value != mc1.value);
}

TEST_CASE("region validation") {
    SystemSpec spec = univariate({0, 1});
    Region bad;
    bad.p = {Interval{0, 1}, Interval{0, 1}};
    CHECK_THROWS_AS(integrate_density(spec, bad), ValidationError);
    Region flipped;
    flipped.p = {Interval{2, 1}};
    CHECK_THROWS_AS(integrate_density(spec, flipped), ValidationError);
    Region badq;
    badq.p = {Interval{0, 1}};
    badq.q_full = false;
    badq.q = {Interval{0, 10.0}};  // longer than the circle
    CHECK_THROWS_AS(integrate_density(spec, badq), ValidationError);
}

}  // TEST_SUITE

#include <cmath>
#include <numbers>

#include "doctest.h"
#include "meanrev/quadrature.hpp"

using meanrev::quad::integrate;

TEST_SUITE("quadrature") {

TEST_CASE("polynomials are exact in one panel") {
    auto r = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(r.converged);
    CHECK(r.panels == 1);
    CHECK(r.value == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

    // K15 integrates polynomials up to degree 22 exactly.
    auto p9 = integrate([](double x) { return 10.0 * std::pow(x, 9); }, -1.0, 2.0, 1e-12);
    CHECK(p9.value == doctest::Approx(std::pow(2.0, 10) - 1.0).epsilon(1e-14));
}

TEST_CASE("oscillatory integrand needs subdivision and stays accurate") {
    // [0, 35] is ~5.6 periods with no symmetry a 15-point rule could exploit.
    auto r = integrate([](double x) { return std::sin(x); }, 0.0, 35.0, 1e-10, 1e-12);
    CHECK(r.converged);
    CHECK(r.panels > 1);
    CHECK(r.value == doctest::Approx(1.0 - std::cos(35.0)).epsilon(1e-10));

    auto half = integrate([](double x) { return std::sin(x); }, 0.0, std::numbers::pi, 1e-12);
    CHECK(half.value == doctest::Approx(2.0).epsilon(1e-13));
}

TEST_CASE("error estimate bounds the true error on a smooth integrand") {
    // exp(-x) on [0, 30]: true value 1 - e^-30
    auto r = integrate([](double x) { return std::exp(-x); }, 0.0, 30.0, 1e-10);
    const double truth = 1.0 - std::exp(-30.0);
    CHECK(r.converged);
    CHECK(std::abs(r.value - truth) <= std::max(r.abs_error, 1e-14));
    CHECK(std::abs(r.value - truth) / truth < 1e-10);
}

TEST_CASE("sharp gaussian bump off-center converges to the right mass") {
    // exp(-((x-0.77)/1e-3)^2 / 2): mass ~ 1e-3 sqrt(2 pi); a panel budget
    // stress case for the worst-first refinement.
    const double mu = 0.77, s = 1e-3;
    auto f = [=](double x) {
        const double t = (x - mu) / s;
        return std::exp(-0.5 * t * t);
    };
    auto r = integrate(f, 0.0, 1.0, 1e-9);
    CHECK(r.converged);
    CHECK(r.value == doctest::Approx(s * std::sqrt(2.0 * std::numbers::pi)).epsilon(1e-8));
}

TEST_CASE("degenerate and reversed intervals") {
    auto zero = integrate([](double x) { return x; }, 2.0, 2.0, 1e-10);
    CHECK(zero.value == 0.0);
    CHECK(zero.converged);
}

TEST_CASE("tolerance knob actually tightens the result") {
    auto f = [](double x) { return std::exp(std::sin(3.0 * x)); };
    auto loose = integrate(f, 0.0, 10.0, 1e-4);
    auto tight = integrate(f, 0.0, 10.0, 1e-12);
    CHECK(tight.converged);
    // the tight answer is the reference; loose must sit within its own claim
    CHECK(std::abs(loose.value - tight.value) <=
          std::max(1e-4 * std::abs(tight.value), loose.abs_error) * 1.01);
    CHECK(tight.panels >= loose.panels);
}

}  // TEST_SUITE

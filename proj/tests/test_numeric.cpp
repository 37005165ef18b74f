#include <cmath>

#include "doctest.h"
#include "tlcp/numeric.hpp"

using namespace tlcp;

TEST_CASE("compensated accumulator survives catastrophic cancellation") {
    Accumulator acc;
    acc.add(1e16);
    for (int i = 0; i < 10; ++i) acc.add(1.0);
    acc.add(-1e16);
    CHECK(acc.total() == doctest::Approx(10.0).epsilon(1e-15));

    // plain summation loses the small terms entirely here
    double naive = 1e16;
    for (int i = 0; i < 10; ++i) naive += 1.0;
    naive += -1e16;
    CHECK(naive != 10.0);
}

TEST_CASE("normal cdf and pdf reference values") {
    CHECK(normal_cdf(0.0) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(normal_cdf(1.96) == doctest::Approx(0.9750021048517795).epsilon(1e-12));
    CHECK(normal_cdf(-1.0) + normal_cdf(1.0) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(normal_pdf(0.0) == doctest::Approx(0.3989422804014327).epsilon(1e-14));
    CHECK(chi2_cdf_1(2.0) == doctest::Approx(std::erf(1.0)).epsilon(1e-14));
    CHECK(chi2_cdf_1(-1.0) == 0.0);
}

TEST_CASE("quadrature reproduces closed forms") {
    const double third = integrate([](double x) { return x * x; }, 0.0, 1.0, 1e-12);
    CHECK(third == doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    const double mass = integrate([](double t) { return normal_pdf(t); }, -10.0, 10.0, 1e-12);
    CHECK(mass == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("quadrature matches the Gaussian partial second moment identity") {
    // int_a^b t^2 phi(t) dt = Phi(b) - Phi(a) - (b phi(b) - a phi(a))
    const double a = -0.7, b = 1.3;
    const double numeric = integrate([](double t) { return t * t * normal_pdf(t); }, a, b, 1e-12);
    const double closed =
        normal_cdf(b) - normal_cdf(a) - (b * normal_pdf(b) - a * normal_pdf(a));
    CHECK(numeric == doctest::Approx(closed).epsilon(1e-10));
}

TEST_CASE("quadrature resolves a narrow spike inside a moderate interval") {
    // unit-mass Gaussian of width 0.01 centered at 0.4, integrated over [-3, 3]
    const double s = 0.01;
    const double got = integrate(
        [s](double t) { return normal_pdf((t - 0.4) / s) / s; }, -3.0, 3.0, 1e-10);
    CHECK(got == doctest::Approx(1.0).epsilon(1e-7));
}

#include <doctest.h>

#include <cmath>
#include <vector>

#include "errors.hpp"
#include "special.hpp"

using namespace pdqkd;
using special::kPi;

namespace {

// Test-local trapezoid over [0, pi], independent of integrate_periodic.
double trapezoid_0_pi(const std::function<double(double)>& f, int n = 4096) {
  double s = 0.5 * (f(0.0) + f(kPi));
  for (int j = 1; j < n; ++j) s += f(kPi * j / n);
  return s * kPi / n;
}

// Test-local Simpson rule on [a, b].
double simpson(const std::function<double(double)>& f, double a, double b,
               int n = 8192) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int j = 1; j < n; ++j) s += f(a + j * h) * (j % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

// (1/pi) Int_0^pi e^{z cos t} cos(q t) dt
double bessel_integral(int q, double z) {
  return trapezoid_0_pi([&](double t) {
           return std::exp(z * std::cos(t)) * std::cos(q * t);
         }) /
         kPi;
}

// Appendix-style Struve integral, valid for q >= 0.
double struve_integral(int q, double z) {
  const double pref = std::pow(z, q) / (std::pow(2.0, q - 1) *
                                        std::sqrt(kPi) * std::tgamma(q + 0.5));
  return pref * simpson(
                    [&](double t) {
                      return std::sinh(z * std::cos(t)) *
                             std::pow(std::sin(t), 2 * q);
                    },
                    0.0, kPi / 2.0);
}

}  // namespace

TEST_CASE("bessel_i reference values") {
  CHECK(special::bessel_i(0, 0.0) == 1.0);
  CHECK(special::bessel_i(1, 0.0) == 0.0);
  // series oracle frozen: I_0(1)
  CHECK(special::bessel_i(0, 1.0) == doctest::Approx(1.2660658777520084).epsilon(1e-12));
  CHECK_THROWS_AS(special::bessel_i(0, -1.0), std::domain_error);
}

TEST_CASE("bessel_i matches its integral representation over [0, 50]") {
  for (int q = 0; q <= 2; ++q) {
    for (double z : {0.1, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0, 35.0, 50.0}) {
      const double series = special::bessel_i(q, z);
      const double integral = bessel_integral(q, z);
      CHECK(std::abs(series - integral) <=
            doctest::Approx(1e-9 * std::abs(integral)).epsilon(0));
    }
  }
}

TEST_CASE("bessel_i1_over_z limit and consistency") {
  CHECK(special::bessel_i1_over_z(0.0) == doctest::Approx(0.5).epsilon(1e-15));
  for (double z : {0.3, 1.0, 4.0})
    CHECK(special::bessel_i1_over_z(z) ==
          doctest::Approx(special::bessel_i(1, z) / z).epsilon(1e-13));
}

TEST_CASE("struve_l reference values") {
  CHECK(special::struve_l(0, 0.0) == 0.0);
  // series oracle frozen: L_0(1), L_0(0.2)
  CHECK(special::struve_l(0, 1.0) == doctest::Approx(0.710243).epsilon(2e-6));
  CHECK(special::struve_l(0, 0.2) == doctest::Approx(0.127890).epsilon(2e-6));
  CHECK_THROWS_AS(special::struve_l(0, -0.5), std::domain_error);
}

TEST_CASE("struve_l matches the integral definition for q in {0,1,2}") {
  for (int q = 0; q <= 2; ++q) {
    for (double z : {0.05, 0.2, 1.0, 3.0, 8.0, 14.0, 20.0}) {
      const double series = special::struve_l(q, z);
      const double integral = struve_integral(q, z);
      CHECK(std::abs(series - integral) <=
            doctest::Approx(1e-8 * std::abs(integral)).epsilon(0));
    }
  }
}

TEST_CASE("struve_l order -1 follows the recurrence L_{-1} = L_1 + 2/pi") {
  for (double z : {0.0, 0.1, 0.7, 2.0, 9.0, 20.0}) {
    const double lhs = special::struve_l(-1, z);
    const double rhs = special::struve_l(1, z) + 2.0 / kPi;
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
  }
}

TEST_CASE("gamma_fn reference values") {
  CHECK(special::gamma_fn(1.0) == doctest::Approx(1.0).epsilon(1e-13));
  CHECK(special::gamma_fn(5.0) == doctest::Approx(24.0).epsilon(1e-13));
  CHECK(special::gamma_fn(0.5) ==
        doctest::Approx(1.7724538509055160).epsilon(1e-12));
  CHECK_THROWS_AS(special::gamma_fn(0.0), std::domain_error);
  CHECK_THROWS_AS(special::gamma_fn(-2.0), std::domain_error);
}

TEST_CASE("gamma_fn against the standard library across a grid") {
  for (double z = 0.1; z < 30.0; z += 0.37)
    CHECK(special::gamma_fn(z) ==
          doctest::Approx(std::tgamma(z)).epsilon(1e-12));
}

TEST_CASE("hyp2f1 reference values") {
  CHECK(special::hyp2f1(0.3, 2.0, 1.5, 0.0) == 1.0);
  CHECK(special::hyp2f1(0.5, 0.0, 1.0, 0.3) == 1.0);
  // identity oracle: 2F1(1,1;2;z) = -ln(1-z)/z
  CHECK(special::hyp2f1(1.0, 1.0, 2.0, 0.5) ==
        doctest::Approx(2.0 * std::log(2.0)).epsilon(1e-12));
  CHECK_THROWS_AS(special::hyp2f1(0.5, 0.5, 1.0, 1.2), std::domain_error);
  CHECK_THROWS_AS(special::hyp2f1(0.5, 0.5, -1.0, 0.2), std::domain_error);
}

TEST_CASE("hyp2f1 terminating series work at z = 1") {
  // polynomial case: 2F1(-1, b; c; 1) = 1 - b/c
  CHECK(special::hyp2f1(-1.0, 0.5, 2.0, 1.0) ==
        doctest::Approx(1.0 - 0.25).epsilon(1e-14));
}

TEST_CASE("binary_entropy values and symmetry") {
  CHECK(special::binary_entropy(0.5) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(special::binary_entropy(0.0) == 0.0);
  CHECK(special::binary_entropy(1.0) == 0.0);
  CHECK(special::binary_entropy(0.11) ==
        doctest::Approx(0.499916).epsilon(2e-6));
  for (double x = 0.01; x < 0.5; x += 0.013)
    CHECK(special::binary_entropy(x) ==
          doctest::Approx(special::binary_entropy(1.0 - x)).epsilon(1e-14));
  CHECK_THROWS_AS(special::binary_entropy(-0.1), std::domain_error);
  CHECK_THROWS_AS(special::binary_entropy(1.1), std::domain_error);
}

TEST_CASE("integrate_periodic basics") {
  CHECK(special::integrate_periodic([](double) { return 1.0; }) ==
        doctest::Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(special::integrate_periodic(
            [](double t) { return std::cos(t); })) < 1e-14);
  CHECK(special::integrate_periodic(
            [](double t) { return std::exp(std::cos(t)); }) ==
        doctest::Approx(special::bessel_i(0, 1.0)).epsilon(1e-12));
}

TEST_CASE("integrate_periodic is exact for trigonometric polynomials") {
  special::QuadratureSpec spec;
  spec.node_count = 16;
  const double value = special::integrate_periodic(
      [](double t) {
        return 3.0 + std::cos(5.0 * t) - 2.0 * std::sin(7.0 * t) +
               0.1 * std::cos(8.0 * t);
      },
      spec);
  CHECK(std::abs(value - 3.0) < 1e-13);
}

TEST_CASE("integrate_periodic reports non-convergence at the node ceiling") {
  special::QuadratureSpec spec;
  spec.refinement_tolerance = 1e-14;
  // sawtooth: the periodic extension has a jump, so the trapezoid rule
  // converges only quadratically and cannot reach 1e-14
  CHECK_THROWS_AS(
      special::integrate_periodic([](double t) { return t; }, spec),
      NonConvergenceError);
}

TEST_CASE("integrate_finite matches Simpson on a smooth integrand") {
  const double value = special::integrate_finite(
      [](double x) { return std::exp(-x) * std::sin(3.0 * x); }, 0.0, 2.0);
  const double oracle =
      simpson([](double x) { return std::exp(-x) * std::sin(3.0 * x); }, 0.0,
              2.0);
  CHECK(value == doctest::Approx(oracle).epsilon(1e-10));
}

#pragma once

#include <functional>

namespace pdqkd::special {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

// Periodic quadrature control: trapezoid rule with node doubling.
struct QuadratureSpec {
  int node_count = 32;                  // starting node count, >= 16
  double refinement_tolerance = 1e-12;  // relative error target
};

// Modified Bessel function of the first kind I_q(z), integer order q >= 0,
// z >= 0. Power series with term-ratio cutoff.
double bessel_i(int order, double z);

// I_1(z)/z, finite at z = 0 (limit 1/2). Stabilizes closed forms whose
// Bessel argument can vanish.
double bessel_i1_over_z(double z);

// Modified Struve function L_q(z) for integer order q >= -1, z >= 0.
double struve_l(int order, double z);

// Gamma function for z > 0 (Lanczos).
double gamma_fn(double z);

// log Gamma for z > 0.
double lgamma_fn(double z);

// log of the binomial coefficient C(n, k).
double log_binomial(long long n, long long k);

// Gauss hypergeometric 2F1(a, b; c; z) by series summation. Requires c not
// a non-positive integer. Terminating series (a or b a non-positive
// integer) are evaluated for any z; otherwise 0 <= z < 1 is required.
double hyp2f1(double a, double b, double c, double z);

// Binary Shannon entropy, H(0) = H(1) = 0 by continuity.
double binary_entropy(double x);

// (1/2pi) Int_0^{2pi} f(theta) dtheta for smooth periodic f. Trapezoid rule
// with node doubling until the refinement tolerance is met; throws
// NonConvergenceError at the node ceiling.
double integrate_periodic(const std::function<double(double)>& f,
                          const QuadratureSpec& spec = {});

// Int_a^b f(x) dx for smooth f on a finite interval (Romberg with
// interval doubling). Used for the partial-range angle integrals.
double integrate_finite(const std::function<double(double)>& f, double a,
                        double b, double rel_tol = 1e-12);

}  // namespace pdqkd::special

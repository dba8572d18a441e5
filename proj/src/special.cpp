#include "special.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "errors.hpp"

namespace pdqkd::special {

namespace {

constexpr double kSeriesCutoff = 1e-16;  // next term < cutoff * partial sum
constexpr int kMaxSeriesTerms = 200000;

// Lanczos approximation, g = 7, 9 coefficients.
constexpr double kLanczos[9] = {
    0.99999999999980993,      676.5203681218851,     -1259.1392167224028,
    771.32342877765313,       -176.61502916214059,   12.507343278686905,
    -0.13857109526572012,     9.9843695780195716e-6, 1.5056327351493116e-7};

double lanczos_sum(double z_minus_1) {
  double a = kLanczos[0];
  for (int i = 1; i < 9; ++i) a += kLanczos[i] / (z_minus_1 + i);
  return a;
}

}  // namespace

double lgamma_fn(double z) {
  if (!(z > 0.0)) throw std::domain_error("lgamma_fn: argument must be > 0");
  if (z < 0.5) return lgamma_fn(z + 1.0) - std::log(z);
  const double x = z - 1.0;
  const double t = x + 7.5;
  return 0.5 * std::log(kTwoPi) + (x + 0.5) * std::log(t) - t +
         std::log(lanczos_sum(x));
}

double gamma_fn(double z) {
  if (!(z > 0.0)) throw std::domain_error("gamma_fn: argument must be > 0");
  if (z < 0.5) return gamma_fn(z + 1.0) / z;
  if (z > 140.0) return std::exp(lgamma_fn(z));
  const double x = z - 1.0;
  const double t = x + 7.5;
  return std::sqrt(kTwoPi) * std::pow(t, x + 0.5) * std::exp(-t) *
         lanczos_sum(x);
}

double log_binomial(long long n, long long k) {
  if (k < 0 || n < 0 || k > n)
    throw std::domain_error("log_binomial: need 0 <= k <= n");
  return lgamma_fn(double(n) + 1.0) - lgamma_fn(double(k) + 1.0) -
         lgamma_fn(double(n - k) + 1.0);
}

double bessel_i(int order, double z) {
  if (order < 0) throw std::domain_error("bessel_i: order must be >= 0");
  if (z < 0.0) throw std::domain_error("bessel_i: argument must be >= 0");
  if (z == 0.0) return order == 0 ? 1.0 : 0.0;
  const double z2 = 0.25 * z * z;
  double term = 1.0;
  for (int i = 1; i <= order; ++i) term *= 0.5 * z / i;  // (z/2)^q / q!
  double sum = term;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    term *= z2 / (double(k) * double(k + order));
    sum += term;
    if (term < kSeriesCutoff * sum) return sum;
  }
  throw NonConvergenceError("bessel_i: series did not converge");
}

double bessel_i1_over_z(double z) {
  if (z < 0.0) throw std::domain_error("bessel_i1_over_z: argument must be >= 0");
  const double z2 = 0.25 * z * z;
  double term = 0.5;
  double sum = term;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    term *= z2 / (double(k) * double(k + 1));
    sum += term;
    if (term < kSeriesCutoff * sum) return sum;
  }
  throw NonConvergenceError("bessel_i1_over_z: series did not converge");
}

double struve_l(int order, double z) {
  if (order < -1) throw std::domain_error("struve_l: order must be >= -1");
  if (z < 0.0) throw std::domain_error("struve_l: argument must be >= 0");
  if (z == 0.0) return order == -1 ? 2.0 / kPi : 0.0;
  const double z2 = 0.25 * z * z;
  // t_0 = (z/2)^{q+1} / (Gamma(3/2) Gamma(q+3/2))
  double term = std::pow(0.5 * z, order + 1) /
                (gamma_fn(1.5) * gamma_fn(order + 1.5));
  double sum = term;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    term *= z2 / ((k + 0.5) * (k + order + 0.5));
    sum += term;
    if (term < kSeriesCutoff * sum) return sum;
  }
  throw NonConvergenceError("struve_l: series did not converge");
}

double hyp2f1(double a, double b, double c, double z) {
  auto nonpositive_int = [](double v) {
    return v <= 0.0 && v == std::floor(v);
  };
  if (nonpositive_int(c))
    throw std::domain_error("hyp2f1: c must not be a non-positive integer");
  const bool terminates = nonpositive_int(a) || nonpositive_int(b);
  if (!terminates && !(z >= 0.0 && z < 1.0))
    throw std::domain_error("hyp2f1: need 0 <= z < 1 for a non-terminating series");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 1000000; ++k) {
    term *= (a + k) * (b + k) / ((c + k) * (k + 1.0)) * z;
    if (term == 0.0) return sum;
    sum += term;
    if (!terminates && std::abs(term) < kSeriesCutoff * std::abs(sum))
      return sum;
  }
  throw NonConvergenceError("hyp2f1: series did not converge");
}

double binary_entropy(double x) {
  if (!(x >= 0.0 && x <= 1.0))
    throw std::domain_error("binary_entropy: argument must be in [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

double integrate_periodic(const std::function<double(double)>& f,
                          const QuadratureSpec& spec) {
  int n = std::max(spec.node_count, 16);
  const double tol = spec.refinement_tolerance;
  double sum = 0.0;
  double fmax = 0.0;
  for (int j = 0; j < n; ++j) {
    const double v = f(kTwoPi * j / n);
    sum += v;
    fmax = std::max(fmax, std::abs(v));
  }
  double prev = sum / n;
  constexpr int kNodeCeiling = 1 << 21;
  while (n <= kNodeCeiling) {
    // new nodes sit halfway between the old ones
    double add = 0.0;
    for (int j = 0; j < n; ++j) {
      const double v = f(kTwoPi * (2 * j + 1) / (2.0 * n));
      add += v;
      fmax = std::max(fmax, std::abs(v));
    }
    sum += add;
    n *= 2;
    const double cur = sum / n;
    if (std::abs(cur - prev) <= tol * std::abs(cur) + 1e-15 * fmax) return cur;
    prev = cur;
  }
  throw NonConvergenceError(
      "integrate_periodic: tolerance unmet at the node ceiling");
}

double integrate_finite(const std::function<double(double)>& f, double a,
                        double b, double rel_tol) {
  if (!(b >= a)) throw std::domain_error("integrate_finite: need b >= a");
  if (a == b) return 0.0;
  constexpr int kMaxLevels = 24;
  const double h0 = b - a;
  double fa = f(a), fb = f(b);
  double fmax = std::max(std::abs(fa), std::abs(fb));
  std::vector<double> row{0.5 * h0 * (fa + fb)};
  long long n = 1;  // panel count of the underlying trapezoid
  for (int level = 1; level <= kMaxLevels; ++level) {
    const double h = h0 / (2.0 * n);
    double add = 0.0;
    for (long long j = 0; j < n; ++j) {
      const double v = f(a + h * (2 * j + 1));
      add += v;
      fmax = std::max(fmax, std::abs(v));
    }
    const double trap = 0.5 * row[0] + h * add;
    n *= 2;
    std::vector<double> next(level + 1);
    next[0] = trap;
    double pow4 = 1.0;
    for (int k = 1; k <= level; ++k) {
      pow4 *= 4.0;
      next[k] = next[k - 1] + (next[k - 1] - row[k - 1]) / (pow4 - 1.0);
    }
    if (level >= 3) {
      const double cur = next[level];
      const double prv = row[level - 1];
      if (std::abs(cur - prv) <=
          rel_tol * std::abs(cur) + 1e-15 * fmax * h0)
        return cur;
    }
    row = std::move(next);
  }
  throw NonConvergenceError("integrate_finite: tolerance unmet");
}

}  // namespace pdqkd::special

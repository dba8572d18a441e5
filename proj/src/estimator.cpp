#include "estimator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "errors.hpp"
#include "special.hpp"

namespace pdqkd::estimator {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

// D_{ij} = p^t_i p^w_j - p^w_i p^t_j
double cross(const TwoSettingInput& in, int i, int j) {
  auto pt = [&](int k) {
    return k == 0 ? in.total.p0 : (k == 1 ? in.total.p1 : in.total.p2);
  };
  auto pw = [&](int k) {
    return k == 0 ? in.weak.p0 : (k == 1 ? in.weak.p1 : in.weak.p2);
  };
  return pt(i) * pw(j) - pw(i) * pt(j);
}

// The estimation algebra works whenever the three low-order cross terms
// share one sign (thermal-like structure) or all carry the mirrored sign
// (WCP interference). Mixed signs invalidate the bounds.
double orientation_of(const TwoSettingInput& in) {
  const double d10 = cross(in, 1, 0);
  const double d21 = cross(in, 2, 1);
  const double d20 = cross(in, 2, 0);
  if (d21 == 0.0 || d10 == 0.0)
    throw EstimationError(
        "estimation: degenerate cross terms, settings are not distinct");
  const double sigma = d21 > 0.0 ? 1.0 : -1.0;
  if (d10 * sigma <= 0.0 || d20 * sigma < 0.0)
    throw EstimationError(
        "estimation: inconsistent sign structure across the cross terms");
  return sigma;
}

}  // namespace

double bound_y0_upper(const TwoSettingInput& in) {
  if (!(in.e0 > 0.0))
    throw EstimationError("bound_y0_upper: e0 must be > 0");
  double best = kInf;
  if (in.strong.p0 > 0.0)
    best = std::min(best, in.strong.error_gain / (in.strong.p0 * in.e0));
  if (in.weak.p0 > 0.0)
    best = std::min(best, in.weak.error_gain / (in.weak.p0 * in.e0));
  if (best == kInf)
    throw EstimationError("bound_y0_upper: no branch with p0 > 0");
  return clamp01(best);
}

double bound_y0_lower(const TwoSettingInput& in) {
  orientation_of(in);
  const double d10 = cross(in, 1, 0);
  const double v =
      (in.total.p1 * in.weak.gain - in.weak.p1 * in.total.gain) / d10;
  return clamp01(std::max(v, 0.0));
}

double bound_y1_lower(const TwoSettingInput& in, double y0) {
  orientation_of(in);
  const double d21 = cross(in, 2, 1);
  const double d20 = cross(in, 2, 0);
  const double v = (in.total.p2 * in.weak.gain - in.weak.p2 * in.total.gain -
                    d20 * y0) /
                   d21;
  return clamp01(std::max(v, 0.0));
}

double bound_signal_term(const TwoSettingInput& in, Branch branch,
                         double y0_upper) {
  orientation_of(in);
  const double d21 = cross(in, 2, 1);
  const double d20 = cross(in, 2, 0);
  const SettingObservation& o = branch == Branch::Weak ? in.weak : in.strong;
  const double coeff = o.p0 - o.p1 * d20 / d21;
  if (coeff > 1e-12 * std::max(o.p0, 1e-300))
    throw EstimationError(
        "bound_signal_term: Y0 coefficient condition violated");
  const double v = o.p1 *
                       (in.total.p2 * in.weak.gain -
                        in.weak.p2 * in.total.gain) /
                       d21 +
                   coeff * y0_upper;
  return std::max(v, 0.0);
}

double bound_e1_upper(const TwoSettingInput& in, double y1_lower,
                      double y0_lower) {
  if (!(y1_lower > 0.0))
    throw EstimationError("bound_e1_upper: Y1 lower bound is zero");
  orientation_of(in);
  double best = kInf;
  if (in.strong.p1 > 0.0)
    best = std::min(best,
                    (in.strong.error_gain - in.strong.p0 * y0_lower * in.e0) /
                        (in.strong.p1 * y1_lower));
  if (in.weak.p1 > 0.0)
    best = std::min(best,
                    (in.weak.error_gain - in.weak.p0 * y0_lower * in.e0) /
                        (in.weak.p1 * y1_lower));
  const double d10 = cross(in, 1, 0);
  best = std::min(best, (in.weak.p0 * in.total.error_gain -
                         in.total.p0 * in.weak.error_gain) /
                            (d10 * y1_lower));
  if (best == kInf)
    throw EstimationError("bound_e1_upper: no usable expression");
  return std::clamp(best, 0.0, 0.5);
}

DecoyBounds estimate_two_setting(const TwoSettingInput& in) {
  DecoyBounds b;
  b.y0_upper = bound_y0_upper(in);
  b.y0_lower = bound_y0_lower(in);
  // worst-case the unknown background upward for the Y1 bound
  b.y1_lower = bound_y1_lower(in, b.y0_upper);
  b.signal_term_weak = bound_signal_term(in, Branch::Weak, b.y0_upper);
  b.signal_term_strong = bound_signal_term(in, Branch::Strong, b.y0_upper);
  b.e1_upper = bound_e1_upper(in, b.y1_lower, b.y0_lower);
  return b;
}

SignConditionReport verify_sign_conditions(const PhotonDistribution& total,
                                           const PhotonDistribution& weak) {
  const int n_max =
      std::min(total.max_photon_number(), weak.max_photon_number());

  // sigma = +1 is the thermal structure; sigma = -1 its mirror image
  auto run_for = [&](double sigma) {
    SignConditionReport report;
    report.orientation = int(sigma);
    auto run = [&](const std::string& name, int i, auto expected_sign) {
      SignConditionReport::Entry e;
      e.name = name;
      e.worst_margin = kInf;
      const double pti = total[i];
      const double pwi = weak[i];
      for (int n = 0; n <= n_max; ++n) {
        const double value = pti * weak[n] - pwi * total[n];
        const double scale =
            std::abs(pti * weak[n]) + std::abs(pwi * total[n]);
        if (scale <= 0.0) continue;
        const double margin = sigma * expected_sign(n) * value / scale;
        if (margin < e.worst_margin) {
          e.worst_margin = margin;
          e.worst_n = n;
        }
      }
      if (e.worst_margin == kInf) e.worst_margin = 0.0;
      e.pass = e.worst_margin >= -1e-9;
      report.entries.push_back(e);
    };

    run("p^t_2 p^w_n - p^w_2 p^t_n, sign flip at n = 2", 2,
        [](int n) { return n <= 1 ? +1.0 : -1.0; });
    run("p^t_1 p^w_n - p^w_1 p^t_n, sign flip at n = 2", 1,
        [](int n) { return n <= 1 ? +1.0 : -1.0; });
    // cross(0, n) = -(p^t_n p^w_0 - p^w_n p^t_0)
    run("p^t_n p^w_0 - p^w_n p^t_0 one-signed", 0,
        [](int) { return -1.0; });

    report.all_pass = true;
    report.worst_margin = kInf;
    for (const auto& e : report.entries) {
      report.all_pass = report.all_pass && e.pass;
      report.worst_margin = std::min(report.worst_margin, e.worst_margin);
    }
    return report;
  };

  const SignConditionReport plus = run_for(+1.0);
  const SignConditionReport minus = run_for(-1.0);
  return plus.worst_margin >= minus.worst_margin ? plus : minus;
}

std::vector<double> solve_linear(const std::vector<double>& matrix,
                                 const std::vector<double>& rhs,
                                 double* residual) {
  const int n = int(rhs.size());
  if (matrix.size() != size_t(n) * size_t(n))
    throw std::invalid_argument("solve_linear: shape mismatch");

  auto lu_solve = [n](std::vector<double> a, std::vector<double> b) {
    std::vector<int> perm(n);
    for (int i = 0; i < n; ++i) perm[i] = i;
    for (int col = 0; col < n; ++col) {
      int pivot = col;
      double best = std::abs(a[size_t(col) * n + col]);
      for (int row = col + 1; row < n; ++row) {
        const double v = std::abs(a[size_t(row) * n + col]);
        if (v > best) {
          best = v;
          pivot = row;
        }
      }
      if (best == 0.0)
        throw NonConvergenceError("solve_linear: singular matrix");
      if (pivot != col) {
        for (int k = 0; k < n; ++k)
          std::swap(a[size_t(col) * n + k], a[size_t(pivot) * n + k]);
        std::swap(b[col], b[pivot]);
      }
      for (int row = col + 1; row < n; ++row) {
        const double f = a[size_t(row) * n + col] / a[size_t(col) * n + col];
        a[size_t(row) * n + col] = 0.0;
        if (f == 0.0) continue;
        for (int k = col + 1; k < n; ++k)
          a[size_t(row) * n + k] -= f * a[size_t(col) * n + k];
        b[row] -= f * b[col];
      }
    }
    std::vector<double> x(n);
    for (int row = n - 1; row >= 0; --row) {
      double s = b[row];
      for (int k = row + 1; k < n; ++k) s -= a[size_t(row) * n + k] * x[k];
      x[row] = s / a[size_t(row) * n + row];
    }
    return x;
  };

  std::vector<double> x = lu_solve(matrix, rhs);

  // residuals in extended precision; the Pascal systems are too
  // ill-conditioned for working-precision refinement to recover the
  // trailing components
  auto compute_residual = [&](const std::vector<double>& sol) {
    std::vector<double> r(n);
    double rn = 0.0, bn = 0.0;
    for (int i = 0; i < n; ++i) {
      long double s = rhs[i];
      for (int k = 0; k < n; ++k)
        s -= (long double)matrix[size_t(i) * n + k] * (long double)sol[k];
      r[i] = double(s);
      rn = std::max(rn, std::abs(r[i]));
      bn = std::max(bn, std::abs(rhs[i]));
    }
    return std::pair(r, bn > 0.0 ? rn / bn : rn);
  };

  auto [r, rel] = compute_residual(x);
  for (int step = 0; step < 3 && rel > 0.0; ++step) {
    const double before = rel;
    const std::vector<double> dx = lu_solve(matrix, r);
    for (int i = 0; i < n; ++i) x[i] += dx[i];
    std::tie(r, rel) = compute_residual(x);
    if (rel >= before) break;
  }
  if (residual) *residual = rel;
  return x;
}

// C(i+j, j) by Pascal's rule; exact in double well beyond the sizes used
std::vector<double> pascal_matrix(int size) {
  std::vector<double> a(size_t(size) * size_t(size), 1.0);
  for (int i = 1; i < size; ++i)
    for (int j = 1; j < size; ++j)
      a[size_t(i) * size + j] =
          a[size_t(i - 1) * size + j] + a[size_t(i) * size + j - 1];
  return a;
}

double pascal_determinant(int size) {
  std::vector<double> a = pascal_matrix(size);
  // LU without pivoting is stable here (totally positive matrix)
  double det = 1.0;
  for (int col = 0; col < size; ++col) {
    det *= a[size_t(col) * size + col];
    for (int row = col + 1; row < size; ++row) {
      const double f = a[size_t(row) * size + col] / a[size_t(col) * size + col];
      for (int k = col; k < size; ++k)
        a[size_t(row) * size + k] -= f * a[size_t(col) * size + k];
    }
  }
  return det;
}

namespace {

// long-double pivoted LU over a double system; the truncated Pascal
// systems are ill-conditioned enough that the extra mantissa matters
std::vector<double> solve_linear_extended(const std::vector<double>& matrix,
                                          const std::vector<double>& rhs,
                                          double* residual) {
  const int n = int(rhs.size());
  std::vector<long double> a(matrix.begin(), matrix.end());
  std::vector<long double> b(rhs.begin(), rhs.end());
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    for (int row = col + 1; row < n; ++row)
      if (std::abs(a[size_t(row) * n + col]) >
          std::abs(a[size_t(pivot) * n + col]))
        pivot = row;
    if (a[size_t(pivot) * n + col] == 0.0L)
      throw NonConvergenceError("pnr_recover: singular system");
    if (pivot != col) {
      for (int k = 0; k < n; ++k)
        std::swap(a[size_t(col) * n + k], a[size_t(pivot) * n + k]);
      std::swap(b[col], b[pivot]);
    }
    for (int row = col + 1; row < n; ++row) {
      const long double f = a[size_t(row) * n + col] / a[size_t(col) * n + col];
      for (int k = col; k < n; ++k)
        a[size_t(row) * n + k] -= f * a[size_t(col) * n + k];
      b[row] -= f * b[col];
    }
  }
  std::vector<long double> x(n);
  for (int row = n - 1; row >= 0; --row) {
    long double s = b[row];
    for (int k = row + 1; k < n; ++k) s -= a[size_t(row) * n + k] * x[k];
    x[row] = s / a[size_t(row) * n + row];
  }
  if (residual) {
    long double rn = 0.0L, bn = 0.0L;
    for (int i = 0; i < n; ++i) {
      long double s = rhs[i];
      for (int k = 0; k < n; ++k)
        s -= (long double)matrix[size_t(i) * n + k] * x[k];
      rn = std::max(rn, std::abs(s));
      bn = std::max(bn, (long double)std::abs(rhs[i]));
    }
    *residual = double(bn > 0.0L ? rn / bn : rn);
  }
  return std::vector<double>(x.begin(), x.end());
}

// Solve the joint-probability system Q^m = sum_n p_{n,m} Y_n. Equivalent
// to the rescaled Pascal system but diagonally equilibrated, which keeps
// the trailing yields recoverable in double precision.
PnrRecovery recover_from_joint(const std::vector<double>& joint,
                               const std::vector<double>& gains,
                               const std::vector<double>& error_gains) {
  const int n = int(gains.size());
  PnrRecovery rec;
  rec.m_max = n - 1;

  double res_y = 0.0;
  rec.yields = solve_linear_extended(joint, gains, &res_y);
  for (double& y : rec.yields) y = std::clamp(y, 0.0, 1.0);

  double res_e = 0.0;
  if (!error_gains.empty()) {
    if (error_gains.size() != gains.size())
      throw std::invalid_argument("pnr_recover: length mismatch");
    const std::vector<double> ye =
        solve_linear_extended(joint, error_gains, &res_e);
    rec.error_rates.resize(n);
    for (int i = 0; i < n; ++i)
      rec.error_rates[i] =
          rec.yields[i] > 0.0 ? std::clamp(ye[i] / rec.yields[i], 0.0, 1.0)
                              : 0.0;
  }
  rec.residual = std::max(res_y, res_e);
  rec.well_conditioned = rec.residual <= 1e-8;
  return rec;
}

}  // namespace

PnrRecovery pnr_recover_thermal(const std::vector<double>& gains,
                                const std::vector<double>& error_gains,
                                const ThermalSource& src) {
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  if (!(mu > 0.0) || !(t < 1.0) || !(t > 0.0))
    throw std::domain_error(
        "pnr_recover_thermal: need mu > 0 and 0 < t < 1 for the rescaling");
  const int n = int(gains.size());
  if (n == 0) throw std::invalid_argument("pnr_recover_thermal: no gains");

  std::vector<double> joint(size_t(n) * size_t(n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      joint[size_t(m) * n + k] = photonstats::thermal_joint(src, k, m);
  PnrRecovery rec = recover_from_joint(joint, gains, error_gains);

  // the rescaled Pascal coordinates, for the record:
  // X_m = (1+mu)^{m+1} Q^m / [mu(1-t)]^m,  V_n = [mu t/(1+mu)]^n Y_n
  rec.x.resize(n);
  rec.v.resize(n);
  for (int m = 0; m < n; ++m)
    rec.x[m] = gains[m] * std::exp(double(m + 1) * std::log1p(mu) -
                                   double(m) * std::log(mu * (1.0 - t)));
  for (int k = 0; k < n; ++k)
    rec.v[k] = rec.yields[k] * std::exp(double(k) * (std::log(mu * t) -
                                                     std::log1p(mu)));
  return rec;
}

PnrRecovery pnr_recover_wcp(const std::vector<double>& gains,
                            const std::vector<double>& error_gains,
                            const WcpSource& src, const QuadratureSpec& spec) {
  const int n = int(gains.size());
  if (n == 0) throw std::invalid_argument("pnr_recover_wcp: no gains");
  std::vector<double> joint(size_t(n) * size_t(n));
  for (int m = 0; m < n; ++m)
    for (int k = 0; k < n; ++k)
      joint[size_t(m) * n + k] = photonstats::wcp_joint(src, k, m, spec);
  PnrRecovery rec = recover_from_joint(joint, gains, error_gains);
  rec.x = gains;
  rec.v = rec.yields;
  return rec;
}

}  // namespace pdqkd::estimator

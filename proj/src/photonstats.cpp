#include "photonstats.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace pdqkd::photonstats {

using special::bessel_i;
using special::bessel_i1_over_z;
using special::integrate_finite;
using special::integrate_periodic;
using special::kPi;
using special::lgamma_fn;
using special::log_binomial;
using special::struve_l;

namespace {

constexpr int kHardCutoffCeiling = 1 << 21;

// Neumaier compensated accumulator.
struct Accumulator {
  double sum = 0.0, c = 0.0;
  void add(double v) {
    const double t = sum + v;
    c += (std::abs(sum) >= std::abs(v)) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + c; }
};

bool probability(double v) { return v >= 0.0 && v <= 1.0; }

// Geometric tail: smallest n such that ratio^{n+1} <= kTailTarget.
int geometric_cutoff(double ratio) {
  if (ratio <= 0.0) return 0;
  const double need = std::log(kTailTarget) / std::log(ratio);
  return std::max(0, int(std::ceil(need)) - 1);
}

PhotonDistribution geometric_distribution(double first, double ratio,
                                          double norm, int n_max) {
  std::vector<double> p;
  p.reserve(n_max + 1);
  double v = first;
  for (int n = 0; n <= n_max; ++n) {
    p.push_back(v);
    v *= ratio;
  }
  // exact geometric tail: norm * ratio^{n_max+1}
  const double tail =
      norm > 0.0 ? norm * std::pow(ratio, double(n_max) + 1.0) : 0.0;
  return PhotonDistribution(std::move(p), tail, norm);
}

PhotonDistribution subtract_distributions(const PhotonDistribution& a,
                                          const PhotonDistribution& b) {
  std::vector<double> p(std::max(a.probabilities().size(),
                                 b.probabilities().size()));
  for (size_t n = 0; n < p.size(); ++n) p[n] = a[int(n)] - b[int(n)];
  const double tail = std::max(a.tail_mass() - b.tail_mass(), 0.0);
  return PhotonDistribution(std::move(p), tail, a.norm() - b.norm());
}

void check_explicit_cutoff(const PhotonDistribution& d, const char* what) {
  if (d.norm() > 0.0 && d.tail_mass() > kTailTarget * d.norm())
    throw CutoffError(std::string(what) +
                      ": requested cutoff leaves too much tail mass");
}

}  // namespace

void ThermalSource::validate() const {
  if (!(mean_photon_number >= 0.0))
    throw ConfigError("thermal source: mean photon number must be >= 0");
  if (!probability(bs_transmittance))
    throw ConfigError("thermal source: transmittance must be in [0, 1]");
}

void WcpSource::validate() const {
  if (!(intensity_one >= 0.0) || !(intensity_two >= 0.0))
    throw ConfigError("wcp source: intensities must be >= 0");
  if (!probability(bs_transmittance))
    throw ConfigError("wcp source: transmittance must be in [0, 1]");
}

double WcpSource::xi() const {
  return 2.0 * std::sqrt(intensity_one * intensity_two *
                         (1.0 - bs_transmittance) * bs_transmittance);
}

double WcpSource::gamma_of(double theta) const {
  const double u = upsilon();
  return u > 0.0 ? (omega() + xi() * std::cos(theta)) / u : 0.0;
}

void StrongSource::validate() const {
  if (!(intensity_one > 0.0) || !(intensity_two > 0.0) || !(threshold > 0.0))
    throw ConfigError("strong source: intensities must be > 0");
  if (!probability(first_bs) || !probability(attenuator))
    throw ConfigError("strong source: transmittances must be in [0, 1]");
  theta_threshold();  // threshold ordering
}

double StrongSource::zeta() const {
  const double r1 = 1.0 - first_bs;
  return 2.0 * kappa() * std::sqrt(first_bs * r1);
}

double StrongSource::intensity_a(double theta) const {
  const double r1 = 1.0 - first_bs;
  return first_bs * intensity_one + r1 * intensity_two +
         2.0 * std::sqrt(first_bs * r1 * intensity_one * intensity_two) *
             std::cos(theta);
}

double StrongSource::intensity_b(double theta) const {
  const double r1 = 1.0 - first_bs;
  return r1 * intensity_one + first_bs * intensity_two -
         2.0 * std::sqrt(first_bs * r1 * intensity_one * intensity_two) *
             std::cos(theta);
}

double StrongSource::theta_threshold() const {
  const double r1 = 1.0 - first_bs;
  const double cross =
      2.0 * std::sqrt(first_bs * r1 * intensity_one * intensity_two);
  if (!(cross > 0.0))
    throw ConfigError("strong source: interference term vanishes, "
                      "no threshold angle exists");
  const double arg =
      (r1 * intensity_one + first_bs * intensity_two - threshold) / cross;
  if (!(arg > -1.0 && arg < 1.0))
    throw ConfigError(
        "strong source: threshold must lie strictly between I_b(0) and I_b(pi)");
  return std::acos(arg);
}

void ThresholdDetector::validate() const {
  if (!probability(dark_count) || !probability(efficiency))
    throw ConfigError("threshold detector: parameters must be in [0, 1]");
}

PhotonDistribution::PhotonDistribution(std::vector<double> probabilities,
                                       double tail_mass, double norm)
    : p_(std::move(probabilities)), tail_(tail_mass), norm_(norm) {
  for (double& v : p_) {
    if (v < -kNegativeClamp)
      throw std::runtime_error(
          "PhotonDistribution: entry below the negative-clamp threshold");
    if (v < 0.0) v = 0.0;
  }
  if (tail_ < 0.0) tail_ = 0.0;
  if (norm_ < 0.0 && norm_ > -kNegativeClamp) norm_ = 0.0;
}

double PhotonDistribution::mean() const {
  Accumulator acc;
  for (size_t n = 1; n < p_.size(); ++n) acc.add(double(n) * p_[n]);
  return norm_ > 0.0 ? acc.value() / norm_ : 0.0;
}

PhotonDistribution PhotonDistribution::normalized() const {
  if (!(norm_ > 0.0))
    throw std::domain_error("PhotonDistribution: cannot normalize zero mass");
  std::vector<double> q = p_;
  for (double& v : q) v /= norm_;
  return PhotonDistribution(std::move(q), tail_ / norm_, 1.0);
}

double thermal_joint(const ThermalSource& src, int n, int m) {
  if (n < 0 || m < 0)
    throw std::domain_error("thermal_joint: photon numbers must be >= 0");
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  if (mu == 0.0) return (n == 0 && m == 0) ? 1.0 : 0.0;
  if (t == 0.0 && n > 0) return 0.0;
  if (t == 1.0 && m > 0) return 0.0;
  double lg = -std::log1p(mu) + log_binomial(n + m, m) +
              double(n + m) * (std::log(mu) - std::log1p(mu));
  if (n > 0) lg += double(n) * std::log(t);
  if (m > 0) lg += double(m) * std::log1p(-t);
  return std::exp(lg);
}

TwoSettingStats thermal_low_order(const ThermalSource& src,
                                  const ThresholdDetector& det) {
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  const double mt = mu * t;
  const double r = 1.0 + mu * (t + (1.0 - t) * det.efficiency);
  const double a = mt / (1.0 + mt);
  const double b = mt / r;
  const double n_th =
      (1.0 - det.dark_count) / (1.0 + mu * det.efficiency * (1.0 - t));
  TwoSettingStats s;
  s.total = {1.0 / (1.0 + mt), a / (1.0 + mt), a * a / (1.0 + mt), 1.0};
  const double c0 = (1.0 - det.dark_count) / r;
  s.no_click = {c0, c0 * b, c0 * b * b, n_th};
  s.click = {s.total.p0 - s.no_click.p0, s.total.p1 - s.no_click.p1,
             s.total.p2 - s.no_click.p2, 1.0 - n_th};
  return s;
}

ConditionalSet thermal_conditionals(const ThermalSource& src,
                                    const ThresholdDetector& det,
                                    int n_max) {
  src.validate();
  det.validate();
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  const double mt = mu * t;
  const double r = 1.0 + mu * (t + (1.0 - t) * det.efficiency);
  const double a = mt / (1.0 + mt);
  const double b = mt / r;
  const double n_th =
      (1.0 - det.dark_count) / (1.0 + mu * det.efficiency * (1.0 - t));

  int n = n_max;
  if (n == kAutoCutoff) {
    n = std::max(geometric_cutoff(a), geometric_cutoff(b));
    // extend until the click tail also meets its relative target
    const double norm_c = 1.0 - n_th;
    while (n < kHardCutoffCeiling) {
      const double tail_c = std::pow(a, double(n) + 1.0) -
                            n_th * std::pow(b, double(n) + 1.0);
      if (!(norm_c > 0.0) || tail_c <= kTailTarget * norm_c) break;
      ++n;
    }
    if (n >= kHardCutoffCeiling)
      throw CutoffError("thermal_conditionals: cutoff ceiling reached");
  }

  ConditionalSet set;
  set.total = geometric_distribution(1.0 / (1.0 + mt), a, 1.0, n);
  set.no_click =
      geometric_distribution((1.0 - det.dark_count) / r, b, n_th, n);
  set.click = subtract_distributions(set.total, set.no_click);
  set.no_click_probability = n_th;
  if (n_max != kAutoCutoff) {
    check_explicit_cutoff(set.total, "thermal_conditionals");
    check_explicit_cutoff(set.no_click, "thermal_conditionals");
    check_explicit_cutoff(set.click, "thermal_conditionals");
  }
  return set;
}

double wcp_joint(const WcpSource& src, int n, int m,
                 const QuadratureSpec& spec) {
  if (n < 0 || m < 0)
    throw std::domain_error("wcp_joint: photon numbers must be >= 0");
  const double u = src.upsilon();
  if (u == 0.0) return (n == 0 && m == 0) ? 1.0 : 0.0;
  const double mean = integrate_periodic(
      [&](double theta) {
        const double g = src.gamma_of(theta);
        return std::pow(g, n) * std::pow(1.0 - g, m);
      },
      spec);
  const double lg = double(n + m) * std::log(u) - u - lgamma_fn(n + 1.0) -
                    lgamma_fn(m + 1.0);
  return std::exp(lg) * mean;
}

TwoSettingStats wcp_low_order(const WcpSource& src,
                              const ThresholdDetector& det) {
  const double om = src.omega();
  const double xi = src.xi();
  const double u = src.upsilon();
  const double eta = det.efficiency;
  const double eps = det.dark_count;

  const double i0 = bessel_i(0, xi);
  const double i1 = bessel_i(1, xi);
  const double i2 = bessel_i(2, xi);
  const double et = std::exp(-om);

  TwoSettingStats s;
  s.total = {i0 * et, (om * i0 - xi * i1) * et,
             0.5 * (om * om * i0 + (1.0 - 2.0 * om) * xi * i1 + xi * xi * i2) *
                 et,
             1.0};

  const double w = (1.0 - eta) * xi;
  const double j0 = bessel_i(0, w);
  const double j1 = bessel_i(1, w);
  const double j2 = bessel_i(2, w);
  const double tau = (1.0 - eps) * std::exp(-(eta * u + (1.0 - eta) * om));
  const double n_w =
      (1.0 - eps) * std::exp(-eta * (u - om)) * bessel_i(0, eta * xi);
  s.no_click = {tau * j0, tau * (om * j0 - xi * j1),
                0.5 * tau *
                    (om * om * j0 + xi * xi * bessel_i1_over_z(w) -
                     2.0 * om * xi * j1 + xi * xi * j2),
                n_w};
  s.click = {s.total.p0 - s.no_click.p0, s.total.p1 - s.no_click.p1,
             s.total.p2 - s.no_click.p2, 1.0 - n_w};
  return s;
}

ConditionalSet wcp_conditionals(const WcpSource& src,
                                const ThresholdDetector& det, int n_max,
                                const QuadratureSpec& spec) {
  src.validate();
  det.validate();
  const double u = src.upsilon();
  const double eta = det.efficiency;
  const double eps = det.dark_count;

  if (u == 0.0) {
    ConditionalSet set;
    set.total = PhotonDistribution({1.0}, 0.0, 1.0);
    set.no_click = PhotonDistribution({1.0 - eps}, 0.0, 1.0 - eps);
    set.click = PhotonDistribution({eps}, 0.0, eps);
    set.no_click_probability = 1.0 - eps;
    return set;
  }

  const TwoSettingStats low = wcp_low_order(src, det);
  const double n_w = low.no_click.norm;

  auto total_entry = [&](int n) -> double {
    switch (n) {
      case 0: return low.total.p0;
      case 1: return low.total.p1;
      case 2: return low.total.p2;
    }
    const double mean = integrate_periodic(
        [&](double theta) {
          const double s = u * src.gamma_of(theta);
          return s > 0.0 ? std::exp(double(n) * std::log(s) - s -
                                    lgamma_fn(n + 1.0))
                         : 0.0;
        },
        spec);
    return mean;
  };
  auto no_click_entry = [&](int n) -> double {
    switch (n) {
      case 0: return low.no_click.p0;
      case 1: return low.no_click.p1;
      case 2: return low.no_click.p2;
    }
    const double mean = integrate_periodic(
        [&](double theta) {
          const double s = u * src.gamma_of(theta);
          return s > 0.0 ? std::exp(double(n) * std::log(s) -
                                    (1.0 - eta) * s - lgamma_fn(n + 1.0))
                         : 0.0;
        },
        spec);
    return (1.0 - eps) * std::exp(-eta * u) * mean;
  };

  std::vector<double> pt, pc;
  Accumulator cum_t, cum_c;
  const int cap = (n_max == kAutoCutoff) ? 3000 : n_max;
  int n = -1;
  while (n < cap) {
    ++n;
    pt.push_back(total_entry(n));
    pc.push_back(no_click_entry(n));
    cum_t.add(pt.back());
    cum_c.add(pc.back());
    if (n_max == kAutoCutoff && n >= 3) {
      const double tail_t = std::max(1.0 - cum_t.value(), 0.0);
      const double tail_c = std::max(n_w - cum_c.value(), 0.0);
      const double tail_click = std::max(tail_t - tail_c, 0.0);
      const double norm_click = 1.0 - n_w;
      const bool decreasing = pt[n] < pt[n - 1];
      if (decreasing && tail_t <= kTailTarget &&
          (n_w <= 0.0 || tail_c <= kTailTarget * n_w) &&
          (!(norm_click > 0.0) || tail_click <= kTailTarget * norm_click))
        break;
    }
  }
  if (n_max == kAutoCutoff && n >= cap)
    throw CutoffError("wcp_conditionals: cutoff ceiling reached");

  ConditionalSet set;
  set.total = PhotonDistribution(std::move(pt),
                                 std::max(1.0 - cum_t.value(), 0.0), 1.0);
  set.no_click = PhotonDistribution(std::move(pc),
                                    std::max(n_w - cum_c.value(), 0.0), n_w);
  set.click = subtract_distributions(set.total, set.no_click);
  set.no_click_probability = n_w;
  if (n_max != kAutoCutoff) {
    check_explicit_cutoff(set.total, "wcp_conditionals");
    check_explicit_cutoff(set.no_click, "wcp_conditionals");
    check_explicit_cutoff(set.click, "wcp_conditionals");
  }
  return set;
}

namespace {

// (1/pi) Int_lo^hi Poisson_n(I_a(theta) t2) dtheta
double strong_partial(const StrongSource& src, int n, double lo, double hi,
                      const QuadratureSpec& spec) {
  return integrate_finite(
             [&](double theta) {
               const double s = src.intensity_a(theta) * src.attenuator;
               if (s <= 0.0) return n == 0 ? 1.0 : 0.0;
               return std::exp(double(n) * std::log(s) - s -
                               lgamma_fn(n + 1.0));
             },
             lo, hi, spec.refinement_tolerance) /
         kPi;
}

struct StrongClosedLow {
  double below[3], above[3];
};

StrongClosedLow strong_closed_low(const StrongSource& src) {
  const double k = src.kappa();
  const double z = src.zeta();
  const double e = std::exp(-k);
  const double i0 = bessel_i(0, z), i1 = bessel_i(1, z), i2 = bessel_i(2, z);
  const double l0 = struve_l(0, z), lm1 = struve_l(-1, z),
               l2 = struve_l(2, z);
  const double dm = i0 - l0, dp = i0 + l0;
  const double em = i1 - lm1, ep = i1 + lm1;
  const double fm = i2 - l2, fp = i2 + l2;
  const double poly = (2.0 / kPi) * (1.0 - z * z / 3.0);
  StrongClosedLow c;
  c.below[0] = 0.5 * e * dm;
  c.below[1] = 0.5 * e * (k * dm - z * em);
  c.below[2] =
      0.25 * e * (k * k * dm + z * (poly + (1.0 - 2.0 * k) * em + z * fm));
  c.above[0] = 0.5 * e * dp;
  c.above[1] = 0.5 * e * (k * dp - z * ep);
  c.above[2] =
      0.25 * e * (k * k * dp + z * (-poly + (1.0 - 2.0 * k) * ep + z * fp));
  return c;
}

}  // namespace

StrongLowOrder strong_low_order(const StrongSource& src) {
  const double n_s = src.theta_threshold() / kPi;
  StrongLowOrder s;
  if (src.symmetric()) {
    const StrongClosedLow c = strong_closed_low(src);
    s.below = {c.below[0], c.below[1], c.below[2], n_s};
    s.above = {c.above[0], c.above[1], c.above[2], 1.0 - n_s};
  } else {
    const double th = src.theta_threshold();
    QuadratureSpec spec;
    double b[3], a[3];
    for (int n = 0; n < 3; ++n) {
      b[n] = strong_partial(src, n, 0.0, th, spec);
      a[n] = strong_partial(src, n, th, kPi, spec);
    }
    s.below = {b[0], b[1], b[2], n_s};
    s.above = {a[0], a[1], a[2], 1.0 - n_s};
  }
  s.total = {s.below.p0 + s.above.p0, s.below.p1 + s.above.p1,
             s.below.p2 + s.above.p2, 1.0};
  return s;
}

StrongSet strong_conditionals(const StrongSource& src, int n_max,
                              const QuadratureSpec& spec) {
  src.validate();
  const double th = src.theta_threshold();
  const double n_s = th / kPi;
  const bool closed = src.symmetric();
  StrongClosedLow low{};
  if (closed) low = strong_closed_low(src);

  auto below_entry = [&](int n) {
    if (closed && n <= 2) return low.below[n];
    return strong_partial(src, n, 0.0, th, spec);
  };
  auto above_entry = [&](int n) {
    if (closed && n <= 2) return low.above[n];
    return strong_partial(src, n, th, kPi, spec);
  };

  std::vector<double> pb, pa;
  Accumulator cum_b, cum_a;
  const int cap = (n_max == kAutoCutoff) ? 3000 : n_max;
  int n = -1;
  while (n < cap) {
    ++n;
    pb.push_back(below_entry(n));
    pa.push_back(above_entry(n));
    cum_b.add(pb.back());
    cum_a.add(pa.back());
    if (n_max == kAutoCutoff && n >= 3) {
      const double tail_b = std::max(n_s - cum_b.value(), 0.0);
      const double tail_a = std::max(1.0 - n_s - cum_a.value(), 0.0);
      const bool decreasing = pb[n] + pa[n] < pb[n - 1] + pa[n - 1];
      if (decreasing && (!(n_s > 0.0) || tail_b <= kTailTarget * n_s) &&
          (!(n_s < 1.0) || tail_a <= kTailTarget * (1.0 - n_s)))
        break;
    }
  }
  if (n_max == kAutoCutoff && n >= cap)
    throw CutoffError("strong_conditionals: cutoff ceiling reached");

  StrongSet set;
  set.below = PhotonDistribution(std::move(pb),
                                 std::max(n_s - cum_b.value(), 0.0), n_s);
  set.above = PhotonDistribution(
      std::move(pa), std::max(1.0 - n_s - cum_a.value(), 0.0), 1.0 - n_s);
  std::vector<double> pt(set.below.probabilities().size());
  for (size_t i = 0; i < pt.size(); ++i)
    pt[i] = set.below[int(i)] + set.above[int(i)];
  set.total = PhotonDistribution(
      std::move(pt), set.below.tail_mass() + set.above.tail_mass(), 1.0);
  set.below_probability = n_s;
  set.used_closed_forms = closed;
  if (n_max != kAutoCutoff) {
    check_explicit_cutoff(set.below, "strong_conditionals");
    check_explicit_cutoff(set.above, "strong_conditionals");
  }
  return set;
}

double thermal_pnr_outcome_probability(const ThermalSource& src, int m) {
  if (m < 0) throw std::domain_error("pnr: outcome must be >= 0");
  const double mr = src.mean_photon_number * (1.0 - src.bs_transmittance);
  if (mr == 0.0) return m == 0 ? 1.0 : 0.0;
  return std::exp(double(m) * std::log(mr) -
                  double(m + 1) * std::log1p(mr));
}

PnrSet pnr_conditionals_thermal(const ThermalSource& src, int m, int n_max) {
  if (m < 0) throw std::domain_error("pnr: outcome must be >= 0");
  src.validate();
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  const double n_m = thermal_pnr_outcome_probability(src, m);

  PnrSet set;
  set.outcome_probability = n_m;
  set.p0 = thermal_joint(src, 0, m);
  set.p1 = thermal_joint(src, 1, m);

  std::vector<double> row;
  Accumulator cum;
  const double base_ratio = mu > 0.0 ? t * mu / (1.0 + mu) : 0.0;
  const int cap = (n_max == kAutoCutoff) ? kHardCutoffCeiling : n_max;
  double v = set.p0;
  int n = 0;
  for (;; ++n) {
    row.push_back(v);
    cum.add(v);
    if (n >= cap) break;
    const double next = v * base_ratio * double(n + 1 + m) / double(n + 1);
    if (n_max == kAutoCutoff) {
      // once the term ratio is safely below one, bound the remaining tail
      const double q = base_ratio * double(n + 2 + m) / double(n + 2);
      if (q < 1.0) {
        const double bound = next / (1.0 - q);
        if (bound <= kTailTarget * std::max(n_m, 1e-300)) {
          break;
        }
      }
    }
    v = next;
  }
  if (n_max == kAutoCutoff && n >= cap)
    throw CutoffError("pnr_conditionals_thermal: cutoff ceiling reached");
  set.joint_row = PhotonDistribution(
      std::move(row), std::max(n_m - cum.value(), 0.0), n_m);
  if (n_max != kAutoCutoff)
    check_explicit_cutoff(set.joint_row, "pnr_conditionals_thermal");
  return set;
}

double wcp_pnr_outcome_probability(const WcpSource& src, int m,
                                   const QuadratureSpec& spec) {
  if (m < 0) throw std::domain_error("pnr: outcome must be >= 0");
  const double u = src.upsilon();
  if (u == 0.0) return m == 0 ? 1.0 : 0.0;
  const double mean = integrate_periodic(
      [&](double theta) {
        const double g = src.gamma_of(theta);
        return std::pow(1.0 - g, m) * std::exp(u * g);
      },
      spec);
  return std::exp(double(m) * std::log(u) - u - lgamma_fn(m + 1.0)) * mean;
}

PnrLowOrder wcp_pnr_low_order(const WcpSource& src, int m,
                              const QuadratureSpec& spec) {
  if (m < 0) throw std::domain_error("pnr: outcome must be >= 0");
  const double u = src.upsilon();
  const double om = src.omega();
  const double xi = src.xi();
  const double d = u - om;  // mu1 (1-t) + mu2 t

  PnrLowOrder low;
  if (m == 0) {
    low.p0 = std::exp(-u);
    low.p1 = om * std::exp(-u);
  } else if (xi == 0.0 || d == 0.0) {
    low.p0 = d > 0.0 ? std::exp(-u + double(m) * std::log(d) -
                               lgamma_fn(m + 1.0))
                     : 0.0;
    low.p1 = om * low.p0;
  } else {
    double z = (xi * xi) / (d * d);
    if (z > 1.0 + 1e-9) {
      // outside the hypergeometric domain; fall back to the integrals
      low.hypergeometric_fallback = true;
      low.p0 = wcp_joint(src, 0, m, spec);
      low.p1 = wcp_joint(src, 1, m, spec);
    } else {
      z = std::min(z, 1.0);
      const double a = 0.5 * (1.0 - m);
      low.p0 = std::exp(-u + double(m) * std::log(d) - lgamma_fn(m + 1.0)) *
               special::hyp2f1(a, -0.5 * m, 1.0, z);
      low.p1 = om * low.p0 -
               0.5 * xi * xi *
                   std::exp(-u + double(m - 1) * std::log(d) -
                            lgamma_fn(double(m))) *
                   special::hyp2f1(a, 1.0 - 0.5 * m, 2.0, z);
    }
  }
  return low;
}

PnrSet pnr_conditionals_wcp(const WcpSource& src, int m, int n_max,
                            const QuadratureSpec& spec) {
  if (m < 0) throw std::domain_error("pnr: outcome must be >= 0");
  src.validate();

  PnrSet set;
  set.outcome_probability = wcp_pnr_outcome_probability(src, m, spec);
  const PnrLowOrder low = wcp_pnr_low_order(src, m, spec);
  set.p0 = low.p0;
  set.p1 = low.p1;
  set.hypergeometric_fallback = low.hypergeometric_fallback;

  std::vector<double> row;
  Accumulator cum;
  const double n_m = set.outcome_probability;
  const int cap = (n_max == kAutoCutoff) ? 3000 : n_max;
  int n = -1;
  while (n < cap) {
    ++n;
    row.push_back(wcp_joint(src, n, m, spec));
    cum.add(row.back());
    if (n_max == kAutoCutoff && n >= 3 && row[n] < row[n - 1] &&
        row[n] <= 1e-13 * std::max(n_m, 1e-300))
      break;
  }
  if (n_max == kAutoCutoff && n >= cap)
    throw CutoffError("pnr_conditionals_wcp: cutoff ceiling reached");
  set.joint_row = PhotonDistribution(
      std::move(row), std::max(n_m - cum.value(), 0.0), n_m);
  if (n_max != kAutoCutoff)
    check_explicit_cutoff(set.joint_row, "pnr_conditionals_wcp");
  return set;
}

}  // namespace pdqkd::photonstats

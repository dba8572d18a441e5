#include "observables.hpp"

#include <cmath>

#include "errors.hpp"
#include "special.hpp"

namespace pdqkd::observables {

using channel::pow_one_minus;
using channel::system_transmittance;
using channel::yield_error_product;
using channel::yield_n;
using special::bessel_i;
using special::lgamma_fn;
using special::struve_l;

std::string to_string(SettingLabel label) {
  switch (label) {
    case SettingLabel::Total: return "total";
    case SettingLabel::Click: return "click";
    case SettingLabel::NoClick: return "no-click";
    case SettingLabel::BelowThreshold: return "below";
    case SettingLabel::AboveThreshold: return "above";
    case SettingLabel::Pnr: return "pnr";
    case SettingLabel::Signal: return "signal";
    case SettingLabel::Decoy: return "decoy";
  }
  return "?";
}

SettingObservation observe_generic(const PhotonDistribution& dist,
                                   const ChannelParams& ch, double eta_sys,
                                   SettingLabel label) {
  SettingObservation obs;
  obs.label = label;
  obs.p0 = dist[0];
  obs.p1 = dist[1];
  obs.p2 = dist[2];
  obs.setting_probability = dist.norm();
  double q = 0.0, qc = 0.0, eq = 0.0, eqc = 0.0;
  for (int n = 0; n <= dist.max_photon_number(); ++n) {
    const double p = dist[n];
    if (p == 0.0) continue;
    const double y = yield_n(ch, eta_sys, n);
    double v = p * y;
    double t = q + v;
    qc += (std::abs(q) >= std::abs(v)) ? (q - t) + v : (v - t) + q;
    q = t;
    v = p * yield_error_product(ch, y);
    t = eq + v;
    eqc += (std::abs(eq) >= std::abs(v)) ? (eq - t) + v : (v - t) + eq;
    eq = t;
  }
  // the untabulated tail detects with yield <= 1
  obs.gain = q + qc;
  obs.error_gain = eq + eqc;
  return obs;
}

namespace {

SettingObservation make_obs(SettingLabel label, const SettingStats& s,
                            double gain, double error_gain) {
  SettingObservation o;
  o.label = label;
  o.p0 = s.p0;
  o.p1 = s.p1;
  o.p2 = s.p2;
  o.setting_probability = s.norm;
  o.gain = gain;
  o.error_gain = error_gain;
  return o;
}

}  // namespace

ThresholdObservations observe_thermal(const ThermalSource& src,
                                      const ThresholdDetector& det,
                                      const ChannelParams& ch,
                                      double distance_km) {
  const double eta = system_transmittance(ch, distance_km);
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  const double mt = mu * t;
  const double r = 1.0 + mu * (t + (1.0 - t) * det.efficiency);
  const double y0 = ch.background_rate;
  const double e0 = ch.background_error;
  const double ed = ch.misalignment;

  const auto stats = photonstats::thermal_low_order(src, det);
  const double n_th = stats.no_click.norm;

  const double q_nc =
      n_th - (1.0 - det.dark_count) * (1.0 - y0) / (r - (1.0 - eta) * mt);
  const double eq_nc = (e0 - ed) * y0 * n_th + ed * q_nc;
  const double q_t = (y0 + mt * eta) / (1.0 + mt * eta);
  const double eq_t = (e0 - ed) * y0 + ed * q_t;

  ThresholdObservations obs;
  obs.total = make_obs(SettingLabel::Total, stats.total, q_t, eq_t);
  obs.no_click = make_obs(SettingLabel::NoClick, stats.no_click, q_nc, eq_nc);
  obs.click = make_obs(SettingLabel::Click, stats.click, q_t - q_nc,
                       eq_t - eq_nc);
  return obs;
}

ThresholdObservations observe_wcp(const WcpSource& src,
                                  const ThresholdDetector& det,
                                  const ChannelParams& ch,
                                  double distance_km) {
  const double eta = system_transmittance(ch, distance_km);
  const double u = src.upsilon();
  const double om = src.omega();
  const double xi = src.xi();
  const double eta_d = det.efficiency;
  const double y0 = ch.background_rate;
  const double e0 = ch.background_error;
  const double ed = ch.misalignment;

  const auto stats = photonstats::wcp_low_order(src, det);
  const double n_w = stats.no_click.norm;

  // I_0 is even, so a negative argument folds onto its magnitude
  const double q_nc = n_w - (1.0 - det.dark_count) * (1.0 - y0) *
                                std::exp((eta_d - eta) * om - eta_d * u) *
                                bessel_i(0, std::abs((eta_d - eta) * xi));
  const double eq_nc = (e0 - ed) * y0 * n_w + ed * q_nc;
  const double q_t =
      1.0 - (1.0 - y0) * std::exp(-eta * om) * bessel_i(0, eta * xi);
  const double eq_t = (e0 - ed) * y0 + ed * q_t;

  ThresholdObservations obs;
  obs.total = make_obs(SettingLabel::Total, stats.total, q_t, eq_t);
  obs.no_click = make_obs(SettingLabel::NoClick, stats.no_click, q_nc, eq_nc);
  obs.click = make_obs(SettingLabel::Click, stats.click, q_t - q_nc,
                       eq_t - eq_nc);
  return obs;
}

StrongObservations observe_strong(const StrongSource& src,
                                  const ChannelParams& ch,
                                  double distance_km) {
  const double eta = system_transmittance(ch, distance_km);
  const double y0 = ch.background_rate;
  const double e0 = ch.background_error;
  const double ed = ch.misalignment;

  StrongObservations obs;
  if (src.symmetric()) {
    const auto stats = photonstats::strong_low_order(src);
    const double n_s = stats.below.norm;
    const double k = src.kappa();
    const double z = src.zeta();
    const double damp =
        (1.0 - y0) * std::exp(-eta * k) * 0.5;
    const double i0 = bessel_i(0, eta * z);
    const double l0 = struve_l(0, eta * z);
    const double q_b = n_s - damp * (i0 - l0);
    const double q_a = (1.0 - n_s) - damp * (i0 + l0);
    obs.below = make_obs(SettingLabel::BelowThreshold, stats.below, q_b,
                         (e0 - ed) * y0 * n_s + ed * q_b);
    obs.above = make_obs(SettingLabel::AboveThreshold, stats.above, q_a,
                         (e0 - ed) * y0 * (1.0 - n_s) + ed * q_a);
    obs.total = make_obs(SettingLabel::Total, stats.total, q_b + q_a,
                         obs.below.error_gain + obs.above.error_gain);
    return obs;
  }

  // asymmetric configuration: no closed forms, use the angle integrals
  obs.routed_via_quadrature = true;
  const auto set = photonstats::strong_conditionals(src);
  obs.below = observe_generic(set.below, ch, eta, SettingLabel::BelowThreshold);
  obs.above = observe_generic(set.above, ch, eta, SettingLabel::AboveThreshold);
  obs.total = observe_generic(set.total, ch, eta, SettingLabel::Total);
  return obs;
}

std::vector<SettingObservation> observe_pnr_thermal(const ThermalSource& src,
                                                    const ChannelParams& ch,
                                                    double distance_km,
                                                    int m_max) {
  const double eta = system_transmittance(ch, distance_km);
  const double mu = src.mean_photon_number;
  const double t = src.bs_transmittance;
  const double y0 = ch.background_rate;
  const double e0 = ch.background_error;
  const double ed = ch.misalignment;
  const double mr = mu * (1.0 - t);
  const double denom = 1.0 + mu * (1.0 - (1.0 - eta) * t);

  std::vector<SettingObservation> rows;
  double cum = 0.0;
  const int cap = m_max >= 0 ? m_max : (1 << 20);
  for (int m = 0; m <= cap; ++m) {
    const double n_m = photonstats::thermal_pnr_outcome_probability(src, m);
    double lost;
    if (mr == 0.0)
      lost = m == 0 ? (1.0 - y0) / denom : 0.0;
    else
      lost = (1.0 - y0) * std::exp(double(m) * std::log(mr) -
                                   double(m + 1) * std::log(denom));
    const double q_m = n_m - lost;
    SettingObservation o;
    o.label = SettingLabel::Pnr;
    o.pnr_outcome = m;
    o.p0 = photonstats::thermal_joint(src, 0, m);
    o.p1 = photonstats::thermal_joint(src, 1, m);
    o.p2 = photonstats::thermal_joint(src, 2, m);
    o.setting_probability = n_m;
    o.gain = q_m;
    o.error_gain = (e0 - ed) * y0 * n_m + ed * q_m;
    rows.push_back(o);
    cum += n_m;
    if (m_max < 0 && 1.0 - cum < 1e-10) return rows;
  }
  if (m_max < 0)
    throw CutoffError("observe_pnr_thermal: outcome cutoff ceiling reached");
  return rows;
}

std::vector<SettingObservation> observe_pnr_wcp(const WcpSource& src,
                                                const ChannelParams& ch,
                                                double distance_km, int m_max,
                                                const QuadratureSpec& spec) {
  const double eta = system_transmittance(ch, distance_km);
  const double u = src.upsilon();
  const double y0 = ch.background_rate;
  const double e0 = ch.background_error;
  const double ed = ch.misalignment;

  std::vector<SettingObservation> rows;
  double cum = 0.0;
  const int cap = m_max >= 0 ? m_max : 4000;
  for (int m = 0; m <= cap; ++m) {
    const double n_m = photonstats::wcp_pnr_outcome_probability(src, m, spec);
    const auto low = photonstats::wcp_pnr_low_order(src, m, spec);
    double q_m;
    if (u == 0.0) {
      q_m = m == 0 ? y0 : 0.0;
    } else {
      const double mean = special::integrate_periodic(
          [&](double theta) {
            const double g = src.gamma_of(theta);
            return (1.0 - (1.0 - y0) * std::exp(-eta * u * g)) *
                   std::pow(1.0 - g, m) * std::exp(u * g);
          },
          spec);
      q_m = std::exp(double(m) * std::log(u) - u - lgamma_fn(m + 1.0)) * mean;
    }
    SettingObservation o;
    o.label = SettingLabel::Pnr;
    o.pnr_outcome = m;
    o.p0 = low.p0;
    o.p1 = low.p1;
    o.p2 = photonstats::wcp_joint(src, 2, m, spec);
    o.setting_probability = n_m;
    o.gain = q_m;
    o.error_gain = (e0 - ed) * y0 * n_m + ed * q_m;
    rows.push_back(o);
    cum += n_m;
    if (m_max < 0 && 1.0 - cum < 1e-10) return rows;
  }
  if (m_max < 0)
    throw CutoffError("observe_pnr_wcp: outcome cutoff ceiling reached");
  return rows;
}

SettingObservation observe_active(double mu, const ChannelParams& ch,
                                  double distance_km, ActiveGainForm form,
                                  SettingLabel label) {
  if (!(mu >= 0.0)) throw std::domain_error("observe_active: mu must be >= 0");
  const double eta = system_transmittance(ch, distance_km);
  const double y0 = ch.background_rate;
  const double signal = -std::expm1(-mu * eta);  // 1 - e^{-mu eta}
  SettingObservation o;
  o.label = label;
  o.p0 = std::exp(-mu);
  o.p1 = mu * std::exp(-mu);
  o.p2 = 0.5 * mu * mu * std::exp(-mu);
  o.setting_probability = 1.0;
  if (form == ActiveGainForm::Additive) {
    o.gain = y0 + signal;
    o.error_gain = ch.background_error * y0 + ch.misalignment * signal;
  } else {
    o.gain = 1.0 - (1.0 - y0) * (1.0 - signal);
    o.error_gain = (ch.background_error - ch.misalignment) * y0 +
                   ch.misalignment * o.gain;
  }
  return o;
}

}  // namespace pdqkd::observables

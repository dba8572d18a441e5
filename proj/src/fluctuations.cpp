#include "fluctuations.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "special.hpp"

namespace pdqkd::fluctuations {

using special::binary_entropy;

void FluctuationConfig::validate() const {
  if (!(total_pulses > 0.0))
    throw ConfigError("fluctuations: pulse count must be > 0");
  if (!(deviation_multiple > 0.0))
    throw ConfigError("fluctuations: deviation multiple must be > 0");
  if (!(signal_fraction > 0.0 && signal_fraction < 1.0))
    throw ConfigError("fluctuations: split fraction must be in (0, 1)");
}

ActiveDeviations active_deviations(const SettingObservation& obs_signal,
                                   const SettingObservation& obs_decoy,
                                   const FluctuationConfig& cfg) {
  cfg.validate();
  const double n_mu = cfg.signal_fraction * cfg.total_pulses;
  const double n_nu = (1.0 - cfg.signal_fraction) * cfg.total_pulses;
  const double u = cfg.deviation_multiple;
  ActiveDeviations d;
  d.q_signal = u * std::sqrt(obs_signal.gain / n_mu);
  d.q_decoy = u * std::sqrt(obs_decoy.gain / n_nu);
  d.eq_signal = u * std::sqrt(2.0 * obs_signal.error_gain / n_mu);
  d.eq_decoy = u * std::sqrt(2.0 * obs_decoy.error_gain / n_nu);
  return d;
}

ABTerms ab_active(const SettingObservation& obs_signal,
                  const SettingObservation& obs_decoy, double mu, double nu,
                  const ActiveDeviations& dev) {
  if (!(mu > nu && nu > 0.0))
    throw ConfigError("ab_active: need mu > nu > 0");
  const double emu = std::exp(mu);
  const double enu = std::exp(nu);
  const double q_mu = obs_signal.gain, eq_mu = obs_signal.error_gain;
  const double q_nu = obs_decoy.gain, eq_nu = obs_decoy.error_gain;
  const double e_mu = obs_signal.qber(), e_nu = obs_decoy.qber();

  ABTerms ab;
  ab.c1 = mu * enu / (nu * (mu - nu));
  ab.c2 = nu * emu / (mu * (mu - nu));
  ab.a = ab.c1 * q_nu * (1.0 - 2.0 * e_nu) - ab.c2 * q_mu * (1.0 - 2.0 * e_mu);
  ab.b = std::min(eq_nu * enu / nu, (eq_mu * emu - eq_nu * enu) / (mu - nu));
  ab.delta_a = std::sqrt(std::pow(ab.c1 * dev.q_decoy, 2) +
                         4.0 * std::pow(ab.c1 * dev.eq_decoy, 2) +
                         std::pow(ab.c2 * dev.q_signal, 2) +
                         4.0 * std::pow(ab.c2 * dev.eq_signal, 2));
  ab.delta_b = std::min({emu * dev.eq_signal / mu, enu * dev.eq_decoy / nu,
                         std::hypot(emu * dev.eq_signal, enu * dev.eq_decoy) /
                             (mu - nu)});
  return ab;
}

ABTerms ab_passive(const SettingObservation& obs_total,
                   const SettingObservation& obs_no_click,
                   const FluctuationConfig& cfg) {
  if (!(cfg.total_pulses > 0.0) || !(cfg.deviation_multiple > 0.0))
    throw ConfigError("ab_passive: malformed fluctuation configuration");
  const double pt0 = obs_total.p0, pt1 = obs_total.p1, pt2 = obs_total.p2;
  const double pw0 = obs_no_click.p0, pw1 = obs_no_click.p1,
               pw2 = obs_no_click.p2;
  const double q_t = obs_total.gain, eq_t = obs_total.error_gain;
  const double q_w = obs_no_click.gain, eq_w = obs_no_click.error_gain;
  const double e_t = obs_total.qber(), e_w = obs_no_click.qber();

  const double d_a = pw2 * pt1 - pt2 * pw1;  // p^cbar_2 p^t_1 - p^t_2 p^cbar_1
  const double d_b = pw0 * pt1 - pt0 * pw1;  // p^cbar_0 p^t_1 - p^t_0 p^cbar_1
  // the two denominators must carry opposite signs (either coherent
  // orientation of the cross-term structure works; mixed signs do not)
  if (!(d_a * d_b < 0.0))
    throw EstimationError("ab_passive: denominator sign structure failed");

  const double n = cfg.total_pulses;
  const double n_w = obs_no_click.setting_probability * n;  // no-click pulses
  if (!(n_w > 0.0))
    throw EstimationError("ab_passive: no-click probability is zero");
  const double u = cfg.deviation_multiple;
  const double dq_t = u * std::sqrt(q_t / n);
  const double dq_w = u * std::sqrt(q_w / n_w);
  const double deq_t = u * std::sqrt(2.0 * eq_t / n);
  const double deq_w = u * std::sqrt(2.0 * eq_w / n_w);

  ABTerms ab;
  ab.a = (pw2 * q_t * (1.0 - 2.0 * e_t) - pt2 * q_w * (1.0 - 2.0 * e_w)) / d_a;
  ab.b = std::min(eq_w / pw1, (pw0 * eq_t - pt0 * eq_w) / d_b);
  ab.delta_a = std::sqrt(std::pow(pw2 * dq_t, 2) +
                         4.0 * std::pow(pw2 * deq_t, 2) +
                         std::pow(pt2 * dq_w, 2) +
                         4.0 * std::pow(pt2 * deq_w, 2)) /
               std::abs(d_a);
  ab.delta_b = std::min({deq_t / pt1, deq_w / pw1,
                         std::hypot(pw0 * deq_t, pt0 * deq_w) / d_b});
  return ab;
}

KeyTerm fluct_key_term(const ABTerms& ab) {
  KeyTerm kt;
  const double a = ab.a;
  const double b = std::max(ab.b, 0.0);
  const double s = a + 2.0 * b;
  if (!(a > 0.0) || !(s > 0.0)) return kt;
  const double e1 = b / s;
  kt.central = s * (1.0 - binary_entropy(std::min(e1, 0.5)));
  const double a_factor = std::log2((2.0 * a + 2.0 * b) / s);
  const double b_factor =
      b > 0.0 ? std::log2(4.0 * b * (a + b) / (s * s)) : 0.0;
  kt.deviation = std::hypot(ab.delta_a * a_factor, ab.delta_b * b_factor);
  return kt;
}

double worst_case_key_term(const ABTerms& ab) {
  if (!(ab.a - ab.delta_a > 0.0)) return 0.0;
  const KeyTerm kt = fluct_key_term(ab);
  return std::max(kt.central - kt.deviation, 0.0);
}

}  // namespace pdqkd::fluctuations

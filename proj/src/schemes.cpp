#include "schemes.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "fluctuations.hpp"
#include "observables.hpp"

namespace pdqkd::schemes {

using channel::system_transmittance;
using channel::yield_n;
using estimator::TwoSettingInput;
using fluctuations::ABTerms;
using fluctuations::FluctuationConfig;
using keyrate::rate_setting_bound;
using keyrate::rate_setting_exact;
using keyrate::rate_setting_privacy;
using keyrate::rate_total;
using observables::ActiveGainForm;
using observables::SettingLabel;
using observables::SettingObservation;
using photonstats::StrongSource;
using photonstats::ThermalSource;
using photonstats::WcpSource;

namespace {

keyrate::ParamSpec spec_for(const Scenario& sc, const std::string& name,
                            bool log_scale = true) {
  const auto it = sc.ranges.find(name);
  if (it == sc.ranges.end())
    throw ConfigError("missing optimization range for " + name);
  return {name, it->second.lo, it->second.hi, log_scale};
}

StrongSource make_strong(const Scenario& sc, double kappa, double t1) {
  StrongSource src;
  src.intensity_one = src.intensity_two = src.threshold = sc.strong_intensity;
  src.first_bs = t1;
  src.attenuator = kappa / sc.strong_intensity;
  return src;
}

void record_bounds(KeyRatePoint& point, const estimator::DecoyBounds& b) {
  point.diagnostics["y0_lower"] = b.y0_lower;
  point.diagnostics["y0_upper"] = b.y0_upper;
  point.diagnostics["y1_lower"] = b.y1_lower;
  point.diagnostics["e1_upper"] = b.e1_upper;
  point.diagnostics["signal_term_weak"] = b.signal_term_weak;
  point.diagnostics["signal_term_strong"] = b.signal_term_strong;
}

// Two-setting bound schemes (thermal/wcp threshold, strong classical):
// key from both branches with the shared e1 upper bound.
void two_setting_rates(const Scenario& sc, const TwoSettingInput& in,
                       KeyRatePoint& point) {
  const auto bounds = estimator::estimate_two_setting(in);
  record_bounds(point, bounds);
  const double r_strong = rate_setting_bound(
      sc.protocol, in.strong, bounds.signal_term_strong, bounds.e1_upper);
  const double r_weak = rate_setting_bound(sc.protocol, in.weak,
                                           bounds.signal_term_weak,
                                           bounds.e1_upper);
  point.setting_rates.emplace_back(observables::to_string(in.strong.label),
                                   r_strong);
  point.setting_rates.emplace_back(observables::to_string(in.weak.label),
                                   r_weak);
  point.rate = rate_total({r_strong, r_weak}, sc.protocol);
}

// Passive WCP scheme under finite-size fluctuations. The statistical
// deviations enter through the single-photon key term (its standard
// deviation is subtracted); the error-correction terms stay at the
// measured central values.
void passive_fluct_rates(const Scenario& sc,
                         const observables::ThresholdObservations& obs,
                         KeyRatePoint& point) {
  const FluctuationConfig& cfg = *sc.fluct;
  const ABTerms ab = fluctuations::ab_passive(obs.total, obs.no_click, cfg);
  const double key_term = fluctuations::worst_case_key_term(ab);
  point.diagnostics["A"] = ab.a;
  point.diagnostics["B"] = ab.b;
  point.diagnostics["delta_A"] = ab.delta_a;
  point.diagnostics["delta_B"] = ab.delta_b;
  point.diagnostics["key_term"] = key_term;

  std::vector<double> rates;
  for (const SettingObservation* o : {&obs.click, &obs.no_click}) {
    const double r =
        rate_setting_privacy(sc.protocol, *o, o->p1 * key_term);
    rates.push_back(r);
    point.setting_rates.emplace_back(observables::to_string(o->label), r);
  }
  point.rate = rate_total(rates, sc.protocol);
}

KeyRatePoint evaluate_impl(const Scenario& sc,
                           const std::vector<double>& params,
                           double distance_km, bool check_signs) {
  KeyRatePoint point;
  point.distance_km = distance_km;

  auto signs = [&](const photonstats::PhotonDistribution& total,
                   const photonstats::PhotonDistribution& weak) {
    if (!check_signs) return;
    const auto report = estimator::verify_sign_conditions(total, weak);
    point.diagnostics["sign_conditions_pass"] = report.all_pass ? 1.0 : 0.0;
    point.diagnostics["sign_conditions_margin"] = report.worst_margin;
  };

  switch (sc.scheme) {
    case SchemeKind::ThermalThreshold: {
      const ThermalSource src{params[0], params[1]};
      point.parameters = {{"mu", params[0]}, {"t", params[1]}};
      const auto obs =
          observables::observe_thermal(src, sc.detector, sc.channel,
                                       distance_km);
      point.diagnostics["no_click_probability"] =
          obs.no_click.setting_probability;
      two_setting_rates(sc, {obs.total, obs.no_click, obs.click,
                             sc.channel.background_error},
                        point);
      if (check_signs) {
        const auto set = photonstats::thermal_conditionals(src, sc.detector);
        signs(set.total, set.no_click);
      }
      break;
    }
    case SchemeKind::WcpThreshold: {
      const WcpSource src{params[0], params[1], sc.wcp.bs_transmittance};
      point.parameters = {{"mu1", params[0]}, {"mu2", params[1]}};
      const auto obs =
          observables::observe_wcp(src, sc.detector, sc.channel, distance_km);
      point.diagnostics["no_click_probability"] =
          obs.no_click.setting_probability;
      if (sc.fluct)
        passive_fluct_rates(sc, obs, point);
      else
        two_setting_rates(sc, {obs.total, obs.no_click, obs.click,
                               sc.channel.background_error},
                          point);
      if (check_signs) {
        const auto set = photonstats::wcp_conditionals(src, sc.detector);
        signs(set.total, set.no_click);
      }
      break;
    }
    case SchemeKind::StrongClassical: {
      const double kappa = params[0];
      const double t1 = sc.strong_optimize_t1 ? params[1] : sc.strong_t1;
      const StrongSource src = make_strong(sc, kappa, t1);
      point.parameters = {{"kappa", kappa}, {"t1", t1}};
      const auto obs =
          observables::observe_strong(src, sc.channel, distance_km);
      point.diagnostics["below_probability"] =
          obs.below.setting_probability;
      // the above-threshold branch carries the weaker distribution
      two_setting_rates(sc, {obs.total, obs.above, obs.below,
                             sc.channel.background_error},
                        point);
      if (check_signs) {
        const auto set = photonstats::strong_conditionals(src);
        signs(set.total, set.above);
      }
      break;
    }
    case SchemeKind::ThermalPnr:
    case SchemeKind::WcpPnr: {
      const double eta = system_transmittance(sc.channel, distance_km);
      const double y0 = sc.channel.background_rate;
      const double y1 = yield_n(sc.channel, eta, 1);
      const double e1 =
          y1 > 0.0 ? channel::yield_error_product(sc.channel, y1) / y1 : 0.0;
      point.diagnostics["y1"] = y1;
      point.diagnostics["e1"] = e1;
      std::vector<SettingObservation> rows;
      if (sc.scheme == SchemeKind::ThermalPnr) {
        const ThermalSource src{params[0], params[1]};
        point.parameters = {{"mu", params[0]}, {"t", params[1]}};
        rows = observables::observe_pnr_thermal(src, sc.channel, distance_km);
      } else {
        const WcpSource src{params[0], params[1], sc.wcp.bs_transmittance};
        point.parameters = {{"mu1", params[0]}, {"mu2", params[1]}};
        rows = observables::observe_pnr_wcp(src, sc.channel, distance_km);
      }
      point.diagnostics["pnr_outcomes"] = double(rows.size());
      std::vector<double> rates;
      rates.reserve(rows.size());
      for (const auto& row : rows)
        rates.push_back(rate_setting_exact(sc.protocol, row, y0, y1, e1));
      for (size_t m = 0; m < rows.size() && m < 3; ++m)
        point.setting_rates.emplace_back("m=" + std::to_string(m), rates[m]);
      point.rate = rate_total(rates, sc.protocol);
      break;
    }
    case SchemeKind::ActiveAsymptotic: {
      const double mu = params[0];
      point.parameters = {{"mu", mu}};
      const double eta = system_transmittance(sc.channel, distance_km);
      const double y0 = sc.channel.background_rate;
      const double y1 = yield_n(sc.channel, eta, 1);
      const double e1 =
          y1 > 0.0 ? channel::yield_error_product(sc.channel, y1) / y1 : 0.0;
      point.diagnostics["y1"] = y1;
      point.diagnostics["e1"] = e1;
      const auto obs = observables::observe_active(
          mu, sc.channel, distance_km, ActiveGainForm::Series);
      const double r = rate_setting_exact(sc.protocol, obs, y0, y1, e1);
      point.setting_rates.emplace_back("signal", r);
      point.rate = rate_total({r}, sc.protocol);
      break;
    }
    case SchemeKind::ActiveOneDecoy: {
      const double mu = params[0];
      const double nu = params[1];
      point.parameters = {{"mu", mu}, {"nu", nu}};
      if (!(mu > nu && nu > 0.0)) {
        point.estimation_valid = false;  // infeasible corner of the search box
        return point;
      }
      const auto obs_mu = observables::observe_active(
          mu, sc.channel, distance_km, ActiveGainForm::Additive,
          SettingLabel::Signal);
      const auto obs_nu = observables::observe_active(
          nu, sc.channel, distance_km, ActiveGainForm::Additive,
          SettingLabel::Decoy);
      fluctuations::ActiveDeviations dev;
      if (sc.fluct) {
        FluctuationConfig cfg = *sc.fluct;
        if (sc.fluct_optimize_split && params.size() > 2)
          cfg.signal_fraction = params[2];
        point.parameters.emplace_back("split", cfg.signal_fraction);
        dev = fluctuations::active_deviations(obs_mu, obs_nu, cfg);
      }
      const ABTerms ab = fluctuations::ab_active(obs_mu, obs_nu, mu, nu, dev);
      const double key_term = fluctuations::worst_case_key_term(ab);
      point.diagnostics["A"] = ab.a;
      point.diagnostics["B"] = ab.b;
      point.diagnostics["delta_A"] = ab.delta_a;
      point.diagnostics["delta_B"] = ab.delta_b;
      point.diagnostics["y1_plug"] = ab.y1_plug();
      point.diagnostics["e1_plug"] = ab.e1_upper();
      point.diagnostics["key_term"] = key_term;
      const double r =
          rate_setting_privacy(sc.protocol, obs_mu, obs_mu.p1 * key_term);
      point.setting_rates.emplace_back("signal", r);
      point.rate = rate_total({r}, sc.protocol);
      break;
    }
  }
  return point;
}

}  // namespace

std::vector<keyrate::ParamSpec> scheme_params(const Scenario& sc) {
  switch (sc.scheme) {
    case SchemeKind::ThermalThreshold:
    case SchemeKind::ThermalPnr:
      return {spec_for(sc, "mu"), spec_for(sc, "t")};
    case SchemeKind::WcpThreshold:
    case SchemeKind::WcpPnr: {
      std::vector<keyrate::ParamSpec> p{spec_for(sc, "mu1"),
                                        spec_for(sc, "mu2")};
      if (sc.fluct && sc.scheme == SchemeKind::WcpThreshold) {
        // under finite statistics nearly indistinguishable intensities
        // carry no decoy information; keep the search off that region
        for (auto& s : p) s.lo = std::max(s.lo, 5e-3);
      }
      return p;
    }
    case SchemeKind::StrongClassical: {
      std::vector<keyrate::ParamSpec> p{spec_for(sc, "kappa")};
      if (sc.strong_optimize_t1) p.push_back(spec_for(sc, "t1"));
      return p;
    }
    case SchemeKind::ActiveAsymptotic:
      return {spec_for(sc, "mu")};
    case SchemeKind::ActiveOneDecoy: {
      std::vector<keyrate::ParamSpec> p{spec_for(sc, "mu"),
                                        spec_for(sc, "nu")};
      if (sc.fluct && sc.fluct_optimize_split)
        p.push_back(spec_for(sc, "split", /*log_scale=*/false));
      return p;
    }
  }
  throw ConfigError("scheme_params: unknown scheme");
}

double mean_photon_load(const Scenario& sc,
                        const std::vector<double>& params) {
  switch (sc.scheme) {
    case SchemeKind::ThermalThreshold:
    case SchemeKind::ThermalPnr:
    case SchemeKind::ActiveAsymptotic:
      return params[0];
    case SchemeKind::WcpThreshold:
    case SchemeKind::WcpPnr:
    case SchemeKind::ActiveOneDecoy:
      return params[0] + params[1];
    case SchemeKind::StrongClassical:
      return params[0];
  }
  return 0.0;
}

KeyRatePoint evaluate(const Scenario& sc, const std::vector<double>& params,
                      double distance_km, bool check_signs) {
  try {
    return evaluate_impl(sc, params, distance_km, check_signs);
  } catch (const EstimationError& err) {
    KeyRatePoint point;
    point.distance_km = distance_km;
    point.rate = 0.0;
    point.estimation_valid = false;
    const auto specs = scheme_params(sc);
    for (size_t i = 0; i < specs.size() && i < params.size(); ++i)
      point.parameters.emplace_back(specs[i].name, params[i]);
    return point;
  }
}

KeyRatePoint optimize_at(const Scenario& sc, double distance_km,
                         bool check_signs) {
  const auto specs = scheme_params(sc);
  const auto result = keyrate::optimize(
      specs,
      [&](const std::vector<double>& p) {
        return evaluate(sc, p, distance_km).rate;
      },
      [&](const std::vector<double>& p) { return mean_photon_load(sc, p); });
  KeyRatePoint point = evaluate(sc, result.params, distance_km, check_signs);
  point.diagnostics["feasible"] = result.feasible ? 1.0 : 0.0;
  if (!result.feasible) {
    point.rate = 0.0;
    point.estimation_valid = false;
  }
  return point;
}

namespace {

std::vector<double> params_of(const Scenario& sc, const KeyRatePoint& point) {
  std::vector<double> values;
  for (const auto& spec : scheme_params(sc))
    for (const auto& [name, v] : point.parameters)
      if (name == spec.name) {
        values.push_back(v);
        break;
      }
  return values;
}

}  // namespace

keyrate::CutoffResult find_cutoff(const Scenario& sc, KeyRatePoint* boundary) {
  // near the boundary the positive-rate island shrinks below the grid
  // resolution; carrying the last positive optimum as a warm start keeps
  // the bisection tracking it (the optima drift slowly with distance)
  std::vector<double> hint;
  auto rate_at = [&](double d) {
    KeyRatePoint p = optimize_at(sc, d);
    double best = p.rate;
    std::vector<double> best_params = params_of(sc, p);
    if (!hint.empty()) {
      const KeyRatePoint ph = evaluate(sc, hint, d);
      if (ph.rate > best) {
        best = ph.rate;
        best_params = hint;
      }
    }
    if (best > 0.0) hint = best_params;
    return best;
  };
  const auto res = keyrate::cutoff_distance(rate_at);
  if (boundary) {
    const double d = res.found ? std::max(res.distance_km - 0.1, 0.0) : 0.0;
    KeyRatePoint cold = optimize_at(sc, d, /*check_signs=*/true);
    if (!hint.empty()) {
      KeyRatePoint warm = evaluate(sc, hint, d, /*check_signs=*/true);
      warm.diagnostics["feasible"] = 1.0;
      if (warm.rate > cold.rate) cold = warm;
    }
    *boundary = cold;
  }
  return res;
}

}  // namespace pdqkd::schemes

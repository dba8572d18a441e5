#include "runner.hpp"

#include <cmath>
#include <cstdio>
#include <future>
#include <sstream>

#include "errors.hpp"
#include "estimator.hpp"
#include "mc_oracle.hpp"
#include "observables.hpp"

namespace pdqkd::runner {

using keyrate::KeyRatePoint;
using photonstats::PhotonDistribution;
using photonstats::StrongSource;
using photonstats::ThermalSource;
using photonstats::ThresholdDetector;
using photonstats::WcpSource;
using scenario::SchemeKind;

std::string format_sig(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::string(buf);
}

double round_sig(double v) {
  if (!std::isfinite(v)) return v;
  return std::stod(format_sig(v));
}

namespace {

std::string csv_escape(const std::string& s) {
  std::string out = s;
  for (char& c : out)
    if (c == ',' || c == '"' || c == '\n') c = ';';
  return out;
}

ordered_json point_json(const KeyRatePoint& p) {
  ordered_json j;
  j["distance_km"] = round_sig(p.distance_km);
  j["key_rate_bits_per_pulse"] = round_sig(p.rate);
  ordered_json rates;
  for (const auto& [label, r] : p.setting_rates) rates[label] = round_sig(r);
  j["setting_rates"] = rates;
  ordered_json params;
  for (const auto& [name, v] : p.parameters) params[name] = round_sig(v);
  j["parameters"] = params;
  ordered_json diag;
  for (const auto& [name, v] : p.diagnostics) diag[name] = round_sig(v);
  j["diagnostics"] = diag;
  j["estimation_valid"] = p.estimation_valid;
  return j;
}

ordered_json scenario_json(const Scenario& sc) {
  ordered_json j;
  for (const auto& [k, v] : scenario::scenario_record(sc)) j[k] = v;
  return j;
}

}  // namespace

std::string SweepResult::to_csv() const {
  std::ostringstream out;
  for (size_t i = 0; i < columns.size(); ++i)
    out << (i ? "," : "") << columns[i];
  out << "\n";
  for (const auto& row : rows) {
    for (size_t i = 0; i < row.size(); ++i)
      out << (i ? "," : "") << row[i];
    out << "\n";
  }
  return out.str();
}

SweepResult run_sweep(const Scenario& sc) {
  sc.validate();
  std::vector<double> grid;
  for (double d = sc.distance_min; d <= sc.distance_max + 1e-9;
       d += sc.distance_step)
    grid.push_back(d);

  struct Row {
    KeyRatePoint point;
    bool failed = false;
    std::string error;
  };
  std::vector<std::future<Row>> futures;
  futures.reserve(grid.size());
  for (double d : grid)
    futures.push_back(std::async(std::launch::async, [&sc, d]() {
      Row row;
      try {
        row.point = schemes::optimize_at(sc, d, /*check_signs=*/true);
      } catch (const std::exception& err) {
        row.failed = true;
        row.error = err.what();
        row.point.distance_km = d;
      }
      return row;
    }));
  std::vector<Row> rows;
  rows.reserve(grid.size());
  for (auto& f : futures) rows.push_back(f.get());

  // stable column set: labels and parameter names from the scheme
  const auto specs = schemes::scheme_params(sc);
  std::vector<std::string> labels;
  for (const auto& row : rows) {
    if (row.failed) continue;
    for (const auto& [label, r] : row.point.setting_rates)
      labels.push_back(label);
    break;
  }

  SweepResult result;
  result.columns = {"distance_km", "key_rate_bits_per_pulse"};
  for (const auto& label : labels) result.columns.push_back("rate_" + label);
  for (const auto& s : specs) result.columns.push_back(s.name);
  result.columns.push_back("estimation_valid");
  result.columns.push_back("status");
  const auto record = scenario::scenario_record(sc);
  for (const auto& [k, v] : record) result.columns.push_back(k);

  for (const auto& row : rows) {
    std::vector<std::string> cells;
    cells.push_back(format_sig(row.point.distance_km));
    if (row.failed) {
      cells.push_back("");
      for (size_t i = 0; i < labels.size() + specs.size(); ++i)
        cells.push_back("");
      cells.push_back("false");
      cells.push_back(csv_escape(row.error));
    } else {
      cells.push_back(format_sig(row.point.rate));
      for (const auto& label : labels) {
        std::string cell;
        for (const auto& [l, r] : row.point.setting_rates)
          if (l == label) cell = format_sig(r);
        cells.push_back(cell);
      }
      for (const auto& s : specs) {
        std::string cell;
        for (const auto& [name, v] : row.point.parameters)
          if (name == s.name) cell = format_sig(v);
        cells.push_back(cell);
      }
      cells.push_back(row.point.estimation_valid ? "true" : "false");
      cells.push_back("ok");
    }
    for (const auto& [k, v] : record) cells.push_back(csv_escape(v));
    result.rows.push_back(std::move(cells));
  }

  result.json["scenario"] = scenario_json(sc);
  ordered_json jrows = ordered_json::array();
  for (const auto& row : rows) {
    ordered_json jr = point_json(row.point);
    jr["status"] = row.failed ? row.error : "ok";
    jrows.push_back(jr);
  }
  result.json["rows"] = jrows;
  return result;
}

CutoffOutcome run_cutoff(const Scenario& sc) {
  sc.validate();
  CutoffOutcome out;
  KeyRatePoint boundary;
  const auto res = schemes::find_cutoff(sc, &boundary);
  out.found = res.found;
  out.distance_km = res.distance_km;
  out.json["scenario"] = scenario_json(sc);
  out.json["found"] = res.found;
  if (res.found)
    out.json["cutoff_km"] = round_sig(res.distance_km);
  else
    out.json["note"] = res.note;
  out.json["boundary_point"] = point_json(boundary);
  return out;
}

OptimizeOutcome run_optimize(const Scenario& sc, double distance_km) {
  sc.validate();
  OptimizeOutcome out;
  out.point = schemes::optimize_at(sc, distance_km, /*check_signs=*/true);
  out.json["scenario"] = scenario_json(sc);
  out.json.update(point_json(out.point));
  return out;
}

namespace {

struct Check {
  std::string name;
  bool pass = true;
  double worst = 0.0;  // worst absolute error or margin
  std::string detail;
};

// quadrature-only total/no-click entries for the WCP scheme (bypasses the
// closed forms so they can be compared against it)
double wcp_total_quad(const WcpSource& src, int n) {
  const double u = src.upsilon();
  return special::integrate_periodic([&](double theta) {
    const double s = u * src.gamma_of(theta);
    if (s <= 0.0) return n == 0 ? 1.0 : 0.0;
    return std::exp(double(n) * std::log(s) - s -
                    special::lgamma_fn(n + 1.0));
  });
}

double wcp_no_click_quad(const WcpSource& src, const ThresholdDetector& det,
                         int n) {
  const double u = src.upsilon();
  const double eta = det.efficiency;
  return (1.0 - det.dark_count) * std::exp(-eta * u) *
         special::integrate_periodic([&](double theta) {
           const double s = u * src.gamma_of(theta);
           if (s <= 0.0) return n == 0 ? 1.0 : 0.0;
           return std::exp(double(n) * std::log(s) - (1.0 - eta) * s -
                           special::lgamma_fn(n + 1.0));
         });
}

}  // namespace

VerifyOutcome run_verify(const Scenario& sc) {
  sc.validate();
  std::vector<Check> checks;
  const double fault = sc.verify_inject_fault ? 1e-6 : 0.0;

  const ThermalSource thermal{1.0, 0.5};
  const WcpSource wcp{1.0, 1.0, 0.5};
  StrongSource strong;
  strong.intensity_one = strong.intensity_two = strong.threshold =
      sc.strong_intensity;
  strong.first_bs = 0.5;
  strong.attenuator = 0.2 / sc.strong_intensity;

  // 1. sign conditions
  {
    Check c{"sign-conditions", true, 1e300, ""};
    auto add = [&](const char* tag, const PhotonDistribution& total,
                   const PhotonDistribution& weak) {
      const auto rep = estimator::verify_sign_conditions(total, weak);
      c.pass = c.pass && rep.all_pass;
      c.worst = std::min(c.worst, rep.worst_margin);
      if (!rep.all_pass) c.detail += std::string(tag) + " failed; ";
    };
    const auto ts = photonstats::thermal_conditionals(thermal, sc.detector);
    add("thermal", ts.total, ts.no_click);
    const auto ws = photonstats::wcp_conditionals(wcp, sc.detector);
    add("wcp", ws.total, ws.no_click);
    const auto ss = photonstats::strong_conditionals(strong);
    add("strong", ss.total, ss.above);
    checks.push_back(c);
  }

  // 2. closed forms against their quadrature/series oracles
  {
    Check c{"closed-form-vs-oracle", true, 0.0, ""};
    auto compare = [&](double closed, double oracle) {
      c.worst = std::max(c.worst, std::abs(closed - oracle));
    };
    // distributions, n <= 2
    const auto wlow = photonstats::wcp_low_order(wcp, sc.detector);
    compare(wlow.total.p0 + fault, wcp_total_quad(wcp, 0));
    compare(wlow.total.p1, wcp_total_quad(wcp, 1));
    compare(wlow.total.p2, wcp_total_quad(wcp, 2));
    compare(wlow.no_click.p0, wcp_no_click_quad(wcp, sc.detector, 0));
    compare(wlow.no_click.p1, wcp_no_click_quad(wcp, sc.detector, 1));
    compare(wlow.no_click.p2, wcp_no_click_quad(wcp, sc.detector, 2));
    const auto slow = photonstats::strong_low_order(strong);
    const double th = strong.theta_threshold();
    auto strong_quad = [&](int n, double lo, double hi) {
      return special::integrate_finite(
                 [&](double theta) {
                   const double s =
                       strong.intensity_a(theta) * strong.attenuator;
                   if (s <= 0.0) return n == 0 ? 1.0 : 0.0;
                   return std::exp(double(n) * std::log(s) - s -
                                   special::lgamma_fn(n + 1.0));
                 },
                 lo, hi) /
             special::kPi;
    };
    compare(slow.below.p0, strong_quad(0, 0.0, th));
    compare(slow.below.p1, strong_quad(1, 0.0, th));
    compare(slow.below.p2, strong_quad(2, 0.0, th));
    compare(slow.above.p0, strong_quad(0, th, special::kPi));
    compare(slow.above.p1, strong_quad(1, th, special::kPi));
    compare(slow.above.p2, strong_quad(2, th, special::kPi));

    // gains at two distances
    for (double d : {0.0, 20.0}) {
      const double eta = channel::system_transmittance(sc.channel, d);
      const auto tobs =
          observables::observe_thermal(thermal, sc.detector, sc.channel, d);
      const auto tset = photonstats::thermal_conditionals(thermal, sc.detector);
      compare(tobs.total.gain,
              observables::observe_generic(tset.total, sc.channel, eta).gain);
      compare(tobs.no_click.gain,
              observables::observe_generic(tset.no_click, sc.channel, eta).gain);
      const auto wobs =
          observables::observe_wcp(wcp, sc.detector, sc.channel, d);
      const auto wset = photonstats::wcp_conditionals(wcp, sc.detector);
      compare(wobs.total.gain,
              observables::observe_generic(wset.total, sc.channel, eta).gain);
      compare(wobs.no_click.gain,
              observables::observe_generic(wset.no_click, sc.channel, eta).gain);
      const auto sobs = observables::observe_strong(strong, sc.channel, d);
      const auto sset = photonstats::strong_conditionals(strong);
      compare(sobs.below.gain,
              observables::observe_generic(sset.below, sc.channel, eta).gain);
      compare(sobs.above.gain,
              observables::observe_generic(sset.above, sc.channel, eta).gain);
    }
    c.pass = c.worst <= 1e-9;
    checks.push_back(c);
  }

  // 3. Monte Carlo oracle against the analytic conditionals
  {
    Check c{"monte-carlo", true, 0.0, ""};
    const std::uint64_t samples = sc.verify_samples;
    auto sigma_check = [&](const photonstats::EmpiricalDistribution& emp,
                           const PhotonDistribution& exact) {
      // compare bins with healthy expected counts, pool the rest
      double pooled_p = 0.0, pooled_emp = 0.0;
      const int top = std::max(emp.probability.size(),
                               exact.probabilities().size());
      for (int n = 0; n < top; ++n) {
        const double p = exact[n];
        const double e = n < int(emp.probability.size()) ? emp[n] : 0.0;
        if (p * double(samples) >= 25.0) {
          const double se = std::sqrt(p * (1.0 - p) / double(samples));
          const double pulls = std::abs(e - p) / se;
          c.worst = std::max(c.worst, pulls);
        } else {
          pooled_p += p;
          pooled_emp += e;
        }
      }
      pooled_p += exact.tail_mass();
      if (pooled_p > 0.0 && pooled_p < 1.0) {
        const double se =
            std::sqrt(pooled_p * (1.0 - pooled_p) / double(samples));
        c.worst = std::max(c.worst, std::abs(pooled_emp - pooled_p) / se);
      }
    };

    const auto mct = photonstats::mc_oracle(thermal, sc.detector, samples,
                                            sc.seed);
    const auto tset = photonstats::thermal_conditionals(thermal, sc.detector);
    sigma_check(mct.total, tset.total);
    sigma_check(*mct.outcome("no-click"), tset.no_click);
    sigma_check(*mct.outcome("click"), tset.click);

    const auto mcw =
        photonstats::mc_oracle(wcp, sc.detector, samples, sc.seed + 1);
    const auto wset = photonstats::wcp_conditionals(wcp, sc.detector);
    sigma_check(mcw.total, wset.total);
    sigma_check(*mcw.outcome("no-click"), wset.no_click);
    sigma_check(*mcw.outcome("click"), wset.click);

    const auto mcs = photonstats::mc_oracle(
        strong, photonstats::ClassicalThresholdDetector{}, samples,
        sc.seed + 2);
    const auto sset = photonstats::strong_conditionals(strong);
    sigma_check(*mcs.outcome("below"), sset.below);
    sigma_check(*mcs.outcome("above"), sset.above);

    c.pass = c.worst <= 4.0;
    c.detail = "max pulls (4 sigma limit)";
    checks.push_back(c);
  }

  // 4. PNR round trip
  {
    Check c{"pnr-round-trip", true, 0.0, ""};
    const int m_max = 8;
    const double eta = channel::system_transmittance(sc.channel, 20.0);
    std::vector<double> yields(m_max + 1), errors(m_max + 1);
    for (int n = 0; n <= m_max; ++n) {
      yields[n] = channel::yield_n(sc.channel, eta, n);
      errors[n] = channel::error_n(sc.channel, yields[n], n);
    }
    std::vector<double> gains(m_max + 1), egains(m_max + 1);
    for (int m = 0; m <= m_max; ++m) {
      long double g = 0.0L, eg = 0.0L;
      for (int n = 0; n <= m_max; ++n) {
        const long double p = photonstats::thermal_joint(thermal, n, m);
        g += p * yields[n];
        eg += p * yields[n] * errors[n];
      }
      gains[m] = double(g);
      egains[m] = double(eg);
    }
    const auto rec = estimator::pnr_recover_thermal(gains, egains, thermal);
    for (int n = 0; n <= m_max; ++n) {
      c.worst = std::max(c.worst, std::abs(rec.yields[n] - yields[n]));
      c.worst = std::max(c.worst, std::abs(rec.error_rates[n] - errors[n]));
    }
    c.pass = c.worst <= 1e-8 && rec.well_conditioned;
    checks.push_back(c);
  }

  VerifyOutcome out;
  out.pass = true;
  out.json["scenario"] = scenario_json(sc);
  ordered_json jchecks = ordered_json::array();
  for (const auto& c : checks) {
    out.pass = out.pass && c.pass;
    ordered_json jc;
    jc["name"] = c.name;
    jc["pass"] = c.pass;
    jc["worst"] = round_sig(c.worst);
    if (!c.detail.empty()) jc["detail"] = c.detail;
    jchecks.push_back(jc);
  }
  out.json["checks"] = jchecks;
  out.json["pass"] = out.pass;
  return out;
}

}  // namespace pdqkd::runner

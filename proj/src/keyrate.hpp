#pragma once

#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "observables.hpp"

namespace pdqkd::keyrate {

using observables::SettingObservation;

struct ProtocolParams {
  double sifting_efficiency = 1.0;  // q
  double ec_efficiency = 1.22;      // f, constant unless a table is given
  std::vector<std::pair<double, double>> ec_table;  // (qber, f), sorted
  bool half_rate = false;           // single-laser variants

  double f_of(double qber) const;
  void validate() const;
};

// R^l = q { privacy_term - Q^l f(E^l) H(E^l) }; building block for the
// bound, exact, and fluctuation-worst-cased variants.
double rate_setting_privacy(const ProtocolParams& p,
                            const SettingObservation& obs,
                            double privacy_term);

// R^l = q { -Q^l f(E^l) H(E^l) + signal_term [1 - H(e1U)] } with the
// signal term a lower bound on p1 Y1 + p0 Y0.
double rate_setting_bound(const ProtocolParams& p,
                          const SettingObservation& obs, double signal_term,
                          double e1_upper);

// R^l = q { -Q^l f(E^l) H(E^l) + p1 Y1 [1 - H(e1)] + p0 Y0 } for exact
// parameter knowledge (PNR and asymptotic modes).
double rate_setting_exact(const ProtocolParams& p,
                          const SettingObservation& obs, double y0, double y1,
                          double e1);

// R = sum_l max(R^l, 0), halved when the half-rate flag is set.
double rate_total(const std::vector<double>& setting_rates,
                  const ProtocolParams& p);

struct KeyRatePoint {
  double distance_km = 0.0;
  double rate = 0.0;  // total, bits per pulse
  std::vector<std::pair<std::string, double>> setting_rates;
  std::vector<std::pair<std::string, double>> parameters;
  std::map<std::string, double> diagnostics;  // bounds, norms, deviations
  bool estimation_valid = true;
};

struct ParamSpec {
  std::string name;
  double lo = 0.0;
  double hi = 1.0;
  bool log_scale = true;
};

struct OptimizerOptions {
  int grid_points = 24;      // per axis, log- or linearly spaced
  int zoom_rounds = 2;       // grid refinements around the running best
  double rel_tol = 1e-6;     // simplex convergence
  int max_iterations = 400;  // simplex iterations
};

struct OptimumResult {
  std::vector<double> params;
  double rate = 0.0;
  bool feasible = false;  // some grid point had R > 0
};

// Coarse grid scan followed by Nelder-Mead refinement. objective returns
// the rate (maximized); tiebreak orders equal-rate grid points (smaller
// preferred). Deterministic for a fixed grid.
OptimumResult optimize(
    const std::vector<ParamSpec>& params,
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<double(const std::vector<double>&)>& tiebreak,
    const OptimizerOptions& options = {});

struct CutoffOptions {
  double resolution_km = 0.1;
  double max_distance_km = 500.0;
  double initial_step_km = 16.0;
};

struct CutoffResult {
  bool found = false;
  double distance_km = 0.0;
  std::string note;
};

// Bisection on distance with per-point re-optimization; optimized_rate
// must return the best achievable rate at a distance.
CutoffResult cutoff_distance(const std::function<double(double)>& optimized_rate,
                             const CutoffOptions& options = {});

}  // namespace pdqkd::keyrate

#include "keyrate.hpp"

#include <algorithm>
#include <cmath>

#include "errors.hpp"
#include "special.hpp"

namespace pdqkd::keyrate {

using special::binary_entropy;

void ProtocolParams::validate() const {
  if (!(sifting_efficiency > 0.0 && sifting_efficiency <= 1.0))
    throw ConfigError("protocol: q must be in (0, 1]");
  if (!(ec_efficiency >= 1.0))
    throw ConfigError("protocol: error-correction efficiency must be >= 1");
  for (const auto& [e, f] : ec_table)
    if (!(e >= 0.0 && e <= 0.5) || !(f >= 1.0))
      throw ConfigError("protocol: malformed error-correction table");
}

double ProtocolParams::f_of(double qber) const {
  if (ec_table.empty()) return ec_efficiency;
  if (qber <= ec_table.front().first) return ec_table.front().second;
  if (qber >= ec_table.back().first) return ec_table.back().second;
  for (size_t i = 1; i < ec_table.size(); ++i) {
    if (qber <= ec_table[i].first) {
      const auto& [e0, f0] = ec_table[i - 1];
      const auto& [e1, f1] = ec_table[i];
      const double w = (qber - e0) / (e1 - e0);
      return f0 + w * (f1 - f0);
    }
  }
  return ec_table.back().second;
}

namespace {

double ec_cost(const ProtocolParams& p, const SettingObservation& obs) {
  const double e = std::min(obs.qber(), 0.5);
  return obs.gain * p.f_of(e) * binary_entropy(e);
}

}  // namespace

double rate_setting_privacy(const ProtocolParams& p,
                            const SettingObservation& obs,
                            double privacy_term) {
  return p.sifting_efficiency * (privacy_term - ec_cost(p, obs));
}

double rate_setting_bound(const ProtocolParams& p,
                          const SettingObservation& obs, double signal_term,
                          double e1_upper) {
  const double priv =
      signal_term * (1.0 - binary_entropy(std::clamp(e1_upper, 0.0, 0.5)));
  return rate_setting_privacy(p, obs, priv);
}

double rate_setting_exact(const ProtocolParams& p,
                          const SettingObservation& obs, double y0, double y1,
                          double e1) {
  const double priv =
      obs.p1 * y1 * (1.0 - binary_entropy(std::clamp(e1, 0.0, 0.5))) +
      obs.p0 * y0;
  return rate_setting_privacy(p, obs, priv);
}

double rate_total(const std::vector<double>& setting_rates,
                  const ProtocolParams& p) {
  double r = 0.0;
  for (double v : setting_rates) r += std::max(v, 0.0);
  return p.half_rate ? 0.5 * r : r;
}

namespace {

// transformed coordinates: log for log-scale axes
double to_internal(const ParamSpec& s, double v) {
  return s.log_scale ? std::log(v) : v;
}
double from_internal(const ParamSpec& s, double x) {
  const double v = s.log_scale ? std::exp(x) : x;
  return std::clamp(v, s.lo, s.hi);
}

}  // namespace

OptimumResult optimize(
    const std::vector<ParamSpec>& params,
    const std::function<double(const std::vector<double>&)>& objective,
    const std::function<double(const std::vector<double>&)>& tiebreak,
    const OptimizerOptions& options) {
  const int dim = int(params.size());
  OptimumResult best;
  best.params.assign(dim, 0.0);
  if (dim == 0) {
    best.rate = objective({});
    best.feasible = best.rate > 0.0;
    return best;
  }
  for (const auto& s : params)
    if (!(s.hi >= s.lo) || (s.log_scale && !(s.lo > 0.0)))
      throw ConfigError("optimize: malformed parameter range for " + s.name);

  // stage 1: full grid scan, then deterministic zoom rounds around the
  // running best (the landscapes have broad plateaus with kinks where the
  // inner min/max expressions switch branches)
  const int g = std::max(options.grid_points, 2);
  double best_rate = -1.0;
  double best_tb = 0.0;

  auto scan = [&](const std::vector<double>& lo, const std::vector<double>& hi) {
    std::vector<std::vector<double>> axes(dim);
    for (int i = 0; i < dim; ++i) {
      axes[i].resize(g);
      for (int k = 0; k < g; ++k) {
        const double w = double(k) / double(g - 1);
        axes[i][k] = params[i].log_scale
                         ? lo[i] * std::pow(hi[i] / lo[i], w)
                         : lo[i] + w * (hi[i] - lo[i]);
      }
    }
    long long combos = 1;
    for (int i = 0; i < dim; ++i) combos *= g;
    std::vector<double> x(dim);
    for (long long idx = 0; idx < combos; ++idx) {
      long long rem = idx;
      for (int i = 0; i < dim; ++i) {
        x[i] = axes[i][rem % g];
        rem /= g;
      }
      const double r = objective(x);
      const double tb = tiebreak ? tiebreak(x) : 0.0;
      if (r > best_rate || (r == best_rate && tb < best_tb)) {
        best_rate = r;
        best_tb = tb;
        best.params = x;
      }
    }
  };

  std::vector<double> lo(dim), hi(dim);
  for (int i = 0; i < dim; ++i) {
    lo[i] = params[i].lo;
    hi[i] = params[i].hi;
  }
  scan(lo, hi);
  best.rate = std::max(best_rate, 0.0);
  best.feasible = best_rate > 0.0;
  if (!best.feasible) return best;

  for (int round = 0; round < options.zoom_rounds; ++round) {
    for (int i = 0; i < dim; ++i) {
      if (params[i].log_scale) {
        // two grid cells on either side of the running best
        const double cell = std::pow(params[i].hi / params[i].lo,
                                     2.0 / double(g - 1));
        lo[i] = std::max(params[i].lo, best.params[i] / cell);
        hi[i] = std::min(params[i].hi, best.params[i] * cell);
      } else {
        const double cell =
            2.0 * (params[i].hi - params[i].lo) / double(g - 1);
        lo[i] = std::max(params[i].lo, best.params[i] - cell);
        hi[i] = std::min(params[i].hi, best.params[i] + cell);
      }
    }
    scan(lo, hi);
    best.rate = std::max(best_rate, 0.0);
  }

  // stage 2: Nelder-Mead in the transformed space
  auto eval = [&](const std::vector<double>& xi) {
    std::vector<double> v(dim);
    for (int i = 0; i < dim; ++i) v[i] = from_internal(params[i], xi[i]);
    return -objective(v);  // minimize
  };

  std::vector<std::vector<double>> simplex(dim + 1,
                                           std::vector<double>(dim));
  for (int i = 0; i < dim; ++i)
    simplex[0][i] = to_internal(params[i], best.params[i]);
  for (int k = 1; k <= dim; ++k) {
    simplex[k] = simplex[0];
    const double step = params[k - 1].log_scale
                            ? 0.15
                            : 0.05 * (params[k - 1].hi - params[k - 1].lo);
    simplex[k][k - 1] += step;
  }
  std::vector<double> f(dim + 1);
  for (int k = 0; k <= dim; ++k) f[k] = eval(simplex[k]);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    std::vector<int> order(dim + 1);
    for (int k = 0; k <= dim; ++k) order[k] = k;
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f[a] < f[b]; });
    const int lo = order[0], hi = order[dim], next_hi = order[dim - 1];

    double spread = 0.0;
    for (int i = 0; i < dim; ++i) {
      double mn = simplex[0][i], mx = simplex[0][i];
      for (int k = 1; k <= dim; ++k) {
        mn = std::min(mn, simplex[k][i]);
        mx = std::max(mx, simplex[k][i]);
      }
      spread = std::max(spread, mx - mn);
    }
    const double f_spread = std::abs(f[hi] - f[lo]);
    if (spread < options.rel_tol &&
        f_spread <= options.rel_tol * (std::abs(f[lo]) + 1e-300))
      break;

    std::vector<double> centroid(dim, 0.0);
    for (int k = 0; k <= dim; ++k) {
      if (k == hi) continue;
      for (int i = 0; i < dim; ++i) centroid[i] += simplex[k][i];
    }
    for (int i = 0; i < dim; ++i) centroid[i] /= dim;

    auto blend = [&](double c) {
      std::vector<double> p(dim);
      for (int i = 0; i < dim; ++i)
        p[i] = centroid[i] + c * (simplex[hi][i] - centroid[i]);
      return p;
    };

    const std::vector<double> refl = blend(-1.0);
    const double f_refl = eval(refl);
    if (f_refl < f[lo]) {
      const std::vector<double> expa = blend(-2.0);
      const double f_expa = eval(expa);
      if (f_expa < f_refl) {
        simplex[hi] = expa;
        f[hi] = f_expa;
      } else {
        simplex[hi] = refl;
        f[hi] = f_refl;
      }
    } else if (f_refl < f[next_hi]) {
      simplex[hi] = refl;
      f[hi] = f_refl;
    } else {
      const std::vector<double> contr = blend(0.5);
      const double f_contr = eval(contr);
      if (f_contr < f[hi]) {
        simplex[hi] = contr;
        f[hi] = f_contr;
      } else {
        for (int k = 0; k <= dim; ++k) {
          if (k == lo) continue;
          for (int i = 0; i < dim; ++i)
            simplex[k][i] = 0.5 * (simplex[k][i] + simplex[lo][i]);
          f[k] = eval(simplex[k]);
        }
      }
    }
  }

  int best_vertex = 0;
  for (int k = 1; k <= dim; ++k)
    if (f[k] < f[best_vertex]) best_vertex = k;
  if (-f[best_vertex] > best.rate) {
    best.rate = -f[best_vertex];
    for (int i = 0; i < dim; ++i)
      best.params[i] = from_internal(params[i], simplex[best_vertex][i]);
  }
  return best;
}

CutoffResult cutoff_distance(const std::function<double(double)>& optimized_rate,
                             const CutoffOptions& options) {
  CutoffResult res;
  if (!(optimized_rate(0.0) > 0.0)) {
    res.note = "no positive rate at zero distance";
    return res;
  }
  double lo = 0.0;
  double hi = options.initial_step_km;
  while (optimized_rate(hi) > 0.0) {
    lo = hi;
    hi *= 2.0;
    if (hi > options.max_distance_km) {
      res.note = "rate still positive at the maximum search distance";
      return res;
    }
  }
  while (hi - lo > options.resolution_km) {
    const double mid = 0.5 * (lo + hi);
    if (optimized_rate(mid) > 0.0)
      lo = mid;
    else
      hi = mid;
  }
  res.found = true;
  res.distance_km = 0.5 * (lo + hi);
  return res;
}

}  // namespace pdqkd::keyrate

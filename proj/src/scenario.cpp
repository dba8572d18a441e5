#include "scenario.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "errors.hpp"

namespace pdqkd::scenario {

SchemeKind scheme_from_string(const std::string& name) {
  if (name == "thermal-threshold") return SchemeKind::ThermalThreshold;
  if (name == "thermal-pnr") return SchemeKind::ThermalPnr;
  if (name == "wcp-threshold") return SchemeKind::WcpThreshold;
  if (name == "wcp-pnr") return SchemeKind::WcpPnr;
  if (name == "strong-classical") return SchemeKind::StrongClassical;
  if (name == "active-one-decoy") return SchemeKind::ActiveOneDecoy;
  if (name == "active-asymptotic") return SchemeKind::ActiveAsymptotic;
  throw ConfigError("unknown scheme: " + name);
}

std::string to_string(SchemeKind kind) {
  switch (kind) {
    case SchemeKind::ThermalThreshold: return "thermal-threshold";
    case SchemeKind::ThermalPnr: return "thermal-pnr";
    case SchemeKind::WcpThreshold: return "wcp-threshold";
    case SchemeKind::WcpPnr: return "wcp-pnr";
    case SchemeKind::StrongClassical: return "strong-classical";
    case SchemeKind::ActiveOneDecoy: return "active-one-decoy";
    case SchemeKind::ActiveAsymptotic: return "active-asymptotic";
  }
  return "?";
}

void Scenario::validate() const {
  channel.validate();
  detector.validate();
  protocol.validate();
  thermal.validate();
  wcp.validate();
  if (!(strong_kappa > 0.0))
    throw ConfigError("strong.kappa must be > 0");
  if (!(strong_t1 > 0.0 && strong_t1 < 1.0))
    throw ConfigError("strong.t1 must be in (0, 1)");
  if (!(strong_intensity > 0.0))
    throw ConfigError("strong.intensity must be > 0");
  if (!(active_mu >= 0.0) || !(active_nu >= 0.0))
    throw ConfigError("active intensities must be >= 0");
  if (fluct) fluct->validate();
  if (!(distance_step > 0.0) || !(distance_max >= distance_min) ||
      !(distance_min >= 0.0))
    throw ConfigError("malformed distance grid");
  for (const auto& [name, r] : ranges)
    if (!(r.hi >= r.lo) || !(r.lo > 0.0))
      throw ConfigError("malformed optimization range for " + name);
}

Scenario make_default(SchemeKind kind) {
  Scenario sc;
  sc.scheme = kind;
  switch (kind) {
    case SchemeKind::ThermalThreshold:
      sc.thermal = {200.0, 1e-3};
      sc.ranges["mu"] = {1.0, 2000.0};
      sc.ranges["t"] = {1e-5, 0.2};
      break;
    case SchemeKind::ThermalPnr:
      // flux at the resolving detector stays countable: mu (1-t) <= ~25
      sc.thermal = {18.5, 0.02};
      sc.ranges["mu"] = {1.0, 25.0};
      sc.ranges["t"] = {1e-3, 0.2};
      break;
    case SchemeKind::WcpThreshold:
      sc.wcp = {1e-4, 0.5, 0.5};
      sc.ranges["mu1"] = {1e-6, 2.0};
      sc.ranges["mu2"] = {1e-6, 2.0};
      break;
    case SchemeKind::WcpPnr:
      sc.wcp = {1e-4, 0.95, 0.5};
      sc.ranges["mu1"] = {1e-6, 2.0};
      sc.ranges["mu2"] = {1e-6, 2.0};
      break;
    case SchemeKind::StrongClassical:
      sc.ranges["kappa"] = {0.01, 1.5};
      sc.ranges["t1"] = {0.005, 0.5};
      break;
    case SchemeKind::ActiveOneDecoy:
      sc.fluct = fluctuations::FluctuationConfig{};
      sc.ranges["mu"] = {0.05, 1.5};
      sc.ranges["nu"] = {1e-3, 0.3};
      sc.ranges["split"] = {0.1, 0.9};
      break;
    case SchemeKind::ActiveAsymptotic:
      sc.ranges["mu"] = {0.01, 2.0};
      break;
  }
  return sc;
}

namespace {

double parse_double(const std::string& key, const std::string& value) {
  try {
    size_t used = 0;
    const double v = std::stod(value, &used);
    while (used < value.size() && std::isspace((unsigned char)value[used]))
      ++used;
    if (used != value.size()) throw std::invalid_argument("trailing");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("invalid number for " + key + ": '" + value + "'");
  }
}

bool parse_bool(const std::string& key, const std::string& value) {
  if (value == "true" || value == "1" || value == "yes" || value == "on")
    return true;
  if (value == "false" || value == "0" || value == "no" || value == "off")
    return false;
  throw ConfigError("invalid boolean for " + key + ": '" + value + "'");
}

std::uint64_t parse_u64(const std::string& key, const std::string& value) {
  const double v = parse_double(key, value);
  if (!(v >= 0.0) || v != std::floor(v))
    throw ConfigError("invalid count for " + key + ": '" + value + "'");
  return std::uint64_t(v);
}

// protocol.f_table = "0.01:1.16,0.05:1.22"
std::vector<std::pair<double, double>> parse_f_table(const std::string& key,
                                                     const std::string& v) {
  std::vector<std::pair<double, double>> table;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto colon = item.find(':');
    if (colon == std::string::npos)
      throw ConfigError("invalid table entry for " + key + ": '" + item + "'");
    table.emplace_back(parse_double(key, item.substr(0, colon)),
                       parse_double(key, item.substr(colon + 1)));
  }
  for (size_t i = 1; i < table.size(); ++i)
    if (table[i].first <= table[i - 1].first)
      throw ConfigError(key + ": table abscissas must increase");
  return table;
}

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace((unsigned char)s[a])) ++a;
  while (b > a && std::isspace((unsigned char)s[b - 1])) --b;
  return s.substr(a, b - a);
}

}  // namespace

void apply_override(Scenario& sc, const std::string& key,
                    const std::string& value) {
  if (key == "scheme") {
    const SchemeKind kind = scheme_from_string(value);
    // re-seed the scheme-specific defaults (sources, search ranges) while
    // keeping everything orthogonal to the scheme choice
    Scenario fresh = make_default(kind);
    fresh.channel = sc.channel;
    fresh.detector = sc.detector;
    fresh.protocol = sc.protocol;
    if (sc.fluct) fresh.fluct = sc.fluct;
    fresh.fluct_optimize_split = sc.fluct_optimize_split;
    fresh.distance_min = sc.distance_min;
    fresh.distance_max = sc.distance_max;
    fresh.distance_step = sc.distance_step;
    fresh.seed = sc.seed;
    fresh.verify_samples = sc.verify_samples;
    fresh.verify_draws = sc.verify_draws;
    fresh.verify_inject_fault = sc.verify_inject_fault;
    sc = fresh;
    return;
  }
  if (key == "channel.y0") sc.channel.background_rate = parse_double(key, value);
  else if (key == "channel.e0") sc.channel.background_error = parse_double(key, value);
  else if (key == "channel.ed") sc.channel.misalignment = parse_double(key, value);
  else if (key == "channel.alpha_db_km") sc.channel.loss_db_per_km = parse_double(key, value);
  else if (key == "channel.eta_bob") sc.channel.receiver_transmittance = parse_double(key, value);
  else if (key == "detector.epsilon") sc.detector.dark_count = parse_double(key, value);
  else if (key == "detector.eta_d") sc.detector.efficiency = parse_double(key, value);
  else if (key == "protocol.q") sc.protocol.sifting_efficiency = parse_double(key, value);
  else if (key == "protocol.f") sc.protocol.ec_efficiency = parse_double(key, value);
  else if (key == "protocol.f_table") sc.protocol.ec_table = parse_f_table(key, value);
  else if (key == "protocol.half_rate") sc.protocol.half_rate = parse_bool(key, value);
  else if (key == "source.mu") sc.thermal.mean_photon_number = parse_double(key, value);
  else if (key == "source.t") {
    sc.thermal.bs_transmittance = parse_double(key, value);
    sc.wcp.bs_transmittance = sc.thermal.bs_transmittance;
  }
  else if (key == "source.mu1") sc.wcp.intensity_one = parse_double(key, value);
  else if (key == "source.mu2") sc.wcp.intensity_two = parse_double(key, value);
  else if (key == "strong.kappa") sc.strong_kappa = parse_double(key, value);
  else if (key == "strong.t1") sc.strong_t1 = parse_double(key, value);
  else if (key == "strong.intensity") sc.strong_intensity = parse_double(key, value);
  else if (key == "strong.optimize_t1") sc.strong_optimize_t1 = parse_bool(key, value);
  else if (key == "active.mu") sc.active_mu = parse_double(key, value);
  else if (key == "active.nu") sc.active_nu = parse_double(key, value);
  else if (key == "fluct.enabled") {
    if (parse_bool(key, value)) {
      if (!sc.fluct) sc.fluct = fluctuations::FluctuationConfig{};
    } else {
      sc.fluct.reset();
    }
  }
  else if (key == "fluct.pulses") {
    if (!sc.fluct) sc.fluct = fluctuations::FluctuationConfig{};
    sc.fluct->total_pulses = parse_double(key, value);
  }
  else if (key == "fluct.u_alpha") {
    if (!sc.fluct) sc.fluct = fluctuations::FluctuationConfig{};
    sc.fluct->deviation_multiple = parse_double(key, value);
  }
  else if (key == "fluct.split") {
    if (!sc.fluct) sc.fluct = fluctuations::FluctuationConfig{};
    sc.fluct->signal_fraction = parse_double(key, value);
  }
  else if (key == "fluct.optimize_split") sc.fluct_optimize_split = parse_bool(key, value);
  else if (key == "distance.min") sc.distance_min = parse_double(key, value);
  else if (key == "distance.max") sc.distance_max = parse_double(key, value);
  else if (key == "distance.step") sc.distance_step = parse_double(key, value);
  else if (key == "seed") sc.seed = parse_u64(key, value);
  else if (key == "verify.samples") sc.verify_samples = parse_u64(key, value);
  else if (key == "verify.draws") sc.verify_draws = int(parse_u64(key, value));
  else if (key == "verify.inject_fault") sc.verify_inject_fault = parse_bool(key, value);
  else if (key.rfind("opt.", 0) == 0) {
    const std::string rest = key.substr(4);
    const auto dot = rest.find('.');
    if (dot == std::string::npos)
      throw ConfigError("unknown config key: " + key);
    const std::string name = rest.substr(0, dot);
    const std::string field = rest.substr(dot + 1);
    auto it = sc.ranges.find(name);
    if (it == sc.ranges.end())
      throw ConfigError("no optimization range named '" + name +
                        "' for scheme " + to_string(sc.scheme));
    if (field == "min") it->second.lo = parse_double(key, value);
    else if (field == "max") it->second.hi = parse_double(key, value);
    else throw ConfigError("unknown config key: " + key);
  }
  else throw ConfigError("unknown config key: " + key);
}

Scenario parse_scenario(const std::string& text) {
  // scheme line (if any) decides the defaults, so apply it first
  std::vector<std::pair<std::string, std::string>> entries;
  std::stringstream ss(text);
  std::string line;
  int line_no = 0;
  while (std::getline(ss, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected 'key = value'");
    entries.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }

  Scenario sc = make_default(SchemeKind::WcpThreshold);
  for (const auto& [k, v] : entries)
    if (k == "scheme") sc = make_default(scheme_from_string(v));
  for (const auto& [k, v] : entries) {
    if (k == "scheme") continue;
    apply_override(sc, k, v);
  }
  sc.validate();
  return sc;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

std::map<std::string, std::string> scenario_record(const Scenario& sc) {
  std::map<std::string, std::string> rec;
  auto num = [](double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return std::string(buf);
  };
  rec["scheme"] = to_string(sc.scheme);
  rec["channel.y0"] = num(sc.channel.background_rate);
  rec["channel.e0"] = num(sc.channel.background_error);
  rec["channel.ed"] = num(sc.channel.misalignment);
  rec["channel.alpha_db_km"] = num(sc.channel.loss_db_per_km);
  rec["channel.eta_bob"] = num(sc.channel.receiver_transmittance);
  rec["detector.epsilon"] = num(sc.detector.dark_count);
  rec["detector.eta_d"] = num(sc.detector.efficiency);
  rec["protocol.q"] = num(sc.protocol.sifting_efficiency);
  rec["protocol.f"] = num(sc.protocol.ec_efficiency);
  rec["protocol.half_rate"] = sc.protocol.half_rate ? "true" : "false";
  switch (sc.scheme) {
    case SchemeKind::ThermalThreshold:
    case SchemeKind::ThermalPnr:
      rec["source.mu"] = num(sc.thermal.mean_photon_number);
      rec["source.t"] = num(sc.thermal.bs_transmittance);
      break;
    case SchemeKind::WcpThreshold:
    case SchemeKind::WcpPnr:
      rec["source.mu1"] = num(sc.wcp.intensity_one);
      rec["source.mu2"] = num(sc.wcp.intensity_two);
      rec["source.t"] = num(sc.wcp.bs_transmittance);
      break;
    case SchemeKind::StrongClassical:
      rec["strong.kappa"] = num(sc.strong_kappa);
      rec["strong.t1"] = num(sc.strong_t1);
      rec["strong.intensity"] = num(sc.strong_intensity);
      rec["strong.optimize_t1"] = sc.strong_optimize_t1 ? "true" : "false";
      break;
    case SchemeKind::ActiveOneDecoy:
    case SchemeKind::ActiveAsymptotic:
      rec["active.mu"] = num(sc.active_mu);
      rec["active.nu"] = num(sc.active_nu);
      break;
  }
  if (sc.fluct) {
    rec["fluct.enabled"] = "true";
    rec["fluct.pulses"] = num(sc.fluct->total_pulses);
    rec["fluct.u_alpha"] = num(sc.fluct->deviation_multiple);
    rec["fluct.split"] = num(sc.fluct->signal_fraction);
  } else {
    rec["fluct.enabled"] = "false";
  }
  for (const auto& [name, r] : sc.ranges) {
    rec["opt." + name + ".min"] = num(r.lo);
    rec["opt." + name + ".max"] = num(r.hi);
  }
  rec["seed"] = std::to_string(sc.seed);
  return rec;
}

}  // namespace pdqkd::scenario

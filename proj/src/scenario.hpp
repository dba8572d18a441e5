#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "channel.hpp"
#include "fluctuations.hpp"
#include "keyrate.hpp"
#include "photonstats.hpp"

namespace pdqkd::scenario {

enum class SchemeKind {
  ThermalThreshold,
  ThermalPnr,
  WcpThreshold,
  WcpPnr,
  StrongClassical,
  ActiveOneDecoy,
  ActiveAsymptotic,
};

SchemeKind scheme_from_string(const std::string& name);
std::string to_string(SchemeKind kind);

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

// Full experiment description. Defaults are the GYS values; per-scheme
// source defaults and optimization ranges come from make_default.
struct Scenario {
  SchemeKind scheme = SchemeKind::WcpThreshold;

  channel::ChannelParams channel;
  photonstats::ThresholdDetector detector{3.2e-7, 0.12};
  keyrate::ProtocolParams protocol;

  photonstats::ThermalSource thermal;
  photonstats::WcpSource wcp;
  double strong_kappa = 0.2;
  double strong_t1 = 0.5;
  double strong_intensity = 1e8;
  bool strong_optimize_t1 = false;
  double active_mu = 0.5;
  double active_nu = 0.05;

  std::optional<fluctuations::FluctuationConfig> fluct;
  bool fluct_optimize_split = true;

  double distance_min = 0.0;
  double distance_max = 160.0;
  double distance_step = 5.0;

  std::map<std::string, Range> ranges;  // optimizer search ranges by name

  std::uint64_t seed = 987654321;
  std::uint64_t verify_samples = 200000;
  int verify_draws = 200;
  bool verify_inject_fault = false;

  void validate() const;
};

// Scheme defaults with GYS channel/detector values and the standard
// optimization ranges.
Scenario make_default(SchemeKind kind);

// Flat key-value config text: `section.key = value`, '#' comments.
// Unknown keys raise ConfigError.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::string& path);
void apply_override(Scenario& sc, const std::string& key,
                    const std::string& value);

// All settings as dotted key-value pairs (provenance echo for outputs).
std::map<std::string, std::string> scenario_record(const Scenario& sc);

}  // namespace pdqkd::scenario

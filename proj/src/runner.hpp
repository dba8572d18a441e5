#pragma once

#include <string>

#include <json.hpp>

#include "scenario.hpp"
#include "schemes.hpp"

namespace pdqkd::runner {

using nlohmann::ordered_json;
using scenario::Scenario;

// %.12g rendering used for every number in CSV output.
std::string format_sig(double v);
// doubles rounded to 12 significant digits before entering JSON documents
double round_sig(double v);

struct SweepResult {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;
  std::string to_csv() const;
  ordered_json json;  // same content plus the scenario echo
};

// Optimize and evaluate at every distance of the scenario grid. Rows are
// emitted in grid order; per-point failures are recorded in the row's
// status column and the sweep continues.
SweepResult run_sweep(const Scenario& sc);

struct CutoffOutcome {
  bool found = false;
  double distance_km = 0.0;
  ordered_json json;
};

CutoffOutcome run_cutoff(const Scenario& sc);

struct OptimizeOutcome {
  keyrate::KeyRatePoint point;
  ordered_json json;
};

OptimizeOutcome run_optimize(const Scenario& sc, double distance_km);

struct VerifyOutcome {
  bool pass = false;
  ordered_json json;
};

// Sign conditions, closed-form vs oracle agreement, Monte Carlo
// comparison, and the PNR round trip, all seeded from the scenario.
VerifyOutcome run_verify(const Scenario& sc);

}  // namespace pdqkd::runner

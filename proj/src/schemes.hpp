#pragma once

#include <vector>

#include "estimator.hpp"
#include "keyrate.hpp"
#include "scenario.hpp"

namespace pdqkd::schemes {

using keyrate::KeyRatePoint;
using scenario::Scenario;
using scenario::SchemeKind;

// Free optimization parameters of the scenario's scheme, in evaluation
// order, with the scenario's search ranges.
std::vector<keyrate::ParamSpec> scheme_params(const Scenario& sc);

// Key rate of the scheme at fixed parameter values. Estimation failures
// (sign-condition violations) produce a zero-rate point flagged invalid
// rather than an exception. check_signs additionally runs the full
// sign-condition verifier and stores the outcome in diagnostics.
KeyRatePoint evaluate(const Scenario& sc, const std::vector<double>& params,
                      double distance_km, bool check_signs = false);

// Total source mean photon number, the optimizer tie-break.
double mean_photon_load(const Scenario& sc, const std::vector<double>& params);

// Grid + simplex optimization at one distance. The returned point carries
// the optimal parameters, per-setting rates, and estimation diagnostics.
KeyRatePoint optimize_at(const Scenario& sc, double distance_km,
                         bool check_signs = false);

// Bisection for the distance where the optimized rate reaches zero.
keyrate::CutoffResult find_cutoff(const Scenario& sc,
                                  KeyRatePoint* boundary = nullptr);

}  // namespace pdqkd::schemes

#pragma once

#include <string>
#include <vector>

#include "observables.hpp"
#include "photonstats.hpp"

namespace pdqkd::estimator {

using observables::SettingObservation;
using photonstats::PhotonDistribution;
using photonstats::QuadratureSpec;
using photonstats::ThermalSource;
using photonstats::WcpSource;

// Observations of a two-setting scheme: the pooled "total" setting, the
// weak branch (no-click / above-threshold), and the strong branch
// obtained by subtraction (click / below-threshold). All quantities are
// joint, per emitted pulse.
struct TwoSettingInput {
  SettingObservation total;
  SettingObservation weak;
  SettingObservation strong;
  double e0 = 0.5;
};

struct DecoyBounds {
  double y0_lower = 0.0;
  double y0_upper = 0.0;
  double y1_lower = 0.0;
  double e1_upper = 0.0;
  double signal_term_weak = 0.0;    // lower bound on p1 Y1 + p0 Y0, weak branch
  double signal_term_strong = 0.0;  // same, strong branch
};

double bound_y0_upper(const TwoSettingInput& in);
double bound_y0_lower(const TwoSettingInput& in);
double bound_y1_lower(const TwoSettingInput& in, double y0);
enum class Branch { Weak, Strong };
double bound_signal_term(const TwoSettingInput& in, Branch branch,
                         double y0_upper);
double bound_e1_upper(const TwoSettingInput& in, double y1_lower,
                      double y0_lower);

// Full chain: Y0 bounds, Y1 lower (with Y0 worst-cased to its upper
// bound), per-branch signal terms, e1 upper. Throws EstimationError when
// a sign condition fails.
DecoyBounds estimate_two_setting(const TwoSettingInput& in);

struct SignConditionReport {
  struct Entry {
    std::string name;
    bool pass = true;
    double worst_margin = 0.0;  // relative; negative means violated
    int worst_n = -1;
  };
  std::vector<Entry> entries;
  bool all_pass = true;
  double worst_margin = 0.0;
  // +1 when the weak branch is tilted toward low photon numbers (thermal
  // and strong setups), -1 for the mirrored structure (WCP interference,
  // where no-click selects the brighter output mode). The estimation
  // formulas are valid under either coherent orientation.
  int orientation = 0;
};

// Evaluates every sign condition of the two-setting estimation for n up
// to the shorter distribution length. Both orientations are tried; the
// report carries the one with the better worst margin.
SignConditionReport verify_sign_conditions(const PhotonDistribution& total,
                                           const PhotonDistribution& weak);

struct PnrRecovery {
  std::vector<double> x;            // rescaled gains X_m
  std::vector<double> v;            // rescaled yields V_n
  std::vector<double> yields;       // recovered Y_n
  std::vector<double> error_rates;  // recovered e_n
  double residual = 0.0;            // relative solve residual
  bool well_conditioned = true;     // residual <= 1e-8
  int m_max = 0;
};

// Thermal scheme: invert the truncated square system for {Y_n}; the same
// machinery applied to the error products recovers {Y_n e_n}. The solve
// runs on the joint-probability form (a diagonal equilibration of the
// symmetric Pascal system); x and v report the Pascal coordinates.
PnrRecovery pnr_recover_thermal(const std::vector<double>& gains,
                                const std::vector<double>& error_gains,
                                const ThermalSource& src);

// WCP scheme: the coefficient matrix is built numerically from the joint
// quadrature rows.
PnrRecovery pnr_recover_wcp(const std::vector<double>& gains,
                            const std::vector<double>& error_gains,
                            const WcpSource& src,
                            const QuadratureSpec& spec = {});

// Dense solve, partial pivoting plus one step of iterative refinement.
// matrix is row-major size n*n. Relative residual reported via *residual.
std::vector<double> solve_linear(const std::vector<double>& matrix,
                                 const std::vector<double>& rhs,
                                 double* residual = nullptr);

// Determinant of the symmetric Pascal matrix C(n+m, m), n,m < size.
double pascal_determinant(int size);

}  // namespace pdqkd::estimator

#pragma once

#include "observables.hpp"

namespace pdqkd::fluctuations {

using observables::SettingObservation;

struct FluctuationConfig {
  double total_pulses = 6e9;        // N
  double deviation_multiple = 10.0; // u_alpha
  double signal_fraction = 0.5;     // N_mu / N for the active split
  void validate() const;
};

// Standard-error deviations of the active one-decoy observations. The
// factor 2 in the error products comes from basis sifting.
struct ActiveDeviations {
  double q_signal = 0.0;   // Delta_{Q mu}
  double q_decoy = 0.0;    // Delta_{Q nu}
  double eq_signal = 0.0;  // Delta_{E mu Q mu}
  double eq_decoy = 0.0;   // Delta_{E nu Q nu}
};

ActiveDeviations active_deviations(const SettingObservation& obs_signal,
                                   const SettingObservation& obs_decoy,
                                   const FluctuationConfig& cfg);

// Background-free estimation terms: (1 - 2 e1) Y1 >= A, e1 <= B / Y1^L.
// Identities: Y1^t = A + 2B and e1^U = B / (A + 2B).
struct ABTerms {
  double a = 0.0, b = 0.0;
  double delta_a = 0.0, delta_b = 0.0;
  double c1 = 0.0, c2 = 0.0;  // active-scheme coefficients

  double y1_plug() const { return a + 2.0 * b; }
  double e1_upper() const {
    const double s = a + 2.0 * b;
    return s > 0.0 ? b / s : 0.0;
  }
};

ABTerms ab_active(const SettingObservation& obs_signal,
                  const SettingObservation& obs_decoy, double mu, double nu,
                  const ActiveDeviations& dev);

// Passive two-setting variant: total and no-click observations carry the
// joint gains and the p0..p2 statistics; N^cbar = N_w * N.
ABTerms ab_passive(const SettingObservation& obs_total,
                   const SettingObservation& obs_no_click,
                   const FluctuationConfig& cfg);

// Central value and standard deviation of Y1 [1 - H(e1)] evaluated at the
// plug-in point, with A and B treated as independent.
struct KeyTerm {
  double central = 0.0;
  double deviation = 0.0;
};

KeyTerm fluct_key_term(const ABTerms& ab);

// Worst-cased key term: central - deviation, zero unless A stays positive
// after its own worst-casing.
double worst_case_key_term(const ABTerms& ab);

}  // namespace pdqkd::fluctuations

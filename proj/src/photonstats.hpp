#pragma once

#include <variant>
#include <vector>

#include "special.hpp"

namespace pdqkd::photonstats {

using special::QuadratureSpec;

inline constexpr int kAutoCutoff = -1;
inline constexpr double kTailTarget = 1e-12;   // tail_mass < target * norm
inline constexpr double kNegativeClamp = 1e-14;

// Thermal state of mean photon number mu interfering with vacuum at a
// beamsplitter of transmittance t.
struct ThermalSource {
  double mean_photon_number = 1.0;  // mu
  double bs_transmittance = 0.5;    // t
  void validate() const;
};

// Two phase-randomized coherent pulses interfering at a beamsplitter.
struct WcpSource {
  double intensity_one = 1.0;       // mu1
  double intensity_two = 1.0;       // mu2
  double bs_transmittance = 0.5;    // t

  double upsilon() const { return intensity_one + intensity_two; }
  double omega() const {
    return intensity_one * bs_transmittance +
           intensity_two * (1.0 - bs_transmittance);
  }
  double xi() const;
  // gamma(theta) = [omega + xi cos(theta)] / upsilon
  double gamma_of(double theta) const;
  void validate() const;
};

// Strong coherent pulses, classical interference model. Mode b feeds an
// intensity meter with threshold I_M; mode a is attenuated by t2.
struct StrongSource {
  double intensity_one = 1e8;   // I1
  double intensity_two = 1e8;   // I2
  double threshold = 1e8;       // I_M
  double first_bs = 0.5;        // t1
  double attenuator = 0.5e-8;   // t2

  bool symmetric() const {
    return intensity_one == intensity_two && intensity_one == threshold;
  }
  double kappa() const { return threshold * attenuator; }  // symmetric case
  double zeta() const;                                     // 2 kappa sqrt(t1 r1)
  double intensity_a(double theta) const;
  double intensity_b(double theta) const;
  // arccos of the threshold crossing; ConfigError unless
  // I_b(0) < I_M < I_b(pi).
  double theta_threshold() const;
  void validate() const;
};

struct ThresholdDetector {
  double dark_count = 0.0;   // epsilon
  double efficiency = 1.0;   // eta_d
  void validate() const;
};

struct PnrDetector {
  int outcome_cap = 16;  // tally m = 0..cap, larger outcomes pooled
};

struct ClassicalThresholdDetector {};  // intensity meter of the strong scheme

using SourceSetup = std::variant<ThermalSource, WcpSource, StrongSource>;
using DetectorSetup =
    std::variant<ThresholdDetector, PnrDetector, ClassicalThresholdDetector>;

// Truncated probability vector over photon number. Entries below
// -kNegativeClamp are hard errors; small negatives are clamped to zero.
// sum(entries) + tail_mass == norm, and tail_mass < kTailTarget * norm.
class PhotonDistribution {
 public:
  PhotonDistribution() = default;
  PhotonDistribution(std::vector<double> probabilities, double tail_mass,
                     double norm);

  int max_photon_number() const { return int(p_.size()) - 1; }
  double operator[](int n) const {
    return (n >= 0 && n < int(p_.size())) ? p_[n] : 0.0;
  }
  const std::vector<double>& probabilities() const { return p_; }
  double tail_mass() const { return tail_; }
  double norm() const { return norm_; }
  double mean() const;
  PhotonDistribution normalized() const;

 private:
  std::vector<double> p_;
  double tail_ = 0.0;
  double norm_ = 1.0;
};

// Joint statistics conditioned on a threshold detector in mode b.
struct ConditionalSet {
  PhotonDistribution total;     // p^t_n, norm 1
  PhotonDistribution no_click;  // p^cbar_n, norm N
  PhotonDistribution click;     // p^c_n = p^t_n - p^cbar_n, norm 1 - N
  double no_click_probability = 0.0;  // N_th or N_w
};

// Statistics conditioned on the classical threshold detector.
struct StrongSet {
  PhotonDistribution below;   // p_n^{<I_M}, norm N_s
  PhotonDistribution above;   // p_n^{>I_M}, norm 1 - N_s
  PhotonDistribution total;   // elementwise sum, norm 1
  double below_probability = 0.0;  // N_s
  bool used_closed_forms = false;
};

// PNR outcome m: joint row p_{n,m} over n plus the closed-form pieces.
struct PnrSet {
  PhotonDistribution joint_row;        // norm N_m
  double outcome_probability = 0.0;    // N_m
  double p0 = 0.0;                     // p_{0,m}
  double p1 = 0.0;                     // p_{1,m}
  bool hypergeometric_fallback = false;
};

// Closed-form low-order entries, enough for the estimation bounds. Cheap;
// used inside optimization loops.
struct SettingStats {
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
  double norm = 1.0;  // probability of the setting (N^l)
};
struct TwoSettingStats {
  SettingStats total, no_click, click;
};
struct StrongLowOrder {
  SettingStats total, below, above;
};

double thermal_joint(const ThermalSource& src, int n, int m);
ConditionalSet thermal_conditionals(const ThermalSource& src,
                                    const ThresholdDetector& det,
                                    int n_max = kAutoCutoff);
TwoSettingStats thermal_low_order(const ThermalSource& src,
                                  const ThresholdDetector& det);

double wcp_joint(const WcpSource& src, int n, int m,
                 const QuadratureSpec& spec = {});
ConditionalSet wcp_conditionals(const WcpSource& src,
                                const ThresholdDetector& det,
                                int n_max = kAutoCutoff,
                                const QuadratureSpec& spec = {});
TwoSettingStats wcp_low_order(const WcpSource& src,
                              const ThresholdDetector& det);

StrongSet strong_conditionals(const StrongSource& src, int n_max = kAutoCutoff,
                              const QuadratureSpec& spec = {});
StrongLowOrder strong_low_order(const StrongSource& src);

PnrSet pnr_conditionals_thermal(const ThermalSource& src, int m,
                                int n_max = kAutoCutoff);
PnrSet pnr_conditionals_wcp(const WcpSource& src, int m,
                            int n_max = kAutoCutoff,
                            const QuadratureSpec& spec = {});

// Closed-form p_{0,m} and p_{1,m} for the WCP PNR scheme (Gamma +
// hypergeometric route, integral fallback outside its domain).
struct PnrLowOrder {
  double p0 = 0.0, p1 = 0.0;
  bool hypergeometric_fallback = false;
};
PnrLowOrder wcp_pnr_low_order(const WcpSource& src, int m,
                              const QuadratureSpec& spec = {});

// N_m for the thermal PNR scheme (geometric in mu (1-t)).
double thermal_pnr_outcome_probability(const ThermalSource& src, int m);
// N_m for the WCP PNR scheme, by quadrature.
double wcp_pnr_outcome_probability(const WcpSource& src, int m,
                                   const QuadratureSpec& spec = {});

}  // namespace pdqkd::photonstats

#pragma once

#include <string>
#include <vector>

#include "channel.hpp"
#include "photonstats.hpp"

namespace pdqkd::observables {

using channel::ChannelParams;
using photonstats::PhotonDistribution;
using photonstats::QuadratureSpec;
using photonstats::SettingStats;
using photonstats::StrongSource;
using photonstats::ThermalSource;
using photonstats::ThresholdDetector;
using photonstats::WcpSource;

enum class SettingLabel {
  Total,
  Click,
  NoClick,
  BelowThreshold,
  AboveThreshold,
  Pnr,
  Signal,
  Decoy,
};

std::string to_string(SettingLabel label);

// Joint (per emitted pulse) gain and error product of one setting,
// together with the low-order photon-number probabilities of its
// distribution.
struct SettingObservation {
  SettingLabel label = SettingLabel::Total;
  int pnr_outcome = -1;  // m, for SettingLabel::Pnr
  double p0 = 0.0, p1 = 0.0, p2 = 0.0;
  double gain = 0.0;        // Q^l
  double error_gain = 0.0;  // E^l Q^l
  double setting_probability = 1.0;  // N^l

  double qber() const { return gain > 0.0 ? error_gain / gain : 0.0; }
};

// Series evaluation Q = sum p_n Y_n, EQ = sum p_n (Y0 e0 + (Y_n - Y0) ed).
// Oracle for every closed-form observation below.
SettingObservation observe_generic(const PhotonDistribution& dist,
                                   const ChannelParams& ch, double eta_sys,
                                   SettingLabel label = SettingLabel::Total);

struct ThresholdObservations {
  SettingObservation total, no_click, click;
};

ThresholdObservations observe_thermal(const ThermalSource& src,
                                      const ThresholdDetector& det,
                                      const ChannelParams& ch,
                                      double distance_km);

ThresholdObservations observe_wcp(const WcpSource& src,
                                  const ThresholdDetector& det,
                                  const ChannelParams& ch,
                                  double distance_km);

struct StrongObservations {
  SettingObservation below, above, total;
  bool routed_via_quadrature = false;
};

StrongObservations observe_strong(const StrongSource& src,
                                  const ChannelParams& ch,
                                  double distance_km);

// One observation per PNR outcome m = 0..m_max. m_max = -1 selects the
// smallest cutoff with sum_m N_m > 1 - 1e-10.
std::vector<SettingObservation> observe_pnr_thermal(const ThermalSource& src,
                                                    const ChannelParams& ch,
                                                    double distance_km,
                                                    int m_max = -1);
std::vector<SettingObservation> observe_pnr_wcp(const WcpSource& src,
                                                const ChannelParams& ch,
                                                double distance_km,
                                                int m_max = -1,
                                                const QuadratureSpec& = {});

// Gain model for an actively modulated Poisson setting. Series keeps the
// background factored as 1 - (1-Y0) e^{-mu eta}; Additive adds Y0 on top
// of the signal response. The fluctuation analysis uses Additive.
enum class ActiveGainForm { Series, Additive };

SettingObservation observe_active(double mu, const ChannelParams& ch,
                                  double distance_km,
                                  ActiveGainForm form = ActiveGainForm::Series,
                                  SettingLabel label = SettingLabel::Signal);

}  // namespace pdqkd::observables

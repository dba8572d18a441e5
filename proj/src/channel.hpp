#pragma once

namespace pdqkd::channel {

// Fiber + receiver model. Defaults are the GYS experimental values.
struct ChannelParams {
  double background_rate = 1.7e-6;         // Y0
  double background_error = 0.5;           // e0, random background
  double misalignment = 0.033;             // ed
  double loss_db_per_km = 0.21;            // alpha
  double receiver_transmittance = 0.045;   // eta_Bob

  void validate() const;
};

// eta_sys = eta_Bob * 10^(-alpha d / 10)
double system_transmittance(const ChannelParams& ch, double distance_km);

// (1 - eta)^n computed in log domain; exact at n = 0 and eta in {0, 1}.
double pow_one_minus(double eta, long long n);

// Y_n = 1 - (1 - Y0)(1 - eta_sys)^n
double yield_n(const ChannelParams& ch, double eta_sys, long long n);

// e_n = [Y0 e0 + (Y_n - Y0) ed] / Y_n; division-domain error when Y_n = 0.
double error_n(const ChannelParams& ch, double yield, long long n);

// Y_n e_n without the division: Y0 e0 + (Y_n - Y0) ed. Safe at Y_n = 0.
double yield_error_product(const ChannelParams& ch, double yield);

}  // namespace pdqkd::channel

#include "channel.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace pdqkd::channel {

void ChannelParams::validate() const {
  auto prob = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!prob(background_rate) || !prob(background_error) ||
      !prob(misalignment) || !prob(receiver_transmittance))
    throw ConfigError("channel: probability parameters must lie in [0, 1]");
  if (!(loss_db_per_km >= 0.0))
    throw ConfigError("channel: loss coefficient must be >= 0");
}

double system_transmittance(const ChannelParams& ch, double distance_km) {
  if (!(distance_km >= 0.0))
    throw std::domain_error("system_transmittance: distance must be >= 0");
  return ch.receiver_transmittance *
         std::pow(10.0, -ch.loss_db_per_km * distance_km / 10.0);
}

double pow_one_minus(double eta, long long n) {
  if (n == 0) return 1.0;
  if (eta >= 1.0) return 0.0;
  if (eta <= 0.0) return 1.0;
  return std::exp(double(n) * std::log1p(-eta));
}

double yield_n(const ChannelParams& ch, double eta_sys, long long n) {
  if (n < 0) throw std::domain_error("yield_n: photon number must be >= 0");
  if (!(eta_sys >= 0.0 && eta_sys <= 1.0))
    throw std::domain_error("yield_n: eta_sys must be in [0, 1]");
  return 1.0 - (1.0 - ch.background_rate) * pow_one_minus(eta_sys, n);
}

double error_n(const ChannelParams& ch, double yield, long long n) {
  if (n < 0) throw std::domain_error("error_n: photon number must be >= 0");
  if (!(yield > 0.0))
    throw std::domain_error("error_n: yield must be > 0");
  return yield_error_product(ch, yield) / yield;
}

double yield_error_product(const ChannelParams& ch, double yield) {
  return ch.background_rate * ch.background_error +
         (yield - ch.background_rate) * ch.misalignment;
}

}  // namespace pdqkd::channel

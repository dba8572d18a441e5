#include <doctest.h>

#include <cmath>

#include "channel.hpp"
#include "errors.hpp"

using namespace pdqkd;
using channel::ChannelParams;

namespace {

ChannelParams gys() { return ChannelParams{}; }

}  // namespace

TEST_CASE("system transmittance") {
  ChannelParams ch = gys();
  CHECK(channel::system_transmittance(ch, 0.0) ==
        doctest::Approx(0.045).epsilon(1e-15));
  // log-domain oracle: eta = exp(ln(0.045) - alpha d ln(10)/10)
  const double oracle =
      std::exp(std::log(0.045) - 0.21 * 50.0 * std::log(10.0) / 10.0);
  CHECK(channel::system_transmittance(ch, 50.0) ==
        doctest::Approx(oracle).epsilon(1e-14));
  CHECK(channel::system_transmittance(ch, 50.0) ==
        doctest::Approx(0.00401063).epsilon(1e-6));
  ch.receiver_transmittance = 1.0;
  ch.loss_db_per_km = 0.0;
  CHECK(channel::system_transmittance(ch, 100.0) == 1.0);
  CHECK_THROWS_AS(channel::system_transmittance(ch, -1.0), std::domain_error);
}

TEST_CASE("yield_n") {
  ChannelParams ch = gys();
  CHECK(channel::yield_n(ch, 0.3, 0) ==
        doctest::Approx(ch.background_rate).epsilon(1e-15));
  ch.background_rate = 0.0;
  CHECK(channel::yield_n(ch, 1.0, 3) == 1.0);
  ch.background_rate = 1.7e-6;
  // complementary-probability oracle: 1 - (1-Y0) (1-eta)^2
  const double oracle = 1.0 - (1.0 - 1.7e-6) * 0.99 * 0.99;
  CHECK(channel::yield_n(ch, 0.01, 2) ==
        doctest::Approx(oracle).epsilon(1e-14));
  CHECK(channel::yield_n(ch, 0.01, 2) ==
        doctest::Approx(0.0199017).epsilon(1e-5));
}

TEST_CASE("error_n") {
  ChannelParams ch = gys();
  // n = 0 collapses to e0
  CHECK(channel::error_n(ch, ch.background_rate, 0) ==
        doctest::Approx(ch.background_error).epsilon(1e-12));
  ChannelParams clean = gys();
  clean.background_rate = 0.0;
  CHECK(channel::error_n(clean, 0.2, 1) ==
        doctest::Approx(clean.misalignment).epsilon(1e-14));
  // rearranged-form oracle: ed + Y0 (e0 - ed) / Y_n
  const double oracle = 0.033 + 1.7e-6 * (0.5 - 0.033) / 0.01;
  CHECK(channel::error_n(ch, 0.01, 1) ==
        doctest::Approx(oracle).epsilon(1e-13));
  CHECK(channel::error_n(ch, 0.01, 1) ==
        doctest::Approx(0.0330794).epsilon(1e-5));
  CHECK_THROWS_AS(channel::error_n(ch, 0.0, 1), std::domain_error);
}

TEST_CASE("yield monotone in n and eta, converging to 1") {
  ChannelParams ch = gys();
  double prev = 0.0;
  for (int n = 0; n <= 2000; n += 50) {
    const double y = channel::yield_n(ch, 0.01, n);
    CHECK(y >= prev);
    prev = y;
  }
  CHECK(channel::yield_n(ch, 0.01, 5000) == doctest::Approx(1.0).epsilon(1e-9));
  double prev_eta = 0.0;
  for (double eta = 0.0; eta <= 1.0; eta += 0.1) {
    const double y = channel::yield_n(ch, eta, 3);
    CHECK(y >= prev_eta);
    prev_eta = y;
  }
}

TEST_CASE("error rate stays between misalignment and background error") {
  ChannelParams ch = gys();
  for (int n = 1; n <= 200; n += 7) {
    const double y = channel::yield_n(ch, 0.05, n);
    const double e = channel::error_n(ch, y, n);
    CHECK(e >= ch.misalignment - 1e-15);
    CHECK(e <= ch.background_error + 1e-15);
  }
  // e_n -> ed as n grows
  const double y_big = channel::yield_n(ch, 0.05, 4000);
  CHECK(channel::error_n(ch, y_big, 4000) ==
        doctest::Approx(ch.misalignment).epsilon(1e-4));
}

TEST_CASE("pow_one_minus edge cases") {
  CHECK(channel::pow_one_minus(0.5, 0) == 1.0);
  CHECK(channel::pow_one_minus(1.0, 5) == 0.0);
  CHECK(channel::pow_one_minus(0.0, 5) == 1.0);
  CHECK(channel::pow_one_minus(1e-9, 1000000) ==
        doctest::Approx(std::exp(-1e-3)).epsilon(1e-9));
}

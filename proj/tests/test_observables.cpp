#include <doctest.h>

#include <cmath>

#include "channel.hpp"
#include "observables.hpp"

using namespace pdqkd;
using namespace pdqkd::observables;
using channel::ChannelParams;
using photonstats::ClassicalThresholdDetector;
using photonstats::PhotonDistribution;

namespace {

ChannelParams gys() { return ChannelParams{}; }
photonstats::ThresholdDetector gys_det() { return {3.2e-7, 0.12}; }

photonstats::StrongSource sym_strong(double kappa, double t1) {
  photonstats::StrongSource s;
  s.intensity_one = s.intensity_two = s.threshold = 1e8;
  s.first_bs = t1;
  s.attenuator = kappa / 1e8;
  return s;
}

}  // namespace

TEST_CASE("observe_generic basics") {
  ChannelParams ch = gys();
  PhotonDistribution dist({0.5, 0.3, 0.2}, 0.0, 1.0);
  SUBCASE("dead channel gives zero gain") {
    ChannelParams dead = ch;
    dead.background_rate = 0.0;
    const auto obs = observe_generic(dist, dead, 0.0);
    CHECK(obs.gain == 0.0);
    CHECK(obs.error_gain == 0.0);
  }
  SUBCASE("unit yields give the norm and the misalignment") {
    ChannelParams ideal = ch;
    ideal.background_rate = 0.0;
    const auto obs = observe_generic(dist, ideal, 1.0);
    // Y_0 = 0 contributes nothing; Y_{n>=1} = 1 with e = ed
    CHECK(obs.gain == doctest::Approx(0.5).epsilon(1e-14));
    CHECK(obs.qber() == doctest::Approx(ideal.misalignment).epsilon(1e-12));
  }
}

TEST_CASE("thermal closed-form gains match the series oracle") {
  ChannelParams ch = gys();
  for (double mu : {0.5, 10.0, 200.0}) {
    for (double t : {1e-3, 0.1, 0.5}) {
      for (double d : {0.0, 25.0, 80.0}) {
        photonstats::ThermalSource src{mu, t};
        const auto obs = observe_thermal(src, gys_det(), ch, d);
        const auto set = photonstats::thermal_conditionals(src, gys_det());
        const double eta = channel::system_transmittance(ch, d);
        const auto o_total = observe_generic(set.total, ch, eta);
        const auto o_nc = observe_generic(set.no_click, ch, eta);
        CHECK(obs.total.gain == doctest::Approx(o_total.gain).epsilon(1e-10));
        CHECK(obs.total.error_gain ==
              doctest::Approx(o_total.error_gain).epsilon(1e-10));
        CHECK(obs.no_click.gain == doctest::Approx(o_nc.gain).epsilon(1e-10));
        CHECK(obs.no_click.error_gain ==
              doctest::Approx(o_nc.error_gain).epsilon(1e-10));
      }
    }
  }
}

TEST_CASE("thermal gain reference points") {
  ChannelParams ch = gys();
  ch.background_rate = 0.0;
  // mu t eta = 1 forces Q^t = 1/2
  photonstats::ThermalSource src{1.0 / 0.045, 1.0};
  const auto obs = observe_thermal(src, gys_det(), ch, 0.0);
  CHECK(obs.total.gain == doctest::Approx(0.5).epsilon(1e-12));
  // e0 = ed collapses E^t to ed
  ChannelParams flat = gys();
  flat.background_error = flat.misalignment;
  const auto obs2 =
      observe_thermal(photonstats::ThermalSource{1.0, 0.5}, gys_det(), flat,
                      10.0);
  CHECK(obs2.total.qber() ==
        doctest::Approx(flat.misalignment).epsilon(1e-12));
}

TEST_CASE("wcp closed-form gains match the series oracle") {
  ChannelParams ch = gys();
  for (double mu1 : {1e-4, 0.5}) {
    for (double mu2 : {0.5, 1.0}) {
      photonstats::WcpSource src{mu1, mu2, 0.5};
      const auto obs = observe_wcp(src, gys_det(), ch, 20.0);
      const auto set = photonstats::wcp_conditionals(src, gys_det());
      const double eta = channel::system_transmittance(ch, 20.0);
      const auto o_total = observe_generic(set.total, ch, eta);
      const auto o_nc = observe_generic(set.no_click, ch, eta);
      CHECK(obs.total.gain == doctest::Approx(o_total.gain).epsilon(1e-9));
      CHECK(obs.no_click.gain == doctest::Approx(o_nc.gain).epsilon(1e-9));
      CHECK(obs.total.error_gain ==
            doctest::Approx(o_total.error_gain).epsilon(1e-9));
      CHECK(obs.no_click.error_gain ==
            doctest::Approx(o_nc.error_gain).epsilon(1e-9));
    }
  }
}

TEST_CASE("wcp no-click gain handles a negative Bessel argument") {
  // eta_d below eta_sys flips the sign of (eta_d - eta_sys) xi; evenness
  // of I_0 must keep the closed form on the series oracle
  ChannelParams ch = gys();
  photonstats::WcpSource src{0.8, 0.6, 0.5};
  photonstats::ThresholdDetector dim{0.0, 0.01};
  const auto obs = observe_wcp(src, dim, ch, 0.0);  // eta_sys = 0.045
  const auto set = photonstats::wcp_conditionals(src, dim);
  const double eta = channel::system_transmittance(ch, 0.0);
  const auto oracle = observe_generic(set.no_click, ch, eta);
  CHECK(obs.no_click.gain == doctest::Approx(oracle.gain).epsilon(1e-9));
}

TEST_CASE("wcp single-source limit reproduces the coherent-state gain") {
  ChannelParams ch = gys();
  photonstats::WcpSource src{0.8, 0.0, 0.5};
  const auto obs = observe_wcp(src, gys_det(), ch, 20.0);
  const double eta = channel::system_transmittance(ch, 20.0);
  const double y0 = ch.background_rate;
  const double expect = y0 + (1.0 - y0) * (1.0 - std::exp(-0.4 * eta));
  CHECK(obs.total.gain == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("strong closed-form gains match the series oracle") {
  ChannelParams ch = gys();
  const auto src = sym_strong(0.2, 0.5);
  const auto obs = observe_strong(src, ch, 20.0);
  CHECK_FALSE(obs.routed_via_quadrature);
  const auto set = photonstats::strong_conditionals(src);
  const double eta = channel::system_transmittance(ch, 20.0);
  const auto o_below = observe_generic(set.below, ch, eta);
  const auto o_above = observe_generic(set.above, ch, eta);
  CHECK(obs.below.gain == doctest::Approx(o_below.gain).epsilon(1e-9));
  CHECK(obs.above.gain == doctest::Approx(o_above.gain).epsilon(1e-9));
  CHECK(obs.below.error_gain ==
        doctest::Approx(o_below.error_gain).epsilon(1e-9));
  CHECK(obs.above.error_gain ==
        doctest::Approx(o_above.error_gain).epsilon(1e-9));

  // partition identity: below + above equals the total-gain closed form
  const double expect =
      1.0 - (1.0 - ch.background_rate) * std::exp(-eta * src.kappa()) *
                special::bessel_i(0, eta * src.zeta());
  CHECK(obs.below.gain + obs.above.gain ==
        doctest::Approx(expect).epsilon(1e-11));

  // asymmetric case routes through quadrature
  auto asym = src;
  asym.intensity_one *= 1.01;
  asym.threshold = asym.intensity_b(special::kPi / 2.0);
  const auto qobs = observe_strong(asym, ch, 20.0);
  CHECK(qobs.routed_via_quadrature);
}

TEST_CASE("partition identities: branch gains sum to the total") {
  ChannelParams ch = gys();
  photonstats::ThermalSource tsrc{5.0, 0.2};
  const auto tobs = observe_thermal(tsrc, gys_det(), ch, 30.0);
  CHECK(tobs.click.gain + tobs.no_click.gain ==
        doctest::Approx(tobs.total.gain).epsilon(1e-11));
  photonstats::WcpSource wsrc{0.3, 0.9, 0.5};
  const auto wobs = observe_wcp(wsrc, gys_det(), ch, 30.0);
  CHECK(wobs.click.gain + wobs.no_click.gain ==
        doctest::Approx(wobs.total.gain).epsilon(1e-11));
}

TEST_CASE("pnr thermal observations") {
  ChannelParams ch = gys();
  photonstats::ThermalSource src{1.0, 0.5};
  const auto rows = observe_pnr_thermal(src, ch, 20.0);
  // outcome completeness: gains sum to the threshold-free total
  double q_sum = 0.0, n_sum = 0.0;
  for (const auto& row : rows) {
    q_sum += row.gain;
    n_sum += row.setting_probability;
  }
  CHECK(n_sum == doctest::Approx(1.0).epsilon(1e-9));
  const auto tobs = observe_thermal(src, gys_det(), ch, 20.0);
  CHECK(q_sum == doctest::Approx(tobs.total.gain).epsilon(1e-9));
  // each gain also matches the series oracle on its joint row
  const double eta = channel::system_transmittance(ch, 20.0);
  for (int m = 0; m <= 3; ++m) {
    const auto set = photonstats::pnr_conditionals_thermal(src, m);
    const auto oracle = observe_generic(set.joint_row, ch, eta);
    CHECK(rows[m].gain == doctest::Approx(oracle.gain).epsilon(1e-10));
    CHECK(rows[m].error_gain ==
          doctest::Approx(oracle.error_gain).epsilon(1e-10));
  }
}

TEST_CASE("pnr wcp observations") {
  ChannelParams ch = gys();
  photonstats::WcpSource src{1.0, 1.0, 0.5};
  const auto rows = observe_pnr_wcp(src, ch, 20.0);
  double q_sum = 0.0, n_sum = 0.0;
  for (const auto& row : rows) {
    q_sum += row.gain;
    n_sum += row.setting_probability;
  }
  CHECK(n_sum == doctest::Approx(1.0).epsilon(1e-9));
  const auto wobs = observe_wcp(src, gys_det(), ch, 20.0);
  CHECK(q_sum == doctest::Approx(wobs.total.gain).epsilon(1e-8));
  const double eta = channel::system_transmittance(ch, 20.0);
  for (int m = 0; m <= 2; ++m) {
    const auto set = photonstats::pnr_conditionals_wcp(src, m);
    const auto oracle = observe_generic(set.joint_row, ch, eta);
    CHECK(rows[m].gain == doctest::Approx(oracle.gain).epsilon(1e-9));
  }
}

TEST_CASE("active observations") {
  ChannelParams ch = gys();
  SUBCASE("vacuum setting sees only the background") {
    const auto obs = observe_active(0.0, ch, 20.0, ActiveGainForm::Additive);
    CHECK(obs.gain == doctest::Approx(ch.background_rate).epsilon(1e-15));
  }
  SUBCASE("background-free QBER is the misalignment") {
    ChannelParams clean = ch;
    clean.background_rate = 0.0;
    const auto obs = observe_active(0.5, clean, 20.0);
    CHECK(obs.qber() == doctest::Approx(clean.misalignment).epsilon(1e-12));
  }
  SUBCASE("series form matches observe_generic on a Poisson distribution") {
    const double mu = 0.5;
    std::vector<double> p;
    double tail = 1.0;
    for (int n = 0; n < 40; ++n) {
      const double v = std::exp(-mu) * std::pow(mu, n) / std::tgamma(n + 1.0);
      p.push_back(v);
      tail -= v;
    }
    PhotonDistribution dist(p, std::max(tail, 0.0), 1.0);
    const double eta = channel::system_transmittance(ch, 20.0);
    const auto oracle = observe_generic(dist, ch, eta);
    const auto obs = observe_active(mu, ch, 20.0, ActiveGainForm::Series);
    CHECK(obs.gain == doctest::Approx(oracle.gain).epsilon(1e-10));
    CHECK(obs.error_gain == doctest::Approx(oracle.error_gain).epsilon(1e-10));
  }
  SUBCASE("additive form exceeds the series form by Y0 (1 - e^{-mu eta})") {
    const auto add = observe_active(0.5, ch, 20.0, ActiveGainForm::Additive);
    const auto ser = observe_active(0.5, ch, 20.0, ActiveGainForm::Series);
    const double eta = channel::system_transmittance(ch, 20.0);
    CHECK(add.gain - ser.gain ==
          doctest::Approx(ch.background_rate * (1.0 - std::exp(-0.5 * eta)))
              .epsilon(1e-9));
  }
}

TEST_CASE("qber bounded by one half under a random background") {
  ChannelParams ch = gys();
  for (double d : {0.0, 40.0, 100.0}) {
    const auto obs = observe_thermal(photonstats::ThermalSource{200.0, 1e-3},
                                     gys_det(), ch, d);
    for (const auto* o : {&obs.total, &obs.no_click, &obs.click}) {
      CHECK(o->qber() >= 0.0);
      CHECK(o->qber() <= 0.5 + 1e-12);
      // an observation never out-gains its setting probability
      CHECK(o->error_gain <= o->gain + 1e-15);
      CHECK(o->gain <= o->setting_probability + 1e-12);
    }
  }
}

#include <doctest.h>

#include <cmath>
#include <numeric>

#include "errors.hpp"
#include "mc_oracle.hpp"
#include "photonstats.hpp"

using namespace pdqkd;
using namespace pdqkd::photonstats;

namespace {

ThresholdDetector perfect() { return {0.0, 1.0}; }
ThresholdDetector gys_det() { return {3.2e-7, 0.12}; }

StrongSource sym_strong(double kappa, double t1) {
  StrongSource s;
  s.intensity_one = s.intensity_two = s.threshold = 1e8;
  s.first_bs = t1;
  s.attenuator = kappa / 1e8;
  return s;
}

double dist_sum(const PhotonDistribution& d) {
  double s = 0.0;
  for (int n = 0; n <= d.max_photon_number(); ++n) s += d[n];
  return s;
}

}  // namespace

TEST_CASE("thermal joint probabilities") {
  ThermalSource src{1.0, 0.5};
  CHECK(thermal_joint(src, 0, 0) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(thermal_joint(src, 1, 1) == doctest::Approx(0.0625).epsilon(1e-13));
  // normalization over a generous grid
  double sum = 0.0;
  for (int n = 0; n < 80; ++n)
    for (int m = 0; m < 80; ++m) sum += thermal_joint(src, n, m);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("thermal conditionals: closed forms and norms") {
  ThermalSource src{1.0, 0.5};
  SUBCASE("perfect detector: no-click equals the m = 0 column") {
    const auto set = thermal_conditionals(src, perfect());
    for (int n = 0; n <= 6; ++n)
      CHECK(set.no_click[n] ==
            doctest::Approx(thermal_joint(src, n, 0)).epsilon(1e-12));
    CHECK(set.no_click_probability == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
  }
  SUBCASE("total distribution marginalizes the joint") {
    const auto set = thermal_conditionals(src, gys_det());
    CHECK(set.total[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-13));
    for (int n = 0; n <= 5; ++n) {
      double marg = 0.0;
      for (int m = 0; m < 120; ++m) marg += thermal_joint(src, n, m);
      CHECK(set.total[n] == doctest::Approx(marg).epsilon(1e-11));
    }
  }
  SUBCASE("tails respect the invariant") {
    const auto set = thermal_conditionals(src, gys_det());
    CHECK(set.total.tail_mass() <= 1e-12 * set.total.norm());
    CHECK(dist_sum(set.total) + set.total.tail_mass() ==
          doctest::Approx(set.total.norm()).epsilon(1e-10));
    CHECK(dist_sum(set.no_click) + set.no_click.tail_mass() ==
          doctest::Approx(set.no_click.norm()).epsilon(1e-10));
  }
  SUBCASE("conditionals normalize to one") {
    const auto set = thermal_conditionals(src, gys_det());
    CHECK(dist_sum(set.no_click.normalized()) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK(dist_sum(set.click.normalized()) ==
          doctest::Approx(1.0).epsilon(1e-10));
    CHECK_THROWS_AS(PhotonDistribution({0.0}, 0.0, 0.0).normalized(),
                    std::domain_error);
  }
  SUBCASE("explicit cutoff too small raises") {
    CHECK_THROWS_AS(thermal_conditionals(src, gys_det(), 3), CutoffError);
  }
}

TEST_CASE("thermal no-click norm matches the series") {
  for (double mu : {0.3, 1.0, 20.0}) {
    for (double t : {0.1, 0.5, 0.9}) {
      ThermalSource src{mu, t};
      const auto det = gys_det();
      const auto set = thermal_conditionals(src, det);
      CHECK(dist_sum(set.no_click) ==
            doctest::Approx(set.no_click_probability).epsilon(1e-11));
    }
  }
}

TEST_CASE("wcp joint: factorization and normalization") {
  SUBCASE("single source factorizes into Poissonians") {
    WcpSource src{0.8, 0.0, 0.3};
    for (int n = 0; n <= 4; ++n)
      for (int m = 0; m <= 4; ++m) {
        const double pa = std::exp(-0.24) * std::pow(0.24, n) /
                          std::tgamma(n + 1.0);
        const double pb = std::exp(-0.56) * std::pow(0.56, m) /
                          std::tgamma(m + 1.0);
        CHECK(wcp_joint(src, n, m) ==
              doctest::Approx(pa * pb).epsilon(1e-11));
      }
  }
  SUBCASE("vacuum-vacuum entry is e^{-upsilon}") {
    WcpSource src{1.0, 1.0, 0.5};
    CHECK(wcp_joint(src, 0, 0) ==
          doctest::Approx(std::exp(-2.0)).epsilon(1e-12));
  }
  SUBCASE("normalization") {
    WcpSource src{1.0, 1.0, 0.5};
    double sum = 0.0;
    for (int n = 0; n < 25; ++n)
      for (int m = 0; m < 25; ++m) sum += wcp_joint(src, n, m);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("wcp conditionals: closed forms vs quadrature") {
  WcpSource src{1.0, 1.0, 0.5};
  const auto set = wcp_conditionals(src, gys_det());
  // p^t_0 = I_0(xi) e^{-omega}
  CHECK(set.total[0] == doctest::Approx(0.465759).epsilon(1e-6));
  // every low entry must equal the marginal of the joint
  for (int n = 0; n <= 2; ++n) {
    double marg = 0.0;
    for (int m = 0; m < 40; ++m) marg += wcp_joint(src, n, m);
    CHECK(set.total[n] == doctest::Approx(marg).epsilon(1e-10));
  }
  // no-click entries against the weighted joint sum
  const double eta = gys_det().efficiency;
  for (int n = 0; n <= 2; ++n) {
    double sum = 0.0;
    for (int m = 0; m < 60; ++m)
      sum += std::pow(1.0 - eta, m) * wcp_joint(src, n, m);
    sum *= 1.0 - gys_det().dark_count;
    CHECK(set.no_click[n] == doctest::Approx(sum).epsilon(1e-10));
  }
  CHECK(dist_sum(set.no_click) ==
        doctest::Approx(set.no_click_probability).epsilon(1e-10));
}

TEST_CASE("wcp conditionals: detector edge cases") {
  WcpSource src{0.7, 0.4, 0.5};
  SUBCASE("always-dark detector") {
    const auto set = wcp_conditionals(src, {1.0, 0.5});
    CHECK(set.no_click_probability == 0.0);
    for (int n = 0; n <= set.no_click.max_photon_number(); ++n)
      CHECK(set.no_click[n] == 0.0);
  }
  SUBCASE("blind detector never clicks") {
    const auto set = wcp_conditionals(src, {0.0, 0.0});
    for (int n = 0; n <= 5; ++n)
      CHECK(set.no_click[n] == doctest::Approx(set.total[n]).epsilon(1e-12));
    CHECK(set.no_click_probability == doctest::Approx(1.0).epsilon(1e-13));
  }
  SUBCASE("perfect detector at eta_d = 1 keeps the p2 closed form finite") {
    const auto set = wcp_conditionals(src, perfect());
    double sum = 0.0;
    for (int m = 0; m < 2; ++m) sum += 0.0;
    for (int n = 0; n <= 2; ++n)
      CHECK(set.no_click[n] ==
            doctest::Approx(wcp_joint(src, n, 0)).epsilon(1e-11));
  }
}

TEST_CASE("strong conditionals: symmetric closed forms vs quadrature") {
  const auto src = sym_strong(0.2, 0.5);
  const auto set = strong_conditionals(src);
  CHECK(set.used_closed_forms);
  CHECK(set.below_probability == doctest::Approx(0.5).epsilon(1e-13));
  // frozen quadrature oracle value for p_0^{<}
  CHECK(set.below[0] == doctest::Approx(0.361115).epsilon(2e-5));

  // quadrature route forced by a numerically asymmetric copy
  auto asym = src;
  asym.intensity_one *= 1.0 + 1e-13;
  const auto quad = strong_conditionals(asym);
  CHECK_FALSE(quad.used_closed_forms);
  for (int n = 0; n <= 2; ++n) {
    CHECK(set.below[n] == doctest::Approx(quad.below[n]).epsilon(1e-8));
    CHECK(set.above[n] == doctest::Approx(quad.above[n]).epsilon(1e-8));
  }
  // Struve terms cancel pairwise in the sum
  const double expect =
      std::exp(-0.2) * special::bessel_i(0, src.zeta());
  CHECK(set.below[0] + set.above[0] ==
        doctest::Approx(expect).epsilon(1e-11));
  CHECK(dist_sum(set.below) ==
        doctest::Approx(set.below_probability).epsilon(1e-10));
  CHECK(dist_sum(set.above) ==
        doctest::Approx(1.0 - set.below_probability).epsilon(1e-10));
}

TEST_CASE("strong source threshold ordering is enforced") {
  StrongSource bad = sym_strong(0.2, 0.5);
  bad.threshold = 5e8;  // above I_b(pi)
  CHECK_THROWS_AS(strong_conditionals(bad), ConfigError);
}

TEST_CASE("pnr thermal rows") {
  ThermalSource src{1.0, 0.5};
  SUBCASE("row sums match N_m") {
    for (int m = 0; m <= 4; ++m) {
      const auto set = pnr_conditionals_thermal(src, m);
      CHECK(dist_sum(set.joint_row) ==
            doctest::Approx(set.outcome_probability).epsilon(1e-11));
      CHECK(set.p0 == doctest::Approx(thermal_joint(src, 0, m)).epsilon(1e-12));
      CHECK(set.p1 == doctest::Approx(thermal_joint(src, 1, m)).epsilon(1e-12));
    }
  }
  SUBCASE("outcome probabilities sum to one") {
    double sum = 0.0;
    for (int m = 0; m < 200; ++m)
      sum += thermal_pnr_outcome_probability(src, m);
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-10));
  }
  SUBCASE("p_{0,0} matches the joint") {
    const auto set = pnr_conditionals_thermal(src, 0);
    CHECK(set.p0 == doctest::Approx(0.5).epsilon(1e-13));
  }
  SUBCASE("t = 1 sends nothing to the detector") {
    ThermalSource all{1.0, 1.0};
    for (int m = 1; m <= 3; ++m) {
      const auto set = pnr_conditionals_thermal(all, m);
      CHECK(set.outcome_probability == 0.0);
      CHECK(set.p0 == 0.0);
      CHECK(set.p1 == 0.0);
    }
  }
}

TEST_CASE("pnr wcp closed forms vs quadrature") {
  WcpSource src{1.0, 1.0, 0.5};
  for (int m = 0; m <= 4; ++m) {
    const auto set = pnr_conditionals_wcp(src, m);
    CHECK_FALSE(set.hypergeometric_fallback);
    CHECK(set.p0 == doctest::Approx(wcp_joint(src, 0, m)).epsilon(1e-9));
    CHECK(set.p1 == doctest::Approx(wcp_joint(src, 1, m)).epsilon(1e-9));
    CHECK(dist_sum(set.joint_row) ==
          doctest::Approx(set.outcome_probability).epsilon(1e-10));
  }
  // asymmetric split exercises z < 1
  WcpSource asym{1.0, 0.5, 0.3};
  for (int m = 0; m <= 3; ++m) {
    const auto set = pnr_conditionals_wcp(asym, m);
    CHECK(set.p0 == doctest::Approx(wcp_joint(asym, 0, m)).epsilon(1e-9));
    CHECK(set.p1 == doctest::Approx(wcp_joint(asym, 1, m)).epsilon(1e-9));
  }
  // single-source case factorizes
  WcpSource single{0.9, 0.0, 0.4};
  for (int m = 0; m <= 3; ++m) {
    const auto set = pnr_conditionals_wcp(single, m);
    CHECK(set.p0 == doctest::Approx(wcp_joint(single, 0, m)).epsilon(1e-10));
    CHECK(set.p1 == doctest::Approx(wcp_joint(single, 1, m)).epsilon(1e-10));
  }
  // outcome completeness
  double sum = 0.0;
  for (int m = 0; m < 30; ++m) sum += wcp_pnr_outcome_probability(src, m);
  CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("click distributions stay non-negative") {
  for (double mu1 : {0.1, 1.0}) {
    for (double t : {0.2, 0.5, 0.8}) {
      WcpSource src{mu1, 0.6, t};
      const auto set = wcp_conditionals(src, gys_det());
      for (int n = 0; n <= set.click.max_photon_number(); ++n)
        CHECK(set.click[n] >= 0.0);
    }
  }
}

TEST_CASE("monte carlo oracle agrees with the analytic conditionals") {
  const std::uint64_t samples = 200000;
  SUBCASE("thermal with threshold detector") {
    ThermalSource src{1.0, 0.5};
    const auto mc = mc_oracle(src, perfect(), samples, 42);
    const auto set = thermal_conditionals(src, perfect());
    const auto* no_click = mc.outcome("no-click");
    REQUIRE(no_click != nullptr);
    // empirical p^t_0 within 4 standard errors of 2/3
    CHECK(std::abs(mc.total[0] - 2.0 / 3.0) <= 4.0 * mc.total.error_at(0));
    for (int n = 0; n <= 3; ++n) {
      const double se = std::max(no_click->error_at(n), 1e-9);
      CHECK(std::abs((*no_click)[n] - set.no_click[n]) <= 4.0 * se);
    }
  }
  SUBCASE("wcp with threshold detector") {
    WcpSource src{1.0, 1.0, 0.5};
    const auto mc = mc_oracle(src, perfect(), samples, 7);
    const auto set = wcp_conditionals(src, perfect());
    CHECK(std::abs(mc.total[0] - set.total[0]) <=
          4.0 * std::max(mc.total.error_at(0), 1e-9));
    const auto* click = mc.outcome("click");
    REQUIRE(click != nullptr);
    for (int n = 0; n <= 3; ++n)
      CHECK(std::abs((*click)[n] - set.click[n]) <=
            4.0 * std::max(click->error_at(n), 1e-9));
  }
  SUBCASE("strong with classical threshold detector") {
    const auto src = sym_strong(0.2, 0.5);
    const auto mc = mc_oracle(src, ClassicalThresholdDetector{}, samples, 11);
    const auto set = strong_conditionals(src);
    const auto* below = mc.outcome("below");
    REQUIRE(below != nullptr);
    double below_mass = 0.0;
    for (double p : below->probability) below_mass += p;
    CHECK(std::abs(below_mass - 0.5) <=
          4.0 * std::sqrt(0.25 / double(samples)));
    for (int n = 0; n <= 2; ++n)
      CHECK(std::abs((*below)[n] - set.below[n]) <=
            4.0 * std::max(below->error_at(n), 1e-9));
  }
  SUBCASE("pnr rows") {
    ThermalSource src{1.0, 0.5};
    const auto mc = mc_oracle(src, PnrDetector{6}, samples, 5);
    for (int m = 0; m <= 2; ++m) {
      const auto* row = mc.outcome("m=" + std::to_string(m));
      REQUIRE(row != nullptr);
      for (int n = 0; n <= 2; ++n)
        CHECK(std::abs((*row)[n] - thermal_joint(src, n, m)) <=
              4.0 * std::max(row->error_at(n), 1e-9));
    }
  }
}

TEST_CASE("asymmetric strong light: quadrature vs monte carlo") {
  StrongSource src;
  src.intensity_one = 1e8;
  src.intensity_two = 6e7;
  src.threshold = 9e7;
  src.first_bs = 0.35;
  src.attenuator = 0.25 / 1e8;
  const auto set = strong_conditionals(src);
  CHECK_FALSE(set.used_closed_forms);
  const auto mc = mc_oracle(src, ClassicalThresholdDetector{}, 200000, 314);
  const auto* below = mc.outcome("below");
  const auto* above = mc.outcome("above");
  REQUIRE(below != nullptr);
  REQUIRE(above != nullptr);
  for (int n = 0; n <= 2; ++n) {
    CHECK(std::abs((*below)[n] - set.below[n]) <=
          4.0 * std::max(below->error_at(n), 1e-9));
    CHECK(std::abs((*above)[n] - set.above[n]) <=
          4.0 * std::max(above->error_at(n), 1e-9));
  }
  double below_mass = 0.0;
  for (double p : below->probability) below_mass += p;
  CHECK(std::abs(below_mass - set.below_probability) <=
        4.0 * std::sqrt(0.25 / 200000.0));
}

TEST_CASE("monte carlo oracle is deterministic for a fixed seed") {
  WcpSource src{1.0, 1.0, 0.5};
  const auto a = mc_oracle(src, gys_det(), 100000, 99);
  const auto b = mc_oracle(src, gys_det(), 100000, 99);
  REQUIRE(a.total.probability.size() == b.total.probability.size());
  for (size_t i = 0; i < a.total.probability.size(); ++i)
    CHECK(a.total.probability[i] == b.total.probability[i]);
}

TEST_CASE("monte carlo oracle rejects tiny sample counts") {
  ThermalSource src{1.0, 0.5};
  CHECK_THROWS_AS(mc_oracle(src, perfect(), 1000, 1), std::domain_error);
}

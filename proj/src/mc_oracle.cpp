#include "mc_oracle.hpp"

#include <cmath>
#include <stdexcept>

#include "errors.hpp"

namespace pdqkd::photonstats {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

struct Tally {
  std::vector<std::uint64_t> counts;
  void add(long n) {
    if (n < 0) return;
    if (n >= long(counts.size())) counts.resize(n + 1, 0);
    ++counts[n];
  }
  EmpiricalDistribution finish(std::uint64_t samples) const {
    EmpiricalDistribution d;
    d.samples = samples;
    d.probability.resize(counts.size());
    d.std_error.resize(counts.size());
    for (size_t i = 0; i < counts.size(); ++i) {
      const double p = double(counts[i]) / double(samples);
      d.probability[i] = p;
      d.std_error[i] = std::sqrt(p * (1.0 - p) / double(samples));
    }
    return d;
  }
};

}  // namespace

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(splitmix64(seed ^ splitmix64(stream * 0xd6e8feb86659fd93ull))) {}

std::uint64_t CounterRng::next_u64() {
  return splitmix64(key_ + (++counter_) * kGolden);
}

double CounterRng::uniform() {
  return double(next_u64() >> 11) * 0x1.0p-53;
}

long CounterRng::poisson(double lambda) {
  if (!(lambda >= 0.0)) throw std::domain_error("poisson: lambda must be >= 0");
  if (lambda == 0.0) return 0;
  if (lambda > 60.0)  // split to keep exp(-lambda) representable
    return poisson(0.5 * lambda) + poisson(0.5 * lambda);
  const double limit = std::exp(-lambda);
  long k = 0;
  double prod = 1.0;
  while (true) {
    prod *= uniform();
    if (prod <= limit) return k;
    ++k;
  }
}

long CounterRng::binomial(long n, double p) {
  if (n < 0 || !(p >= 0.0 && p <= 1.0))
    throw std::domain_error("binomial: invalid parameters");
  long k = 0;
  for (long i = 0; i < n; ++i)
    if (uniform() < p) ++k;
  return k;
}

long CounterRng::thermal_photon_number(double mu) {
  if (!(mu >= 0.0)) throw std::domain_error("thermal sample: mu must be >= 0");
  if (mu == 0.0) return 0;
  // P(K > k) = (mu/(1+mu))^{k+1}
  const double u = 1.0 - uniform();  // (0, 1]
  return long(std::floor(std::log(u) / std::log(mu / (1.0 + mu))));
}

const EmpiricalDistribution* McOracleResult::outcome(
    const std::string& label) const {
  for (const auto& [name, dist] : outcomes)
    if (name == label) return &dist;
  return nullptr;
}

McOracleResult mc_oracle(const SourceSetup& source,
                         const DetectorSetup& detector, std::uint64_t samples,
                         std::uint64_t seed) {
  if (samples < 100000)
    throw std::domain_error("mc_oracle: need at least 1e5 samples");

  CounterRng rng(seed, 0);
  McOracleResult result;
  result.samples = samples;

  // draws (n in mode a, m at the measurement) per pulse
  auto draw_pair = [&](long& n, long& m) {
    if (const auto* th = std::get_if<ThermalSource>(&source)) {
      const long k = rng.thermal_photon_number(th->mean_photon_number);
      n = rng.binomial(k, th->bs_transmittance);
      m = k - n;
    } else if (const auto* w = std::get_if<WcpSource>(&source)) {
      const double theta = special::kTwoPi * rng.uniform();
      const double g = w->gamma_of(theta);
      n = rng.poisson(w->upsilon() * g);
      m = rng.poisson(w->upsilon() * (1.0 - g));
    } else {
      throw std::domain_error("mc_oracle: strong light uses the classical detector");
    }
  };

  if (const auto* det = std::get_if<ThresholdDetector>(&detector)) {
    Tally total, click, no_click;
    for (std::uint64_t s = 0; s < samples; ++s) {
      long n = 0, m = 0;
      draw_pair(n, m);
      total.add(n);
      const bool dark = rng.uniform() < det->dark_count;
      const bool fired = dark || rng.binomial(m, det->efficiency) > 0;
      (fired ? click : no_click).add(n);
    }
    result.total = total.finish(samples);
    result.outcomes.emplace_back("click", click.finish(samples));
    result.outcomes.emplace_back("no-click", no_click.finish(samples));
    return result;
  }

  if (const auto* det = std::get_if<PnrDetector>(&detector)) {
    Tally total;
    std::vector<Tally> rows(det->outcome_cap + 1);
    Tally overflow;
    for (std::uint64_t s = 0; s < samples; ++s) {
      long n = 0, m = 0;
      draw_pair(n, m);
      total.add(n);
      if (m <= det->outcome_cap)
        rows[m].add(n);
      else
        overflow.add(n);
    }
    result.total = total.finish(samples);
    for (int m = 0; m <= det->outcome_cap; ++m)
      result.outcomes.emplace_back("m=" + std::to_string(m),
                                   rows[m].finish(samples));
    result.outcomes.emplace_back("m>cap", overflow.finish(samples));
    return result;
  }

  const auto* strong = std::get_if<StrongSource>(&source);
  if (!strong)
    throw std::domain_error(
        "mc_oracle: classical threshold detector needs a strong source");
  Tally total, below, above;
  for (std::uint64_t s = 0; s < samples; ++s) {
    const double theta = special::kTwoPi * rng.uniform();
    const long n = rng.poisson(strong->intensity_a(theta) * strong->attenuator);
    total.add(n);
    (strong->intensity_b(theta) < strong->threshold ? below : above).add(n);
  }
  result.total = total.finish(samples);
  result.outcomes.emplace_back("below", below.finish(samples));
  result.outcomes.emplace_back("above", above.finish(samples));
  return result;
}

}  // namespace pdqkd::photonstats

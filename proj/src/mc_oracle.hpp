#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "photonstats.hpp"

namespace pdqkd::photonstats {

// Counter-based splittable generator: every draw is a hash of
// (seed, stream, counter), so fixed seeds give reproducible streams
// regardless of how work is divided.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  double uniform();  // [0, 1)
  long poisson(double lambda);
  long binomial(long n, double p);
  // P(k) = mu^k / (1 + mu)^{k+1}
  long thermal_photon_number(double mu);

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

struct EmpiricalDistribution {
  std::vector<double> probability;  // joint empirical probabilities
  std::vector<double> std_error;
  std::uint64_t samples = 0;

  double operator[](int n) const {
    return (n >= 0 && n < int(probability.size())) ? probability[n] : 0.0;
  }
  double error_at(int n) const {
    return (n >= 0 && n < int(std_error.size())) ? std_error[n] : 0.0;
  }
};

struct McOracleResult {
  // outcome label ("click", "no-click", "below", "above", "m=0", ...)
  // mapped to the empirical joint distribution over photon number n.
  std::vector<std::pair<std::string, EmpiricalDistribution>> outcomes;
  EmpiricalDistribution total;
  std::uint64_t samples = 0;

  const EmpiricalDistribution* outcome(const std::string& label) const;
};

// Samples the full physical chain: source photon-number law, binomial
// beamsplitting (or phase draw plus Poisson intensities), detector
// response. samples >= 1e5 required.
McOracleResult mc_oracle(const SourceSetup& source,
                         const DetectorSetup& detector, std::uint64_t samples,
                         std::uint64_t seed);

}  // namespace pdqkd::photonstats

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <stdexcept>

#include "kscal/types.hpp"

namespace kscal {

struct McEstimate {
  double mean = 0.0;
  double std_error = 0.0;
  std::size_t n = 0;
};

/// Monte Carlo average of f over the unit sphere of C^k, sampling uniformly
/// via normalized complex Gaussians. Samples are drawn in fixed-size chunks
/// with per-chunk substreams derived from the seed, so the result depends
/// only on (k, n_samples, seed), never on execution schedule.
inline McEstimate mc_average(const std::function<double(const Vector&)>& f, int k,
                             std::size_t n_samples, std::uint64_t seed) {
  if (k < 1) throw std::domain_error("mc_average: k must be positive");
  if (n_samples < 2) throw std::domain_error("mc_average: need at least 2 samples");
  constexpr std::size_t kChunk = 1u << 16;
  double sum = 0.0;
  double sumsq = 0.0;
  std::size_t done = 0;
  for (std::uint64_t chunk = 0; done < n_samples; ++chunk) {
    std::mt19937_64 rng = substream_rng(seed, chunk);
    const std::size_t take = std::min(kChunk, n_samples - done);
    double csum = 0.0, csumsq = 0.0;
    for (std::size_t i = 0; i < take; ++i) {
      const double v = f(random_unit_vector(k, rng));
      csum += v;
      csumsq += v * v;
    }
    sum += csum;
    sumsq += csumsq;
    done += take;
  }
  const double n = static_cast<double>(n_samples);
  const double mean = sum / n;
  const double var = std::max(0.0, (sumsq - n * mean * mean) / (n - 1.0));
  return {mean, std::sqrt(var / n), n_samples};
}

}  // namespace kscal

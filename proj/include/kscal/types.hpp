#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>

#include <Eigen/Dense>

namespace kscal {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace detail {

// splitmix64: cheap, well-mixed 64-bit scrambler for deriving substream seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

inline std::mt19937_64 make_rng(std::uint64_t seed) {
  return std::mt19937_64(detail::splitmix64(seed));
}

// Independent deterministic substream, e.g. one per restart or per chunk.
inline std::mt19937_64 substream_rng(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(detail::splitmix64(detail::splitmix64(seed) ^ (index + 1)));
}

// Entries are standard complex Gaussians: (N(0,1) + i N(0,1)) / sqrt(2).
inline Matrix complex_gaussian(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix out(rows, cols);
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(i, j) = cplx(re * inv_sqrt2, im * inv_sqrt2);
    }
  return out;
}

// Uniform on the unit sphere of C^m (normalized complex Gaussian).
inline Vector random_unit_vector(int m, std::mt19937_64& rng) {
  if (m < 1) throw std::invalid_argument("random_unit_vector: dimension must be positive");
  Vector v = complex_gaussian(m, 1, rng).col(0);
  double n = v.norm();
  while (n == 0.0) {  // essentially impossible, but keep the contract total
    v = complex_gaussian(m, 1, rng).col(0);
    n = v.norm();
  }
  return v / n;
}

}  // namespace kscal

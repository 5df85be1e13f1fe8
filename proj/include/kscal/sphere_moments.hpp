#pragma once

#include <map>
#include <stdexcept>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "kscal/curvature_tensor.hpp"
#include "kscal/types.hpp"

namespace kscal {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

namespace detail {

inline BigInt factorial(int n) {
  BigInt f = 1;
  for (int i = 2; i <= n; ++i) f *= i;
  return f;
}

}  // namespace detail

/// Average over the unit sphere of C^k of prod_i z_i^{alpha_i} conj(z_i)^{beta_i}.
///
/// Phase averaging kills everything with alpha != beta; on the diagonal the
/// value is (prod_i alpha_i!) * (k-1)! / (k-1+|alpha|)!, which reduces to the
/// two quartic constants 2/(k(k+1)) and 1/(k(k+1)) at |alpha| = 2.
inline Rational monomial_moment(int k, const std::vector<int>& alpha,
                                const std::vector<int>& beta) {
  if (k < 1) throw std::domain_error("monomial_moment: k must be positive");
  if (static_cast<int>(alpha.size()) != k || static_cast<int>(beta.size()) != k)
    throw std::invalid_argument("monomial_moment: multi-index length must equal k");
  int total = 0;
  for (int i = 0; i < k; ++i) {
    if (alpha[i] < 0 || beta[i] < 0)
      throw std::domain_error("monomial_moment: negative exponent");
    total += alpha[i];
  }
  if (alpha != beta) return Rational(0);
  BigInt num = detail::factorial(k - 1);
  for (int i = 0; i < k; ++i) num *= detail::factorial(alpha[i]);
  return Rational(num, detail::factorial(k - 1 + total));
}

/// Table of exact sphere-average values for diagonal monomials up to a given
/// total order. Off-diagonal queries return zero without being stored.
class MomentTable {
 public:
  MomentTable(int k, int max_order = 4) : k_(k), max_order_(max_order) {
    if (k < 1) throw std::domain_error("MomentTable: k must be positive");
    std::vector<int> alpha(k, 0);
    enumerate(alpha, 0, max_order);
  }

  int k() const { return k_; }
  int max_order() const { return max_order_; }

  Rational moment(const std::vector<int>& alpha, const std::vector<int>& beta) const {
    if (alpha != beta) return Rational(0);
    const auto it = diagonal_.find(alpha);
    if (it == diagonal_.end()) return monomial_moment(k_, alpha, beta);
    return it->second;
  }

  const std::map<std::vector<int>, Rational>& diagonal() const { return diagonal_; }

 private:
  void enumerate(std::vector<int>& alpha, int pos, int budget) {
    if (pos == k_) {
      diagonal_[alpha] = monomial_moment(k_, alpha, alpha);
      return;
    }
    for (int e = 0; e <= budget; ++e) {
      alpha[pos] = e;
      enumerate(alpha, pos + 1, budget - e);
    }
    alpha[pos] = 0;
  }

  int k_;
  int max_order_;
  std::map<std::vector<int>, Rational> diagonal_;
};

namespace detail {

// Dense cache of avg <z_i conj(z_j) z_k conj(z_l)> over the sphere of C^k,
// filled from monomial_moment so the contraction below genuinely routes
// through the closed-form moments.
struct QuarticMomentCache {
  int k;
  std::vector<double> w;  // k^4 weights

  explicit QuarticMomentCache(int kk) : k(kk), w(static_cast<std::size_t>(kk) * kk * kk * kk) {
    std::vector<int> alpha(k, 0), beta(k, 0);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j)
        for (int a = 0; a < k; ++a)
          for (int b = 0; b < k; ++b) {
            std::fill(alpha.begin(), alpha.end(), 0);
            std::fill(beta.begin(), beta.end(), 0);
            alpha[i] += 1;
            alpha[a] += 1;
            beta[j] += 1;
            beta[b] += 1;
            w[((static_cast<std::size_t>(i) * k + j) * k + a) * k + b] =
                static_cast<double>(monomial_moment(k, alpha, beta));
          }
  }
};

inline const QuarticMomentCache& quartic_moments(int k) {
  static std::map<int, QuarticMomentCache> cache;
  auto it = cache.find(k);
  if (it == cache.end()) it = cache.emplace(k, QuarticMomentCache(k)).first;
  return it->second;
}

}  // namespace detail

/// Average of R(Z, conj(Z), Z, conj(Z)) over the unit sphere of C^k, for a
/// tensor already restricted to dimension k. Evaluated by full moment
/// contraction over all index quadruples (weights from monomial_moment),
/// which keeps this route independent of the trace formula it is tested
/// against.
inline double average_quartic_form(const CurvatureTensor& rk) {
  const int k = rk.dim();
  const auto& cache = detail::quartic_moments(k);
  cplx acc(0.0, 0.0);
  std::size_t idx = 0;
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j)
      for (int a = 0; a < k; ++a)
        for (int b = 0; b < k; ++b, ++idx) {
          const double w = cache.w[idx];
          if (w != 0.0) acc += rk(i, j, a, b) * w;
        }
  return acc.real();
}

/// Exact moment evaluation of
///   avg over unit Z in the plane of R(B Z, conj(C Z), D Z, conj(E Z)),
/// the quartic sphere average behind the first and second variations.
/// B, C, D, E are arbitrary m x m matrices acting on the ambient space.
inline cplx sphere_average_quartic(const CurvatureTensor& r, const TangentPlane& plane,
                                   const Matrix& b, const Matrix& c, const Matrix& d,
                                   const Matrix& e) {
  const int k = plane.rank();
  const Matrix& f = plane.frame();
  // Components R(B E_i, conj(C E_j), D E_a, conj(E E_b)) over the plane frame.
  const detail::Array4 t = detail::transform4(r, b * f, c * f, d * f, e * f);
  // avg z_i conj(z_j) z_a conj(z_b) = (delta_ij delta_ab + delta_ib delta_aj) / (k(k+1))
  cplx acc(0.0, 0.0);
  for (int i = 0; i < k; ++i)
    for (int a = 0; a < k; ++a) acc += t(i, i, a, a) + t(i, a, a, i);
  return acc / static_cast<double>(k * (k + 1));
}

/// avg over unit Z in the plane of R(u, conj(v), Z, conj(Z))
///   = (1/k) sum_a R(u, conj(v), E_a, conj(E_a)).
inline cplx sphere_average_quadratic(const CurvatureTensor& r, const TangentPlane& plane,
                                     const Vector& u, const Vector& v) {
  const int m = r.dim();
  const Matrix p = plane.projector();
  std::vector<cplx> t1(static_cast<std::size_t>(m) * m, cplx(0, 0));
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      cplx acc(0, 0);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) acc += r(i, j, a, b) * p(a, b);
      t1[static_cast<std::size_t>(i) * m + j] = acc;
    }
  cplx total(0, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) total += u(i) * std::conj(v(j)) * t1[static_cast<std::size_t>(i) * m + j];
  return total / static_cast<double>(plane.rank());
}

}  // namespace kscal

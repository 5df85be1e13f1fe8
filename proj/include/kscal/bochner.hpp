#pragma once

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "kscal/curvature_tensor.hpp"
#include "kscal/skew_normal_form.hpp"
#include "kscal/types.hpp"

namespace kscal {

/// Pointwise coefficients a_{i1...ip} of a (p,0)-form, stored as the full
/// antisymmetric array over [0, m)^p. The form itself is
/// (1/p!) sum_{I} a_I dz^{i1} ^ ... ^ dz^{ip}.
class FormCoefficients {
 public:
  /// Antisymmetrizes arbitrary raw components (group average with signs) and
  /// records how far the input was from its antisymmetric part.
  static FormCoefficients antisymmetrized(int m, int p, std::vector<cplx> raw) {
    FormCoefficients f(m, p);
    if (raw.size() != f.a_.size())
      throw std::invalid_argument("FormCoefficients: size mismatch");
    std::vector<int> idx(p), perm(p);
    double residual = 0.0;
    const std::size_t total = f.a_.size();
    for (std::size_t flat = 0; flat < total; ++flat) {
      f.unflatten(flat, idx);
      std::iota(perm.begin(), perm.end(), 0);
      cplx acc(0, 0);
      double count = 0;
      do {
        int sign = permutation_sign(perm);
        std::size_t src = 0;
        for (int q = 0; q < p; ++q) src = src * m + idx[perm[q]];
        acc += static_cast<double>(sign) * raw[src];
        count += 1.0;
      } while (std::next_permutation(perm.begin(), perm.end()));
      const cplx v = acc / count;
      f.a_[flat] = v;
      residual = std::max(residual, std::abs(v - raw[flat]));
    }
    f.antisymmetry_residual_ = residual;
    return f;
  }

  /// Degree-2 form from its skew-symmetric coefficient matrix a_{ij} = A(i,j).
  static FormCoefficients from_matrix(const Matrix& a, double tol = 1e-12) {
    const int m = static_cast<int>(a.rows());
    if (a.rows() != a.cols()) throw std::invalid_argument("FormCoefficients: must be square");
    const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
    if (!((a + a.transpose()).cwiseAbs().maxCoeff() <= tol * scale))
      throw std::domain_error("FormCoefficients: matrix is not skew-symmetric");
    FormCoefficients f(m, 2);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) f.a_[static_cast<std::size_t>(i) * m + j] = a(i, j);
    return f;
  }

  static FormCoefficients random(int m, int p, std::mt19937_64& rng) {
    const std::size_t n = pow_size(m, p);
    std::vector<cplx> raw(n);
    std::normal_distribution<double> normal(0.0, 1.0);
    for (auto& z : raw) z = cplx(normal(rng), normal(rng));
    return antisymmetrized(m, p, std::move(raw));
  }

  int dim() const { return m_; }
  int degree() const { return p_; }
  double antisymmetry_residual() const { return antisymmetry_residual_; }

  cplx coeff_flat(std::size_t flat) const { return a_[flat]; }
  cplx coeff(const std::vector<int>& idx) const {
    std::size_t flat = 0;
    for (int q = 0; q < p_; ++q) flat = flat * m_ + idx[q];
    return a_[flat];
  }

  void unflatten(std::size_t flat, std::vector<int>& idx) const {
    for (int q = p_ - 1; q >= 0; --q) {
      idx[q] = static_cast<int>(flat % m_);
      flat /= m_;
    }
  }

  /// Max violation of antisymmetry over adjacent transpositions.
  double check_antisymmetry() const {
    double worst = 0.0;
    std::vector<int> idx(p_), swapped(p_);
    for (std::size_t flat = 0; flat < a_.size(); ++flat) {
      unflatten(flat, idx);
      for (int q = 0; q + 1 < p_; ++q) {
        swapped = idx;
        std::swap(swapped[q], swapped[q + 1]);
        worst = std::max(worst, std::abs(coeff(idx) + coeff(swapped)));
      }
    }
    return worst;
  }

 private:
  FormCoefficients(int m, int p) : m_(m), p_(p), a_(pow_size(m, p), cplx(0, 0)) {
    if (m < 1 || p < 1 || p > m)
      throw std::invalid_argument("FormCoefficients: need 1 <= p <= m");
    if (pow_size(m, p) > (std::size_t(1) << 24))
      throw std::invalid_argument("FormCoefficients: m^p too large");
  }

  static std::size_t pow_size(int m, int p) {
    std::size_t n = 1;
    for (int q = 0; q < p; ++q) n *= static_cast<std::size_t>(m);
    return n;
  }

  static int permutation_sign(const std::vector<int>& perm) {
    int inversions = 0;
    for (std::size_t i = 0; i < perm.size(); ++i)
      for (std::size_t j = i + 1; j < perm.size(); ++j)
        if (perm[i] > perm[j]) ++inversions;
    return (inversions % 2 == 0) ? 1 : -1;
  }

  int m_, p_;
  std::vector<cplx> a_;
  double antisymmetry_residual_ = 0.0;
};

/// The algebraic curvature part of the complex Hessian of |s|^2 paired with
/// v ^ conj(v):
///   (1/p!) sum_{I} sum_{q<p} sum_{l} R(v, conj(v), e_{i_q}, conj(e_l))
///                                   * a_I * conj(a_{I with i_q -> l}).
/// Real for every antisymmetric s and unit v; its sphere average over the
/// minimizing plane drives the vanishing arguments.
inline double bochner_curvature_term(const CurvatureTensor& r, const FormCoefficients& s,
                                     const Vector& v) {
  const int m = r.dim();
  const int p = s.degree();
  if (s.dim() != m) throw std::invalid_argument("bochner_curvature_term: dimension mismatch");
  if (std::abs(v.norm() - 1.0) > 1e-8)
    throw std::domain_error("bochner_curvature_term: v must be a unit vector");

  // W(i, l) = R(v, conj(v), e_i, conj(e_l)), Hermitian in (i, l).
  Matrix w(m, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) {
      cplx acc(0, 0);
      for (int q = 0; q < m; ++q)
        for (int t = 0; t < m; ++t) acc += v(q) * std::conj(v(t)) * r(q, t, i, l);
      w(i, l) = acc;
    }

  std::size_t total = 1;
  for (int q = 0; q < p; ++q) total *= static_cast<std::size_t>(m);
  std::vector<int> idx(p), jdx(p);
  cplx acc(0, 0);
  for (std::size_t flat = 0; flat < total; ++flat) {
    const cplx ai = s.coeff_flat(flat);
    if (ai == cplx(0, 0)) continue;
    s.unflatten(flat, idx);
    for (int q = 0; q < p; ++q) {
      jdx = idx;
      for (int l = 0; l < m; ++l) {
        jdx[q] = l;
        const cplx aj = s.coeff(jdx);
        if (aj == cplx(0, 0)) continue;
        // The cotangent-bundle curvature pairs a_I's index through the
        // conjugated slot; this is what makes the scalar frame-invariant.
        acc += w(l, idx[q]) * ai * std::conj(aj);
      }
    }
  }
  double factorial = 1.0;
  for (int q = 2; q <= p; ++q) factorial *= q;
  return acc.real() / factorial;
}

/// Degree-2 route through the normal form: put the coefficient matrix into
/// block form, rotate the tensor into the same frame, and sum
/// lambda_i^2 (R(v,vbar,f_{2i},f_{2i}bar) + R(v,vbar,f_{2i+1},f_{2i+1}bar))
/// over the blocks. Agrees with the direct summation above.
inline double bochner_normal_form_route(const CurvatureTensor& r, const Matrix& coeff,
                                        const Vector& v) {
  const SkewNormalForm nf = skew_normal_form(coeff);
  const CurvatureTensor rr = conjugate_frame(r, nf.u);
  const Vector vv = nf.u.adjoint() * v;
  const int m = r.dim();
  double total = 0.0;
  for (std::size_t b = 0; b < nf.lambda.size(); ++b) {
    if (nf.lambda[b] == 0.0) continue;
    const int i0 = static_cast<int>(2 * b), i1 = i0 + 1;
    cplx pair(0, 0);
    for (int q = 0; q < m; ++q)
      for (int t = 0; t < m; ++t)
        pair += vv(q) * std::conj(vv(t)) * (rr(q, t, i0, i0) + rr(q, t, i1, i1));
    total += nf.lambda[b] * nf.lambda[b] * pair.real();
  }
  return total;
}

}  // namespace kscal

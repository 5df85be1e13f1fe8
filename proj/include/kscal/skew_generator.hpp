#pragma once

#include <stdexcept>
#include <utility>

#include "kscal/tangent_plane.hpp"
#include "kscal/types.hpp"

namespace kscal {

/// A skew-Hermitian m x m matrix (a* = -a), so exp(t a) is unitary for all
/// real t. These generate the one-parameter frame variations used throughout.
class SkewGenerator {
 public:
  explicit SkewGenerator(Matrix a, double tol = 1e-12) : a_(std::move(a)) {
    if (a_.rows() != a_.cols()) throw std::invalid_argument("SkewGenerator: must be square");
    const double scale = std::max(1.0, a_.cwiseAbs().maxCoeff());
    const double err = (a_ + a_.adjoint()).cwiseAbs().maxCoeff();
    if (!(err <= tol * scale))
      throw std::domain_error("SkewGenerator: matrix is not skew-Hermitian");
  }

  static SkewGenerator zero(int m) { return SkewGenerator(Matrix::Zero(m, m)); }

  /// Random skew-Hermitian matrix, Frobenius-normalized to 1.
  static SkewGenerator random(int m, std::mt19937_64& rng) {
    Matrix g = complex_gaussian(m, m, rng);
    Matrix a = 0.5 * (g - g.adjoint());
    const double n = a.norm();
    if (n > 0) a /= n;
    return SkewGenerator(std::move(a));
  }

  /// Builds the generator with the given plane<->complement coupling block:
  /// a E_i = sum_p C(p,i) B_p and a B_p = -sum_i conj(C(p,i)) E_i, where the
  /// E_i are the plane's frame columns and the B_p span the complement.
  /// All other blocks are zero ("horizontal" with respect to the plane).
  static SkewGenerator horizontal(const TangentPlane& plane, const Matrix& coupling) {
    const int m = plane.ambient_dim();
    const int k = plane.rank();
    if (coupling.rows() != m - k || coupling.cols() != k)
      throw std::invalid_argument("SkewGenerator::horizontal: coupling must be (m-k) x k");
    const Matrix b = plane.completion();
    Matrix a = b * coupling * plane.frame().adjoint();
    a -= a.adjoint().eval();
    return SkewGenerator(std::move(a));
  }

  int dim() const { return static_cast<int>(a_.rows()); }
  const Matrix& matrix() const { return a_; }

  /// Frobenius norm, i.e. sqrt(tr(a* a)).
  double norm() const { return a_.norm(); }

  SkewGenerator scaled(double s) const { return SkewGenerator(s * a_); }

 private:
  Matrix a_;
};

/// exp(t a) computed exactly via the eigendecomposition of the Hermitian
/// matrix -i a; the result is unitary to machine precision.
inline Matrix unitary_exp(const SkewGenerator& a, double t = 1.0) {
  const int m = a.dim();
  const Matrix h = cplx(0.0, -1.0) * a.matrix();
  Eigen::SelfAdjointEigenSolver<Matrix> es(h);
  if (es.info() != Eigen::Success) throw std::runtime_error("unitary_exp: eigensolver failed");
  Vector phases(m);
  for (int i = 0; i < m; ++i) {
    const double theta = t * es.eigenvalues()(i);
    phases(i) = cplx(std::cos(theta), std::sin(theta));
  }
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace kscal

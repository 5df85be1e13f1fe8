#pragma once

#include <algorithm>
#include <functional>
#include <stdexcept>
#include <vector>

#include "kscal/types.hpp"

namespace kscal {

/// Unitary congruence normal form of a complex skew-symmetric matrix:
/// transpose(U) A U is block diagonal with 2x2 blocks lambda_i * [[0,1],[-1,0]]
/// followed by a zero block. Each lambda_i >= 0 appears as a singular value
/// of A with multiplicity two.
struct SkewNormalForm {
  Matrix u;                    // m x m unitary
  std::vector<double> lambda;  // floor(m/2) values, nonincreasing, zero-padded
};

/// Block pattern blkdiag(lambda_1 F, ..., lambda_r F, 0) used for
/// reconstruction checks.
inline Matrix skew_block_form(const std::vector<double>& lambda, int m) {
  Matrix b = Matrix::Zero(m, m);
  for (std::size_t i = 0; i < lambda.size() && 2 * i + 1 < static_cast<std::size_t>(m); ++i) {
    b(2 * i, 2 * i + 1) = lambda[i];
    b(2 * i + 1, 2 * i) = -lambda[i];
  }
  return b;
}

/// Greedy pair extraction. Each round takes a top singular triple (sigma, u, v)
/// of the deflated form via the Hermitian eigenproblem of A*A (not an SVD, so
/// the SVD stays available as an independent oracle). Skew-symmetry gives
/// A conj(u) = -sigma conj(v), so the orthonormal pair (conj(u), v) spans an
/// invariant 2-plane carrying exactly the block sigma * [[0,1],[-1,0]] under
/// transpose-congruence.
inline SkewNormalForm skew_normal_form(const Matrix& a, double tol = 1e-12) {
  const int m = static_cast<int>(a.rows());
  if (a.rows() != a.cols()) throw std::invalid_argument("skew_normal_form: must be square");
  const double scale = std::max(1.0, a.cwiseAbs().maxCoeff());
  if (!((a + a.transpose()).cwiseAbs().maxCoeff() <= tol * scale))
    throw std::domain_error("skew_normal_form: matrix is not skew-symmetric");

  SkewNormalForm out;
  out.u = Matrix::Zero(m, m);
  int filled = 0;

  Matrix basis = Matrix::Identity(m, m);  // orthonormal basis of the unreduced part
  const double deflate_tol = 1e-13 * scale;
  while (basis.cols() >= 2) {
    const int r = static_cast<int>(basis.cols());
    const Matrix aw = basis.transpose() * a * basis;  // skew-symmetric r x r
    Eigen::SelfAdjointEigenSolver<Matrix> es(aw.adjoint() * aw);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("skew_normal_form: eigensolver failed");
    const double sigma2 = es.eigenvalues()(r - 1);
    if (!(sigma2 > deflate_tol * deflate_tol)) break;  // rest is the zero block

    const Vector v = es.eigenvectors().col(r - 1);
    Vector u_vec = aw * v;
    const double sigma = u_vec.norm();
    u_vec /= sigma;

    // Columns (conj(u), v) in deflated coordinates; the off-diagonal block
    // entry conj(u)^T aw v = |aw v| = sigma is exactly real nonnegative.
    const Vector x = basis * u_vec.conjugate();
    const Vector y = basis * v;
    out.u.col(filled) = x;
    out.u.col(filled + 1) = y;
    out.lambda.push_back(sigma);
    filled += 2;

    if (r == 2) {
      basis = Matrix(m, 0);
      break;
    }
    Matrix residual = basis;
    residual -= x * (x.adjoint() * basis);
    residual -= y * (y.adjoint() * basis);
    Eigen::ColPivHouseholderQR<Matrix> qr(residual);
    basis = qr.householderQ() * Matrix::Identity(m, r - 2);
  }

  // Zero block: whatever is left completes the unitary.
  for (int j = 0; j < basis.cols(); ++j) out.u.col(filled++) = basis.col(j);

  out.lambda.resize(static_cast<std::size_t>(m / 2), 0.0);
  std::sort(out.lambda.begin(), out.lambda.end(), std::greater<double>());
  return out;
}

}  // namespace kscal

#pragma once

#include <stdexcept>
#include <utility>

#include "kscal/types.hpp"

namespace kscal {

/// An orthonormal k-frame spanning a k-dimensional complex subspace of C^m.
/// Immutable after construction; all operations return new planes.
class TangentPlane {
 public:
  /// Takes an m x k matrix whose columns are already orthonormal
  /// (F*F = I within `tol`); throws std::invalid_argument otherwise.
  explicit TangentPlane(Matrix frame, double tol = 1e-8) : frame_(std::move(frame)) {
    if (frame_.rows() < 1 || frame_.cols() < 1 || frame_.cols() > frame_.rows())
      throw std::invalid_argument("TangentPlane: need 1 <= k <= m");
    const Matrix gram = frame_.adjoint() * frame_;
    const double err = (gram - Matrix::Identity(frame_.cols(), frame_.cols())).cwiseAbs().maxCoeff();
    if (!(err <= tol))
      throw std::invalid_argument("TangentPlane: frame is not orthonormal (residual " +
                                  std::to_string(err) + ")");
  }

  /// Orthonormalizes the span of an arbitrary m x k matrix via column-pivoted
  /// QR. Rank-deficient spans (pivot below `threshold`) are rejected.
  static TangentPlane orthonormalized(const Matrix& span, double threshold = 1e-8) {
    const int m = static_cast<int>(span.rows());
    const int k = static_cast<int>(span.cols());
    if (k < 1 || k > m) throw std::invalid_argument("TangentPlane: need 1 <= k <= m");
    Eigen::ColPivHouseholderQR<Matrix> qr(span);
    const Matrix r = qr.matrixR();
    for (int i = 0; i < k; ++i)
      if (std::abs(r(i, i)) <= threshold)
        throw std::invalid_argument("TangentPlane: degenerate span (pivot " +
                                    std::to_string(std::abs(r(i, i))) + ")");
    Matrix q = qr.householderQ() * Matrix::Identity(m, k);
    return TangentPlane(std::move(q));
  }

  /// Haar-uniform random k-plane: orthonormalized complex Gaussian frame,
  /// with the QR phase fix that makes the distribution exactly invariant.
  static TangentPlane haar(int m, int k, std::mt19937_64& rng) {
    Matrix g = complex_gaussian(m, k, rng);
    Eigen::HouseholderQR<Matrix> qr(g);
    Matrix q = qr.householderQ() * Matrix::Identity(m, k);
    const Matrix r = qr.matrixQR().topRows(k).template triangularView<Eigen::Upper>();
    for (int j = 0; j < k; ++j) {
      const cplx d = r(j, j);
      if (std::abs(d) > 0) q.col(j) *= d / std::abs(d);
    }
    return TangentPlane(std::move(q));
  }

  int ambient_dim() const { return static_cast<int>(frame_.rows()); }
  int rank() const { return static_cast<int>(frame_.cols()); }
  const Matrix& frame() const { return frame_; }

  /// Orthogonal projector F F* onto the subspace (frame-independent).
  Matrix projector() const { return frame_ * frame_.adjoint(); }

  /// Orthonormal basis of the orthogonal complement, as an m x (m-k) matrix.
  Matrix completion() const {
    const int m = ambient_dim();
    const int k = rank();
    if (k == m) return Matrix(m, 0);
    Eigen::HouseholderQR<Matrix> qr(frame_);
    Matrix full = qr.householderQ() * Matrix::Identity(m, m);
    return full.rightCols(m - k);
  }

  /// Same subspace, frame right-multiplied by a k x k unitary.
  TangentPlane rotated(const Matrix& u, double tol = 1e-8) const {
    if (u.rows() != rank() || u.cols() != rank())
      throw std::invalid_argument("TangentPlane::rotated: size mismatch");
    const double err =
        (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
    if (!(err <= tol)) throw std::invalid_argument("TangentPlane::rotated: not unitary");
    return TangentPlane(frame_ * u);
  }

  /// Distance between subspaces as projector deviation (frame-independent).
  double subspace_distance(const TangentPlane& other) const {
    return (projector() - other.projector()).cwiseAbs().maxCoeff();
  }

 private:
  Matrix frame_;
};

}  // namespace kscal

#pragma once

#include <array>
#include <cmath>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kscal/tangent_plane.hpp"
#include "kscal/types.hpp"

namespace kscal {

namespace detail {

/// Dense rank-4 complex array with independent extents. Used for staged
/// frame contractions; not itself a curvature tensor.
struct Array4 {
  std::array<int, 4> dims{};
  std::vector<cplx> data;

  Array4() = default;
  Array4(int d0, int d1, int d2, int d3)
      : dims{d0, d1, d2, d3},
        data(static_cast<std::size_t>(d0) * d1 * d2 * d3, cplx(0.0, 0.0)) {}

  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * dims[1] + j) * dims[2] + k) * dims[3] + l;
  }
  cplx& operator()(int i, int j, int k, int l) { return data[index(i, j, k, l)]; }
  const cplx& operator()(int i, int j, int k, int l) const { return data[index(i, j, k, l)]; }
};

// Contracts one slot of a rank-4 array with the columns of M (or conj(M) for
// the barred slots 1 and 3). The slot being contracted must have extent
// M.rows(); the result has extent M.cols() there.
inline Array4 contract_slot(const Array4& t, const Matrix& m, int slot) {
  const bool conjugate = (slot == 1 || slot == 3);
  std::array<int, 4> nd = t.dims;
  nd[slot] = static_cast<int>(m.cols());
  Array4 out(nd[0], nd[1], nd[2], nd[3]);
  std::array<int, 4> ix{};
  for (ix[0] = 0; ix[0] < nd[0]; ++ix[0])
    for (ix[1] = 0; ix[1] < nd[1]; ++ix[1])
      for (ix[2] = 0; ix[2] < nd[2]; ++ix[2])
        for (ix[3] = 0; ix[3] < nd[3]; ++ix[3]) {
          cplx acc(0.0, 0.0);
          std::array<int, 4> src = ix;
          for (int s = 0; s < t.dims[slot]; ++s) {
            src[slot] = s;
            const cplx w = conjugate ? std::conj(m(s, ix[slot])) : m(s, ix[slot]);
            acc += t(src[0], src[1], src[2], src[3]) * w;
          }
          out(ix[0], ix[1], ix[2], ix[3]) = acc;
        }
  return out;
}

}  // namespace detail

struct SymmetryViolation {
  std::string kind;  // "pair_13" | "pair_24" | "hermitian" | "non_finite"
  std::array<int, 4> index{};
  double residual = 0.0;
};

/// Kaehler curvature tensor at a point, stored as the full m^4 complex array
/// R(e_i, conj(e_j), e_k, conj(e_l)) in a fixed unitary frame.
///
/// Invariants (enforced by symmetrization on construction):
///   R[i][j][k][l] = R[k][j][i][l] = R[i][l][k][j]
///   conj(R[i][j][k][l]) = R[j][i][l][k]
class CurvatureTensor {
 public:
  explicit CurvatureTensor(int m)
      : m_(m), data_(static_cast<std::size_t>(m) * m * m * m, cplx(0.0, 0.0)) {
    if (m < 1) throw std::invalid_argument("CurvatureTensor: dimension must be positive");
  }

  /// Builds from raw components, projecting onto the symmetry class by
  /// averaging over the 8-element symmetry group. One value is computed per
  /// orbit and written to every member, so the result is bitwise symmetric
  /// and the projection is bitwise idempotent. The max distance between raw
  /// and symmetrized entries is kept as symmetrization_residual().
  static CurvatureTensor from_components(int m, std::vector<cplx> raw) {
    const std::size_t n = static_cast<std::size_t>(m) * m * m * m;
    if (raw.size() != n)
      throw std::invalid_argument("CurvatureTensor::from_components: size mismatch");
    CurvatureTensor t(m);
    std::vector<bool> visited(n, false);
    double residual = 0.0;
    std::array<std::pair<std::size_t, bool>, 8> orbit;  // (position, conjugated)
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        for (int k = 0; k < m; ++k)
          for (int l = 0; l < m; ++l) {
            const std::size_t base = t.index(i, j, k, l);
            if (visited[base]) continue;
            orbit = {{{t.index(i, j, k, l), false},
                      {t.index(k, j, i, l), false},
                      {t.index(i, l, k, j), false},
                      {t.index(k, l, i, j), false},
                      {t.index(j, i, l, k), true},
                      {t.index(j, k, l, i), true},
                      {t.index(l, i, j, k), true},
                      {t.index(l, k, j, i), true}}};
            cplx sum(0, 0);
            bool all_equal = true;
            const cplx first = raw[orbit[0].first];
            for (const auto& [pos, conj] : orbit) {
              const cplx contrib = conj ? std::conj(raw[pos]) : raw[pos];
              sum += contrib;
              all_equal = all_equal && (contrib == first);
            }
            // Sequential accumulation of equal doubles rounds (3v, 5v, ...);
            // keep already-symmetric input bitwise intact.
            cplx value = all_equal ? first : sum / 8.0;
            // A position reachable both plainly and conjugated forces realness.
            bool self_conjugate = false;
            for (int a = 0; a < 8 && !self_conjugate; ++a)
              for (int b = 4; b < 8; ++b)
                if (a < 4 && orbit[a].first == orbit[b].first) {
                  self_conjugate = true;
                  break;
                }
            if (self_conjugate) value = cplx(value.real(), 0.0);
            for (const auto& [pos, conj] : orbit) {
              const cplx v = conj ? std::conj(value) : value;
              residual = std::max(residual, std::abs(v - raw[pos]));
              t.data_[pos] = v;
              visited[pos] = true;
            }
          }
    t.symmetrization_residual_ = residual;
    return t;
  }

  int dim() const { return m_; }
  double symmetrization_residual() const { return symmetrization_residual_; }

  cplx operator()(int i, int j, int k, int l) const { return data_[index(i, j, k, l)]; }
  void set(int i, int j, int k, int l, cplx v) { data_[index(i, j, k, l)] = v; }

  const std::vector<cplx>& components() const { return data_; }
  double max_abs() const {
    double v = 0.0;
    for (const cplx& z : data_) v = std::max(v, std::abs(z));
    return v;
  }

 private:
  std::size_t index(int i, int j, int k, int l) const {
    return ((static_cast<std::size_t>(i) * m_ + j) * m_ + k) * m_ + l;
  }

  int m_;
  std::vector<cplx> data_;
  double symmetrization_residual_ = 0.0;
};

/// Diagnostic symmetry check; empty list iff both invariant families hold
/// within `tol`. Non-finite entries are reported as well.
inline std::vector<SymmetryViolation> validate(const CurvatureTensor& r, double tol = 1e-10) {
  std::vector<SymmetryViolation> out;
  const int m = r.dim();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const cplx v = r(i, j, k, l);
          if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) {
            out.push_back({"non_finite", {i, j, k, l}, std::abs(v)});
            continue;
          }
          const double p13 = std::abs(v - r(k, j, i, l));
          if (p13 > tol) out.push_back({"pair_13", {i, j, k, l}, p13});
          const double p24 = std::abs(v - r(i, l, k, j));
          if (p24 > tol) out.push_back({"pair_24", {i, j, k, l}, p24});
          const double h = std::abs(std::conj(v) - r(j, i, l, k));
          if (h > tol) out.push_back({"hermitian", {i, j, k, l}, h});
        }
  return out;
}

/// R(u, conj(v), w, conj(x)), all slots extended C-linearly.
inline cplx eval(const CurvatureTensor& r, const Vector& u, const Vector& v, const Vector& w,
                 const Vector& x) {
  const int m = r.dim();
  if (u.size() != m || v.size() != m || w.size() != m || x.size() != m)
    throw std::invalid_argument("eval: vector size mismatch");
  // Stage the contraction to keep it O(m^4) total.
  std::vector<cplx> t1(static_cast<std::size_t>(m) * m * m, cplx(0, 0));
  for (int j = 0; j < m; ++j)
    for (int k = 0; k < m; ++k)
      for (int l = 0; l < m; ++l) {
        cplx acc(0, 0);
        for (int i = 0; i < m; ++i) acc += u(i) * r(i, j, k, l);
        t1[(static_cast<std::size_t>(j) * m + k) * m + l] = acc;
      }
  cplx total(0, 0);
  for (int j = 0; j < m; ++j) {
    const cplx vj = std::conj(v(j));
    for (int k = 0; k < m; ++k) {
      const cplx wk = w(k);
      cplx acc(0, 0);
      for (int l = 0; l < m; ++l)
        acc += t1[(static_cast<std::size_t>(j) * m + k) * m + l] * std::conj(x(l));
      total += vj * wk * acc;
    }
  }
  return total;
}

/// Holomorphic sectional curvature H(X) = R(X, conj(X), X, conj(X)) / |X|^4.
inline double holomorphic_sectional(const CurvatureTensor& r, const Vector& x) {
  const double n2 = x.squaredNorm();
  if (!(n2 > 0.0)) throw std::domain_error("holomorphic_sectional: zero vector");
  return eval(r, x, x, x, x).real() / (n2 * n2);
}

namespace detail {

// out[a][b][c][d] = sum R[i][j][k][l] M1(i,a) conj(M2(j,b)) M3(k,c) conj(M4(l,d))
inline Array4 transform4(const CurvatureTensor& r, const Matrix& m1, const Matrix& m2,
                         const Matrix& m3, const Matrix& m4) {
  const int m = r.dim();
  if (m1.rows() != m || m2.rows() != m || m3.rows() != m || m4.rows() != m)
    throw std::invalid_argument("transform4: matrix row count must equal tensor dim");
  Array4 t(m, m, m, m);
  t.data = r.components();
  t = contract_slot(t, m1, 0);
  t = contract_slot(t, m2, 1);
  t = contract_slot(t, m3, 2);
  t = contract_slot(t, m4, 3);
  return t;
}

}  // namespace detail

/// Components of R in the (not necessarily full) frame given by the columns
/// of M: out(a,b,c,d) = R(M e_a, conj(M e_b), M e_c, conj(M e_d)).
inline CurvatureTensor transform_frame(const CurvatureTensor& r, const Matrix& m) {
  detail::Array4 t = detail::transform4(r, m, m, m, m);
  return CurvatureTensor::from_components(static_cast<int>(m.cols()), std::move(t.data));
}

/// Re-expresses R in the unitary frame whose vectors are the columns of U.
inline CurvatureTensor conjugate_frame(const CurvatureTensor& r, const Matrix& u,
                                       double tol = 1e-8) {
  if (u.rows() != r.dim() || u.cols() != r.dim())
    throw std::invalid_argument("conjugate_frame: U must be m x m");
  const double err =
      (u.adjoint() * u - Matrix::Identity(u.rows(), u.cols())).cwiseAbs().maxCoeff();
  if (!(err <= tol)) throw std::domain_error("conjugate_frame: U is not unitary");
  return transform_frame(r, u);
}

/// Restriction of R to a k-plane: the k^4 components in the plane's frame.
inline CurvatureTensor restrict_to(const CurvatureTensor& r, const TangentPlane& plane) {
  if (plane.ambient_dim() != r.dim())
    throw std::invalid_argument("restrict_to: ambient dimension mismatch");
  return transform_frame(r, plane.frame());
}

/// Restricted Ricci form r_ab = sum_{j<=k} R(E_a, conj(E_b), E_j, conj(E_j)),
/// a k x k Hermitian matrix over the plane's frame.
inline Matrix restricted_ricci(const CurvatureTensor& r, const TangentPlane& plane) {
  const CurvatureTensor rk = restrict_to(r, plane);
  const int k = rk.dim();
  Matrix out = Matrix::Zero(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b) {
      cplx acc(0, 0);
      for (int j = 0; j < k; ++j) acc += rk(a, b, j, j);
      out(a, b) = acc;
    }
  return out;
}

/// New frame for the same subspace in which the restricted Ricci form is
/// diagonal with real nonincreasing diagonal.
inline TangentPlane diagonalize_restricted_ricci(const CurvatureTensor& r,
                                                 const TangentPlane& plane) {
  const Matrix ric = restricted_ricci(r, plane);
  Eigen::SelfAdjointEigenSolver<Matrix> es(ric);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("diagonalize_restricted_ricci: eigensolver failed");
  const int k = plane.rank();
  // The form pairs an unconjugated first slot with a conjugated second, so
  // the frame rotation diagonalizing it is the conjugate of the eigenbasis.
  Matrix v(k, k);
  for (int j = 0; j < k; ++j)
    v.col(j) = es.eigenvectors().col(k - 1 - j).conjugate();  // nonincreasing
  return TangentPlane(plane.frame() * v);
}

}  // namespace kscal

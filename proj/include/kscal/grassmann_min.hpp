#pragma once

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>
#include <optional>
#include <stdexcept>
#include <vector>

#include "kscal/curvature_tensor.hpp"
#include "kscal/kscalar.hpp"
#include "kscal/skew_generator.hpp"
#include "kscal/sphere_moments.hpp"
#include "kscal/tangent_plane.hpp"

namespace kscal {

/// Moves the plane along the unitary flow generated by a: Sigma -> exp(ta) Sigma.
inline TangentPlane retract(const TangentPlane& plane, const SkewGenerator& a, double t) {
  if (a.dim() != plane.ambient_dim()) throw std::invalid_argument("retract: dimension mismatch");
  return TangentPlane(unitary_exp(a, t) * plane.frame());
}

/// d/dt S_k(exp(ta) Sigma) at t = 0, evaluated exactly by moment contraction.
/// The integrand is the quartic sphere average of
///   R(aX, conj(X), X, conj(X)) + R(X, conj(aX), X, conj(X)),
/// and the derivative of the trace form is k(k+1) times that average.
inline double first_variation(const CurvatureTensor& r, const TangentPlane& plane,
                              const SkewGenerator& a) {
  const int m = r.dim();
  if (a.dim() != m || plane.ambient_dim() != m)
    throw std::invalid_argument("first_variation: dimension mismatch");
  const int k = plane.rank();
  const Matrix id = Matrix::Identity(m, m);
  const cplx q = sphere_average_quartic(r, plane, a.matrix(), id, id, id) +
                 sphere_average_quartic(r, plane, id, a.matrix(), id, id);
  return static_cast<double>(k * (k + 1)) * q.real();
}

/// d^2/dt^2 S_k(exp(ta) Sigma) at t = 0 by exact moment contraction of the
/// five quartic averages
///   R(a^2 X, X., X, X.) + R(X, conj(a^2 X), X, X.) + 4 R(aX, conj(aX), X, X.)
///   + R(aX, X., aX, X.) + R(X, conj(aX), X, conj(aX)),
/// scaled by k(k+1). Nonnegative at any minimizing plane.
inline double second_variation(const CurvatureTensor& r, const TangentPlane& plane,
                               const SkewGenerator& a) {
  const int m = r.dim();
  if (a.dim() != m || plane.ambient_dim() != m)
    throw std::invalid_argument("second_variation: dimension mismatch");
  const int k = plane.rank();
  const Matrix id = Matrix::Identity(m, m);
  const Matrix& am = a.matrix();
  const Matrix a2 = am * am;
  const cplx q = sphere_average_quartic(r, plane, a2, id, id, id) +
                 sphere_average_quartic(r, plane, id, a2, id, id) +
                 4.0 * sphere_average_quartic(r, plane, am, am, id, id) +
                 sphere_average_quartic(r, plane, am, id, am, id) +
                 sphere_average_quartic(r, plane, id, am, id, am);
  return static_cast<double>(k * (k + 1)) * q.real();
}

namespace detail {

// Mixed-trace coupling T(p, i) = sum_{j<=k} R(B_p, conj(E_i), E_j, conj(E_j)),
// where B_p runs over the given orthonormal completion. This is exactly the
// first-variation pairing against horizontal generators; it vanishes at
// critical planes.
inline Matrix criticality_matrix(const CurvatureTensor& r, const TangentPlane& plane,
                                 const Matrix& completion) {
  const int m = r.dim();
  const Matrix p = plane.projector();
  Matrix v(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b) {
      cplx acc(0, 0);
      for (int c = 0; c < m; ++c)
        for (int d = 0; d < m; ++d) acc += r(a, b, c, d) * p(c, d);
      v(a, b) = acc;
    }
  return completion.transpose() * (v * plane.frame().conjugate());
}

}  // namespace detail

/// Max over (p, i) of |sum_j R(B_p, conj(E_i), E_j, conj(E_j))|: the
/// first-order criticality identity, zero at every minimizing plane.
inline double criticality_residual(const CurvatureTensor& r, const TangentPlane& plane) {
  const Matrix completion = plane.completion();
  if (completion.cols() == 0) return 0.0;
  return detail::criticality_matrix(r, plane, completion).cwiseAbs().maxCoeff();
}

/// The steepest-descent generator: the unique horizontal skew generator
/// representing the first-variation functional, signed so that moving along
/// exp(tG) decreases S_k to first order; first_variation(R, Sigma, G) equals
/// -|G|^2 (Frobenius).
inline SkewGenerator riemannian_gradient(const CurvatureTensor& r, const TangentPlane& plane) {
  const Matrix completion = plane.completion();
  if (completion.cols() == 0) return SkewGenerator::zero(plane.ambient_dim());
  const Matrix t = detail::criticality_matrix(r, plane, completion);
  return SkewGenerator::horizontal(plane, -2.0 * t.conjugate());
}

struct MinimizeOptions {
  int restarts = 8;
  std::uint64_t seed = 0;
  double tol = 1e-8;  // convergence tolerance on the gradient norm
  int max_iterations = 10000;
  double armijo_c = 1e-4;
  double initial_step = 1.0;
  int max_halvings = 60;
  std::vector<Matrix> warm_starts;  // extra start frames, tried before the Haar draws
  int second_variation_probes = 16;
};

struct CriticalPlane {
  TangentPlane plane;
  double value = 0.0;
  double gradient_norm = 0.0;
  double criticality_residual = 0.0;
  std::vector<double> second_variation_samples;
  bool converged = false;
  int iterations = 0;
  int restart_index = 0;
};

namespace detail {

struct DescentOutcome {
  Matrix frame;
  double value = std::numeric_limits<double>::infinity();
  double gradient_norm = std::numeric_limits<double>::infinity();
  bool converged = false;
  int iterations = 0;
  // Lowest objective value seen at any evaluated candidate, including
  // rejected line-search probes.
  double best_seen_value = std::numeric_limits<double>::infinity();
  Matrix best_seen_frame;
};

inline Matrix polish_frame(const Matrix& f) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(f.adjoint() * f);
  Vector inv_sqrt(f.cols());
  for (int i = 0; i < f.cols(); ++i) inv_sqrt(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
  return f * (es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint());
}

inline DescentOutcome descend(const CurvatureTensor& r, TangentPlane plane,
                              const MinimizeOptions& opts) {
  DescentOutcome out;
  double f = s_k_trace(r, plane);
  out.best_seen_value = f;
  out.best_seen_frame = plane.frame();
  const Matrix id = Matrix::Identity(r.dim(), r.dim());

  int iter = 0;
  for (; iter < opts.max_iterations; ++iter) {
    Matrix completion = plane.completion();
    if (completion.cols() == 0) {
      out.gradient_norm = 0.0;
      out.converged = true;
      break;
    }
    const Matrix t = criticality_matrix(r, plane, completion);
    const SkewGenerator g = SkewGenerator::horizontal(plane, -2.0 * t.conjugate());
    const double gnorm = g.norm();
    out.gradient_norm = gnorm;
    if (gnorm <= opts.tol) {
      out.converged = true;
      break;
    }

    const double slope = first_variation(r, plane, g);  // == -gnorm^2 up to roundoff
    // Along the ray the quadratic model gives the step -slope/f''; use it as
    // the starting step when the ray is convex, otherwise the default.
    double step = opts.initial_step;
    const double svv = second_variation(r, plane, g);
    if (svv > 0.0) {
      const double newton = -slope / svv;
      if (newton > 0.0 && std::isfinite(newton)) step = std::min(newton, opts.initial_step);
    }

    bool accepted = false;
    for (int h = 0; h <= opts.max_halvings; ++h) {
      const TangentPlane candidate = retract(plane, g, step);
      const double f_new = s_k_trace(r, candidate);
      if (f_new < out.best_seen_value) {
        out.best_seen_value = f_new;
        out.best_seen_frame = candidate.frame();
      }
      if (f_new <= f + opts.armijo_c * step * slope) {
        plane = candidate;
        f = f_new;
        accepted = true;
        break;
      }
      // Below the resolution of the objective the sufficient-decrease test is
      // pure noise; fall back to gradient-norm decrease.
      if (std::abs(step * slope) <= 64.0 * std::numeric_limits<double>::epsilon() *
                                        (1.0 + std::abs(f))) {
        const Matrix cand_completion = candidate.completion();
        const double g_new =
            cand_completion.cols() == 0
                ? 0.0
                : SkewGenerator::horizontal(
                      candidate,
                      -2.0 * criticality_matrix(r, candidate, cand_completion).conjugate())
                      .norm();
        if (g_new < gnorm && f_new <= f + 1e-13 * (1.0 + std::abs(f))) {
          plane = candidate;
          f = f_new;
          accepted = true;
          break;
        }
      }
      step *= 0.5;
    }
    if (!accepted) {
      out.converged = (gnorm <= opts.tol);
      break;
    }
    if ((iter & 0xff) == 0xff) plane = TangentPlane(polish_frame(plane.frame()));
  }

  // Re-evaluate the gradient at the final iterate (the loop may have exited
  // right after a successful step).
  {
    const Matrix completion = plane.completion();
    out.gradient_norm =
        completion.cols() == 0
            ? 0.0
            : SkewGenerator::horizontal(plane,
                                        -2.0 * criticality_matrix(r, plane, completion)
                                                   .conjugate())
                  .norm();
    out.converged = out.gradient_norm <= opts.tol;
  }
  out.frame = plane.frame();
  out.value = f;
  out.iterations = iter;
  if (f < out.best_seen_value) {
    out.best_seen_value = f;
    out.best_seen_frame = plane.frame();
  }
  return out;
}

// Canonical representative of a critical frame for deterministic tie-breaks:
// the Ricci-diagonalizing rotation with each column's dominant entry made
// real positive.
inline Matrix canonical_frame(const CurvatureTensor& r, const TangentPlane& plane) {
  Matrix f = diagonalize_restricted_ricci(r, plane).frame();
  for (int j = 0; j < f.cols(); ++j) {
    int arg = 0;
    double best = -1.0;
    for (int i = 0; i < f.rows(); ++i)
      if (std::abs(f(i, j)) > best + 1e-12) {
        best = std::abs(f(i, j));
        arg = i;
      }
    const cplx pivot = f(arg, j);
    if (std::abs(pivot) > 0) f.col(j) *= std::conj(pivot) / std::abs(pivot);
  }
  return f;
}

inline bool frame_lex_less(const Matrix& a, const Matrix& b) {
  for (int j = 0; j < a.cols(); ++j)
    for (int i = 0; i < a.rows(); ++i) {
      const cplx x = a(i, j), y = b(i, j);
      if (x.real() != y.real()) return x.real() < y.real();
      if (x.imag() != y.imag()) return x.imag() < y.imag();
    }
  return false;
}

}  // namespace detail

/// Multistart Riemannian gradient descent for inf S_k over the Grassmannian.
/// Haar-random restarts (plus any warm starts) run independently and the best
/// outcome is selected deterministically: lowest value, then smallest
/// gradient norm, then lexicographically smallest canonical frame.
/// Non-convergence is flagged on the result, never thrown.
inline CriticalPlane minimize_sk(const CurvatureTensor& r, int k, const MinimizeOptions& opts) {
  const int m = r.dim();
  if (k < 1 || k > m) throw std::invalid_argument("minimize_sk: need 1 <= k <= m");

  std::vector<Matrix> starts = opts.warm_starts;
  for (int i = 0; i < opts.restarts; ++i) {
    std::mt19937_64 rng = substream_rng(opts.seed, 0x5eedu + static_cast<std::uint64_t>(i));
    starts.push_back(TangentPlane::haar(m, k, rng).frame());
  }
  if (starts.empty()) throw std::invalid_argument("minimize_sk: no starts");

  std::vector<detail::DescentOutcome> outcomes(starts.size());
  {
    std::vector<std::future<detail::DescentOutcome>> futures;
    futures.reserve(starts.size());
    for (const Matrix& f : starts)
      futures.push_back(std::async(std::launch::async, [&r, f, &opts] {
        return detail::descend(r, TangentPlane(f), opts);
      }));
    for (std::size_t i = 0; i < futures.size(); ++i) outcomes[i] = futures[i].get();
  }

  // If some rejected probe saw a strictly lower value than every converged
  // iterate, descend from it so the returned value is <= everything seen.
  for (int round = 0; round < 3; ++round) {
    double best_final = std::numeric_limits<double>::infinity();
    double best_seen = std::numeric_limits<double>::infinity();
    Matrix best_seen_frame;
    for (const auto& o : outcomes) {
      best_final = std::min(best_final, o.value);
      if (o.best_seen_value < best_seen) {
        best_seen = o.best_seen_value;
        best_seen_frame = o.best_seen_frame;
      }
    }
    if (best_seen >= best_final - 1e-12 * (1.0 + std::abs(best_final))) break;
    outcomes.push_back(detail::descend(r, TangentPlane(best_seen_frame), opts));
  }

  std::size_t best = 0;
  for (std::size_t i = 1; i < outcomes.size(); ++i) {
    const auto& a = outcomes[i];
    const auto& b = outcomes[best];
    const double tie = 1e-10 * (1.0 + std::min(std::abs(a.value), std::abs(b.value)));
    bool take = false;
    if (a.value < b.value - tie) {
      take = true;
    } else if (std::abs(a.value - b.value) <= tie) {
      if (a.gradient_norm < b.gradient_norm) {
        take = true;
      } else if (a.gradient_norm == b.gradient_norm) {
        take = detail::frame_lex_less(detail::canonical_frame(r, TangentPlane(a.frame)),
                                      detail::canonical_frame(r, TangentPlane(b.frame)));
      }
    }
    if (take) best = i;
  }

  const detail::DescentOutcome& sel = outcomes[best];
  TangentPlane plane(sel.frame);
  CriticalPlane result{plane,
                       sel.value,
                       sel.gradient_norm,
                       criticality_residual(r, plane),
                       {},
                       sel.converged,
                       sel.iterations,
                       static_cast<int>(best)};
  std::mt19937_64 rng = substream_rng(opts.seed, 0x9047u);
  result.second_variation_samples.reserve(opts.second_variation_probes);
  for (int i = 0; i < opts.second_variation_probes; ++i)
    result.second_variation_samples.push_back(
        second_variation(r, plane, SkewGenerator::random(m, rng)));
  return result;
}

}  // namespace kscal

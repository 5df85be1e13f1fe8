#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "kscal/curvature_tensor.hpp"
#include "kscal/grassmann_min.hpp"
#include "kscal/sphere_moments.hpp"
#include "kscal/tangent_plane.hpp"

namespace kscal {

enum class Sign { Positive, Negative };

struct CheckRecord {
  std::string name;    // stable identifier of the check
  std::string anchor;  // human-readable statement of the certified quantity
  double value = 0.0;  // worst-case computed left side
  double bound = 0.0;  // the bound it is compared against
  double slack = 0.0;  // signed margin; pass iff slack >= -tol
  double tol = 0.0;
  bool pass = false;
  int probes = 0;
  std::string detail;
};

struct CertificationReport {
  std::string model_id;
  int k = 0;
  int p = 0;  // 0 when the check family is not tuple-indexed
  double s_k_value = 0.0;
  std::vector<CheckRecord> checks;

  bool all_pass() const {
    for (const auto& c : checks)
      if (!c.pass) return false;
    return true;
  }
};

struct CertTolerances {
  double identity = 1e-8;     // residual budget for exact identities
  double slack = 1e-8;        // allowed violation of inequality slacks
  double strictness = 1e-10;  // strict-sign threshold, scaled by the S_k margin
  double criticality = 1e-6;  // how critical a plane must be to be certified
};

inline CurvatureTensor scaled_tensor(const CurvatureTensor& r, double s) {
  std::vector<cplx> comps = r.components();
  for (auto& z : comps) z *= s;
  return CurvatureTensor::from_components(r.dim(), std::move(comps));
}

namespace detail {

// Hermitian form Phi(i, l) = avg over unit v in the plane of
// R(v, conj(v), e_i, conj(e_l)) = (1/k) sum_a R(E_a, conj(E_a), e_i, conj(e_l)).
// By the pair symmetries this also evaluates avg R(u, conj(w), Z, conj(Z)).
inline Matrix sphere_average_form(const CurvatureTensor& r, const TangentPlane& plane) {
  const int m = r.dim();
  const Matrix p = plane.projector();
  Matrix phi(m, m);
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) {
      cplx acc(0, 0);
      for (int a = 0; a < m; ++a)
        for (int b = 0; b < m; ++b) acc += p(a, b) * r(a, b, i, l);
      phi(i, l) = acc / static_cast<double>(plane.rank());
    }
  return 0.5 * (phi + phi.adjoint()).eval();
}

inline cplx form_pairing(const Matrix& phi, const Vector& u, const Vector& w) {
  cplx acc(0, 0);
  const int m = static_cast<int>(phi.rows());
  for (int i = 0; i < m; ++i)
    for (int l = 0; l < m; ++l) acc += u(i) * std::conj(w(l)) * phi(i, l);
  return acc;
}

inline double form_value(const Matrix& phi, const Vector& u) {
  return form_pairing(phi, u, u).real();
}

// Probe pairs (E in the plane, E' orthogonal to it): structured frame x
// completion combinations first, Haar-random afterwards, `count` total.
struct ProbePair {
  Vector e;       // unit vector in the plane
  Vector e_perp;  // unit vector orthogonal to the plane
};

inline std::vector<ProbePair> make_probe_pairs(const TangentPlane& plane, int count,
                                               std::uint64_t seed) {
  const Matrix& f = plane.frame();
  const Matrix b = plane.completion();
  const int k = plane.rank();
  const int q = static_cast<int>(b.cols());
  std::vector<ProbePair> out;
  if (q == 0) return out;  // full-space plane: the probe family is empty
  out.reserve(static_cast<std::size_t>(count));
  for (int i = 0; i < k && static_cast<int>(out.size()) < count; ++i)
    for (int p = 0; p < q && static_cast<int>(out.size()) < count; ++p)
      out.push_back({f.col(i), b.col(p)});
  std::mt19937_64 rng = substream_rng(seed, 0xabcdu);
  while (static_cast<int>(out.size()) < count) {
    const Vector e = f * random_unit_vector(k, rng);
    const Vector ep = b * random_unit_vector(q, rng);
    out.push_back({e, ep});
  }
  return out;
}

inline void require_certifiable(const CurvatureTensor& r, const CriticalPlane& critical,
                                const CertTolerances& tol) {
  const double res = criticality_residual(r, critical.plane);
  if (!(res <= tol.criticality))
    throw std::invalid_argument(
        "certification: plane is not critical (mixed-trace residual " + std::to_string(res) +
        "); refusing to certify a non-minimizing plane");
}

}  // namespace detail

/// Lower-bound and vanishing checks at a converged minimizing 2-plane:
/// for sampled unit probes E in the plane and E' orthogonal to it,
///   avg R(E, ~E', Z, ~Z) = 0,
///   avg [R(E, ~E, Z, ~Z) + R(E', ~E', Z, ~Z)] >= S_2 / 6,
///   avg R(E', ~E', Z, ~Z) >= S_2 / 6.
/// Refuses planes whose criticality residual exceeds the tolerance; the
/// bounds only hold at minimizers.
inline CertificationReport certify_min_plane_pairs(const CurvatureTensor& r,
                                                   const CriticalPlane& critical, int probes,
                                                   std::uint64_t seed,
                                                   const CertTolerances& tol = {}) {
  if (critical.plane.rank() != 2)
    throw std::invalid_argument("certify_min_plane_pairs: requires a 2-plane");
  detail::require_certifiable(r, critical, tol);

  CertificationReport report;
  report.k = 2;
  const TangentPlane& plane = critical.plane;
  const double sk = s_k_trace(r, plane);
  report.s_k_value = sk;
  const double bound = sk / 6.0;
  const Matrix phi = detail::sphere_average_form(r, plane);

  const auto pairs = detail::make_probe_pairs(plane, probes, seed);
  double worst_identity = 0.0;
  double worst_pair_slack = std::numeric_limits<double>::infinity();
  double worst_perp_slack = std::numeric_limits<double>::infinity();
  for (const auto& pr : pairs) {
    worst_identity =
        std::max(worst_identity, std::abs(detail::form_pairing(phi, pr.e, pr.e_perp)));
    const double in_plane = detail::form_value(phi, pr.e);
    const double perp = detail::form_value(phi, pr.e_perp);
    worst_pair_slack = std::min(worst_pair_slack, in_plane + perp - bound);
    worst_perp_slack = std::min(worst_perp_slack, perp - bound);
  }
  if (pairs.empty()) {  // k = m: no complement directions, bounds are vacuous
    worst_pair_slack = 0.0;
    worst_perp_slack = 0.0;
  }

  const int n = static_cast<int>(pairs.size());
  report.checks.push_back({"mixed_average_zero", "avg R(E,~E',Z,~Z) = 0 at min plane",
                           worst_identity, 0.0, tol.identity - worst_identity, tol.identity,
                           worst_identity <= tol.identity, n, ""});
  report.checks.push_back(
      {"pair_average_lower_bound", "avg R(E,~E,Z,~Z)+R(E',~E',Z,~Z) >= S_k/(k(k+1))",
       worst_pair_slack + bound, bound, worst_pair_slack, tol.slack,
       worst_pair_slack >= -tol.slack, n, ""});
  report.checks.push_back({"complement_average_lower_bound",
                           "avg R(E',~E',Z,~Z) >= S_k/(k(k+1))", worst_perp_slack + bound,
                           bound, worst_perp_slack, tol.slack, worst_perp_slack >= -tol.slack,
                           n, ""});
  report.checks.push_back({"criticality_mixed_trace",
                           "sum_j R(E_p,~E_i,E_j,~E_j) = 0 at min plane",
                           critical.criticality_residual, 0.0,
                           tol.criticality - critical.criticality_residual, tol.criticality,
                           critical.criticality_residual <= tol.criticality, 1, ""});
  return report;
}

/// General-k version at a converged minimizing k-plane whose frame is first
/// rotated to diagonalize the restricted Ricci form. For every non-empty
/// subset I of the frame indices and probes E' orthogonal to the plane,
///   avg R(E, ~E', Z, ~Z) = 0,
///   avg [sum_{j in I} R(E_j, ~E_j, Z, ~Z) + R(E', ~E', Z, ~Z)] >= S_k/(k(k+1)),
///   avg R(E', ~E', Z, ~Z) >= S_k/(k(k+1)).
/// Optionally emits, as a diagnostic, the mixed-probe inequality behind the
/// subset bounds at W = (E_1 + ... + E_l + E')/sqrt(l+1).
inline CertificationReport certify_min_plane_subsets(const CurvatureTensor& r,
                                                     const CriticalPlane& critical, int probes,
                                                     std::uint64_t seed,
                                                     const CertTolerances& tol = {},
                                                     bool diagnostics = true) {
  detail::require_certifiable(r, critical, tol);
  const int k = critical.plane.rank();
  const int m = r.dim();

  CertificationReport report;
  report.k = k;
  const TangentPlane plane = diagonalize_restricted_ricci(r, critical.plane);
  const double sk = s_k_trace(r, plane);
  report.s_k_value = sk;
  const double bound = sk / static_cast<double>(k * (k + 1));
  const Matrix phi = detail::sphere_average_form(r, plane);
  const Matrix& f = plane.frame();

  const auto pairs = detail::make_probe_pairs(plane, probes, seed);

  double worst_identity = 0.0;
  double worst_perp_slack = std::numeric_limits<double>::infinity();
  std::vector<double> perp_vals(pairs.size());
  for (std::size_t t = 0; t < pairs.size(); ++t) {
    const auto& pr = pairs[t];
    worst_identity =
        std::max(worst_identity, std::abs(detail::form_pairing(phi, pr.e, pr.e_perp)));
    perp_vals[t] = detail::form_value(phi, pr.e_perp);
    worst_perp_slack = std::min(worst_perp_slack, perp_vals[t] - bound);
  }
  if (pairs.empty()) worst_perp_slack = 0.0;  // k = m: vacuous

  std::vector<double> diag(k);
  for (int j = 0; j < k; ++j) diag[j] = detail::form_value(phi, f.col(j));

  // Every non-empty subset I (full enumeration; 2^k - 1 <= 255 at the
  // supported dimensions, sampled only if that ever grows past 512).
  const std::uint64_t n_subsets = (std::uint64_t(1) << k) - 1;
  std::vector<std::uint64_t> subsets;
  if (n_subsets <= 512) {
    for (std::uint64_t s = 1; s <= n_subsets; ++s) subsets.push_back(s);
  } else {
    std::mt19937_64 rng = substream_rng(seed, 0x5e7u);
    std::uniform_int_distribution<std::uint64_t> dist(1, n_subsets);
    for (int s = 0; s < 512; ++s) subsets.push_back(dist(rng));
  }

  double worst_subset_slack = std::numeric_limits<double>::infinity();
  std::uint64_t worst_subset = 0;
  for (std::size_t t = 0; t < pairs.size(); ++t)
    for (std::uint64_t s : subsets) {
      double lhs = perp_vals[t];
      for (int j = 0; j < k; ++j)
        if (s & (std::uint64_t(1) << j)) lhs += diag[j];
      const double slack = lhs - bound;
      if (slack < worst_subset_slack) {
        worst_subset_slack = slack;
        worst_subset = s;
      }
    }
  if (pairs.empty()) worst_subset_slack = 0.0;  // k = m: vacuous

  const int n = static_cast<int>(pairs.size());
  report.checks.push_back({"mixed_average_zero", "avg R(E,~E',Z,~Z) = 0 at min plane",
                           worst_identity, 0.0, tol.identity - worst_identity, tol.identity,
                           worst_identity <= tol.identity, n, ""});
  report.checks.push_back(
      {"subset_average_lower_bound",
       "avg sum_{j in I} R(E_j,~E_j,Z,~Z) + R(E',~E',Z,~Z) >= S_k/(k(k+1))",
       worst_subset_slack + bound, bound, worst_subset_slack, tol.slack,
       worst_subset_slack >= -tol.slack, static_cast<int>(pairs.size() * subsets.size()),
       "subsets=" + std::to_string(subsets.size()) +
           " worst_I_mask=" + std::to_string(worst_subset)});
  report.checks.push_back({"complement_average_lower_bound",
                           "avg R(E',~E',Z,~Z) >= S_k/(k(k+1))", worst_perp_slack + bound,
                           bound, worst_perp_slack, tol.slack, worst_perp_slack >= -tol.slack,
                           n, ""});
  report.checks.push_back({"criticality_mixed_trace",
                           "sum_j R(E_p,~E_i,E_j,~E_j) = 0 at min plane",
                           critical.criticality_residual, 0.0,
                           tol.criticality - critical.criticality_residual, tol.criticality,
                           critical.criticality_residual <= tol.criticality, 1, ""});

  if (diagnostics && m > k) {
    // Mixed-probe inequality behind the subset bounds,
    //   4 avg [ R(W,~W,X,~X) + |<X,~W>|^2 sum_j R(E_j,~E_j,X,~X) ]
    //     >= 4 S_k/(k(k+1)) + avg [ <X,~W> R(W,~X,X,~X) + conj ],
    // evaluated at the probe families W = (E_i + E')/sqrt(2) for every frame
    // index i and W = (E_1 + ... + E_l + E')/sqrt(l+1) for every prefix.
    const Matrix id = Matrix::Identity(m, m);
    const Matrix comp = plane.completion();
    double worst_mixed_slack = std::numeric_limits<double>::infinity();
    int mixed_count = 0;
    const auto probe_slack = [&](const Vector& w) {
      const Matrix pw = w * w.adjoint();
      double lhs = 4.0 * detail::form_value(phi, w);
      for (int j = 0; j < k; ++j) {
        const Matrix ew = f.col(j) * w.adjoint();
        lhs += 4.0 * sphere_average_quartic(r, plane, ew, ew, id, id).real();
      }
      const cplx cross = sphere_average_quartic(r, plane, pw, id, id, id);
      const double rhs = 4.0 * bound + 2.0 * cross.real();
      worst_mixed_slack = std::min(worst_mixed_slack, lhs - rhs);
      ++mixed_count;
    };
    for (int p2 = 0; p2 < comp.cols(); ++p2) {
      for (int i = 0; i < k; ++i)
        probe_slack((f.col(i) + comp.col(p2)) / std::sqrt(2.0));
      for (int l = 2; l <= k; ++l) {
        Vector w = comp.col(p2);
        for (int j = 0; j < l; ++j) w += f.col(j);
        probe_slack(w / std::sqrt(static_cast<double>(l + 1)));
      }
    }
    report.checks.push_back(
        {"mixed_probe_bound_diagnostic",
         "4 avg[R(W,~W,X,~X)+|<X,~W>|^2 sum_j R(E_j,~E_j,X,~X)] >= 4S_k/(k(k+1)) + cross",
         worst_mixed_slack, 0.0, worst_mixed_slack, tol.slack, worst_mixed_slack >= -tol.slack,
         mixed_count, "diagnostic"});
  }
  return report;
}

// ---------------------------------------------------------------------------
// Vanishing certificate: averaged p-tuple curvature sums and the telescoping
// lower bound through the principal-angle alignment with the minimizing plane.
// ---------------------------------------------------------------------------

struct TupleRow {
  std::vector<int> tuple;
  double direct = 0.0;         // sum of sphere-averaged diagonal terms
  double decomposition = 0.0;  // telescoping identity, exact group values
  double bound = 0.0;          // telescoping bound from the plane checks
};

struct VanishingResult {
  CertificationReport report;
  std::vector<TupleRow> rows;
};

/// Certifies, at a minimizing k-plane of S_k (of the requested sign), that
/// every averaged p-tuple curvature sum in the diagonalizing frame has the
/// certified sign and dominates its telescoping lower bound. For the negative
/// sign the caller must pass the critical plane computed on the negated
/// tensor (the maximizer of S_k); values are reported for the original sign.
inline VanishingResult vanishing_certificate(const CurvatureTensor& r,
                                             const CriticalPlane& critical, int p, Sign sign,
                                             const CertTolerances& tol = {}) {
  const int m = r.dim();
  const int k = critical.plane.rank();
  if (p < k || p > m) throw std::invalid_argument("vanishing_certificate: need k <= p <= m");

  const CurvatureTensor rw = (sign == Sign::Positive) ? r : scaled_tensor(r, -1.0);
  const double sk = s_k_trace(rw, critical.plane);
  if (!(sk > 0))
    throw std::invalid_argument(
        "vanishing_certificate: minimized value sign is inconsistent with the requested sign");
  detail::require_certifiable(rw, critical, tol);

  const TangentPlane plane = diagonalize_restricted_ricci(rw, critical.plane);
  const Matrix& f = plane.frame();
  const double margin = sk;
  const double strict_threshold = tol.strictness * margin;

  const Matrix phi = detail::sphere_average_form(rw, plane);
  Eigen::SelfAdjointEigenSolver<Matrix> es(phi);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("vanishing_certificate: eigensolver failed");

  VanishingResult result;
  result.report.k = k;
  result.report.p = p;
  result.report.s_k_value = (sign == Sign::Positive) ? sk : -sk;

  const double sk_over_k = sk / static_cast<double>(k);
  const double base_bound = sk / static_cast<double>(k * (k + 1));

  double min_direct = std::numeric_limits<double>::infinity();
  double min_domination = std::numeric_limits<double>::infinity();
  double max_identity_gap = 0.0;

  // Every increasing p-tuple of eigenframe indices.
  std::vector<int> tuple(p);
  for (int i = 0; i < p; ++i) tuple[i] = i;
  while (true) {
    Matrix v(m, p);
    double direct = 0.0;
    for (int j = 0; j < p; ++j) {
      // The form evaluates as u^T Phi conj(u), so the frame vectors that
      // diagonalize it are the conjugated eigenvectors.
      v.col(j) = es.eigenvectors().col(tuple[j]).conjugate();
      direct += es.eigenvalues()(tuple[j]);
    }

    // Principal-angle alignment between the plane and the tuple span.
    Eigen::JacobiSVD<Matrix> svd(f.adjoint() * v, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Matrix fa = f * svd.matrixU();  // aligned plane frame (mu descending)
    const Matrix wa = v * svd.matrixV();  // aligned tuple frame

    // Ascending arrays: index 0 carries the smallest overlap.
    std::vector<double> mu(k), beta(k), a_val(k), b_val(k);
    for (int j = 0; j < k; ++j) {
      const int s = k - 1 - j;  // svd index, descending
      const double mu_j = std::min(1.0, svd.singularValues()(s));
      mu[j] = mu_j;
      beta[j] = std::sqrt(std::max(0.0, 1.0 - mu_j * mu_j));
      a_val[j] = detail::form_value(phi, fa.col(s));
      if (beta[j] > 1e-9) {
        Vector n_j = (wa.col(s) - mu_j * fa.col(s)) / beta[j];
        n_j /= n_j.norm();
        b_val[j] = detail::form_value(phi, n_j);
      } else {
        b_val[j] = 0.0;  // its coefficients vanish with beta
      }
    }
    std::vector<double> tail(k + 1, 0.0);
    for (int j = k - 1; j >= 0; --j) tail[j] = tail[j + 1] + a_val[j];

    double decomposition = mu[0] * mu[0] * tail[0];
    double bound_val = mu[0] * mu[0] * sk_over_k;
    for (int j = 1; j < k; ++j) {
      const double rise = mu[j] * mu[j] - mu[j - 1] * mu[j - 1];
      decomposition += rise * (tail[j] + b_val[j - 1]);
      decomposition += beta[j] * beta[j] * b_val[j - 1];
      bound_val += (rise + beta[j] * beta[j]) * base_bound;
    }
    decomposition += beta[k - 1] * beta[k - 1] * b_val[k - 1];
    bound_val += beta[k - 1] * beta[k - 1] * base_bound;
    for (int j = k; j < p; ++j) {
      decomposition += detail::form_value(phi, wa.col(j));
      bound_val += base_bound;
    }

    min_direct = std::min(min_direct, direct);
    min_domination = std::min(min_domination, direct - bound_val);
    max_identity_gap = std::max(max_identity_gap, std::abs(decomposition - direct));

    const double report_sign = (sign == Sign::Positive) ? 1.0 : -1.0;
    result.rows.push_back(
        {tuple, report_sign * direct, report_sign * decomposition, report_sign * bound_val});

    int pos = p - 1;
    while (pos >= 0 && tuple[pos] == m - p + pos) --pos;
    if (pos < 0) break;
    ++tuple[pos];
    for (int j = pos + 1; j < p; ++j) tuple[j] = tuple[j - 1] + 1;
  }

  const int n_tuples = static_cast<int>(result.rows.size());
  const bool positive = (sign == Sign::Positive);
  result.report.checks.push_back(
      {"tuple_average_sign",
       positive ? "avg p-tuple curvature sum > 0" : "avg p-tuple curvature sum < 0",
       positive ? min_direct : -min_direct, positive ? strict_threshold : -strict_threshold,
       min_direct - strict_threshold, 0.0, min_direct > strict_threshold, n_tuples,
       "threshold scaled by S_k margin " + std::to_string(margin)});
  result.report.checks.push_back(
      {"telescoping_bound",
       positive ? "telescoping lower bound <= direct average"
                : "telescoping upper bound >= direct average",
       min_domination, 0.0, min_domination, tol.slack, min_domination >= -tol.slack, n_tuples,
       ""});
  const double identity_tol = tol.identity + 8.0 * k * critical.criticality_residual;
  result.report.checks.push_back({"telescoping_identity",
                                  "telescoping decomposition = direct average",
                                  max_identity_gap, 0.0, identity_tol - max_identity_gap,
                                  identity_tol, max_identity_gap <= identity_tol, n_tuples,
                                  ""});
  return result;
}

}  // namespace kscal

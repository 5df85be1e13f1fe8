#pragma once

#include <limits>
#include <string>
#include <vector>

#include "kscal/curvature_tensor.hpp"
#include "kscal/metric_catalog.hpp"
#include "kscal/sphere_moments.hpp"
#include "kscal/tangent_plane.hpp"

namespace kscal {

/// S_k(x, Sigma) as the double trace sum_{i,j<=k} R(E_i, conj(E_i), E_j, conj(E_j)).
/// Independent of the unitary frame chosen for the plane.
inline double s_k_trace(const CurvatureTensor& r, const TangentPlane& plane) {
  const int m = r.dim();
  if (plane.ambient_dim() != m) throw std::invalid_argument("s_k_trace: dimension mismatch");
  const Matrix p = plane.projector();
  cplx acc(0, 0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) acc += r(i, j, k, l) * p(i, j) * p(k, l);
  return acc.real();
}

/// Same quantity through the sphere-average definition:
/// (k(k+1)/2) times the moment-contracted average of H over the plane.
inline double s_k_moments(const CurvatureTensor& r, const TangentPlane& plane) {
  const int k = plane.rank();
  const CurvatureTensor rk = restrict_to(r, plane);
  return 0.5 * k * (k + 1) * average_quartic_form(rk);
}

struct ScanRecord {
  int point_index = 0;
  double value = 0.0;
  double route_residual = 0.0;  // |trace route - moment route|
};

struct ScanResult {
  std::string model_id;
  int k = 0;
  std::size_t plane_samples = 0;
  std::size_t point_samples = 0;
  std::vector<ScanRecord> records;
  double min_value = std::numeric_limits<double>::infinity();
  Matrix argmin_frame;  // frame of the best plane seen
  int argmin_point = 0;
  double max_route_residual = 0.0;
};

/// Haar-sampled minimum of S_k over an explicit tensor. Doubles as the
/// brute-force plane-search oracle in tests.
inline ScanResult positivity_scan_tensor(const CurvatureTensor& r, int k, int plane_samples,
                                         std::uint64_t seed, const std::string& id = "tensor",
                                         int point_index = 0) {
  if (plane_samples < 1)
    throw std::invalid_argument("positivity_scan: sample counts must be >= 1");
  if (k < 1 || k > r.dim()) throw std::invalid_argument("positivity_scan: need 1 <= k <= m");
  ScanResult result;
  result.model_id = id;
  result.k = k;
  result.plane_samples = static_cast<std::size_t>(plane_samples);
  result.point_samples = 1;
  std::mt19937_64 rng = substream_rng(seed, static_cast<std::uint64_t>(point_index));
  for (int s = 0; s < plane_samples; ++s) {
    const TangentPlane plane = TangentPlane::haar(r.dim(), k, rng);
    const double v_trace = s_k_trace(r, plane);
    const double v_mom = s_k_moments(r, plane);
    const double residual = std::abs(v_trace - v_mom);
    result.records.push_back({point_index, v_trace, residual});
    result.max_route_residual = std::max(result.max_route_residual, residual);
    if (v_trace < result.min_value) {
      result.min_value = v_trace;
      result.argmin_frame = plane.frame();
      result.argmin_point = point_index;
    }
  }
  return result;
}

/// Samples Haar-uniform k-planes on the model's tensor and records the
/// minimum of S_k seen, with the trace/moment route residual per sample.
/// The result is a sampling certificate: a candidate upper bound on inf S_k,
/// to be refined by the Grassmannian minimizer. All catalog models are
/// single-point, so point_samples beyond 1 re-reads the same chart point.
inline ScanResult positivity_scan(const MetricModel& model, int k, int plane_samples,
                                  int point_samples, std::uint64_t seed) {
  if (point_samples < 1)
    throw std::invalid_argument("positivity_scan: sample counts must be >= 1");
  ScanResult result = positivity_scan_tensor(model.build(), k, plane_samples, seed, model.id);
  result.point_samples = 1;
  return result;
}

}  // namespace kscal

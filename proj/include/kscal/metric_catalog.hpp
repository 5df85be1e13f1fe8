#pragma once

#include <cmath>
#include <functional>
#include <map>
#include <memory>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "kscal/curvature_tensor.hpp"
#include "kscal/tensor_io.hpp"
#include "kscal/types.hpp"

namespace kscal {

/// Space-form tensor with constant holomorphic sectional curvature c:
/// R[i][j][k][l] = (c/2)(delta_ij delta_kl + delta_il delta_kj).
inline CurvatureTensor constant_hsc_tensor(int m, double c) {
  CurvatureTensor t(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const double v = 0.5 * c * ((i == j && k == l ? 1.0 : 0.0) +
                                      (i == l && k == j ? 1.0 : 0.0));
          t.set(i, j, k, l, cplx(v, 0.0));
        }
  return t;
}

/// Block direct sum: indices 0..mA-1 carry A, mA..mA+mB-1 carry B, and every
/// component mixing the two blocks vanishes.
inline CurvatureTensor product_tensor(const CurvatureTensor& a, const CurvatureTensor& b) {
  const int ma = a.dim(), mb = b.dim(), m = ma + mb;
  CurvatureTensor t(m);
  for (int i = 0; i < ma; ++i)
    for (int j = 0; j < ma; ++j)
      for (int k = 0; k < ma; ++k)
        for (int l = 0; l < ma; ++l) t.set(i, j, k, l, a(i, j, k, l));
  for (int i = 0; i < mb; ++i)
    for (int j = 0; j < mb; ++j)
      for (int k = 0; k < mb; ++k)
        for (int l = 0; l < mb; ++l) t.set(ma + i, ma + j, ma + k, ma + l, b(i, j, k, l));
  return t;
}

/// Generic tensor with all the right symmetries: symmetrized complex Gaussian
/// noise, rescaled so max |R| = 1.
inline CurvatureTensor random_tensor(int m, std::uint64_t seed) {
  std::mt19937_64 rng = make_rng(seed);
  const std::size_t n = static_cast<std::size_t>(m) * m * m * m;
  std::vector<cplx> raw(n);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (auto& z : raw) z = cplx(normal(rng), normal(rng));
  CurvatureTensor t = CurvatureTensor::from_components(m, std::move(raw));
  const double scale = t.max_abs();
  if (scale > 0) {
    std::vector<cplx> scaled = t.components();
    for (auto& z : scaled) z /= scale;
    return CurvatureTensor::from_components(m, std::move(scaled));
  }
  return t;
}

/// Space form plus a seeded symmetric perturbation of magnitude eps; the
/// positivity margin shrinks with eps but stays controlled for small eps.
inline CurvatureTensor perturbed_hsc_tensor(int m, double c, double eps, std::uint64_t seed) {
  const CurvatureTensor base = constant_hsc_tensor(m, c);
  const CurvatureTensor noise = random_tensor(m, seed);
  std::vector<cplx> sum = base.components();
  const auto& np = noise.components();
  for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += eps * np[i];
  return CurvatureTensor::from_components(m, std::move(sum));
}

// ---------------------------------------------------------------------------
// Curvature from a Kaehler potential at a chart point, by finite differences.
// ---------------------------------------------------------------------------

struct PotentialChart {
  int m = 0;
  std::function<double(const Vector&)> potential;  // smooth, real-valued
  Vector point;                                    // chart point in C^m
  double step = 2e-2;  // base step; nested differences amplify roundoff by eps/h^4
};

struct PotentialCurvatureResult {
  CurvatureTensor tensor;      // components in a g-unitary frame at the point
  Matrix metric;               // g_{i jbar} at the chart point
  double trust_radius = 0.0;   // Richardson discrepancy between the two steps
};

namespace detail {

// Metric g_{i jbar} = d^2 phi / dz_i dzbar_j by second central differences on
// the real coordinates:  (1/4)[phi_xx + phi_yy + i (phi_xy - phi_yx)].
inline Matrix potential_metric(const PotentialChart& chart, const Vector& z, double h) {
  const int m = chart.m;
  const auto& phi = chart.potential;
  const auto shifted = [&](int coord, int reim, double step) {
    Vector w = z;
    w(coord) += (reim == 0) ? cplx(step, 0.0) : cplx(0.0, step);
    return w;
  };
  const double phi0 = phi(z);
  Matrix g(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      double dxx, dyy, dxy, dyx;
      if (i == j) {
        // phi_{x_i y_i} = phi_{y_i x_i}, so the imaginary part cancels; only
        // the Laplacian in the (x_i, y_i) pair survives.
        dxx = (phi(shifted(i, 0, h)) - 2.0 * phi0 + phi(shifted(i, 0, -h))) / (h * h);
        dyy = (phi(shifted(i, 1, h)) - 2.0 * phi0 + phi(shifted(i, 1, -h))) / (h * h);
        dxy = dyx = 0.0;
      } else {
        const auto mixed = [&](int ra, int rb) {
          Vector pp = z, pm = z, mp = z, mm = z;
          pp(i) += (ra == 0 ? cplx(h, 0) : cplx(0, h));
          pp(j) += (rb == 0 ? cplx(h, 0) : cplx(0, h));
          pm(i) += (ra == 0 ? cplx(h, 0) : cplx(0, h));
          pm(j) -= (rb == 0 ? cplx(h, 0) : cplx(0, h));
          mp(i) -= (ra == 0 ? cplx(h, 0) : cplx(0, h));
          mp(j) += (rb == 0 ? cplx(h, 0) : cplx(0, h));
          mm(i) -= (ra == 0 ? cplx(h, 0) : cplx(0, h));
          mm(j) -= (rb == 0 ? cplx(h, 0) : cplx(0, h));
          return (phi(pp) - phi(pm) - phi(mp) + phi(mm)) / (4.0 * h * h);
        };
        dxx = mixed(0, 0);
        dyy = mixed(1, 1);
        dxy = mixed(0, 1);
        dyx = mixed(1, 0);
      }
      g(i, j) = 0.25 * cplx(dxx + dyy, dxy - dyx);
    }
  // The construction above is Hermitian up to truncation error; tighten it.
  g = 0.5 * (g + g.adjoint()).eval();
  return g;
}

// Coordinate curvature R_{i jbar k lbar} at the chart point for a single
// finite-difference step h (no extrapolation).
inline std::vector<cplx> potential_curvature_step(const PotentialChart& chart, double h,
                                                  Matrix* metric_out) {
  const int m = chart.m;
  const Vector& z0 = chart.point;
  const auto metric_at = [&](const Vector& z) { return potential_metric(chart, z, h); };

  const Matrix g0 = metric_at(z0);
  if (metric_out) *metric_out = g0;

  const auto shift = [&](int coord, int reim, double step) {
    Vector w = z0;
    w(coord) += (reim == 0) ? cplx(step, 0.0) : cplx(0.0, step);
    return w;
  };

  // First derivatives of g: d_k g = (d/dx_k - i d/dy_k) g / 2.
  std::vector<Matrix> dg(m);
  for (int k = 0; k < m; ++k) {
    const Matrix gx = (metric_at(shift(k, 0, h)) - metric_at(shift(k, 0, -h))) / (2.0 * h);
    const Matrix gy = (metric_at(shift(k, 1, h)) - metric_at(shift(k, 1, -h))) / (2.0 * h);
    dg[k] = 0.5 * (gx - cplx(0, 1) * gy);
  }

  // Second derivatives d_k dbar_l g =
  //   (1/4)[g_xx + g_yy + i (g_xy - g_yx)] over real coordinates (x_k, y_k, x_l, y_l).
  const auto shift2 = [&](int ck, int rk, double sk, int cl, int rl, double sl) {
    Vector w = z0;
    w(ck) += (rk == 0) ? cplx(sk, 0.0) : cplx(0.0, sk);
    w(cl) += (rl == 0) ? cplx(sl, 0.0) : cplx(0.0, sl);
    return w;
  };
  std::vector<Matrix> ddg(static_cast<std::size_t>(m) * m);
  for (int k = 0; k < m; ++k)
    for (int l = 0; l < m; ++l) {
      const auto mixed = [&](int rk, int rl) -> Matrix {
        if (k == l && rk == rl)
          return (metric_at(shift(k, rk, h)) - 2.0 * g0 + metric_at(shift(k, rk, -h))) /
                 (h * h);
        return (metric_at(shift2(k, rk, h, l, rl, h)) - metric_at(shift2(k, rk, h, l, rl, -h)) -
                metric_at(shift2(k, rk, -h, l, rl, h)) +
                metric_at(shift2(k, rk, -h, l, rl, -h))) /
               (4.0 * h * h);
      };
      const Matrix gxx = mixed(0, 0);
      const Matrix gyy = mixed(1, 1);
      const Matrix gxy = mixed(0, 1);
      const Matrix gyx = mixed(1, 0);
      ddg[static_cast<std::size_t>(k) * m + l] =
          0.25 * (gxx + gyy + cplx(0, 1) * (gxy - gyx));
    }

  const Matrix ginv = g0.inverse();

  // R_{i jbar k lbar} = -d_k dbar_l g_{i jbar}
  //                     + sum_{p,q} g^{q pbar} (d_k g_{i pbar}) (dbar_l g_{q jbar})
  // with g^{q pbar} = (g^{-1})(p, q) and dbar_l g_{q jbar} = conj(d_l g_{j qbar}).
  std::vector<cplx> r(static_cast<std::size_t>(m) * m * m * m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          cplx term(0, 0);
          for (int p = 0; p < m; ++p)
            for (int q = 0; q < m; ++q)
              term += ginv(p, q) * dg[k](i, p) * std::conj(dg[l](j, q));
          r[((static_cast<std::size_t>(i) * m + j) * m + k) * m + l] =
              -ddg[static_cast<std::size_t>(k) * m + l](i, j) + term;
        }
  return r;
}

}  // namespace detail

/// Curvature tensor of the Kaehler metric g = ddbar(phi) at the chart point,
/// expressed in a g-unitary frame. Central differences at steps h and h/2
/// with one Richardson level; the step discrepancy is reported as the
/// tensor's trust radius.
inline PotentialCurvatureResult potential_to_curvature(const PotentialChart& chart) {
  if (chart.m < 1 || !chart.potential || chart.point.size() != chart.m)
    throw std::invalid_argument("potential_to_curvature: malformed chart");
  if (!(chart.step > 0)) throw std::invalid_argument("potential_to_curvature: step must be > 0");
  const int m = chart.m;
  const double h = chart.step;

  Matrix g_h, g_h2;
  const std::vector<cplx> r_h = detail::potential_curvature_step(chart, h, &g_h);
  const std::vector<cplx> r_h2 = detail::potential_curvature_step(chart, 0.5 * h, &g_h2);

  double trust = 0.0;
  std::vector<cplx> r_ex(r_h.size());
  for (std::size_t i = 0; i < r_h.size(); ++i) {
    r_ex[i] = (4.0 * r_h2[i] - r_h[i]) / 3.0;
    trust = std::max(trust, std::abs(r_h2[i] - r_h[i]));
    if (!std::isfinite(r_ex[i].real()) || !std::isfinite(r_ex[i].imag()))
      throw std::runtime_error("potential_to_curvature: non-finite finite differences");
  }
  const Matrix g = (4.0 * g_h2 - g_h) / 3.0;

  Eigen::SelfAdjointEigenSolver<Matrix> es(g);
  if (es.info() != Eigen::Success)
    throw std::runtime_error("potential_to_curvature: metric eigensolver failed");
  if (!(es.eigenvalues().minCoeff() > 1e-6))
    throw std::domain_error("potential_to_curvature: metric is not positive definite");

  // Unitary frame via the Hermitian inverse square root: frame columns are
  // the transpose of g^{-1/2} in coordinates.
  Vector inv_sqrt(m);
  for (int i = 0; i < m; ++i) inv_sqrt(i) = 1.0 / std::sqrt(es.eigenvalues()(i));
  const Matrix g_inv_half =
      es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
  const Matrix frame = g_inv_half.transpose();

  CurvatureTensor coord = CurvatureTensor::from_components(m, std::move(r_ex));
  CurvatureTensor unitary = transform_frame(coord, frame);
  return {std::move(unitary), g, trust};
}

// ---------------------------------------------------------------------------
// Named model catalog
// ---------------------------------------------------------------------------

/// A point model of curvature: either a closed-form family or a chart-local
/// potential pipeline. `parse` accepts the CLI grammar
///   name:key=value,key=value
/// e.g. "constant_hsc:m=4,c=1", "product:m1=2,c1=1,m2=2,c2=1",
///      "perturbed_hsc:m=4,c=2,eps=0.05,seed=7", "fubini_study:m=2",
///      "flat_quartic:m=2,eps=0.01", "flat:m=3", "file:path=tensor.json".
struct MetricModel {
  enum class Kind { ConstantHsc, Flat, Product, PerturbedHsc, PotentialChart, File };

  Kind kind = Kind::Flat;
  std::string id;              // canonical description string
  int m = 2;
  double c = 1.0;
  double eps = 0.0;
  std::uint64_t seed = 0;
  double h = 2e-2;
  int m2 = 0;                  // product second factor
  double c2 = 0.0;
  std::string potential_name;  // "fubini_study" | "flat_quartic"
  std::string path;            // tensor file

  static MetricModel parse(const std::string& desc);

  /// Potential evaluator for chart models; throws for other kinds.
  PotentialChart chart() const {
    PotentialChart out;
    out.m = m;
    out.point = Vector::Zero(m);
    out.step = h;
    if (potential_name == "fubini_study") {
      out.potential = [](const Vector& z) { return std::log(1.0 + z.squaredNorm()); };
    } else if (potential_name == "flat_quartic") {
      const double e = eps;
      out.potential = [e](const Vector& z) {
        const double a = std::norm(z(0));
        return z.squaredNorm() + e * a * a;
      };
    } else {
      throw std::invalid_argument("MetricModel: unknown potential '" + potential_name + "'");
    }
    return out;
  }

  CurvatureTensor build() const {
    switch (kind) {
      case Kind::ConstantHsc:
        return constant_hsc_tensor(m, c);
      case Kind::Flat:
        return CurvatureTensor(m);
      case Kind::Product:
        return product_tensor(constant_hsc_tensor(m, c), constant_hsc_tensor(m2, c2));
      case Kind::PerturbedHsc:
        return perturbed_hsc_tensor(m, c, eps, seed);
      case Kind::PotentialChart:
        return potential_to_curvature(chart()).tensor;
      case Kind::File:
        return load_tensor(path);
    }
    throw std::logic_error("MetricModel::build: unreachable");
  }

  int total_dim() const { return kind == Kind::Product ? m + m2 : m; }
};

namespace detail {

inline std::map<std::string, std::string> parse_kv(const std::string& s) {
  std::map<std::string, std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("MetricModel: expected key=value, got '" + item + "'");
    out[item.substr(0, eq)] = item.substr(eq + 1);
  }
  return out;
}

}  // namespace detail

inline MetricModel MetricModel::parse(const std::string& desc) {
  MetricModel model;
  model.id = desc;
  const auto colon = desc.find(':');
  const std::string name = desc.substr(0, colon);
  std::map<std::string, std::string> kv;
  if (colon != std::string::npos) kv = detail::parse_kv(desc.substr(colon + 1));

  const auto get_int = [&](const std::string& key, int def) {
    const auto it = kv.find(key);
    return it == kv.end() ? def : std::stoi(it->second);
  };
  const auto get_double = [&](const std::string& key, double def) {
    const auto it = kv.find(key);
    return it == kv.end() ? def : std::stod(it->second);
  };
  const auto get_u64 = [&](const std::string& key, std::uint64_t def) {
    const auto it = kv.find(key);
    return it == kv.end() ? def : static_cast<std::uint64_t>(std::stoull(it->second));
  };

  if (name == "constant_hsc") {
    model.kind = Kind::ConstantHsc;
    model.m = get_int("m", 2);
    model.c = get_double("c", 1.0);
  } else if (name == "flat") {
    model.kind = Kind::Flat;
    model.m = get_int("m", 2);
  } else if (name == "product") {
    model.kind = Kind::Product;
    model.m = get_int("m1", 2);
    model.c = get_double("c1", 1.0);
    model.m2 = get_int("m2", 2);
    model.c2 = get_double("c2", 1.0);
  } else if (name == "perturbed_hsc") {
    model.kind = Kind::PerturbedHsc;
    model.m = get_int("m", 2);
    model.c = get_double("c", 2.0);
    model.eps = get_double("eps", 0.05);
    model.seed = get_u64("seed", 1);
  } else if (name == "fubini_study" || name == "flat_quartic") {
    model.kind = Kind::PotentialChart;
    model.potential_name = name;
    model.m = get_int("m", 2);
    model.eps = get_double("eps", 0.01);
    model.h = get_double("h", 2e-2);
  } else if (name == "file") {
    model.kind = Kind::File;
    const auto it = kv.find("path");
    if (it == kv.end()) throw std::invalid_argument("MetricModel: file model needs path=...");
    model.path = it->second;
  } else {
    throw std::invalid_argument("MetricModel: unknown model '" + name + "'");
  }
  if (model.m < 1 || (model.kind == Kind::Product && model.m2 < 1))
    throw std::invalid_argument("MetricModel: dimensions must be positive");
  return model;
}

}  // namespace kscal

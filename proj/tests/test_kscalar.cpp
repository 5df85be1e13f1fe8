#include <catch2/catch_amalgamated.hpp>

#include "kscal/kscalar.hpp"
#include "kscal/metric_catalog.hpp"

using namespace kscal;

TEST_CASE("S_k of the space form is c k(k+1)/2", "[kscalar]") {
  std::mt19937_64 rng = make_rng(1);
  for (int m : {3, 5}) {
    for (int k = 1; k <= m; ++k) {
      const double c = 1.5;
      const CurvatureTensor r = constant_hsc_tensor(m, c);
      const TangentPlane plane = TangentPlane::haar(m, k, rng);
      CHECK(s_k_trace(r, plane) == Catch::Approx(0.5 * c * k * (k + 1)).margin(1e-10));
    }
  }
}

TEST_CASE("S_1 is the holomorphic sectional curvature of the spanning vector",
          "[kscalar]") {
  const CurvatureTensor r = random_tensor(4, 9);
  std::mt19937_64 rng = make_rng(2);
  const Vector x = random_unit_vector(4, rng);
  Matrix f(4, 1);
  f.col(0) = x;
  CHECK(s_k_trace(r, TangentPlane(f)) ==
        Catch::Approx(holomorphic_sectional(r, x)).margin(1e-12));
}

TEST_CASE("S_m over the full tangent space is the scalar curvature", "[kscalar]") {
  const CurvatureTensor r = random_tensor(4, 11);
  cplx s(0, 0);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) s += r(i, i, j, j);
  std::mt19937_64 rng = make_rng(3);
  const TangentPlane full = TangentPlane::haar(4, 4, rng);  // any unitary frame
  CHECK(s_k_trace(r, full) == Catch::Approx(s.real()).margin(1e-11));
}

TEST_CASE("S_k is invariant under unitary reframing of the plane", "[kscalar]") {
  const CurvatureTensor r = random_tensor(5, 13);
  std::mt19937_64 rng = make_rng(4);
  const TangentPlane plane = TangentPlane::haar(5, 3, rng);
  const Matrix u = TangentPlane::haar(3, 3, rng).frame();
  CHECK(std::abs(s_k_trace(r, plane) - s_k_trace(r, plane.rotated(u))) < 1e-12);
}

TEST_CASE("trace route equals moment route on random inputs", "[kscalar]") {
  std::mt19937_64 rng = make_rng(5);
  for (int k : {1, 2, 3}) {
    for (int trial = 0; trial < 50; ++trial) {
      const CurvatureTensor r = random_tensor(4, 300 * k + trial);
      const TangentPlane plane = TangentPlane::haar(4, k, rng);
      CHECK(std::abs(s_k_trace(r, plane) - s_k_moments(r, plane)) < 1e-10);
    }
  }
}

TEST_CASE("positivity scan of the space form is constant", "[kscalar]") {
  const MetricModel model = MetricModel::parse("constant_hsc:m=4,c=1");
  const ScanResult scan = positivity_scan(model, 2, 200, 1, 7);
  CHECK(scan.min_value == Catch::Approx(3.0).margin(1e-10));
  CHECK(scan.max_route_residual <= 1e-10);
  CHECK(scan.records.size() == 200);
  for (const auto& rec : scan.records) CHECK(rec.route_residual <= 1e-10);
}

TEST_CASE("positivity scan of the flat model is zero", "[kscalar]") {
  const ScanResult scan = positivity_scan(MetricModel::parse("flat:m=3"), 2, 50, 1, 11);
  CHECK(scan.min_value == Catch::Approx(0.0).margin(1e-14));
}

TEST_CASE("product-model scan approaches the diagonal-plane value from above", "[kscalar]") {
  // Landmark values on Gr(2,4) for the product of two constant-HSC(c) planes:
  // 3c inside a factor, 2c for one unit vector per factor, and 3c/2 on the
  // balanced diagonal planes, which is the infimum.
  const double c = 1.0;
  const CurvatureTensor prod =
      product_tensor(constant_hsc_tensor(2, c), constant_hsc_tensor(2, c));
  Matrix factor = Matrix::Zero(4, 2), mixed = Matrix::Zero(4, 2), diag = Matrix::Zero(4, 2);
  factor(0, 0) = factor(1, 1) = 1.0;
  mixed(0, 0) = mixed(2, 1) = 1.0;
  const double s = 1.0 / std::sqrt(2.0);
  diag(0, 0) = diag(2, 0) = s;
  diag(1, 1) = diag(3, 1) = s;
  CHECK(s_k_trace(prod, TangentPlane(factor)) == Catch::Approx(3.0 * c).margin(1e-12));
  CHECK(s_k_trace(prod, TangentPlane(mixed)) == Catch::Approx(2.0 * c).margin(1e-12));
  CHECK(s_k_trace(prod, TangentPlane(diag)) == Catch::Approx(1.5 * c).margin(1e-12));

  const MetricModel model = MetricModel::parse("product:m1=2,c1=1,m2=2,c2=1");
  const ScanResult small = positivity_scan(model, 2, 300, 1, 21);
  const ScanResult large = positivity_scan(model, 2, 3000, 1, 21);
  // same seed: the first 300 draws coincide, so the min can only decrease
  CHECK(large.min_value <= small.min_value);
  CHECK(large.min_value >= 1.5 * c - 1e-9);
  CHECK(large.min_value <= 1.5 * c + 0.2);
}

TEST_CASE("scan argmin is a valid plane achieving the minimum", "[kscalar]") {
  const CurvatureTensor r = perturbed_hsc_tensor(4, 2.0, 0.05, 3);
  const ScanResult scan = positivity_scan_tensor(r, 2, 500, 17);
  const TangentPlane best{scan.argmin_frame};
  CHECK(s_k_trace(r, best) == Catch::Approx(scan.min_value).margin(1e-12));
}

TEST_CASE("scan rejects invalid sample counts and ranks", "[kscalar]") {
  const MetricModel model = MetricModel::parse("constant_hsc:m=3,c=1");
  CHECK_THROWS_AS(positivity_scan(model, 2, 0, 1, 3), std::invalid_argument);
  CHECK_THROWS_AS(positivity_scan(model, 2, 10, 0, 3), std::invalid_argument);
  CHECK_THROWS_AS(positivity_scan(model, 9, 10, 1, 3), std::invalid_argument);
}

TEST_CASE("coordinate sub-plane averages are controlled by S_{k+1}", "[kscalar]") {
  // For a (k+1)-plane in a Ricci-diagonalizing frame, the average of S_k over
  // its coordinate k-sub-planes is (k/(k+2)) S_{k+1} for constant models and
  // bounded by S_{k+1} for positive products.
  std::mt19937_64 rng = make_rng(6);
  const auto subplane_average = [&](const CurvatureTensor& r, const TangentPlane& big) {
    const int kk = big.rank() - 1;
    const TangentPlane diag = diagonalize_restricted_ricci(r, big);
    double total = 0.0;
    for (int drop = 0; drop < big.rank(); ++drop) {
      Matrix f(big.ambient_dim(), kk);
      int col = 0;
      for (int j = 0; j < big.rank(); ++j)
        if (j != drop) f.col(col++) = diag.frame().col(j);
      total += s_k_trace(r, TangentPlane(f));
    }
    return total / big.rank();
  };

  for (int k : {1, 2, 3}) {
    const CurvatureTensor r = constant_hsc_tensor(5, 1.3);
    const TangentPlane big = TangentPlane::haar(5, k + 1, rng);
    const double avg = subplane_average(r, big);
    const double skp1 = s_k_trace(r, big);
    CHECK(avg == Catch::Approx(skp1 * k / (k + 2.0)).margin(1e-10));
    CHECK(avg <= skp1 + 1e-10);
  }
  const CurvatureTensor prod =
      product_tensor(constant_hsc_tensor(2, 1.0), constant_hsc_tensor(2, 0.5));
  for (int k : {1, 2}) {
    const TangentPlane big = TangentPlane::haar(4, k + 1, rng);
    CHECK(subplane_average(prod, big) <= s_k_trace(prod, big) + 1e-10);
  }
}

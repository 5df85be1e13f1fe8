// Acceptance suite: one pass/fail line per criterion, exit code = number of
// failed criteria. Every tolerance is pinned here, in code.

#include <chrono>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kscal/kscal.hpp"
#include "kscal/monte_carlo.hpp"

using namespace kscal;

namespace {

struct Criterion {
  std::string title;
  std::function<bool(std::ostringstream&)> run;
};

bool expect(bool ok, std::ostringstream& log, const std::string& what) {
  if (!ok) log << "  FAILED: " << what << "\n";
  return ok;
}

double wall_seconds(const std::function<void()>& f) {
  const auto t0 = std::chrono::steady_clock::now();
  f();
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// --- 1. moment identities ---------------------------------------------------
bool criterion_moments(std::ostringstream& log) {
  bool ok = true;
  for (int m = 2; m <= 6; ++m) {
    std::vector<int> a4(m, 0), a22(m, 0);
    a4[0] = 2;
    a22[0] = 1;
    a22[1] = 1;
    ok &= expect(monomial_moment(m, a4, a4) == Rational(2, m * (m + 1)), log,
                 "|z1|^4 moment at m=" + std::to_string(m));
    ok &= expect(monomial_moment(m, a22, a22) == Rational(1, m * (m + 1)), log,
                 "|z1 z2|^2 moment at m=" + std::to_string(m));

    const auto f4 = [](const Vector& z) {
      const double t = std::norm(z(0));
      return t * t;
    };
    const auto f22 = [](const Vector& z) { return std::norm(z(0)) * std::norm(z(1)); };
    const McEstimate mc4 = mc_average(f4, m, 1000000, 100 + m);
    const McEstimate mc22 = mc_average(f22, m, 1000000, 200 + m);
    ok &= expect(std::abs(mc4.mean - 2.0 / (m * (m + 1))) <= 4.0 * mc4.std_error, log,
                 "MC |z1|^4 within 4 stderr at m=" + std::to_string(m));
    ok &= expect(std::abs(mc22.mean - 1.0 / (m * (m + 1))) <= 4.0 * mc22.std_error, log,
                 "MC |z1 z2|^2 within 4 stderr at m=" + std::to_string(m));
  }
  return ok;
}

// --- 2. double trace vs scaled sphere average -------------------------------
bool criterion_trace_identity(std::ostringstream& log) {
  bool ok = true;
  double worst = 0.0;
  for (int m : {2, 3, 4})
    for (int trial = 0; trial < 20; ++trial) {
      const CurvatureTensor r = random_tensor(m, 9000 + 100 * m + trial);
      cplx s(0, 0);
      for (int i = 0; i < m; ++i)
        for (int j = 0; j < m; ++j) s += r(i, i, j, j);
      const double gap = std::abs(2.0 * s.real() - m * (m + 1) * average_quartic_form(r));
      worst = std::max(worst, gap);
    }
  ok &= expect(worst < 1e-12, log, "identity gap " + std::to_string(worst));
  log << "  worst gap " << worst;
  return ok;
}

// --- 3. trace route vs moment route ------------------------------------------
bool criterion_route_equivalence(std::ostringstream& log) {
  bool ok = true;
  std::mt19937_64 rng = make_rng(77);
  double worst = 0.0;
  for (int k : {1, 2, 3})
    for (int trial = 0; trial < 50; ++trial) {
      const CurvatureTensor r = random_tensor(4, 10000 + 100 * k + trial);
      const TangentPlane plane = TangentPlane::haar(4, k, rng);
      worst = std::max(worst, std::abs(s_k_trace(r, plane) - s_k_moments(r, plane)));
    }
  ok &= expect(worst < 1e-10, log, "route gap " + std::to_string(worst));
  log << "  worst gap " << worst;
  return ok;
}

// --- 4. space-form minimization ----------------------------------------------
bool criterion_space_form_min(std::ostringstream& log) {
  bool ok = true;
  for (int m = 3; m <= 6; ++m)
    for (int k : {2, 3}) {
      MinimizeOptions opts;
      opts.seed = 4000 + 10 * m + k;
      CriticalPlane result{TangentPlane(Matrix::Identity(m, 1)), 0, 0, 0, {}, false, 0, 0};
      const double secs = wall_seconds([&] { result = minimize_sk(
          constant_hsc_tensor(m, 1.0), k, opts); });
      const double expected = 0.5 * k * (k + 1);
      ok &= expect(std::abs(result.value - expected) <= 1e-8, log,
                   "value m=" + std::to_string(m) + " k=" + std::to_string(k));
      ok &= expect(result.gradient_norm < 1e-8, log,
                   "gradient m=" + std::to_string(m) + " k=" + std::to_string(k));
      ok &= expect(secs < 10.0, log, "wall time " + std::to_string(secs) + "s");
    }
  return ok;
}

// --- 5. product-model minimizer ----------------------------------------------
bool criterion_product_min(std::ostringstream& log) {
  bool ok = true;
  // Two curve factors (complex dimension 1 each): Gr(2,2) is a point and the
  // minimum is c1 + c2 = 2.
  {
    const CurvatureTensor prod =
        product_tensor(constant_hsc_tensor(1, 1.0), constant_hsc_tensor(1, 1.0));
    MinimizeOptions opts;
    opts.seed = 500;
    const CriticalPlane result = minimize_sk(prod, 2, opts);
    ok &= expect(std::abs(result.value - 2.0) <= 1e-6, log,
                 "curve-product value " + std::to_string(result.value));
    const ScanResult oracle = positivity_scan_tensor(prod, 2, 100000, 501);
    ok &= expect(oracle.min_value >= result.value - 1e-4, log, "curve-product oracle");
  }
  // Complex-2-dimensional factors: balanced diagonal planes realize the true
  // infimum 3c/2 = 1.5 (below the one-vector-per-factor value 2).
  {
    const CurvatureTensor prod =
        product_tensor(constant_hsc_tensor(2, 1.0), constant_hsc_tensor(2, 1.0));
    MinimizeOptions opts;
    opts.seed = 502;
    const CriticalPlane result = minimize_sk(prod, 2, opts);
    ok &= expect(std::abs(result.value - 1.5) <= 1e-6, log,
                 "2x2-product value " + std::to_string(result.value));
    const ScanResult oracle = positivity_scan_tensor(prod, 2, 100000, 503);
    ok &= expect(oracle.min_value >= result.value - 1e-4, log, "2x2-product oracle");
    log << "  2x2 oracle min " << oracle.min_value << " optimizer " << result.value;
  }
  return ok;
}

// --- 6. variational derivatives vs finite differences ------------------------
bool criterion_variational_oracles(std::ostringstream& log) {
  bool ok = true;
  std::mt19937_64 rng = make_rng(600);
  double worst1 = 0.0, worst2 = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const CurvatureTensor r = random_tensor(4, 20000 + trial);
    const TangentPlane plane = TangentPlane::haar(4, 2, rng);
    const SkewGenerator a = SkewGenerator::random(4, rng);
    const auto obj = [&](double t) { return s_k_trace(r, retract(plane, a, t)); };

    const double exact1 = first_variation(r, plane, a);
    const double h1 = 1e-5;
    const double fd1 = (obj(h1) - obj(-h1)) / (2.0 * h1);
    worst1 = std::max(worst1, std::abs(exact1 - fd1) / std::max(1.0, std::abs(exact1)));

    const double exact2 = second_variation(r, plane, a);
    const double h2 = 1e-3;
    const double fd2 = (obj(h2) - 2.0 * obj(0.0) + obj(-h2)) / (h2 * h2);
    worst2 = std::max(worst2, std::abs(exact2 - fd2) / std::max(1.0, std::abs(exact2)));
  }
  ok &= expect(worst1 < 1e-5, log, "first variation rel err " + std::to_string(worst1));
  ok &= expect(worst2 < 1e-4, log, "second variation rel err " + std::to_string(worst2));
  log << "  rel errors " << worst1 << " / " << worst2;
  return ok;
}

// --- 7. criticality identities at converged planes ---------------------------
bool criterion_criticality(std::ostringstream& log) {
  bool ok = true;
  struct Case {
    CurvatureTensor r;
    int k;
    const char* tag;
  };
  std::vector<Case> cases;
  cases.push_back({constant_hsc_tensor(4, 1.0), 2, "constant"});
  cases.push_back(
      {product_tensor(constant_hsc_tensor(2, 1.0), constant_hsc_tensor(2, 1.0)), 2,
       "product"});
  cases.push_back({perturbed_hsc_tensor(4, 2.0, 0.05, 7), 2, "perturbed"});
  cases.push_back({perturbed_hsc_tensor(5, 2.0, 0.03, 8), 3, "perturbed k3"});
  for (const auto& c : cases) {
    MinimizeOptions opts;
    opts.seed = 700;
    const CriticalPlane critical = minimize_sk(c.r, c.k, opts);
    ok &= expect(critical.converged, log, std::string(c.tag) + ": converged");
    ok &= expect(criticality_residual(c.r, critical.plane) < 1e-6, log,
                 std::string(c.tag) + ": mixed-trace residual");
    std::mt19937_64 rng = make_rng(701);
    double min_sv = 0.0;
    for (int probe = 0; probe < 100; ++probe) {
      const double sv =
          second_variation(c.r, critical.plane, SkewGenerator::random(c.r.dim(), rng));
      min_sv = std::min(min_sv, sv);
    }
    ok &= expect(min_sv >= -1e-8, log,
                 std::string(c.tag) + ": second variation min " + std::to_string(min_sv));
  }
  return ok;
}

// --- 8. minimizing-plane lower bounds ----------------------------------------
bool criterion_plane_bounds(std::ostringstream& log) {
  bool ok = true;
  struct Case {
    CurvatureTensor r;
    int k;
    bool expect_equality;
    const char* tag;
  };
  std::vector<Case> cases;
  cases.push_back({constant_hsc_tensor(4, 1.0), 2, true, "constant k2"});
  cases.push_back({constant_hsc_tensor(5, 1.0), 3, true, "constant k3"});
  cases.push_back(
      {product_tensor(constant_hsc_tensor(2, 1.0), constant_hsc_tensor(2, 1.0)), 2, false,
       "product"});
  cases.push_back({perturbed_hsc_tensor(4, 2.0, 0.05, 11), 2, false, "perturbed"});
  for (const auto& c : cases) {
    MinimizeOptions opts;
    opts.seed = 800;
    const CriticalPlane critical = minimize_sk(c.r, c.k, opts);
    if (!expect(critical.converged, log, std::string(c.tag) + ": converged")) {
      ok = false;
      continue;
    }
    const CertificationReport subsets =
        certify_min_plane_subsets(c.r, critical, 200, 801);
    for (const auto& check : subsets.checks)
      ok &= expect(check.pass, log, std::string(c.tag) + ": " + check.name + " slack " +
                                        std::to_string(check.slack));
    if (c.k == 2) {
      const CertificationReport pairs = certify_min_plane_pairs(c.r, critical, 200, 802);
      for (const auto& check : pairs.checks)
        ok &= expect(check.pass, log, std::string(c.tag) + ": pair " + check.name);
    }
    if (c.expect_equality) {
      for (const auto& check : subsets.checks)
        if (check.name == "complement_average_lower_bound")
          ok &= expect(std::abs(check.slack) < 1e-10, log,
                       std::string(c.tag) + ": equality slack " +
                           std::to_string(check.slack));
    }
  }
  return ok;
}

// --- 9. skew normal form -------------------------------------------------------
bool criterion_normal_form(std::ostringstream& log) {
  bool ok = true;
  std::mt19937_64 rng = make_rng(900);
  for (int m : {2, 4, 6})
    for (int trial = 0; trial < 10; ++trial) {
      const Matrix g = complex_gaussian(m, m, rng);
      const Matrix a = 0.5 * (g - g.transpose()).eval();
      const SkewNormalForm nf = skew_normal_form(a);
      const double rec =
          (nf.u.transpose() * a * nf.u - skew_block_form(nf.lambda, m)).cwiseAbs().maxCoeff();
      ok &= expect(rec < 1e-10, log, "reconstruction " + std::to_string(rec));
      Eigen::JacobiSVD<Matrix> svd(a);
      for (std::size_t b = 0; b < nf.lambda.size(); ++b) {
        ok &= expect(std::abs(nf.lambda[b] - svd.singularValues()(2 * b)) < 1e-10, log,
                     "pair singular value (first)");
        ok &= expect(std::abs(nf.lambda[b] - svd.singularValues()(2 * b + 1)) < 1e-10, log,
                     "pair singular value (second)");
      }
    }
  return ok;
}

// --- 10. vanishing certificates, both signs ------------------------------------
bool criterion_vanishing(std::ostringstream& log) {
  bool ok = true;
  for (int m : {4, 6}) {
    const CurvatureTensor r = perturbed_hsc_tensor(m, 2.0, 0.05, 1000 + m);
    MinimizeOptions opts;
    opts.seed = 1001;
    const CriticalPlane critical = minimize_sk(r, 2, opts);
    ok &= expect(critical.converged && critical.value > 1e-3, log,
                 "perturbed m=" + std::to_string(m) + " certified min S_2 > 1e-3");
    for (int p = 2; p <= m; ++p) {
      const VanishingResult v = vanishing_certificate(r, critical, p, Sign::Positive);
      double min_direct = 1e300, min_dom = 1e300;
      for (const auto& row : v.rows) {
        min_direct = std::min(min_direct, row.direct);
        min_dom = std::min(min_dom, row.direct - row.bound);
      }
      ok &= expect(min_direct > 0.0, log,
                   "positive tuple sums m=" + std::to_string(m) + " p=" + std::to_string(p) +
                       " min " + std::to_string(min_direct));
      ok &= expect(min_dom >= -1e-8, log,
                   "telescoping domination m=" + std::to_string(m) +
                       " p=" + std::to_string(p));
      ok &= expect(v.report.all_pass(), log,
                   "report m=" + std::to_string(m) + " p=" + std::to_string(p));
    }
  }
  // Sign-flipped suite on the negative space form.
  {
    const CurvatureTensor r = constant_hsc_tensor(4, -1.0);
    const CurvatureTensor neg = scaled_tensor(r, -1.0);
    MinimizeOptions opts;
    opts.seed = 1002;
    const CriticalPlane critical = minimize_sk(neg, 2, opts);
    for (int p = 2; p <= 4; ++p) {
      const VanishingResult v = vanishing_certificate(r, critical, p, Sign::Negative);
      double max_direct = -1e300;
      for (const auto& row : v.rows) max_direct = std::max(max_direct, row.direct);
      ok &= expect(max_direct < 0.0, log,
                   "negative tuple sums p=" + std::to_string(p) + " max " +
                       std::to_string(max_direct));
      ok &= expect(v.report.all_pass(), log, "negative report p=" + std::to_string(p));
    }
  }
  return ok;
}

// --- 11. determinism of the certify pipeline -----------------------------------
bool criterion_determinism(std::ostringstream& log) {
  RunConfig config;
  config.command = "certify";
  config.model = "constant_hsc:m=3,c=1";
  config.ks = {2};
  config.ps = {2, 3};
  config.plane_samples = 128;
  config.probes = 64;
  config.restarts = 4;
  config.seed = 1100;
  const RunReport a = run_command(config);
  const RunReport b = run_command(config);
  bool ok = expect(a.canonical_hash == b.canonical_hash, log,
                   "hashes " + a.canonical_hash + " vs " + b.canonical_hash);
  ok &= expect(a.all_pass, log, "certify run passes");
  log << "  hash " << a.canonical_hash;
  return ok;
}

}  // namespace

int main() {
  std::vector<Criterion> criteria = {
      {"moment identities (exact rationals + Monte Carlo)", criterion_moments},
      {"double trace = m(m+1)/2 * sphere average, independent routes",
       criterion_trace_identity},
      {"S_k trace route = moment route", criterion_route_equivalence},
      {"space-form minimization returns c k(k+1)/2", criterion_space_form_min},
      {"product-model minimizer matches the brute-force oracle", criterion_product_min},
      {"variational derivatives match finite differences", criterion_variational_oracles},
      {"criticality identities at converged planes", criterion_criticality},
      {"minimizing-plane lower bounds with equality cases", criterion_plane_bounds},
      {"skew normal form reconstructs and matches the SVD oracle", criterion_normal_form},
      {"vanishing certificates dominate telescoping bounds, both signs",
       criterion_vanishing},
      {"certify pipeline is deterministic for fixed config and seed",
       criterion_determinism},
  };

  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    std::ostringstream log;
    bool ok = false;
    const double secs = wall_seconds([&] { ok = criteria[i].run(log); });
    if (!ok) ++failures;
    std::printf("[%s] %2zu. %s (%.2fs)\n", ok ? "PASS" : "FAIL", i + 1,
                criteria[i].title.c_str(), secs);
    const std::string detail = log.str();
    if (!detail.empty()) std::printf("%s\n", detail.c_str());
  }
  if (failures == 0)
    std::printf("all %zu acceptance criteria passed\n", criteria.size());
  else
    std::printf("%d acceptance criteria FAILED\n", failures);
  return failures;
}

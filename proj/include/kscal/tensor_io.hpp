#pragma once

#include <cmath>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "kscal/curvature_tensor.hpp"

namespace kscal {

/// Writes the canonical form: every component, sorted by (i, j, k, l).
/// Schema: { "m": int, "entries": [ {"i","j","k","l","re","im"}, ... ] }.
inline void save_tensor(const CurvatureTensor& r, const std::string& path) {
  const int m = r.dim();
  nlohmann::json entries = nlohmann::json::array();
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      for (int k = 0; k < m; ++k)
        for (int l = 0; l < m; ++l) {
          const cplx v = r(i, j, k, l);
          entries.push_back({{"i", i}, {"j", j}, {"k", k}, {"l", l},
                             {"re", v.real()}, {"im", v.imag()}});
        }
  nlohmann::json doc = {{"m", m}, {"entries", std::move(entries)}};
  std::ofstream out(path);
  if (!out) throw std::runtime_error("save_tensor: cannot open '" + path + "'");
  out << doc.dump(2) << "\n";
}

struct LoadedTensor {
  CurvatureTensor tensor;
  double symmetry_residual = 0.0;  // max deviation among symmetry-equivalent inputs
};

/// Loads a tensor file. Omitted entries default to the value forced by the
/// symmetries (or zero if the whole orbit is absent); conflicting entries in
/// one symmetry orbit are averaged and the max deviation reported.
inline LoadedTensor load_tensor_with_residual(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_tensor: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error(std::string("load_tensor: invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("m") || !doc.contains("entries") ||
      !doc["m"].is_number_integer() || !doc["entries"].is_array())
    throw std::runtime_error("load_tensor: schema violation (need m and entries)");
  const int m = doc["m"].get<int>();
  if (m < 1) throw std::runtime_error("load_tensor: m must be positive");

  const std::size_t n = static_cast<std::size_t>(m) * m * m * m;
  std::vector<cplx> sums(n, cplx(0, 0));
  std::vector<cplx> first(n, cplx(0, 0));
  std::vector<char> all_equal(n, 1);
  std::vector<int> counts(n, 0);
  const auto flat = [m](int i, int j, int k, int l) {
    return ((static_cast<std::size_t>(i) * m + j) * m + k) * m + l;
  };

  struct Given {
    int i, j, k, l;
    cplx v;
  };
  std::vector<Given> given;
  for (const auto& e : doc["entries"]) {
    if (!e.is_object() || !e.contains("i") || !e.contains("j") || !e.contains("k") ||
        !e.contains("l") || !e.contains("re") || !e.contains("im"))
      throw std::runtime_error("load_tensor: schema violation in entry");
    const int i = e["i"].get<int>(), j = e["j"].get<int>(), k = e["k"].get<int>(),
              l = e["l"].get<int>();
    if (i < 0 || i >= m || j < 0 || j >= m || k < 0 || k >= m || l < 0 || l >= m)
      throw std::runtime_error("load_tensor: index out of range for declared dimension");
    const cplx v(e["re"].get<double>(), e["im"].get<double>());
    if (!std::isfinite(v.real()) || !std::isfinite(v.imag()))
      throw std::runtime_error("load_tensor: non-finite entry");
    given.push_back({i, j, k, l, v});
  }

  // Each given entry pins its whole symmetry orbit. Accumulate the forced
  // value at every orbit position, then average.
  const auto scatter = [&](const Given& g) {
    const int i = g.i, j = g.j, k = g.k, l = g.l;
    const cplx v = g.v;
    const auto add = [&](int a, int b, int c, int d, cplx w) {
      const std::size_t p = flat(a, b, c, d);
      if (counts[p] == 0)
        first[p] = w;
      else if (w != first[p])
        all_equal[p] = 0;
      sums[p] += w;
      counts[p] += 1;
    };
    add(i, j, k, l, v);
    add(k, j, i, l, v);
    add(i, l, k, j, v);
    add(k, l, i, j, v);
    add(j, i, l, k, std::conj(v));
    add(j, k, l, i, std::conj(v));
    add(l, i, j, k, std::conj(v));
    add(l, k, j, i, std::conj(v));
  };
  for (const auto& g : given) scatter(g);

  // Agreeing contributions are kept bitwise (sequential averaging of equal
  // doubles is not exact); only genuine conflicts are averaged.
  std::vector<cplx> values(n, cplx(0, 0));
  for (std::size_t p = 0; p < n; ++p)
    if (counts[p] > 0)
      values[p] = all_equal[p] ? first[p] : sums[p] / static_cast<double>(counts[p]);

  double residual = 0.0;
  for (const auto& g : given)
    residual = std::max(residual, std::abs(values[flat(g.i, g.j, g.k, g.l)] - g.v));

  CurvatureTensor t = CurvatureTensor::from_components(m, std::move(values));
  residual = std::max(residual, t.symmetrization_residual());
  return {std::move(t), residual};
}

inline CurvatureTensor load_tensor(const std::string& path) {
  return load_tensor_with_residual(path).tensor;
}

}  // namespace kscal

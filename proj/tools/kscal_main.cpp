// kscal: k-scalar curvature laboratory.
//
// Subcommands:
//   moments   print exact sphere-moment tables with a Monte Carlo cross-check
//   scan      sample S_k over Haar-random planes and record the minimum
//   minimize  run the Grassmannian descent and report the critical plane
//   certify   scan + minimize + the full inequality certification suite

#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kscal/kscal.hpp"
#include "kscal/monte_carlo.hpp"

namespace {

struct CliOverrides {
  std::optional<std::string> model;
  std::optional<std::string> tensor_file;
  std::optional<std::vector<int>> ks;
  std::optional<std::vector<int>> ps;
  std::optional<std::string> sign;
  std::optional<int> samples;
  std::optional<int> probes;
  std::optional<int> restarts;
  std::optional<std::uint64_t> seed;
  std::optional<double> tol;
  std::optional<std::string> out_dir;
};

void add_common_flags(CLI::App* cmd, std::string& config_path, CliOverrides& ov) {
  cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
  cmd->add_option("--model", ov.model, "model description, e.g. constant_hsc:m=4,c=1");
  cmd->add_option("--tensor-file", ov.tensor_file, "curvature tensor JSON file");
  cmd->add_option("--k", ov.ks, "subspace dimensions to process")->delimiter(',');
  cmd->add_option("--p", ov.ps, "form degrees for the vanishing certificates")->delimiter(',');
  cmd->add_option("--sign", ov.sign, "positive | negative | auto");
  cmd->add_option("--samples", ov.samples, "plane samples for the scan");
  cmd->add_option("--probes", ov.probes, "probe pairs per certification check");
  cmd->add_option("--restarts", ov.restarts, "minimizer restarts");
  cmd->add_option("--seed", ov.seed, "root seed (all randomness derived from it)");
  cmd->add_option("--tol", ov.tol, "minimizer gradient tolerance");
  cmd->add_option("--out", ov.out_dir, "output directory for reports");
}

int load_and_run(const std::string& command, const std::string& config_path,
                 const CliOverrides& ov) {
  kscal::RunConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw std::runtime_error("cannot open config '" + config_path + "'");
      kscal::Json j;
      in >> j;
      config = kscal::RunConfig::from_json(j);
    }
    config.command = command;
    if (ov.model) config.model = *ov.model;
    if (ov.tensor_file) config.tensor_file = *ov.tensor_file;
    if (ov.ks) config.ks = *ov.ks;
    if (ov.ps) config.ps = *ov.ps;
    if (ov.sign) config.sign = *ov.sign;
    if (ov.samples) config.plane_samples = *ov.samples;
    if (ov.probes) config.probes = *ov.probes;
    if (ov.restarts) config.restarts = *ov.restarts;
    if (ov.seed) config.seed = *ov.seed;
    if (ov.tol) config.tol = *ov.tol;
    if (ov.out_dir) config.out_dir = *ov.out_dir;
    config.validate_or_throw();
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  }

  kscal::RunReport report = kscal::run_command(config);
  try {
    kscal::write_report_files(report, config);
  } catch (const std::exception& e) {
    std::cerr << "report write error: " << e.what() << "\n";
    return 1;
  }

  std::cout << "report: " << report.json_path << "\n";
  std::cout << "summary: " << report.csv_path << "\n";
  std::cout << "canonical_hash: " << report.canonical_hash << "\n";
  for (const auto& entry : report.document["results"])
    for (const auto& c : entry["checks"])
      std::cout << (c["pass"].get<bool>() ? "[PASS] " : "[FAIL] ") << entry.value("model", "")
                << " k=" << (entry.contains("k") ? std::to_string(entry["k"].get<int>()) : "?")
                << (c["p"].get<int>() > 0 ? " p=" + std::to_string(c["p"].get<int>()) : "")
                << " " << c["name"].get<std::string>() << " value=" << c["value"].get<double>()
                << " slack=" << c["slack"].get<double>() << "\n";
  return kscal::report_exit_code(report);
}

int run_moments(int k, int max_order, std::size_t samples, std::uint64_t seed) {
  const kscal::MomentTable table(k, max_order);
  std::cout << "sphere moments over C^" << k << " up to order " << max_order << "\n";
  std::cout << std::left << std::setw(28) << "monomial" << std::setw(16) << "exact"
            << std::setw(22) << "float" << std::setw(14) << "mc_mean" << std::setw(14)
            << "mc_stderr" << "dev/stderr\n";
  for (const auto& [alpha, value] : table.diagonal()) {
    int order = 0;
    for (int e : alpha) order += e;
    if (order == 0) continue;
    std::ostringstream mono;
    for (int i = 0; i < k; ++i)
      if (alpha[i] > 0) mono << "|z" << (i + 1) << "|^" << 2 * alpha[i];
    const auto f = [&](const kscal::Vector& z) {
      double v = 1.0;
      for (int i = 0; i < k; ++i)
        for (int e = 0; e < alpha[i]; ++e) v *= std::norm(z(i));
      return v;
    };
    const kscal::McEstimate mc = kscal::mc_average(f, k, samples, seed);
    const double exact = static_cast<double>(value);
    const double dev = mc.std_error > 0 ? std::abs(mc.mean - exact) / mc.std_error : 0.0;
    std::ostringstream rational;
    rational << value;
    std::cout << std::left << std::setw(28) << mono.str() << std::setw(16) << rational.str()
              << std::setw(22) << std::setprecision(12) << exact << std::setw(14)
              << std::setprecision(8) << mc.mean << std::setw(14) << mc.std_error
              << std::setprecision(3) << dev << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"kscal: interpolating scalar curvature laboratory"};
  app.require_subcommand(1);

  // moments
  auto* moments = app.add_subcommand("moments", "print exact moment tables + MC cross-check");
  int mk = 2, max_order = 4;
  std::size_t mc_samples = 100000;
  std::uint64_t mseed = 0;
  moments->add_option("--k", mk, "complex dimension of the sphere");
  moments->add_option("--max-order", max_order, "max total monomial order");
  moments->add_option("--samples", mc_samples, "Monte Carlo samples");
  moments->add_option("--seed", mseed, "Monte Carlo seed");

  std::string config_scan, config_min, config_cert;
  CliOverrides ov_scan, ov_min, ov_cert;
  auto* scan = app.add_subcommand("scan", "sample S_k over random planes");
  add_common_flags(scan, config_scan, ov_scan);
  auto* minimize = app.add_subcommand("minimize", "find the minimizing plane");
  add_common_flags(minimize, config_min, ov_min);
  auto* certify = app.add_subcommand("certify", "run the full certification suite");
  add_common_flags(certify, config_cert, ov_cert);

  CLI11_PARSE(app, argc, argv);

  try {
    if (moments->parsed()) {
      if (mk < 1) {
        std::cerr << "config error: k must be positive\n";
        return 2;
      }
      return run_moments(mk, max_order, mc_samples, mseed);
    }
    if (scan->parsed()) return load_and_run("scan", config_scan, ov_scan);
    if (minimize->parsed()) return load_and_run("minimize", config_min, ov_min);
    if (certify->parsed()) return load_and_run("certify", config_cert, ov_cert);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

#pragma once

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "kscal/certification.hpp"
#include "kscal/grassmann_min.hpp"
#include "kscal/kscalar.hpp"
#include "kscal/metric_catalog.hpp"
#include "kscal/version.hpp"

namespace kscal {

using Json = nlohmann::json;

constexpr const char* kReportSchema = "kscal-report/1";

struct RunConfig {
  std::string command = "certify";  // scan | minimize | certify
  std::string model = "constant_hsc:m=4,c=1";
  std::string tensor_file;  // when set, overrides model
  std::vector<int> ks = {2};
  std::vector<int> ps;  // empty means every p in [k, m]
  std::string sign = "positive";  // positive | negative | auto
  int plane_samples = 512;
  int point_samples = 1;
  int probes = 200;
  int restarts = 8;
  std::uint64_t seed = 0;
  double tol = 1e-8;  // minimizer gradient tolerance
  std::string out_dir = "runs";
  CertTolerances cert;

  Json to_json() const {
    return Json{{"command", command},
                {"model", model},
                {"tensor_file", tensor_file},
                {"k", ks},
                {"p", ps},
                {"sign", sign},
                {"plane_samples", plane_samples},
                {"point_samples", point_samples},
                {"probes", probes},
                {"restarts", restarts},
                {"seed", seed},
                {"tol", tol},
                {"out_dir", out_dir},
                {"identity_tol", cert.identity},
                {"slack_tol", cert.slack},
                {"strictness_tol", cert.strictness},
                {"criticality_tol", cert.criticality}};
  }

  static RunConfig from_json(const Json& j) {
    RunConfig c;
    const auto get = [&](const char* key, auto& field) {
      if (j.contains(key)) field = j.at(key).get<std::decay_t<decltype(field)>>();
    };
    get("command", c.command);
    get("model", c.model);
    get("tensor_file", c.tensor_file);
    get("k", c.ks);
    get("p", c.ps);
    get("sign", c.sign);
    get("plane_samples", c.plane_samples);
    get("point_samples", c.point_samples);
    get("probes", c.probes);
    get("restarts", c.restarts);
    get("seed", c.seed);
    get("tol", c.tol);
    get("out_dir", c.out_dir);
    get("identity_tol", c.cert.identity);
    get("slack_tol", c.cert.slack);
    get("strictness_tol", c.cert.strictness);
    get("criticality_tol", c.cert.criticality);
    return c;
  }

  /// Static sanity checks that do not need the model dimension.
  void validate_or_throw() const {
    if (!(tol > 0) || !(cert.identity > 0) || !(cert.slack > 0) || !(cert.strictness > 0) ||
        !(cert.criticality > 0))
      throw std::invalid_argument("config: all tolerances must be positive");
    if (plane_samples < 1 || point_samples < 1 || probes < 1 || restarts < 0)
      throw std::invalid_argument("config: sample counts must be positive");
    if (ks.empty()) throw std::invalid_argument("config: need at least one k");
    if (sign != "positive" && sign != "negative" && sign != "auto")
      throw std::invalid_argument("config: sign must be positive, negative or auto");
    if (command != "scan" && command != "minimize" && command != "certify")
      throw std::invalid_argument("config: unknown command '" + command + "'");
  }
};

struct RunReport {
  Json document;
  std::string canonical_hash;
  bool all_pass = true;
  bool had_failures = false;
  std::string json_path;
  std::string csv_path;
};

namespace detail {

inline std::string fnv1a_hex(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  std::ostringstream out;
  out << std::hex << std::setw(16) << std::setfill('0') << h;
  return out.str();
}

inline Json frame_to_json(const Matrix& f) {
  Json cols = Json::array();
  for (int j = 0; j < f.cols(); ++j) {
    Json col = Json::array();
    for (int i = 0; i < f.rows(); ++i) col.push_back({f(i, j).real(), f(i, j).imag()});
    cols.push_back(std::move(col));
  }
  return cols;
}

inline Json check_to_json(const CheckRecord& c, int p) {
  return Json{{"name", c.name},     {"anchor", c.anchor}, {"value", c.value},
              {"bound", c.bound},   {"slack", c.slack},   {"tol", c.tol},
              {"pass", c.pass},     {"probes", c.probes}, {"detail", c.detail},
              {"p", p}};
}

inline CheckRecord failure_check(const std::string& name, const std::string& why) {
  CheckRecord c;
  c.name = name;
  c.anchor = why;
  c.pass = false;
  c.detail = why;
  return c;
}

}  // namespace detail

inline std::string canonical_hash_of(const Json& body) {
  return detail::fnv1a_hex(body.dump());
}

/// Runs one command over every requested k and assembles the report document.
/// The canonical hash covers everything except wall-clock timings, so two
/// runs with identical config and seed hash identically.
inline RunReport run_command(const RunConfig& config) {
  config.validate_or_throw();
  RunReport report;
  Json results = Json::array();
  Json timings = Json::object();
  const auto t_start = std::chrono::steady_clock::now();

  CurvatureTensor tensor(1);
  std::string model_id;
  bool built = false;
  try {
    if (!config.tensor_file.empty()) {
      tensor = load_tensor(config.tensor_file);
      model_id = "file:path=" + config.tensor_file;
    } else {
      const MetricModel model = MetricModel::parse(config.model);
      tensor = model.build();
      model_id = model.id;
    }
    built = true;
  } catch (const std::exception& e) {
    Json entry = Json::object();
    entry["model"] = config.model;
    entry["checks"] = Json::array(
        {detail::check_to_json(detail::failure_check("model_build", e.what()), 0)});
    results.push_back(std::move(entry));
    report.had_failures = true;
    report.all_pass = false;
  }

  if (built) {
    const int m = tensor.dim();
    for (int k : config.ks) {
      Json entry = Json::object();
      entry["model"] = model_id;
      entry["k"] = k;
      Json checks = Json::array();
      const auto t_k = std::chrono::steady_clock::now();
      try {
        if (k < 1 || k > m)
          throw std::invalid_argument("config: k out of range for the model dimension");
        std::vector<int> ps = config.ps;
        if (ps.empty() && config.command == "certify")
          for (int p = k; p <= m; ++p) ps.push_back(p);
        for (int p : ps)
          if (p < k || p > m)
            throw std::invalid_argument("config: need k <= p <= m for every requested pair");

        // Scan (every command starts with a sampling certificate).
        const ScanResult scan =
            positivity_scan_tensor(tensor, k, config.plane_samples, config.seed, model_id);
        entry["scan"] = Json{{"planes", scan.plane_samples},
                             {"min", scan.min_value},
                             {"max_route_residual", scan.max_route_residual},
                             {"argmin_frame", detail::frame_to_json(scan.argmin_frame)}};
        if (scan.records.size() <= 256) {  // keep big scans summarized
          Json samples = Json::array();
          for (const auto& rec : scan.records)
            samples.push_back({{"value", rec.value}, {"route_residual", rec.route_residual}});
          entry["scan"]["samples"] = std::move(samples);
        }
        const bool routes_ok = scan.max_route_residual <= 1e-10;
        checks.push_back(detail::check_to_json(
            {"route_agreement", "S_k trace route = moment route", scan.max_route_residual, 0.0,
             1e-10 - scan.max_route_residual, 1e-10, routes_ok,
             static_cast<int>(scan.plane_samples), ""},
            0));
        if (!routes_ok) report.all_pass = false;

        if (config.command != "scan") {
          // Resolve the sign and minimize on the matching tensor.
          MinimizeOptions opts;
          opts.restarts = config.restarts;
          opts.seed = config.seed;
          opts.tol = config.tol;

          const auto minimize_with_warm = [&](const CurvatureTensor& rw,
                                              bool warm_from_scan) {
            MinimizeOptions o = opts;
            if (warm_from_scan) o.warm_starts.push_back(scan.argmin_frame);
            return minimize_sk(rw, k, o);
          };

          std::string resolved_sign = config.sign;
          CurvatureTensor negated = scaled_tensor(tensor, -1.0);
          std::optional<CriticalPlane> critical;
          if (config.sign == "positive" || config.sign == "auto") {
            CriticalPlane c = minimize_with_warm(tensor, true);
            if (c.value > 0) {
              critical = std::move(c);
              resolved_sign = "positive";
            } else if (config.sign == "positive") {
              checks.push_back(detail::check_to_json(
                  detail::failure_check("sign_precondition",
                                        "min S_k = " + std::to_string(c.value) +
                                            " is not positive"),
                  0));
            }
          }
          if (!critical && (config.sign == "negative" || config.sign == "auto")) {
            const ScanResult neg_scan = positivity_scan_tensor(
                negated, k, config.plane_samples, config.seed, model_id);
            MinimizeOptions o = opts;
            o.warm_starts.push_back(neg_scan.argmin_frame);
            CriticalPlane c = minimize_sk(negated, k, o);
            if (c.value > 0) {
              critical = std::move(c);
              resolved_sign = "negative";
            } else if (config.sign == "negative") {
              checks.push_back(detail::check_to_json(
                  detail::failure_check("sign_precondition",
                                        "max S_k = " + std::to_string(-c.value) +
                                            " is not negative"),
                  0));
            }
          }
          if (!critical && config.sign == "auto")
            checks.push_back(detail::check_to_json(
                detail::failure_check("sign_precondition", "S_k is indefinite for this model"),
                0));

          if (critical) {
            const CurvatureTensor& rw = (resolved_sign == "positive") ? tensor : negated;
            const double reported_value =
                (resolved_sign == "positive") ? critical->value : -critical->value;
            double sv_min = std::numeric_limits<double>::infinity();
            for (double sv : critical->second_variation_samples) sv_min = std::min(sv_min, sv);
            entry["minimize"] = Json{{"value", reported_value},
                                     {"sign", resolved_sign},
                                     {"gradient_norm", critical->gradient_norm},
                                     {"criticality_residual", critical->criticality_residual},
                                     {"converged", critical->converged},
                                     {"iterations", critical->iterations},
                                     {"restart_index", critical->restart_index},
                                     {"second_variation_min", sv_min},
                                     {"second_variation_samples",
                                      critical->second_variation_samples},
                                     {"frame", detail::frame_to_json(critical->plane.frame())}};
            checks.push_back(detail::check_to_json(
                {"minimizer_converged", "gradient descent reached tolerance",
                 critical->gradient_norm, config.tol, config.tol - critical->gradient_norm,
                 config.tol, critical->converged, 1, ""},
                0));
            checks.push_back(detail::check_to_json(
                {"second_variation_nonnegative", "second variation >= 0 at min plane", sv_min,
                 0.0, sv_min, config.cert.slack, sv_min >= -config.cert.slack,
                 static_cast<int>(critical->second_variation_samples.size()), ""},
                0));

            if (config.command == "certify") {
              if (k == 2) {
                CertificationReport pairs = certify_min_plane_pairs(
                    rw, *critical, config.probes, config.seed, config.cert);
                for (const auto& c : pairs.checks) checks.push_back(detail::check_to_json(c, 0));
              }
              CertificationReport subsets = certify_min_plane_subsets(
                  rw, *critical, config.probes, config.seed, config.cert);
              for (const auto& c : subsets.checks) checks.push_back(detail::check_to_json(c, 0));

              const Sign sign_tag =
                  (resolved_sign == "positive") ? Sign::Positive : Sign::Negative;
              for (int p : ps) {
                VanishingResult v =
                    vanishing_certificate(tensor, *critical, p, sign_tag, config.cert);
                for (const auto& c : v.report.checks)
                  checks.push_back(detail::check_to_json(c, p));
              }
            }
          } else {
            report.had_failures = true;
          }
        }
      } catch (const std::exception& e) {
        checks.push_back(
            detail::check_to_json(detail::failure_check("run_error", e.what()), 0));
        report.had_failures = true;
      }

      for (const auto& c : checks)
        if (!c.at("pass").get<bool>()) report.all_pass = false;
      entry["checks"] = std::move(checks);
      results.push_back(std::move(entry));
      timings["k" + std::to_string(k) + "_seconds"] =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - t_k).count();
    }
  }

  Json body = Json{{"schema", kReportSchema},
                   {"version", version()},
                   {"command", config.command},
                   {"config", config.to_json()},
                   {"results", std::move(results)}};
  report.canonical_hash = canonical_hash_of(body);
  report.document = std::move(body);
  report.document["canonical_hash"] = report.canonical_hash;
  timings["total_seconds"] =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  report.document["timings"] = std::move(timings);
  return report;
}

/// CSV summary: one row per (model, k, p, check).
inline std::string report_csv(const Json& document) {
  std::ostringstream out;
  out << "model,k,p,check,anchor,value,bound,slack,pass\n";
  out.precision(17);
  for (const auto& entry : document.at("results")) {
    const std::string model = entry.value("model", "");
    const std::string k = entry.contains("k") ? std::to_string(entry["k"].get<int>()) : "";
    for (const auto& c : entry.at("checks")) {
      const int p = c.value("p", 0);
      const auto quote = [](const std::string& s) { return "\"" + s + "\""; };
      out << quote(model) << ',' << k << ',' << (p > 0 ? std::to_string(p) : "") << ','
          << c.value("name", "") << ',' << quote(c.value("anchor", "")) << ','
          << c.value("value", 0.0) << ',' << c.value("bound", 0.0) << ','
          << c.value("slack", 0.0) << ',' << (c.value("pass", false) ? "true" : "false")
          << '\n';
    }
  }
  return out.str();
}

/// Writes the JSON report and the CSV summary under the configured output
/// directory, named by config hash and timestamp (append-only audit trail).
inline void write_report_files(RunReport& report, const RunConfig& config) {
  namespace fs = std::filesystem;
  fs::create_directories(config.out_dir);
  const std::string cfg_hash = detail::fnv1a_hex(config.to_json().dump()).substr(0, 8);
  const auto now = std::chrono::system_clock::now();
  const std::time_t tt = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      now.time_since_epoch()).count() % 1000;
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%d-%H%M%S", std::gmtime(&tt));
  std::ostringstream base;
  base << "run-" << cfg_hash << "-" << stamp << "-" << std::setw(3) << std::setfill('0') << ms;

  const fs::path json_path = fs::path(config.out_dir) / (base.str() + ".json");
  const fs::path csv_path = fs::path(config.out_dir) / (base.str() + ".csv");
  std::ofstream jf(json_path);
  jf << report.document.dump(2) << "\n";
  std::ofstream cf(csv_path);
  cf << report_csv(report.document);
  report.json_path = json_path.string();
  report.csv_path = csv_path.string();
}

/// 0: every requested check passed; 1: a numerical check failed or errored;
/// 2 is reserved for config parse errors (decided by the CLI).
inline int report_exit_code(const RunReport& report) {
  return (report.all_pass && !report.had_failures) ? 0 : 1;
}

}  // namespace kscal

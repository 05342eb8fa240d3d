#include "prechannel/cli.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <iomanip>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "prechannel/config.hpp"
#include "prechannel/error.hpp"
#include "prechannel/generators.hpp"
#include "prechannel/io.hpp"
#include "prechannel/report.hpp"

namespace prechannel {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonOptions {
  std::string config_path;
  std::string out_dir;
  std::string seed_text;
  std::size_t workers = 0;
  std::size_t grid_points = 0;
};

struct GenOptions {
  std::string family;
  int dim = 2;
  std::vector<std::string> params;
  std::string seed_text;
  std::string out_path;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::optional<std::uint64_t> seed_flag(const std::string& text) {
  if (text.empty()) return std::nullopt;
  auto seed = parse_seed(text);
  if (!seed) throw ConfigError("--seed expects an unsigned 64-bit integer, got \"" + text + "\"");
  return seed;
}

LoadedConfig load(const CommonOptions& o) {
  ConfigOverrides ov;
  ov.seed = seed_flag(o.seed_text);
  if (o.grid_points > 0) ov.grid_points = o.grid_points;
  return load_config(o.config_path, ov);
}

json parse_param_value(const std::string& value) {
  if (!value.empty() && value.front() == '@') return read_json_file(value.substr(1));
  try {
    return json::parse(value);
  } catch (const json::parse_error&) {
    return value;
  }
}

json params_from_flags(const std::vector<std::string>& flags) {
  json params = json::object();
  for (const std::string& kv : flags) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw ConfigError("--param expects key=value, got \"" + kv + "\"");
    params[kv.substr(0, eq)] = parse_param_value(kv.substr(eq + 1));
  }
  return params;
}

void write_manifest(const fs::path& path, RunManifest manifest, const Stopwatch& clock) {
  manifest.wall_clock_seconds = clock.seconds();
  write_text_file(path, manifest_to_json(manifest).dump(2) + "\n");
}

fs::path prepare_out_dir(const std::string& dir) {
  if (dir.empty()) throw ConfigError("--out DIR is required");
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir + ": " + ec.message());
  return dir;
}

int cmd_gen_ensemble(const GenOptions& o, std::ostream& out) {
  const Stopwatch clock;
  std::optional<std::uint64_t> seed = seed_flag(o.seed_text);
  const std::uint64_t resolved = resolve_seed(seed, json::object());
  const Ensemble e = generate_ensemble(o.family, o.dim, params_from_flags(o.params), resolved);
  const fs::path path = o.out_path;
  if (path.has_parent_path()) prepare_out_dir(path.parent_path().string());
  write_text_file(path, ensemble_to_json(e).dump(2) + "\n");
  fs::path manifest_path = path;
  manifest_path.replace_extension(".manifest.json");
  RunManifest manifest{"gen-ensemble", "", "", resolved, {path.string()}};
  write_manifest(manifest_path, manifest, clock);
  out << "wrote " << path.string() << " (" << e.size() << " atoms, dim " << e.dim() << ")\n";
  return kExitOk;
}

struct VerifyRow {
  std::string name;
  double residual;
  double threshold;
  bool passed;
  std::string detail;
};

int cmd_verify(const CommonOptions& o, std::ostream& out) {
  const Stopwatch clock;
  const LoadedConfig cfg = load(o);
  const ExperimentConfig& ex = cfg.experiment;
  std::vector<VerifyRow> rows;
  auto add_lemma = [&rows](const LemmaReport& r, const std::string& label) {
    rows.push_back({label, r.residual, r.threshold, r.passed, r.detail});
  };
  add_lemma(verify_lemma_suite(ex.ensemble, cfg.second, LemmaMode::kIntegration, ex.x), "lemma integration");
  add_lemma(verify_lemma_suite(ex.ensemble, cfg.second, LemmaMode::kAdjoint, ex.x), "lemma adjoint");
  add_lemma(verify_lemma_suite(ex.ensemble, cfg.second, LemmaMode::kIndependence, ex.x), "lemma independence");
  add_lemma(verify_lemma_suite(centered(ex.ensemble), cfg.second, LemmaMode::kSuperop, ex.x), "lemma superop");
  add_lemma(verify_lemma_suite(ex.ensemble, cfg.second, LemmaMode::kChebyshev, ex.x), "lemma chebyshev");

  for (double t : ex.verify_times) {
    for (std::size_t n = 1; n <= ex.verify_max_n; ++n) {
      std::ostringstream tag;
      tag << "n=" << n << " t=" << t;
      const DiagonalReport d = verify_diagonal_identity(ex.ensemble, n, t);
      rows.push_back({"diagonal " + tag.str(), d.residual, kProductTolerance, d.residual <= kProductTolerance,
                      std::to_string(d.terms) + " outcomes"});
      rows.push_back({"cross-terms " + tag.str(), d.max_cross_term, kProductTolerance,
                      d.max_cross_term <= kProductTolerance, ""});
      const auto c = composition_chebyshev_exact(ex.ensemble, ex.x, n, t, ex.eps);
      const double eps2 = ex.eps * ex.eps;
      const double residual = std::abs(c.bound_enumerated - c.bound_recursion) * eps2;
      const bool dominated = c.exceedance <= c.bound_recursion + kLinearTolerance;
      rows.push_back({"centered-chebyshev " + tag.str(), residual, kProductTolerance,
                      residual <= kProductTolerance && dominated,
                      "Pr=" + format_double(c.exceedance) + " bound=" + format_double(c.bound_recursion)});
    }
  }

  bool all = true;
  out << std::left << std::setw(32) << "check" << std::setw(14) << "residual" << std::setw(12) << "threshold"
      << "status\n";
  for (const VerifyRow& r : rows) {
    all = all && r.passed;
    std::ostringstream res;
    res << std::setprecision(3) << std::scientific << r.residual;
    std::ostringstream thr;
    thr << std::setprecision(0) << std::scientific << r.threshold;
    out << std::left << std::setw(32) << r.name << std::setw(14) << res.str() << std::setw(12) << thr.str()
        << (r.passed ? "ok" : "FAIL");
    if (!r.detail.empty()) out << "  (" << r.detail << ")";
    out << '\n';
  }
  out << (all ? "all identities hold\n" : "verification FAILED\n");

  if (!o.out_dir.empty()) {
    const fs::path dir = prepare_out_dir(o.out_dir);
    json report = json::array();
    for (const VerifyRow& r : rows) {
      report.push_back({{"check", r.name}, {"residual", r.residual}, {"threshold", r.threshold}, {"passed", r.passed}});
    }
    const fs::path path = dir / "verify.json";
    write_text_file(path, json{{"checks", report}, {"passed", all}, {"config_hash", cfg.hash}}.dump(2) + "\n");
    write_manifest(dir / "verify.manifest.json",
                   {"verify", o.config_path, cfg.hash, ex.seed.root, {path.string()}}, clock);
  }
  return all ? kExitOk : kExitVerificationFailed;
}

int cmd_sweep(const CommonOptions& o, std::ostream& out) {
  const Stopwatch clock;
  const LoadedConfig cfg = load(o);
  const fs::path dir = prepare_out_dir(o.out_dir);
  SweepResult sweep = run_lln_sweep(cfg.experiment, o.workers);
  sweep.config_hash = cfg.hash;
  const fs::path csv = dir / "sweep.csv";
  const fs::path js = dir / "sweep.json";
  write_text_file(csv, sweep_to_csv(sweep));
  write_text_file(js, sweep_to_json(sweep).dump(2) + "\n");
  write_manifest(dir / "sweep.manifest.json",
                 {"sweep", o.config_path, cfg.hash, cfg.experiment.seed.root, {csv.string(), js.string()}}, clock);
  out << sweep_to_csv(sweep);
  return kExitOk;
}

int cmd_chernoff(const CommonOptions& o, std::ostream& out) {
  const Stopwatch clock;
  const LoadedConfig cfg = load(o);
  const ExperimentConfig& ex = cfg.experiment;
  const fs::path dir = prepare_out_dir(o.out_dir);
  std::vector<std::string> outputs;
  std::ostringstream table;
  table << "n,chernoff_error,ratio\n";
  json series = json::array();
  double previous = 0.0;
  for (std::size_t n : ex.n_schedule) {
    const auto traj = chernoff_trajectory(ex.ensemble, ex.x, n, ex.grid);
    const double err = *std::max_element(traj.begin(), traj.end());
    table << n << ',' << format_double(err) << ',' << (previous > 0.0 ? format_double(err / previous) : "NA") << '\n';
    previous = err;
    const fs::path traj_path = dir / ("chernoff_n" + std::to_string(n) + ".csv");
    write_text_file(traj_path, trajectory_to_csv(ex.grid.points(), traj));
    outputs.push_back(traj_path.string());
    series.push_back({{"n", n}, {"chernoff_error", err}});
  }
  const fs::path csv = dir / "chernoff.csv";
  const fs::path js = dir / "chernoff.json";
  write_text_file(csv, table.str());
  write_text_file(js, json{{"series", series}, {"metadata", {{"config_hash", cfg.hash}, {"seed", ex.seed.root}}}}.dump(2) + "\n");
  outputs.insert(outputs.begin(), {csv.string(), js.string()});
  write_manifest(dir / "chernoff.manifest.json", {"chernoff", o.config_path, cfg.hash, ex.seed.root, outputs}, clock);
  out << table.str();
  return kExitOk;
}

int cmd_probe(const CommonOptions& o, std::ostream& out) {
  const Stopwatch clock;
  const LoadedConfig cfg = load(o);
  const ExperimentConfig& ex = cfg.experiment;
  const fs::path dir = prepare_out_dir(o.out_dir);
  std::vector<ProbeResult> probes;
  for (double p : ex.probe_exponents) {
    probes.push_back(conjecture_probe(ex.ensemble, ex.x, ex.n_schedule, ex.grid, SchattenExponent(p), ex.seed, ex.trials,
                                      o.workers));
  }
  const fs::path csv = dir / "probe.csv";
  const fs::path js = dir / "probe.json";
  write_text_file(csv, probe_to_csv(probes));
  write_text_file(js, probe_to_json(probes, cfg.hash, ex.seed.root).dump(2) + "\n");
  write_manifest(dir / "probe.manifest.json",
                 {"probe-conjecture", o.config_path, cfg.hash, ex.seed.root, {csv.string(), js.string()}}, clock);
  out << "# " << ProbeResult::kLabel << '\n' << probe_to_csv(probes);
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& o, bool needs_out) {
  cmd->add_option("--config", o.config_path, "experiment config JSON")->required();
  auto* out_opt = cmd->add_option("--out", o.out_dir, "output directory");
  if (needs_out) out_opt->required();
  cmd->add_option("--seed", o.seed_text, "root seed (overrides config and " + std::string(kSeedEnvVar) + ")");
  cmd->add_option("--workers", o.workers, "worker threads (0 = available parallelism)");
  cmd->add_option("--grid-points", o.grid_points, "override the number of uniform grid points");
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Law-of-large-numbers laboratory for random pre-channels", "prechannel-lln"};
  app.require_subcommand(1);

  GenOptions gen;
  auto* gen_cmd = app.add_subcommand("gen-ensemble", "generate and serialize an ensemble");
  gen_cmd->add_option("--family", gen.family, "two-point | ginibre | lindblad-like | uniform-atoms")->required();
  gen_cmd->add_option("--dim", gen.dim, "Hilbert space dimension");
  gen_cmd->add_option("--param", gen.params, "family parameter key=value (value is JSON, or @file.json)");
  gen_cmd->add_option("--seed", gen.seed_text, "generator seed");
  gen_cmd->add_option("--out", gen.out_path, "output ensemble JSON path")->required();

  CommonOptions common;
  auto* verify_cmd = app.add_subcommand("verify", "run the exact identity suite");
  add_common(verify_cmd, common, false);
  auto* sweep_cmd = app.add_subcommand("sweep", "Monte-Carlo LLN sweep");
  add_common(sweep_cmd, common, true);
  auto* chernoff_cmd = app.add_subcommand("chernoff", "exact product-formula error");
  add_common(chernoff_cmd, common, true);
  auto* probe_cmd = app.add_subcommand("probe-conjecture", "Schatten-p deviation medians");
  add_common(probe_cmd, common, true);

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*gen_cmd) return cmd_gen_ensemble(gen, out);
    if (*verify_cmd) return cmd_verify(common, out);
    if (*sweep_cmd) return cmd_sweep(common, out);
    if (*chernoff_cmd) return cmd_chernoff(common, out);
    if (*probe_cmd) return cmd_probe(common, out);
  } catch (const EnumerationGuardError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    err << "invalid input: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace prechannel

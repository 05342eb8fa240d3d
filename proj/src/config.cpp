#include "prechannel/config.hpp"

#include <charconv>
#include <cstdlib>

#include "prechannel/error.hpp"
#include "prechannel/generators.hpp"
#include "prechannel/io.hpp"

namespace prechannel {

using nlohmann::json;

namespace {

Ensemble ensemble_from_spec(const json& spec, const std::filesystem::path& base_dir) {
  if (spec.is_string()) {
    std::filesystem::path path = spec.get<std::string>();
    if (path.is_relative()) path = base_dir / path;
    return ensemble_from_json(read_json_file(path));
  }
  if (spec.is_object() && spec.contains("atoms")) return ensemble_from_json(spec);
  if (spec.is_object() && spec.contains("family")) {
    if (!spec.contains("dim") || !spec["dim"].is_number_integer()) throw ConfigError("generator spec needs \"dim\"");
    return generate_ensemble(spec["family"].get<std::string>(), spec["dim"].get<int>(), spec.value("params", json::object()),
                             spec.value("seed", std::uint64_t{0}));
  }
  throw ConfigError("\"ensemble\" must be a path, an inline ensemble or a generator spec");
}

Vector vector_from_json(const json& j, int dim) {
  const Matrix m = matrix_from_json(j, dim, 1);
  return m.col(0);
}

Op x_from_spec(const json& spec, int dim) {
  if (spec.is_null()) return Op::unit(dim, 0, 0);
  if (spec.is_object() && spec.contains("rank1")) {
    const json& r = spec["rank1"];
    if (!r.contains("u") || !r.contains("v")) throw ConfigError("rank1 operator needs \"u\" and \"v\"");
    return Op(vector_from_json(r["u"], dim) * vector_from_json(r["v"], dim).adjoint());
  }
  return op_from_json(spec);
}

TimeGrid grid_from_spec(const json& spec, const std::optional<std::size_t>& points_override) {
  const json g = spec.is_null() ? json::object() : spec;
  const double horizon = g.value("T", 1.0);
  try {
    if (points_override) return TimeGrid::uniform(horizon, *points_override);
    if (g.contains("points")) return TimeGrid(horizon, g["points"].get<std::vector<double>>());
    return TimeGrid::uniform(horizon, g.value("count", std::size_t{65}));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid grid: ") + e.what());
  }
}

}  // namespace

std::optional<std::uint64_t> parse_seed(const std::string& text) {
  std::uint64_t value = 0;
  const char* first = text.data();
  const char* last = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc{} || ptr != last || text.empty()) return std::nullopt;
  return value;
}

std::uint64_t resolve_seed(std::optional<std::uint64_t> override_seed, const json& config) {
  if (override_seed) return *override_seed;
  if (config.contains("seed")) {
    const json& seed = config["seed"];
    if (!seed.is_number_integer() || (!seed.is_number_unsigned() && seed.get<std::int64_t>() < 0)) {
      throw ConfigError("\"seed\" must be a non-negative integer");
    }
    return config["seed"].get<std::uint64_t>();
  }
  if (const char* env = std::getenv(kSeedEnvVar)) {
    auto parsed = parse_seed(env);
    if (!parsed) throw ConfigError(std::string(kSeedEnvVar) + " is not an unsigned integer");
    return *parsed;
  }
  return 0;
}

LoadedConfig parse_config(const json& j, const std::filesystem::path& base_dir, const ConfigOverrides& overrides) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  if (!j.contains("ensemble")) throw ConfigError("config is missing \"ensemble\"");
  try {
    Ensemble ensemble = ensemble_from_spec(j["ensemble"], base_dir);
    Ensemble second = j.contains("ensemble2") ? ensemble_from_spec(j["ensemble2"], base_dir) : ensemble;
    if (second.dim() != ensemble.dim()) throw ConfigError("\"ensemble2\" must share the dimension of \"ensemble\"");
    const int dim = ensemble.dim();
    Op x = x_from_spec(j.value("x", json()), dim);

    ExperimentConfig cfg{.ensemble = std::move(ensemble), .x = std::move(x)};
    cfg.p = SchattenExponent(j.value("p", 2.0));
    cfg.grid = grid_from_spec(j.value("grid", json()), overrides.grid_points);
    cfg.n_schedule = j.value("n_schedule", std::vector<std::size_t>{8, 32, 128, 512});
    cfg.trials = j.value("trials", std::size_t{200});
    cfg.eps = j.value("eps", 0.1);
    cfg.seed = SeedSpec{resolve_seed(overrides.seed, j)};
    const json verify = j.value("verify", json::object());
    cfg.verify_times = verify.value("times", cfg.verify_times);
    cfg.verify_max_n = verify.value("max_n", cfg.verify_max_n);
    cfg.probe_exponents = j.value("probe", json::object()).value("p", cfg.probe_exponents);
    if (cfg.verify_times.empty()) throw ConfigError("verify.times must not be empty");
    validate(cfg);

    json resolved = {
        {"ensemble", ensemble_to_json(cfg.ensemble)},
        {"ensemble2", ensemble_to_json(second)},
        {"x", op_to_json(cfg.x)},
        {"p", cfg.p.value()},
        {"grid", {{"T", cfg.grid.horizon()}, {"points", cfg.grid.points()}}},
        {"n_schedule", cfg.n_schedule},
        {"trials", cfg.trials},
        {"eps", cfg.eps},
        {"seed", cfg.seed.root},
        {"verify", {{"times", cfg.verify_times}, {"max_n", cfg.verify_max_n}}},
        {"probe", {{"p", cfg.probe_exponents}}},
    };
    std::string hash = sha256_hex(resolved.dump());
    return LoadedConfig{std::move(cfg), std::move(second), std::move(resolved), std::move(hash)};
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config schema error: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid config value: ") + e.what());
  }
}

LoadedConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides) {
  return parse_config(read_json_file(path), path.parent_path(), overrides);
}

}  // namespace prechannel

#pragma once

// ExperimentConfig ingestion.
//
// {
//   "ensemble":  "file.json" | { "dim", "atoms", ... } | { "family", "dim", "params", "seed" },
//   "ensemble2": optional, same forms; the independent law B used by verify
//   "x":         { "dim", "entries" } | { "rank1": { "u": [[re, im], ...], "v": [...] } },
//   "p":         2,
//   "grid":      { "T": 1.0, "count": 65 } | { "T": 1.0, "points": [...] },
//   "n_schedule": [8, 32, 128, 512],
//   "trials":    200,
//   "eps":       0.1,
//   "seed":      2024,                        optional
//   "verify":    { "times": [0.25, 1.0], "max_n": 3 },
//   "probe":     { "p": [1, 1.5, 2] }
// }
//
// Relative ensemble paths resolve against the config file's directory.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "prechannel/experiments.hpp"

namespace prechannel {

inline constexpr const char* kSeedEnvVar = "PRECHANNEL_LLN_SEED";

struct ConfigOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> grid_points;
};

struct LoadedConfig {
  ExperimentConfig experiment;
  /// The law B for two-ensemble identities; defaults to an independent copy of A.
  Ensemble second;
  /// Fully resolved configuration (ensembles inlined, seed fixed).
  nlohmann::json resolved;
  /// SHA-256 of resolved.dump().
  std::string hash;
};

/// Seed precedence: override, then config "seed", then PRECHANNEL_LLN_SEED, then 0.
std::uint64_t resolve_seed(std::optional<std::uint64_t> override_seed, const nlohmann::json& config);

LoadedConfig parse_config(const nlohmann::json& j, const std::filesystem::path& base_dir,
                          const ConfigOverrides& overrides = {});

LoadedConfig load_config(const std::filesystem::path& path, const ConfigOverrides& overrides = {});

/// Parses a decimal unsigned 64-bit seed; nullopt on malformed text.
std::optional<std::uint64_t> parse_seed(const std::string& text);

}  // namespace prechannel

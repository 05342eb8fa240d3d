#pragma once

// Tabular and JSON renderings of experiment results. Numbers use %.17g.

#include <string>
#include <vector>

#include <json.hpp>

#include "prechannel/experiments.hpp"

namespace prechannel {

inline constexpr const char* kVersion = "0.1.0";

/// Header: n,median,q90,max,exceedance,centered_median,centered_exceedance,
/// chernoff_error,bound,slope. The slope column repeats the fitted value, or
/// NA when no rate applies.
std::string sweep_to_csv(const SweepResult& sweep);
nlohmann::json sweep_to_json(const SweepResult& sweep);

/// Rows of (t, value).
std::string trajectory_to_csv(const std::vector<double>& ts, const std::vector<double>& values);

/// Rows of (p, n, median).
std::string probe_to_csv(const std::vector<ProbeResult>& probes);
nlohmann::json probe_to_json(const std::vector<ProbeResult>& probes, const std::string& config_hash,
                             std::uint64_t seed);

struct RunManifest {
  std::string command;
  std::string config_path;
  std::string config_hash;
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  double wall_clock_seconds = 0.0;
  std::string version = kVersion;
};

nlohmann::json manifest_to_json(const RunManifest& m);

}  // namespace prechannel

#pragma once

// JSON encodings of operators, pre-channels and ensembles.
//
//   Op          { "dim": d, "entries": [[re, im], ...] }        row-major, d*d pairs
//   PreChannel  { "dim": d, "rep": [[re, im], ...] }            row-major, d^4 pairs
//   Ensemble    { "dim": d, "atoms": [{ "prob": p, "rep": [...], "norm22": {...} }],
//                 "generator": { "family", "params", "seed" } }  generator optional

#include <filesystem>
#include <string>

#include <json.hpp>

#include "prechannel/ensemble.hpp"

namespace prechannel {

nlohmann::json matrix_to_json(const Matrix& m);
/// Reads a row-major list of rows*cols [re, im] pairs.
Matrix matrix_from_json(const nlohmann::json& j, Eigen::Index rows, Eigen::Index cols);

nlohmann::json op_to_json(const Op& x);
Op op_from_json(const nlohmann::json& j);

nlohmann::json prechannel_to_json(const PreChannel& u);
PreChannel prechannel_from_json(const nlohmann::json& j);

nlohmann::json ensemble_to_json(const Ensemble& e);
/// Throws ConfigError on schema or invariant violations.
Ensemble ensemble_from_json(const nlohmann::json& j);

nlohmann::json read_json_file(const std::filesystem::path& path);
/// Writes `text` to `path`; throws std::runtime_error naming the path on failure.
void write_text_file(const std::filesystem::path& path, const std::string& text);

/// Lowercase hex SHA-256 of the bytes of `text`.
std::string sha256_hex(const std::string& text);

/// %.17g formatting, for exact round trips.
std::string format_double(double v);

}  // namespace prechannel

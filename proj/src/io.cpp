#include "prechannel/io.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <openssl/evp.h>

#include "prechannel/error.hpp"

namespace prechannel {

using nlohmann::json;

json matrix_to_json(const Matrix& m) {
  json out = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out.push_back({m(r, c).real(), m(r, c).imag()});
  }
  return out;
}

Matrix matrix_from_json(const json& j, Eigen::Index rows, Eigen::Index cols) {
  if (!j.is_array() || static_cast<Eigen::Index>(j.size()) != rows * cols) {
    throw ConfigError("expected a list of " + std::to_string(rows * cols) + " [re, im] pairs");
  }
  Matrix m(rows, cols);
  for (Eigen::Index k = 0; k < rows * cols; ++k) {
    const json& e = j[static_cast<std::size_t>(k)];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw ConfigError("entry " + std::to_string(k) + " is not a [re, im] pair");
    }
    m(k / cols, k % cols) = Complex(e[0].get<double>(), e[1].get<double>());
  }
  return m;
}

namespace {

int read_dim(const json& j) {
  if (!j.is_object() || !j.contains("dim") || !j["dim"].is_number_integer()) {
    throw ConfigError("missing integer field \"dim\"");
  }
  const int dim = j["dim"].get<int>();
  if (dim < 1) throw ConfigError("\"dim\" must be >= 1");
  return dim;
}

}  // namespace

json op_to_json(const Op& x) { return {{"dim", x.dim()}, {"entries", matrix_to_json(x.matrix())}}; }

Op op_from_json(const json& j) {
  const int dim = read_dim(j);
  if (!j.contains("entries")) throw ConfigError("operator is missing \"entries\"");
  try {
    return Op(matrix_from_json(j["entries"], dim, dim));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid operator: ") + e.what());
  }
}

json prechannel_to_json(const PreChannel& u) { return {{"dim", u.dim()}, {"rep", matrix_to_json(u.rep())}}; }

PreChannel prechannel_from_json(const json& j) {
  const int dim = read_dim(j);
  if (!j.contains("rep")) throw ConfigError("pre-channel is missing \"rep\"");
  try {
    return PreChannel(dim, matrix_from_json(j["rep"], dim * dim, dim * dim));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid pre-channel: ") + e.what());
  }
}

json ensemble_to_json(const Ensemble& e) {
  json atoms = json::array();
  for (const Atom& a : e.atoms()) {
    const NormEstimate n = induced_norm(a.channel, SchattenExponent(2.0), SchattenExponent(2.0));
    atoms.push_back({{"prob", a.prob}, {"rep", matrix_to_json(a.channel.rep())}, {"norm22", {{"value", n.value}, {"exact", n.exact}}}});
  }
  json out = {{"dim", e.dim()}, {"atoms", std::move(atoms)}};
  if (e.generator()) {
    out["generator"] = {{"family", e.generator()->family}, {"params", e.generator()->params}, {"seed", e.generator()->seed}};
  }
  return out;
}

Ensemble ensemble_from_json(const json& j) {
  const int dim = read_dim(j);
  if (!j.contains("atoms") || !j["atoms"].is_array() || j["atoms"].empty()) {
    throw ConfigError("ensemble needs a nonempty \"atoms\" array");
  }
  std::vector<Atom> atoms;
  for (const json& a : j["atoms"]) {
    if (!a.is_object() || !a.contains("prob") || !a["prob"].is_number()) {
      throw ConfigError("ensemble atom is missing numeric \"prob\"");
    }
    if (!a.contains("rep")) throw ConfigError("ensemble atom is missing \"rep\"");
    Matrix rep = matrix_from_json(a["rep"], dim * dim, dim * dim);
    try {
      atoms.push_back({PreChannel(dim, std::move(rep)), a["prob"].get<double>()});
    } catch (const std::invalid_argument& e) {
      throw ConfigError(std::string("invalid ensemble atom: ") + e.what());
    }
  }
  std::optional<GeneratorInfo> gen;
  if (j.contains("generator") && !j["generator"].is_null()) {
    const json& g = j["generator"];
    gen = GeneratorInfo{g.value("family", std::string{}), g.value("params", json::object()),
                        g.value("seed", std::uint64_t{0})};
  }
  return Ensemble(std::move(atoms), std::move(gen));
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
  if (!out.flush()) throw std::runtime_error("write failed for " + path.string());
}

std::string sha256_hex(const std::string& text) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string out;
  out.reserve(2 * len);
  static constexpr char kHex[] = "0123456789abcdef";
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[digest[i] >> 4]);
    out.push_back(kHex[digest[i] & 0xf]);
  }
  return out;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  std::array<char, 32> buf{};
  std::snprintf(buf.data(), buf.size(), "%.17g", v);
  return buf.data();
}

}  // namespace prechannel

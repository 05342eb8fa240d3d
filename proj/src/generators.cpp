#include "prechannel/generators.hpp"

#include <algorithm>
#include <random>

#include "prechannel/error.hpp"
#include "prechannel/io.hpp"

namespace prechannel {

using nlohmann::json;

namespace {

Matrix gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = Complex(normal(rng), normal(rng));
  return m;
}

Op hermitian_from(std::mt19937_64& rng, int dim) {
  const Matrix g = gaussian_matrix(dim, dim, rng);
  return Op(0.5 * (g + g.adjoint()));
}

PreChannel rescaled(const PreChannel& u, double budget) {
  const double n = norm22(u);
  if (n == 0.0) throw ConfigError("generated atom is zero and cannot be rescaled");
  return Complex(budget / n) * u;
}

double number_param(const json& params, const char* key, double fallback) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number()) throw ConfigError(std::string("parameter \"") + key + "\" must be a number");
  return params[key].get<double>();
}

int count_param(const json& params, const char* key, int fallback, int lo, int hi) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_number_integer()) throw ConfigError(std::string("parameter \"") + key + "\" must be an integer");
  const int v = params[key].get<int>();
  if (v < lo || v > hi) {
    throw ConfigError(std::string("parameter \"") + key + "\" must lie in [" + std::to_string(lo) + ", " +
                      std::to_string(hi) + "]");
  }
  return v;
}

std::string string_param(const json& params, const char* key, const std::string& fallback,
                         std::initializer_list<const char*> allowed) {
  if (!params.contains(key)) return fallback;
  if (!params[key].is_string()) throw ConfigError(std::string("parameter \"") + key + "\" must be a string");
  auto v = params[key].get<std::string>();
  if (std::none_of(allowed.begin(), allowed.end(), [&v](const char* a) { return v == a; })) {
    throw ConfigError("unsupported value \"" + v + "\" for parameter \"" + key + "\"");
  }
  return v;
}

std::vector<double> draw_probs(const json& params, int atoms, std::mt19937_64& rng) {
  const auto mode = string_param(params, "probs", "uniform", {"uniform", "random"});
  std::vector<double> probs(atoms, 1.0 / atoms);
  if (mode == "random") {
    // Flat Dirichlet via normalized exponentials.
    std::exponential_distribution<double> expo(1.0);
    double total = 0.0;
    for (double& p : probs) total += (p = expo(rng));
    for (double& p : probs) p /= total;
  }
  return probs;
}

double positive_budget(const json& params) {
  const double budget = number_param(params, "norm_budget", 1.0);
  if (!(budget > 0.0)) throw ConfigError("parameter \"norm_budget\" must be > 0");
  return budget;
}

Ensemble two_point(int dim, const json& params, std::mt19937_64& rng) {
  const double a = number_param(params, "a", 1.0);
  if (!(a > 0.0)) throw ConfigError("parameter \"a\" must be > 0");
  const auto direction = string_param(params, "direction", "commutator", {"commutator", "ginibre"});
  PreChannel unit = PreChannel::identity(1);
  if (dim > 1) {
    unit = direction == "commutator" ? rescaled(commutator_generator(hermitian_from(rng, dim)), 1.0)
                                     : rescaled(PreChannel(dim, gaussian_matrix(dim * dim, dim * dim, rng)), 1.0);
  }
  const PreChannel atom = Complex(a) * unit;
  return Ensemble({{atom, 0.5}, {-atom, 0.5}});
}

Ensemble ginibre(int dim, const json& params, std::mt19937_64& rng) {
  const int atoms = count_param(params, "atoms", 3, 1, kMaxAtoms);
  const double budget = positive_budget(params);
  const auto probs = draw_probs(params, atoms, rng);
  std::vector<Atom> out;
  for (int k = 0; k < atoms; ++k) {
    out.push_back({rescaled(PreChannel(dim, gaussian_matrix(dim * dim, dim * dim, rng)), budget), probs[k]});
  }
  return Ensemble(std::move(out));
}

Ensemble lindblad_like(int dim, const json& params, std::mt19937_64& rng) {
  // Every commutator and dissipator vanishes on scalars.
  if (dim < 2) throw ConfigError("lindblad-like needs dim >= 2");
  const int atoms = count_param(params, "atoms", 3, 1, kMaxAtoms);
  const int jumps = count_param(params, "jumps", 1, 0, 16);
  const double budget = positive_budget(params);
  const auto probs = draw_probs(params, atoms, rng);
  std::vector<Atom> out;
  for (int k = 0; k < atoms; ++k) {
    const Op h = hermitian_from(rng, dim);
    std::vector<Op> ls;
    for (int j = 0; j < jumps; ++j) ls.emplace_back(gaussian_matrix(dim, dim, rng));
    out.push_back({rescaled(lindblad_generator(h, ls), budget), probs[k]});
  }
  return Ensemble(std::move(out));
}

Ensemble uniform_atoms(int dim, const json& params) {
  if (!params.contains("reps") || !params["reps"].is_array() || params["reps"].empty()) {
    throw ConfigError("uniform-atoms needs a nonempty \"reps\" array");
  }
  const auto& reps = params["reps"];
  if (reps.size() > static_cast<std::size_t>(kMaxAtoms)) throw ConfigError("too many atoms for uniform-atoms");
  std::vector<Atom> out;
  for (const json& r : reps) {
    out.push_back({PreChannel(dim, matrix_from_json(r, dim * dim, dim * dim)), 1.0 / static_cast<double>(reps.size())});
  }
  return Ensemble(std::move(out));
}

}  // namespace

const std::vector<std::string>& ensemble_families() {
  static const std::vector<std::string> families{"two-point", "ginibre", "lindblad-like", "uniform-atoms"};
  return families;
}

Op random_hermitian(int dim, std::uint64_t seed) {
  std::mt19937_64 rng(mix64(seed));
  return hermitian_from(rng, dim);
}

PreChannel commutator_generator(const Op& h) {
  const Op id = Op::identity(h.dim());
  const Complex i(0.0, 1.0);
  return from_left_right(-i * h, id) + from_left_right(id, i * h);
}

PreChannel lindblad_generator(const Op& h, const std::vector<Op>& jumps) {
  const Op id = Op::identity(h.dim());
  PreChannel gen = commutator_generator(h);
  for (const Op& l : jumps) {
    const Op ldl = Complex(-0.5) * (l.adjoint() * l);
    gen = gen + from_left_right(l, l.adjoint()) + from_left_right(ldl, id) + from_left_right(id, ldl);
  }
  return gen;
}

Ensemble generate_ensemble(const std::string& family, int dim, const json& params, std::uint64_t seed) {
  if (dim < 1 || dim > kMaxDim) throw ConfigError("dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  const json p = params.is_null() ? json::object() : params;
  if (!p.is_object()) throw ConfigError("generator params must be a JSON object");
  std::mt19937_64 rng(mix64(seed));
  std::optional<Ensemble> e;
  try {
    if (family == "two-point") {
      e = two_point(dim, p, rng);
    } else if (family == "ginibre") {
      e = ginibre(dim, p, rng);
    } else if (family == "lindblad-like") {
      e = lindblad_like(dim, p, rng);
    } else if (family == "uniform-atoms") {
      e = uniform_atoms(dim, p);
    } else {
      throw ConfigError("unknown ensemble family \"" + family + "\"");
    }
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("invalid generator input: ") + err.what());
  }
  std::vector<Atom> atoms = e->atoms();
  return Ensemble(std::move(atoms), GeneratorInfo{family, p, seed});
}

}  // namespace prechannel

#pragma once

// Shipped ensemble families.
//
//   two-point      {(+aN, 1/2), (-aN, 1/2)}; N is a unit-norm direction, the
//                  commutator -i[H, .] with random Hermitian H (default) or a
//                  Ginibre array. For dim 1, N = 1.
//                  params: a (1.0), direction ("commutator" | "ginibre")
//   ginibre        atoms with i.i.d. standard complex Gaussian rep entries,
//                  each rescaled to (2,2)-norm = norm_budget.
//                  params: atoms (3), norm_budget (1.0), probs ("uniform" | "random")
//   lindblad-like  X -> -i[H, X] + sum_j (L_j X L_j^dag - 1/2 {L_j^dag L_j, X}),
//                  random Hermitian H and Gaussian L_j, rescaled to norm_budget.
//                  params: atoms (3), jumps (1), norm_budget (1.0), probs
//                  Needs dim >= 2; the generator is identically zero for dim 1.
//   uniform-atoms  user supplied reps with equal weights.
//                  params: reps (array of row-major [re, im] arrays)

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "prechannel/ensemble.hpp"

namespace prechannel {

inline constexpr int kMaxDim = 8;
inline constexpr int kMaxAtoms = 8;

const std::vector<std::string>& ensemble_families();

/// Throws ConfigError for an unknown family or invalid parameters.
Ensemble generate_ensemble(const std::string& family, int dim, const nlohmann::json& params, std::uint64_t seed);

/// A Hermitian operator with Gaussian entries, (G + G^dag) / 2.
Op random_hermitian(int dim, std::uint64_t seed);

/// The commutator generator X -> -i[H, X].
PreChannel commutator_generator(const Op& h);

/// The Lindblad-form generator with Hamiltonian h and the given jump operators.
PreChannel lindblad_generator(const Op& h, const std::vector<Op>& jumps);

}  // namespace prechannel

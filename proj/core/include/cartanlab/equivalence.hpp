#ifndef CARTANLAB_EQUIVALENCE_HPP
#define CARTANLAB_EQUIVALENCE_HPP

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "cartanlab/laplace.hpp"

namespace cartanlab {

/// Basic invariants of an equation together with their invariant derivatives
/// up to a requested order, plus generic sample points and the numeric rank
/// of the map (t,x) -> (invariants). Rank <= 2.
struct ClassifyingMap {
  std::vector<std::string> names;
  std::vector<Expr> functions;
  std::vector<std::array<double, 2>> samples;
  int rank = 0;
};

struct SampleDomain {
  double t_lo = 0.4, t_hi = 1.6, x_lo = 0.4, x_hi = 1.6;
};

/// Builds the classifying map for an equation in C2-C5 from its invariant
/// frame. order counts applications of the operators D1, D2 (order <= 2).
/// Sample points avoid singular loci of the operator coefficients
/// (|coefficient| > 1e-8); rank uses singular values thresholded at 1e-8
/// relative. Function symbols get seeded generic oracles.
ClassifyingMap classifying_map(const LinearHyperbolicEquation& eq,
                               const InvariantFrame& frame, int order,
                               uint64_t seed = 17, int samples = 10,
                               SampleDomain domain = {});

struct EquivConfig {
  double tol = 1e-6;
  int samples = 40;
  int multistart = 5;  // multistart grid is multistart x multistart
  uint64_t seed = 7;
  SampleDomain domain;
};

enum class EquivVerdict { Equivalent, Inequivalent, Inconclusive };
std::string to_string(EquivVerdict v);

struct EquivalenceResult {
  EquivVerdict verdict = EquivVerdict::Inconclusive;
  std::vector<std::string> evidence;
  /// For a certified mismatch: the sample of A and the matched point of B
  /// where a non-coordinate invariant disagrees. Re-checkable by direct
  /// evaluation.
  std::optional<std::array<double, 2>> witness_a, witness_b;
  std::string mismatched_invariant;
  SampleDomain domain;
};

/// Semi-decision procedure for local contact equivalence. Different
/// subclasses are Inequivalent; C1 pairs are Equivalent; C6 pairs compare
/// (P, Q) exactly; C2-C5 pairs compare classifying-map ranks and then match
/// sampled invariant values via multistart root finding. Honest Inconclusive
/// when the search fails.
EquivalenceResult equivalent(const LinearHyperbolicEquation& a,
                             const LinearHyperbolicEquation& b,
                             const EquivConfig& config = {});

}  // namespace cartanlab

#endif  // CARTANLAB_EQUIVALENCE_HPP

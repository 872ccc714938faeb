#ifndef CARTANLAB_LISLE_REID_HPP
#define CARTANLAB_LISLE_REID_HPP

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "cartanlab/exterior.hpp"

namespace cartanlab {

/// First-order involutive defining system for the coefficients xi^i of an
/// infinitesimal generator of a transitive pseudo-group:
///   d(xi^i)/d(x^j) = sum_rho A^i_jrho(x) phi^rho + sum_k b^i_jk(x) xi^k
/// for principal slots (i,j); the parametric slots, in order, name the free
/// derivatives phi^1, phi^2, ...
struct DefiningSystem {
  int n = 0;
  std::vector<VarId> variables;       // x^1..x^n
  std::vector<std::string> unknowns;  // names of xi^1..xi^n

  std::vector<std::pair<int, int>> parametric;  // 0-based (i, j)
  struct PrincipalEq {
    std::vector<Expr> A;  // one per parametric derivative
    std::vector<Expr> b;  // one per unknown
  };
  std::map<std::pair<int, int>, PrincipalEq> principal;
};

struct ValidationReport {
  std::vector<std::string> warnings;
};

/// Structural checks: parametric and principal slots partition the n x n
/// index grid, coefficient lists have the right lengths, and coefficients
/// depend on the variables only. Throws on violations. For systems without
/// parametric derivatives it also cross-differentiates the equations and
/// warns when the closure residual is nonzero (the system cannot be
/// involutive then).
ValidationReport validate(const DefiningSystem& sys);

/// First point of a rational lattice around the origin at which every
/// coefficient is finite.
std::vector<Rational> default_base_point(const DefiningSystem& sys);

/// Constant-coefficient structure equations at the base point x0:
///   dw^i = sum a^i_jrho pi^rho ^ w^j + sum_{j<k} c^i_jk w^j ^ w^k
/// with a^i_jrho = A^i_jrho(x0) (1 on the parametric identity slots) and
/// c^i_jk = b^i_kj(x0) - b^i_jk(x0). Throws on a singular x0; a Jacobi
/// failure of the result is reported as "system not involutive at x0".
AbstractStructure structure_equations(const DefiningSystem& sys,
                                      const std::vector<Rational>& x0);
AbstractStructure structure_equations(const DefiningSystem& sys);

/// JSON layout:
///   {"n": 2, "vars": ["x","y"], "unknowns": ["xi","eta"],
///    "parametric": [["eta","x"]],
///    "principal": {"xi,x": {"A": ["0"], "b": ["0", "1/y"]}, ...}}
/// Keys of "principal" are "unknown,variable"; a derivative of order above
/// one (e.g. "tau,yy") is rejected.
DefiningSystem defining_system_from_json(const std::string& text);

}  // namespace cartanlab

#endif  // CARTANLAB_LISLE_REID_HPP

#ifndef CARTANLAB_LAPLACE_HPP
#define CARTANLAB_LAPLACE_HPP

#include <optional>
#include <string>
#include <vector>

#include "cartanlab/calculus.hpp"
#include "cartanlab/canonical.hpp"
#include "cartanlab/expr.hpp"

namespace cartanlab {

/// u_tx = T u_t + X u_x + U u. Coefficients may mention t, x, declared
/// constants, and undetermined function symbols of t and/or x.
struct LinearHyperbolicEquation {
  Expr T, X, U;
  VarId t, x;
  std::vector<VarId> constants;

  static LinearHyperbolicEquation make(Expr T, Expr X, Expr U,
                                       std::vector<VarId> constants = {});
  /// Throws when a coefficient mentions a symbol that is neither t, x, a
  /// declared constant, nor an argument of a used function symbol.
  void validate() const;
};

/// The classical semi-invariants of the gauge sub-pseudo-group u -> lambda u.
struct LaplacePair {
  Expr H, K;
};

struct ContactInvariants {
  Expr P, Q;
};

/// Equation with H == 0 but K != 0: the P = K/H machinery does not apply.
/// Swapping the roles of t and x exchanges H and K.
struct HDegenerateError : Error {
  using Error::Error;
};

/// Equation with H == 0 (contact invariants undefined; test K for the wave
/// class instead).
struct LaplaceTrivialError : Error {
  using Error::Error;
};

enum class SubclassTag { C1, C2, C3, C4, C5, C6 };
std::string to_string(SubclassTag tag);

struct Subclass {
  SubclassTag tag;
  struct Fact {
    std::string description;
    Expr tested;
    bool zero;
  };
  std::vector<Fact> witness;
};

/// coefficient * D_base, an operator of invariant differentiation.
struct InvariantOperator {
  Expr coefficient;
  VarId base;
};

struct InvariantFrame {
  std::vector<std::pair<std::string, Expr>> invariants;
  InvariantOperator d1, d2;
};

struct AlternativeInvariants {
  Expr j13, j23, j33;  // always defined (H != 0)
  Expr i;              // P_t P_x / H, always defined
  Expr q_tilde;        // invalid when K == 0
  Expr j;              // invalid when P_t == 0
  std::vector<std::string> degenerate;  // which pieces are undefined and why
  enum class Verdict { Independent, Dependent, NotComputed };
  Verdict j_verdict = Verdict::NotComputed;
};

LaplacePair laplace(const LinearHyperbolicEquation& eq);
ContactInvariants contact_invariants(const LinearHyperbolicEquation& eq);
Subclass classify(const LinearHyperbolicEquation& eq);
InvariantFrame invariant_frame(const LinearHyperbolicEquation& eq,
                               SubclassTag tag);
LinearHyperbolicEquation canonical_form(const LinearHyperbolicEquation& eq);
AlternativeInvariants alternative_invariants(
    const LinearHyperbolicEquation& eq);

/// Numeric Jacobian rank of a family of scalar functions of (t, x) at
/// generic sample points; function symbols get seeded generic oracles.
int jacobian_rank(const std::vector<Expr>& funcs, VarId t, VarId x,
                  uint64_t seed = 17, int samples = 10);

/// The constant-coefficient Euler-Poisson family: u_tx = 1/(k(t+x)) u_t +
/// 2(1-k)/(k(t+x)) u_x - 2(1-k)/(k(t+x))^2 u. kappa may be a rational
/// literal or a declared constant symbol.
LinearHyperbolicEquation euler_poisson(Expr kappa);

}  // namespace cartanlab

#endif  // CARTANLAB_LAPLACE_HPP

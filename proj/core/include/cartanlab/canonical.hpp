#ifndef CARTANLAB_CANONICAL_HPP
#define CARTANLAB_CANONICAL_HPP

#include <optional>

#include "cartanlab/expr.hpp"
#include "cartanlab/poly.hpp"

namespace cartanlab {

/// Normal form: a single rational function over the expression's atoms with
/// expanded, order-sorted numerator and denominator. Idempotent; structural
/// equality of canonical forms decides semantic equality for the
/// rational-over-atoms class.
Expr canonicalize(Expr e);

/// True iff canonicalize(e) is the zero constant. When the expression
/// contains exp/ln/power atoms that could hide algebraic relations, a
/// numeric sampling confirmation runs as well; a symbolically-nonzero
/// expression that vanishes at every sample point raises InconsistencyError.
bool is_zero(Expr e);

/// Zero test without the numeric confirmation step.
bool is_zero_symbolic(Expr e);

bool equal_modulo_canonical(Expr a, Expr b);

/// Canonical value if the expression reduces to a rational constant.
std::optional<Rational> rational_constant(Expr e);

namespace detail {

struct RNF {
  Poly num;                 // rational coefficients
  Poly den{Rational(1)};    // primitive integer, positive leading coefficient
};

RNF to_rnf(Expr e);
Expr rnf_to_expr(const RNF& r);

RNF rnf_add(const RNF& a, const RNF& b);
RNF rnf_mul(const RNF& a, const RNF& b);
RNF rnf_div(const RNF& a, const RNF& b);
RNF rnf_neg(const RNF& a);
RNF rnf_pow_int(const RNF& a, long n);
inline bool rnf_is_zero(const RNF& a) { return a.num.is_zero(); }

}  // namespace detail

}  // namespace cartanlab

#endif  // CARTANLAB_CANONICAL_HPP

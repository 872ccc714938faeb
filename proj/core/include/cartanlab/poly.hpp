#ifndef CARTANLAB_POLY_HPP
#define CARTANLAB_POLY_HPP

// Sparse multivariate polynomials over the "atoms" of an expression:
// variables, function applications, and exp/ln/power subterms treated as
// opaque generators. This is the internal backbone of canonicalize();
// nothing here is part of the public toolkit surface.

#include <cstdint>
#include <map>
#include <vector>

#include "cartanlab/expr.hpp"

namespace cartanlab::detail {

using AtomId = uint32_t;

enum class AtomKind : uint8_t { Var, Func, Exp, Ln, Pow };

struct Atom {
  AtomKind kind;
  uint32_t sym = 0;        // Var / Func id
  std::vector<int> deriv;  // Func multi-index
  Expr a;                  // Exp/Ln argument or Pow base (canonical)
  Expr b;                  // Pow generator exponent (canonical)
};

AtomId intern_atom(const Atom& at);
const Atom& atom_info(AtomId id);
AtomId var_atom(VarId v);
AtomId func_atom(FuncSymbolId f, const std::vector<int>& deriv);

/// Product of atom powers; factors sorted by atom id, exponents positive.
struct Monomial {
  std::vector<std::pair<AtomId, int>> factors;

  bool empty() const { return factors.empty(); }
  int exponent(AtomId id) const;
  friend Monomial operator*(const Monomial& a, const Monomial& b);
  friend bool operator==(const Monomial& a, const Monomial& b) {
    return a.factors == b.factors;
  }
};

/// Lexicographic order, atoms with smaller interned id more significant.
bool mono_less(const Monomial& a, const Monomial& b);

struct MonoLess {
  bool operator()(const Monomial& a, const Monomial& b) const {
    return mono_less(a, b);
  }
};

class Poly {
 public:
  using Terms = std::map<Monomial, Rational, MonoLess>;

  Poly() = default;
  explicit Poly(const Rational& c);
  static Poly atom(AtomId id, int exponent = 1);

  bool is_zero() const { return terms_.empty(); }
  bool is_constant() const;
  const Rational& constant_value() const;  // requires is_constant and nonzero
  size_t term_count() const { return terms_.size(); }
  const Terms& terms() const { return terms_; }

  void add_term(const Monomial& m, const Rational& c);

  const Monomial& leading_monomial() const;
  const Rational& leading_coefficient() const;

  friend Poly operator+(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a, const Poly& b);
  friend Poly operator-(const Poly& a);
  /// Raw product: atom exponents add; no exp/pow recombination (the caller
  /// is responsible for running the canonicalizer's fix-up pass).
  friend Poly operator*(const Poly& a, const Poly& b);
  Poly mul_term(const Monomial& m, const Rational& c) const;
  Poly pow_int(unsigned n) const;

  friend bool operator==(const Poly& a, const Poly& b) {
    return a.terms_ == b.terms_;
  }

  /// All atoms appearing in the polynomial, ascending.
  std::vector<AtomId> atoms() const;
  int degree_in(AtomId x) const;
  /// Coefficient of x^k, as a polynomial without x.
  Poly coeff_in(AtomId x, int k) const;

 private:
  Terms terms_;
};

/// Positive rational content; p == content * primitive where primitive has
/// coprime integer coefficients (signs preserved).
Rational content(const Poly& p);
Poly primitive_part(const Poly& p);  // p / content(p)

/// Largest monomial dividing every term.
Monomial monomial_content(const Poly& p);
Poly div_monomial(const Poly& p, const Monomial& m);

/// Exact multivariate division; throws if b does not divide a.
Poly divexact(const Poly& a, const Poly& b);

/// Division with remainder by leading-term reduction: a = q*b + r where no
/// term of r is divisible by the leading monomial of b.
void poly_divmod(const Poly& a, const Poly& b, Poly& q, Poly& r);

/// GCD of the primitive parts times gcd of contents; result primitive with
/// positive leading coefficient (times the rational-content gcd).
Poly poly_gcd(const Poly& a, const Poly& b);

}  // namespace cartanlab::detail

#endif  // CARTANLAB_POLY_HPP

#ifndef CARTANLAB_EXTERIOR_HPP
#define CARTANLAB_EXTERIOR_HPP

#include <string>
#include <tuple>
#include <vector>

#include "cartanlab/calculus.hpp"
#include "cartanlab/canonical.hpp"
#include "cartanlab/expr.hpp"

namespace cartanlab {

/// An ordered coordinate chart. Coefficient expressions live in the chart
/// coordinates plus flagged constants; `reduction` eliminates any other
/// symbol (the quotient "on the equation") and is applied whenever a
/// coefficient enters a form or comes out of a derivative.
struct Chart {
  std::vector<VarId> coords;
  std::vector<VarId> constants;
  SubstitutionMap reduction;

  int index_of(VarId v) const;
  size_t dim() const { return coords.size(); }
  Expr normalize(Expr e) const;
  /// Throws if e mentions a symbol that is neither a coordinate nor a
  /// flagged constant.
  void check_scalar(Expr e) const;
};

struct OneForm {
  const Chart* chart = nullptr;
  std::map<int, Expr> comp;

  void set(int i, Expr e);
  void add(int i, Expr e);
  Expr get(int i) const;
};

struct TwoForm {
  const Chart* chart = nullptr;
  std::map<std::pair<int, int>, Expr> comp;

  void add(int i, int j, Expr e);
  Expr get(int i, int j) const;
};

struct ThreeForm {
  const Chart* chart = nullptr;
  std::map<std::tuple<int, int, int>, Expr> comp;

  void add(int i, int j, int k, Expr e);
};

OneForm coordinate_differential(const Chart& chart, VarId v);
OneForm zero_one_form(const Chart& chart);
TwoForm zero_two_form(const Chart& chart);

OneForm operator+(const OneForm& a, const OneForm& b);
OneForm operator-(const OneForm& a, const OneForm& b);
OneForm operator-(const OneForm& a);
OneForm operator*(Expr s, const OneForm& a);
TwoForm operator+(const TwoForm& a, const TwoForm& b);
TwoForm operator-(const TwoForm& a, const TwoForm& b);
TwoForm operator-(const TwoForm& a);
TwoForm operator*(Expr s, const TwoForm& a);
ThreeForm operator+(const ThreeForm& a, const ThreeForm& b);
ThreeForm operator-(const ThreeForm& a, const ThreeForm& b);

TwoForm wedge(const OneForm& a, const OneForm& b);
ThreeForm wedge(const OneForm& a, const TwoForm& b);
ThreeForm wedge(const TwoForm& a, const OneForm& b);

OneForm d(const Chart& chart, Expr f);
TwoForm d(const OneForm& w);
ThreeForm d(const TwoForm& w);

bool form_is_zero(const OneForm& a);
bool form_is_zero(const TwoForm& a);
bool form_is_zero(const ThreeForm& a);
bool forms_equal(const OneForm& a, const OneForm& b);
bool forms_equal(const TwoForm& a, const TwoForm& b);
bool forms_equal(const ThreeForm& a, const ThreeForm& b);

/// residual = sum_i alpha_i ^ generators_i, if such alphas exist.
struct SolveIdealResult {
  enum class Status { Solved, DependentGenerators, Unsolvable };
  Status status = Status::Unsolvable;
  std::vector<OneForm> alphas;
};

SolveIdealResult solve_ideal(const TwoForm& residual,
                             const std::vector<OneForm>& generators);

/// Expands a 2-form in the wedge basis of a full coframe:
/// w = sum_{I<J} R_IJ Omega_I ^ Omega_J. Throws if the coframe is not a
/// basis of the cotangent space.
std::map<std::pair<int, int>, Expr> expand_in_coframe(
    const TwoForm& w, const std::vector<OneForm>& coframe);

/// Constant-coefficient structure equations
///   dw^i = sum a^i_{j,rho} pi^rho ^ w^j + sum_{j<k} c^i_{jk} w^j ^ w^k
/// over named form symbols w^1..w^n and auxiliary symbols pi^1..pi^p.
struct AbstractStructure {
  struct Equation {
    std::vector<std::tuple<int, int, Rational>> pi_terms;  // (rho, j, a)
    std::vector<std::tuple<int, int, Rational>> c_terms;   // (j, k, c), j<k
  };
  std::vector<std::string> forms;
  std::vector<std::string> pis;
  std::vector<Equation> equations;  // one per form, same order
};

/// d(dw^i) = 0 consistency: expands the structure equations, drops every
/// 3-form component containing an auxiliary pi and every component that a
/// free choice of d(pi) could match (their differentials are unconstrained),
/// and reports the remaining pure w^j^w^k^w^l components, which must vanish.
struct JacobiReport {
  struct Violation {
    int i, j, k, l;
    Rational value;
  };
  bool pass = true;
  std::vector<Violation> violations;
};

JacobiReport jacobi_check(const AbstractStructure& s);

}  // namespace cartanlab

#endif  // CARTANLAB_EXTERIOR_HPP

#ifndef CARTANLAB_HUNTER_SAXTON_HPP
#define CARTANLAB_HUNTER_SAXTON_HPP

#include <string>

#include "cartanlab/expr.hpp"

namespace cartanlab {

/// Point-wise contact transformation between the first-order jet variables
/// (t, x, u, ut, ux) and their tilded counterparts. It takes the
/// Euler-Poisson equation u_tx = R2 to u_tx = u u_xx + kappa ux^2 written in
/// the tilded variables. Restricted to t + x > 0 (fractional powers).
struct ContactMap {
  Expr kappa;
  Expr u_new, t_new, x_new, ut_new, ux_new;
};

/// kappa is a nonzero rational literal or a declared constant symbol. The
/// contact condition du~ - ut~ dt~ - ux~ dx~ = lambda (du - ut dt - ux dx)
/// is re-derived symbolically on every call; violation throws.
ContactMap theorem6_map(Expr kappa);

/// Symbolic verification that the map transports Euler-Poisson into the
/// generalized Hunter-Saxton equation: u becomes an undetermined function of
/// (t, x), u_tx is reduced by the Euler-Poisson jet rule, and the tilded
/// derivatives are produced by inverting the (t, x) -> (t~, x~) chain rule.
struct TheoremReport {
  bool pass;
  Expr ut_residual;  // chain-rule ut~ minus the displayed formula
  Expr ux_residual;  // chain-rule ux~ minus -(t+x)^-1
  Expr hs_residual;  // ut~x~ - u~ ux~x~ - kappa ux~^2, reduced mod EP
};
TheoremReport verify_theorem6(Expr kappa);

/// The Laplace cascade. forward: eliminating v from
///   v = ux - u/(kappa (t+x)),  v_t = 2(1-kappa)/(kappa (t+x)) v + u/(kappa (t+x)^2)
/// must reproduce Euler-Poisson. v_equation: solving the second relation for
/// u and substituting into the first must give the factorizable equation for
/// v. w: the substitution w = v_x + (2 kappa - 1)/(kappa (t+x)) v must reduce
/// it to w_t = -2 (kappa-1)/(kappa (t+x)) w. h_trivial: the Laplace
/// semi-invariant H of the v-equation vanishes.
struct CascadeReport {
  bool pass;
  Expr forward_residual;
  Expr v_equation_residual;
  Expr w_residual;
  bool h_trivial;
};
CascadeReport verify_cascade(Expr kappa);

/// Closed-form general solution of the Euler-Poisson equation,
///   u = (t+x)^(1/k) (k S'(t) + I2) - (t+x)^((1-k)/k) (S(t) + I1),
/// with I1 = int R (t+x)^(1/k) dx and I2 its consistent t-antiderivative
/// partner. Requires 1/kappa a positive integer and S, R polynomial (so the
/// antiderivatives close up); the Euler-Poisson residual of the result is
/// checked to vanish before returning.
Expr general_solution_ep(const Rational& kappa, Expr S, Expr R);

/// The same data pushed through the contact transformation: a parametric
/// surface (t, x) -> (t~, x~, u~) solving the Hunter-Saxton equation.
struct ParametricSolution {
  Rational kappa;
  Expr u_new, t_new, x_new;
};
ParametricSolution general_solution_hs(const Rational& kappa, Expr S, Expr R);

/// Finite-difference verification of a parametric solution: the map
/// (t, x) -> (t~, x~) is inverted numerically (t = kappa t~ exactly, x by
/// Newton), u~ is sampled as a function of (t~, x~) on a grid with t + x > 0,
/// and the Hunter-Saxton residual is formed from difference quotients.
/// R == 0 collapses x~ to a function of t alone; then u~ depends on t~ only,
/// every x~-derivative vanishes and the equation holds identically, which the
/// check reports as degenerate = true after confirming that collapse.
struct NumericReport {
  bool pass = false;
  bool degenerate = false;
  double max_residual = 0.0;
  int points = 0;
  std::string detail;
};
NumericReport check_hs_solution(const ParametricSolution& sol,
                                double tol = 1e-6, int grid = 10,
                                double t0 = 0.3, double x0 = 0.5,
                                double span = 1.0);

}  // namespace cartanlab

#endif  // CARTANLAB_HUNTER_SAXTON_HPP

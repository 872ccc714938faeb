#include "cartanlab/hunter_saxton.hpp"

#include <cmath>

#include "cartanlab/calculus.hpp"
#include "cartanlab/canonical.hpp"
#include "cartanlab/eval.hpp"
#include "cartanlab/laplace.hpp"

namespace cartanlab {

namespace {

struct JetVars {
  VarId t, x;
  Expr tv, xv, s;  // s = t + x
  Expr u, ut, ux;
};

JetVars jet_vars() {
  JetVars j;
  j.t = Session::instance().var("t");
  j.x = Session::instance().var("x");
  j.tv = make_var(j.t);
  j.xv = make_var(j.x);
  j.s = j.tv + j.xv;
  j.u = make_var("u");
  j.ut = make_var("ut");
  j.ux = make_var("ux");
  return j;
}

void require_nonzero(Expr kappa) {
  if (!kappa.valid()) throw Error("kappa is required");
  auto q = rational_constant(kappa);
  if (q && *q == 0) throw Error("kappa must be nonzero");
}

/// Euler-Poisson right-hand side T ut + X ux + U u at this kappa.
Expr ep_rhs(Expr kappa, const JetVars& j) {
  LinearHyperbolicEquation eq = euler_poisson(kappa);
  return eq.T * j.ut + eq.X * j.ux + eq.U * j.u;
}

}  // namespace

ContactMap theorem6_map(Expr kappa) {
  require_nonzero(kappa);
  JetVars j = jet_vars();
  Expr one = make_int(1);

  ContactMap m;
  m.kappa = kappa;
  m.u_new = pow(j.s, -one / kappa) * (kappa * j.s * j.ux + (kappa - one) * j.u);
  m.t_new = j.tv / kappa;
  m.x_new = -pow(j.s, (kappa - one) / kappa) * (kappa * j.s * j.ux - j.u);
  m.ut_new = kappa * kappa * pow(j.s, -one / kappa) * (j.ut - j.ux);
  m.ux_new = -one / j.s;

  // d u~ - ut~ dt~ - ux~ dx~ must be a multiple of du - ut dt - ux dx.
  auto part = [&](VarId v) {
    return m.u_new.valid()
               ? diff(m.u_new, v) - m.ut_new * diff(m.t_new, v) -
                     m.ux_new * diff(m.x_new, v)
               : Expr();
  };
  Expr lambda = part(j.u.var());
  bool ok = is_zero(part(Session::instance().var("ut"))) &&
            is_zero(part(Session::instance().var("ux"))) &&
            is_zero(part(j.t) + j.ut * lambda) &&
            is_zero(part(j.x) + j.ux * lambda);
  if (!ok) throw InconsistencyError("map violates the contact condition");
  return m;
}

TheoremReport verify_theorem6(Expr kappa) {
  require_nonzero(kappa);
  JetVars j = jet_vars();
  ContactMap m = theorem6_map(kappa);

  FuncSymbolId uf = Session::instance().func("u", {j.t, j.x});
  Expr U = make_func(uf), Ut = make_func(uf, {1, 0}), Ux = make_func(uf, {0, 1});

  SubstitutionMap onto_jet;
  onto_jet.set_var(j.u.var(), U);
  onto_jet.set_var(j.ut.var(), Ut);
  onto_jet.set_var(j.ux.var(), Ux);
  SubstitutionMap rhs_map = onto_jet;

  JetRules jet;
  jet.add(uf, {1, 1}, substitute(ep_rhs(kappa, j), rhs_map));

  Expr un = substitute(m.u_new, onto_jet);
  Expr tn = substitute(m.t_new, onto_jet);
  Expr xn = substitute(m.x_new, onto_jet);
  Expr utn = substitute(m.ut_new, onto_jet);
  Expr uxn = substitute(m.ux_new, onto_jet);

  // t~ = t/kappa makes the inverse chain rule triangular:
  //   F_x~ = D_x F / D_x x~,   F_t~ = kappa (D_t F - (D_t x~) F_x~).
  Expr xt = jet.total_diff(xn, j.t);
  Expr xx = jet.total_diff(xn, j.x);
  auto chain_x = [&](Expr F) { return jet.total_diff(F, j.x) / xx; };
  auto chain_t = [&](Expr F) {
    return kappa * (jet.total_diff(F, j.t) - xt * chain_x(F));
  };

  TheoremReport r;
  r.ut_residual = canonicalize(chain_t(un) - utn);
  r.ux_residual = canonicalize(chain_x(un) - uxn);
  Expr utx = chain_x(utn);
  Expr uxx = chain_x(uxn);
  r.hs_residual = canonicalize(utx - un * uxx - kappa * uxn * uxn);
  r.pass = is_zero(r.ut_residual) && is_zero(r.ux_residual) &&
           is_zero(r.hs_residual) &&
           is_zero(canonicalize(tn - j.tv / kappa));
  return r;
}

CascadeReport verify_cascade(Expr kappa) {
  require_nonzero(kappa);
  JetVars j = jet_vars();
  Expr one = make_int(1), two = make_int(2);
  Expr ks = kappa * j.s;

  CascadeReport r;

  // (a) v = ux - u/(kappa s) turns v_t = 2(1-kappa)/(kappa s) v + u/(kappa s^2)
  // into exactly u_tx = R2.
  {
    FuncSymbolId uf = Session::instance().func("u", {j.t, j.x});
    Expr U = make_func(uf), Ut = make_func(uf, {1, 0}), Ux = make_func(uf, {0, 1});
    Expr Utx = make_func(uf, {1, 1});
    Expr v = Ux - U / ks;
    Expr b2 = diff(v, j.t) - two * (one - kappa) / ks * v - U / (kappa * j.s * j.s);
    SubstitutionMap onto;
    onto.set_var(j.u.var(), U);
    onto.set_var(j.ut.var(), Ut);
    onto.set_var(j.ux.var(), Ux);
    r.forward_residual = canonicalize(b2 - (Utx - substitute(ep_rhs(kappa, j), onto)));
  }

  // (b) u recovered from the second relation, pushed back into the first,
  // gives a second-order equation for v; compare with the displayed one.
  Expr v_rhs;
  FuncSymbolId vf = Session::instance().func("v", {j.t, j.x});
  Expr V = make_func(vf), Vt = make_func(vf, {1, 0}), Vx = make_func(vf, {0, 1});
  {
    Expr u_of_v = kappa * j.s * j.s * Vt - two * (one - kappa) * j.s * V;
    Expr F = diff(u_of_v, j.x) - u_of_v / ks - V;
    Expr z = make_var("vtx_slot");
    SubstitutionMap cut;
    cut.set_func(vf, {1, 1}, z);
    Expr Fz = substitute(F, cut);
    Expr c = canonicalize(diff(Fz, z.var()));
    if (is_zero(c) || !is_zero(diff(c, z.var())))
      throw InconsistencyError("elimination is not linear in v_tx");
    SubstitutionMap drop;
    drop.set_var(z.var(), make_int(0));
    Expr F0 = substitute(Fz, drop);
    Expr derived = canonicalize(-F0 / c);
    v_rhs = (one - two * kappa) / ks * Vt + two * (one - kappa) / ks * Vx -
            (two * kappa - one) * (kappa - two) / (ks * ks) * V;
    r.v_equation_residual = canonicalize(derived - v_rhs);
  }

  // (c) w = v_x + (2 kappa - 1)/(kappa s) v satisfies w_t = -2(kappa-1)/(kappa s) w
  // on solutions of the v-equation.
  {
    JetRules jet;
    jet.add(vf, {1, 1}, v_rhs);
    Expr w = Vx + (two * kappa - one) / ks * V;
    r.w_residual =
        canonicalize(jet.total_diff(w, j.t) + two * (kappa - one) / ks * w);
  }

  // (d) the v-equation has trivial Laplace semi-invariant H.
  {
    std::vector<VarId> constants;
    collect_vars(kappa, constants);
    auto eq = LinearHyperbolicEquation::make(
        (one - two * kappa) / ks, two * (one - kappa) / ks,
        -(two * kappa - one) * (kappa - two) / (ks * ks), constants);
    r.h_trivial = is_zero(laplace(eq).H);
  }

  r.pass = is_zero(r.forward_residual) && is_zero(r.v_equation_residual) &&
           is_zero(r.w_residual) && r.h_trivial;
  return r;
}

namespace {

/// Polynomial antiderivative in x by Taylor extraction; throws when the
/// derivative sequence does not terminate.
Expr antider(Expr e, VarId x) {
  Expr dk = canonicalize(e);
  SubstitutionMap at0;
  at0.set_var(x, make_int(0));
  std::vector<Expr> terms;
  Rational fact(1);
  for (int k = 0;; ++k) {
    if (dk.is_zero_literal()) break;
    if (k > 64) throw Error("antiderivative does not close: integrand is not polynomial");
    if (k > 0) fact *= k;
    Expr ck = canonicalize(substitute(dk, at0) / make_rational(fact));
    if (!ck.is_zero_literal())
      terms.push_back(ck * pow(make_var(x), k + 1) / make_int(k + 1));
    dk = canonicalize(diff(dk, x));
  }
  return canonicalize(make_sum(std::move(terms)));
}

struct SolutionParts {
  Expr S, dS, I1, I2;
  long m;  // 1/kappa
};

SolutionParts solution_parts(const Rational& kappa, Expr S, Expr R,
                             const JetVars& j) {
  if (kappa == 0) throw Error("kappa must be nonzero");
  if (!(kappa.get_num() == 1 && kappa > 0))
    throw Error("closed-form mode needs 1/kappa to be a positive integer");
  SolutionParts p;
  p.m = kappa.get_den().get_si();
  if (!S.valid()) S = make_int(0);
  if (!R.valid()) R = make_int(0);
  if (contains_var(S, j.x)) throw Error("S must depend on t only");
  if (contains_var(R, j.t)) throw Error("R must depend on x only");
  p.S = S;
  p.dS = diff(S, j.t);
  p.I1 = antider(R * pow(j.s, p.m), j.x);
  // the t-antiderivative partner: d I1/dt = (1/kappa) I2 with matching constants
  p.I2 = canonicalize(make_rational(kappa) * diff(p.I1, j.t));
  (void)antider(S + make_int(0), j.t);  // rejects non-polynomial S early
  return p;
}

}  // namespace

Expr general_solution_ep(const Rational& kappa, Expr S, Expr R) {
  JetVars j = jet_vars();
  SolutionParts p = solution_parts(kappa, S, R, j);
  Expr kq = make_rational(kappa);
  Expr u = pow(j.s, p.m) * (kq * p.dS + p.I2) -
           pow(j.s, p.m - 1) * (p.S + p.I1);
  u = canonicalize(u);

  LinearHyperbolicEquation eq = euler_poisson(kq);
  Expr res = diff(diff(u, j.t), j.x) -
             (eq.T * diff(u, j.t) + eq.X * diff(u, j.x) + eq.U * u);
  if (!is_zero(res))
    throw InconsistencyError("general solution fails the equation: " +
                             to_string(canonicalize(res)));
  return u;
}

ParametricSolution general_solution_hs(const Rational& kappa, Expr S, Expr R) {
  JetVars j = jet_vars();
  SolutionParts p = solution_parts(kappa, S, R, j);
  Expr kq = make_rational(kappa);
  ParametricSolution sol;
  sol.kappa = kappa;
  sol.u_new = canonicalize(kq * kq * p.dS + kq * p.I2);
  sol.t_new = canonicalize(j.tv / kq);
  sol.x_new = canonicalize(-kq * (p.S + p.I1));
  return sol;
}

NumericReport check_hs_solution(const ParametricSolution& sol, double tol,
                                int grid, double t0, double x0, double span) {
  JetVars j = jet_vars();
  NumericReport rep;
  Expr dxdx = canonicalize(diff(sol.x_new, j.x));

  if (is_zero(dxdx)) {
    rep.degenerate = true;
    if (is_zero(diff(sol.u_new, j.x))) {
      rep.pass = true;
      rep.detail = "x~ and u~ depend on t only; u~(t~) solves the equation identically";
    } else {
      rep.detail = "x~ collapses but u~ still depends on x: not a graph";
    }
    return rep;
  }
  if (!is_zero(canonicalize(sol.t_new - j.tv / make_rational(sol.kappa))))
    throw Error("t~ is not t/kappa; numeric inversion unsupported");

  double kap = mpq_class(sol.kappa).get_d();
  auto at = [&](Expr e, double tv, double xv) {
    Bindings b{{j.t, tv}, {j.x, xv}};
    return eval_numeric(e, b);
  };
  // u~ as a function of (t~, x~): t = kappa t~ exactly, x by Newton.
  auto u_of = [&](double tt, double xt, double xguess) {
    double tv = kap * tt;
    double xv = xguess;
    for (int it = 0; it < 80; ++it) {
      double f = at(sol.x_new, tv, xv) - xt;
      double df = at(dxdx, tv, xv);
      if (std::fabs(df) < 1e-12)
        throw Error("parametrization degenerate on the sample domain");
      double step = f / df;
      xv -= step;
      if (std::fabs(step) < 1e-13 * (1.0 + std::fabs(xv))) break;
    }
    return at(sol.u_new, tv, xv);
  };

  for (int i = 0; i < grid; ++i) {
    for (int k = 0; k < grid; ++k) {
      double tb = t0 + span * i / (grid - 1);
      double xb = x0 + span * k / (grid - 1);
      double tt = at(sol.t_new, tb, xb);
      double xt = at(sol.x_new, tb, xb);
      double u0 = u_of(tt, xt, xb);
      double scale = 1.0;
      // signed residual from difference quotients at step factor f; the
      // leading error is O(f^2), removed below by Richardson extrapolation
      auto fd_res = [&](double f) {
        double h = f * 3e-4 * (1.0 + std::fabs(tt));
        double w = f * 3e-4 * (1.0 + std::fabs(xt));
        double ux1 = (u_of(tt, xt + w, xb) - u_of(tt, xt - w, xb)) / (2 * w);
        double uxx =
            (u_of(tt, xt + w, xb) - 2 * u0 + u_of(tt, xt - w, xb)) / (w * w);
        double utx = (u_of(tt + h, xt + w, xb) - u_of(tt + h, xt - w, xb) -
                      u_of(tt - h, xt + w, xb) + u_of(tt - h, xt - w, xb)) /
                     (4 * h * w);
        scale = std::max({1.0, std::fabs(utx), std::fabs(u0 * uxx),
                          std::fabs(kap * ux1 * ux1)});
        return utx - u0 * uxx - kap * ux1 * ux1;
      };
      double r1 = fd_res(1.0);
      double r2 = fd_res(0.5);
      double res = std::fabs((4 * r2 - r1) / 3) / scale;
      rep.max_residual = std::max(rep.max_residual, res);
      ++rep.points;
    }
  }
  rep.pass = rep.max_residual < tol;
  if (!rep.pass) rep.detail = "residual above tolerance";
  return rep;
}

}  // namespace cartanlab

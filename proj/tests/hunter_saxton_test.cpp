#include "cartanlab/hunter_saxton.hpp"

#include <doctest.h>

#include "cartanlab/canonical.hpp"
#include "cartanlab/eval.hpp"
#include "cartanlab/laplace.hpp"
#include "cartanlab/parse.hpp"

using namespace cartanlab;

TEST_CASE("theorem 6 map: displayed formulas and contact condition") {
  // kappa = 1 collapses the fractional exponents
  auto m1 = theorem6_map(make_int(1));
  CHECK(equal_modulo_canonical(m1.u_new, parse("ux")));
  CHECK(equal_modulo_canonical(m1.x_new, parse("u - (t+x)*ux")));
  CHECK(equal_modulo_canonical(m1.ux_new, parse("-1/(t+x)")));

  // hand-evaluated point check at (t,x,u,ut,ux) = (1,1,1,1,1), kappa = 1/2:
  // u~ = 2^-2 (2*(1/2)*1 - (1/2)*1) = 1/8, t~ = 2, x~ = 0, ut~ = 0, ux~ = -1/2
  auto m = theorem6_map(make_rational(Rational(1, 2)));
  Bindings b;
  for (const char* n : {"t", "x", "u", "ut", "ux"})
    b[Session::instance().var(n)] = 1.0;
  CHECK(eval_numeric(m.u_new, b) == doctest::Approx(0.125));
  CHECK(eval_numeric(m.t_new, b) == doctest::Approx(2.0));
  CHECK(eval_numeric(m.x_new, b) == doctest::Approx(0.0));
  CHECK(eval_numeric(m.ut_new, b) == doctest::Approx(0.0));
  CHECK(eval_numeric(m.ux_new, b) == doctest::Approx(-0.5));

  CHECK(equal_modulo_canonical(m.ux_new, parse("-1/(t+x)")));
  CHECK_THROWS_WITH(theorem6_map(make_int(0)), "kappa must be nonzero");
}

TEST_CASE("theorem 6 transports Euler-Poisson to Hunter-Saxton") {
  auto sym = verify_theorem6(make_var("kappa"));
  CAPTURE(to_string(sym.hs_residual));
  CHECK(sym.pass);
  CHECK(is_zero(sym.ut_residual));
  CHECK(is_zero(sym.ux_residual));
  CHECK(is_zero(sym.hs_residual));

  // the classical Hunter-Saxton case and the conjectured-linearizable one
  CHECK(verify_theorem6(make_rational(Rational(1, 2))).pass);
  CHECK(verify_theorem6(make_int(-1)).pass);

  // random rational spot checks behind the symbolic proof
  for (Rational k : {Rational(2, 3), Rational(5, 2), Rational(-3, 4),
                     Rational(7), Rational(-1, 5)}) {
    CAPTURE(k.get_str());
    CHECK(verify_theorem6(make_rational(k)).pass);
  }
}

TEST_CASE("laplace cascade around the Euler-Poisson equation") {
  auto r = verify_cascade(make_var("kappa"));
  CAPTURE(to_string(r.forward_residual));
  CAPTURE(to_string(r.v_equation_residual));
  CAPTURE(to_string(r.w_residual));
  CHECK(r.pass);
  CHECK(r.h_trivial);

  CHECK(verify_cascade(make_int(2)).pass);
  CHECK(verify_cascade(make_rational(Rational(1, 2))).pass);

  // the cascade entry condition
  auto inv = contact_invariants(euler_poisson(make_var("kappa")));
  CHECK(is_zero(inv.P + inv.Q - make_int(2)));
}

TEST_CASE("closed-form Euler-Poisson solutions") {
  Expr t = make_var("t"), x = make_var("x");
  Expr zero = make_int(0);

  // hand oracle: kappa=1/2, S=t^2, R=0 gives u = (t+x)^2 t - (t+x) t^2
  Expr u = general_solution_ep(Rational(1, 2), t * t, zero);
  CHECK(equal_modulo_canonical(u, parse("t*x*(t+x)")));

  CHECK(is_zero(general_solution_ep(Rational(1, 2), zero, zero)));

  // the residual is checked inside general_solution_ep; sweep the catalog
  std::vector<std::pair<Expr, Expr>> sr = {
      {zero, zero}, {t, make_int(1)}, {t * t, x}, {t * t * t, x}};
  for (Rational k : {Rational(1, 2), Rational(1, 3), Rational(1)})
    for (auto& [S, R] : sr) {
      CAPTURE(k.get_str());
      CAPTURE(to_string(S));
      CAPTURE(to_string(R));
      CHECK_NOTHROW(general_solution_ep(k, S, R));
    }

  CHECK_THROWS_WITH(general_solution_ep(Rational(2), zero, zero),
                    "closed-form mode needs 1/kappa to be a positive integer");
  CHECK_THROWS_WITH(general_solution_ep(Rational(1, 2), x, zero),
                    "S must depend on t only");
  CHECK_THROWS_AS(general_solution_ep(Rational(1, 2), make_exp(t), zero),
                  Error);
}

TEST_CASE("parametric Hunter-Saxton solutions") {
  Expr t = make_var("t"), x = make_var("x");
  Expr zero = make_int(0);

  SUBCASE("R = 0 collapses to a function of t~ alone") {
    auto sol = general_solution_hs(Rational(1, 2), t * t, zero);
    CHECK(equal_modulo_canonical(sol.u_new, parse("t/2")));
    CHECK(equal_modulo_canonical(sol.t_new, parse("2*t")));
    CHECK(equal_modulo_canonical(sol.x_new, parse("-t^2/2")));
    // eliminating the parameter: u~ = t~/4, every x~-derivative vanishes
    CHECK(is_zero(sol.u_new - sol.t_new / make_int(4)));
    auto rep = check_hs_solution(sol);
    CHECK(rep.pass);
    CHECK(rep.degenerate);
  }

  SUBCASE("trivial solution") {
    auto rep = check_hs_solution(general_solution_hs(Rational(1, 2), zero, zero));
    CHECK(rep.pass);
    CHECK(rep.degenerate);
  }

  SUBCASE("finite-difference residual on genuine surfaces") {
    for (auto& [k, S, R] :
         std::vector<std::tuple<Rational, Expr, Expr>>{
             {Rational(1, 2), zero, make_int(1)},
             {Rational(1, 3), t, x},
             {Rational(1), t * t, x}}) {
      CAPTURE(k.get_str());
      auto rep = check_hs_solution(general_solution_hs(k, S, R));
      CAPTURE(rep.max_residual);
      CHECK(rep.pass);
      CHECK(!rep.degenerate);
      CHECK(rep.points == 100);
      CHECK(rep.max_residual < 1e-6);
    }
  }
}

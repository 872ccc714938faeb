#include "cartanlab/selftest.hpp"

#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <sstream>

#include "cartanlab/equivalence.hpp"
#include "cartanlab/eval.hpp"
#include "cartanlab/exterior.hpp"
#include "cartanlab/hunter_saxton.hpp"
#include "cartanlab/laplace.hpp"
#include "cartanlab/lisle_reid.hpp"
#include "cartanlab/parse.hpp"
#include "cartanlab/structure_verifier.hpp"

namespace cartanlab {

namespace {

// collects failures; empty record means pass
struct Check {
  std::ostringstream bad;
  int fails = 0;

  void require(bool ok, const std::string& what) {
    if (ok) return;
    ++fails;
    if (fails <= 4) bad << (fails > 1 ? "; " : "") << what;
  }
};

// u_tx = u_t + 2(p-1)/(q(t+x)) u_x + 2(1-(p-1)(t+x))/(q(t+x)^2) u with
// undetermined p(t), q(t): the two-function family whose alternative
// invariant basis degenerates
LinearHyperbolicEquation two_function_family() {
  parse("p(t)");
  parse("q(t)");
  return LinearHyperbolicEquation::make(
      parse("1"), parse("2*(p(t) - 1)/(q(t)*(t + x))"),
      parse("2*(1 - (p(t) - 1)*(t + x))/(q(t)*(t + x)^2)"));
}

LinearHyperbolicEquation moutard_generic() {
  parse("Um(t,x)");
  return LinearHyperbolicEquation::make(parse("0"), parse("0"),
                                        parse("Um(t,x)"));
}

// xi_x = eta/y, xi_y = 0, eta_y = eta/y, eta_x parametric
DefiningSystem scaling_defining_system() {
  DefiningSystem sys;
  sys.n = 2;
  sys.variables = {Session::instance().var("x"), Session::instance().var("y")};
  sys.unknowns = {"xi", "eta"};
  sys.parametric = {{1, 0}};
  sys.principal[{0, 0}] = {{parse("0")}, {parse("0"), parse("1/y")}};
  sys.principal[{0, 1}] = {{parse("0")}, {parse("0"), parse("0")}};
  sys.principal[{1, 1}] = {{parse("0")}, {parse("0"), parse("1/y")}};
  return sys;
}

// the three presentations of the Liouville symmetry structure equations,
// each mapped onto the constant-coefficient reference system
AbstractStructure maurer_cartan_presentation() {
  AbstractStructure s;
  s.forms = {"t1", "t2", "t3", "t4", "t5", "e1"};
  s.pis = {"e2", "chi"};
  s.equations.resize(6);
  s.equations[0].c_terms = {{1, 2, -1}, {3, 4, -1}};
  s.equations[1].pi_terms = {{0, 2, 1}};
  s.equations[1].c_terms = {{0, 4, -1}, {1, 5, -1}};
  s.equations[2].c_terms = {{2, 5, 1}};
  s.equations[3].pi_terms = {{1, 4, 1}};
  s.equations[3].c_terms = {{0, 2, -1}, {0, 3, -1}, {3, 5, 1}};
  s.equations[4].c_terms = {{0, 4, 1}, {4, 5, -1}};
  s.equations[5].c_terms = {{1, 2, 1}, {2, 4, -1}};
  return s;
}

AbstractStructure series_presentation() {
  AbstractStructure s;
  s.forms = {"s1", "s2", "f1", "f2", "p1", "p2"};
  s.pis = {"f3", "p3"};
  s.equations.resize(6);
  s.equations[0].c_terms = {{0, 2, -1}};
  s.equations[1].c_terms = {{1, 4, -1}};
  s.equations[2].c_terms = {{0, 3, 1}};
  s.equations[3].pi_terms = {{0, 0, -1}};
  s.equations[3].c_terms = {{2, 3, -1}};
  s.equations[4].c_terms = {{1, 5, 1}};
  s.equations[5].pi_terms = {{1, 1, -1}};
  s.equations[5].c_terms = {{4, 5, -1}};
  return s;
}

AbstractStructure moving_coframe_presentation() {
  AbstractStructure s;
  s.forms = {"th0", "th1", "th2", "k1", "k2", "e1"};
  s.pis = {"s11", "s22"};
  s.equations.resize(6);
  s.equations[0].c_terms = {{1, 3, -1}, {2, 4, -1}};
  s.equations[1].pi_terms = {{0, 3, -1}};
  s.equations[1].c_terms = {{0, 4, -1}, {1, 5, -1}};
  s.equations[2].pi_terms = {{1, 4, -1}};
  s.equations[2].c_terms = {{0, 2, -1}, {0, 3, -1}, {2, 5, 1}};
  s.equations[3].c_terms = {{3, 5, 1}};
  s.equations[4].c_terms = {{0, 4, 1}, {4, 5, -1}};
  s.equations[5].c_terms = {{1, 3, 1}, {3, 4, -1}};
  return s;
}

// --- randomized property suites ---------------------------------------------

struct ExprGen {
  std::mt19937_64 rng;
  std::vector<Expr> vars;

  explicit ExprGen(uint64_t seed) : rng(seed) {
    for (const char* n : {"t", "x", "y"}) vars.push_back(make_var(n));
  }

  Expr leaf() {
    std::uniform_int_distribution<int> pick(0, 4);
    switch (pick(rng)) {
      case 0:
        return vars[0];
      case 1:
        return vars[1];
      case 2:
        return vars[2];
      case 3: {
        std::uniform_int_distribution<int> c(1, 5);
        return make_int(c(rng));
      }
      default: {
        std::uniform_int_distribution<int> n(-4, 4), d(1, 3);
        return make_rational(Rational(n(rng), d(rng)));
      }
    }
  }

  Expr gen(int depth) {
    if (depth <= 0) return leaf();
    std::uniform_int_distribution<int> pick(0, 9);
    switch (pick(rng)) {
      case 0:
      case 1:
      case 2:
        return gen(depth - 1) + gen(depth - 1);
      case 3:
      case 4:
        return gen(depth - 1) * gen(depth - 1);
      case 5:
        return gen(depth - 1) - gen(depth - 1);
      case 6: {
        std::uniform_int_distribution<int> e(2, 3);
        return pow(gen(depth - 1), e(rng));
      }
      case 7:
        return make_exp(leaf() + leaf());
      case 8: {
        Expr den = gen(depth - 1);
        if (is_zero_symbolic(den)) den = den + make_int(1);
        return gen(depth - 1) / den;
      }
      default:
        return leaf();
    }
  }
};

}  // namespace

// ----------------------------------------------------------------------------

std::vector<Criterion> run_selftest() {
  using Clock = std::chrono::steady_clock;
  std::vector<Criterion> out;

  auto run = [&out](int idx, const std::string& name, double budget,
                    const std::function<void(Check&)>& body) {
    Criterion c;
    c.index = idx;
    c.name = name;
    Check ck;
    auto t0 = Clock::now();
    try {
      body(ck);
    } catch (const std::exception& e) {
      ck.require(false, std::string("exception: ") + e.what());
    }
    c.seconds = std::chrono::duration<double>(Clock::now() - t0).count();
    if (budget > 0 && c.seconds >= budget) {
      std::ostringstream os;
      os << "over time budget (" << c.seconds << "s >= " << budget << "s)";
      ck.require(false, os.str());
    }
    c.pass = ck.fails == 0;
    c.detail = c.pass ? "ok" : ck.bad.str();
    out.push_back(std::move(c));
  };

  run(1, "classification corpus", 5.0, [](Check& ck) {
    auto wave =
        LinearHyperbolicEquation::make(parse("0"), parse("0"), parse("0"));
    ck.require(classify(wave).tag == SubclassTag::C1, "wave not C1");

    auto ep_half = euler_poisson(parse("1/2"));
    ck.require(classify(ep_half).tag == SubclassTag::C6, "ep(1/2) not C6");
    ContactInvariants ci = contact_invariants(ep_half);
    ck.require(equal_modulo_canonical(ci.P, parse("1")), "ep(1/2) P != 1");
    ck.require(equal_modulo_canonical(ci.Q, parse("1")), "ep(1/2) Q != 1");

    auto ep_two = euler_poisson(parse("2"));
    ck.require(classify(ep_two).tag == SubclassTag::C6, "ep(2) not C6");
    ci = contact_invariants(ep_two);
    ck.require(equal_modulo_canonical(ci.P, parse("-2")), "ep(2) P != -2");
    ck.require(equal_modulo_canonical(ci.Q, parse("4")), "ep(2) Q != 4");

    ck.require(classify(two_function_family()).tag == SubclassTag::C2,
               "two-function family not C2");
  });

  run(2, "two-function family invariants and rank jump", 10.0, [](Check& ck) {
    auto eq = two_function_family();
    ContactInvariants ci = contact_invariants(eq);
    ck.require(equal_modulo_canonical(ci.P, parse("p(t)")), "P != p");
    ck.require(equal_modulo_canonical(ci.Q, parse("q(t)")), "Q != q");

    AlternativeInvariants alt = alternative_invariants(eq);
    ck.require(equal_modulo_canonical(alt.j13, parse("2*p(t)*q(t)")),
               "J13 != 2pq");
    ck.require(is_zero(alt.j23), "J23 != 0");
    ck.require(is_zero(alt.j33), "J33 != 0");
    ck.require(is_zero(alt.i), "I != 0");
    ck.require(alt.q_tilde.valid() &&
                   equal_modulo_canonical(alt.q_tilde, parse("q(t)/p(t)")),
               "Qtilde != q/p");

    InvariantFrame f = invariant_frame(eq, SubclassTag::C2);
    ck.require(
        equal_modulo_canonical(
            f.invariants[2].second,
            parse("-2/(D(p,t)*(t + x)) - D(p,t,t)/D(p,t)^2"
                  " - D(q,t)/(D(p,t)*q(t))")),
        "J does not match the closed form");

    VarId t = Session::instance().var("t"), x = Session::instance().var("x");
    std::vector<Expr> fs = {ci.P,   ci.Q,  alt.j13,    alt.j23,
                            alt.j33, alt.i, alt.q_tilde};
    ck.require(jacobian_rank(fs, t, x) == 1,
               "alternative basis rank is not 1");
    fs.push_back(f.invariants[2].second);
    ck.require(jacobian_rank(fs, t, x) == 2, "appending J does not add rank");
    ck.require(alt.j_verdict == AlternativeInvariants::Verdict::Independent,
               "J not flagged independent");
  });

  run(3, "self-adjoint-form degeneracy is reported", 0, [](Check& ck) {
    auto eq = moutard_generic();
    ContactInvariants ci = contact_invariants(eq);
    ck.require(equal_modulo_canonical(ci.P, parse("1")), "P != 1");
    VarId t = Session::instance().var("t"), x = Session::instance().var("x");
    ck.require(is_zero(diff(ci.P, t)), "P_t != 0");
    ck.require(is_zero(diff(ci.P, x)), "P_x != 0");
    AlternativeInvariants alt = alternative_invariants(eq);
    ck.require(is_zero(alt.i), "I != 0");
    ck.require(!alt.j.valid(), "J unexpectedly defined");
    ck.require(alt.degenerate.size() == 3,
               "expected J, D1, D2 all reported degenerate");
    bool threw = false;
    try {
      invariant_frame(eq, SubclassTag::C2);
    } catch (const Error&) {
      threw = true;
    }
    ck.require(threw, "C2 frame did not report the degeneracy");
  });

  run(4, "structure equations from a defining system", 0, [](Check& ck) {
    DefiningSystem sys = scaling_defining_system();
    using Terms = std::vector<std::tuple<int, int, Rational>>;

    AbstractStructure s1 = structure_equations(sys, {Rational(0), Rational(1)});
    ck.require(s1.equations[0].pi_terms.empty() &&
                   s1.equations[0].c_terms == Terms{{0, 1, Rational(-1)}},
               "dw1 at y0=1 is not -w1^w2");
    ck.require(s1.equations[1].c_terms.empty() &&
                   s1.equations[1].pi_terms == Terms{{0, 0, Rational(1)}},
               "dw2 at y0=1 is not pi1^w1");
    ck.require(jacobi_check(s1).pass, "jacobi fails at y0=1");

    AbstractStructure s2 = structure_equations(sys, {Rational(0), Rational(2)});
    ck.require(s2.equations[0].c_terms == Terms{{0, 1, Rational(-1, 2)}},
               "dw1 at y0=2 coefficient is not -1/2");
    ck.require(jacobi_check(s2).pass, "jacobi fails at y0=2");

    Dataset ref = load_dataset("lisle_reid_liouville");
    ck.require(ref.structure.has_value() && jacobi_check(*ref.structure).pass,
               "jacobi fails on the six-equation reference system");
  });

  run(5, "coframe datasets verify exactly", 60.0, [](Check& ck) {
    for (const char* name :
         {"liouville_cartan", "liouville_moving_coframe", "euler_poisson",
          "hunter_saxton", "cont_j2_n2"}) {
      Dataset ds = load_dataset(name);
      ck.require(ds.coframe.has_value(), std::string(name) + ": no coframe");
      if (!ds.coframe) continue;
      VerifyReport rep = verify_coframe(*ds.coframe, ds.claims);
      for (const ClaimReport& c : rep.claims)
        ck.require(c.pass, std::string(name) + "/" + c.target + ": " +
                               (c.detail.empty() ? "failed" : c.detail));
      ck.require(coframe_independent(*ds.coframe, 5,
                                     ds.coframe->chart->dim() > 20 ? 3 : 10),
                 std::string(name) + ": coframe dependent");
    }
  });

  run(6, "cross-presentation substitutions", 0, [](Check& ck) {
    AbstractStructure dst = *load_dataset("lisle_reid_liouville").structure;

    FormSubstitution m1;
    m1.map["t1"] = {{1, "w3"}};
    m1.map["t2"] = {{-1, "w2"}, {-1, "w4"}};
    m1.map["t3"] = {{1, "w1"}};
    m1.map["t4"] = {{-1, "w1"}, {-1, "w5"}};
    m1.map["t5"] = {{1, "w2"}};
    m1.map["e1"] = {{-1, "w6"}};
    m1.map["e2"] = {{-1, "pi1"}};
    m1.map["chi"] = {{-1, "pi2"}};
    ck.require(
        verify_substitution(maurer_cartan_presentation(), m1, dst).pass,
        "maurer-cartan presentation does not map");

    FormSubstitution m2;
    m2.map["s1"] = {{1, "w1"}};
    m2.map["s2"] = {{1, "w2"}};
    m2.map["f1"] = {{1, "w6"}};
    m2.map["f2"] = {{-1, "w4"}};
    m2.map["p1"] = {{1, "w3"}, {-1, "w6"}};
    m2.map["p2"] = {{-1, "w5"}};
    m2.map["f3"] = {{1, "pi1"}};
    m2.map["p3"] = {{1, "pi2"}};
    ck.require(verify_substitution(series_presentation(), m2, dst).pass,
               "series presentation does not map");

    FormSubstitution m3;
    m3.map["th0"] = {{1, "w3"}};
    m3.map["th1"] = {{-1, "w2"}, {-1, "w4"}};
    m3.map["th2"] = {{-1, "w1"}, {-1, "w5"}};
    m3.map["k1"] = {{1, "w1"}};
    m3.map["k2"] = {{1, "w2"}};
    m3.map["e1"] = {{-1, "w6"}};
    m3.map["s11"] = {{1, "pi1"}};
    m3.map["s22"] = {{1, "pi2"}};
    AbstractStructure src = moving_coframe_presentation();
    ck.require(verify_substitution(src, m3, dst).pass,
               "moving-coframe presentation does not map");
    ck.require(verify_substitution(dst, invert(m3, src, dst), src).pass,
               "inverse map does not close");
  });

  run(7, "line diffeomorphism series", 0, [](Check& ck) {
    for (int n = 1; n <= 8; ++n)
      ck.require(jacobi_check(diffeo_r_series(n)).pass,
                 "jacobi fails at order " + std::to_string(n));
    ProductReport rep = liouville_product_check(4);
    ck.require(rep.phi_copy_matches && rep.psi_copy_matches,
               "factor copies differ from the one-line series");
    ck.require(rep.cross_terms == 0, "unexpected cross terms");
    ck.require(rep.sigma3_cross_terms == 2, "glue form cross terms != 2");
    ck.require(rep.jacobi_pass, "product jacobi fails");
  });

  run(8, "hunter-saxton chain", 120.0, [](Check& ck) {
    TheoremReport thm = verify_theorem6(make_var("kappa"));
    ck.require(thm.pass, "symbolic transport residuals nonzero");

    CascadeReport cas = verify_cascade(make_var("kappa"));
    ck.require(cas.pass, "cascade residuals nonzero");
    ck.require(cas.h_trivial, "H of the factored equation nonzero");

    ContactInvariants ci = contact_invariants(euler_poisson(make_var("kappa")));
    ck.require(is_zero(ci.P + ci.Q - make_int(2)), "P + Q != 2");

    Expr t = make_var("t"), x = make_var("x"), zero = make_int(0);
    std::vector<std::pair<Expr, Expr>> sr = {
        {zero, zero}, {t, make_int(1)}, {t * t, x}, {t * t * t, x}};
    for (Rational k : {Rational(1, 2), Rational(1, 3), Rational(1)})
      for (auto& [S, R] : sr)
        try {
          general_solution_ep(k, S, R);  // residual checked internally
        } catch (const std::exception& e) {
          ck.require(false, std::string("solution catalog: ") + e.what());
        }

    for (auto& [k, S, R] : std::vector<std::tuple<Rational, Expr, Expr>>{
             {Rational(1, 2), zero, make_int(1)},
             {Rational(1, 3), t, x},
             {Rational(1), t * t, x}}) {
      NumericReport rep = check_hs_solution(general_solution_hs(k, S, R));
      std::ostringstream os;
      os << "numeric residual " << rep.max_residual << " for kappa "
         << k.get_str();
      ck.require(rep.pass && !rep.degenerate && rep.max_residual < 1e-6,
                 os.str());
    }
  });

  run(9, "randomized property suites", 0, [](Check& ck) {
    Chart chart;
    for (const char* n : {"t", "x", "y"})
      chart.coords.push_back(Session::instance().var(n));
    VarId t = chart.coords[0], x = chart.coords[1];

    ExprGen gen(2026);
    int dd_bad = 0, leibniz_bad = 0, mixed_bad = 0, idem_bad = 0;
    for (int i = 0; i < 500; ++i) {
      Expr f = gen.gen(3), g = gen.gen(2);
      if (!form_is_zero(d(d(chart, f)))) ++dd_bad;
      OneForm lhs = d(chart, canonicalize(f * g));
      OneForm rhs = f * d(chart, g) + g * d(chart, f);
      if (!forms_equal(lhs, rhs)) ++leibniz_bad;
      if (!is_zero(diff(diff(f, t), x) - diff(diff(f, x), t))) ++mixed_bad;
      Expr c = canonicalize(f);
      if (canonicalize(c) != c) ++idem_bad;
    }
    ck.require(dd_bad == 0, "d(d f) != 0 in " + std::to_string(dd_bad));
    ck.require(leibniz_bad == 0,
               "leibniz fails in " + std::to_string(leibniz_bad));
    ck.require(mixed_bad == 0,
               "mixed partials differ in " + std::to_string(mixed_bad));
    ck.require(idem_bad == 0,
               "canonicalize not idempotent in " + std::to_string(idem_bad));

    std::mt19937_64 rng(91);
    std::uniform_real_distribution<double> dist(0.6, 1.4);
    int eval_bad = 0, checked = 0;
    ExprGen egen(4096);
    while (checked < 500) {
      Expr e = egen.gen(3);
      Expr c = canonicalize(e);
      Bindings b;
      for (VarId v : chart.coords) b[v] = dist(rng);
      try {
        double v1 = eval_numeric(e, b), v2 = eval_numeric(c, b);
        if (!std::isfinite(v1) || !std::isfinite(v2) ||
            std::fabs(v1) > 1e8)
          continue;
        ++checked;
        if (std::fabs(v1 - v2) > 1e-9 * std::max(1.0, std::fabs(v1)))
          ++eval_bad;
      } catch (const EvalError&) {
        continue;
      }
    }
    ck.require(eval_bad == 0,
               "eval drifts under canonicalize in " + std::to_string(eval_bad));

    // verdict stability of the equivalence decision across seeds
    auto family = [](const char* p, const char* q) {
      return LinearHyperbolicEquation::make(
          parse(std::string("1")),
          parse(std::string("2*((") + p + ") - 1)/((" + q + ")*(t + x))"),
          parse(std::string("2*(1 - ((") + p + ") - 1)*(t + x))/((" + q +
                ")*(t + x)^2)"));
    };
    auto a = family("t", "1 + t");
    SubstitutionMap m;
    m.set_var(a.t, parse("t + 1/5"));
    auto b2 = LinearHyperbolicEquation::make(
        substitute(a.T, m), substitute(a.X, m), substitute(a.U, m));
    auto ep_half = euler_poisson(parse("1/2"));
    auto ep_two = euler_poisson(parse("2"));
    for (uint64_t seed : {7ull, 11ull, 23ull}) {
      EquivConfig cfg;
      cfg.seed = seed;
      ck.require(equivalent(a, b2, cfg).verdict == EquivVerdict::Equivalent,
                 "shifted pair not Equivalent at seed " + std::to_string(seed));
      ck.require(
          equivalent(ep_half, ep_two, cfg).verdict == EquivVerdict::Inequivalent,
          "distinct constants not Inequivalent at seed " +
              std::to_string(seed));
    }
  });

  return out;
}

}  // namespace cartanlab

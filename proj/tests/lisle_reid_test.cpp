#include <doctest.h>

#include <cartanlab/lisle_reid.hpp>
#include <cartanlab/parse.hpp>

using namespace cartanlab;

namespace {

// xi_x = eta/y, xi_y = 0, eta_y = eta/y, eta_x parametric
DefiningSystem scaling_group() {
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

DefiningSystem translation_group() {
  DefiningSystem sys;
  sys.n = 2;
  sys.variables = {Session::instance().var("x"), Session::instance().var("y")};
  sys.unknowns = {"xi", "eta"};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      sys.principal[{i, j}] = {{}, {parse("0"), parse("0")}};
  return sys;
}

// rescale forms and pis diagonally and compare structures exactly
bool isomorphic_by_scaling(const AbstractStructure& a,
                           const AbstractStructure& b,
                           const std::vector<Rational>& form_scales,
                           const std::vector<Rational>& pi_scales) {
  if (a.forms.size() != b.forms.size() || a.pis.size() != b.pis.size())
    return false;
  AbstractStructure scaled = a;
  for (size_t i = 0; i < a.equations.size(); ++i) {
    for (auto& [rho, j, v] : scaled.equations[i].pi_terms)
      v = v * pi_scales[rho] * form_scales[j] / form_scales[i];
    for (auto& [j, k, v] : scaled.equations[i].c_terms)
      v = v * form_scales[j] * form_scales[k] / form_scales[i];
  }
  for (size_t i = 0; i < a.equations.size(); ++i) {
    if (scaled.equations[i].pi_terms != b.equations[i].pi_terms) return false;
    if (scaled.equations[i].c_terms != b.equations[i].c_terms) return false;
  }
  return true;
}

}  // namespace

TEST_CASE("scaling-group system validates and picks y0 = 1 by default") {
  DefiningSystem sys = scaling_group();
  CHECK(validate(sys).warnings.empty());
  std::vector<Rational> x0 = default_base_point(sys);
  REQUIRE(x0.size() == 2);
  CHECK(x0[0] == 0);
  CHECK(x0[1] == 1);

  AbstractStructure s = structure_equations(sys);
  REQUIRE(s.forms.size() == 2);
  REQUIRE(s.pis.size() == 1);
  // dw1 = -w1^w2, dw2 = pi1^w1
  CHECK(s.equations[0].pi_terms.empty());
  CHECK(s.equations[0].c_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 1, Rational(-1)}});
  CHECK(s.equations[1].pi_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 0, Rational(1)}});
  CHECK(s.equations[1].c_terms.empty());
}

TEST_CASE("base-point dependence is a pure rescaling") {
  DefiningSystem sys = scaling_group();
  AbstractStructure s1 = structure_equations(sys, {Rational(0), Rational(1)});
  AbstractStructure s2 = structure_equations(sys, {Rational(0), Rational(2)});
  CHECK(s2.equations[0].c_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 1, Rational(-1, 2)}});

  bool found = false;
  std::vector<Rational> scale_set = {Rational(1),    Rational(2),
                                     Rational(1, 2), Rational(3),
                                     Rational(1, 3)};
  for (const Rational& l : scale_set)
    for (const Rational& m : scale_set)
      for (const Rational& p : scale_set)
        found = found || isomorphic_by_scaling(s1, s2, {l, m}, {p});
  CHECK(found);
}

TEST_CASE("translation system is abelian") {
  AbstractStructure s = structure_equations(translation_group());
  for (const auto& eq : s.equations) {
    CHECK(eq.pi_terms.empty());
    CHECK(eq.c_terms.empty());
  }
}

TEST_CASE("one-dimensional system with parametric first derivative") {
  DefiningSystem sys;
  sys.n = 1;
  sys.variables = {Session::instance().var("x")};
  sys.unknowns = {"xi"};
  sys.parametric = {{0, 0}};
  AbstractStructure s = structure_equations(sys);
  CHECK(s.equations[0].pi_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 0, Rational(1)}});
  CHECK(s.equations[0].c_terms.empty());
}

TEST_CASE("partition violations are rejected") {
  DefiningSystem sys = scaling_group();
  sys.principal.erase({0, 1});  // xi_y neither parametric nor principal
  CHECK_THROWS_WITH_AS(validate(sys),
                       doctest::Contains("neither parametric nor principal"),
                       Error);
  sys.principal[{0, 1}] = {{parse("0")}, {parse("0"), parse("0")}};
  sys.parametric.push_back({0, 1});  // now assigned twice
  CHECK_THROWS_WITH_AS(validate(sys),
                       doctest::Contains("more than once"), Error);
}

TEST_CASE("singular base point is reported") {
  DefiningSystem sys = scaling_group();
  CHECK_THROWS_WITH_AS(structure_equations(sys, {Rational(0), Rational(0)}),
                       doctest::Contains("singular"), Error);
}

TEST_CASE("incompatible constant brackets fail the involutivity gate") {
  // b chosen so that c^3_12 = 1 and c^1_13 = 1; then d(dw3) has a pure
  // w1^w2^w3 component and the Jacobi test must reject the system
  DefiningSystem sys;
  sys.n = 3;
  sys.variables = {Session::instance().var("x"), Session::instance().var("y"),
                   Session::instance().var("zz")};
  sys.unknowns = {"k1", "k2", "k3"};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j)
      sys.principal[{i, j}] = {{}, {parse("0"), parse("0"), parse("0")}};
  sys.principal[{2, 1}].b[0] = parse("1");
  sys.principal[{0, 2}].b[0] = parse("1");
  CHECK_THROWS_WITH_AS(structure_equations(sys),
                       doctest::Contains("not involutive"), Error);
}

TEST_CASE("closure warning on a fully determined inconsistent system") {
  // xi_x = y xi, xi_y = 0, eta_* = 0: d_y(y xi) = xi != 0 = d_x(0)
  DefiningSystem sys;
  sys.n = 2;
  sys.variables = {Session::instance().var("x"), Session::instance().var("y")};
  sys.unknowns = {"xi", "eta"};
  sys.principal[{0, 0}] = {{}, {parse("y"), parse("0")}};
  sys.principal[{0, 1}] = {{}, {parse("0"), parse("0")}};
  sys.principal[{1, 0}] = {{}, {parse("0"), parse("0")}};
  sys.principal[{1, 1}] = {{}, {parse("0"), parse("0")}};
  CHECK(!validate(sys).warnings.empty());
}

TEST_CASE("defining system JSON input") {
  const char* text = R"({
    "n": 2, "vars": ["x", "y"], "unknowns": ["xi", "eta"],
    "parametric": [["eta", "x"]],
    "principal": {
      "xi,x":  {"A": ["0"], "b": ["0", "1/y"]},
      "xi,y":  {"A": ["0"], "b": ["0", "0"]},
      "eta,y": {"A": ["0"], "b": ["0", "1/y"]}
    }
  })";
  DefiningSystem sys = defining_system_from_json(text);
  AbstractStructure s = structure_equations(sys);
  CHECK(s.equations[0].c_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 1, Rational(-1)}});
  CHECK(s.equations[1].pi_terms ==
        std::vector<std::tuple<int, int, Rational>>{{0, 0, Rational(1)}});

  CHECK_THROWS_WITH_AS(
      defining_system_from_json(R"({
        "n": 2, "vars": ["x", "y"], "unknowns": ["xi", "tau"],
        "parametric": [],
        "principal": {"tau,yy": {"A": [], "b": ["0", "0"]}}
      })"),
      doctest::Contains("order greater than one"), Error);
  CHECK_THROWS_AS(defining_system_from_json("nope"), Error);
}

#include <doctest.h>

#include <cartanlab/parse.hpp>
#include <cartanlab/structure_verifier.hpp>

using namespace cartanlab;

namespace {

using Terms = std::vector<std::tuple<int, int, Rational>>;

AbstractStructure l_se_2() {
  AbstractStructure s;
  s.forms = {"w1", "w2", "w3", "w4", "w5", "w6"};
  s.pis = {"pi1", "pi2"};
  s.equations.resize(6);
  s.equations[0].c_terms = {{0, 5, -1}};
  s.equations[1].c_terms = {{1, 2, -1}, {1, 5, 1}};
  s.equations[2].c_terms = {{0, 3, -1}, {1, 4, -1}};
  s.equations[3].pi_terms = {{0, 0, 1}};
  s.equations[3].c_terms = {{3, 5, 1}};
  s.equations[4].pi_terms = {{1, 1, 1}};
  s.equations[4].c_terms = {{2, 4, -1}, {4, 5, -1}};
  s.equations[5].c_terms = {{0, 3, -1}};
  return s;
}

// contact symmetries of Liouville's equation, Maurer-Cartan style:
// six base forms theta1..theta5, eta1 and two free forms eta2, chi
AbstractStructure liouville_cartan_abstract() {
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

// order-2 block of the two-copy diffeomorphism series plus boundary forms
AbstractStructure liouville_series_abstract() {
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

// six-form subsystem of the Liouville moving-coframe structure equations
AbstractStructure liouville_moving_abstract() {
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

FormSubstitution one_to_one(
    std::initializer_list<std::pair<std::string, std::string>> pairs) {
  FormSubstitution m;
  for (const auto& [src, dst] : pairs) m.map[src] = {{Rational(1), dst}};
  return m;
}

}  // namespace

TEST_CASE("coframe datasets verify their structure equations") {
  for (const char* name :
       {"liouville_cartan", "liouville_moving_coframe", "euler_poisson",
        "hunter_saxton"}) {
    CAPTURE(name);
    Dataset ds = load_dataset(name);
    REQUIRE(ds.coframe.has_value());
    VerifyReport rep = verify_coframe(*ds.coframe, ds.claims);
    for (const ClaimReport& c : rep.claims) {
      CAPTURE(c.target);
      CAPTURE(c.detail);
      CHECK(c.pass);
    }
    CHECK(coframe_independent(*ds.coframe));
  }
}

TEST_CASE("second-order contact coframe verifies its structure equations") {
  Dataset ds = load_dataset("cont_j2_n2");
  REQUIRE(ds.coframe.has_value());
  REQUIRE(ds.coframe->chart->dim() == 33);
  VerifyReport rep = verify_coframe(*ds.coframe, ds.claims);
  for (const ClaimReport& c : rep.claims) {
    CAPTURE(c.target);
    CAPTURE(c.detail);
    CHECK(c.pass);
  }
  CHECK(coframe_independent(*ds.coframe, 5, 3));
}

TEST_CASE("hunter-saxton convenience verifier") {
  VerifyReport rep = verify_hs_coframe();
  CHECK(rep.pass);
  REQUIRE(rep.claims.size() == 5);
}

TEST_CASE("broken claims are reported, not masked") {
  Dataset ds = load_dataset("euler_poisson");
  // flip a known coefficient: residual leaves the companion ideal
  ds.claims[1].known[0].coeff = parse("2*(1-kappa)");
  VerifyReport rep = verify_coframe(*ds.coframe, ds.claims);
  CHECK(!rep.pass);
  CHECK(!rep.claims[1].pass);
  CHECK(rep.claims[0].pass);
}

TEST_CASE("cartan equivalence-method equations map onto the lisle-reid ones") {
  AbstractStructure dst = *load_dataset("lisle_reid_liouville").structure;
  CHECK(jacobi_check(dst).pass);

  FormSubstitution m;
  m.map["t1"] = {{1, "w3"}};
  m.map["t2"] = {{-1, "w2"}, {-1, "w4"}};
  m.map["t3"] = {{1, "w1"}};
  m.map["t4"] = {{-1, "w1"}, {-1, "w5"}};
  m.map["t5"] = {{1, "w2"}};
  m.map["e1"] = {{-1, "w6"}};
  m.map["e2"] = {{-1, "pi1"}};
  m.map["chi"] = {{-1, "pi2"}};
  AbstractStructure src = liouville_cartan_abstract();
  SubstitutionReport rep = verify_substitution(src, m, dst);
  CAPTURE(rep.mismatches.empty() ? "" : rep.mismatches.front());
  CHECK(rep.pass);

  // the naive identification eta1 = +w6 does not close
  m.map["e1"] = {{1, "w6"}};
  CHECK(!verify_substitution(src, m, dst).pass);
}

TEST_CASE("series prolongation equations map onto the lisle-reid ones") {
  AbstractStructure dst = *load_dataset("lisle_reid_liouville").structure;
  FormSubstitution m;
  m.map["s1"] = {{1, "w1"}};
  m.map["s2"] = {{1, "w2"}};
  m.map["f1"] = {{1, "w6"}};
  m.map["f2"] = {{-1, "w4"}};
  m.map["p1"] = {{1, "w3"}, {-1, "w6"}};
  m.map["p2"] = {{-1, "w5"}};
  m.map["f3"] = {{1, "pi1"}};
  m.map["p3"] = {{1, "pi2"}};
  AbstractStructure src = liouville_series_abstract();
  SubstitutionReport rep = verify_substitution(src, m, dst);
  CAPTURE(rep.mismatches.empty() ? "" : rep.mismatches.front());
  CHECK(rep.pass);
}

TEST_CASE("moving-coframe equations map onto the lisle-reid ones") {
  AbstractStructure dst = *load_dataset("lisle_reid_liouville").structure;
  FormSubstitution m;
  m.map["th0"] = {{1, "w3"}};
  m.map["th1"] = {{-1, "w2"}, {-1, "w4"}};
  m.map["th2"] = {{-1, "w1"}, {-1, "w5"}};
  m.map["k1"] = {{1, "w1"}};
  m.map["k2"] = {{1, "w2"}};
  m.map["e1"] = {{-1, "w6"}};
  m.map["s11"] = {{1, "pi1"}};
  m.map["s22"] = {{1, "pi2"}};
  AbstractStructure src = liouville_moving_abstract();
  SubstitutionReport rep = verify_substitution(src, m, dst);
  CAPTURE(rep.mismatches.empty() ? "" : rep.mismatches.front());
  CHECK(rep.pass);

  // inverse map takes the lisle-reid system back
  FormSubstitution inv = invert(m, src, dst);
  CHECK(verify_substitution(dst, inv, src).pass);
}

TEST_CASE("degenerate or incomplete maps are rejected") {
  AbstractStructure dst = *load_dataset("lisle_reid_liouville").structure;
  AbstractStructure src = liouville_moving_abstract();
  FormSubstitution m = one_to_one({{"th0", "w3"},
                                   {"th1", "w4"},
                                   {"th2", "w5"},
                                   {"k1", "w1"},
                                   {"k2", "w2"},
                                   {"s11", "pi1"},
                                   {"s22", "pi2"}});
  CHECK_THROWS_WITH_AS(verify_substitution(src, m, dst),
                       doctest::Contains("does not cover"), Error);
  m.map["e1"] = {{1, "w3"}};  // same image as th0: singular
  CHECK_THROWS_WITH_AS(verify_substitution(src, m, dst),
                       doctest::Contains("not invertible"), Error);
}

TEST_CASE("line diffeomorphism series") {
  AbstractStructure s2 = diffeo_r_series(2);
  REQUIRE(s2.forms ==
          std::vector<std::string>{"sigma1", "phi0", "phi1", "phi2"});
  REQUIRE(s2.pis == std::vector<std::string>{"phi3"});
  // d sigma1 = phi1 ^ sigma1, d phi0 = -phi1 ^ sigma1
  CHECK(s2.equations[0].c_terms == Terms{{0, 2, -1}});
  CHECK(s2.equations[1].c_terms == Terms{{0, 2, 1}});
  // d phi1 = -phi2 ^ sigma1
  CHECK(s2.equations[2].c_terms == Terms{{0, 3, 1}});
  CHECK(s2.equations[2].pi_terms.empty());
  // d phi2 = -phi3 ^ sigma1 - phi1 ^ phi2
  CHECK(s2.equations[3].pi_terms == Terms{{0, 0, -1}});
  CHECK(s2.equations[3].c_terms == Terms{{2, 3, -1}});

  // binomial collapse at order 4: d phi3 = -phi4 ^ sigma1 - 2 phi1 ^ phi3
  AbstractStructure s4 = diffeo_r_series(4);
  CHECK(s4.equations[4].pi_terms.empty());
  CHECK(s4.equations[4].c_terms == Terms{{0, 5, 1}, {2, 4, -2}});

  for (int n = 1; n <= 8; ++n) CHECK(jacobi_check(diffeo_r_series(n)).pass);
  CHECK_THROWS_AS(diffeo_r_series(0), Error);
}

TEST_CASE("liouville contact structure is a product of two line series") {
  for (int n : {2, 3, 4}) {
    CAPTURE(n);
    ProductReport rep = liouville_product_check(n);
    CHECK(rep.phi_copy_matches);
    CHECK(rep.psi_copy_matches);
    CHECK(rep.cross_terms == 0);
    CHECK(rep.sigma3_cross_terms == 2);
    CHECK(rep.jacobi_pass);
    CHECK(rep.pass);
  }
  CHECK_THROWS_AS(liouville_product_check(1), Error);
}

TEST_CASE("dataset loader diagnostics") {
  CHECK_THROWS_WITH_AS(load_dataset("no_such_dataset"),
                       doctest::Contains("cannot open"), Error);
  CHECK_THROWS_WITH_AS(dataset_from_json("x", "{"),
                       doctest::Contains("bad dataset"), Error);
  CHECK_THROWS_WITH_AS(
      dataset_from_json("x", R"({"kind":"coframe","chart":["x"],
        "forms":[["w",{"q":"1"}]]})"),
      doctest::Contains("d<coord> or @<form>"), Error);
  CHECK_THROWS_WITH_AS(dataset_from_json("x", R"({"kind":"spline"})"),
                       doctest::Contains("unknown dataset kind"), Error);
  Dataset ds = load_dataset("euler_poisson");
  CHECK_THROWS_WITH_AS(ds.coframe->form("nope"),
                       doctest::Contains("no form named"), Error);
}

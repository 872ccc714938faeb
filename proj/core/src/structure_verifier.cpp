#include "cartanlab/structure_verifier.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "cartanlab/eval.hpp"
#include "cartanlab/parse.hpp"
#include "cartanlab/serialize.hpp"

namespace cartanlab {

int NamedCoframe::index(const std::string& name) const {
  auto it = std::find(names.begin(), names.end(), name);
  if (it == names.end()) throw Error("no form named '" + name + "'");
  return (int)(it - names.begin());
}

const OneForm& NamedCoframe::form(const std::string& name) const {
  return forms[index(name)];
}

VerifyReport verify_coframe(const NamedCoframe& cf,
                            const std::vector<StructureClaim>& claims) {
  VerifyReport rep;
  for (const StructureClaim& cl : claims) {
    ClaimReport cr;
    cr.target = cl.target;
    TwoForm residual = d(cf.form(cl.target));
    for (const auto& t : cl.known)
      residual = residual - t.coeff * wedge(cf.form(t.left), cf.form(t.right));
    if (cl.unknowns.empty()) {
      cr.pass = form_is_zero(residual);
      if (!cr.pass) {
        for (const auto& [key, v] : residual.comp)
          if (!is_zero(v)) {
            cr.detail = "nonzero residual on d" +
                        Session::instance().var_name(
                            cf.chart->coords[key.first]) +
                        "^d" +
                        Session::instance().var_name(
                            cf.chart->coords[key.second]);
            break;
          }
      }
    } else {
      std::vector<OneForm> gens;
      for (const auto& u : cl.unknowns) gens.push_back(cf.form(u.companion));
      SolveIdealResult s = solve_ideal(residual, gens);
      if (s.status == SolveIdealResult::Status::Solved) {
        cr.pass = true;
        cr.solved = s.alphas;
        std::string names;
        for (const auto& u : cl.unknowns)
          names += (names.empty() ? "" : ", ") + u.pi;
        cr.detail = "solved " + names;
      } else {
        cr.detail = s.status == SolveIdealResult::Status::Unsolvable
                        ? "residual lies outside the companion ideal"
                        : "companion forms are dependent";
      }
    }
    rep.pass = rep.pass && cr.pass;
    rep.claims.push_back(std::move(cr));
  }
  return rep;
}

bool coframe_independent(const NamedCoframe& cf, uint64_t seed, int points) {
  const int n = (int)cf.chart->dim();
  const int m = (int)cf.forms.size();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> dist(0.4, 1.6);
  int checked = 0;
  for (int trial = 0; trial < 8 * points && checked < points; ++trial) {
    Bindings b;
    for (VarId v : cf.chart->coords) b[v] = dist(rng);
    for (VarId v : cf.chart->constants) b[v] = dist(rng);
    std::vector<std::vector<double>> M(m, std::vector<double>(n, 0.0));
    double scale = 0;
    try {
      for (int r = 0; r < m; ++r)
        for (const auto& [c, e] : cf.forms[r].comp) {
          M[r][c] = eval_numeric(e, b);
          scale = std::max(scale, std::abs(M[r][c]));
        }
    } catch (const EvalError&) {
      continue;
    }
    ++checked;
    // row rank by Gaussian elimination with partial pivoting
    int rank = 0;
    for (int col = 0; col < n && rank < m; ++col) {
      int pr = -1;
      double best = 1e-9 * std::max(scale, 1.0);
      for (int r = rank; r < m; ++r)
        if (std::abs(M[r][col]) > best) {
          best = std::abs(M[r][col]);
          pr = r;
        }
      if (pr < 0) continue;
      std::swap(M[rank], M[pr]);
      for (int r = rank + 1; r < m; ++r) {
        double f = M[r][col] / M[rank][col];
        for (int c = col; c < n; ++c) M[r][c] -= f * M[rank][c];
      }
      ++rank;
    }
    if (rank < m) return false;
  }
  return checked > 0;
}

// --- constant-coefficient substitutions -------------------------------------

namespace {

using Two = std::map<std::pair<int, int>, Rational>;

void two_add(Two& t, int a, int b, const Rational& v) {
  if (a == b || v == 0) return;
  Rational w = a < b ? v : Rational(-v);
  auto key = std::minmax(a, b);
  auto it = t.find(key);
  if (it == t.end()) {
    t.emplace(key, w);
  } else {
    it->second += w;
    if (it->second == 0) t.erase(it);
  }
}

int name_index(const std::vector<std::string>& names, const std::string& n,
               const char* what) {
  auto it = std::find(names.begin(), names.end(), n);
  if (it == names.end())
    throw Error(std::string(what) + " '" + n + "' not found");
  return (int)(it - names.begin());
}

using Mat = std::vector<std::vector<Rational>>;

Mat invert_rational(Mat M) {
  const int n = (int)M.size();
  Mat inv(n, std::vector<Rational>(n, Rational(0)));
  for (int i = 0; i < n; ++i) inv[i][i] = 1;
  for (int col = 0; col < n; ++col) {
    int pr = -1;
    for (int r = col; r < n; ++r)
      if (M[r][col] != 0) {
        pr = r;
        break;
      }
    if (pr < 0) throw Error("substitution map is not invertible");
    std::swap(M[col], M[pr]);
    std::swap(inv[col], inv[pr]);
    Rational p = M[col][col];
    for (int c = 0; c < n; ++c) {
      M[col][c] /= p;
      inv[col][c] /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col || M[r][col] == 0) continue;
      Rational f = M[r][col];
      for (int c = 0; c < n; ++c) {
        M[r][c] -= f * M[col][c];
        inv[r][c] -= f * inv[col][c];
      }
    }
  }
  return inv;
}

// images of source forms over dst forms and source pis over dst pis
struct ResolvedMap {
  Mat F;  // src form -> dst form coefficients
  Mat P;  // src pi -> dst pi coefficients
};

ResolvedMap resolve(const FormSubstitution& m, const AbstractStructure& src,
                    const AbstractStructure& dst) {
  ResolvedMap r;
  r.F.assign(src.forms.size(),
             std::vector<Rational>(dst.forms.size(), Rational(0)));
  r.P.assign(src.pis.size(),
             std::vector<Rational>(dst.pis.size(), Rational(0)));
  for (size_t i = 0; i < src.forms.size(); ++i) {
    auto it = m.map.find(src.forms[i]);
    if (it == m.map.end())
      throw Error("map does not cover form '" + src.forms[i] + "'");
    for (const auto& [c, name] : it->second)
      r.F[i][name_index(dst.forms, name, "destination form")] += c;
  }
  for (size_t i = 0; i < src.pis.size(); ++i) {
    auto it = m.map.find(src.pis[i]);
    if (it == m.map.end())
      throw Error("map does not cover pi '" + src.pis[i] + "'");
    for (const auto& [c, name] : it->second)
      r.P[i][name_index(dst.pis, name, "destination pi")] += c;
  }
  if (src.forms.size() != dst.forms.size() || src.pis.size() != dst.pis.size())
    throw Error("substitution map is not invertible");
  invert_rational(r.F);  // existence check
  if (!r.P.empty()) invert_rational(r.P);
  return r;
}

// d of destination symbol a as a 2-form over combined indices
// (forms 0..n-1, pis n..n+p-1)
Two dst_differential(const AbstractStructure& dst, int a) {
  const int n = (int)dst.forms.size();
  Two t;
  for (const auto& [rho, j, c] : dst.equations[a].pi_terms)
    two_add(t, n + rho, j, c);
  for (const auto& [j, k, c] : dst.equations[a].c_terms) two_add(t, j, k, c);
  return t;
}

std::string describe(const AbstractStructure& dst, std::pair<int, int> key) {
  const int n = (int)dst.forms.size();
  auto nm = [&](int i) { return i < n ? dst.forms[i] : dst.pis[i - n]; };
  return nm(key.first) + "^" + nm(key.second);
}

}  // namespace

SubstitutionReport verify_substitution(const AbstractStructure& src,
                                       const FormSubstitution& m,
                                       const AbstractStructure& dst) {
  ResolvedMap rm = resolve(m, src, dst);
  const int n = (int)dst.forms.size();
  SubstitutionReport rep;
  for (size_t i = 0; i < src.forms.size(); ++i) {
    Two lhs, rhs;
    for (int a = 0; a < n; ++a) {
      if (rm.F[i][a] == 0) continue;
      for (const auto& [key, v] : dst_differential(dst, a))
        two_add(lhs, key.first, key.second, rm.F[i][a] * v);
    }
    for (const auto& [rho, j, c] : src.equations[i].pi_terms)
      for (size_t pc = 0; pc < dst.pis.size(); ++pc) {
        if (rm.P[rho][pc] == 0) continue;
        for (int b = 0; b < n; ++b)
          if (rm.F[j][b] != 0)
            two_add(rhs, n + (int)pc, b, c * rm.P[rho][pc] * rm.F[j][b]);
      }
    for (const auto& [j, k, c] : src.equations[i].c_terms)
      for (int b1 = 0; b1 < n; ++b1) {
        if (rm.F[j][b1] == 0) continue;
        for (int b2 = 0; b2 < n; ++b2)
          if (rm.F[k][b2] != 0)
            two_add(rhs, b1, b2, c * rm.F[j][b1] * rm.F[k][b2]);
      }
    if (lhs != rhs) {
      rep.pass = false;
      // pinpoint one differing component
      for (const auto& [key, v] : lhs)
        if (!rhs.count(key) || rhs.at(key) != v) {
          rep.mismatches.push_back("d(" + src.forms[i] + ") differs on " +
                                   describe(dst, key));
          break;
        }
      if (rep.mismatches.empty() ||
          rep.mismatches.back().find(src.forms[i]) == std::string::npos)
        for (const auto& [key, v] : rhs)
          if (!lhs.count(key)) {
            rep.mismatches.push_back("d(" + src.forms[i] + ") differs on " +
                                     describe(dst, key));
            break;
          }
    }
  }
  return rep;
}

FormSubstitution invert(const FormSubstitution& m, const AbstractStructure& src,
                        const AbstractStructure& dst) {
  ResolvedMap rm = resolve(m, src, dst);
  FormSubstitution out;
  Mat Fi = invert_rational(rm.F);
  for (size_t a = 0; a < dst.forms.size(); ++a) {
    std::vector<std::pair<Rational, std::string>> combo;
    for (size_t i = 0; i < src.forms.size(); ++i)
      if (Fi[a][i] != 0) combo.push_back({Fi[a][i], src.forms[i]});
    out.map[dst.forms[a]] = std::move(combo);
  }
  if (!rm.P.empty()) {
    Mat Pi = invert_rational(rm.P);
    for (size_t a = 0; a < dst.pis.size(); ++a) {
      std::vector<std::pair<Rational, std::string>> combo;
      for (size_t i = 0; i < src.pis.size(); ++i)
        if (Pi[a][i] != 0) combo.push_back({Pi[a][i], src.pis[i]});
      out.map[dst.pis[a]] = std::move(combo);
    }
  }
  return out;
}

// --- diffeomorphisms of the line --------------------------------------------

namespace {

Rational factorial(int n) {
  Rational r(1);
  for (int i = 2; i <= n; ++i) r *= i;
  return r;
}

// equation for d phi_j in a series block. sigma: index of the sigma form;
// base: index of phi_0; next(j): index of phi_j or -1 when phi_j is the
// boundary pi
void series_equation(AbstractStructure::Equation& eq, int j, int sigma,
                     int base, int order, int boundary_rho) {
  std::map<std::pair<int, int>, Rational> acc;
  auto add = [&acc](int a, int b, const Rational& v) {
    if (a == b) return;
    Rational w = a < b ? v : Rational(-v);
    acc[std::minmax(a, b)] += w;
  };
  if (j + 1 > order) {
    eq.pi_terms.push_back({boundary_rho, sigma, Rational(-1)});
  } else {
    add(base + j + 1, sigma, Rational(-1));
  }
  for (int p = 0; p + 1 <= j; ++p) {
    int q = j - p;
    if (q < 1) continue;
    add(base + p + 1, base + q, factorial(j) / (factorial(p) * factorial(q)));
  }
  for (const auto& [key, v] : acc)
    if (v != 0) eq.c_terms.push_back({key.first, key.second, v});
}

}  // namespace

AbstractStructure diffeo_r_series(int N) {
  if (N < 1) throw Error("series order must be at least 1");
  AbstractStructure s;
  s.forms.push_back("sigma1");
  for (int j = 0; j <= N; ++j) s.forms.push_back("phi" + std::to_string(j));
  s.pis.push_back("phi" + std::to_string(N + 1));
  s.equations.resize(s.forms.size());
  // d sigma1 = phi1 ^ sigma1; d phi0 = -phi1 ^ sigma1
  s.equations[0].c_terms = {{0, 2, Rational(-1)}};
  s.equations[1].c_terms = {{0, 2, Rational(1)}};
  for (int j = 1; j <= N; ++j)
    series_equation(s.equations[j + 1], j, 0, 1, N, 0);
  return s;
}

ProductReport liouville_product_check(int N) {
  if (N < 2) throw Error("the product check needs order at least 2");
  AbstractStructure s;
  s.forms = {"sigma1", "sigma2", "sigma3"};
  const int phi0 = 3, psi0 = N + 4;
  for (int j = 0; j <= N; ++j) s.forms.push_back("phi" + std::to_string(j));
  for (int j = 0; j <= N; ++j) s.forms.push_back("psi" + std::to_string(j));
  s.pis = {"phi" + std::to_string(N + 1), "psi" + std::to_string(N + 1)};
  s.equations.resize(s.forms.size());
  s.equations[0].c_terms = {{0, phi0 + 1, Rational(-1)}};
  s.equations[1].c_terms = {{1, psi0 + 1, Rational(-1)}};
  // d sigma3 = -phi2 ^ sigma1 - psi2 ^ sigma2
  s.equations[2].c_terms = {{0, phi0 + 2, Rational(1)},
                            {1, psi0 + 2, Rational(1)}};
  s.equations[phi0].c_terms = {{0, phi0 + 1, Rational(1)}};
  s.equations[psi0].c_terms = {{1, psi0 + 1, Rational(1)}};
  for (int j = 1; j <= N; ++j) {
    series_equation(s.equations[phi0 + j], j, 0, phi0, N, 0);
    series_equation(s.equations[psi0 + j], j, 1, psi0, N, 1);
  }

  ProductReport rep;
  // extract each copy and compare against the one-line series
  auto extract = [&](int sigma, int base, int rho) {
    AbstractStructure sub;
    sub.forms.push_back("sigma1");
    for (int j = 0; j <= N; ++j) sub.forms.push_back("phi" + std::to_string(j));
    sub.pis.push_back("phi" + std::to_string(N + 1));
    sub.equations.resize(sub.forms.size());
    auto remap = [&](int idx) {
      if (idx == sigma) return 0;
      if (idx >= base && idx <= base + N) return idx - base + 1;
      return -1;
    };
    std::vector<int> rows = {sigma};
    for (int j = 0; j <= N; ++j) rows.push_back(base + j);
    for (size_t r = 0; r < rows.size(); ++r) {
      for (const auto& [p, j, c] : s.equations[rows[r]].pi_terms) {
        if (p != rho || remap(j) < 0) continue;
        sub.equations[r].pi_terms.push_back({0, remap(j), c});
      }
      for (const auto& [j, k, c] : s.equations[rows[r]].c_terms) {
        int a = remap(j), b = remap(k);
        if (a < 0 || b < 0) continue;
        if (a < b)
          sub.equations[r].c_terms.push_back({a, b, c});
        else
          sub.equations[r].c_terms.push_back({b, a, Rational(-c)});
      }
      std::sort(sub.equations[r].c_terms.begin(),
                sub.equations[r].c_terms.end());
    }
    return sub;
  };
  auto normalized = [](AbstractStructure t) {
    for (auto& eq : t.equations) {
      std::sort(eq.c_terms.begin(), eq.c_terms.end());
      std::sort(eq.pi_terms.begin(), eq.pi_terms.end());
    }
    return t;
  };
  AbstractStructure ref = normalized(diffeo_r_series(N));
  auto same = [](const AbstractStructure& a, const AbstractStructure& b) {
    for (size_t i = 0; i < a.equations.size(); ++i)
      if (a.equations[i].c_terms != b.equations[i].c_terms ||
          a.equations[i].pi_terms != b.equations[i].pi_terms)
        return false;
    return true;
  };
  rep.phi_copy_matches = same(normalized(extract(0, phi0, 0)), ref);
  rep.psi_copy_matches = same(normalized(extract(1, psi0, 1)), ref);

  // terms mixing the two families anywhere
  auto family = [&](int idx) {  // 0 = phi/sigma1, 1 = psi/sigma2, 2 = sigma3
    if (idx == 0 || (idx >= phi0 && idx <= phi0 + N)) return 0;
    if (idx == 1 || (idx >= psi0 && idx <= psi0 + N)) return 1;
    return 2;
  };
  for (size_t i = 0; i < s.equations.size(); ++i) {
    for (const auto& [j, k, c] : s.equations[i].c_terms) {
      (void)c;
      bool cross = family(j) != family(k) || (int)i == 2 ||
                   family(j) == 2 || family(k) == 2;
      if ((int)i == 2) {
        if (cross) ++rep.sigma3_cross_terms;
      } else if (family(j) != family(k) || family((int)i) != family(j)) {
        ++rep.cross_terms;
      }
    }
    for (const auto& [p, j, c] : s.equations[i].pi_terms) {
      (void)c;
      if ((int)i != 2 && (p != family((int)i) || family(j) != family((int)i)))
        ++rep.cross_terms;
    }
  }
  rep.jacobi_pass = jacobi_check(s).pass;
  rep.pass = rep.phi_copy_matches && rep.psi_copy_matches &&
             rep.cross_terms == 0 && rep.sigma3_cross_terms == 2 &&
             rep.jacobi_pass;
  return rep;
}

// --- datasets ---------------------------------------------------------------

Dataset dataset_from_json(const std::string& name, const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad dataset JSON: " + std::string(e.what()));
  }
  try {
    Dataset ds;
    ds.name = name;
    std::string kind = j.at("kind").get<std::string>();
    if (kind == "abstract") {
      ds.structure = abstract_structure_from_json(j.at("structure").dump());
      return ds;
    }
    if (kind != "coframe") throw Error("unknown dataset kind '" + kind + "'");
    NamedCoframe cf;
    cf.chart = std::make_shared<Chart>();
    for (const auto& c : j.at("chart"))
      cf.chart->coords.push_back(
          Session::instance().var(c.get<std::string>()));
    if (j.count("constants"))
      for (const auto& c : j.at("constants"))
        cf.chart->constants.push_back(
            Session::instance().var(c.get<std::string>()));
    for (const auto& entry : j.at("forms")) {
      std::string fname = entry.at(0).get<std::string>();
      OneForm w = zero_one_form(*cf.chart);
      for (const auto& [key, val] : entry.at(1).items()) {
        Expr coeff = parse(val.get<std::string>());
        if (key.size() > 1 && key[0] == '@') {
          const OneForm& prev = cf.form(key.substr(1));
          w = w + coeff * prev;
        } else if (key.size() > 1 && key[0] == 'd') {
          int ci = cf.chart->index_of(Session::instance().var(key.substr(1)));
          if (ci < 0)
            throw Error("'" + key + "' is not a chart differential");
          w.add(ci, coeff);
        } else {
          throw Error("component key '" + key +
                      "' must be d<coord> or @<form>");
        }
      }
      cf.names.push_back(fname);
      cf.forms.push_back(std::move(w));
    }
    if (j.count("claims"))
      for (const auto& c : j.at("claims")) {
        StructureClaim cl;
        cl.target = c.at("target").get<std::string>();
        if (c.count("known"))
          for (const auto& t : c.at("known"))
            cl.known.push_back({parse(t.at(0).get<std::string>()),
                                t.at(1).get<std::string>(),
                                t.at(2).get<std::string>()});
        if (c.count("unknowns"))
          for (const auto& u : c.at("unknowns"))
            cl.unknowns.push_back(
                {u.at(0).get<std::string>(), u.at(1).get<std::string>()});
        ds.claims.push_back(std::move(cl));
      }
    ds.coframe = std::move(cf);
    return ds;
  } catch (const nlohmann::json::exception& e) {
    throw Error("bad dataset JSON: " + std::string(e.what()));
  }
}

std::string default_dataset_dir() {
  if (const char* env = std::getenv("CARTAN_LAB_DATASETS")) return env;
#ifdef CARTANLAB_DATASET_DIR
  return CARTANLAB_DATASET_DIR;
#else
  return "datasets";
#endif
}

Dataset load_dataset(const std::string& name) {
  std::string path = default_dataset_dir() + "/" + name + ".json";
  std::ifstream in(path);
  if (!in) throw Error("cannot open dataset file " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return dataset_from_json(name, buf.str());
}

VerifyReport verify_hs_coframe() {
  Dataset ds = load_dataset("hunter_saxton");
  if (!ds.coframe) throw Error("hunter_saxton dataset must hold a coframe");
  VerifyReport rep = verify_coframe(*ds.coframe, ds.claims);
  if (!coframe_independent(*ds.coframe)) {
    rep.pass = false;
    ClaimReport cr;
    cr.target = "(independence)";
    cr.detail = "coframe is linearly dependent at a sample point";
    rep.claims.push_back(cr);
  }
  return rep;
}

}  // namespace cartanlab

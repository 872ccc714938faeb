#include "cartanlab/lisle_reid.hpp"

#include <algorithm>
#include <functional>

#include <json.hpp>

#include "cartanlab/parse.hpp"

namespace cartanlab {

namespace {

std::string slot_name(const DefiningSystem& sys, int i, int j) {
  return sys.unknowns[i] + "," + Session::instance().var_name(sys.variables[j]);
}

void check_coefficient(const DefiningSystem& sys, Expr e,
                       const std::string& where) {
  std::vector<VarId> vars;
  collect_vars(e, vars);
  std::vector<FuncSymbolId> funcs;
  collect_funcs(e, funcs);
  if (!funcs.empty())
    throw Error("coefficient in " + where + " uses a function symbol");
  for (VarId v : vars)
    if (std::find(sys.variables.begin(), sys.variables.end(), v) ==
        sys.variables.end())
      throw Error("coefficient in " + where + " mentions '" +
                  Session::instance().var_name(v) +
                  "', which is not a system variable");
}

Rational eval_at(const DefiningSystem& sys, Expr e,
                 const std::vector<Rational>& x0, const std::string& where) {
  SubstitutionMap m;
  for (int j = 0; j < sys.n; ++j)
    m.set_var(sys.variables[j], make_rational(x0[j]));
  Expr v;
  try {
    v = canonicalize(substitute(e, m));
  } catch (const Error&) {
    throw Error("singular base point: " + where +
                " is not finite there");
  }
  if (!v.is_rational())
    throw Error("coefficient in " + where +
                " did not reduce to a number at the base point");
  return v.rational();
}

bool finite_at(const DefiningSystem& sys, const std::vector<Rational>& x0) {
  try {
    for (const auto& [slot, eq] : sys.principal) {
      for (Expr e : eq.A) eval_at(sys, e, x0, "probe");
      for (Expr e : eq.b) eval_at(sys, e, x0, "probe");
    }
  } catch (const Error&) {
    return false;
  }
  return true;
}

}  // namespace

ValidationReport validate(const DefiningSystem& sys) {
  if (sys.n < 1) throw Error("dimension must be positive");
  if ((int)sys.variables.size() != sys.n ||
      (int)sys.unknowns.size() != sys.n)
    throw Error("need exactly n variables and n unknowns");
  std::vector<std::vector<int>> owner(sys.n, std::vector<int>(sys.n, 0));
  for (auto [i, j] : sys.parametric) {
    if (i < 0 || i >= sys.n || j < 0 || j >= sys.n)
      throw Error("parametric slot out of range");
    ++owner[i][j];
  }
  for (const auto& [slot, eq] : sys.principal) {
    auto [i, j] = slot;
    (void)eq;
    if (i < 0 || i >= sys.n || j < 0 || j >= sys.n)
      throw Error("principal slot out of range");
    ++owner[i][j];
  }
  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j) {
      if (owner[i][j] == 0)
        throw Error("derivative " + slot_name(sys, i, j) +
                    " is neither parametric nor principal");
      if (owner[i][j] > 1)
        throw Error("derivative " + slot_name(sys, i, j) +
                    " is assigned more than once");
    }
  for (const auto& [slot, eq] : sys.principal) {
    auto [i, j] = slot;
    if (eq.A.size() != sys.parametric.size())
      throw Error("slot " + slot_name(sys, i, j) + " needs " +
                  std::to_string(sys.parametric.size()) + " A-coefficients");
    if ((int)eq.b.size() != sys.n)
      throw Error("slot " + slot_name(sys, i, j) + " needs " +
                  std::to_string(sys.n) + " b-coefficients");
    for (Expr e : eq.A) check_coefficient(sys, e, slot_name(sys, i, j));
    for (Expr e : eq.b) check_coefficient(sys, e, slot_name(sys, i, j));
  }

  ValidationReport rep;
  if (sys.parametric.empty()) {
    // fully determined system: cross derivatives of the right-hand sides
    // must close, i.e. for every unknown index m
    //   d_k b^i_jm + sum_l b^i_jl b^l_km  ==  (j <-> k)
    for (int i = 0; i < sys.n; ++i)
      for (int j = 0; j < sys.n; ++j)
        for (int k = j + 1; k < sys.n; ++k)
          for (int m = 0; m < sys.n; ++m) {
            Expr lhs = diff(sys.principal.at({i, j}).b[m], sys.variables[k]);
            Expr rhs = diff(sys.principal.at({i, k}).b[m], sys.variables[j]);
            for (int l = 0; l < sys.n; ++l) {
              lhs = lhs + sys.principal.at({i, j}).b[l] *
                              sys.principal.at({l, k}).b[m];
              rhs = rhs + sys.principal.at({i, k}).b[l] *
                              sys.principal.at({l, j}).b[m];
            }
            if (!is_zero(canonicalize(lhs - rhs)))
              rep.warnings.push_back(
                  "cross-derivative closure fails for " +
                  slot_name(sys, i, j) + " vs " + slot_name(sys, i, k) +
                  " on " + sys.unknowns[m] + ": system appears non-involutive");
          }
  }
  return rep;
}

std::vector<Rational> default_base_point(const DefiningSystem& sys) {
  static const Rational candidates[] = {
      Rational(0), Rational(1),     Rational(-1),    Rational(2), Rational(-2),
      Rational(1, 2), Rational(-1, 2), Rational(3),  Rational(-3)};
  const int ncand = sizeof(candidates) / sizeof(candidates[0]);
  // lattice walk outward from the origin: tuples ordered by index sum
  std::vector<int> idx(sys.n, 0);
  for (int total = 0; total <= (ncand - 1) * sys.n; ++total) {
    std::function<bool(int, int)> rec = [&](int pos, int left) -> bool {
      if (pos == sys.n) {
        if (left != 0) return false;
        std::vector<Rational> x0;
        for (int v : idx) x0.push_back(candidates[v]);
        return finite_at(sys, x0);
      }
      for (int v = 0; v < ncand && v <= left; ++v) {
        idx[pos] = v;
        if (rec(pos + 1, left - v)) return true;
      }
      return false;
    };
    if (rec(0, total)) {
      std::vector<Rational> x0;
      for (int v : idx) x0.push_back(candidates[v]);
      return x0;
    }
  }
  throw Error("no non-singular base point found on the search lattice");
}

AbstractStructure structure_equations(const DefiningSystem& sys,
                                      const std::vector<Rational>& x0) {
  validate(sys);
  if ((int)x0.size() != sys.n) throw Error("base point has wrong dimension");

  AbstractStructure out;
  for (int i = 0; i < sys.n; ++i)
    out.forms.push_back("w" + std::to_string(i + 1));
  for (size_t r = 0; r < sys.parametric.size(); ++r)
    out.pis.push_back("pi" + std::to_string(r + 1));
  out.equations.resize(sys.n);

  // b evaluated at x0, zero on parametric slots
  std::vector<std::vector<std::vector<Rational>>> b(
      sys.n, std::vector<std::vector<Rational>>(
                 sys.n, std::vector<Rational>(sys.n, Rational(0))));
  for (const auto& [slot, eq] : sys.principal) {
    auto [i, j] = slot;
    for (size_t r = 0; r < eq.A.size(); ++r) {
      Rational a = eval_at(sys, eq.A[r], x0, slot_name(sys, i, j));
      if (a != 0) out.equations[i].pi_terms.push_back({(int)r, j, a});
    }
    for (int k = 0; k < sys.n; ++k)
      b[i][j][k] = eval_at(sys, eq.b[k], x0, slot_name(sys, i, j));
  }
  for (size_t r = 0; r < sys.parametric.size(); ++r) {
    auto [i, j] = sys.parametric[r];
    out.equations[i].pi_terms.push_back({(int)r, j, Rational(1)});
  }
  for (int i = 0; i < sys.n; ++i)
    for (int j = 0; j < sys.n; ++j)
      for (int k = j + 1; k < sys.n; ++k) {
        Rational c = b[i][k][j] - b[i][j][k];
        if (c != 0) out.equations[i].c_terms.push_back({j, k, c});
      }

  JacobiReport jr = jacobi_check(out);
  if (!jr.pass) {
    std::string pt = "(";
    for (int j = 0; j < sys.n; ++j)
      pt += (j ? ", " : "") + x0[j].get_str();
    throw Error("system not involutive at " + pt + ")");
  }
  return out;
}

AbstractStructure structure_equations(const DefiningSystem& sys) {
  validate(sys);
  return structure_equations(sys, default_base_point(sys));
}

namespace {

// can the token be read as a concatenation of two or more variable names?
bool splits_into_variables(const std::string& tok,
                           const std::vector<std::string>& names, int parts) {
  if (tok.empty()) return parts >= 2;
  for (const std::string& n : names)
    if (tok.compare(0, n.size(), n) == 0 &&
        splits_into_variables(tok.substr(n.size()), names, parts + 1))
      return true;
  return false;
}

}  // namespace

DefiningSystem defining_system_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad defining-system JSON: ") + e.what());
  }
  try {
    DefiningSystem sys;
    sys.n = j.at("n").get<int>();
    std::vector<std::string> var_names;
    for (const auto& v : j.at("vars")) {
      var_names.push_back(v.get<std::string>());
      sys.variables.push_back(Session::instance().var(var_names.back()));
    }
    for (const auto& u : j.at("unknowns"))
      sys.unknowns.push_back(u.get<std::string>());

    auto unknown_index = [&](const std::string& name) {
      auto it = std::find(sys.unknowns.begin(), sys.unknowns.end(), name);
      if (it == sys.unknowns.end())
        throw Error("unknown '" + name + "' is not declared");
      return (int)(it - sys.unknowns.begin());
    };
    auto var_index = [&](const std::string& name) {
      auto it = std::find(var_names.begin(), var_names.end(), name);
      if (it == var_names.end()) {
        if (splits_into_variables(name, var_names, 0))
          throw Error(
              "derivative with respect to '" + name +
              "' has order greater than one; only first-order defining "
              "systems are supported, rewrite the system as first order");
        throw Error("variable '" + name + "' is not declared");
      }
      return (int)(it - var_names.begin());
    };

    for (const auto& p : j.at("parametric"))
      sys.parametric.push_back({unknown_index(p.at(0).get<std::string>()),
                                var_index(p.at(1).get<std::string>())});
    for (const auto& [key, val] : j.at("principal").items()) {
      size_t comma = key.find(',');
      if (comma == std::string::npos || key.find(',', comma + 1) != std::string::npos)
        throw Error("principal key '" + key + "' must be 'unknown,variable'");
      int i = unknown_index(key.substr(0, comma));
      int jdx = var_index(key.substr(comma + 1));
      DefiningSystem::PrincipalEq eq;
      for (const auto& a : val.at("A")) eq.A.push_back(parse(a.get<std::string>()));
      for (const auto& b : val.at("b")) eq.b.push_back(parse(b.get<std::string>()));
      sys.principal[{i, jdx}] = std::move(eq);
    }
    return sys;
  } catch (const nlohmann::json::exception& e) {
    throw Error(std::string("bad defining-system JSON: ") + e.what());
  }
}

}  // namespace cartanlab

#include "cartanlab/calculus.hpp"

#include <mutex>
#include <unordered_map>

namespace cartanlab {

namespace {

struct DiffKey {
  const Node* n;
  uint32_t v;
  bool operator==(const DiffKey& o) const { return n == o.n && v == o.v; }
};

struct DiffKeyHash {
  size_t operator()(const DiffKey& k) const {
    return reinterpret_cast<size_t>(k.n) * 0x9e3779b97f4a7c15ULL + k.v;
  }
};

struct DiffCache {
  std::mutex mu;
  std::unordered_map<DiffKey, Expr, DiffKeyHash> map;
};

DiffCache& diff_cache() {
  static DiffCache c;
  return c;
}

Expr diff_rec(Expr e, VarId v) {
  DiffKey key{e.node(), v.id};
  {
    DiffCache& c = diff_cache();
    std::lock_guard<std::mutex> lk(c.mu);
    auto it = c.map.find(key);
    if (it != c.map.end()) return it->second;
  }

  Expr out;
  switch (e.kind()) {
    case NodeKind::RationalConst:
      out = make_int(0);
      break;
    case NodeKind::Var:
      out = make_int(e.var() == v ? 1 : 0);
      break;
    case NodeKind::FuncApp: {
      const auto& args = Session::instance().func_args(e.func());
      int slot = -1;
      for (size_t i = 0; i < args.size(); ++i)
        if (args[i] == v) {
          slot = static_cast<int>(i);
          break;
        }
      if (slot < 0) {
        out = make_int(0);
      } else {
        std::vector<int> d = e.deriv();
        ++d[slot];
        out = make_func(e.func(), std::move(d));
      }
      break;
    }
    case NodeKind::Sum: {
      std::vector<Expr> terms;
      terms.reserve(e.arity());
      for (const Expr& k : e.children()) {
        Expr dk = diff_rec(k, v);
        if (!dk.is_zero_literal()) terms.push_back(dk);
      }
      out = make_sum(std::move(terms));
      break;
    }
    case NodeKind::Product: {
      std::vector<Expr> terms;
      const auto& kids = e.children();
      for (size_t i = 0; i < kids.size(); ++i) {
        Expr di = diff_rec(kids[i], v);
        if (di.is_zero_literal()) continue;
        std::vector<Expr> factors;
        factors.reserve(kids.size());
        for (size_t j = 0; j < kids.size(); ++j)
          factors.push_back(j == i ? di : kids[j]);
        terms.push_back(make_product(std::move(factors)));
      }
      out = make_sum(std::move(terms));
      break;
    }
    case NodeKind::Power: {
      Expr b = e.child(0), x = e.child(1);
      Expr db = diff_rec(b, v), dx = diff_rec(x, v);
      std::vector<Expr> terms;
      if (!db.is_zero_literal())
        terms.push_back(x * make_power(b, x - make_int(1)) * db);
      if (!dx.is_zero_literal()) terms.push_back(e * make_ln(b) * dx);
      out = make_sum(std::move(terms));
      break;
    }
    case NodeKind::Exp: {
      Expr da = diff_rec(e.child(0), v);
      out = da.is_zero_literal() ? make_int(0) : e * da;
      break;
    }
    case NodeKind::Ln: {
      Expr da = diff_rec(e.child(0), v);
      out = da.is_zero_literal() ? make_int(0) : da / e.child(0);
      break;
    }
  }

  DiffCache& c = diff_cache();
  std::lock_guard<std::mutex> lk(c.mu);
  c.map.emplace(key, out);
  return out;
}

}  // namespace

Expr diff(Expr e, VarId v) {
  if (!e.valid()) throw Error("invalid expression");
  if (!v.valid()) throw Error("invalid variable");
  return diff_rec(e, v);
}

Expr diff(Expr e, VarId v, int times) {
  for (int i = 0; i < times; ++i) e = diff(e, v);
  return e;
}

// --- substitution ----------------------------------------------------------

void SubstitutionMap::set_var(VarId v, Expr replacement) {
  vars_[v] = replacement;
}

void SubstitutionMap::set_func(FuncSymbolId f, std::vector<int> deriv,
                               Expr replacement) {
  funcs_[{f, std::move(deriv)}] = replacement;
}

Expr SubstitutionMap::lookup_var(VarId v) const {
  auto it = vars_.find(v);
  return it == vars_.end() ? Expr() : it->second;
}

Expr SubstitutionMap::lookup_func(FuncSymbolId f,
                                  const std::vector<int>& deriv) const {
  auto it = funcs_.find({f, deriv});
  return it == funcs_.end() ? Expr() : it->second;
}

namespace {

Expr substitute_rec(Expr e, const SubstitutionMap& map,
                    std::map<const Node*, Expr>& cache) {
  auto it = cache.find(e.node());
  if (it != cache.end()) return it->second;
  Expr out = e;
  switch (e.kind()) {
    case NodeKind::RationalConst:
      break;
    case NodeKind::Var: {
      Expr r = map.lookup_var(e.var());
      if (r.valid()) out = r;
      break;
    }
    case NodeKind::FuncApp: {
      Expr r = map.lookup_func(e.func(), e.deriv());
      if (r.valid()) out = r;
      break;
    }
    default: {
      std::vector<Expr> kids;
      kids.reserve(e.arity());
      bool changed = false;
      for (const Expr& k : e.children()) {
        Expr nk = substitute_rec(k, map, cache);
        changed |= nk != k;
        kids.push_back(nk);
      }
      if (changed) {
        switch (e.kind()) {
          case NodeKind::Sum:
            out = make_sum(std::move(kids));
            break;
          case NodeKind::Product:
            out = make_product(std::move(kids));
            break;
          case NodeKind::Power:
            out = make_power(kids[0], kids[1]);
            break;
          case NodeKind::Exp:
            out = make_exp(kids[0]);
            break;
          case NodeKind::Ln:
            out = make_ln(kids[0]);
            break;
          default:
            break;
        }
      }
      break;
    }
  }
  cache.emplace(e.node(), out);
  return out;
}

}  // namespace

Expr substitute(Expr e, const SubstitutionMap& map) {
  if (!e.valid()) throw Error("invalid expression");
  if (map.empty()) return e;
  std::map<const Node*, Expr> cache;
  return substitute_rec(e, map, cache);
}

// --- jet reduction ---------------------------------------------------------

void JetRules::add(FuncSymbolId f, std::vector<int> deriv, Expr rhs) {
  if (!rhs.valid()) throw Error("invalid rule right-hand side");
  rules_.push_back({f, std::move(deriv), rhs});
  reduce_cache_.clear();
}

Expr JetRules::reduce_func(Expr e) const {
  const auto& d = e.deriv();
  for (const Rule& r : rules_) {
    if (r.f != e.func() || r.d.size() != d.size()) continue;
    bool dominates = true;
    for (size_t i = 0; i < d.size(); ++i)
      if (d[i] < r.d[i]) {
        dominates = false;
        break;
      }
    if (!dominates) continue;
    Expr out = r.rhs;
    const auto& args = Session::instance().func_args(e.func());
    for (size_t i = 0; i < d.size(); ++i)
      for (int j = r.d[i]; j < d[i]; ++j) out = total_diff(out, args[i]);
    return reduce(out);
  }
  return e;
}

Expr JetRules::reduce(Expr e) const {
  if (!e.valid()) throw Error("invalid expression");
  auto it = reduce_cache_.find(e.node());
  if (it != reduce_cache_.end()) return it->second;
  Expr out = e;
  switch (e.kind()) {
    case NodeKind::RationalConst:
    case NodeKind::Var:
      break;
    case NodeKind::FuncApp:
      out = reduce_func(e);
      break;
    default: {
      std::vector<Expr> kids;
      kids.reserve(e.arity());
      bool changed = false;
      for (const Expr& k : e.children()) {
        Expr nk = reduce(k);
        changed |= nk != k;
        kids.push_back(nk);
      }
      if (changed) {
        switch (e.kind()) {
          case NodeKind::Sum:
            out = make_sum(std::move(kids));
            break;
          case NodeKind::Product:
            out = make_product(std::move(kids));
            break;
          case NodeKind::Power:
            out = make_power(kids[0], kids[1]);
            break;
          case NodeKind::Exp:
            out = make_exp(kids[0]);
            break;
          case NodeKind::Ln:
            out = make_ln(kids[0]);
            break;
          default:
            break;
        }
      }
      break;
    }
  }
  reduce_cache_.emplace(e.node(), out);
  return out;
}

Expr JetRules::total_diff(Expr e, VarId v) const {
  return reduce(diff(reduce(e), v));
}

}  // namespace cartanlab

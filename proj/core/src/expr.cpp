#include "cartanlab/expr.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

namespace cartanlab {

namespace {

size_t hash_combine(size_t h, size_t v) {
  return h ^ (v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2));
}

size_t hash_rational(const Rational& q) {
  size_t hn = mpz_fdiv_ui(q.get_num_mpz_t(), 0x7fffffffu);
  size_t hd = mpz_fdiv_ui(q.get_den_mpz_t(), 0x7fffffffu);
  size_t s = mpz_sgn(q.get_num_mpz_t()) < 0 ? 0x5bd1e995u : 0;
  return hash_combine(hash_combine(hn, hd), s);
}

size_t hash_node(const Node& n) {
  size_t h = static_cast<size_t>(n.kind) * 0x9e3779b1u;
  switch (n.kind) {
    case NodeKind::RationalConst:
      h = hash_combine(h, hash_rational(n.value));
      break;
    case NodeKind::Var:
      h = hash_combine(h, n.sym);
      break;
    case NodeKind::FuncApp:
      h = hash_combine(h, n.sym);
      for (int d : n.deriv) h = hash_combine(h, static_cast<size_t>(d) + 1);
      break;
    default:
      break;
  }
  for (const Expr& k : n.kids)
    h = hash_combine(h, reinterpret_cast<size_t>(k.node()));
  return h;
}

bool node_equal(const Node& a, const Node& b) {
  if (a.kind != b.kind || a.sym != b.sym || a.deriv != b.deriv ||
      a.kids.size() != b.kids.size())
    return false;
  if (a.kind == NodeKind::RationalConst && a.value != b.value) return false;
  for (size_t i = 0; i < a.kids.size(); ++i)
    if (a.kids[i] != b.kids[i]) return false;
  return true;
}

struct NodePtrHash {
  size_t operator()(const Node* n) const { return n->hash; }
};
struct NodePtrEq {
  bool operator()(const Node* a, const Node* b) const { return node_equal(*a, *b); }
};

}  // namespace

struct Session::Impl {
  mutable std::mutex mu;
  std::vector<std::string> var_names;
  std::unordered_map<std::string, uint32_t> var_index;
  struct FuncInfo {
    std::string name;
    std::vector<VarId> args;
  };
  std::vector<FuncInfo> funcs;
  std::unordered_map<std::string, uint32_t> func_index;
  std::vector<std::unique_ptr<Node>> nodes;
  std::unordered_set<const Node*, NodePtrHash, NodePtrEq> interned;
  std::unordered_map<const Node*, const Node*> canonical;
};

Session& Session::instance() {
  static Session s;
  return s;
}

Session::Impl& Session::impl() const {
  static Impl impl;
  return impl;
}

VarId Session::var(const std::string& name) {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.var_index.find(name);
  if (it != im.var_index.end()) return VarId{it->second};
  uint32_t id = static_cast<uint32_t>(im.var_names.size());
  im.var_names.push_back(name);
  im.var_index.emplace(name, id);
  return VarId{id};
}

VarId Session::find_var(const std::string& name) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.var_index.find(name);
  return it == im.var_index.end() ? VarId{} : VarId{it->second};
}

const std::string& Session::var_name(VarId v) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  return im.var_names.at(v.id);
}

FuncSymbolId Session::func(const std::string& name, const std::vector<VarId>& args) {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.func_index.find(name);
  if (it != im.func_index.end()) {
    if (im.funcs[it->second].args != args)
      throw Error("function symbol '" + name + "' redeclared with different arguments");
    return FuncSymbolId{it->second};
  }
  uint32_t id = static_cast<uint32_t>(im.funcs.size());
  im.funcs.push_back({name, args});
  im.func_index.emplace(name, id);
  return FuncSymbolId{id};
}

FuncSymbolId Session::find_func(const std::string& name) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.func_index.find(name);
  return it == im.func_index.end() ? FuncSymbolId{} : FuncSymbolId{it->second};
}

const std::string& Session::func_name(FuncSymbolId f) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  return im.funcs.at(f.id).name;
}

const std::vector<VarId>& Session::func_args(FuncSymbolId f) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  return im.funcs.at(f.id).args;
}

const Node* Session::intern(Node&& n) {
  n.hash = hash_node(n);
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.interned.find(&n);
  if (it != im.interned.end()) return *it;
  im.nodes.push_back(std::make_unique<Node>(std::move(n)));
  const Node* p = im.nodes.back().get();
  im.interned.insert(p);
  return p;
}

Expr Session::cached_canonical(Expr e) const {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  auto it = im.canonical.find(e.node());
  return it == im.canonical.end() ? Expr() : Expr(it->second);
}

void Session::remember_canonical(Expr e, Expr canon) {
  Impl& im = impl();
  std::lock_guard<std::mutex> lk(im.mu);
  im.canonical.emplace(e.node(), canon.node());
  im.canonical.emplace(canon.node(), canon.node());
}

// --- Expr accessors -------------------------------------------------------

NodeKind Expr::kind() const { return node_->kind; }
const Rational& Expr::rational() const { return node_->value; }
VarId Expr::var() const { return VarId{node_->sym}; }
FuncSymbolId Expr::func() const { return FuncSymbolId{node_->sym}; }
const std::vector<int>& Expr::deriv() const { return node_->deriv; }
size_t Expr::arity() const { return node_->kids.size(); }
Expr Expr::child(size_t i) const { return node_->kids[i]; }
const std::vector<Expr>& Expr::children() const { return node_->kids; }

bool Expr::is_zero_literal() const {
  return is_rational() && rational() == 0;
}
bool Expr::is_one_literal() const {
  return is_rational() && rational() == 1;
}
bool Expr::is_integer_literal() const {
  return is_rational() && rational().get_den() == 1;
}

// --- constructors ---------------------------------------------------------

Expr make_rational(const Rational& q) {
  Node n;
  n.kind = NodeKind::RationalConst;
  n.value = q;
  n.value.canonicalize();
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_int(long v) { return make_rational(Rational(v)); }

Expr make_var(VarId v) {
  Node n;
  n.kind = NodeKind::Var;
  n.sym = v.id;
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_var(const std::string& name) {
  return make_var(Session::instance().var(name));
}

Expr make_func(FuncSymbolId f, std::vector<int> deriv) {
  const auto& args = Session::instance().func_args(f);
  if (deriv.size() != args.size())
    throw Error("derivative multi-index size mismatch for '" +
                Session::instance().func_name(f) + "'");
  Node n;
  n.kind = NodeKind::FuncApp;
  n.sym = f.id;
  n.deriv = std::move(deriv);
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_func(FuncSymbolId f) {
  return make_func(f, std::vector<int>(Session::instance().func_args(f).size(), 0));
}

Expr make_sum(std::vector<Expr> terms) {
  if (terms.empty()) return make_int(0);
  if (terms.size() == 1) return terms[0];
  Node n;
  n.kind = NodeKind::Sum;
  n.kids = std::move(terms);
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_product(std::vector<Expr> factors) {
  if (factors.empty()) return make_int(1);
  if (factors.size() == 1) return factors[0];
  Node n;
  n.kind = NodeKind::Product;
  n.kids = std::move(factors);
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_power(Expr base, Expr exponent) {
  if (exponent.is_one_literal()) return base;
  if (exponent.is_zero_literal()) return make_int(1);
  Node n;
  n.kind = NodeKind::Power;
  n.kids = {base, exponent};
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_exp(Expr arg) {
  Node n;
  n.kind = NodeKind::Exp;
  n.kids = {arg};
  return Expr(Session::instance().intern(std::move(n)));
}

Expr make_ln(Expr arg) {
  Node n;
  n.kind = NodeKind::Ln;
  n.kids = {arg};
  return Expr(Session::instance().intern(std::move(n)));
}

Expr operator+(Expr a, Expr b) { return make_sum({a, b}); }
Expr operator-(Expr a, Expr b) { return make_sum({a, make_product({make_int(-1), b})}); }
Expr operator-(Expr a) { return make_product({make_int(-1), a}); }
Expr operator*(Expr a, Expr b) { return make_product({a, b}); }
Expr operator/(Expr a, Expr b) { return make_product({a, make_power(b, make_int(-1))}); }
Expr pow(Expr base, Expr exponent) { return make_power(base, exponent); }
Expr pow(Expr base, long exponent) { return make_power(base, make_int(exponent)); }

// --- rendering ------------------------------------------------------------

namespace {

// Precedence levels: 0 sum, 1 product, 2 unary minus, 3 power, 4 atom.
void render(Expr e, std::ostream& os, int parent_prec);

void render_paren(Expr e, std::ostream& os, int prec, int parent_prec) {
  if (prec < parent_prec) {
    os << '(';
    render(e, os, 0);
    os << ')';
  } else {
    render(e, os, prec);
  }
}

void render(Expr e, std::ostream& os, int parent_prec) {
  Session& ses = Session::instance();
  switch (e.kind()) {
    case NodeKind::RationalConst: {
      const Rational& q = e.rational();
      bool neg = q < 0;
      bool frac = q.get_den() != 1;
      int prec = neg ? 2 : (frac ? 1 : 4);
      if (prec < parent_prec) {
        os << '(' << q.get_str() << ')';
      } else {
        os << q.get_str();
      }
      break;
    }
    case NodeKind::Var:
      os << ses.var_name(e.var());
      break;
    case NodeKind::FuncApp: {
      bool has_deriv = false;
      for (int d : e.deriv()) has_deriv |= d > 0;
      const auto& args = ses.func_args(e.func());
      if (has_deriv) {
        os << "D(" << ses.func_name(e.func());
        for (size_t i = 0; i < args.size(); ++i)
          for (int k = 0; k < e.deriv()[i]; ++k)
            os << "," << ses.var_name(args[i]);
        os << ")";
      } else {
        os << ses.func_name(e.func()) << '(';
        for (size_t i = 0; i < args.size(); ++i) {
          if (i) os << ',';
          os << ses.var_name(args[i]);
        }
        os << ')';
      }
      break;
    }
    case NodeKind::Sum: {
      if (parent_prec > 0) os << '(';
      for (size_t i = 0; i < e.arity(); ++i) {
        Expr t = e.child(i);
        // Fold a leading -1 factor or negative constant into a "- term".
        bool neg = false;
        if (t.is_rational() && t.rational() < 0) {
          neg = true;
          t = make_rational(-t.rational());
        } else if (t.kind() == NodeKind::Product && t.arity() >= 2 &&
                   t.child(0).is_rational() && t.child(0).rational() < 0) {
          neg = true;
          std::vector<Expr> fs(t.children().begin(), t.children().end());
          Rational c = -fs[0].rational();
          if (c == 1)
            fs.erase(fs.begin());
          else
            fs[0] = make_rational(c);
          t = make_product(std::move(fs));
        }
        if (i == 0) {
          if (neg) os << '-';
        } else {
          os << (neg ? " - " : " + ");
        }
        render(t, os, 1);
      }
      if (parent_prec > 0) os << ')';
      break;
    }
    case NodeKind::Product: {
      if (parent_prec > 1) os << '(';
      for (size_t i = 0; i < e.arity(); ++i) {
        if (i) os << '*';
        render(e.child(i), os, 2);
      }
      if (parent_prec > 1) os << ')';
      break;
    }
    case NodeKind::Power: {
      if (parent_prec > 3) os << '(';
      render_paren(e.child(0), os, e.child(0).kind() == NodeKind::Power ? 0 : 4, 4);
      os << '^';
      render_paren(e.child(1), os, e.child(1).is_integer_literal() &&
                                           e.child(1).rational() >= 0
                                       ? 4
                                       : 0,
                   4);
      if (parent_prec > 3) os << ')';
      break;
    }
    case NodeKind::Exp:
      os << "exp(";
      render(e.child(0), os, 0);
      os << ')';
      break;
    case NodeKind::Ln:
      os << "ln(";
      render(e.child(0), os, 0);
      os << ')';
      break;
  }
}

}  // namespace

std::string to_string(Expr e) {
  std::ostringstream os;
  render(e, os, 0);
  return os.str();
}

// --- free symbol queries --------------------------------------------------

namespace {
template <typename F>
void walk(Expr e, F&& f) {
  f(e);
  if (e.kind() == NodeKind::Sum || e.kind() == NodeKind::Product ||
      e.kind() == NodeKind::Power || e.kind() == NodeKind::Exp ||
      e.kind() == NodeKind::Ln)
    for (const Expr& k : e.children()) walk(k, f);
}
}  // namespace

void collect_vars(Expr e, std::vector<VarId>& out) {
  walk(e, [&](Expr n) {
    if (n.kind() == NodeKind::Var) {
      if (std::find(out.begin(), out.end(), n.var()) == out.end())
        out.push_back(n.var());
    }
  });
}

void collect_funcs(Expr e, std::vector<FuncSymbolId>& out) {
  walk(e, [&](Expr n) {
    if (n.kind() == NodeKind::FuncApp) {
      if (std::find(out.begin(), out.end(), n.func()) == out.end())
        out.push_back(n.func());
    }
  });
}

bool contains_var(Expr e, VarId v) {
  bool found = false;
  walk(e, [&](Expr n) {
    if (n.kind() == NodeKind::Var && n.var() == v) found = true;
  });
  return found;
}

bool depends_only_on_constants(Expr e, const std::vector<VarId>& constants) {
  bool ok = true;
  walk(e, [&](Expr n) {
    if (n.kind() == NodeKind::Var &&
        std::find(constants.begin(), constants.end(), n.var()) == constants.end())
      ok = false;
    if (n.kind() == NodeKind::FuncApp) ok = false;
  });
  return ok;
}

}  // namespace cartanlab

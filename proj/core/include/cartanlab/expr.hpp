#ifndef CARTANLAB_EXPR_HPP
#define CARTANLAB_EXPR_HPP

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>
#include <string>
#include <vector>

#include <gmpxx.h>

namespace cartanlab {

using Rational = mpq_class;

struct Error : std::runtime_error {
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Raised when the symbolic zero-test and the numeric sampling oracle
/// disagree; signals an unhandled simplification rule.
struct InconsistencyError : Error {
  using Error::Error;
};

struct VarId {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
  friend bool operator==(VarId a, VarId b) { return a.id == b.id; }
  friend bool operator!=(VarId a, VarId b) { return a.id != b.id; }
  friend bool operator<(VarId a, VarId b) { return a.id < b.id; }
};

struct FuncSymbolId {
  uint32_t id = UINT32_MAX;
  bool valid() const { return id != UINT32_MAX; }
  friend bool operator==(FuncSymbolId a, FuncSymbolId b) { return a.id == b.id; }
  friend bool operator!=(FuncSymbolId a, FuncSymbolId b) { return a.id != b.id; }
  friend bool operator<(FuncSymbolId a, FuncSymbolId b) { return a.id < b.id; }
};

enum class NodeKind : uint8_t {
  RationalConst,
  Var,
  FuncApp,
  Sum,
  Product,
  Power,  // kids = {base, exponent}; exponent is a constant expression
  Exp,
  Ln,
};

class Expr;
struct Node;

/// Immutable hash-consed expression handle. Structural equality is pointer
/// equality because every node is interned at construction.
class Expr {
 public:
  Expr() = default;
  explicit Expr(const Node* n) : node_(n) {}

  bool valid() const { return node_ != nullptr; }
  const Node* node() const { return node_; }

  NodeKind kind() const;
  const Rational& rational() const;  // RationalConst
  VarId var() const;                 // Var
  FuncSymbolId func() const;         // FuncApp
  const std::vector<int>& deriv() const;  // FuncApp multi-index
  size_t arity() const;
  Expr child(size_t i) const;
  const std::vector<Expr>& children() const;

  bool is_rational() const { return valid() && kind() == NodeKind::RationalConst; }
  bool is_zero_literal() const;
  bool is_one_literal() const;
  bool is_integer_literal() const;

  friend bool operator==(Expr a, Expr b) { return a.node_ == b.node_; }
  friend bool operator!=(Expr a, Expr b) { return a.node_ != b.node_; }
  friend bool operator<(Expr a, Expr b) { return a.node_ < b.node_; }

 private:
  const Node* node_ = nullptr;
};

struct Node {
  NodeKind kind;
  Rational value;          // RationalConst
  uint32_t sym = 0;        // Var / FuncApp symbol id
  std::vector<int> deriv;  // FuncApp derivative multi-index (per argument slot)
  std::vector<Expr> kids;
  size_t hash = 0;
};

/// Session-wide symbol registry and node interner. All Expr values belong to
/// the single global session; the tables are internally synchronized.
class Session {
 public:
  static Session& instance();

  VarId var(const std::string& name);
  VarId find_var(const std::string& name) const;
  const std::string& var_name(VarId v) const;

  FuncSymbolId func(const std::string& name, const std::vector<VarId>& args);
  FuncSymbolId find_func(const std::string& name) const;
  const std::string& func_name(FuncSymbolId f) const;
  const std::vector<VarId>& func_args(FuncSymbolId f) const;

  const Node* intern(Node&& n);

  // Canonical-form cache, maintained by canonicalize().
  Expr cached_canonical(Expr e) const;
  void remember_canonical(Expr e, Expr canon);

 private:
  Session() = default;
  struct Impl;
  Impl& impl() const;
};

// --- constructors ---------------------------------------------------------

Expr make_rational(const Rational& q);
Expr make_int(long n);
Expr make_var(VarId v);
Expr make_var(const std::string& name);  // declares on first use
Expr make_func(FuncSymbolId f, std::vector<int> deriv);
Expr make_func(FuncSymbolId f);  // zero multi-index
Expr make_sum(std::vector<Expr> terms);
Expr make_product(std::vector<Expr> factors);
Expr make_power(Expr base, Expr exponent);
Expr make_exp(Expr arg);
Expr make_ln(Expr arg);

Expr operator+(Expr a, Expr b);
Expr operator-(Expr a, Expr b);
Expr operator-(Expr a);
Expr operator*(Expr a, Expr b);
Expr operator/(Expr a, Expr b);
Expr pow(Expr base, Expr exponent);
Expr pow(Expr base, long exponent);

/// Renders in the expression grammar accepted by parse().
std::string to_string(Expr e);

/// True if e contains no Var or FuncApp other than those in `constants`.
bool depends_only_on_constants(Expr e, const std::vector<VarId>& constants);

/// Collects free variables / function symbols.
void collect_vars(Expr e, std::vector<VarId>& out);
void collect_funcs(Expr e, std::vector<FuncSymbolId>& out);
bool contains_var(Expr e, VarId v);

}  // namespace cartanlab

#endif  // CARTANLAB_EXPR_HPP

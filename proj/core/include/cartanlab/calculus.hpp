#ifndef CARTANLAB_CALCULUS_HPP
#define CARTANLAB_CALCULUS_HPP

#include "cartanlab/expr.hpp"

namespace cartanlab {

/// Partial derivative. Function applications differentiate by bumping the
/// slot of their multi-index that matches the variable; results are raw
/// expressions (not canonicalized).
Expr diff(Expr e, VarId v);
Expr diff(Expr e, VarId v, int times);

/// Exact-match substitutions: variables and function derivatives.
class SubstitutionMap {
 public:
  void set_var(VarId v, Expr replacement);
  void set_func(FuncSymbolId f, std::vector<int> deriv, Expr replacement);
  bool empty() const { return vars_.empty() && funcs_.empty(); }

  Expr lookup_var(VarId v) const;
  Expr lookup_func(FuncSymbolId f, const std::vector<int>& deriv) const;

 private:
  std::map<VarId, Expr> vars_;
  std::map<std::pair<FuncSymbolId, std::vector<int>>, Expr> funcs_;
};

Expr substitute(Expr e, const SubstitutionMap& map);

/// A set of jet-space reduction rules, e.g. u_tx -> T u_t + X u_x + U u.
/// reduce() rewrites every function derivative that dominates some rule's
/// multi-index, pushing the extra differentiations through the rule's
/// right-hand side, until no rule applies; total_diff() is differentiation
/// followed by reduction.
class JetRules {
 public:
  void add(FuncSymbolId f, std::vector<int> deriv, Expr rhs);

  Expr reduce(Expr e) const;
  Expr total_diff(Expr e, VarId v) const;

 private:
  struct Rule {
    FuncSymbolId f;
    std::vector<int> d;
    Expr rhs;
  };
  std::vector<Rule> rules_;
  mutable std::map<const Node*, Expr> reduce_cache_;

  Expr reduce_func(Expr e) const;
};

}  // namespace cartanlab

#endif  // CARTANLAB_CALCULUS_HPP

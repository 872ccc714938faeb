#include "cartanlab/eval.hpp"

#include <algorithm>
#include <cmath>

namespace cartanlab {

namespace {

double eval_rec(Expr e, const Bindings& bindings, const Oracles& oracles) {
  switch (e.kind()) {
    case NodeKind::RationalConst:
      return e.rational().get_d();
    case NodeKind::Var: {
      auto it = bindings.find(e.var());
      if (it == bindings.end())
        throw EvalError("unbound variable '" +
                        Session::instance().var_name(e.var()) + "'");
      return it->second;
    }
    case NodeKind::FuncApp: {
      auto it = oracles.find(e.func());
      if (it == oracles.end())
        throw EvalError("no oracle for function symbol '" +
                        Session::instance().func_name(e.func()) + "'");
      const auto& argvars = Session::instance().func_args(e.func());
      std::vector<double> args;
      args.reserve(argvars.size());
      for (VarId v : argvars) {
        auto bit = bindings.find(v);
        if (bit == bindings.end())
          throw EvalError("unbound variable '" +
                          Session::instance().var_name(v) + "'");
        args.push_back(bit->second);
      }
      return it->second(e.deriv(), args);
    }
    case NodeKind::Sum: {
      double s = 0;
      for (const Expr& k : e.children()) s += eval_rec(k, bindings, oracles);
      return s;
    }
    case NodeKind::Product: {
      double p = 1;
      for (const Expr& k : e.children()) p *= eval_rec(k, bindings, oracles);
      return p;
    }
    case NodeKind::Power: {
      double b = eval_rec(e.child(0), bindings, oracles);
      double x = eval_rec(e.child(1), bindings, oracles);
      if (x < 0 && std::fabs(b) < 1e-300)
        throw EvalError("division by (near-)zero in power");
      bool integral = e.child(1).is_integer_literal();
      if (!integral && b < 0)
        throw EvalError("fractional power of negative base");
      double r = std::pow(b, x);
      if (!std::isfinite(r)) throw EvalError("non-finite power result");
      return r;
    }
    case NodeKind::Exp: {
      double r = std::exp(eval_rec(e.child(0), bindings, oracles));
      if (!std::isfinite(r)) throw EvalError("exp overflow");
      return r;
    }
    case NodeKind::Ln: {
      double a = eval_rec(e.child(0), bindings, oracles);
      if (a <= 0) throw EvalError("ln of non-positive value");
      return std::log(a);
    }
  }
  throw EvalError("unreachable expression kind");
}

}  // namespace

double eval_numeric(Expr e, const Bindings& bindings, const Oracles& oracles) {
  if (!e.valid()) throw EvalError("invalid expression");
  return eval_rec(e, bindings, oracles);
}

FuncOracle polynomial_oracle(std::vector<double> coeffs) {
  return [coeffs](const std::vector<int>& deriv, const std::vector<double>& args) {
    double total = 0;
    for (size_t k = 0; k < coeffs.size(); ++k) {
      double term = coeffs[k];
      for (size_t j = 0; j < args.size() && term != 0; ++j) {
        int p = static_cast<int>((k >> (2 * j)) & 3u);
        int d = j < deriv.size() ? deriv[j] : 0;
        if (d > p) {
          term = 0;
          break;
        }
        double fall = 1;
        for (int i = 0; i < d; ++i) fall *= p - i;
        term *= fall * std::pow(args[j], p - d);
      }
      total += term;
    }
    return total;
  };
}

FuncOracle exp_mode_oracle(std::mt19937_64& rng, size_t nargs) {
  constexpr int modes = 3;
  std::uniform_real_distribution<double> cd(0.2, 1.0), ad(0.15, 0.9);
  std::vector<double> c(modes), a(modes * std::max<size_t>(nargs, 1));
  for (auto& x : c) x = cd(rng);
  for (auto& x : a) x = (rng() & 1 ? 1 : -1) * ad(rng);
  return [c, a, nargs](const std::vector<int>& deriv,
                       const std::vector<double>& args) {
    double tot = 0;
    for (int k = 0; k < modes; ++k) {
      double dot = 0, fac = c[k];
      for (size_t j = 0; j < nargs && j < args.size(); ++j) {
        double akj = a[k * nargs + j];
        dot += akj * args[j];
        int d = j < deriv.size() ? deriv[j] : 0;
        for (int i = 0; i < d; ++i) fac *= akj;
      }
      tot += fac * std::exp(dot);
    }
    return tot;
  };
}

}  // namespace cartanlab

#ifndef CARTANLAB_EVAL_HPP
#define CARTANLAB_EVAL_HPP

#include <functional>
#include <map>
#include <random>

#include "cartanlab/expr.hpp"

namespace cartanlab {

/// Numeric oracle for an undetermined function symbol. Receives the
/// derivative multi-index (one entry per declared argument) and the argument
/// values, and returns the value of that derivative.
using FuncOracle =
    std::function<double(const std::vector<int>& deriv, const std::vector<double>& args)>;

using Bindings = std::map<VarId, double>;
using Oracles = std::map<FuncSymbolId, FuncOracle>;

struct EvalError : Error {
  using Error::Error;
};

double eval_numeric(Expr e, const Bindings& bindings, const Oracles& oracles = {});

/// Oracle backed by a bivariate-or-less polynomial with the given
/// coefficients; derivatives are exact. Coefficient layout: dense by total
/// degree over the symbol's arguments, degree <= 3 per argument.
FuncOracle polynomial_oracle(std::vector<double> coeffs);

/// Random sum of exponential modes sum_k c_k exp(sum_j a_kj x_j) with
/// c_k > 0; every derivative is a nonzero combination of the same modes, so
/// the oracle is generic: no derivative vanishes identically.
FuncOracle exp_mode_oracle(std::mt19937_64& rng, size_t nargs);

}  // namespace cartanlab

#endif  // CARTANLAB_EVAL_HPP

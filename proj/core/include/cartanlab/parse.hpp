#ifndef CARTANLAB_PARSE_HPP
#define CARTANLAB_PARSE_HPP

#include <cstddef>

#include "cartanlab/expr.hpp"

namespace cartanlab {

struct ParseError : Error {
  size_t position;
  ParseError(const std::string& what, size_t pos)
      : Error(what + " (at position " + std::to_string(pos) + ")"),
        position(pos) {}
};

/// Parses the textual expression grammar: rationals, identifiers, + - * / ^,
/// exp/ln, function applications f(t,x), derivatives D(f,t,x,...), and the
/// u_tx shorthand for derivatives of an already-declared function symbol.
/// Unknown plain identifiers declare variables on first use; function
/// symbols are declared by their first application.
Expr parse(const std::string& text);

}  // namespace cartanlab

#endif  // CARTANLAB_PARSE_HPP

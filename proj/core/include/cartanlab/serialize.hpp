#ifndef CARTANLAB_SERIALIZE_HPP
#define CARTANLAB_SERIALIZE_HPP

#include <string>

#include "cartanlab/exterior.hpp"

namespace cartanlab {

/// {"chart":["x",...], "coeffs":{"dx":"<expr text>", ...}}; zero
/// coefficients are omitted.
std::string to_json(const OneForm& w);
OneForm one_form_from_json(const Chart& chart, const std::string& text);

/// {"forms":[...], "pis":[...], "equations":{"w1":{"pi_terms":[[rho,j,"a"]],
/// "c_terms":[[j,k,"c"]]}}}; coefficients are exact rationals carried as
/// strings (numbers accepted on input).
std::string to_json(const AbstractStructure& s);
AbstractStructure abstract_structure_from_json(const std::string& text);

}  // namespace cartanlab

#endif  // CARTANLAB_SERIALIZE_HPP

#ifndef CARTANLAB_STRUCTURE_VERIFIER_HPP
#define CARTANLAB_STRUCTURE_VERIFIER_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "cartanlab/exterior.hpp"

namespace cartanlab {

/// An ordered, named coframe on a chart. The chart is shared so copies stay
/// valid.
struct NamedCoframe {
  std::shared_ptr<Chart> chart;
  std::vector<std::string> names;
  std::vector<OneForm> forms;

  int index(const std::string& name) const;  // throws on a missing name
  const OneForm& form(const std::string& name) const;
};

/// dw(target) = known wedge terms + sum of (unknown pi) ^ (companion form).
struct StructureClaim {
  std::string target;
  struct WedgeTerm {
    Expr coeff;
    std::string left, right;
  };
  std::vector<WedgeTerm> known;
  struct Unknown {
    std::string pi, companion;
  };
  std::vector<Unknown> unknowns;
};

struct ClaimReport {
  std::string target;
  bool pass = false;
  std::string detail;
  std::vector<OneForm> solved;  // one per unknown when the claim solves
};

struct VerifyReport {
  bool pass = true;
  std::vector<ClaimReport> claims;
};

/// Exact-zero verification for fully specified claims; ideal-membership
/// (solve_ideal over the companion forms) when unknowns are declared.
VerifyReport verify_coframe(const NamedCoframe& cf,
                            const std::vector<StructureClaim>& claims);

/// Numeric pointwise linear independence of the coframe at `points` random
/// sample points.
bool coframe_independent(const NamedCoframe& cf, uint64_t seed = 5,
                         int points = 10);

/// Rational-linear renaming between two constant-coefficient structures:
/// each source form maps to a combination of destination forms, each source
/// pi to a combination of destination pis.
struct FormSubstitution {
  std::map<std::string, std::vector<std::pair<Rational, std::string>>> map;
};

struct SubstitutionReport {
  bool pass = true;
  std::vector<std::string> mismatches;
};

/// Substitutes the map into every source equation, re-expands in the
/// destination basis using the destination equations, and compares constant
/// coefficients exactly. Throws on a non-invertible map.
SubstitutionReport verify_substitution(const AbstractStructure& src,
                                       const FormSubstitution& m,
                                       const AbstractStructure& dst);

FormSubstitution invert(const FormSubstitution& m,
                        const AbstractStructure& src,
                        const AbstractStructure& dst);

/// Truncated structure equations of the diffeomorphism pseudo-group of the
/// line: forms sigma1, phi0..phiN with
///   d sigma1 = phi1 ^ sigma1,   d phi0 = -phi1 ^ sigma1,
///   d phi_j  = -phi_{j+1} ^ sigma1
///              + sum_{p+q=j, q>=1} j!/(p! q!) phi_{p+1} ^ phi_q.
/// The order-(N+1) form enters as the boundary unknown pi "phi<N+1>".
AbstractStructure diffeo_r_series(int N);

/// The truncated structure equations of the contact symmetries of the
/// Liouville equation as two commuting copies of the line diffeomorphism
/// series glued by sigma3.
struct ProductReport {
  bool pass = true;
  bool phi_copy_matches = false;
  bool psi_copy_matches = false;
  int cross_terms = 0;        // terms mixing the phi and psi families
  int sigma3_cross_terms = 0; // expected exactly 2
  bool jacobi_pass = false;
};
ProductReport liouville_product_check(int N);

/// One verifiable unit: either a named coframe with claims, or a bare
/// constant-coefficient structure (verified with jacobi_check).
struct Dataset {
  std::string name;
  std::optional<NamedCoframe> coframe;
  std::vector<StructureClaim> claims;
  std::optional<AbstractStructure> structure;
};

Dataset dataset_from_json(const std::string& name, const std::string& text);
/// Looks in CARTAN_LAB_DATASETS, then the build-time dataset directory.
Dataset load_dataset(const std::string& name);
std::string default_dataset_dir();

/// Loads the generalized Hunter-Saxton coframe dataset and verifies its
/// claims plus pointwise independence.
VerifyReport verify_hs_coframe();

}  // namespace cartanlab

#endif  // CARTANLAB_STRUCTURE_VERIFIER_HPP

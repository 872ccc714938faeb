#ifndef CARTANLAB_SELFTEST_HPP
#define CARTANLAB_SELFTEST_HPP

#include <string>
#include <vector>

namespace cartanlab {

/// One checked item of the release gate. `detail` carries the measured
/// values on failure and a short summary on success.
struct Criterion {
  int index = 0;
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

/// Runs the full release gate: classification corpus, invariant reproduction,
/// degeneracy reporting, structure-equation extraction and datasets,
/// cross-presentation substitutions, series checks, the Hunter-Saxton chain
/// and the randomized property suites. Pure; every numeric step is seeded.
std::vector<Criterion> run_selftest();

}  // namespace cartanlab

#endif  // CARTANLAB_SELFTEST_HPP

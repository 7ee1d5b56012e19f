#ifndef GABI_VERIFY_HPP
#define GABI_VERIFY_HPP

#include <string>
#include <vector>

#include "gabi/specfun.hpp"

namespace gabi::verify {

enum class Level { Fast, Full };

struct CheckResult {
  int id = 0;
  std::string name;
  bool pass = false;
  std::string detail;  // measured values, one clause per sub-check
  double seconds = 0.0;
};

/// Runs the numbered verification suite against the given constants.
/// Fast: checks 1-9 and 11 (about a minute). Full adds the 4D dynamics
/// checks (10). Never throws on a failing check; failures carry measured
/// diagnostics in `detail`.
std::vector<CheckResult> run(Level level, const specfun::ModelConstants& mc);

/// One [PASS]/[FAIL] line per check plus indented detail.
std::string format_report(const std::vector<CheckResult>& results);

}  // namespace gabi::verify

#endif

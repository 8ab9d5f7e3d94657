#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace brw {

struct CriterionResult {
  int id = 0;
  std::string title;
  /// Exploratory criteria are reported but never gate.
  bool gating = true;
  bool passed = false;
  std::string detail;
  double seconds = 0.0;
};

struct AcceptanceOptions {
  std::uint64_t seed = 20240611;
  int threads = 1;
  /// Criterion ids to run; empty runs all ten.
  std::vector<int> only;
};

/// Runs the acceptance suite with the tolerances fixed below. Each result is
/// also passed to on_result as soon as it is known.
std::vector<CriterionResult> run_acceptance(const AcceptanceOptions& options,
                                            const std::function<void(const CriterionResult&)>& on_result = {});

/// "PASS  3  <title>: <detail>" (exploratory criteria are tagged).
std::string format_result_line(const CriterionResult& result);

}  // namespace brw

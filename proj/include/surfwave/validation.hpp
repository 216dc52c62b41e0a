#pragma once

// Checks that exercise the whole model against its reference behaviour:
// analytic surface values, solver oracles, the figure trends of the preset
// layouts, the ray-trace comparison and the layout parser. Every dB tolerance
// is multiplied by the profile's tolerance_scale.

#include <functional>
#include <string>
#include <vector>

#include "surfwave/config.hpp"
#include "surfwave/scenarios.hpp"

namespace surfwave {

struct Measurement {
  std::string name;
  double value = 0.0;
  std::string unit;
  std::string expected;  // condition in words, e.g. ">= 8"
  bool pass = true;
  bool informational = false;  // reported but never fails the check
};

struct CheckResult {
  int id = 0;
  std::string title;
  bool pass = true;
  double seconds = 0.0;
  std::vector<Measurement> measurements;
  std::vector<std::string> notes;

  /// "PASS  3 straight-pathway decay (41.2 s): name=value [cond]; ..."
  std::string line() const;
};

inline constexpr int kCheckCount = 10;

std::string check_title(int id);

/// Runs check `id` (1..10).
CheckResult run_check(int id, const ProjectConfig& cfg, RunCache& cache);

/// Runs the listed checks in order (all when `ids` is empty). `on_done` is
/// called after each one.
std::vector<CheckResult> run_validation(const ProjectConfig& cfg, RunCache& cache,
                                        const std::vector<int>& ids = {},
                                        const std::function<void(const CheckResult&)>& on_done = {});

/// Machine-readable report: profile, settings and every measurement.
std::string validation_report_json(const std::vector<CheckResult>& results,
                                   const ProjectConfig& cfg, const RunCache& cache);

/// Layout programs used by the parser check.
std::vector<std::string> layout_corpus();
/// Malformed programs with the line each diagnostic must point at.
std::vector<std::pair<std::string, int>> malformed_layouts();

}  // namespace surfwave

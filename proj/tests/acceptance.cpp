// Acceptance suite: runs the ten validation checks at the desk profile and
// prints one PASS/FAIL line per criterion. Thresholds live with the checks
// in src/validation.cpp. Exit status is the number of failed criteria.
//
//   acceptance [--profile desk|ci] [--config FILE] [--json FILE] [ids...]

#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include "surfwave/config.hpp"
#include "surfwave/io.hpp"
#include "surfwave/validation.hpp"

using namespace surfwave;

int main(int argc, char** argv) {
  std::string profile = "desk";
  std::string config;
  std::string json = "acceptance.json";
  std::vector<int> ids;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--profile" && i + 1 < argc) {
      profile = argv[++i];
    } else if (a == "--config" && i + 1 < argc) {
      config = argv[++i];
    } else if (a == "--json" && i + 1 < argc) {
      json = argv[++i];
    } else {
      try {
        ids.push_back(std::stoi(a));
      } catch (const std::exception&) {
        std::cerr << "acceptance: unexpected argument '" << a << "'\n";
        return 64;
      }
    }
  }

  ProjectConfig cfg;
  try {
    if (!config.empty()) cfg = load_config(config);
    cfg.apply_profile(Profile::named(profile));
    cfg.validate();
  } catch (const std::exception& e) {
    std::cerr << "acceptance: " << e.what() << "\n";
    return 64;
  }

  std::cout << "acceptance profile " << cfg.profile.name << ", cell "
            << cfg.solver.cell_size * 1e3 << " mm, tolerance scale " << cfg.profile.tolerance_scale
            << std::endl;
  RunCache cache;
  const auto results = run_validation(cfg, cache, ids, [](const CheckResult& r) {
    std::cout << r.line() << std::endl;
    for (const auto& n : r.notes) std::cout << "     " << n << std::endl;
  });
  write_file_atomic(json, validation_report_json(results, cfg, cache));

  int failed = 0;
  for (const auto& r : results) failed += r.pass ? 0 : 1;
  std::cout << results.size() - failed << " of " << results.size() << " criteria passed ("
            << cache.solves() << " solves, " << cache.solver_seconds() << " s in the solver)"
            << std::endl;
  return failed;
}

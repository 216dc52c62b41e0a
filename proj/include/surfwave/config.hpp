#pragma once

// Project configuration: an INI-style file with [surface], [solver],
// [analysis] and [raytrace] sections. Precedence is built-in defaults, then
// the file, then command-line overrides.

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "surfwave/raytrace.hpp"
#include "surfwave/solver.hpp"
#include "surfwave/surface.hpp"

namespace surfwave {

/// Resolution profile. `tolerance_scale` widens every dB tolerance of the
/// validation checks (1.0 for desk, 1.5 for ci).
struct Profile {
  std::string name = "desk";
  double cell_size = 0.1e-3;
  double tolerance_scale = 1.0;

  static Profile desk() { return {"desk", 0.1e-3, 1.0}; }
  static Profile ci() { return {"ci", 0.2e-3, 1.5}; }
  /// "desk" or "ci"; throws std::invalid_argument otherwise.
  static Profile named(const std::string& name);
};

/// Settings for turning spectra into reported metrics.
struct AnalysisSettings {
  // Common window for band metrics of resonant layouts (corners, junctions).
  double window_low = 23e9;
  double window_high = 30e9;
  double half_power_drop_db = 3.0;
};

struct ProjectConfig {
  SurfaceConfig surface;
  SolverConfig solver;
  AnalysisSettings analysis;
  RaytraceSweep raytrace;
  MaterialDb materials = MaterialDb::builtin();
  Profile profile = Profile::desk();

  /// Band-centre frequency used for single-frequency comparisons.
  double band_center() const { return solver.pulse_center_f; }
  void apply_profile(const Profile& p);
  void validate() const;
};

/// Parses configuration text. `base_dir` resolves a relative `materials`
/// path. Unknown sections or keys are errors.
ProjectConfig parse_config(const std::string& text, const std::filesystem::path& base_dir = {});
ProjectConfig load_config(const std::filesystem::path& path);

/// Serialises every setting; parse_config(format_config(c)) reproduces c.
std::string format_config(const ProjectConfig& cfg);

/// "lo:hi:step" (inclusive range) or "a,b,c"; values must be non-negative
/// and strictly increasing.
std::vector<double> parse_number_list(const std::string& text);

/// "21:42:0.25" (inclusive range) or "24,26,28" in GHz; returns Hz.
std::vector<double> parse_frequency_list(const std::string& text);

}  // namespace surfwave

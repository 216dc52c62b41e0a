#pragma once

// Canned solver studies for the preset layouts and the metrics drawn from
// them. Runs go through a RunCache so a study that needs the same layout twice
// (or two studies sharing one) pays for a single solve.

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "surfwave/analysis.hpp"
#include "surfwave/config.hpp"
#include "surfwave/layout.hpp"
#include "surfwave/solver.hpp"

namespace surfwave {

struct SolveRecord {
  std::string layout_id;
  std::uint64_t steps = 0;
  int rows = 0, cols = 0;
  double seconds = 0.0;
};

class RunCache {
 public:
  const RunResult& run(const Layout& layout, const SurfaceConfig& surface,
                       const SolverConfig& cfg, const SceneOptions& opt = {});

  std::size_t solves() const { return solves_; }
  double solver_seconds() const { return seconds_; }
  /// Every solve that missed the cache, in order.
  const std::vector<SolveRecord>& log() const { return log_; }
  void clear() { runs_.clear(); }

  /// Called with the layout id before every solve that misses the cache.
  std::function<void(const std::string&)> on_solve;

 private:
  std::map<std::string, RunResult> runs_;
  std::size_t solves_ = 0;
  double seconds_ = 0.0;
  std::vector<SolveRecord> log_;
};

/// Identity of a run: layout, scene, surface and every solver setting.
std::string run_key(const Layout& layout, const SurfaceConfig& surface, const SolverConfig& cfg,
                    const SceneOptions& opt);

/// Same scene with every cavity emptied; the id gains an "-empty" suffix.
Layout without_pins(Layout layout);

/// Aperture receivers whose id is `prefix` followed by digits, sorted by
/// path distance.
std::vector<TransmissionCurve> receiver_curves(const RunResult& run, const std::string& prefix = "r");

/// Least-squares decay of the receivers with d_min <= distance <= d_max.
AttenuationFit decay_fit(const RunResult& run, double f, double d_min, double d_max);

struct TJunctionSummary {
  double frequency = 0.0;
  std::vector<double> distances;  // probes past the junction
  std::vector<double> straight_s, straight_t;  // straight mode, both arms (dB)
  std::vector<double> turn_s, turn_t;          // turn mode
  double straight_contrast_db = 0.0;  // mean desired minus undesired
  double turn_contrast_db = 0.0;
  double turn_loss_db = 0.0;  // mean straight-mode s_d minus turn-mode t_d
};

/// Compares the s/t probe lines of the two junction states at frequency f.
/// Only probes at least one pathway width beyond the point where the two
/// lines separate are used.
TJunctionSummary tjunction_summary(const RunResult& straight, const RunResult& turn, double f,
                                   double width);

struct CornerMetrics {
  int k = 0;
  double corner_width = 0.0;
  PeakEstimate peak;
  Band band;
  double band_average_db = 0.0;
  TransmissionCurve curve;  // receiver curve restricted to the analysis window
};

CornerMetrics corner_metrics(int k, const RunResult& run, const AnalysisSettings& analysis,
                             double pitch);

// Studies. Each builds its preset from `cfg`, runs it through `cache` and
// returns the run (owned by the cache).

const RunResult& straight_study(const ProjectConfig& cfg, RunCache& cache, double width = 10e-3,
                                int layers = 1, double length = 150e-3);
/// Straight pathway with the source pulse (and loss evaluation) centred at `fc`.
const RunResult& straight_study_at(const ProjectConfig& cfg, RunCache& cache, double fc);
const RunResult& empty_straight_study(const ProjectConfig& cfg, RunCache& cache);
const RunResult& tjunction_study(const ProjectConfig& cfg, RunCache& cache, JunctionMode mode);
const RunResult& corner_study(const ProjectConfig& cfg, RunCache& cache, int k);

PresetOptions preset_options(const ProjectConfig& cfg);

}  // namespace surfwave

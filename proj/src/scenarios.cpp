#include "surfwave/scenarios.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "surfwave/io.hpp"

namespace surfwave {

namespace {

void put(std::ostringstream& out, double v) { out << format_double(v) << ' '; }

void put_probe(std::ostringstream& out, const ProbeSpec& p) {
  out << p.id << ' ';
  put(out, p.position.y);
  put(out, p.position.z);
  put(out, p.aperture);
  out << static_cast<int>(p.facing) << ' ';
}

bool numbered(const std::string& id, const std::string& prefix) {
  if (id.size() <= prefix.size() || id.compare(0, prefix.size(), prefix) != 0) return false;
  return std::all_of(id.begin() + static_cast<long>(prefix.size()), id.end(),
                     [](unsigned char c) { return std::isdigit(c); });
}

double mean(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double level(const RunResult& run, const std::string& id, double f) {
  const double v = transmission(run, id).at(f);
  if (!std::isfinite(v)) throw std::runtime_error("no valid sample for " + id + " at requested frequency");
  return v;
}

}  // namespace

std::string run_key(const Layout& layout, const SurfaceConfig& surface, const SolverConfig& cfg,
                    const SceneOptions& opt) {
  std::ostringstream out;
  out << layout.id << '|' << layout.grid.rows() << ' ' << layout.grid.cols() << ' ';
  put(out, layout.grid.pitch());
  put(out, layout.grid.origin().y);
  put(out, layout.grid.origin().z);
  for (const auto& idx : layout.grid.filled_set()) out << idx.row << ',' << idx.col << ' ';
  const auto& sc = layout.scene;
  out << '|';
  put(out, sc.surface.y_min);
  put(out, sc.surface.y_max);
  put(out, sc.surface.z_min);
  put(out, sc.surface.z_max);
  for (const auto& t : sc.transducers) {
    out << 'T' << t.id << ' ';
    put(out, t.position.y);
    put(out, t.position.z);
    put(out, t.aperture);
    out << static_cast<int>(t.facing) << ' ';
  }
  for (const auto& p : sc.probes) put_probe(out, p);
  if (sc.reference) put_probe(out, *sc.reference);
  out << "|S ";
  for (double v : {surface.dielectric.eps_r, surface.dielectric.tan_delta,
                   surface.dielectric.tan_delta_ref_freq, surface.dielectric.thickness_h,
                   surface.ground.sigma, surface.pin_metal.sigma,
                   surface.cavities.cavity_radius_r, surface.cavities.cavity_pitch_ws}) {
    put(out, v);
  }
  out << "|C ";
  for (double v : {cfg.cell_size, cfg.courant_factor, cfg.pml_reflection, cfg.pml_order,
                   cfg.pulse_center_f, cfg.pulse_bandwidth, cfg.run_time, cfg.confinement_kappa,
                   cfg.energy_threshold, cfg.source_amplitude}) {
    put(out, v);
  }
  out << cfg.pml_cells << ' ' << cfg.energy_check_interval << ' ' << cfg.max_steps << ' '
      << static_cast<int>(cfg.metal_mode) << ' ' << cfg.gate_reference << cfg.directional_source
      << ' ' << cfg.workers << ' ' << cfg.snapshot_stride << " F";
  for (double f : cfg.frequencies()) put(out, f);
  out << "Q";
  for (double f : cfg.snapshot_frequencies) put(out, f);
  out << "|src " << opt.source_id;
  return out.str();
}

const RunResult& RunCache::run(const Layout& layout, const SurfaceConfig& surface,
                               const SolverConfig& cfg, const SceneOptions& opt) {
  const std::string key = run_key(layout, surface, cfg, opt);
  auto it = runs_.find(key);
  if (it != runs_.end()) return it->second;
  if (on_solve) on_solve(layout.id);
  RunResult r = surfwave::run(layout, surface, cfg, opt);
  ++solves_;
  seconds_ += r.wall_seconds;
  log_.push_back({layout.id, r.steps, r.grid_rows, r.grid_cols, r.wall_seconds});
  return runs_.emplace(key, std::move(r)).first->second;
}

Layout without_pins(Layout layout) {
  const PinGrid& g = layout.grid;
  layout.grid = PinGrid(g.rows(), g.cols(), g.pitch(), g.origin());
  layout.id += "-empty";
  return layout;
}

std::vector<TransmissionCurve> receiver_curves(const RunResult& run, const std::string& prefix) {
  std::vector<TransmissionCurve> out;
  for (const auto& p : run.probes) {
    if (p.spec.group == "receiver" && numbered(p.spec.id, prefix)) {
      out.push_back(transmission(p, run.reference, run.frequencies));
      out.back().layout_id = run.layout_id;
    }
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const auto& a, const auto& b) { return a.distance < b.distance; });
  return out;
}

AttenuationFit decay_fit(const RunResult& run, double f, double d_min, double d_max) {
  std::vector<TransmissionCurve> picked;
  for (auto& c : receiver_curves(run)) {
    if (c.distance >= d_min - 1e-9 && c.distance <= d_max + 1e-9) picked.push_back(std::move(c));
  }
  return attenuation_fit(picked, f);
}

TJunctionSummary tjunction_summary(const RunResult& straight, const RunResult& turn, double f,
                                   double width) {
  // The s and t probe lines share positions up to the junction.
  double split = 0.0;
  std::vector<std::pair<double, std::string>> all;
  for (const auto& p : straight.probes) {
    if (p.spec.group != "path_straight") continue;
    const std::string tid = "t" + p.spec.id.substr(1);
    if (!straight.has_probe(tid)) continue;
    const ProbeSpec& t = straight.probe(tid).spec;
    const double gap = std::hypot(t.position.y - p.spec.position.y, t.position.z - p.spec.position.z);
    if (gap < 1e-9) split = std::max(split, p.spec.path_distance);
    all.emplace_back(p.spec.path_distance, p.spec.id.substr(1));
  }
  std::sort(all.begin(), all.end());
  TJunctionSummary s;
  s.frequency = f;
  for (const auto& [d, tag] : all) {
    if (d < split + width - 1e-9) continue;
    s.distances.push_back(d);
    s.straight_s.push_back(level(straight, "s" + tag, f));
    s.straight_t.push_back(level(straight, "t" + tag, f));
    s.turn_s.push_back(level(turn, "s" + tag, f));
    s.turn_t.push_back(level(turn, "t" + tag, f));
  }
  if (s.distances.empty()) throw std::runtime_error("T-junction has no probes past the junction");
  std::vector<double> cs, ct, loss;
  for (std::size_t i = 0; i < s.distances.size(); ++i) {
    cs.push_back(s.straight_s[i] - s.straight_t[i]);
    ct.push_back(s.turn_t[i] - s.turn_s[i]);
    loss.push_back(s.straight_s[i] - s.turn_t[i]);
  }
  s.straight_contrast_db = mean(cs);
  s.turn_contrast_db = mean(ct);
  s.turn_loss_db = mean(loss);
  return s;
}

CornerMetrics corner_metrics(int k, const RunResult& run, const AnalysisSettings& analysis,
                             double pitch) {
  CornerMetrics m;
  m.k = k;
  m.corner_width = k >= 1 ? corner_width(k, pitch) : 0.0;
  m.curve = restrict_band(transmission(run, "rx2"), analysis.window_low, analysis.window_high);
  m.peak = optimal_frequency(m.curve);
  m.band = half_power_band(m.curve, analysis.half_power_drop_db);
  m.band_average_db = band_average_s21(m.curve, m.band);
  return m;
}

PresetOptions preset_options(const ProjectConfig& cfg) {
  PresetOptions opt;
  opt.pitch = cfg.surface.cavities.cavity_pitch_ws;
  opt.aperture = cfg.surface.aperture_width;
  return opt;
}

const RunResult& straight_study(const ProjectConfig& cfg, RunCache& cache, double width,
                                int layers, double length) {
  return cache.run(preset_straight(width, length, layers, preset_options(cfg)), cfg.surface,
                   cfg.solver);
}

const RunResult& straight_study_at(const ProjectConfig& cfg, RunCache& cache, double fc) {
  SolverConfig s = cfg.solver;
  s.pulse_center_f = fc;
  return cache.run(preset_straight(10e-3, 150e-3, 1, preset_options(cfg)), cfg.surface, s);
}

const RunResult& empty_straight_study(const ProjectConfig& cfg, RunCache& cache) {
  return cache.run(without_pins(preset_straight(10e-3, 150e-3, 1, preset_options(cfg))),
                   cfg.surface, cfg.solver);
}

const RunResult& tjunction_study(const ProjectConfig& cfg, RunCache& cache, JunctionMode mode) {
  return cache.run(preset_tjunction(mode, 10e-3, preset_options(cfg)), cfg.surface, cfg.solver);
}

const RunResult& corner_study(const ProjectConfig& cfg, RunCache& cache, int k) {
  return cache.run(preset_corner(k, 10e-3, preset_options(cfg)), cfg.surface, cfg.solver);
}

}  // namespace surfwave

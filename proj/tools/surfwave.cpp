// surfwave: runs the preset studies and writes their CSV / PGM artifacts.
//
// Artifacts are first written as <name>.partial and renamed once the whole
// command has succeeded, so a failed run leaves only .partial files behind.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "surfwave/config.hpp"
#include "surfwave/io.hpp"
#include "surfwave/layout_dsl.hpp"
#include "surfwave/raytrace.hpp"
#include "surfwave/scenarios.hpp"
#include "surfwave/validation.hpp"

namespace fs = std::filesystem;
using namespace surfwave;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Common {
  std::string config;
  std::string out = "out";
  std::string profile;
  std::string freqs;
  int workers = -1;
  bool seedless = false;
  bool quiet = false;
};

class Artifacts {
 public:
  explicit Artifacts(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    fs::create_directories(dir_);
    write_file_atomic(dir_ / (name + ".partial"), content);
    names_.push_back(name);
  }

  template <typename Fn>
  void write_with(const std::string& name, Fn&& fn) {
    fs::create_directories(dir_);
    fn(dir_ / (name + ".partial"));
    names_.push_back(name);
  }

  void commit() {
    for (const auto& n : names_) fs::rename(dir_ / (n + ".partial"), dir_ / n);
    names_.clear();
  }

  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--config", c.config, "configuration file");
  cmd->add_option("--out", c.out, "output directory")->capture_default_str();
  cmd->add_option("--profile", c.profile, "resolution profile")->check(CLI::IsMember({"desk", "ci"}));
  cmd->add_option("--freqs", c.freqs, "DFT frequencies in GHz, a:b:step or a,b,c");
  cmd->add_option("--workers", c.workers, "row bands per solve (0: one per core)");
  cmd->add_flag("--seedless", c.seedless, "not supported; the solver uses no random numbers");
  cmd->add_flag("-q,--quiet", c.quiet, "no progress output");
}

ProjectConfig resolve(const Common& c, const std::string& default_profile = "") {
  if (c.seedless) {
    throw UsageError("--seedless is not applicable: every run is deterministic and uses no seed");
  }
  ProjectConfig cfg;
  try {
    if (!c.config.empty()) cfg = load_config(c.config);
    const std::string profile = !c.profile.empty() ? c.profile : default_profile;
    if (!profile.empty()) cfg.apply_profile(Profile::named(profile));
    if (!c.freqs.empty()) cfg.solver.dft_frequencies = parse_frequency_list(c.freqs);
    if (c.workers >= 0) cfg.solver.workers = c.workers;
    cfg.validate();
  } catch (const std::exception& e) {
    // Unreadable files and bad values are both configuration errors.
    throw UsageError(e.what());
  }
  return cfg;
}

RunCache make_cache(const Common& c) {
  RunCache cache;
  if (!c.quiet) cache.on_solve = [](const std::string& id) { std::cerr << "solving " << id << "\n"; };
  return cache;
}

std::vector<double> mm_list(const std::string& text) {
  std::vector<double> out;
  for (double v : parse_number_list(text)) out.push_back(v * 1e-3);
  return out;
}

std::string curves_csv(const std::vector<TransmissionCurve>& curves,
                       const std::vector<std::string>& labels) {
  std::ostringstream out;
  out << "freq_ghz";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  if (curves.empty()) return out.str();
  for (std::size_t k = 0; k < curves.front().size(); ++k) {
    out << format_double(curves.front().frequencies[k] * 1e-9);
    for (const auto& c : curves) out << ',' << (c.valid[k] ? format_double(c.s21_db[k]) : "nan");
    out << '\n';
  }
  return out.str();
}

std::string mm_text(double metres) { return format_double(std::round(metres * 1e6) / 1e3); }

// --- straight / layers / widths ----------------------------------------------

struct StraightArgs {
  std::string distances_mm = "50:150:20";
  std::string widths_mm = "10";
  std::string layers = "1";
  double length_mm = 150.0;
  bool snapshot = false;
};

int cmd_straight(const Common& c, const StraightArgs& a, const std::string& stem) {
  const ProjectConfig cfg = resolve(c);
  std::vector<double> distances, widths;
  std::vector<int> layer_list;
  try {
    distances = mm_list(a.distances_mm);
    widths = mm_list(a.widths_mm);
    for (double v : parse_number_list(a.layers)) layer_list.push_back(static_cast<int>(std::lround(v)));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  if (distances.empty() || widths.empty() || layer_list.empty()) throw UsageError("empty sweep axis");
  for (double d : distances) {
    if (d > a.length_mm * 1e-3 + 1e-9) throw UsageError("distance beyond the pathway length");
  }
  RunCache cache = make_cache(c);
  Artifacts art(c.out);
  const double fc = cfg.band_center();
  std::vector<MetricsRow> rows;
  std::ostringstream decay;
  decay << "layout,freq_ghz,slope_db_per_m,intercept_db,r2\n";
  for (double w : widths) {
    for (int n : layer_list) {
      ProjectConfig run_cfg = cfg;
      if (a.snapshot) run_cfg.solver.snapshot_frequencies = {fc};
      const RunResult& run = straight_study(run_cfg, cache, w, n, a.length_mm * 1e-3);
      std::vector<TransmissionCurve> curves;
      std::vector<std::string> labels;
      for (double d : distances) {
        const std::string id = "r" + std::to_string(static_cast<int>(std::lround(d * 1e3)));
        if (!run.has_probe(id)) throw UsageError("no receiver at " + mm_text(d) + " mm");
        curves.push_back(transmission(run, id));
        labels.push_back("d" + mm_text(d) + "mm");
      }
      const std::string tag = run.layout_id;
      art.write(tag + "_s21.csv", curves_csv(curves, labels));
      art.write(tag + "_probes.csv", spectra_csv(run));
      const std::optional<AttenuationFit> fit =
          curves.size() >= 3 ? std::optional(attenuation_fit(curves, fc)) : std::nullopt;
      if (curves.size() >= 3) {
        for (double f : run.frequencies) {
          const AttenuationFit af = attenuation_fit(curves, f);
          decay << tag << ',' << format_double(f * 1e-9) << ',' << format_double(af.slope_db_per_m)
                << ',' << format_double(af.intercept_db) << ',' << format_double(af.r2) << '\n';
        }
      }
      for (const auto& cv : curves) {
        MetricsRow row = summarize(cv);
        if (fit) {
          row.slope_db_per_m = fit->slope_db_per_m;
          row.r2 = fit->r2;
        }
        const std::string tagd = std::to_string(static_cast<int>(std::lround(cv.distance * 1e3)));
        if (run.has_probe("c" + tagd) && run.has_probe("o" + tagd)) {
          row.isolation_db = isolation(transmission(run, "c" + tagd).at(fc),
                                       transmission(run, "o" + tagd).at(fc));
        }
        rows.push_back(row);
      }
      for (const auto& snap : run.snapshots) {
        art.write_with(tag + "_field.pgm", [&](const fs::path& p) { write_snapshot_pgm(snap, p); });
        art.write_with(tag + "_field.swf", [&](const fs::path& p) { write_snapshot_binary(snap, p); });
      }
    }
  }
  art.write(stem + "_metrics.csv", metrics_csv(rows));
  if (distances.size() >= 3) art.write(stem + "_decay.csv", decay.str());
  art.commit();
  if (!c.quiet) std::cerr << "wrote " << art.dir() << "\n";
  return 0;
}

// --- tjunction ---------------------------------------------------------------

int cmd_tjunction(const Common& c, const std::string& modes, bool snapshot) {
  ProjectConfig cfg = resolve(c);
  const double fc = cfg.band_center();
  if (snapshot) cfg.solver.snapshot_frequencies = {fc};
  std::vector<JunctionMode> list;
  if (modes == "both" || modes == "straight") list.push_back(JunctionMode::Straight);
  if (modes == "both" || modes == "turn") list.push_back(JunctionMode::Turn);
  if (list.empty()) throw UsageError("--mode must be straight, turn or both");
  RunCache cache = make_cache(c);
  Artifacts art(c.out);
  std::vector<MetricsRow> rows;
  const RunResult* runs[2] = {nullptr, nullptr};
  for (JunctionMode m : list) {
    const RunResult& run = tjunction_study(cfg, cache, m);
    runs[m == JunctionMode::Turn] = &run;
    const std::string name = m == JunctionMode::Turn ? "tjunction_turn" : "tjunction_straight";
    std::ostringstream prof;
    prof << "d_mm,straight_arm_db,turn_arm_db\n";
    for (const auto& p : run.probes) {
      if (p.spec.group != "path_straight") continue;
      const std::string tag = p.spec.id.substr(1);
      prof << tag << ',' << format_double(transmission(run, "s" + tag).at(fc)) << ','
           << format_double(transmission(run, "t" + tag).at(fc)) << '\n';
    }
    art.write(name + "_profile.csv", prof.str());
    art.write(name + "_s21.csv", curves_csv({transmission(run, "rx2"), transmission(run, "rx3")},
                                            {"rx2", "rx3"}));
    art.write(name + "_probes.csv", spectra_csv(run));
    rows.push_back(summarize(transmission(run, m == JunctionMode::Turn ? "rx3" : "rx2")));
    for (const auto& snap : run.snapshots) {
      art.write_with(name + "_field.pgm", [&](const fs::path& p) { write_snapshot_pgm(snap, p); });
      art.write_with(name + "_field.swf", [&](const fs::path& p) { write_snapshot_binary(snap, p); });
    }
  }
  if (runs[0] && runs[1]) {
    const TJunctionSummary s = tjunction_summary(*runs[0], *runs[1], fc, 10e-3);
    std::ostringstream out;
    out << "freq_ghz,straight_contrast_db,turn_contrast_db,turn_loss_db\n"
        << format_double(fc * 1e-9) << ',' << format_double(s.straight_contrast_db) << ','
        << format_double(s.turn_contrast_db) << ',' << format_double(s.turn_loss_db) << '\n';
    art.write("tjunction_summary.csv", out.str());
    rows[0].isolation_db = s.straight_contrast_db;
    rows[1].isolation_db = s.turn_contrast_db;
  }
  art.write("tjunction_metrics.csv", metrics_csv(rows));
  art.commit();
  return 0;
}

// --- corners -----------------------------------------------------------------

int cmd_corners(const Common& c, const std::string& ks) {
  const ProjectConfig cfg = resolve(c);
  std::vector<int> list;
  try {
    for (double v : parse_number_list(ks)) list.push_back(static_cast<int>(std::lround(v)));
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  for (int k : list) {
    if (k < 0 || k > 8) throw UsageError("corner index must lie in 0..8");
  }
  RunCache cache = make_cache(c);
  Artifacts art(c.out);
  std::vector<TransmissionCurve> curves;
  std::vector<std::string> labels;
  std::vector<MetricsRow> rows;
  std::ostringstream table;
  table << "corner,width_mm,f_opt_ghz,boundary_peak,band_lo_ghz,band_hi_ghz,avg_s21_db\n";
  const double pitch = cfg.surface.cavities.cavity_pitch_ws;
  for (int k : list) {
    const RunResult& run = corner_study(cfg, cache, k);
    curves.push_back(transmission(run, "rx2"));
    labels.push_back("corner" + std::to_string(k));
    const CornerMetrics m = corner_metrics(k, run, cfg.analysis, pitch);
    table << k << ',' << (k >= 1 ? format_double(m.corner_width * 1e3) : std::string()) << ','
          << format_double(m.peak.frequency * 1e-9) << ',' << (m.peak.boundary_peak ? 1 : 0) << ','
          << format_double(m.band.low * 1e-9) << ',' << format_double(m.band.high * 1e-9) << ','
          << format_double(m.band_average_db) << '\n';
    MetricsRow row;
    row.layout = run.layout_id;
    row.d_mm = curves.back().distance * 1e3;
    row.f_opt_ghz = m.peak.frequency * 1e-9;
    row.band_lo_ghz = m.band.low * 1e-9;
    row.band_hi_ghz = m.band.high * 1e-9;
    row.avg_s21_db = m.band_average_db;
    rows.push_back(row);
  }
  art.write("corners_s21.csv", curves_csv(curves, labels));
  art.write("corners_table.csv", table.str());
  art.write("corners_metrics.csv", metrics_csv(rows));
  art.commit();
  return 0;
}

// --- raytrace ----------------------------------------------------------------

int cmd_raytrace(const Common& c, std::optional<double> coax) {
  ProjectConfig cfg = resolve(c);
  if (coax) cfg.raytrace.coax_db_per_m = *coax;
  const std::vector<RaytraceRow> rows = raytrace_sweep(cfg.raytrace);
  Artifacts art(c.out);
  art.write("raytrace.csv", raytrace_csv(rows));
  std::ostringstream s;
  s << "curve,rate_db_per_m,loss_at_dmax_db,coax_crossover_m\n";
  const std::pair<const char*, double RaytraceRow::*> cols[] = {
      {"pec", &RaytraceRow::pec_db}, {"copper", &RaytraceRow::copper_db},
      {"galinstan", &RaytraceRow::galinstan_db}};
  for (const auto& [name, col] : cols) {
    const double cross = coax_crossover(rows, col);
    s << name << ',' << format_double(fitted_rate(rows, col)) << ','
      << format_double(-(rows.back().*col)) << ',' << (cross >= 0.0 ? format_double(cross) : "") << '\n';
  }
  art.write("raytrace_summary.csv", s.str());
  art.commit();
  return 0;
}

// --- validate ----------------------------------------------------------------

int cmd_validate(const Common& c, const std::vector<int>& ids) {
  const ProjectConfig cfg = resolve(c, "ci");
  for (int id : ids) {
    if (id < 1 || id > kCheckCount) throw UsageError("no check " + std::to_string(id));
  }
  RunCache cache = make_cache(c);
  const auto results = run_validation(cfg, cache, ids, [](const CheckResult& r) {
    std::cout << r.line() << std::endl;
    for (const auto& n : r.notes) std::cout << "     " << n << std::endl;
  });
  Artifacts art(c.out);
  art.write("validation.json", validation_report_json(results, cfg, cache));
  art.commit();
  bool ok = true;
  for (const auto& r : results) ok = ok && r.pass;
  return ok ? 0 : 1;
}

// --- render ------------------------------------------------------------------

Layout preset_by_name(const std::string& name, const PresetOptions& opt) {
  if (name == "straight") return preset_straight(10e-3, 150e-3, 1, opt);
  if (name == "tjunction-straight") return preset_tjunction(JunctionMode::Straight, 10e-3, opt);
  if (name == "tjunction-turn") return preset_tjunction(JunctionMode::Turn, 10e-3, opt);
  if (name.rfind("corner", 0) == 0 && name.size() == 7 && std::isdigit(static_cast<unsigned char>(name[6]))) {
    return preset_corner(name[6] - '0', 10e-3, opt);
  }
  throw UsageError("unknown preset '" + name + "'");
}

int cmd_render(const Common& c, const std::string& layout_path, const std::string& preset,
               const std::string& field, const std::string& name) {
  const ProjectConfig cfg = resolve(c);
  const int sources = !layout_path.empty() + !preset.empty() + !field.empty();
  if (sources != 1) throw UsageError("give exactly one of --layout, --preset or --field");
  Artifacts art(c.out);
  if (!field.empty()) {
    const SnapshotField snap = read_snapshot_binary(field);
    const std::string stem = name.empty() ? fs::path(field).stem().string() : name;
    art.write_with(stem + ".pgm", [&](const fs::path& p) { write_snapshot_pgm(snap, p); });
  } else {
    Layout layout;
    if (!layout_path.empty()) {
      try {
        layout = parse_layout_file(layout_path, preset_options(cfg));
      } catch (const LayoutError& e) {
        throw UsageError(layout_path + ":" + std::to_string(e.line()) + ":" +
                         std::to_string(e.column()) + ": " + e.message());
      }
    } else {
      layout = preset_by_name(preset, preset_options(cfg));
    }
    const OccupancyMask mask = rasterize(layout.grid, cfg.solver.cell_size,
                                         cfg.surface.cavities.cavity_radius_r, layout.scene.surface);
    const std::string stem = name.empty() ? (layout.id.empty() ? "layout" : layout.id) : name;
    art.write_with(stem + "_mask.pgm", [&](const fs::path& p) { write_pgm(mask, p); });
    art.write(stem + ".swl", unparse_layout(layout));
  }
  art.commit();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Reconfigurable surface-wave pathway studies"};
  app.require_subcommand(1);
  Common common;

  StraightArgs straight;
  auto* s = app.add_subcommand("straight", "straight pathway: S21 against distance");
  add_common(s, common);
  s->add_option("--distances", straight.distances_mm, "receiver distances in mm")->capture_default_str();
  s->add_option("--widths", straight.widths_mm, "pathway widths in mm")->capture_default_str();
  s->add_option("--layers", straight.layers, "wall layer counts")->capture_default_str();
  s->add_option("--length", straight.length_mm, "pathway length in mm")->capture_default_str();
  s->add_flag("--snapshot", straight.snapshot, "also write the field at the band centre");

  StraightArgs layers;
  layers.distances_mm = "100";
  layers.layers = "1:4:1";
  auto* l = app.add_subcommand("layers", "straight pathway with 1 to 4 wall layers");
  add_common(l, common);
  l->add_option("--distances", layers.distances_mm, "receiver distances in mm")->capture_default_str();
  l->add_option("--layers", layers.layers, "wall layer counts")->capture_default_str();

  StraightArgs widths;
  widths.distances_mm = "50";
  widths.widths_mm = "10:16:2";
  auto* w = app.add_subcommand("widths", "straight pathway at several widths");
  add_common(w, common);
  w->add_option("--distances", widths.distances_mm, "receiver distances in mm")->capture_default_str();
  w->add_option("--widths", widths.widths_mm, "pathway widths in mm")->capture_default_str();

  std::string modes = "both";
  bool tj_snapshot = true;
  auto* t = app.add_subcommand("tjunction", "T-junction in straight and turn states");
  add_common(t, common);
  t->add_option("--mode", modes, "straight, turn or both")->capture_default_str();
  t->add_flag("!--no-snapshot", tj_snapshot, "skip the field snapshots");

  std::string ks = "0:8:1";
  auto* k = app.add_subcommand("corners", "90 degree corners of varying width");
  add_common(k, common);
  k->add_option("--k", ks, "corner indices")->capture_default_str();

  std::optional<double> coax;
  auto* r = app.add_subcommand("raytrace", "image-method path loss to 50 m");
  add_common(r, common);
  r->add_option("--coax-db-per-m", coax, "coaxial cable loss for the comparison curve");

  std::vector<int> ids;
  auto* v = app.add_subcommand("validate", "run the validation checks (ci profile by default)");
  add_common(v, common);
  v->add_option("--check", ids, "check numbers to run (default all)");

  std::string layout_path, preset, field, name;
  auto* g = app.add_subcommand("render", "layout mask or stored field to PGM");
  add_common(g, common);
  g->add_option("--layout", layout_path, ".swl layout program");
  g->add_option("--preset", preset, "straight, tjunction-straight, tjunction-turn, corner0..corner8");
  g->add_option("--field", field, "SWF1 field dump");
  g->add_option("--name", name, "output file stem");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (s->parsed()) return cmd_straight(common, straight, "straight");
    if (l->parsed()) {
      layers.widths_mm = "10";
      return cmd_straight(common, layers, "layers");
    }
    if (w->parsed()) {
      widths.layers = "1";
      return cmd_straight(common, widths, "widths");
    }
    if (t->parsed()) return cmd_tjunction(common, modes, tj_snapshot);
    if (k->parsed()) return cmd_corners(common, ks);
    if (r->parsed()) return cmd_raytrace(common, coax);
    if (v->parsed()) return cmd_validate(common, ids);
    if (g->parsed()) return cmd_render(common, layout_path, preset, field, name);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "failed: " << e.what() << "\n";
    return 1;
  }
  return 2;
}

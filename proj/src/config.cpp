#include "surfwave/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <sstream>
#include <stdexcept>

#include "surfwave/io.hpp"

namespace surfwave {

namespace pt = boost::property_tree;

Profile Profile::named(const std::string& name) {
  if (name == "desk") return desk();
  if (name == "ci") return ci();
  throw std::invalid_argument("unknown profile '" + name + "' (expected desk or ci)");
}

void ProjectConfig::apply_profile(const Profile& p) {
  profile = p;
  solver.cell_size = p.cell_size;
}

void ProjectConfig::validate() const {
  solver.validate(surface);
  raytrace.base.validate();
  if (!(analysis.window_high > analysis.window_low) || !(analysis.window_low > 0.0)) {
    throw std::invalid_argument("analysis window must satisfy 0 < low < high");
  }
  if (!(analysis.half_power_drop_db > 0.0)) {
    throw std::invalid_argument("half_power_drop_db must be positive");
  }
}

std::vector<double> parse_number_list(const std::string& text) {
  auto number = [&](const std::string& s) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(s, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    while (used < s.size() && std::isspace(static_cast<unsigned char>(s[used]))) ++used;
    if (used == 0 || used != s.size() || s.empty()) {
      throw std::invalid_argument("bad number '" + s + "' in '" + text + "'");
    }
    return v;
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t");
    const auto e = s.find_last_not_of(" \t");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(trim(p));
    if (parts.size() != 3) throw std::invalid_argument("range must be lo:hi:step: " + text);
    const double lo = number(parts[0]), hi = number(parts[1]), step = number(parts[2]);
    if (!(step > 0.0) || !(hi >= lo)) throw std::invalid_argument("bad range " + text);
    const int n = static_cast<int>(std::floor((hi - lo) / step + 1e-9));
    for (int k = 0; k <= n; ++k) out.push_back(lo + k * step);
  } else {
    std::stringstream ss(text);
    for (std::string p; std::getline(ss, p, ',');) out.push_back(number(trim(p)));
  }
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!(out[i] >= 0.0) || (i > 0 && !(out[i] > out[i - 1]))) {
      throw std::invalid_argument("values must be non-negative and increasing: " + text);
    }
  }
  if (out.empty()) throw std::invalid_argument("empty list");
  return out;
}

std::vector<double> parse_frequency_list(const std::string& text) {
  std::vector<double> out = parse_number_list(text);
  if (out.front() <= 0.0) throw std::invalid_argument("frequencies must be positive: " + text);
  for (double& f : out) f *= 1e9;
  return out;
}

namespace {

// Reads keys of one section, remembering which were consumed so that
// leftovers can be reported.
class Section {
 public:
  Section(const pt::ptree* tree, std::string name) : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> raw(const std::string& key) {
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    used_.insert(key);
    std::string s = *v;
    if (auto hash = s.find(" #"); hash != std::string::npos) s.erase(hash);
    if (auto semi = s.find(" ;"); semi != std::string::npos) s.erase(semi);
    const auto e = s.find_last_not_of(" \t\r");
    return e == std::string::npos ? std::string() : s.substr(0, e + 1);
  }

  void number(const std::string& key, double& out, double scale = 1.0) {
    if (auto s = raw(key)) {
      try {
        std::size_t used = 0;
        const double v = std::stod(*s, &used);
        if (used != s->size()) throw std::invalid_argument("trailing text");
        out = v * scale;
      } catch (const std::exception&) {
        throw std::invalid_argument("[" + name_ + "] " + key + ": not a number: '" + *s + "'");
      }
    }
  }

  void integer(const std::string& key, int& out) {
    double v = out;
    number(key, v);
    if (v != std::floor(v)) {
      throw std::invalid_argument("[" + name_ + "] " + key + ": expected an integer");
    }
    out = static_cast<int>(v);
  }

  void flag(const std::string& key, bool& out) {
    if (auto s = raw(key)) {
      if (*s == "true" || *s == "1" || *s == "yes") {
        out = true;
      } else if (*s == "false" || *s == "0" || *s == "no") {
        out = false;
      } else {
        throw std::invalid_argument("[" + name_ + "] " + key + ": expected true or false");
      }
    }
  }

  void check_unused() const {
    if (!tree_) return;
    for (const auto& [k, v] : *tree_) {
      if (!used_.count(k)) {
        throw std::invalid_argument("unknown key '" + k + "' in [" + name_ + "]");
      }
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::set<std::string> used_;
};

// A material name from the table or a conductivity in S/m ("inf" for PEC).
MetalSpec metal_value(const MaterialDb& db, const std::string& key, const std::string& v) {
  if (db.has_metal(v)) return db.metal(v);
  if (v == "inf" || v == "pec") return MetalSpec::pec();
  try {
    std::size_t used = 0;
    MetalSpec m{std::stod(v, &used)};
    if (used == v.size()) {
      m.validate();
      return m;
    }
  } catch (const std::exception&) {
  }
  throw std::invalid_argument(key + ": unknown metal '" + v + "'");
}

std::string metal_text(const MetalSpec& m) { return m.is_pec() ? "inf" : format_double(m.sigma); }

const pt::ptree* child(const pt::ptree& root, const std::string& name) {
  auto c = root.get_child_optional(pt::ptree::path_type(name, '\0'));
  return c ? &*c : nullptr;
}

// Unit-scaled values are rounded to 12 significant digits so that the scale
// factor's own rounding does not show up in the text.
std::string scaled(double v, double factor) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v * factor);
  return format_double(std::strtod(buf, nullptr));
}

std::string ghz_list(const std::vector<double>& f) {
  std::string s;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (i) s += ",";
    s += scaled(f[i], 1e-9);
  }
  return s;
}

}  // namespace

ProjectConfig parse_config(const std::string& text, const std::filesystem::path& base_dir) {
  pt::ptree root;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, root);
  } catch (const pt::ini_parser_error& e) {
    throw std::invalid_argument("config line " + std::to_string(e.line()) + ": " + e.message());
  }
  static const std::set<std::string> known = {"surface", "solver", "analysis", "raytrace"};
  for (const auto& [name, sub] : root) {
    if (!known.count(name)) throw std::invalid_argument("unknown config section [" + name + "]");
  }

  ProjectConfig cfg;
  Section surface(child(root, "surface"), "surface");
  if (auto m = surface.raw("materials")) {
    std::filesystem::path p(*m);
    if (p.is_relative() && !base_dir.empty()) p = base_dir / p;
    cfg.materials = MaterialDb::load(p);
  }
  auto& s = cfg.surface;
  if (auto d = surface.raw("dielectric")) {
    s.dielectric = cfg.materials.dielectric(*d).with_thickness(s.dielectric.thickness_h);
  }
  surface.number("thickness_mm", s.dielectric.thickness_h, 1e-3);
  surface.number("eps_r", s.dielectric.eps_r);
  surface.number("tan_delta", s.dielectric.tan_delta);
  if (auto g = surface.raw("ground")) s.ground = metal_value(cfg.materials, "ground", *g);
  if (auto p = surface.raw("pins")) s.pin_metal = metal_value(cfg.materials, "pins", *p);
  surface.number("cavity_radius_mm", s.cavities.cavity_radius_r, 1e-3);
  surface.number("cavity_pitch_mm", s.cavities.cavity_pitch_ws, 1e-3);
  surface.number("aperture_mm", s.aperture_width, 1e-3);
  surface.check_unused();

  Section solver(child(root, "solver"), "solver");
  auto& v = cfg.solver;
  bool profile_given = false;
  if (auto p = solver.raw("profile")) {
    cfg.apply_profile(Profile::named(*p));
    profile_given = true;
  }
  double cell = v.cell_size;
  solver.number("cell_mm", cell, 1e-3);
  if (cell != v.cell_size) {
    if (profile_given) {
      throw std::invalid_argument("[solver] sets both profile and cell_mm");
    }
    v.cell_size = cell;
    cfg.profile.name = "custom";
    cfg.profile.cell_size = cell;
  }
  solver.number("courant", v.courant_factor);
  solver.integer("pml_cells", v.pml_cells);
  solver.number("pml_reflection", v.pml_reflection);
  solver.number("pml_order", v.pml_order);
  solver.number("pulse_center_ghz", v.pulse_center_f, 1e9);
  solver.number("pulse_bandwidth_ghz", v.pulse_bandwidth, 1e9);
  solver.number("run_time_ns", v.run_time, 1e-9);
  if (auto f = solver.raw("freqs_ghz")) v.dft_frequencies = parse_frequency_list(*f);
  solver.number("confinement_kappa", v.confinement_kappa);
  solver.number("energy_threshold", v.energy_threshold);
  solver.integer("energy_check_interval", v.energy_check_interval);
  double max_steps = static_cast<double>(v.max_steps);
  solver.number("max_steps", max_steps);
  if (max_steps < 0.0 || max_steps != std::floor(max_steps)) {
    throw std::invalid_argument("[solver] max_steps must be a non-negative integer");
  }
  v.max_steps = static_cast<std::size_t>(max_steps);
  if (auto m = solver.raw("metal")) {
    if (*m == "pec") {
      v.metal_mode = MetalMode::Pec;
    } else if (*m == "lossy") {
      v.metal_mode = MetalMode::Lossy;
    } else {
      throw std::invalid_argument("[solver] metal must be pec or lossy");
    }
  }
  solver.integer("workers", v.workers);
  solver.flag("gate_reference", v.gate_reference);
  solver.flag("directional_source", v.directional_source);
  solver.check_unused();

  Section analysis(child(root, "analysis"), "analysis");
  analysis.number("window_low_ghz", cfg.analysis.window_low, 1e9);
  analysis.number("window_high_ghz", cfg.analysis.window_high, 1e9);
  analysis.number("half_power_drop_db", cfg.analysis.half_power_drop_db);
  analysis.check_unused();

  Section ray(child(root, "raytrace"), "raytrace");
  auto& r = cfg.raytrace;
  ray.number("wall_separation_mm", r.base.wall_separation, 1e-3);
  if (auto d = ray.raw("dielectric")) {
    r.base.surface = cfg.materials.dielectric(*d).with_thickness(r.base.surface.thickness_h);
  }
  ray.number("thickness_mm", r.base.surface.thickness_h, 1e-3);
  ray.number("eps_r", r.base.surface.eps_r);
  ray.number("tan_delta", r.base.surface.tan_delta);
  if (auto g = ray.raw("ground")) r.base.ground = metal_value(cfg.materials, "ground", *g);
  ray.number("confinement_kappa", r.base.confinement_kappa);
  ray.number("frequency_ghz", r.base.frequency, 1e9);
  ray.integer("max_images", r.base.max_images);
  ray.number("image_margin", r.base.image_margin);
  ray.integer("min_images", r.base.min_images);
  if (auto m = ray.raw("copper")) r.copper = metal_value(cfg.materials, "copper", *m);
  if (auto m = ray.raw("galinstan")) r.galinstan = metal_value(cfg.materials, "galinstan", *m);
  ray.number("d_min_m", r.d_min);
  ray.number("d_max_m", r.d_max);
  ray.number("d_step_m", r.d_step);
  if (auto c = ray.raw("coax_db_per_m")) {
    if (!c->empty()) {
      double val = 0.0;
      try {
        std::size_t used = 0;
        val = std::stod(*c, &used);
        if (used != c->size()) throw std::invalid_argument("trailing");
      } catch (const std::exception&) {
        throw std::invalid_argument("[raytrace] coax_db_per_m: not a number: '" + *c + "'");
      }
      if (val < 0.0) throw std::invalid_argument("[raytrace] coax_db_per_m must be >= 0");
      r.coax_db_per_m = val;
    }
  }
  ray.check_unused();

  cfg.validate();
  return cfg;
}

ProjectConfig load_config(const std::filesystem::path& path) {
  try {
    return parse_config(read_file(path), path.parent_path());
  } catch (const std::invalid_argument& e) {
    throw std::invalid_argument(path.string() + ": " + e.what());
  }
}

std::string format_config(const ProjectConfig& cfg) {
  std::ostringstream o;
  auto num = [](double v) { return format_double(v); };
  const auto& s = cfg.surface;
  o << "[surface]\n"
    << "eps_r = " << num(s.dielectric.eps_r) << "\n"
    << "tan_delta = " << num(s.dielectric.tan_delta) << "\n"
    << "thickness_mm = " << scaled(s.dielectric.thickness_h, 1e3) << "\n"
    << "cavity_radius_mm = " << scaled(s.cavities.cavity_radius_r, 1e3) << "\n"
    << "cavity_pitch_mm = " << scaled(s.cavities.cavity_pitch_ws, 1e3) << "\n"
    << "aperture_mm = " << scaled(s.aperture_width, 1e3) << "\n"
    << "ground = " << metal_text(s.ground) << "\n"
    << "pins = " << metal_text(s.pin_metal) << "\n";
  const auto& v = cfg.solver;
  o << "\n[solver]\n";
  const bool named = (cfg.profile.name == "desk" || cfg.profile.name == "ci") &&
                     Profile::named(cfg.profile.name).cell_size == v.cell_size;
  if (named) {
    o << "profile = " << cfg.profile.name << "\n";
  } else {
    o << "cell_mm = " << scaled(v.cell_size, 1e3) << "\n";
  }
  o
    << "courant = " << num(v.courant_factor) << "\n"
    << "pml_cells = " << v.pml_cells << "\n"
    << "pml_reflection = " << num(v.pml_reflection) << "\n"
    << "pml_order = " << num(v.pml_order) << "\n"
    << "pulse_center_ghz = " << scaled(v.pulse_center_f, 1e-9) << "\n"
    << "pulse_bandwidth_ghz = " << scaled(v.pulse_bandwidth, 1e-9) << "\n"
    << "run_time_ns = " << scaled(v.run_time, 1e9) << "\n"
    << "freqs_ghz = " << ghz_list(v.frequencies()) << "\n"
    << "confinement_kappa = " << num(v.confinement_kappa) << "\n"
    << "energy_threshold = " << num(v.energy_threshold) << "\n"
    << "energy_check_interval = " << v.energy_check_interval << "\n"
    << "max_steps = " << v.max_steps << "\n"
    << "metal = " << (v.metal_mode == MetalMode::Pec ? "pec" : "lossy") << "\n"
    << "workers = " << v.workers << "\n"
    << "gate_reference = " << (v.gate_reference ? "true" : "false") << "\n"
    << "directional_source = " << (v.directional_source ? "true" : "false") << "\n";
  const auto& a = cfg.analysis;
  o << "\n[analysis]\n"
    << "window_low_ghz = " << scaled(a.window_low, 1e-9) << "\n"
    << "window_high_ghz = " << scaled(a.window_high, 1e-9) << "\n"
    << "half_power_drop_db = " << num(a.half_power_drop_db) << "\n";
  const auto& r = cfg.raytrace;
  o << "\n[raytrace]\n"
    << "wall_separation_mm = " << scaled(r.base.wall_separation, 1e3) << "\n"
    << "eps_r = " << num(r.base.surface.eps_r) << "\n"
    << "tan_delta = " << num(r.base.surface.tan_delta) << "\n"
    << "thickness_mm = " << scaled(r.base.surface.thickness_h, 1e3) << "\n"
    << "ground = " << metal_text(r.base.ground) << "\n"
    << "copper = " << metal_text(r.copper) << "\n"
    << "galinstan = " << metal_text(r.galinstan) << "\n"
    << "confinement_kappa = " << num(r.base.confinement_kappa) << "\n"
    << "frequency_ghz = " << scaled(r.base.frequency, 1e-9) << "\n"
    << "max_images = " << r.base.max_images << "\n"
    << "image_margin = " << num(r.base.image_margin) << "\n"
    << "min_images = " << r.base.min_images << "\n"
    << "d_min_m = " << num(r.d_min) << "\n"
    << "d_max_m = " << num(r.d_max) << "\n"
    << "d_step_m = " << num(r.d_step) << "\n"
    << "coax_db_per_m = " << (r.coax_db_per_m >= 0.0 ? num(r.coax_db_per_m) : std::string()) << "\n";
  return o.str();
}

}  // namespace surfwave

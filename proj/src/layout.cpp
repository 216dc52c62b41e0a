#include "surfwave/layout.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "surfwave/io.hpp"

namespace surfwave {

namespace {

int lattice_steps(double length, double pitch, const char* what) {
  const double steps = length / pitch;
  const double rounded = std::round(steps);
  if (std::abs(steps - rounded) > 1e-6) {
    std::ostringstream msg;
    msg << what << " (" << length * 1e3 << " mm) is not a multiple of the pitch ("
        << pitch * 1e3 << " mm)";
    throw std::invalid_argument(msg.str());
  }
  return static_cast<int>(rounded);
}

// Number of pitches needed to cover `length`, rounding up.
int lattice_cover(double length, double pitch) {
  return static_cast<int>(std::ceil(length / pitch - 1e-9));
}

std::string mm_tag(double metres) {
  return std::to_string(static_cast<long>(std::lround(metres * 1e3)));
}

void add_run(std::vector<LatticeIndex>& pins, int r0, int c0, int r1, int c1) {
  const int dr = (r1 > r0) - (r1 < r0);
  const int dc = (c1 > c0) - (c1 < c0);
  for (int r = r0, c = c0;; r += dr, c += dc) {
    pins.push_back({r, c});
    if (r == r1 && c == c1) {
      break;
    }
  }
}

void finish_bounds(PinPattern& p) {
  std::sort(p.pins.begin(), p.pins.end());
  p.pins.erase(std::unique(p.pins.begin(), p.pins.end()), p.pins.end());
  p.row_min = p.col_min = 1 << 30;
  p.row_max = p.col_max = -(1 << 30);
  for (const auto& idx : p.pins) {
    p.row_min = std::min(p.row_min, idx.row);
    p.row_max = std::max(p.row_max, idx.row);
    p.col_min = std::min(p.col_min, idx.col);
    p.col_max = std::max(p.col_max, idx.col);
  }
}

ProbeSpec point_probe(std::string id, Vec2 pos, double dist, std::string group) {
  ProbeSpec p;
  p.id = std::move(id);
  p.position = pos;
  p.path_distance = dist;
  p.group = std::move(group);
  return p;
}

ProbeSpec receiver(std::string id, const Transducer& t, double dist) {
  ProbeSpec p;
  p.id = std::move(id);
  p.position = t.position;
  p.aperture = t.aperture;
  p.facing = t.facing;
  p.path_distance = dist;
  p.group = "receiver";
  return p;
}

ProbeSpec reference_probe(const Transducer& t, double offset) {
  const Vec2 u = unit_vector(t.facing);
  return point_probe("ref", {t.position.y + offset * u.y, t.position.z + offset * u.z}, 0.0,
                     "reference");
}

PinPattern straight_pattern(double width, double length, int layers, const PresetOptions& opt) {
  const double pitch = opt.pitch;
  const int m = lattice_steps(width, pitch, "pathway width");
  const int ncols = lattice_cover(length + 2.0 * opt.wall_overhang, pitch) + 1;
  PinPattern p;
  for (int layer = 0; layer < layers; ++layer) {
    add_run(p.pins, -layer, 0, -layer, ncols - 1);
    add_run(p.pins, m + layer, 0, m + layer, ncols - 1);
  }
  const double yc = 0.5 * m * pitch;
  const double z1 = opt.wall_overhang;
  Transducer t1{1, {yc, z1}, Facing::PlusZ, opt.aperture};
  Transducer t2{2, {yc, z1 + length}, Facing::MinusZ, opt.aperture};
  p.transducers = {t1, t2};
  p.reference = reference_probe(t1, opt.reference_offset);
  const int nprobe = static_cast<int>(std::floor(length / opt.probe_spacing + 1e-9));
  for (int i = 1; i <= nprobe; ++i) {
    const double d = i * opt.probe_spacing;
    const std::string tag = mm_tag(d);
    p.probes.push_back(point_probe("c" + tag, {yc, z1 + d}, d, "centerline"));
    p.probes.push_back(point_probe("o" + tag, {yc + width, z1 + d}, d, "outside"));
    Transducer rx{2, {yc, z1 + d}, Facing::MinusZ, opt.aperture};
    p.probes.push_back(receiver("r" + tag, rx, d));
  }
  finish_bounds(p);
  const double outer = (layers - 1) * pitch;
  p.bounds = {-outer - opt.lateral_margin, m * pitch + outer + opt.lateral_margin,
              -0.5 * pitch, (ncols - 1) * pitch + 0.5 * pitch};
  return p;
}

PinPattern tjunction_pattern(JunctionMode mode, double width, const PresetOptions& opt) {
  const double pitch = opt.pitch;
  const int m = lattice_steps(width, pitch, "pathway width");
  if (m < 2) {
    throw std::invalid_argument("pathway width must be at least two pitches");
  }
  // Arm 3 walls sit at columns cj and cj + m; the junction centre is at
  // z = (cj + m/2) * pitch.
  const double z1 = opt.wall_overhang;
  const int cj = lattice_cover(z1 + opt.arm_length - 0.5 * width, pitch);
  const double zj = (cj + 0.5 * m) * pitch;
  const double yc = 0.5 * m * pitch;
  const double z2 = zj + opt.arm_length;
  const int last_col = lattice_cover(z2 + opt.wall_overhang, pitch);
  const double y3 = yc + opt.arm_length;
  const int top_row = lattice_cover(y3 + opt.wall_overhang, pitch);

  PinPattern p;
  add_run(p.pins, 0, 0, 0, last_col);          // lower wall, arms 1 and 2
  add_run(p.pins, m, 0, m, cj);                // upper wall, arm 1
  add_run(p.pins, m, cj + m, m, last_col);     // upper wall, arm 2
  add_run(p.pins, m, cj, top_row, cj);         // arm 3, left wall
  add_run(p.pins, m, cj + m, top_row, cj + m); // arm 3, right wall
  if (mode == JunctionMode::Straight) {
    add_run(p.pins, m, cj, m, cj + m);  // close the arm-3 entrance
  } else {
    add_run(p.pins, 0, cj, m, cj + m);  // 45 degree deflector
  }

  Transducer t1{1, {yc, z1}, Facing::PlusZ, opt.aperture};
  Transducer t2{2, {yc, z2}, Facing::MinusZ, opt.aperture};
  Transducer t3{3, {y3, zj}, Facing::MinusY, opt.aperture};
  p.transducers = {t1, t2, t3};
  p.reference = reference_probe(t1, opt.reference_offset);
  const double arm1 = zj - z1;
  const double total = arm1 + opt.arm_length;
  const int nprobe = static_cast<int>(std::floor(total / opt.probe_spacing + 1e-9));
  for (int i = 1; i <= nprobe; ++i) {
    const double s = i * opt.probe_spacing;
    const std::string tag = mm_tag(s);
    p.probes.push_back(point_probe("s" + tag, {yc, z1 + s}, s, "path_straight"));
    const Vec2 turn_pos = s <= arm1 ? Vec2{yc, z1 + s} : Vec2{yc + (s - arm1), zj};
    p.probes.push_back(point_probe("t" + tag, turn_pos, s, "path_turn"));
  }
  p.probes.push_back(receiver("rx2", t2, total));
  p.probes.push_back(receiver("rx3", t3, total));
  finish_bounds(p);
  p.bounds = {-opt.lateral_margin, top_row * pitch + 0.5 * pitch, -0.5 * pitch,
              last_col * pitch + 0.5 * pitch};
  return p;
}

PinPattern corner_pattern(int k, double width, const PresetOptions& opt) {
  const double pitch = opt.pitch;
  const int m = lattice_steps(width, pitch, "pathway width");
  if (m < 2) {
    throw std::invalid_argument("pathway width must be at least two pitches");
  }
  if (k < 0 || k > 2 * m - 2) {
    throw std::invalid_argument("corner index k must lie in 0.." + std::to_string(2 * m - 2));
  }
  // Inner vertex pin O is the anchor (0, 0). The input arm runs along +z in
  // rows -m..0, the output arm along +y in columns 0..m.
  const double half = 0.5 * width;
  const double z1 = -(opt.corner_arm_length - half);
  const double y2 = opt.corner_arm_length - half;
  const int first_col = -lattice_cover(-z1 + opt.wall_overhang, pitch);
  const int top_row = lattice_cover(y2 + opt.wall_overhang, pitch);

  PinPattern p;
  add_run(p.pins, 0, first_col, 0, 0);   // inner wall, input arm
  add_run(p.pins, 0, 0, top_row, 0);     // inner wall, output arm
  std::vector<LatticeIndex> outer;
  add_run(outer, -m, first_col, -m, m);  // outer wall, input arm
  add_run(outer, -m, m, top_row, m);     // outer wall, output arm
  // Corner k keeps outer-wall pins with col - row <= 2m - k and bridges the
  // removed vertex by a 45 degree chamfer on the line col - row = 2m - k.
  const int chamfer = 2 * m - k;
  for (const auto& idx : outer) {
    if (k == 0 || idx.col - idx.row <= chamfer) {
      p.pins.push_back(idx);
    }
  }
  if (k >= 1) {
    add_run(p.pins, -m, m - k, k - m, m);
  }

  Transducer t1{1, {-half, z1}, Facing::PlusZ, opt.aperture};
  Transducer t2{2, {y2, half}, Facing::MinusY, opt.aperture};
  p.transducers = {t1, t2};
  p.reference = reference_probe(t1, opt.reference_offset);
  const double arm1 = half - z1;
  const double total = arm1 + (y2 + half);
  const int nprobe = static_cast<int>(std::floor(total / opt.probe_spacing + 1e-9));
  for (int i = 1; i <= nprobe; ++i) {
    const double s = i * opt.probe_spacing;
    const Vec2 pos = s <= arm1 ? Vec2{-half, z1 + s} : Vec2{-half + (s - arm1), half};
    p.probes.push_back(point_probe("p" + mm_tag(s), pos, s, "path"));
  }
  p.probes.push_back(receiver("rx2", t2, total));
  finish_bounds(p);
  p.bounds = {-m * pitch - opt.lateral_margin, top_row * pitch + 0.5 * pitch,
              first_col * pitch - 0.5 * pitch, m * pitch + opt.lateral_margin};
  return p;
}

}  // namespace

Vec2 unit_vector(Facing f) {
  switch (f) {
    case Facing::PlusZ: return {0.0, 1.0};
    case Facing::MinusZ: return {0.0, -1.0};
    case Facing::PlusY: return {1.0, 0.0};
    case Facing::MinusY: return {-1.0, 0.0};
  }
  return {};
}

std::string to_string(Facing f) {
  switch (f) {
    case Facing::PlusZ: return "+z";
    case Facing::MinusZ: return "-z";
    case Facing::PlusY: return "+y";
    case Facing::MinusY: return "-y";
  }
  return "?";
}

std::optional<Facing> parse_facing(std::string_view s) {
  if (s == "+z") return Facing::PlusZ;
  if (s == "-z") return Facing::MinusZ;
  if (s == "+y") return Facing::PlusY;
  if (s == "-y") return Facing::MinusY;
  return std::nullopt;
}

PinGrid::PinGrid(int rows, int cols, double pitch, Vec2 origin)
    : rows_(rows), cols_(cols), pitch_(pitch), origin_(origin) {
  if (rows <= 0 || cols <= 0) {
    throw std::invalid_argument("pin grid needs positive row and column counts");
  }
  if (!(pitch > 0.0)) {
    throw std::invalid_argument("pin grid pitch must be positive");
  }
}

void PinGrid::fill(int r, int c) {
  if (!in_range(r, c)) {
    throw std::out_of_range("cavity (" + std::to_string(r) + "," + std::to_string(c) +
                            ") outside " + std::to_string(rows_) + "x" + std::to_string(cols_) +
                            " grid");
  }
  filled_.insert({r, c});
}

void PinGrid::clear(int r, int c) { filled_.erase({r, c}); }

bool PinGrid::filled(int r, int c) const { return filled_.count({r, c}) != 0; }

Vec2 PinGrid::center(int r, int c) const {
  return {origin_.y + r * pitch_, origin_.z + c * pitch_};
}

const Transducer* SceneGeometry::transducer(int id) const {
  for (const auto& t : transducers) {
    if (t.id == id) {
      return &t;
    }
  }
  return nullptr;
}

const ProbeSpec* SceneGeometry::probe(const std::string& id) const {
  for (const auto& p : probes) {
    if (p.id == id) {
      return &p;
    }
  }
  return nullptr;
}

void SceneGeometry::set_transducer(const Transducer& t) {
  for (auto& existing : transducers) {
    if (existing.id == t.id) {
      existing = t;
      return;
    }
  }
  transducers.push_back(t);
  std::sort(transducers.begin(), transducers.end(),
            [](const Transducer& a, const Transducer& b) { return a.id < b.id; });
}

void PathwaySpec::validate(double pitch) const {
  const int m = lattice_steps(width_wc, pitch, "pathway width");
  if (m < 2) {
    throw std::invalid_argument("pathway width must be at least two pitches");
  }
  if (layers < 1 || layers > 4) {
    throw std::invalid_argument("wall layers must lie in 1..4");
  }
  if (const auto* c = std::get_if<CornerKind>(&kind)) {
    if (c->k < 0 || c->k > 2 * m - 2) {
      throw std::invalid_argument("corner index out of range");
    }
  }
}

double corner_width(int k, double pitch) {
  if (k < 0 || k > 8) {
    throw std::out_of_range("corner index must lie in 0..8, got " + std::to_string(k));
  }
  return (10 - k) * pitch / std::sqrt(2.0);
}

CornerSpec corner_spec(int k, double pitch) { return {k, corner_width(k, pitch)}; }

PinPattern pattern_for(const PathwaySpec& spec, const PresetOptions& opt) {
  spec.validate(opt.pitch);
  return std::visit(
      [&](const auto& kind) -> PinPattern {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, StraightKind>) {
          return straight_pattern(spec.width_wc, spec.length, spec.layers, opt);
        } else if constexpr (std::is_same_v<K, TJunctionKind>) {
          return tjunction_pattern(kind.mode, spec.width_wc, opt);
        } else {
          return corner_pattern(kind.k, spec.width_wc, opt);
        }
      },
      spec.kind);
}

SceneGeometry place_pattern(const PinPattern& pattern, PinGrid& grid, LatticeIndex anchor) {
  for (const auto& idx : pattern.pins) {
    grid.fill(anchor.row + idx.row, anchor.col + idx.col);
  }
  const Vec2 a = grid.center(anchor);
  auto shift = [&](Vec2 v) { return Vec2{v.y + a.y, v.z + a.z}; };
  SceneGeometry scene;
  scene.surface = {pattern.bounds.y_min + a.y, pattern.bounds.y_max + a.y,
                   pattern.bounds.z_min + a.z, pattern.bounds.z_max + a.z};
  for (auto t : pattern.transducers) {
    t.position = shift(t.position);
    scene.transducers.push_back(t);
  }
  for (auto p : pattern.probes) {
    p.position = shift(p.position);
    scene.probes.push_back(p);
  }
  if (pattern.reference) {
    ProbeSpec r = *pattern.reference;
    r.position = shift(r.position);
    scene.reference = r;
  }
  return scene;
}

namespace {

Layout layout_from_pattern(const PinPattern& pat, double pitch, std::string id) {
  // Lattice covering the preset bounds; the anchor pin sits at y = z = 0.
  const int row_lo = std::min(pat.row_min, static_cast<int>(std::ceil(pat.bounds.y_min / pitch)));
  const int row_hi = std::max(pat.row_max, static_cast<int>(std::floor(pat.bounds.y_max / pitch)));
  const int col_lo = std::min(pat.col_min, static_cast<int>(std::ceil(pat.bounds.z_min / pitch)));
  const int col_hi = std::max(pat.col_max, static_cast<int>(std::floor(pat.bounds.z_max / pitch)));
  Layout out;
  out.id = std::move(id);
  out.grid = PinGrid(row_hi - row_lo + 1, col_hi - col_lo + 1, pitch,
                     {row_lo * pitch, col_lo * pitch});
  out.scene = place_pattern(pat, out.grid, {-row_lo, -col_lo});
  return out;
}

}  // namespace

Layout preset_straight(double width_wc, double length, int layers, const PresetOptions& opt) {
  if (width_wc < 2.0 * opt.pitch - 1e-12) {
    throw std::invalid_argument("pathway width must be at least two pitches");
  }
  PathwaySpec spec{width_wc, length, layers, StraightKind{}};
  return layout_from_pattern(pattern_for(spec, opt), opt.pitch,
                             "straight_w" + mm_tag(width_wc) + "_l" + std::to_string(layers));
}

Layout preset_tjunction(JunctionMode mode, double width_wc, const PresetOptions& opt) {
  PathwaySpec spec{width_wc, 0.0, 1, TJunctionKind{mode}};
  return layout_from_pattern(
      pattern_for(spec, opt), opt.pitch,
      std::string("tjunction_") + (mode == JunctionMode::Straight ? "straight" : "turn"));
}

Layout preset_corner(int k, double width_wc, const PresetOptions& opt) {
  PathwaySpec spec{width_wc, 0.0, 1, CornerKind{k}};
  return layout_from_pattern(pattern_for(spec, opt), opt.pitch, "corner" + std::to_string(k));
}

Layout build_pathway(const PathwaySpec& spec, const PresetOptions& opt) {
  return std::visit(
      [&](const auto& kind) -> Layout {
        using K = std::decay_t<decltype(kind)>;
        if constexpr (std::is_same_v<K, StraightKind>) {
          return preset_straight(spec.width_wc, spec.length, spec.layers, opt);
        } else if constexpr (std::is_same_v<K, TJunctionKind>) {
          return preset_tjunction(kind.mode, spec.width_wc, opt);
        } else {
          return preset_corner(kind.k, spec.width_wc, opt);
        }
      },
      spec.kind);
}

std::size_t OccupancyMask::metal_count() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), std::uint8_t{1}));
}

Extents lattice_extents(const PinGrid& grid) {
  const double p = grid.pitch();
  const Vec2 o = grid.origin();
  return {o.y - 0.5 * p, o.y + (grid.rows() - 0.5) * p, o.z - 0.5 * p,
          o.z + (grid.cols() - 0.5) * p};
}

OccupancyMask rasterize(const PinGrid& grid, double cell_size, double cavity_radius,
                        const Extents& extents) {
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("cell size must be positive");
  }
  if (cell_size > 0.5 * cavity_radius * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "cell size " << cell_size * 1e3 << " mm is too coarse for cavity radius "
        << cavity_radius * 1e3 << " mm; refine to at most " << 0.5 * cavity_radius * 1e3
        << " mm";
    throw std::invalid_argument(msg.str());
  }
  OccupancyMask mask;
  mask.cell = cell_size;
  mask.origin = {extents.y_min, extents.z_min};
  mask.rows = static_cast<int>(std::lround(extents.height() / cell_size));
  mask.cols = static_cast<int>(std::lround(extents.length() / cell_size));
  if (mask.rows <= 0 || mask.cols <= 0) {
    throw std::invalid_argument("rasterisation extents are empty");
  }
  mask.cells.assign(static_cast<std::size_t>(mask.rows) * mask.cols, 0);
  // Work in cell units so that mirror-image pins produce mirror-image masks.
  const double r_cells = cavity_radius / cell_size;
  const double r2 = r_cells * r_cells;
  for (const auto& idx : grid.filled_set()) {
    const Vec2 c = grid.center(idx);
    const double py = (c.y - mask.origin.y) / cell_size;
    const double pz = (c.z - mask.origin.z) / cell_size;
    const int i0 = std::max(0, static_cast<int>(std::floor(py - r_cells)));
    const int i1 = std::min(mask.rows - 1, static_cast<int>(std::ceil(py + r_cells)));
    const int j0 = std::max(0, static_cast<int>(std::floor(pz - r_cells)));
    const int j1 = std::min(mask.cols - 1, static_cast<int>(std::ceil(pz + r_cells)));
    for (int i = i0; i <= i1; ++i) {
      const double dy = i + 0.5 - py;
      for (int j = j0; j <= j1; ++j) {
        const double dz = j + 0.5 - pz;
        if (dy * dy + dz * dz < r2) {
          mask.cells[static_cast<std::size_t>(i) * mask.cols + j] = 1;
        }
      }
    }
  }
  return mask;
}

OccupancyMask rasterize(const PinGrid& grid, double cell_size, double cavity_radius) {
  return rasterize(grid, cell_size, cavity_radius, lattice_extents(grid));
}

void write_pgm(const OccupancyMask& mask, const std::filesystem::path& path) {
  std::string out = "P5\n" + std::to_string(mask.cols) + " " + std::to_string(mask.rows) +
                    "\n255\n";
  out.reserve(out.size() + mask.cells.size());
  for (int i = mask.rows - 1; i >= 0; --i) {
    for (int j = 0; j < mask.cols; ++j) {
      out.push_back(static_cast<char>(mask.at(i, j) ? 255 : 0));
    }
  }
  write_file_atomic(path, out);
}

}  // namespace surfwave

#pragma once

#include <compare>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <variant>
#include <vector>

namespace surfwave {

/// Point in the surface plane: y is lateral, z is the nominal propagation axis.
struct Vec2 {
  double y = 0.0;
  double z = 0.0;
};

enum class Facing { PlusZ, MinusZ, PlusY, MinusY };

Vec2 unit_vector(Facing f);
std::string to_string(Facing f);
std::optional<Facing> parse_facing(std::string_view s);

struct LatticeIndex {
  int row = 0;
  int col = 0;
  auto operator<=>(const LatticeIndex&) const = default;
};

/// Square cavity lattice; row r sits at y = origin.y + r*pitch and column c at
/// z = origin.z + c*pitch. The filled set is the reconfigurable state.
class PinGrid {
 public:
  PinGrid() = default;
  PinGrid(int rows, int cols, double pitch, Vec2 origin = {});

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  double pitch() const { return pitch_; }
  Vec2 origin() const { return origin_; }

  bool in_range(int r, int c) const { return r >= 0 && r < rows_ && c >= 0 && c < cols_; }
  void fill(int r, int c);
  void clear(int r, int c);
  bool filled(int r, int c) const;
  const std::set<LatticeIndex>& filled_set() const { return filled_; }
  std::size_t filled_count() const { return filled_.size(); }

  Vec2 center(int r, int c) const;
  Vec2 center(LatticeIndex idx) const { return center(idx.row, idx.col); }

 private:
  int rows_ = 0;
  int cols_ = 0;
  double pitch_ = 2e-3;
  Vec2 origin_{};
  std::set<LatticeIndex> filled_;
};

struct Extents {
  double y_min = 0.0;
  double y_max = 0.0;
  double z_min = 0.0;
  double z_max = 0.0;

  double height() const { return y_max - y_min; }
  double length() const { return z_max - z_min; }
  bool contains(Vec2 p) const {
    return p.y >= y_min && p.y <= y_max && p.z >= z_min && p.z <= z_max;
  }
};

struct Transducer {
  int id = 1;
  Vec2 position{};  // centre of the aperture plane
  Facing facing = Facing::PlusZ;
  double aperture = 7.112e-3;
};

/// A field sampling location. `aperture == 0` samples a single cell, otherwise
/// the field is averaged across a segment of that width perpendicular to
/// `facing` (a receiving transducer).
struct ProbeSpec {
  std::string id;
  Vec2 position{};
  double aperture = 0.0;
  Facing facing = Facing::PlusZ;
  double path_distance = 0.0;  // distance from transducer 1 along the pathway
  std::string group;           // e.g. "centerline", "outside", "receiver"
};

struct SceneGeometry {
  Extents surface{};
  std::vector<Transducer> transducers;
  std::vector<ProbeSpec> probes;
  std::optional<ProbeSpec> reference;

  const Transducer* transducer(int id) const;
  const ProbeSpec* probe(const std::string& id) const;
  void set_transducer(const Transducer& t);
};

struct Layout {
  std::string id;
  PinGrid grid;
  SceneGeometry scene;
};

enum class JunctionMode { Straight, Turn };

struct StraightKind {};
struct TJunctionKind {
  JunctionMode mode = JunctionMode::Straight;
};
struct CornerKind {
  int k = 4;
};

struct PathwaySpec {
  double width_wc = 10e-3;
  double length = 150e-3;
  int layers = 1;
  std::variant<StraightKind, TJunctionKind, CornerKind> kind = StraightKind{};

  void validate(double pitch) const;
};

struct CornerSpec {
  int k = 4;
  double corner_width_wt = 0.0;
};

/// Placement and scene parameters shared by the presets.
struct PresetOptions {
  double pitch = 2e-3;
  double aperture = 7.112e-3;
  double wall_overhang = 10e-3;  // wall extension beyond each transducer
  double lateral_margin = 20e-3;  // open surface beside the outermost wall
  double arm_length = 45e-3;         // T-junction arms, transducer to junction centre
  double corner_arm_length = 40e-3;  // corner arms, transducer to inner wall line
  double probe_spacing = 10e-3;
  double reference_offset = 5e-3;  // reference probe in front of transducer 1
};

/// Distance from the inner vertex pin to the middle of the chamfered outer
/// wall of corner k (k = 0..8) in a 10 mm (five-pitch) pathway.
double corner_width(int k, double pitch);
CornerSpec corner_spec(int k, double pitch);

Layout preset_straight(double width_wc, double length, int layers,
                       const PresetOptions& opt = {});
Layout preset_tjunction(JunctionMode mode, double width_wc, const PresetOptions& opt = {});
Layout preset_corner(int k, double width_wc, const PresetOptions& opt = {});
Layout build_pathway(const PathwaySpec& spec, const PresetOptions& opt = {});

/// Pins of a preset in a lattice frame local to the preset's anchor pin,
/// plus the scene items expressed relative to the anchor pin centre.
struct PinPattern {
  std::vector<LatticeIndex> pins;
  std::vector<Transducer> transducers;
  std::vector<ProbeSpec> probes;
  std::optional<ProbeSpec> reference;
  int row_min = 0, row_max = 0, col_min = 0, col_max = 0;  // bounding box of pins
  Extents bounds{};  // region the preset needs, relative to the anchor
};

PinPattern pattern_for(const PathwaySpec& spec, const PresetOptions& opt);

/// Moves a pattern into `grid` with its anchor pin at `anchor` and returns
/// the scene items in absolute coordinates. Throws std::out_of_range if any pin
/// falls outside the grid.
SceneGeometry place_pattern(const PinPattern& pattern, PinGrid& grid, LatticeIndex anchor);

/// Per-cell material map of a rasterised layout. Cell (i, j) covers
/// y in [origin.y + i*cell, origin.y + (i+1)*cell), likewise for z.
struct OccupancyMask {
  int rows = 0;
  int cols = 0;
  double cell = 0.0;
  Vec2 origin{};
  std::vector<std::uint8_t> cells;  // 0 dielectric, 1 metal

  std::uint8_t at(int i, int j) const { return cells[static_cast<std::size_t>(i) * cols + j]; }
  std::size_t metal_count() const;
  Vec2 cell_center(int i, int j) const {
    return {origin.y + (i + 0.5) * cell, origin.z + (j + 0.5) * cell};
  }
};

OccupancyMask rasterize(const PinGrid& grid, double cell_size, double cavity_radius,
                        const Extents& extents);
/// Rasterises over the lattice's own footprint (half a pitch beyond the
/// outermost rows and columns).
OccupancyMask rasterize(const PinGrid& grid, double cell_size, double cavity_radius);

Extents lattice_extents(const PinGrid& grid);

/// Binary PGM (P5), one byte per cell: 0 dielectric, 255 metal. Row 0 of the
/// image is the highest y.
void write_pgm(const OccupancyMask& mask, const std::filesystem::path& path);

}  // namespace surfwave

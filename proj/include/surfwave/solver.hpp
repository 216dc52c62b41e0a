#pragma once

// Two-dimensional time-domain solver for the bound surface wave. The mode is
// collapsed onto the surface plane as a scalar field E (normal to the surface)
// in a medium of index n_eff, with in-plane magnetic components Hy and Hz on a
// staggered Yee grid. Rows run along y, columns along z.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "surfwave/analysis.hpp"
#include "surfwave/layout.hpp"
#include "surfwave/surface.hpp"

namespace surfwave {

enum class MetalMode { Pec, Lossy };

struct SolverConfig {
  double cell_size = 0.1e-3;
  double courant_factor = 0.7000357133746822;  // 0.99 / sqrt(2)
  int pml_cells = 10;
  double pml_reflection = 1e-6;
  double pml_order = 2.0;
  double pulse_center_f = 26e9;
  double pulse_bandwidth = 17e9;  // spectral half-width at -20 dB
  double run_time = 0.0;          // s; 0 runs until the energy criterion
  std::vector<double> dft_frequencies;  // Hz; empty selects default_frequencies()
  double confinement_kappa = 0.553;  // fitted to the measured 26 GHz straight-pathway decay
  double energy_threshold = 1e-5;
  int energy_check_interval = 50;
  std::size_t max_steps = 0;  // 0 picks a bound from the domain size
  MetalMode metal_mode = MetalMode::Pec;
  int workers = 1;  // row bands; 0 uses the hardware concurrency
  double source_amplitude = 1.0;
  std::vector<double> snapshot_frequencies;  // Hz; full-field transforms
  int snapshot_stride = 4;
  /// Accumulate the reference transform only until the source pulse has passed
  /// the reference probe, so returns from the layout do not enter it.
  bool gate_reference = true;
  /// Back the source line with a second, inverted and delayed line one cell
  /// behind it, which cancels the wave launched away from the facing direction.
  bool directional_source = true;

  /// 21 to 42 GHz in 0.25 GHz steps.
  static std::vector<double> default_frequencies();
  const std::vector<double>& frequencies() const;
  void validate(const SurfaceConfig& surface) const;
  double time_step() const;

 private:
  mutable std::vector<double> resolved_;
};

/// Source excitation g(t) = exp(-(t - t0)^2 / tau^2) sin(2 pi fc t).
struct Pulse {
  double fc = 26e9;
  double tau = 0.0;
  double t0 = 0.0;

  static Pulse from(const SolverConfig& cfg);
  double operator()(double t) const;
  double end_time() const { return t0 + 5.0 * tau; }
};

/// Cells along a transducer aperture or probe segment.
struct CellSegment {
  std::vector<std::size_t> cells;  // linear indices row * cols + col
};

struct ProbeRecord {
  ProbeSpec spec;
  CellSegment segment;
  std::vector<std::complex<double>> spectrum;  // one accumulator per dft frequency
};

struct SnapshotField {
  double frequency = 0.0;
  int rows = 0;
  int cols = 0;
  std::vector<std::complex<double>> values;

  std::vector<double> magnitude() const;
};

/// Field arrays, material maps and update coefficients. E lives at cell
/// centres; Hz at (i + 1/2, j) and Hy at (i, j + 1/2).
class FieldState {
 public:
  int rows = 0;
  int cols = 0;
  double dx = 0.0;
  double dt = 0.0;
  Vec2 origin{};  // (y, z) of the lower corner of cell (0, 0)
  int pml = 0;
  double eps_r = 1.0;     // n_eff^2
  double sigma = 0.0;     // equivalent conductivity of the medium
  double n_eff = 1.0;
  std::uint64_t step_index = 0;

  std::vector<double> E;
  std::vector<double> Hz;  // (rows - 1) x cols
  std::vector<double> Hy;  // rows x (cols - 1)
  std::vector<double> exy, exz;  // split parts, meaningful only in PML cells
  std::vector<std::uint8_t> material;  // 0 dielectric, 1 PEC, 2 lossy metal
  std::vector<std::vector<int>> metal_cols;  // per row, columns of material 1 or 2

  // Unsplit update coefficient per material id.
  double ca[3] = {1.0, 0.0, 0.0};
  double cb[3] = {0.0, 0.0, 0.0};
  // Split-field coefficients per material id and row / column.
  std::vector<double> ca_y[3], cb_y[3], ca_z[3], cb_z[3];
  std::vector<double> hz_a, hz_b;  // per row, Hz at i + 1/2
  std::vector<double> hy_a, hy_b;  // per column, Hy at j + 1/2

  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) * cols + j; }
  bool in_pml(int i, int j) const {
    return i < pml || i >= rows - pml || j < pml || j >= cols - pml;
  }
  Vec2 cell_center(int i, int j) const {
    return {origin.y + (i + 0.5) * dx, origin.z + (j + 0.5) * dx};
  }
  /// Cell containing point p; throws if outside the domain.
  std::pair<int, int> locate(Vec2 p) const;
  Extents extents() const;

  /// 1/2 sum(eps E^2 + mu H^2) for the stored (staggered) fields.
  double field_energy() const;
  /// Quadratic invariant of the lossless leapfrog scheme at integer time:
  /// 1/2 sum(eps E^n^2 + mu H^(n-1/2) H^(n+1/2)), with H^(n+1/2) formed on the fly.
  double discrete_energy() const;
  /// Per-row partial sums of field_energy, summed serially.
  std::vector<double> row_energy() const;
};

struct SceneOptions {
  int source_id = 1;
};

/// Rasterises the layout into the solver grid. The domain is the scene surface
/// extents widened by the PML thickness on every side.
FieldState build_scene(const PinGrid& grid, const SceneGeometry& scene,
                       const SurfaceConfig& surface, const SolverConfig& cfg);

/// Aperture segment of a transducer, perpendicular to its facing direction.
CellSegment aperture_cells(const FieldState& state, Vec2 center, Facing facing, double width);

/// Soft line source: adds amplitude * g(t) to every aperture cell.
void inject_source(FieldState& state, const CellSegment& aperture, double value);

/// One leapfrog update (H then E) on a single thread. Rows are swept once with
/// the H and E updates interleaved, which gives the same values as two passes.
void step(FieldState& state);

/// `levels` steps in one sweep over the rows: step l + 1 trails step l by one
/// row, so each row is fetched from memory once per call. `after_row(l, i)`
/// runs once row i holds step l + 1 and before anything reads that row again;
/// it may add to E in row i. The arithmetic is that of `step`.
void advance(FieldState& state, int levels, const std::function<void(int, int)>& after_row);

void update_h_rows(FieldState& s, int row_begin, int row_end);
void update_e_rows(FieldState& s, int row_begin, int row_end);

struct RunResult {
  std::string layout_id;
  std::vector<double> frequencies;
  std::vector<ProbeRecord> probes;
  ProbeRecord reference;
  std::vector<SnapshotField> snapshots;
  std::uint64_t steps = 0;
  int grid_rows = 0, grid_cols = 0;
  double dt = 0.0;
  double n_eff = 0.0;
  double sigma_eq = 0.0;
  double peak_energy = 0.0;
  double final_energy = 0.0;
  bool converged = true;  // false when max_steps stopped the run
  std::string warning;
  double wall_seconds = 0.0;

  const ProbeRecord& probe(const std::string& id) const;
  bool has_probe(const std::string& id) const;
};

/// Runs the layout from its source transducer until the energy criterion
/// holds, recording every probe of the scene plus the reference probe.
/// Transducers other than the source get an aperture receiver "rx<id>" unless
/// the scene already has one.
RunResult run(const Layout& layout, const SurfaceConfig& surface, const SolverConfig& cfg,
              const SceneOptions& opt = {});

/// 20 log10(|probe| / |reference|) per frequency. Frequencies where the
/// reference has underflowed are marked invalid.
TransmissionCurve transmission(const ProbeRecord& probe, const ProbeRecord& reference,
                               const std::vector<double>& frequencies);
TransmissionCurve transmission(const RunResult& result, const std::string& probe_id);

/// probe_id,y_mm,z_mm,freq_ghz,re,im,mag_db (mag_db relative to the reference).
std::string spectra_csv(const RunResult& result);
void write_spectra_csv(const RunResult& result, const std::filesystem::path& path);

/// Log-scaled |E| image (60 dB range), row 0 of the image is the highest y.
void write_snapshot_pgm(const SnapshotField& snap, const std::filesystem::path& path);
/// "SWF1", rows, cols, reserved (u32 little-endian) then rows*cols float64 |E|.
void write_snapshot_binary(const SnapshotField& snap, const std::filesystem::path& path);
SnapshotField read_snapshot_binary(const std::filesystem::path& path);

}  // namespace surfwave

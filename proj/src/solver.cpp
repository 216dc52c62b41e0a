#include "surfwave/solver.hpp"

#include <algorithm>
#include <barrier>
#include <bit>
#include <chrono>
#include <cmath>
#include <cstring>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "surfwave/io.hpp"

namespace surfwave {

namespace {

using C = PhysicalConstants;

double mat_sigma(double medium_sigma, std::uint8_t m, double metal_cell_sigma) {
  if (m == 1) return std::numeric_limits<double>::infinity();
  if (m == 2) return medium_sigma + metal_cell_sigma;
  return medium_sigma;
}

// Exponential time-stepping coefficients for eps dE/dt + sigma E = curl / dx.
void e_coeffs(double sigma, double eps, double dt, double dx, double& a, double& b) {
  if (std::isinf(sigma)) {
    a = b = 0.0;
  } else if (sigma > 0.0) {
    a = std::exp(-sigma * dt / eps);
    b = (1.0 - a) / (sigma * dx);
  } else {
    a = 1.0;
    b = dt / (eps * dx);
  }
}

// Magnetic counterpart with matched conductivity sigma* = sigma mu0 / eps.
void h_coeffs(double sigma, double eps, double dt, double dx, double& a, double& b) {
  if (sigma > 0.0) {
    const double sigma_m = sigma * C::mu0 / eps;
    a = std::exp(-sigma * dt / eps);
    b = (1.0 - a) / (sigma_m * dx);
  } else {
    a = 1.0;
    b = dt / (C::mu0 * dx);
  }
}

// Graded PML conductivity at a position measured in cell-edge units
// (0 .. n) for an axis with n cells and p absorbing cells on each side.
double pml_sigma(double pos, int n, int p, double sigma_max, double order) {
  double depth = 0.0;
  if (pos < p) {
    depth = p - pos;
  } else if (pos > n - p) {
    depth = pos - (n - p);
  }
  if (depth <= 0.0) return 0.0;
  return sigma_max * std::pow(std::min(depth, static_cast<double>(p)) / p, order);
}

}  // namespace

std::vector<double> SolverConfig::default_frequencies() {
  std::vector<double> f;
  for (int k = 0; k <= 84; ++k) {
    f.push_back(21e9 + 0.25e9 * k);
  }
  return f;
}

const std::vector<double>& SolverConfig::frequencies() const {
  if (!dft_frequencies.empty()) return dft_frequencies;
  if (resolved_.empty()) resolved_ = default_frequencies();
  return resolved_;
}

double SolverConfig::time_step() const { return courant_factor * cell_size / C::c0; }

void SolverConfig::validate(const SurfaceConfig& surface) const {
  if (!(cell_size > 0.0)) throw std::invalid_argument("cell_size must be positive");
  if (!(courant_factor > 0.0) || courant_factor > 0.99 / std::sqrt(2.0) + 1e-12) {
    throw std::invalid_argument("courant_factor must lie in (0, 0.99/sqrt(2)]");
  }
  if (pml_cells < 8) throw std::invalid_argument("pml_cells must be at least 8");
  if (!(pml_reflection > 0.0 && pml_reflection < 1.0)) {
    throw std::invalid_argument("pml_reflection must lie in (0, 1)");
  }
  if (!(pulse_center_f > 0.0) || !(pulse_bandwidth > 0.0)) {
    throw std::invalid_argument("pulse frequency and bandwidth must be positive");
  }
  if (confinement_kappa < 0.0) throw std::invalid_argument("confinement_kappa must be >= 0");
  if (energy_check_interval < 1) throw std::invalid_argument("energy_check_interval must be >= 1");
  if (snapshot_stride < 1) throw std::invalid_argument("snapshot_stride must be >= 1");
  const auto& f = frequencies();
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (!(f[i] > 0.0) || (i > 0 && !(f[i] > f[i - 1]))) {
      throw std::invalid_argument("dft frequencies must be positive and strictly increasing");
    }
  }
  const double f_max = f.empty() ? pulse_center_f : f.back();
  const double n_max = surface.mode(f_max).n_eff;
  const double lambda_min = C::c0 / (f_max * n_max);
  if (cell_size > lambda_min / 15.0 * (1.0 + 1e-9)) {
    std::ostringstream msg;
    msg << "cell_size " << cell_size * 1e3 << " mm exceeds lambda_min/15 = "
        << lambda_min / 15.0 * 1e3 << " mm at " << f_max * 1e-9 << " GHz";
    throw std::invalid_argument(msg.str());
  }
}

Pulse Pulse::from(const SolverConfig& cfg) {
  Pulse p;
  p.fc = cfg.pulse_center_f;
  p.tau = std::sqrt(std::log(10.0)) / (kPi * cfg.pulse_bandwidth);
  p.t0 = 4.0 * p.tau;
  return p;
}

double Pulse::operator()(double t) const {
  const double u = (t - t0) / tau;
  return std::exp(-u * u) * std::sin(2.0 * kPi * fc * t);
}

std::vector<double> SnapshotField::magnitude() const {
  std::vector<double> m(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) m[i] = std::abs(values[i]);
  return m;
}

std::pair<int, int> FieldState::locate(Vec2 p) const {
  const double fi = std::floor((p.y - origin.y) / dx + 1e-9);
  const double fj = std::floor((p.z - origin.z) / dx + 1e-9);
  if (fi < 0 || fj < 0 || fi >= rows || fj >= cols) {
    std::ostringstream msg;
    msg << "point (" << p.y * 1e3 << " mm, " << p.z * 1e3 << " mm) lies outside the domain";
    throw std::out_of_range(msg.str());
  }
  return {static_cast<int>(fi), static_cast<int>(fj)};
}

Extents FieldState::extents() const {
  return {origin.y, origin.y + rows * dx, origin.z, origin.z + cols * dx};
}

std::vector<double> FieldState::row_energy() const {
  const double eps = C::eps0 * eps_r;
  std::vector<double> out(rows, 0.0);
  for (int i = 0; i < rows; ++i) {
    double acc = 0.0;
    const double* e = &E[index(i, 0)];
    for (int j = 0; j < cols; ++j) acc += eps * e[j] * e[j];
    if (i < rows - 1) {
      const double* hz = &Hz[static_cast<std::size_t>(i) * cols];
      for (int j = 0; j < cols; ++j) acc += C::mu0 * hz[j] * hz[j];
    }
    const double* hy = &Hy[static_cast<std::size_t>(i) * (cols - 1)];
    for (int j = 0; j < cols - 1; ++j) acc += C::mu0 * hy[j] * hy[j];
    out[i] = 0.5 * acc * dx * dx;
  }
  return out;
}

double FieldState::field_energy() const {
  double total = 0.0;
  for (double r : row_energy()) total += r;
  return total;
}

double FieldState::discrete_energy() const {
  const double eps = C::eps0 * eps_r;
  double total = 0.0;
  for (int i = 0; i < rows; ++i) {
    double acc = 0.0;
    for (int j = 0; j < cols; ++j) {
      const double e = E[index(i, j)];
      acc += eps * e * e;
    }
    if (i < rows - 1) {
      for (int j = 0; j < cols; ++j) {
        const std::size_t k = static_cast<std::size_t>(i) * cols + j;
        const double next = hz_a[i] * Hz[k] + hz_b[i] * (E[index(i + 1, j)] - E[index(i, j)]);
        acc += C::mu0 * Hz[k] * next;
      }
    }
    for (int j = 0; j < cols - 1; ++j) {
      const std::size_t k = static_cast<std::size_t>(i) * (cols - 1) + j;
      const double next = hy_a[j] * Hy[k] - hy_b[j] * (E[index(i, j + 1)] - E[index(i, j)]);
      acc += C::mu0 * Hy[k] * next;
    }
    total += 0.5 * acc * dx * dx;
  }
  return total;
}

FieldState build_scene(const PinGrid& grid, const SceneGeometry& scene,
                       const SurfaceConfig& surface, const SolverConfig& cfg) {
  FieldState s;
  const double dx = cfg.cell_size;
  const double fc = cfg.pulse_center_f;
  const SurfaceWaveSolution mode = surface.mode(fc);
  const LossRate loss =
      equivalent_loss_rate(fc, mode.n_eff, surface.dielectric.tan_delta, cfg.confinement_kappa);
  s.dx = dx;
  s.dt = cfg.time_step();
  s.pml = cfg.pml_cells;
  s.n_eff = mode.n_eff;
  s.eps_r = mode.n_eff * mode.n_eff;
  s.sigma = loss.sigma_eq;

  Extents ext = scene.surface;
  if (!(ext.height() > 0.0) || !(ext.length() > 0.0)) {
    ext = lattice_extents(grid);
  }
  // Align cell edges with the pin lattice so pin centres fall on cell corners.
  const Vec2 g = grid.origin();
  const int P = cfg.pml_cells;
  const double y_lo = g.y + std::floor((ext.y_min - g.y) / dx + 1e-9) * dx;
  const double z_lo = g.z + std::floor((ext.z_min - g.z) / dx + 1e-9) * dx;
  const int inner_rows = static_cast<int>(std::ceil((ext.y_max - y_lo) / dx - 1e-9));
  const int inner_cols = static_cast<int>(std::ceil((ext.z_max - z_lo) / dx - 1e-9));
  s.rows = inner_rows + 2 * P;
  s.cols = inner_cols + 2 * P;
  s.origin = {y_lo - P * dx, z_lo - P * dx};
  if (inner_rows < 8 || inner_cols < 8) {
    throw std::invalid_argument("domain too small for the absorbing layer and geometry");
  }

  const OccupancyMask mask =
      rasterize(grid, dx, surface.cavities.cavity_radius_r, s.extents());
  if (mask.rows != s.rows || mask.cols != s.cols) {
    throw std::logic_error("rasterised mask does not match the solver grid");
  }
  s.material = mask.cells;

  double metal_cell_sigma = 0.0;
  if (cfg.metal_mode == MetalMode::Lossy && !surface.pin_metal.is_pec()) {
    // Pin cells that touch dielectric carry the surface resistance of the
    // metal spread over one cell: sigma_cell = 1 / (Rs dx).
    const double delta = skin_depth(fc, surface.pin_metal);
    const double rs = 1.0 / (surface.pin_metal.sigma * delta);
    metal_cell_sigma = 1.0 / (rs * dx);
    std::vector<std::uint8_t> m = s.material;
    for (int i = 0; i < s.rows; ++i) {
      for (int j = 0; j < s.cols; ++j) {
        if (s.material[s.index(i, j)] != 1) continue;
        bool edge = false;
        for (auto [di, dj] : {std::pair{-1, 0}, {1, 0}, {0, -1}, {0, 1}}) {
          const int a = i + di, b = j + dj;
          if (a >= 0 && a < s.rows && b >= 0 && b < s.cols && s.material[s.index(a, b)] == 0) {
            edge = true;
          }
        }
        if (edge) m[s.index(i, j)] = 2;
      }
    }
    s.material = std::move(m);
  }
  s.metal_cols.assign(s.rows, {});
  for (int i = 0; i < s.rows; ++i) {
    for (int j = 0; j < s.cols; ++j) {
      if (s.material[s.index(i, j)] != 0) s.metal_cols[i].push_back(j);
    }
  }

  const std::size_t n = static_cast<std::size_t>(s.rows) * s.cols;
  s.E.assign(n, 0.0);
  s.exy.assign(n, 0.0);
  s.exz.assign(n, 0.0);
  s.Hz.assign(static_cast<std::size_t>(s.rows - 1) * s.cols, 0.0);
  s.Hy.assign(static_cast<std::size_t>(s.rows) * (s.cols - 1), 0.0);

  const double eps = C::eps0 * s.eps_r;
  const double eta = C::eta0 / s.n_eff;
  const double thickness = P * dx;
  const double sigma_max =
      -(cfg.pml_order + 1.0) * std::log(cfg.pml_reflection) / (2.0 * eta * thickness);

  for (std::uint8_t m = 0; m < 3; ++m) {
    e_coeffs(mat_sigma(s.sigma, m, metal_cell_sigma), eps, s.dt, dx, s.ca[m], s.cb[m]);
    s.ca_y[m].resize(s.rows);
    s.cb_y[m].resize(s.rows);
    s.ca_z[m].resize(s.cols);
    s.cb_z[m].resize(s.cols);
    for (int i = 0; i < s.rows; ++i) {
      const double sp = pml_sigma(i + 0.5, s.rows, P, sigma_max, cfg.pml_order);
      e_coeffs(sp + mat_sigma(s.sigma, m, metal_cell_sigma), eps, s.dt, dx, s.ca_y[m][i],
               s.cb_y[m][i]);
    }
    for (int j = 0; j < s.cols; ++j) {
      const double sp = pml_sigma(j + 0.5, s.cols, P, sigma_max, cfg.pml_order);
      e_coeffs(sp + mat_sigma(s.sigma, m, metal_cell_sigma), eps, s.dt, dx, s.ca_z[m][j],
               s.cb_z[m][j]);
    }
  }
  s.hz_a.resize(s.rows - 1);
  s.hz_b.resize(s.rows - 1);
  for (int i = 0; i < s.rows - 1; ++i) {
    h_coeffs(pml_sigma(i + 1.0, s.rows, P, sigma_max, cfg.pml_order), eps, s.dt, dx, s.hz_a[i],
             s.hz_b[i]);
  }
  s.hy_a.resize(s.cols - 1);
  s.hy_b.resize(s.cols - 1);
  for (int j = 0; j < s.cols - 1; ++j) {
    h_coeffs(pml_sigma(j + 1.0, s.cols, P, sigma_max, cfg.pml_order), eps, s.dt, dx, s.hy_a[j],
             s.hy_b[j]);
  }
  return s;
}

CellSegment aperture_cells(const FieldState& state, Vec2 center, Facing facing, double width) {
  CellSegment seg;
  const auto [ci, cj] = state.locate(center);
  const bool along_y = facing == Facing::PlusZ || facing == Facing::MinusZ;
  const double half = 0.5 * width + 1e-12;
  if (along_y) {
    for (int i = 0; i < state.rows; ++i) {
      if (std::abs(state.cell_center(i, cj).y - center.y) <= half &&
          state.material[state.index(i, cj)] == 0) {
        seg.cells.push_back(state.index(i, cj));
      }
    }
  } else {
    for (int j = 0; j < state.cols; ++j) {
      if (std::abs(state.cell_center(ci, j).z - center.z) <= half &&
          state.material[state.index(ci, j)] == 0) {
        seg.cells.push_back(state.index(ci, j));
      }
    }
  }
  return seg;
}

void inject_source(FieldState& state, const CellSegment& aperture, double value) {
  for (std::size_t k : aperture.cells) {
    state.E[k] += value;
  }
}

void update_h_rows(FieldState& s, int row_begin, int row_end) {
  const int cols = s.cols;
  for (int i = row_begin; i < row_end; ++i) {
    const double* __restrict e0 = &s.E[s.index(i, 0)];
    if (i < s.rows - 1) {
      const double* __restrict e1 = e0 + cols;
      double* __restrict hz = &s.Hz[static_cast<std::size_t>(i) * cols];
      const double a = s.hz_a[i], b = s.hz_b[i];
      for (int j = 0; j < cols; ++j) {
        hz[j] = a * hz[j] + b * (e1[j] - e0[j]);
      }
    }
    double* __restrict hy = &s.Hy[static_cast<std::size_t>(i) * (cols - 1)];
    const double* __restrict ha = s.hy_a.data();
    const double* __restrict hb = s.hy_b.data();
    for (int j = 0; j < cols - 1; ++j) {
      hy[j] = ha[j] * hy[j] - hb[j] * (e0[j + 1] - e0[j]);
    }
  }
}

namespace {

// Split-field update of columns [j0, j1) in row i.
inline void split_cells(FieldState& s, int i, int j0, int j1) {
  const int cols = s.cols;
  const std::uint8_t* mat = &s.material[s.index(i, 0)];
  const double* hz1 = &s.Hz[static_cast<std::size_t>(i) * cols];
  const double* hz0 = hz1 - cols;
  const double* hy = &s.Hy[static_cast<std::size_t>(i) * (cols - 1)];
  double* exy = &s.exy[s.index(i, 0)];
  double* exz = &s.exz[s.index(i, 0)];
  double* e = &s.E[s.index(i, 0)];
  for (int j = j0; j < j1; ++j) {
    const std::uint8_t m = mat[j];
    exy[j] = s.ca_y[m][i] * exy[j] + s.cb_y[m][i] * (hz1[j] - hz0[j]);
    exz[j] = s.ca_z[m][j] * exz[j] - s.cb_z[m][j] * (hy[j] - hy[j - 1]);
    e[j] = exy[j] + exz[j];
  }
}

}  // namespace

void update_e_rows(FieldState& s, int row_begin, int row_end) {
  const int cols = s.cols;
  const int P = s.pml;
  const int lo = std::max(1, row_begin);
  const int hi = std::min(s.rows - 1, row_end);
  for (int i = lo; i < hi; ++i) {
    if (i < P || i >= s.rows - P) {
      split_cells(s, i, 1, cols - 1);
      continue;
    }
    split_cells(s, i, 1, P);
    double* __restrict e = &s.E[s.index(i, 0)];
    const double* __restrict hz1 = &s.Hz[static_cast<std::size_t>(i) * cols];
    const double* __restrict hz0 = hz1 - cols;
    const double* __restrict hy = &s.Hy[static_cast<std::size_t>(i) * (cols - 1)];
    const std::uint8_t* mat = &s.material[s.index(i, 0)];
    // Metal cells are updated aside so that the main loop stays uniform.
    const auto& mc = s.metal_cols[i];
    double metal[64];
    std::vector<double> metal_heap;
    double* mv = metal;
    if (mc.size() > 64) {
      metal_heap.resize(mc.size());
      mv = metal_heap.data();
    }
    for (std::size_t k = 0; k < mc.size(); ++k) {
      const int j = mc[k];
      const std::uint8_t m = mat[j];
      mv[k] = s.ca[m] * e[j] + s.cb[m] * ((hz1[j] - hz0[j]) - (hy[j] - hy[j - 1]));
    }
    const double a = s.ca[0], b = s.cb[0];
    for (int j = P; j < cols - P; ++j) {
      const double curl = (hz1[j] - hz0[j]) - (hy[j] - hy[j - 1]);
      e[j] = a * e[j] + b * curl;
    }
    for (std::size_t k = 0; k < mc.size(); ++k) {
      if (mc[k] >= P && mc[k] < cols - P) e[mc[k]] = mv[k];
    }
    split_cells(s, i, cols - P, cols - 1);
  }
}

namespace {

// Both half steps of row i in one pass over the interior columns, giving
// the values of update_h_rows then update_e_rows on that row.
void update_row(FieldState& s, int i) {
  const int cols = s.cols;
  const int P = s.pml;
  double* __restrict e = &s.E[s.index(i, 0)];
  double* __restrict hy = &s.Hy[static_cast<std::size_t>(i) * (cols - 1)];
  const double* __restrict ha = s.hy_a.data();
  const double* __restrict hb = s.hy_b.data();
  // Interior Hy coefficients are exactly (1, hb[P]).
  const double hbi = hb[P];
  for (int j = 0; j < P; ++j) hy[j] = ha[j] * hy[j] - hb[j] * (e[j + 1] - e[j]);
  for (int j = P; j < cols - 1 - P; ++j) hy[j] = hy[j] - hbi * (e[j + 1] - e[j]);
  for (int j = cols - 1 - P; j < cols - 1; ++j) hy[j] = ha[j] * hy[j] - hb[j] * (e[j + 1] - e[j]);
  if (i == s.rows - 1) return;

  double* __restrict hz1 = &s.Hz[static_cast<std::size_t>(i) * cols];
  const double* __restrict e1 = e + cols;
  const double a = s.hz_a[i], b = s.hz_b[i];
  if (i == 0 || i < P || i >= s.rows - P) {
    for (int j = 0; j < cols; ++j) hz1[j] = a * hz1[j] + b * (e1[j] - e[j]);
    if (i > 0) split_cells(s, i, 1, cols - 1);
    return;
  }
  for (int j = 0; j < P; ++j) hz1[j] = a * hz1[j] + b * (e1[j] - e[j]);
  for (int j = cols - P; j < cols; ++j) hz1[j] = a * hz1[j] + b * (e1[j] - e[j]);

  const double* __restrict hz0 = hz1 - cols;
  const auto& mc = s.metal_cols[i];
  double saved[64];
  std::vector<double> saved_heap;
  double* old = saved;
  if (mc.size() > 64) {
    saved_heap.resize(mc.size());
    old = saved_heap.data();
  }
  for (std::size_t k = 0; k < mc.size(); ++k) old[k] = e[mc[k]];
  const double ca = s.ca[0], cb = s.cb[0];
  for (int j = P; j < cols - P; ++j) {
    hz1[j] = a * hz1[j] + b * (e1[j] - e[j]);
    const double curl = (hz1[j] - hz0[j]) - (hy[j] - hy[j - 1]);
    e[j] = ca * e[j] + cb * curl;
  }
  const std::uint8_t* mat = &s.material[s.index(i, 0)];
  for (std::size_t k = 0; k < mc.size(); ++k) {
    const int j = mc[k];
    if (j < P || j >= cols - P) continue;
    const std::uint8_t m = mat[j];
    e[j] = s.ca[m] * old[k] + s.cb[m] * ((hz1[j] - hz0[j]) - (hy[j] - hy[j - 1]));
  }
  split_cells(s, i, 1, P);
  split_cells(s, i, cols - P, cols - 1);
}

}  // namespace

void step(FieldState& state) {
  // E row i needs Hz rows i-1 and i and Hy row i; Hz row i needs E rows i and
  // i+1 before their update. Sweeping rows in order satisfies both.
  for (int i = 0; i < state.rows; ++i) update_row(state, i);
  ++state.step_index;
}

void advance(FieldState& state, int levels, const std::function<void(int, int)>& after_row) {
  for (int r = 0; r < state.rows + levels - 1; ++r) {
    for (int l = 0; l < levels; ++l) {
      const int i = r - l;
      if (i < 0 || i >= state.rows) continue;
      update_row(state, i);
      if (after_row) after_row(l, i);
    }
  }
  state.step_index += static_cast<std::uint64_t>(levels);
}

namespace {

// Row-band workers synchronised by a barrier; the calling thread owns band 0.
class BandStepper {
 public:
  BandStepper(FieldState& s, int workers)
      : s_(s), n_(std::max(1, std::min(workers, s.rows / 4))), sync_(n_) {
    for (int b = 0; b <= n_; ++b) {
      bounds_.push_back(static_cast<int>(static_cast<long long>(s.rows) * b / n_));
    }
    for (int b = 1; b < n_; ++b) {
      threads_.emplace_back([this, b] { worker(b); });
    }
  }
  BandStepper(const BandStepper&) = delete;
  BandStepper& operator=(const BandStepper&) = delete;

  ~BandStepper() {
    if (n_ > 1) {
      stop_ = true;
      sync_.arrive_and_wait();
    }
    for (auto& t : threads_) t.join();
  }

  void step() {
    if (n_ == 1) {
      surfwave::step(s_);
      return;
    }
    sync_.arrive_and_wait();
    band(0);
    ++s_.step_index;
  }

 private:
  void band(int b) {
    update_h_rows(s_, bounds_[b], bounds_[b + 1]);
    sync_.arrive_and_wait();
    update_e_rows(s_, bounds_[b], bounds_[b + 1]);
    sync_.arrive_and_wait();
  }

  void worker(int b) {
    for (;;) {
      sync_.arrive_and_wait();
      if (stop_) return;
      band(b);
    }
  }

  FieldState& s_;
  int n_;
  std::barrier<> sync_;
  std::vector<int> bounds_;
  std::vector<std::thread> threads_;
  bool stop_ = false;
};

struct Accumulator {
  std::vector<std::complex<double>> phase;  // exp(-j 2 pi f t) at the next sample
  std::vector<std::complex<double>> rot;    // per-sample rotation
  std::vector<double> freq;
  double dt = 0.0;

  void init(const std::vector<double>& f, double t_first, double sample_dt) {
    freq = f;
    dt = sample_dt;
    phase.resize(f.size());
    rot.resize(f.size());
    for (std::size_t k = 0; k < f.size(); ++k) {
      rot[k] = std::polar(1.0, -2.0 * kPi * f[k] * sample_dt);
    }
    resync(t_first);
  }
  void resync(double t) {
    for (std::size_t k = 0; k < freq.size(); ++k) {
      phase[k] = std::polar(1.0, -2.0 * kPi * freq[k] * t);
    }
  }
  void advance() {
    for (std::size_t k = 0; k < freq.size(); ++k) phase[k] *= rot[k];
  }
};

ProbeRecord make_probe(const FieldState& s, const ProbeSpec& spec, std::size_t nfreq) {
  ProbeRecord rec;
  rec.spec = spec;
  const auto [i, j] = s.locate(spec.position);
  if (s.in_pml(i, j)) {
    throw std::invalid_argument("probe '" + spec.id + "' lies inside the absorbing layer");
  }
  if (spec.aperture > 0.0) {
    rec.segment = aperture_cells(s, spec.position, spec.facing, spec.aperture);
    for (std::size_t k : rec.segment.cells) {
      const int a = static_cast<int>(k / s.cols), b = static_cast<int>(k % s.cols);
      if (s.in_pml(a, b)) {
        throw std::invalid_argument("probe '" + spec.id + "' reaches into the absorbing layer");
      }
    }
  } else {
    rec.segment.cells.push_back(s.index(i, j));
  }
  rec.spectrum.assign(nfreq, {0.0, 0.0});
  return rec;
}

}  // namespace

const ProbeRecord& RunResult::probe(const std::string& id) const {
  if (id == reference.spec.id) return reference;
  for (const auto& p : probes) {
    if (p.spec.id == id) return p;
  }
  throw std::out_of_range("no probe '" + id + "' in run result");
}

bool RunResult::has_probe(const std::string& id) const {
  if (id == reference.spec.id) return true;
  return std::any_of(probes.begin(), probes.end(),
                     [&](const ProbeRecord& p) { return p.spec.id == id; });
}

RunResult run(const Layout& layout, const SurfaceConfig& surface, const SolverConfig& cfg,
              const SceneOptions& opt) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate(surface);
  FieldState s = build_scene(layout.grid, layout.scene, surface, cfg);
  const std::vector<double>& freqs = cfg.frequencies();

  const Transducer* src = layout.scene.transducer(opt.source_id);
  if (!src) {
    throw std::invalid_argument("layout has no transducer " + std::to_string(opt.source_id));
  }
  {
    const auto [i, j] = s.locate(src->position);
    if (s.in_pml(i, j)) throw std::invalid_argument("source lies inside the absorbing layer");
  }
  const CellSegment source = aperture_cells(s, src->position, src->facing, src->aperture);
  if (source.cells.empty()) throw std::invalid_argument("source aperture covers no open cells");
  CellSegment backing;
  double backing_delay = 0.0;
  if (cfg.directional_source) {
    const Vec2 u = unit_vector(src->facing);
    backing = aperture_cells(s, {src->position.y - s.dx * u.y, src->position.z - s.dx * u.z},
                             src->facing, src->aperture);
    backing_delay = s.dx * s.n_eff / C::c0;
  }

  RunResult out;
  out.layout_id = layout.id;
  out.frequencies = freqs;
  out.dt = s.dt;
  out.n_eff = s.n_eff;
  out.grid_rows = s.rows;
  out.grid_cols = s.cols;
  out.sigma_eq = s.sigma;

  std::vector<ProbeSpec> specs = layout.scene.probes;
  for (const auto& t : layout.scene.transducers) {
    if (t.id == opt.source_id) continue;
    const std::string id = "rx" + std::to_string(t.id);
    if (std::none_of(specs.begin(), specs.end(), [&](const ProbeSpec& p) { return p.id == id; })) {
      ProbeSpec p;
      p.id = id;
      p.position = t.position;
      p.aperture = t.aperture;
      p.facing = t.facing;
      p.group = "receiver";
      specs.push_back(p);
    }
  }
  ProbeSpec ref_spec;
  if (layout.scene.reference && opt.source_id == 1) {
    ref_spec = *layout.scene.reference;
  } else {
    const Vec2 u = unit_vector(src->facing);
    ref_spec.id = "ref";
    ref_spec.position = {src->position.y + 5e-3 * u.y, src->position.z + 5e-3 * u.z};
    ref_spec.group = "reference";
  }
  out.reference = make_probe(s, ref_spec, freqs.size());
  for (const auto& p : specs) {
    out.probes.push_back(make_probe(s, p, freqs.size()));
  }

  const Pulse pulse = Pulse::from(cfg);
  Accumulator acc;
  acc.init(freqs, s.dt, s.dt);  // first sample is E at t = dt
  Accumulator snap_acc;
  const int stride = cfg.snapshot_stride;
  for (double f : cfg.snapshot_frequencies) {
    SnapshotField snap;
    snap.frequency = f;
    snap.rows = s.rows;
    snap.cols = s.cols;
    snap.values.assign(s.E.size(), {0.0, 0.0});
    out.snapshots.push_back(std::move(snap));
  }
  snap_acc.init(cfg.snapshot_frequencies, stride * s.dt, stride * s.dt);

  const double diag = (s.rows + s.cols) * s.dx;
  const double transit = diag * s.n_eff / C::c0;
  std::uint64_t max_steps = cfg.max_steps;
  bool fixed_time = false;
  if (cfg.run_time > 0.0) {
    max_steps = static_cast<std::uint64_t>(std::ceil(cfg.run_time / s.dt));
    fixed_time = true;
  } else if (max_steps == 0) {
    max_steps = static_cast<std::uint64_t>(std::ceil((pulse.end_time() + 30.0 * transit) / s.dt));
  }
  const std::uint64_t source_steps =
      static_cast<std::uint64_t>(std::ceil((pulse.end_time() + backing_delay) / s.dt));
  std::uint64_t reference_steps = std::numeric_limits<std::uint64_t>::max();
  if (cfg.gate_reference) {
    const double gap = std::hypot(ref_spec.position.y - src->position.y,
                                  ref_spec.position.z - src->position.z);
    reference_steps = static_cast<std::uint64_t>(
        std::ceil((pulse.end_time() + gap * s.n_eff / C::c0) / s.dt));
  }

  int workers = cfg.workers;
  if (workers <= 0) workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  BandStepper stepper(s, workers);

  // Per-row work once a row has been advanced: source cells to drive, then
  // probe cells to sample. Slots follow segment order so the sums match.
  struct Drive {
    std::size_t cell;
    int line;  // 0 source, 1 backing
  };
  struct Tap {
    std::size_t cell, slot;
  };
  std::vector<std::vector<Drive>> drives(s.rows);
  std::vector<std::vector<Tap>> taps(s.rows);
  for (std::size_t k : source.cells) drives[k / s.cols].push_back({k, 0});
  for (std::size_t k : backing.cells) drives[k / s.cols].push_back({k, 1});
  std::vector<const CellSegment*> segments = {&out.reference.segment};
  for (const auto& p : out.probes) segments.push_back(&p.segment);
  std::vector<std::size_t> first_slot;
  std::size_t slots = 0;
  for (const CellSegment* seg : segments) {
    first_slot.push_back(slots);
    for (std::size_t k : seg->cells) taps[k / s.cols].push_back({k, slots++});
  }
  std::vector<int> busy_rows;
  for (int i = 0; i < s.rows; ++i) {
    if (!drives[i].empty() || !taps[i].empty()) busy_rows.push_back(i);
  }

  constexpr int kLevels = 8;
  const int block = workers == 1 ? kLevels : 1;
  std::vector<double> drive(2 * block);
  std::vector<char> driving(block);
  std::vector<double> samples(block * slots);
  const auto after_row = [&](int l, int i) {
    if (driving[l]) {
      for (const Drive& d : drives[i]) s.E[d.cell] += drive[2 * l + d.line];
    }
    for (const Tap& t : taps[i]) samples[l * slots + t.slot] = s.E[t.cell];
  };
  const auto sampled = [&](int l, std::size_t q) {
    const std::size_t count = segments[q]->cells.size();
    if (count == 0) return 0.0;
    const double* v = &samples[l * slots + first_slot[q]];
    double acc = 0.0;
    for (std::size_t c = 0; c < count; ++c) acc += v[c];
    return acc / static_cast<double>(count);
  };

  const auto interval = static_cast<std::uint64_t>(cfg.energy_check_interval);
  std::vector<double> values(out.probes.size());
  double peak = 0.0, energy = 0.0;
  bool done = false;
  out.converged = true;
  std::uint64_t n = 0;
  while (!done) {
    if (n >= max_steps) {
      if (!fixed_time) {
        out.converged = false;
        std::ostringstream msg;
        msg << "energy criterion not met after " << n << " steps (residual "
            << (peak > 0.0 ? energy / peak : 0.0) << " of peak)";
        out.warning = msg.str();
      }
      break;
    }
    // Blocks end on energy checks and snapshot samples.
    std::uint64_t span = std::min<std::uint64_t>(block, max_steps - n);
    span = std::min(span, interval - n % interval);
    if (!out.snapshots.empty()) span = std::min<std::uint64_t>(span, stride - n % stride);
    const int levels = static_cast<int>(span);
    for (int l = 0; l < levels; ++l) {
      const std::uint64_t m = n + l + 1;
      const double t = m * s.dt;
      driving[l] = m <= source_steps;
      drive[2 * l] = cfg.source_amplitude * pulse(t);
      drive[2 * l + 1] = -cfg.source_amplitude * pulse(t - backing_delay);
    }
    if (block > 1) {
      advance(s, levels, after_row);
    } else {
      stepper.step();
      for (int i : busy_rows) after_row(0, i);
    }

    for (int l = 0; l < levels; ++l) {
      ++n;
      const double ref_v = sampled(l, 0);
      for (std::size_t p = 0; p < out.probes.size(); ++p) values[p] = sampled(l, p + 1);
      for (std::size_t k = 0; k < freqs.size(); ++k) {
        const std::complex<double> w = acc.phase[k] * s.dt;
        if (n <= reference_steps) out.reference.spectrum[k] += ref_v * w;
        for (std::size_t p = 0; p < out.probes.size(); ++p) {
          out.probes[p].spectrum[k] += values[p] * w;
        }
      }
      acc.advance();
      if (n % 256 == 0) acc.resync((n + 1) * s.dt);
    }
    const double t = n * s.dt;

    if (!out.snapshots.empty() && n % stride == 0) {
      for (std::size_t k = 0; k < out.snapshots.size(); ++k) {
        const std::complex<double> w = snap_acc.phase[k] * (stride * s.dt);
        auto& vals = out.snapshots[k].values;
        for (std::size_t c = 0; c < vals.size(); ++c) vals[c] += s.E[c] * w;
      }
      snap_acc.advance();
      if ((n / stride) % 256 == 0) snap_acc.resync((n + stride) * s.dt);
    }

    if (n % static_cast<std::uint64_t>(cfg.energy_check_interval) == 0) {
      energy = s.field_energy();
      if (!std::isfinite(energy)) {
        std::ostringstream msg;
        msg << "non-finite field at step " << n << " (t = " << t * 1e12
            << " ps); check the Courant factor and material parameters";
        throw std::runtime_error(msg.str());
      }
      peak = std::max(peak, energy);
      if (!fixed_time && n > source_steps && energy < cfg.energy_threshold * peak) {
        done = true;
      }
    }
  }
  out.steps = n;
  out.peak_energy = peak;
  out.final_energy = s.field_energy();
  if (!std::isfinite(out.final_energy)) {
    throw std::runtime_error("non-finite field at the end of the run");
  }
  out.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
  return out;
}

TransmissionCurve transmission(const ProbeRecord& probe, const ProbeRecord& reference,
                               const std::vector<double>& frequencies) {
  if (probe.spectrum.size() != frequencies.size() ||
      reference.spectrum.size() != frequencies.size()) {
    throw std::invalid_argument("spectrum length does not match the frequency list");
  }
  double ref_max = 0.0;
  for (const auto& r : reference.spectrum) ref_max = std::max(ref_max, std::abs(r));
  TransmissionCurve c;
  c.probe_id = probe.spec.id;
  c.distance = probe.spec.path_distance;
  c.frequencies = frequencies;
  c.s21_db.resize(frequencies.size());
  c.valid.resize(frequencies.size());
  for (std::size_t k = 0; k < frequencies.size(); ++k) {
    const double r = std::abs(reference.spectrum[k]);
    const double p = std::abs(probe.spectrum[k]);
    const bool ok = r > 1e-12 * ref_max && r > 0.0 && p > 0.0;
    c.valid[k] = ok;
    c.s21_db[k] = ok ? 20.0 * std::log10(p / r) : std::numeric_limits<double>::quiet_NaN();
  }
  return c;
}

TransmissionCurve transmission(const RunResult& result, const std::string& probe_id) {
  TransmissionCurve c = transmission(result.probe(probe_id), result.reference, result.frequencies);
  c.layout_id = result.layout_id;
  return c;
}

std::string spectra_csv(const RunResult& result) {
  std::ostringstream out;
  out << "probe_id,y_mm,z_mm,freq_ghz,re,im,mag_db\n";
  auto emit = [&](const ProbeRecord& p) {
    const TransmissionCurve c = transmission(p, result.reference, result.frequencies);
    for (std::size_t k = 0; k < result.frequencies.size(); ++k) {
      out << p.spec.id << ',' << format_double(p.spec.position.y * 1e3) << ','
          << format_double(p.spec.position.z * 1e3) << ','
          << format_double(result.frequencies[k] * 1e-9) << ','
          << format_double(p.spectrum[k].real()) << ',' << format_double(p.spectrum[k].imag())
          << ',' << (c.valid[k] ? format_double(c.s21_db[k]) : std::string("nan")) << '\n';
    }
  };
  emit(result.reference);
  for (const auto& p : result.probes) emit(p);
  return out.str();
}

void write_spectra_csv(const RunResult& result, const std::filesystem::path& path) {
  write_file_atomic(path, spectra_csv(result));
}

void write_snapshot_pgm(const SnapshotField& snap, const std::filesystem::path& path) {
  const std::vector<double> mag = snap.magnitude();
  double peak = 0.0;
  for (double m : mag) peak = std::max(peak, m);
  std::string out =
      "P5\n" + std::to_string(snap.cols) + " " + std::to_string(snap.rows) + "\n255\n";
  for (int i = snap.rows - 1; i >= 0; --i) {
    for (int j = 0; j < snap.cols; ++j) {
      const double m = mag[static_cast<std::size_t>(i) * snap.cols + j];
      double level = 0.0;
      if (peak > 0.0 && m > 0.0) {
        level = 1.0 + 20.0 * std::log10(m / peak) / 60.0;
      }
      out.push_back(static_cast<char>(std::lround(255.0 * std::clamp(level, 0.0, 1.0))));
    }
  }
  write_file_atomic(path, out);
}

namespace {

static_assert(std::endian::native == std::endian::little,
              "snapshot files are written in host byte order");

void put_u32(std::string& out, std::uint32_t v) {
  char b[4];
  std::memcpy(b, &v, 4);
  out.append(b, 4);
}

}  // namespace

void write_snapshot_binary(const SnapshotField& snap, const std::filesystem::path& path) {
  const std::vector<double> mag = snap.magnitude();
  std::string out = "SWF1";
  put_u32(out, static_cast<std::uint32_t>(snap.rows));
  put_u32(out, static_cast<std::uint32_t>(snap.cols));
  put_u32(out, 0);
  const std::size_t bytes = mag.size() * sizeof(double);
  const std::size_t head = out.size();
  out.resize(head + bytes);
  std::memcpy(out.data() + head, mag.data(), bytes);
  write_file_atomic(path, out);
}

SnapshotField read_snapshot_binary(const std::filesystem::path& path) {
  const std::string data = read_file(path);
  if (data.size() < 16 || data.compare(0, 4, "SWF1") != 0) {
    throw std::runtime_error(path.string() + " is not an SWF1 snapshot");
  }
  std::uint32_t rows = 0, cols = 0;
  std::memcpy(&rows, data.data() + 4, 4);
  std::memcpy(&cols, data.data() + 8, 4);
  const std::size_t n = static_cast<std::size_t>(rows) * cols;
  if (data.size() != 16 + n * sizeof(double)) {
    throw std::runtime_error(path.string() + ": snapshot size does not match its header");
  }
  SnapshotField snap;
  snap.rows = static_cast<int>(rows);
  snap.cols = static_cast<int>(cols);
  std::vector<double> mag(n);
  std::memcpy(mag.data(), data.data() + 16, n * sizeof(double));
  snap.values.assign(mag.begin(), mag.end());
  return snap;
}

}  // namespace surfwave

#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>

#include "surfwave/layout.hpp"
#include "surfwave/solver.hpp"

using namespace surfwave;

namespace {

SolverConfig coarse() {
  SolverConfig c;
  c.cell_size = 0.2e-3;
  return c;
}

SceneGeometry open_scene(double height, double length) {
  SceneGeometry s;
  s.surface = {0.0, height, 0.0, length};
  return s;
}

}  // namespace

TEST_CASE("scene construction") {
  SurfaceConfig surface;
  SolverConfig cfg;
  const PinGrid empty(1, 1, 2e-3);
  const FieldState st = build_scene(empty, open_scene(60e-3, 200e-3), surface, cfg);
  CHECK(st.rows - 2 * st.pml == 600);
  CHECK(st.cols - 2 * st.pml == 2000);
  CHECK(st.n_eff == rel(1.185, 1e-3));
  CHECK(st.eps_r == rel(st.n_eff * st.n_eff));
  CHECK(std::count(st.material.begin(), st.material.end(), 0) == static_cast<long>(st.material.size()));
  CHECK(st.E.size() == static_cast<std::size_t>(st.rows) * st.cols);
  CHECK(st.Hz.size() == static_cast<std::size_t>(st.rows - 1) * st.cols);
  CHECK(st.Hy.size() == static_cast<std::size_t>(st.rows) * (st.cols - 1));

  // Pins become enforced metal cells.
  PinGrid pins(3, 3, 2e-3, {10e-3, 10e-3});
  pins.fill(1, 1);
  const FieldState sp = build_scene(pins, open_scene(30e-3, 30e-3), surface, coarse());
  const auto [i, j] = sp.locate(pins.center(1, 1));
  CHECK(sp.material[sp.index(i, j)] == 1);
  const auto& mc = sp.metal_cols[i];
  CHECK(std::find(mc.begin(), mc.end(), j) != mc.end());
  CHECK(std::count(sp.material.begin(), sp.material.end(), 1) > 10);

  CHECK_THROWS_AS(build_scene(empty, open_scene(1e-3, 1e-3), surface, coarse()), std::invalid_argument);
}

TEST_CASE("solver configuration limits") {
  SurfaceConfig surface;
  SolverConfig c;
  CHECK_NOTHROW(c.validate(surface));
  CHECK(c.frequencies().size() == 85);
  c.cell_size = 0.5e-3;
  CHECK_THROWS_AS(c.validate(surface), std::invalid_argument);
  c = SolverConfig{};
  c.courant_factor = 0.9;
  CHECK_THROWS_AS(c.validate(surface), std::invalid_argument);
  c = SolverConfig{};
  c.pml_cells = 6;
  CHECK_THROWS_AS(c.validate(surface), std::invalid_argument);
  c = SolverConfig{};
  c.dft_frequencies = {26e9, 25e9};
  CHECK_THROWS_AS(c.validate(surface), std::invalid_argument);
  CHECK(SolverConfig{}.time_step() == rel(0.99 / std::sqrt(2.0) * 0.1e-3 / PhysicalConstants::c0));
}

TEST_CASE("source pulse") {
  const SolverConfig cfg;
  const Pulse p = Pulse::from(cfg);
  CHECK(p.fc == 26e9);
  CHECK(std::abs(p(0.0)) < 1e-6);
  CHECK(std::abs(p(p.end_time() + 2.0 * p.tau)) < 1e-20);

  // Numerical transform of the pulse: the band edges keep at least 10% of
  // the centre amplitude.
  const double dt = 1e-13;
  auto spectrum = [&](double f) {
    std::complex<double> acc;
    for (double t = 0.0; t < p.end_time() + 5.0 * p.tau; t += dt) {
      acc += p(t) * std::exp(std::complex<double>(0.0, -2.0 * kPi * f * t)) * dt;
    }
    return std::abs(acc);
  };
  const double centre = spectrum(26e9);
  CHECK(spectrum(21e9) / centre >= 0.1);
  CHECK(spectrum(42e9) / centre >= 0.1);
  CHECK(spectrum(26e9 + 17e9) / centre == rel(0.1, 0.05));
}

TEST_CASE("zero field is a fixed point") {
  const PinGrid empty(1, 1, 2e-3);
  FieldState st = build_scene(empty, open_scene(10e-3, 10e-3), SurfaceConfig{}, coarse());
  for (int n = 0; n < 200; ++n) step(st);
  CHECK(std::all_of(st.E.begin(), st.E.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(st.Hz.begin(), st.Hz.end(), [](double v) { return v == 0.0; }));
  CHECK(std::all_of(st.Hy.begin(), st.Hy.end(), [](double v) { return v == 0.0; }));
  CHECK(st.step_index == 200);
}

TEST_CASE("row-fused and blocked updates match the two-pass update") {
  for (const MetalMode mode : {MetalMode::Pec, MetalMode::Lossy}) {
    SolverConfig cfg = coarse();
    cfg.metal_mode = mode;
    PresetOptions opt;
    const Layout l = preset_straight(10e-3, 20e-3, 1, opt);
    FieldState base = build_scene(l.grid, l.scene, SurfaceConfig{}, cfg);
    for (std::size_t k = 0; k < base.E.size(); ++k) base.E[k] = 1e-3 * static_cast<double>((k * 7919) % 17) - 8e-3;
    const CellSegment src = aperture_cells(base, l.scene.transducer(1)->position, Facing::PlusZ, 7e-3);
    REQUIRE_FALSE(src.cells.empty());
    auto drive = [](int n) { return 0.01 * std::sin(0.3 * n); };

    FieldState two_pass = base, fused = base, blocked = base;
    for (int n = 1; n <= 24; ++n) {
      update_h_rows(two_pass, 0, two_pass.rows);
      update_e_rows(two_pass, 0, two_pass.rows);
      inject_source(two_pass, src, drive(n));
      step(fused);
      inject_source(fused, src, drive(n));
    }
    for (int b = 0; b < 3; ++b) {
      advance(blocked, 8, [&](int level, int row) {
        for (std::size_t k : src.cells) {
          if (static_cast<int>(k / blocked.cols) == row) blocked.E[k] += drive(8 * b + level + 1);
        }
      });
    }
    CHECK(std::count(base.material.begin(), base.material.end(), mode == MetalMode::Pec ? 1 : 2) > 0);
    CHECK(fused.E == two_pass.E);
    CHECK(fused.Hz == two_pass.Hz);
    CHECK(fused.Hy == two_pass.Hy);
    CHECK(blocked.E == two_pass.E);
    CHECK(blocked.Hz == two_pass.Hz);
    CHECK(blocked.Hy == two_pass.Hy);
    CHECK(blocked.step_index == 24);
  }
}

TEST_CASE("impulse ring symmetry and lossless energy") {
  SolverConfig cfg = coarse();
  cfg.confinement_kappa = 0.0;
  const PinGrid empty(1, 1, 2e-3);
  const double side = 0.2e-3 * 661;
  FieldState st = build_scene(empty, open_scene(side, side), SurfaceConfig{}, cfg);
  REQUIRE(st.rows % 2 == 1);
  REQUIRE(st.rows == st.cols);
  const int c = st.rows / 2;
  st.E[st.index(c, c)] = 1.0;
  std::vector<double> energy;
  for (int n = 0; n < 500; ++n) {
    step(st);
    energy.push_back(st.discrete_energy());
  }
  // Front speed is 0.7/1.185 cells per step: 300 cells in 500 steps, inside
  // the 320-cell interior half-width. The energy invariant is exact until
  // the PML is reached.
  for (double e : energy) CHECK(e == rel(energy.front(), 1e-9));

  int compared = 0;
  for (int a = 20; a <= 200; a += 30) {
    for (int b = 0; b <= a; b += 15) {
      const double ref = st.E[st.index(c + a, c + b)];
      if (std::abs(ref) < 1e-12) continue;
      const int pts[8][2] = {{a, b}, {b, a}, {-a, b}, {-b, a}, {a, -b}, {b, -a}, {-a, -b}, {-b, -a}};
      for (const auto& p : pts) {
        const double v = st.E[st.index(c + p[0], c + p[1])];
        CHECK(std::abs(v - ref) <= 0.01 * std::abs(ref));
      }
      ++compared;
    }
  }
  CHECK(compared > 10);
}

TEST_CASE("smooth pulse spreads isotropically") {
  // A Gaussian blob ten cells wide is resolved well enough that the axial,
  // oblique and diagonal wavefronts agree within 1%.
  SolverConfig cfg = coarse();
  cfg.confinement_kappa = 0.0;
  const PinGrid empty(1, 1, 2e-3);
  const double side = 0.2e-3 * 501;
  FieldState st = build_scene(empty, open_scene(side, side), SurfaceConfig{}, cfg);
  const int c = st.rows / 2;
  for (int i = -40; i <= 40; ++i) {
    for (int j = -40; j <= 40; ++j) {
      st.E[st.index(c + i, c + j)] = std::exp(-(i * i + j * j) / 200.0);
    }
  }
  for (int n = 0; n < 250; ++n) step(st);
  // Bilinear samples along a ray from the centre.
  auto sample = [&](double y, double z) {
    const int i = static_cast<int>(std::floor(y)), j = static_cast<int>(std::floor(z));
    const double fy = y - i, fz = z - j;
    auto e = [&](int a, int b) { return st.E[st.index(c + a, c + b)]; };
    return (1 - fy) * (1 - fz) * e(i, j) + fy * (1 - fz) * e(i + 1, j) + (1 - fy) * fz * e(i, j + 1) +
           fy * fz * e(i + 1, j + 1);
  };
  auto peak_along = [&](double angle) {
    double best = 0.0;
    for (double r = 60.0; r < 200.0; r += 0.25) {
      best = std::max(best, std::abs(sample(r * std::sin(angle), r * std::cos(angle))));
    }
    return best;
  };
  const double axial = peak_along(0.0), diagonal = peak_along(kPi / 4.0), oblique = peak_along(kPi / 8.0);
  CHECK(diagonal == rel(axial, 0.01));
  CHECK(oblique == rel(axial, 0.01));
}

TEST_CASE("transmission against the reference") {
  ProbeRecord ref, same, half;
  const std::vector<double> f = {25e9, 26e9, 27e9};
  ref.spectrum = {{1.0, 0.5}, {2.0, -1.0}, {0.3, 0.1}};
  same.spectrum = ref.spectrum;
  for (auto v : ref.spectrum) half.spectrum.push_back(0.5 * v);
  same.spec.id = "same";
  half.spec.id = "half";
  const TransmissionCurve a = transmission(same, ref, f);
  const TransmissionCurve b = transmission(half, ref, f);
  for (std::size_t k = 0; k < f.size(); ++k) {
    CHECK(std::abs(a.s21_db[k]) < 1e-9);
    CHECK(b.s21_db[k] == rel(-6.0206, 1e-4));
  }
  ProbeRecord dead = ref;
  dead.spectrum[1] = 0.0;
  const TransmissionCurve c = transmission(same, dead, f);
  CHECK_FALSE(c.valid[1]);
  CHECK(std::isnan(c.s21_db[1]));
}

TEST_CASE("short straight run") {
  SolverConfig cfg = coarse();
  cfg.dft_frequencies = {24e9, 26e9, 28e9};
  PresetOptions opt;
  const Layout l = preset_straight(10e-3, 40e-3, 1, opt);
  const RunResult r = run(l, SurfaceConfig{}, cfg);
  CHECK(r.converged);
  CHECK(r.steps > 0);
  CHECK(r.has_probe("rx2"));
  CHECK(r.frequencies.size() == 3);
  const TransmissionCurve near = transmission(r, "c10");
  const TransmissionCurve far = transmission(r, "c30");
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(std::isfinite(near.s21_db[k]));
    CHECK(std::isfinite(far.s21_db[k]));
    CHECK(near.s21_db[k] < 6.0);
  }
  CHECK(std::isfinite(r.final_energy));
  CHECK(r.final_energy <= r.peak_energy);
  const std::string csv = spectra_csv(r);
  CHECK(csv.rfind("probe_id,y_mm,z_mm,freq_ghz,re,im,mag_db", 0) == 0);

  // A second identical run gives identical spectra.
  const RunResult again = run(l, SurfaceConfig{}, cfg);
  for (std::size_t p = 0; p < r.probes.size(); ++p) {
    CHECK(again.probes[p].spectrum == r.probes[p].spectrum);
  }
}

TEST_CASE("snapshot files") {
  SnapshotField s;
  s.frequency = 26e9;
  s.rows = 3;
  s.cols = 4;
  for (int k = 0; k < 12; ++k) s.values.emplace_back(k * 0.5, -k * 0.25);
  const auto dir = std::filesystem::temp_directory_path();
  const auto bin = dir / "surfwave_test_field.swf";
  const auto pgm = dir / "surfwave_test_field.pgm";
  write_snapshot_binary(s, bin);
  const SnapshotField back = read_snapshot_binary(bin);
  CHECK(back.rows == 3);
  CHECK(back.cols == 4);
  const auto mag = s.magnitude();
  for (std::size_t k = 0; k < mag.size(); ++k) CHECK(std::abs(std::abs(back.values[k]) - mag[k]) < 1e-12);
  write_snapshot_pgm(s, pgm);
  CHECK(std::filesystem::file_size(pgm) > 12);
  std::filesystem::remove(bin);
  std::filesystem::remove(pgm);
  CHECK_THROWS(read_snapshot_binary(dir / "surfwave_missing_file.swf"));
}

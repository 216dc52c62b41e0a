#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <set>

#include "surfwave/io.hpp"
#include "surfwave/layout.hpp"
#include "surfwave/layout_dsl.hpp"
#include "surfwave/validation.hpp"

using namespace surfwave;

namespace {

std::set<double> wall_offsets_mm(const Layout& l) {
  const double yc = l.scene.transducer(1)->position.y;
  std::set<double> out;
  for (const auto& idx : l.grid.filled_set()) {
    out.insert(std::round((l.grid.center(idx).y - yc) * 1e4) / 10.0);
  }
  return out;
}

std::set<LatticeIndex> symmetric_difference(const std::set<LatticeIndex>& a,
                                            const std::set<LatticeIndex>& b) {
  std::set<LatticeIndex> out;
  std::set_symmetric_difference(a.begin(), a.end(), b.begin(), b.end(),
                                std::inserter(out, out.begin()));
  return out;
}

}  // namespace

TEST_CASE("pin grid basics") {
  PinGrid g(4, 6, 2e-3, {1e-3, -3e-3});
  CHECK(g.center(2, 3).y == rel(5e-3));
  CHECK(g.center(2, 3).z == rel(3e-3));
  g.fill(1, 1);
  g.fill(1, 1);
  CHECK(g.filled_count() == 1);
  CHECK(g.filled(1, 1));
  g.clear(1, 1);
  CHECK_FALSE(g.filled(1, 1));
  CHECK_THROWS(g.fill(4, 0));
  CHECK_THROWS(g.fill(0, -1));
  CHECK_THROWS(PinGrid(0, 3, 2e-3));
  CHECK_THROWS(PinGrid(3, 3, 0.0));
}

TEST_CASE("straight preset wall rows") {
  CHECK(wall_offsets_mm(preset_straight(10e-3, 150e-3, 1)) == std::set<double>{-5.0, 5.0});
  CHECK(wall_offsets_mm(preset_straight(10e-3, 150e-3, 2)) == std::set<double>{-7.0, -5.0, 5.0, 7.0});
  CHECK(wall_offsets_mm(preset_straight(12e-3, 150e-3, 1)) == std::set<double>{-6.0, 6.0});
  CHECK(wall_offsets_mm(preset_straight(16e-3, 150e-3, 1)) == std::set<double>{-8.0, 8.0});
  CHECK_THROWS(preset_straight(3e-3, 150e-3, 1));
  CHECK_THROWS(preset_straight(11e-3, 150e-3, 1));
  CHECK_THROWS(preset_straight(10e-3, 150e-3, 0));
}

TEST_CASE("straight preset scene") {
  const Layout l = preset_straight(10e-3, 150e-3, 1);
  const Transducer* t1 = l.scene.transducer(1);
  const Transducer* t2 = l.scene.transducer(2);
  REQUIRE(t1);
  REQUIRE(t2);
  CHECK(t1->position.y == rel(t2->position.y));
  CHECK(t2->position.z - t1->position.z == rel(150e-3));
  CHECK(t1->facing == Facing::PlusZ);
  CHECK(t2->facing == Facing::MinusZ);

  // Walls reach 10 mm beyond each transducer.
  double zmin = 1e9, zmax = -1e9;
  for (const auto& idx : l.grid.filled_set()) {
    zmin = std::min(zmin, l.grid.center(idx).z);
    zmax = std::max(zmax, l.grid.center(idx).z);
  }
  CHECK(t1->position.z - zmin >= 10e-3 - 1e-9);
  CHECK(zmax - t2->position.z >= 10e-3 - 1e-9);

  // Centerline probes every 10 mm, on the transducer axis.
  int centre = 0;
  for (const auto& p : l.scene.probes) {
    if (p.group != "centerline") continue;
    ++centre;
    CHECK(p.position.y == rel(t1->position.y));
    const double steps = p.path_distance / 10e-3;
    CHECK(std::abs(steps - std::round(steps)) < 1e-9);
  }
  CHECK(centre >= 10);
  REQUIRE(l.scene.reference);
  CHECK(l.scene.surface.contains(l.scene.reference->position));
}

TEST_CASE("straight preset masks are mirror symmetric") {
  for (int layers = 1; layers <= 3; ++layers) {
    for (double w : {10e-3, 12e-3, 14e-3}) {
      const Layout l = preset_straight(w, 60e-3, layers);
      const double yc = l.scene.transducer(1)->position.y;
      const double half = std::max(yc - l.scene.surface.y_min, l.scene.surface.y_max - yc);
      Extents e = l.scene.surface;
      e.y_min = yc - half;
      e.y_max = yc + half;
      const OccupancyMask m = rasterize(l.grid, 0.1e-3, 0.5e-3, e);
      for (int i = 0; i < m.rows; ++i) {
        for (int j = 0; j < m.cols; ++j) {
          REQUIRE(m.at(i, j) == m.at(m.rows - 1 - i, j));
        }
      }
    }
  }
}

TEST_CASE("T-junction modes") {
  const Layout s = preset_tjunction(JunctionMode::Straight, 10e-3);
  const Layout t = preset_tjunction(JunctionMode::Turn, 10e-3);
  REQUIRE(s.scene.transducer(3));
  REQUIRE(t.scene.transducer(3));
  CHECK(s.grid.rows() == t.grid.rows());
  CHECK(s.grid.cols() == t.grid.cols());

  const auto diff = symmetric_difference(s.grid.filled_set(), t.grid.filled_set());
  CHECK_FALSE(diff.empty());
  // The changed pins sit inside the junction: within one arm width of the
  // transducer-3 axis and of the 1-2 axis.
  const Vec2 t1 = s.scene.transducer(1)->position;
  const Vec2 t3 = s.scene.transducer(3)->position;
  int rmin = 1 << 20, rmax = -1, cmin = 1 << 20, cmax = -1;
  for (const auto& idx : diff) {
    const Vec2 p = s.grid.center(idx);
    CHECK(std::abs(p.z - t3.z) <= 10e-3 + 1e-9);
    CHECK(std::abs(p.y - t1.y) <= 10e-3 + 1e-9);
    rmin = std::min(rmin, idx.row);
    rmax = std::max(rmax, idx.row);
    cmin = std::min(cmin, idx.col);
    cmax = std::max(cmax, idx.col);
  }
  const std::size_t box = static_cast<std::size_t>((rmax - rmin + 1) * (cmax - cmin + 1));
  CHECK(diff.size() <= box);
  CHECK(box <= 11u * 11u);

  // The turn state has a 45 degree run: consecutive pins step one row and one column.
  int diagonal_steps = 0;
  for (const auto& idx : t.grid.filled_set()) {
    if (t.grid.filled(idx.row + 1, idx.col + 1) || t.grid.filled(idx.row + 1, idx.col - 1)) {
      if (!s.grid.filled(idx.row, idx.col)) ++diagonal_steps;
    }
  }
  CHECK(diagonal_steps >= 3);
}

TEST_CASE("corner widths") {
  const double table[9] = {0.0, 12.7, 11.3, 9.9, 8.5, 7.1, 5.7, 4.2, 2.8};
  for (int k = 1; k <= 8; ++k) {
    const double wt = corner_width(k, 2e-3) * 1e3;
    CHECK(std::abs(wt - table[k]) <= 0.05);
    CHECK(wt == rel((10 - k) * 2.0 / std::sqrt(2.0), 1e-12));
    if (k > 1) CHECK(wt < corner_width(k - 1, 2e-3) * 1e3);
  }
  CHECK(corner_width(1, 2e-3) * 1e3 == rel(12.73, 1e-3));
  CHECK(corner_width(7, 2e-3) * 1e3 == rel(4.24, 1e-3));
  CHECK_THROWS(corner_width(9, 2e-3));
  CHECK_THROWS(corner_width(-1, 2e-3));
  CHECK(corner_spec(4, 2e-3).corner_width_wt * 1e3 == rel(8.485, 1e-3));
}

TEST_CASE("corner 0 and corner 1 differ by the outer vertex pin") {
  const Layout c0 = preset_corner(0, 10e-3);
  const Layout c1 = preset_corner(1, 10e-3);
  const auto diff = symmetric_difference(c0.grid.filled_set(), c1.grid.filled_set());
  REQUIRE(diff.size() == 1);
  CHECK(c0.grid.filled(diff.begin()->row, diff.begin()->col));
  for (int k = 2; k <= 8; ++k) {
    const Layout ck = preset_corner(k, 10e-3);
    CHECK(ck.grid.filled_count() > 0);
    CHECK(ck.scene.transducer(2));
  }
}

TEST_CASE("rasterisation") {
  PinGrid g(1, 1, 2e-3);
  g.fill(0, 0);
  const OccupancyMask m = rasterize(g, 0.1e-3, 0.5e-3);
  // Brute-force count of cell centres inside the disc.
  const Vec2 c = g.center(0, 0);
  const Extents e = lattice_extents(g);
  std::size_t expected = 0;
  for (int i = 0; i < 20; ++i) {
    for (int j = 0; j < 20; ++j) {
      const double y = e.y_min + (i + 0.5) * 0.1e-3, z = e.z_min + (j + 0.5) * 0.1e-3;
      if (std::hypot(y - c.y, z - c.z) < 0.5e-3) ++expected;
    }
  }
  CHECK(m.metal_count() == expected);
  CHECK(std::abs(static_cast<double>(m.metal_count()) - kPi * 25.0) <= 2.0 * kPi * 5.0);

  PinGrid empty(5, 5, 2e-3);
  CHECK(rasterize(empty, 0.1e-3, 0.5e-3).metal_count() == 0);
  CHECK_THROWS_AS(rasterize(empty, 0.5e-3, 0.5e-3), std::invalid_argument);

  // Adjacent pins stay separated by dielectric along the shared row.
  PinGrid pair(1, 2, 2e-3);
  pair.fill(0, 0);
  pair.fill(0, 1);
  const OccupancyMask pm = rasterize(pair, 0.1e-3, 0.5e-3);
  const int mid = pm.rows / 2;
  int gap = 0, longest = 0;
  bool seen_metal = false;
  for (int j = 0; j < pm.cols; ++j) {
    if (pm.at(mid, j)) {
      if (seen_metal) longest = std::max(longest, gap);
      seen_metal = true;
      gap = 0;
    } else {
      ++gap;
    }
  }
  CHECK(longest >= 1);
  CHECK(pm.metal_count() == 2 * expected);
}

TEST_CASE("DSL examples") {
  const Layout a = parse_layout("GRID 30 100 2mm\n");
  CHECK(a.grid.rows() == 30);
  CHECK(a.grid.cols() == 100);
  CHECK(a.grid.pitch() == rel(2e-3));
  CHECK(a.grid.filled_count() == 0);

  const Layout b = parse_layout("GRID 30 100 2mm\nPRESET corner k=4 width=10mm\n");
  const Layout ref = preset_corner(4, 10e-3);
  CHECK(b.grid.filled_count() == ref.grid.filled_count());
  CHECK(corner_width(4, b.grid.pitch()) * 1e3 == rel(8.485, 1e-3));

  const Layout c = parse_layout("WALL (0,0)-(0,9)\n");
  CHECK(c.grid.filled_count() == 10);
  for (int j = 0; j < 10; ++j) CHECK(c.grid.filled(0, j));

  const Layout d = parse_layout("GRID 20 20 2mm\nWALL (0,0)-(5,5)  # diagonal\nFILL 10 3\n");
  CHECK(d.grid.filled_count() == 7);
  CHECK(d.grid.filled(3, 3));
  CHECK(d.grid.filled(10, 3));
}

TEST_CASE("DSL diagnostics") {
  auto fails_at = [](const std::string& text, int line) {
    try {
      parse_layout(text);
    } catch (const LayoutError& e) {
      CHECK(e.line() == line);
      CHECK(e.column() >= 1);
      CHECK_FALSE(e.message().empty());
      return true;
    }
    return false;
  };
  CHECK(fails_at("GRID 30 100 2mm\nFILL 30 0\n", 2));
  CHECK(fails_at("GRID 30 100 2mm\nWALL (0,0)-(3,5)\n", 2));
  CHECK(fails_at("BOGUS 1 2\n", 1));
  CHECK(fails_at("GRID 30 100 2mm\n\nPRESET straight width=3mm\n", 3));
  CHECK(fails_at("GRID 30 100 2qq\n", 1));
  for (const auto& [text, line] : malformed_layouts()) {
    CHECK(fails_at(text, line));
  }
}

TEST_CASE("DSL round trip over the corpus") {
  const auto corpus = layout_corpus();
  CHECK(corpus.size() >= 20);
  for (const auto& text : corpus) {
    const Layout first = parse_layout(text);
    const std::string once = unparse_layout(first);
    const Layout second = parse_layout(once);
    CHECK(second.grid.filled_set() == first.grid.filled_set());
    CHECK(second.grid.rows() == first.grid.rows());
    CHECK(second.grid.cols() == first.grid.cols());
    CHECK(unparse_layout(second) == once);
  }
}

TEST_CASE("mask PGM output") {
  const auto path = std::filesystem::temp_directory_path() / "surfwave_test_mask.pgm";
  PinGrid g(2, 3, 2e-3);
  g.fill(1, 2);
  const OccupancyMask m = rasterize(g, 0.1e-3, 0.5e-3);
  write_pgm(m, path);
  const std::string data = read_file(path);
  const std::string header = "P5\n" + std::to_string(m.cols) + " " + std::to_string(m.rows) + "\n255\n";
  CHECK(data.rfind(header, 0) == 0);
  CHECK(data.size() == header.size() + m.cells.size());
  std::filesystem::remove(path);
}

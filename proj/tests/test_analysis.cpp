#include <doctest.h>

#include "approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "surfwave/analysis.hpp"

using namespace surfwave;

namespace {

constexpr double kPiD = 3.14159265358979323846;

template <class Fn>
TransmissionCurve make_curve(double f0, double f1, double df, Fn fn) {
  TransmissionCurve c;
  c.layout_id = "synthetic";
  for (int i = 0;; ++i) {
    const double f = f0 + i * df;
    if (f > f1 + 1e-3) break;
    c.frequencies.push_back(f);
    c.s21_db.push_back(fn(f));
  }
  c.valid.assign(c.size(), true);
  return c;
}

double ghz(double f) { return f / 1e9; }

}  // namespace

TEST_CASE("optimal frequency: parabola") {
  const auto c = make_curve(21e9, 30e9, 0.1e9, [](double f) {
    const double g = ghz(f) - 25.0;
    return -4.0 - 0.8 * g * g;
  });
  const PeakEstimate p = optimal_frequency(c);
  CHECK(ghz(p.frequency) == rel(25.0, 0.05 / 25.0));
  CHECK_FALSE(p.boundary_peak);
  CHECK(p.value_db == rel(-4.0));

  // Off-grid vertex: exact on a parabola.
  const auto off = make_curve(21e9, 30e9, 0.25e9, [](double f) {
    const double g = ghz(f) - 25.03;
    return -1.0 - 2.0 * g * g;
  });
  const PeakEstimate q = optimal_frequency(off);
  CHECK(ghz(q.frequency) == rel(25.03, 1e-9));
  CHECK(q.value_db == rel(-1.0, 1e-9));
}

TEST_CASE("optimal frequency: degenerate inputs") {
  const auto mono = make_curve(21e9, 42e9, 0.25e9, [](double f) { return ghz(f) - 40.0; });
  const PeakEstimate p = optimal_frequency(mono);
  CHECK(p.boundary_peak);
  CHECK(p.frequency == 42e9);
  CHECK(p.index == mono.size() - 1);

  // Ties keep the lower frequency.
  TransmissionCurve tie = make_curve(21e9, 22e9, 0.25e9, [](double) { return -3.0; });
  tie.s21_db[1] = tie.s21_db[3] = 0.0;
  CHECK(optimal_frequency(tie).index == 1);

  TransmissionCurve bad = mono;
  std::fill(bad.valid.begin(), bad.valid.end(), false);
  CHECK_THROWS_AS(optimal_frequency(bad), std::invalid_argument);
  TransmissionCurve two = make_curve(21e9, 21.25e9, 0.25e9, [](double) { return 0.0; });
  CHECK_THROWS_AS(optimal_frequency(two), std::invalid_argument);

  // Invalid samples are skipped.
  TransmissionCurve holes = make_curve(21e9, 30e9, 0.25e9, [](double f) { return -std::abs(ghz(f) - 25.0); });
  holes.s21_db[0] = 100.0;
  holes.valid[0] = false;
  CHECK(optimal_frequency(holes).frequency == rel(25e9));
}

TEST_CASE("optimal frequency is invariant to a constant offset") {
  std::mt19937 rng(7);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    auto c = make_curve(21e9, 42e9, 0.25e9, [&](double f) { return -0.2 * std::pow(ghz(f) - 30.0, 2) + noise(rng); });
    const PeakEstimate p = optimal_frequency(c);
    for (double& v : c.s21_db) v += 17.5;
    const PeakEstimate q = optimal_frequency(c);
    CHECK(q.index == p.index);
    CHECK(q.frequency == rel(p.frequency, 1e-9));
  }
}

TEST_CASE("half-power band") {
  // Raised cosine in linear power over +-2 GHz: half power at 26 +- 1 GHz.
  const double df = 0.05e9;
  const auto rc = make_curve(21e9, 31e9, df, [](double f) {
    const double g = (ghz(f) - 26.0) / 2.0;
    const double p = std::abs(g) < 1.0 ? 0.5 * (1.0 + std::cos(kPiD * g)) : 1e-6;
    return 10.0 * std::log10(std::max(p, 1e-6));
  });
  const Band b = half_power_band(rc, 10.0 * std::log10(2.0));
  CHECK(std::abs(b.low - 25e9) <= df);
  CHECK(std::abs(b.high - 27e9) <= df);
  CHECK_FALSE(b.low_open);
  CHECK_FALSE(b.high_open);
  CHECK(b.contains(optimal_frequency(rc).frequency));

  const auto flat = make_curve(21e9, 42e9, 0.25e9, [](double) { return -16.2; });
  const Band fb = half_power_band(flat);
  CHECK(fb.low == 21e9);
  CHECK(fb.high == 42e9);
  CHECK(fb.low_open);
  CHECK(fb.high_open);
  CHECK(fb.width() > 0.0);

  const auto mono = make_curve(21e9, 42e9, 0.25e9, [](double f) { return ghz(f) - 40.0; });
  const Band mb = half_power_band(mono);
  CHECK(mb.high_open);
  CHECK_FALSE(mb.low_open);
  CHECK(mb.low == rel(39e9));
}

TEST_CASE("half-power band contains the peak and has positive width") {
  std::mt19937 rng(99);
  std::uniform_real_distribution<double> centre(22.0, 41.0), curv(0.05, 3.0), jitter(-0.3, 0.3);
  for (int trial = 0; trial < 200; ++trial) {
    const double fc = centre(rng), a = curv(rng);
    auto c = make_curve(21e9, 42e9, 0.25e9, [&](double f) { return -a * std::pow(ghz(f) - fc, 2) + jitter(rng); });
    const Band b = half_power_band(c);
    REQUIRE(b.width() > 0.0);
    REQUIRE(b.contains(optimal_frequency(c).frequency));
  }
}

TEST_CASE("band average") {
  const auto flat = make_curve(21e9, 42e9, 0.25e9, [](double) { return -16.2; });
  CHECK(band_average_s21(flat, half_power_band(flat)) == rel(-16.2));

  // Symmetric triangle: the mean over the -3 dB band is the peak minus 1.5 dB.
  const auto tri = make_curve(21e9, 31e9, 0.01e9, [](double f) { return -2.0 - 3.0 * std::abs(ghz(f) - 26.0); });
  const Band tb = half_power_band(tri);
  CHECK(ghz(tb.low) == rel(25.0, 1e-6));
  CHECK(ghz(tb.high) == rel(27.0, 1e-6));
  // 201 samples over [25, 27] including both edges: -2 - 3 * 101/201 exactly.
  CHECK(band_average_s21(tri, tb) == rel(-2.0 - 3.0 * 101.0 / 201.0, 1e-9));
  CHECK(std::abs(band_average_s21(tri, tb) - (-3.5)) < 0.01);

  Band empty{50e9, 51e9};
  CHECK_THROWS_AS(band_average_s21(flat, empty), std::invalid_argument);
}

TEST_CASE("band average is order-independent and shift-equivariant") {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> u(-30.0, 0.0);
  auto c = make_curve(21e9, 42e9, 0.25e9, [&](double) { return u(rng); });
  const Band band{24e9, 33e9};
  const double base = band_average_s21(c, band);
  auto shifted = c;
  for (double& v : shifted.s21_db) v += 4.25;
  CHECK(band_average_s21(shifted, band) == rel(base + 4.25, 1e-12));

  // Reordering the samples inside the band (frequencies kept) leaves the mean unchanged.
  auto permuted = c;
  std::vector<std::size_t> inside;
  for (std::size_t i = 0; i < c.size(); ++i) {
    if (band.contains(c.frequencies[i])) inside.push_back(i);
  }
  std::vector<double> vals;
  for (auto i : inside) vals.push_back(c.s21_db[i]);
  std::reverse(vals.begin(), vals.end());
  for (std::size_t k = 0; k < inside.size(); ++k) permuted.s21_db[inside[k]] = vals[k];
  CHECK(band_average_s21(permuted, band) == rel(base, 1e-12));
}

TEST_CASE("attenuation fit") {
  std::vector<double> d, s;
  for (int i = 0; i <= 10; ++i) {
    d.push_back(0.05 + 0.01 * i);
    s.push_back(-1.5 - 28.56 * d.back());
  }
  const AttenuationFit fit = attenuation_fit(d, s);
  CHECK(fit.slope_db_per_m == rel(28.56, 1e-12));
  CHECK(fit.intercept_db == rel(-1.5, 1e-12));
  CHECK(fit.r2 == rel(1.0));
  CHECK(fit.points == d.size());

  // Same data in millimetres: slope scales by 1000.
  std::vector<double> dmm;
  for (double v : d) dmm.push_back(v * 1e3);
  const LineFit mm = fit_line(dmm, s);
  CHECK(-mm.slope * 1e3 == rel(fit.slope_db_per_m, 1e-12));
  CHECK(mm.r2 == rel(fit.r2));

  const AttenuationFit zero = attenuation_fit(d, std::vector<double>(d.size(), -7.0));
  CHECK(std::abs(zero.slope_db_per_m) < 1e-9);
  CHECK(zero.r2 == 1.0);

  CHECK_THROWS(attenuation_fit({0.1, 0.1, 0.1}, {1.0, 2.0, 3.0}));
  CHECK_THROWS(attenuation_fit({0.1, 0.2}, {1.0, 2.0}));

  std::mt19937 rng(11);
  std::normal_distribution<double> noise(0.0, 3.0);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<double> y;
    for (double v : d) y.push_back(-20.0 * v + noise(rng));
    const AttenuationFit f = attenuation_fit(d, y);
    REQUIRE(f.r2 >= 0.0);
    REQUIRE(f.r2 <= 1.0);
  }
}

TEST_CASE("attenuation fit from curves") {
  std::vector<TransmissionCurve> curves;
  for (int i = 0; i < 6; ++i) {
    const double dist = 0.05 + 0.02 * i;
    auto c = make_curve(21e9, 42e9, 0.25e9, [&](double f) { return -(ghz(f) - 10.0) * dist - 1.0; });
    c.distance = dist;
    curves.push_back(c);
  }
  // At 26 GHz the loss rate is 16 dB/m.
  CHECK(attenuation_fit(curves, 26e9).slope_db_per_m == rel(16.0, 1e-9));
  CHECK(attenuation_fit(curves, 26.1e9).slope_db_per_m == rel(16.1, 1e-9));
}

TEST_CASE("isolation") {
  CHECK(isolation(-2.2, -37.1) == rel(34.9));
  CHECK(isolation(-5.0, -5.0) == 0.0);
}

TEST_CASE("curve interpolation and restriction") {
  auto c = make_curve(21e9, 22e9, 0.25e9, [](double f) { return ghz(f); });
  CHECK(c.at(21.1e9) == rel(21.1));
  CHECK(std::isnan(c.at(20e9)));
  c.valid[2] = false;
  CHECK(std::isnan(c.at(21.4e9)));
  const auto r = restrict_band(c, 21.25e9, 21.75e9);
  CHECK(r.size() == 3);
  CHECK(r.frequencies.front() == 21.25e9);
  CHECK_FALSE(r.valid[1]);

  TransmissionCurve broken = c;
  broken.frequencies[1] = broken.frequencies[0];
  CHECK_THROWS_AS(broken.check(), std::invalid_argument);
  broken = c;
  broken.s21_db.pop_back();
  CHECK_THROWS_AS(broken.check(), std::invalid_argument);
}

TEST_CASE("metrics csv") {
  const auto c = make_curve(21e9, 30e9, 0.25e9, [](double f) { return -std::pow(ghz(f) - 25.0, 2); });
  MetricsRow row = summarize(c);
  row.isolation_db = 12.5;
  const std::string csv = metrics_csv({row});
  CHECK(csv.find("layout") == 0);
  CHECK(csv.find("synthetic") != std::string::npos);
  CHECK(csv.find("12.5") != std::string::npos);
  CHECK(row.f_opt_ghz == rel(25.0));
}

#include <doctest.h>

#include "approx.hpp"

#include <cmath>
#include <complex>
#include <random>

#include "surfwave/physics.hpp"
#include "surfwave/surface.hpp"

using namespace surfwave;
using C = PhysicalConstants;

namespace {

// Independent long-double evaluations of the closed-form model.
using ld = long double;
using cld = std::complex<long double>;
constexpr ld kPiL = 3.141592653589793238462643383279502884L;
constexpr ld kMu0 = 4.0e-7L * kPiL;
constexpr ld kEps0 = 8.854e-12L;

ld ref_delta(ld f, ld sigma) { return std::sqrt(2.0L / (2.0L * kPiL * f * kMu0 * sigma)); }

cld ref_gamma_x(ld f, ld er, ld h, ld sigma) {
  const ld w = 2.0L * kPiL * f;
  const ld d = ref_delta(f, sigma);
  return w * w * kMu0 * kEps0 * cld((er - 1.0L) / er * h + d / 2.0L, -d / 2.0L);
}

ld ref_xs(ld f, ld er, ld h, ld sigma) {
  const ld w = 2.0L * kPiL * f;
  return w * kMu0 * ((er - 1.0L) / er * h + ref_delta(f, sigma) / 2.0L);
}

const DielectricSpec kLayer{2.4, 0.0155, 26e9, 2e-3};
const MetalSpec kSilver{3.15e6};

}  // namespace

TEST_CASE("constants are consistent") {
  CHECK(C::eps0 == rel(8.854e-12, 1e-12));
  CHECK(C::mu0 == rel(4e-7 * kPi, 1e-15));
  CHECK(C::c0 == rel(1.0 / std::sqrt(C::mu0 * C::eps0), 1e-6));
}

TEST_CASE("skin depth") {
  CHECK(skin_depth(26e9, kSilver) == rel(static_cast<double>(ref_delta(26e9L, 3.15e6L)), 1e-12));
  CHECK(skin_depth(26e9, kSilver) == rel(1.759e-6, 1e-3));
  CHECK(skin_depth(26e9, MetalSpec{59.6e6}) == rel(4.04e-7, 2e-3));
  CHECK(skin_depth(26e9, MetalSpec::pec()) == 0.0);
  CHECK_THROWS_AS(skin_depth(-1.0, kSilver), std::domain_error);
  CHECK_THROWS_AS(skin_depth(26e9, MetalSpec{0.0}), std::domain_error);
}

TEST_CASE("gamma_x") {
  const cplx gx = gamma_x(26e9, kLayer, kSilver);
  const cld ref = ref_gamma_x(26e9L, 2.4L, 2e-3L, 3.15e6L);
  CHECK(gx.real() == rel(static_cast<double>(ref.real()), 1e-12));
  CHECK(gx.imag() == rel(static_cast<double>(ref.imag()), 1e-12));
  CHECK(gx.real() == rel(346.7, 1e-3));
  CHECK(gx.imag() == rel(-0.26, 0.02));

  const cplx pec = gamma_x(26e9, kLayer, MetalSpec::pec());
  CHECK(pec.imag() == 0.0);
  const double w = angular(26e9);
  CHECK(pec.real() == rel(w * w * C::mu0 * C::eps0 * (1.4 / 2.4) * 2e-3));

  DielectricSpec thin = kLayer;
  thin.eps_r = 1.0 + 1e-12;
  CHECK(std::abs(gamma_x(26e9, thin, MetalSpec::pec())) < 1e-6);
  thin.eps_r = 1.0;
  CHECK_THROWS_AS(gamma_x(26e9, thin, kSilver), std::domain_error);
}

TEST_CASE("gamma_z branch and effective index") {
  const cplx gx = gamma_x(26e9, kLayer, kSilver);
  const cplx gz = gamma_z(26e9, gx);
  CHECK(gz.real() >= 0.0);
  CHECK(gz.imag() == rel(645.9, 1e-3));
  const double k0sq = std::pow(angular(26e9) / C::c0, 2);
  const cplx rebuilt = gz * gz;
  CHECK(std::abs(rebuilt - (-k0sq - gx * gx)) < 1e-9 * k0sq);
  CHECK(effective_index(26e9, gz) == rel(1.185, 1e-3));

  const cplx free = gamma_z(26e9, cplx(0.0, 0.0));
  CHECK(std::abs(free.real()) < 1e-9);
  CHECK(free.imag() == rel(angular(26e9) / C::c0));
  CHECK(effective_index(26e9, free) == rel(1.0));
  CHECK_THROWS_AS(effective_index(26e9, cplx(1.0, 0.0)), std::domain_error);
}

TEST_CASE("gamma_z branch rule on random inputs") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> f(1e9, 100e9), re(-2000.0, 2000.0), im(-50.0, 50.0);
  for (int i = 0; i < 200000; ++i) {
    const double fi = f(rng);
    const cplx gx(re(rng), im(rng));
    const cplx gz = gamma_z(fi, gx);
    REQUIRE(gz.real() >= 0.0);
    if (gz.real() == 0.0) REQUIRE(gz.imag() >= 0.0);
    const cplx target = -std::pow(angular(fi) / C::c0, 2) - gx * gx;
    REQUIRE(std::abs(gz * gz - target) <= 1e-12 * std::max(1.0, std::abs(target)) * 8);
  }
}

TEST_CASE("surface impedance reproduces the tabulated reactance") {
  const double table[3] = {240.0, 257.0, 276.0};
  const double freq[3] = {26e9, 28e9, 30e9};
  for (int i = 0; i < 3; ++i) {
    const cplx z = surface_impedance(freq[i], kLayer, kSilver);
    CHECK(z.imag() == rel(table[i], 0.01));
    CHECK(z.imag() == rel(static_cast<double>(ref_xs(freq[i], 2.4L, 2e-3L, 3.15e6L)), 1e-12));
  }
  const cplx z26 = surface_impedance(26e9, kLayer, kSilver);
  CHECK(z26.real() == rel(0.18, 0.02));
}

TEST_CASE("reactance is strictly increasing in f, h and eps_r") {
  double prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double x = surface_impedance(21e9 + i * 0.21e9, kLayer, kSilver).imag();
    CHECK(x > prev);
    prev = x;
  }
  prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    DielectricSpec d = kLayer;
    d.thickness_h = 0.1e-3 + i * 0.05e-3;
    const double x = surface_impedance(26e9, d, kSilver).imag();
    CHECK(x > prev);
    prev = x;
  }
  prev = 0.0;
  for (int i = 0; i < 100; ++i) {
    DielectricSpec d = kLayer;
    d.eps_r = 1.01 + i * 0.1;
    const double x = surface_impedance(26e9, d, kSilver).imag();
    CHECK(x > prev);
    prev = x;
  }
}

TEST_CASE("porosity and effective permittivity") {
  CHECK(porosity({0.5e-3, 2e-3}) * 100.0 == rel(19.63, 1e-3));
  CHECK(porosity({0.0, 2e-3}) == 0.0);
  CHECK(porosity({1e-3, 2e-3}) == rel(kPi / 4.0));

  CHECK(effective_permittivity(2.8, 0.1963) == rel(2.394, 5e-4));
  CHECK(effective_permittivity(2.8, 0.0) == rel(2.8));
  // eps_r = 2.8, rho = 0.5: 2.8 * 6.7 / 10.3 = 938/515 exactly.
  CHECK(effective_permittivity(2.8, 0.5) == rel(938.0 / 515.0, 1e-12));
  // A fully porous layer tends to air.
  CHECK(effective_permittivity(2.8, 1.0 - 1e-9) == rel(1.0, 1e-8));

  for (double er = 1.05; er < 12.0; er += 0.37) {
    for (double rho = 0.0; rho < 0.999; rho += 0.033) {
      const double e = effective_permittivity(er, rho);
      REQUIRE(e > 1.0);
      REQUIRE(e <= er * (1.0 + 1e-15));
    }
  }
}

TEST_CASE("field profile") {
  const SurfaceConfig surface;
  const SurfaceWaveSolution sol = surface.mode(26e9);
  const FieldTriplet at0 = field_profile(2.5, 0.0, 0.0, 1.0, 26e9, sol);
  CHECK(at0.Hy.real() == rel(2.5));
  CHECK(std::abs(at0.Hy.imag()) < 1e-9);
  for (double x : {0.0, 1e-3, 4e-3}) {
    for (double z : {0.0, 0.02, 0.3}) {
      const FieldTriplet t = field_profile(1.0, x, z, 0.5, 26e9, sol);
      const cplx ex_hy = sol.gamma_z / (cplx(0.0, 1.0) * angular(26e9) * C::eps0);
      CHECK(std::abs(t.Ex / t.Hy - ex_hy) < 1e-9 * std::abs(ex_hy));
      CHECK(std::abs(t.Ez / t.Ex - (-sol.gamma_x / sol.gamma_z)) < 1e-12 * std::abs(sol.gamma_x / sol.gamma_z));
    }
  }
  const double xd = 1.0 / sol.gamma_x.real();
  const double ratio = std::abs(field_profile(1.0, xd, 0.1, 1.0, 26e9, sol).Hy) /
                       std::abs(field_profile(1.0, 0.0, 0.1, 1.0, 26e9, sol).Hy);
  CHECK(ratio == rel(std::exp(-1.0), 1e-9));
  CHECK_THROWS_AS(field_profile(1.0, 0.0, 0.0, 0.0, 26e9, sol), std::domain_error);
}

TEST_CASE("equivalent loss rate") {
  const double n = 1.185;
  const LossRate full = equivalent_loss_rate(26e9, n, 0.0155, 1.0);
  const double w = angular(26e9);
  const double ref = 20.0 / std::log(10.0) * w * n * 0.0155 / (2.0 * C::c0);
  CHECK(full.db_per_m == rel(ref, 1e-12));
  CHECK(full.db_per_m == rel(43.5, 2e-3));
  CHECK(full.sigma_eq == rel(w * C::eps0 * n * n * 0.0155, 1e-12));
  // Solving the linear relation for a 28.56 dB/m target.
  const double kappa = 28.56 / full.db_per_m;
  CHECK(kappa == rel(0.657, 2e-3));
  CHECK(equivalent_loss_rate(26e9, n, 0.0, 1.0).db_per_m == 0.0);
}

TEST_CASE("surface mode bounds across the band") {
  const SurfaceConfig surface;
  const double eps_eff = surface.effective_permittivity();
  for (double f = 21e9; f <= 42e9; f += 1e9) {
    const SurfaceWaveSolution s = surface.mode(f);
    CHECK(s.gamma_x.real() > 0.0);
    CHECK(s.gamma_z.imag() > 0.0);
    CHECK(s.n_eff >= 1.0);
    CHECK(s.n_eff <= std::sqrt(eps_eff));
  }
}

TEST_CASE("material table") {
  const MaterialDb db = MaterialDb::builtin();
  CHECK(db.metal("silver_ink").sigma == 3.15e6);
  CHECK(db.metal("galinstan").sigma == 3.46e6);
  CHECK(db.metal("copper").sigma == 59.6e6);
  CHECK(db.metal("pec").is_pec());
  CHECK(db.dielectric("resin").eps_r == 2.8);
  CHECK(db.dielectric("ptfe").tan_delta == 0.00005);
  const MaterialDb again = MaterialDb::parse(db.to_text());
  CHECK(again.to_text() == db.to_text());
  CHECK_THROWS(MaterialDb::parse("bad 1 2\n"));
  CHECK_THROWS(db.metal("gold"));
}

#include "surfwave/physics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace surfwave {

namespace {

using C = PhysicalConstants;

void require_positive_frequency(double f) {
  if (!(f > 0.0) || !std::isfinite(f)) {
    throw std::domain_error("frequency must be positive and finite, got " + std::to_string(f));
  }
}

// (eps_r - 1)/eps_r * h + Delta/2: the common bracket of gamma_x and Zs.
double inductive_length(const DielectricSpec& d, double delta) {
  return (d.eps_r - 1.0) / d.eps_r * d.thickness_h + 0.5 * delta;
}

}  // namespace

void DielectricSpec::validate() const {
  if (!(eps_r > 1.0)) {
    throw std::domain_error("dielectric eps_r must exceed 1, got " + std::to_string(eps_r));
  }
  if (!(tan_delta >= 0.0)) {
    throw std::domain_error("dielectric tan_delta must be non-negative");
  }
  if (!(thickness_h > 0.0)) {
    throw std::domain_error("dielectric thickness must be positive");
  }
}

void MetalSpec::validate() const {
  if (!(sigma > 0.0)) {
    throw std::domain_error("metal conductivity must be positive, got " + std::to_string(sigma));
  }
}

void PorosityGeometry::validate() const {
  if (!(cavity_radius_r >= 0.0) || !(cavity_pitch_ws > 0.0) ||
      2.0 * cavity_radius_r > cavity_pitch_ws) {
    throw std::domain_error("porosity geometry requires 0 <= 2r <= ws");
  }
}

double skin_depth(double f, const MetalSpec& metal) {
  require_positive_frequency(f);
  metal.validate();
  if (metal.is_pec()) {
    return 0.0;
  }
  return std::sqrt(2.0 / (angular(f) * C::mu0 * metal.sigma));
}

cplx gamma_x(double f, const DielectricSpec& dielectric, const MetalSpec& metal) {
  dielectric.validate();
  const double delta = skin_depth(f, metal);
  const double w = angular(f);
  const double k0sq = w * w * C::mu0 * C::eps0;
  return k0sq * cplx(inductive_length(dielectric, delta), -0.5 * delta);
}

cplx gamma_z(double f, cplx gx) {
  require_positive_frequency(f);
  const double w = angular(f);
  cplx gz = std::sqrt(cplx(-w * w * C::mu0 * C::eps0, 0.0) - gx * gx);
  if (gz.real() < 0.0 || (gz.real() == 0.0 && gz.imag() < 0.0)) {
    gz = -gz;
  }
  return gz;
}

double effective_index(double f, cplx gz) {
  require_positive_frequency(f);
  if (!(gz.imag() > 0.0)) {
    throw std::domain_error("effective index needs Im(gamma_z) > 0");
  }
  return gz.imag() * C::c0 / angular(f);
}

cplx surface_impedance(double f, const DielectricSpec& dielectric, const MetalSpec& metal) {
  dielectric.validate();
  const double delta = skin_depth(f, metal);
  const double wmu = angular(f) * C::mu0;
  return {wmu * 0.5 * delta, wmu * inductive_length(dielectric, delta)};
}

double porosity(const PorosityGeometry& geom) {
  geom.validate();
  const double r = geom.cavity_radius_r;
  const double ws = geom.cavity_pitch_ws;
  return kPi * r * r / (ws * ws);
}

double effective_permittivity(double eps_r, double rho) {
  if (!(eps_r > 1.0)) {
    throw std::domain_error("effective_permittivity needs eps_r > 1");
  }
  if (!(rho >= 0.0 && rho < 1.0)) {
    throw std::domain_error("effective_permittivity needs 0 <= rho < 1");
  }
  const double num = eps_r * (1.0 + 3.0 * eps_r + 3.0 * rho * (1.0 - eps_r));
  const double den = 1.0 + 3.0 * eps_r + rho * (eps_r - 1.0);
  return num / den;
}

FieldTriplet field_profile(double amplitude, double x, double z, double d, double f,
                           const SurfaceWaveSolution& sol) {
  require_positive_frequency(f);
  if (!(d > 0.0)) {
    throw std::domain_error("field_profile needs a positive propagation distance d");
  }
  if (x < 0.0) {
    throw std::domain_error("field_profile needs x >= 0 (above the surface)");
  }
  const cplx common = amplitude / std::sqrt(d) * std::exp(-sol.gamma_z * z) *
                      std::exp(-sol.gamma_x * x);
  const cplx jweps = cplx(0.0, angular(f) * C::eps0);
  FieldTriplet out;
  out.Hy = common;
  out.Ex = common * sol.gamma_z / jweps;
  out.Ez = -common * sol.gamma_x / jweps;
  return out;
}

LossRate equivalent_loss_rate(double f, double n_eff, double tan_delta, double confinement_kappa) {
  require_positive_frequency(f);
  if (!(n_eff > 0.0) || !(confinement_kappa >= 0.0) || !(tan_delta >= 0.0)) {
    throw std::domain_error("equivalent_loss_rate needs n_eff > 0, kappa >= 0, tan_delta >= 0");
  }
  const double w = angular(f);
  const double neper = w * n_eff * tan_delta * confinement_kappa / (2.0 * C::c0);
  LossRate out;
  out.db_per_m = 20.0 / std::log(10.0) * neper;
  out.sigma_eq = w * C::eps0 * n_eff * n_eff * tan_delta * confinement_kappa;
  return out;
}

SurfaceWaveSolution solve_surface_wave(double f, const DielectricSpec& solid_dielectric,
                                       const MetalSpec& ground, const PorosityGeometry& geom) {
  DielectricSpec eff = solid_dielectric;
  eff.eps_r = effective_permittivity(solid_dielectric.eps_r, porosity(geom));
  SurfaceWaveSolution sol;
  sol.skin_depth = skin_depth(f, ground);
  sol.gamma_x = gamma_x(f, eff, ground);
  sol.gamma_z = gamma_z(f, sol.gamma_x);
  sol.n_eff = effective_index(f, sol.gamma_z);
  sol.Zs = surface_impedance(f, eff, ground);
  return sol;
}

}  // namespace surfwave

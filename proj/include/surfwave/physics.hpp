#pragma once

// Closed-form model of the TM surface wave bound to a (porous) dielectric
// layer on a metal ground: skin depth, propagation coefficients, surface
// impedance, porosity homogenisation and the field profile.

#include <complex>
#include <limits>

namespace surfwave {

using cplx = std::complex<double>;

namespace detail {
constexpr double constexpr_sqrt(double x) {
  double r = x > 1.0 ? x : 1.0;
  for (int i = 0; i < 200; ++i) {
    r = 0.5 * (r + x / r);
  }
  return r;
}
}  // namespace detail

struct PhysicalConstants {
  static constexpr double pi = 3.14159265358979323846;
  static constexpr double eps0 = 8.854e-12;       // F/m
  static constexpr double mu0 = 4.0 * pi * 1e-7;  // H/m
  static constexpr double c0 = 1.0 / detail::constexpr_sqrt(mu0 * eps0);
  static constexpr double eta0 = mu0 * c0;
};

constexpr double kPi = PhysicalConstants::pi;

inline constexpr double angular(double f) { return 2.0 * kPi * f; }

struct DielectricSpec {
  double eps_r = 2.8;
  double tan_delta = 0.0155;
  double tan_delta_ref_freq = 26e9;
  double thickness_h = 2e-3;

  void validate() const;
};

/// Conductor. `sigma` may be +infinity for a perfect electric conductor.
struct MetalSpec {
  double sigma = 3.15e6;

  static MetalSpec pec() { return {std::numeric_limits<double>::infinity()}; }
  bool is_pec() const { return sigma == std::numeric_limits<double>::infinity(); }
  void validate() const;
};

struct PorosityGeometry {
  double cavity_radius_r = 0.5e-3;
  double cavity_pitch_ws = 2e-3;

  void validate() const;
};

struct SurfaceWaveSolution {
  cplx gamma_x;
  cplx gamma_z;
  double n_eff = 1.0;
  cplx Zs;
  double skin_depth = 0.0;
};

struct FieldTriplet {
  cplx Hy;
  cplx Ex;
  cplx Ez;
};

/// Delta = sqrt(2 / (omega mu0 sigma)); zero for PEC.
double skin_depth(double f, const MetalSpec& metal);

/// Transverse (normal to the surface) propagation coefficient.
/// `dielectric.eps_r` is used as given; pass the effective permittivity when
/// the layer is porous.
cplx gamma_x(double f, const DielectricSpec& dielectric, const MetalSpec& metal);

/// Longitudinal propagation coefficient, branch Re >= 0 (ties: Im >= 0).
cplx gamma_z(double f, cplx gx);

double effective_index(double f, cplx gz);

cplx surface_impedance(double f, const DielectricSpec& dielectric, const MetalSpec& metal);

/// Cavity area fraction of the square cavity lattice.
double porosity(const PorosityGeometry& geom);

double effective_permittivity(double eps_r, double rho);

/// Hy, Ex, Ez at height x above the surface and position z along it, for a
/// wave that has travelled a distance d from its source. The time factor is
/// omitted.
FieldTriplet field_profile(double amplitude, double x, double z, double d, double f,
                           const SurfaceWaveSolution& sol);

struct LossRate {
  double db_per_m = 0.0;  // field (and power) attenuation in dB per metre
  double sigma_eq = 0.0;  // conductivity of the equivalent 2D medium, S/m
};

/// Dielectric loss of the bound mode mapped onto an equivalent conductive
/// medium of index n_eff. `confinement_kappa` is the fraction of the mode's
/// loss that the dielectric contributes.
LossRate equivalent_loss_rate(double f, double n_eff, double tan_delta, double confinement_kappa);

/// Full chain: porosity -> effective permittivity -> gamma_x, gamma_z, n_eff, Zs.
SurfaceWaveSolution solve_surface_wave(double f, const DielectricSpec& solid_dielectric,
                                       const MetalSpec& ground, const PorosityGeometry& geom);

}  // namespace surfwave

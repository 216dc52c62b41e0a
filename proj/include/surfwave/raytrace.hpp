#pragma once

// Image-method path-loss model for a long straight pathway. The two walls are
// replaced by an infinite row of mirror sources spaced one pathway width
// apart; image m reaches the receiver after |m| wall reflections along a path
// sqrt(d^2 + (m wc)^2). Rays are summed coherently.

#include <filesystem>
#include <string>
#include <vector>

#include "surfwave/physics.hpp"

namespace surfwave {

struct RayPathModel {
  double wall_separation = 10e-3;  // wc
  MetalSpec wall{3.46e6};
  MetalSpec ground{3.15e6};
  DielectricSpec surface{2.1, 0.00005, 26e9, 2e-3};  // solid layer, before porosity
  PorosityGeometry cavities{};
  double confinement_kappa = 1.0;  // all modal loss taken in the dielectric
  double frequency = 26e9;
  /// Images per side. 0 sizes the sum from the distance (see image_count) and
  /// applies a Hann taper over its outer half; a positive value sums exactly
  /// that many images per side without a taper.
  int max_images = 0;
  double image_margin = 3.0;  // auto mode: multiple of the stationary image index
  int min_images = 64;

  void validate() const;
  double n_eff() const;
  /// Field attenuation of the medium in nepers per metre.
  double alpha() const;
  double beta() const;
  /// Auto-mode image count per side at distance d.
  int image_count(double d) const;
};

/// Reflection coefficient of a metal wall for a ray arriving at
/// `incidence_angle` from the wall normal, seen from a medium of index n_eff.
cplx wall_reflection(double f, const MetalSpec& metal, double incidence_angle, double n_eff);

/// Coherent image sum at distance d (complex field, arbitrary units).
cplx guided_field(const RayPathModel& model, double d);

/// Guided power at d in dB relative to the guided power at 1 m.
double guided_power(const RayPathModel& model, double d);

struct ReferenceCurves {
  double space_db = 0.0;      // -20 log10 d
  double nonguided_db = 0.0;  // -10 log10 d - alpha_dB d (relative to 1 m)
};

/// `alpha_db_per_m` is the dielectric loss rate of the surface medium.
ReferenceCurves reference_curves(double f, double d, double alpha_db_per_m);

struct RaytraceRow {
  double d = 0.0;
  double pec_db = 0.0;
  double copper_db = 0.0;
  double galinstan_db = 0.0;
  double space_db = 0.0;
  double nonguided_db = 0.0;
  double coax_db = 0.0;  // NaN when no coax attenuation is configured
};

struct RaytraceSweep {
  RayPathModel base;  // wall metal is overridden per curve
  MetalSpec pec = MetalSpec::pec();
  MetalSpec copper{59.6e6};
  MetalSpec galinstan{3.46e6};
  double d_min = 1.0;
  double d_max = 50.0;
  double d_step = 0.5;
  double coax_db_per_m = -1.0;  // negative: not configured
};

std::vector<RaytraceRow> raytrace_sweep(const RaytraceSweep& sweep);

/// Linear fit of the rows' Galinstan curve; returns loss rate in dB/m.
double fitted_rate(const std::vector<RaytraceRow>& rows, double RaytraceRow::*column);

/// First distance where `column` rises above the coax curve and stays there;
/// negative if none or coax is not configured.
double coax_crossover(const std::vector<RaytraceRow>& rows, double RaytraceRow::*column);

/// d_m,pec_db,copper_db,galinstan_db,space_db,nonguided_db,coax_db
std::string raytrace_csv(const std::vector<RaytraceRow>& rows);
void write_raytrace_csv(const std::vector<RaytraceRow>& rows, const std::filesystem::path& path);

}  // namespace surfwave

#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include "surfwave/physics.hpp"

namespace surfwave {

/// Physical description of the reconfigurable surface and its transducers.
/// Defaults are the prototype values (resin layer, silver-ink ground and pins,
/// WR-28 launchers).
struct SurfaceConfig {
  DielectricSpec dielectric{};       // solid (non-porous) layer
  MetalSpec ground{3.15e6};
  MetalSpec pin_metal{3.15e6};
  PorosityGeometry cavities{};
  double ground_thickness = 0.05e-3;
  double aperture_width = 7.112e-3;   // w_a
  double aperture_height = 3.566e-3;  // h_a
  double transducer_thickness = 1e-3;
  double transducer_gap = 0.5e-3;     // not modelled by the 2D solver
  double band_low = 21e9;
  double band_high = 42e9;

  double effective_permittivity() const;
  SurfaceWaveSolution mode(double f) const;
};

struct DielectricMaterial {
  double eps_r = 0.0;
  double tan_delta = 0.0;
  double ref_freq = 0.0;

  DielectricSpec with_thickness(double h) const { return {eps_r, tan_delta, ref_freq, h}; }
};

/// Line-oriented material table:
///   <name> <sigma_S_per_m>                       (metal)
///   <name> <eps_r> <tan_delta> <ref_freq_hz>     (dielectric)
/// '#' starts a comment. `pec` may be given as `inf`.
class MaterialDb {
 public:
  static MaterialDb builtin();
  static MaterialDb parse(std::string_view text);
  static MaterialDb load(const std::filesystem::path& path);

  const MetalSpec& metal(const std::string& name) const;
  const DielectricMaterial& dielectric(const std::string& name) const;
  bool has_metal(const std::string& name) const { return metals_.count(name) != 0; }
  bool has_dielectric(const std::string& name) const { return dielectrics_.count(name) != 0; }

  std::string to_text() const;

  void add_metal(const std::string& name, MetalSpec m) { metals_[name] = m; }
  void add_dielectric(const std::string& name, DielectricMaterial d) { dielectrics_[name] = d; }

 private:
  std::map<std::string, MetalSpec> metals_;
  std::map<std::string, DielectricMaterial> dielectrics_;
};

}  // namespace surfwave

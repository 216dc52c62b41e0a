#include "surfwave/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "surfwave/analysis.hpp"
#include "surfwave/io.hpp"

namespace surfwave {

namespace {
using C = PhysicalConstants;
}

void RayPathModel::validate() const {
  if (!(wall_separation > 0.0)) throw std::invalid_argument("wall separation must be positive");
  if (max_images < 0) throw std::invalid_argument("max_images must be >= 0");
  if (!(frequency > 0.0)) throw std::invalid_argument("frequency must be positive");
  wall.validate();
  ground.validate();
  surface.validate();
  cavities.validate();
}

double RayPathModel::n_eff() const {
  return solve_surface_wave(frequency, surface, ground, cavities).n_eff;
}

double RayPathModel::alpha() const {
  const LossRate loss =
      equivalent_loss_rate(frequency, n_eff(), surface.tan_delta, confinement_kappa);
  return loss.db_per_m * std::log(10.0) / 20.0;
}

double RayPathModel::beta() const { return angular(frequency) * n_eff() / C::c0; }

int RayPathModel::image_count(double d) const {
  // Image m is stationary for the guided mode of order k when
  // m wc / L = sin(psi_k), sin(psi_k) = k pi / (beta wc). The highest
  // propagating order sets the largest image index that adds coherently.
  const double b = beta();
  const int kmax = static_cast<int>(std::floor(b * wall_separation / kPi));
  double tan_psi = 0.0;
  if (kmax >= 1) {
    const double s = std::min(kmax * kPi / (b * wall_separation), 0.999);
    tan_psi = s / std::sqrt(1.0 - s * s);
  }
  const double m = image_margin * d * tan_psi / wall_separation;
  return std::max(min_images, static_cast<int>(std::ceil(m)));
}

cplx wall_reflection(double f, const MetalSpec& metal, double incidence_angle, double n_eff) {
  if (metal.is_pec()) return {-1.0, 0.0};
  const double w = angular(f);
  const cplx zm = cplx(1.0, 1.0) * std::sqrt(w * C::mu0 / (2.0 * metal.sigma));
  const double zw = C::eta0 / n_eff;
  const cplx a = zm * std::cos(incidence_angle);
  return (a - zw) / (a + zw);
}

cplx guided_field(const RayPathModel& model, double d) {
  if (!(d > 0.0)) throw std::domain_error("distance must be positive");
  const double n = model.n_eff();
  const double alpha = model.alpha();
  const double beta = model.beta();
  const double wc = model.wall_separation;
  const bool taper = model.max_images == 0;
  const int M = taper ? model.image_count(d) : model.max_images;
  const double half = 0.5 * M;
  cplx sum = 0.0;
  // Sum outward from the direct ray; the +m and -m images are equal. Image m
  // meets the walls m times, always at its own incidence angle.
  for (int m = 0; m <= M; ++m) {
    const double lateral = m * wc;
    const double L = std::hypot(d, lateral);
    cplx gamma_pow = 1.0;
    if (m > 0) {
      const double theta = std::acos(std::min(1.0, lateral / L));
      gamma_pow = std::pow(wall_reflection(model.frequency, model.wall, theta, n), m);
    }
    double weight = m == 0 ? 1.0 : 2.0;
    if (taper && m > half) {
      weight *= 0.5 * (1.0 + std::cos(kPi * (m - half) / (M - half)));
    }
    sum += weight * gamma_pow * std::exp(cplx(-alpha * L, -beta * L)) / std::sqrt(L);
  }
  return sum;
}

double guided_power(const RayPathModel& model, double d) {
  const double p = std::norm(guided_field(model, d));
  const double p1 = std::norm(guided_field(model, 1.0));
  return 10.0 * std::log10(p / p1);
}

ReferenceCurves reference_curves(double /*f*/, double d, double alpha_db_per_m) {
  if (!(d > 0.0)) throw std::domain_error("distance must be positive");
  ReferenceCurves r;
  r.space_db = -20.0 * std::log10(d);
  r.nonguided_db = -10.0 * std::log10(d) - alpha_db_per_m * (d - 1.0);
  return r;
}

std::vector<RaytraceRow> raytrace_sweep(const RaytraceSweep& sweep) {
  sweep.base.validate();
  if (!(sweep.d_min > 0.0) || !(sweep.d_max > sweep.d_min) || !(sweep.d_step > 0.0)) {
    throw std::invalid_argument("raytrace distances must satisfy 0 < d_min < d_max, step > 0");
  }
  RayPathModel pec = sweep.base, cu = sweep.base, ga = sweep.base;
  pec.wall = sweep.pec;
  cu.wall = sweep.copper;
  ga.wall = sweep.galinstan;
  const double alpha_db = sweep.base.alpha() * 20.0 / std::log(10.0);
  const cplx p1 = guided_field(pec, 1.0), c1 = guided_field(cu, 1.0), g1 = guided_field(ga, 1.0);
  auto rel = [](cplx v, cplx ref) { return 10.0 * std::log10(std::norm(v) / std::norm(ref)); };
  std::vector<RaytraceRow> rows;
  const int n = static_cast<int>(std::floor((sweep.d_max - sweep.d_min) / sweep.d_step + 1e-9));
  for (int i = 0; i <= n; ++i) {
    const double d = sweep.d_min + i * sweep.d_step;
    RaytraceRow r;
    r.d = d;
    r.pec_db = rel(guided_field(pec, d), p1);
    r.copper_db = rel(guided_field(cu, d), c1);
    r.galinstan_db = rel(guided_field(ga, d), g1);
    const ReferenceCurves ref = reference_curves(sweep.base.frequency, d, alpha_db);
    r.space_db = ref.space_db;
    r.nonguided_db = ref.nonguided_db;
    r.coax_db = sweep.coax_db_per_m >= 0.0 ? -sweep.coax_db_per_m * (d - 1.0)
                                           : std::numeric_limits<double>::quiet_NaN();
    rows.push_back(r);
  }
  return rows;
}

double fitted_rate(const std::vector<RaytraceRow>& rows, double RaytraceRow::*column) {
  std::vector<double> d, v;
  for (const auto& r : rows) {
    d.push_back(r.d);
    v.push_back(r.*column);
  }
  return attenuation_fit(d, v).slope_db_per_m;
}

double coax_crossover(const std::vector<RaytraceRow>& rows, double RaytraceRow::*column) {
  double cross = -1.0;
  for (const auto& r : rows) {
    if (!std::isfinite(r.coax_db)) return -1.0;
    if (r.*column > r.coax_db) {
      if (cross < 0.0) cross = r.d;
    } else {
      cross = -1.0;
    }
  }
  return cross;
}

std::string raytrace_csv(const std::vector<RaytraceRow>& rows) {
  std::ostringstream out;
  out << "d_m,pec_db,copper_db,galinstan_db,space_db,nonguided_db,coax_db\n";
  for (const auto& r : rows) {
    out << format_double(r.d) << ',' << format_double(r.pec_db) << ','
        << format_double(r.copper_db) << ',' << format_double(r.galinstan_db) << ','
        << format_double(r.space_db) << ',' << format_double(r.nonguided_db) << ','
        << (std::isfinite(r.coax_db) ? format_double(r.coax_db) : std::string()) << '\n';
  }
  return out.str();
}

void write_raytrace_csv(const std::vector<RaytraceRow>& rows, const std::filesystem::path& path) {
  write_file_atomic(path, raytrace_csv(rows));
}

}  // namespace surfwave

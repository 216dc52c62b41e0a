#include "surfwave/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "surfwave/io.hpp"

namespace surfwave {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

bool usable(const TransmissionCurve& c, std::size_t i) {
  return (c.valid.empty() || c.valid[i]) && std::isfinite(c.s21_db[i]);
}

}  // namespace

void TransmissionCurve::check() const {
  if (frequencies.size() != s21_db.size() || (!valid.empty() && valid.size() != s21_db.size())) {
    throw std::invalid_argument("transmission curve arrays differ in length");
  }
  for (std::size_t i = 1; i < frequencies.size(); ++i) {
    if (!(frequencies[i] > frequencies[i - 1])) {
      throw std::invalid_argument("transmission curve frequencies must strictly increase");
    }
  }
}

double TransmissionCurve::at(double f) const {
  if (frequencies.empty() || f < frequencies.front() || f > frequencies.back()) {
    return kNaN;
  }
  auto it = std::lower_bound(frequencies.begin(), frequencies.end(), f);
  std::size_t hi = static_cast<std::size_t>(it - frequencies.begin());
  if (frequencies[hi] == f) {
    return usable(*this, hi) ? s21_db[hi] : kNaN;
  }
  const std::size_t lo = hi - 1;
  if (!usable(*this, lo) || !usable(*this, hi)) {
    return kNaN;
  }
  const double t = (f - frequencies[lo]) / (frequencies[hi] - frequencies[lo]);
  return s21_db[lo] + t * (s21_db[hi] - s21_db[lo]);
}

TransmissionCurve restrict_band(const TransmissionCurve& curve, double low, double high) {
  curve.check();
  TransmissionCurve out;
  out.layout_id = curve.layout_id;
  out.probe_id = curve.probe_id;
  out.distance = curve.distance;
  // Half a hertz of slack so band edges given in GHz match sampled grids.
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double f = curve.frequencies[i];
    if (f < low - 0.5 || f > high + 0.5) continue;
    out.frequencies.push_back(f);
    out.s21_db.push_back(curve.s21_db[i]);
    out.valid.push_back(curve.valid.empty() ? true : curve.valid[i]);
  }
  return out;
}

PeakEstimate optimal_frequency(const TransmissionCurve& curve) {
  curve.check();
  if (curve.size() < 3) {
    throw std::invalid_argument("optimal_frequency needs at least three samples");
  }
  std::optional<std::size_t> best;
  std::size_t first = curve.size(), last = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!usable(curve, i)) continue;
    first = std::min(first, i);
    last = std::max(last, i);
    if (!best || curve.s21_db[i] > curve.s21_db[*best]) {
      best = i;  // strict comparison keeps the lower frequency on ties
    }
  }
  if (!best) {
    throw std::invalid_argument("transmission curve has no valid samples");
  }
  PeakEstimate est;
  est.index = *best;
  est.frequency = curve.frequencies[*best];
  est.value_db = curve.s21_db[*best];
  const std::size_t i = *best;
  if (i == first || i == last) {
    est.boundary_peak = true;
    return est;
  }
  if (!usable(curve, i - 1) || !usable(curve, i + 1)) {
    return est;
  }
  // Vertex of the parabola through the peak triplet (non-uniform spacing).
  const double x0 = curve.frequencies[i - 1], x1 = curve.frequencies[i],
               x2 = curve.frequencies[i + 1];
  const double y0 = curve.s21_db[i - 1], y1 = curve.s21_db[i], y2 = curve.s21_db[i + 1];
  const double d01 = (y1 - y0) / (x1 - x0);
  const double d12 = (y2 - y1) / (x2 - x1);
  const double a = (d12 - d01) / (x2 - x0);
  if (a < 0.0) {
    const double b = d01 - a * (x0 + x1);
    double xv = -b / (2.0 * a);
    xv = std::clamp(xv, x0, x2);
    est.frequency = xv;
    est.value_db = y0 + d01 * (xv - x0) + a * (xv - x0) * (xv - x1);
  }
  return est;
}

Band half_power_band(const TransmissionCurve& curve, double drop_db) {
  const PeakEstimate peak = optimal_frequency(curve);
  const double level = curve.s21_db[peak.index] - drop_db;
  const auto& f = curve.frequencies;
  const auto& s = curve.s21_db;
  Band band;
  band.low_open = band.high_open = true;
  std::size_t first = 0, last = curve.size() - 1;
  while (first < curve.size() && !usable(curve, first)) ++first;
  while (last > 0 && !usable(curve, last)) --last;
  band.low = f[first];
  band.high = f[last];
  // Outermost crossings: scan inward from each edge for the first segment that
  // goes from below the level to at or above it.
  for (std::size_t i = first; i < peak.index; ++i) {
    if (!usable(curve, i) || !usable(curve, i + 1)) continue;
    if (s[i] < level && s[i + 1] >= level) {
      band.low = f[i] + (level - s[i]) / (s[i + 1] - s[i]) * (f[i + 1] - f[i]);
      band.low_open = false;
      break;
    }
  }
  for (std::size_t i = last; i > peak.index; --i) {
    if (!usable(curve, i) || !usable(curve, i - 1)) continue;
    if (s[i] < level && s[i - 1] >= level) {
      band.high = f[i] - (level - s[i]) / (s[i - 1] - s[i]) * (f[i] - f[i - 1]);
      band.high_open = false;
      break;
    }
  }
  if (band.low_open && band.high_open && !(band.high > band.low)) {
    throw std::invalid_argument("half-power band is empty");
  }
  return band;
}

double band_average_s21(const TransmissionCurve& curve, const Band& band) {
  curve.check();
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    const double fi = curve.frequencies[i];
    if (fi >= band.low && fi <= band.high && usable(curve, i)) {
      sum += curve.s21_db[i];
      ++n;
    }
  }
  if (n == 0) {
    throw std::invalid_argument("no samples inside the averaging band");
  }
  return sum / static_cast<double>(n);
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw std::invalid_argument("line fit needs two or more (x, y) pairs");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  if (!(sxx > 0.0)) {
    throw std::invalid_argument("line fit needs distinct x values");
  }
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (syy <= 0.0) {
    fit.r2 = 1.0;
  } else {
    double ss_res = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
      const double r = y[i] - (fit.intercept + fit.slope * x[i]);
      ss_res += r * r;
    }
    fit.r2 = std::clamp(1.0 - ss_res / syy, 0.0, 1.0);
  }
  return fit;
}

AttenuationFit attenuation_fit(const std::vector<double>& distances,
                               const std::vector<double>& levels_db) {
  std::vector<double> d, v;
  for (std::size_t i = 0; i < distances.size() && i < levels_db.size(); ++i) {
    if (std::isfinite(levels_db[i])) {
      d.push_back(distances[i]);
      v.push_back(levels_db[i]);
    }
  }
  std::vector<double> uniq = d;
  std::sort(uniq.begin(), uniq.end());
  uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
  if (uniq.size() < 3) {
    throw std::invalid_argument("attenuation fit needs three or more distinct distances");
  }
  const LineFit line = fit_line(d, v);
  AttenuationFit out;
  out.slope_db_per_m = -line.slope;
  out.intercept_db = line.intercept;
  out.r2 = line.r2;
  out.points = d.size();
  return out;
}

AttenuationFit attenuation_fit(const std::vector<TransmissionCurve>& curves, double f) {
  std::vector<double> d, v;
  for (const auto& c : curves) {
    d.push_back(c.distance);
    v.push_back(c.at(f));
  }
  return attenuation_fit(d, v);
}

MetricsRow summarize(const TransmissionCurve& curve) {
  MetricsRow row;
  row.layout = curve.layout_id;
  row.d_mm = curve.distance * 1e3;
  const PeakEstimate peak = optimal_frequency(curve);
  const Band band = half_power_band(curve);
  row.f_opt_ghz = peak.frequency * 1e-9;
  row.band_lo_ghz = band.low * 1e-9;
  row.band_hi_ghz = band.high * 1e-9;
  row.avg_s21_db = band_average_s21(curve, band);
  return row;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
  std::ostringstream out;
  out << "layout,d_mm,f_opt_ghz,band_lo_ghz,band_hi_ghz,avg_s21_db,slope_db_per_m,r2,"
         "isolation_db\n";
  auto opt = [](const std::optional<double>& v) { return v ? format_double(*v) : std::string(); };
  for (const auto& r : rows) {
    out << r.layout << ',' << format_double(r.d_mm) << ',' << format_double(r.f_opt_ghz) << ','
        << format_double(r.band_lo_ghz) << ',' << format_double(r.band_hi_ghz) << ','
        << format_double(r.avg_s21_db) << ',' << opt(r.slope_db_per_m) << ',' << opt(r.r2) << ','
        << opt(r.isolation_db) << '\n';
  }
  return out.str();
}

void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path) {
  write_file_atomic(path, metrics_csv(rows));
}

}  // namespace surfwave

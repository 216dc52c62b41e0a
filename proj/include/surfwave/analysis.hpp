#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace surfwave {

/// S21-like spectrum of one probe. Invalid samples (reference underflow) carry
/// NaN in `s21_db` and false in `valid`.
struct TransmissionCurve {
  std::string layout_id;
  std::string probe_id;
  double distance = 0.0;  // m
  std::vector<double> frequencies;  // Hz, strictly increasing
  std::vector<double> s21_db;
  std::vector<bool> valid;

  std::size_t size() const { return frequencies.size(); }
  void check() const;
  /// Linear interpolation in frequency; NaN outside the span or next to an
  /// invalid sample.
  double at(double f) const;
};

struct PeakEstimate {
  double frequency = 0.0;
  double value_db = 0.0;
  std::size_t index = 0;      // sample holding the raw maximum
  bool boundary_peak = false; // maximum sits on the first or last valid sample
};

PeakEstimate optimal_frequency(const TransmissionCurve& curve);

/// Samples of `curve` with frequency in [low, high].
TransmissionCurve restrict_band(const TransmissionCurve& curve, double low, double high);

struct Band {
  double low = 0.0;
  double high = 0.0;
  bool low_open = false;   // no crossing found below the peak; clamped to the edge
  bool high_open = false;
  double width() const { return high - low; }
  bool contains(double f) const { return f >= low && f <= high; }
};

/// Outermost crossings of (peak - drop_db) on each side of the peak.
Band half_power_band(const TransmissionCurve& curve, double drop_db = 3.0);

/// Mean of the valid dB samples with frequency inside [band.low, band.high].
double band_average_s21(const TransmissionCurve& curve, const Band& band);

struct LineFit {
  double slope = 0.0;      // dB per unit of x
  double intercept = 0.0;
  double r2 = 1.0;
};

/// Ordinary least squares. A zero-variance response gives r2 = 1.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

struct AttenuationFit {
  double slope_db_per_m = 0.0;  // positive for loss
  double intercept_db = 0.0;
  double r2 = 1.0;
  std::size_t points = 0;
};

/// Fits s21(f) against distance for curves at three or more distinct distances.
AttenuationFit attenuation_fit(const std::vector<TransmissionCurve>& curves, double f);
/// Same, from explicit (distance m, level dB) pairs.
AttenuationFit attenuation_fit(const std::vector<double>& distances,
                               const std::vector<double>& levels_db);

inline double isolation(double in_path_db, double out_path_db) { return in_path_db - out_path_db; }

struct MetricsRow {
  std::string layout;
  double d_mm = 0.0;
  double f_opt_ghz = 0.0;
  double band_lo_ghz = 0.0;
  double band_hi_ghz = 0.0;
  double avg_s21_db = 0.0;
  std::optional<double> slope_db_per_m;
  std::optional<double> r2;
  std::optional<double> isolation_db;
};

/// Peak, band and band average of one curve; fit and isolation left empty.
MetricsRow summarize(const TransmissionCurve& curve);

std::string metrics_csv(const std::vector<MetricsRow>& rows);
void write_metrics_csv(const std::vector<MetricsRow>& rows, const std::filesystem::path& path);

}  // namespace surfwave

#pragma once

#include <map>
#include <vector>

#include "coloc/geometry.hpp"
#include "coloc/twr.hpp"

namespace coloc {

/// One averaged calibration point for a pair held at a known distance.
struct CalibrationSample {
  RangingPair pair;
  double reference_distance = 0.0;  // meters, d_r
  double mean_measured = 0.0;       // meters, d_m
  int sample_count = 1;
};

/// Linear bias model d_m = slope * d_r + intercept fitted per ordered pair.
/// flagged marks a suspicious fit (residual_rms above the quality gate); it
/// is a warning, never an error.
struct CalibrationModel {
  RangingPair pair;
  double slope = 1.0;
  double intercept = 0.0;  // meters
  double residual_rms = 0.0;
  int n_points = 0;
  bool flagged = false;
};

using CalibrationTable = std::map<RangingPair, CalibrationModel>;

/// Residual RMS above this flags the model.
inline constexpr double kFitQualityGate = 0.05;

inline const std::vector<double>& default_reference_distances() {
  static const std::vector<double> distances = {1.0, 2.0, 3.0, 4.0};
  return distances;
}

inline constexpr int kDefaultSamplesPerPoint = 1200;

/// Ordinary least squares of mean_measured against reference_distance over
/// the samples of one pair. Needs at least two distinct reference distances.
CalibrationModel fit_linear(const std::vector<CalibrationSample>& samples);

/// Inverts the fitted model: d_c = (d_m - intercept) / slope.
double apply_calibration(const CalibrationModel& model, double measured);

/// Corrects a measurement when the table has a model for its pair, otherwise
/// passes it through.
double correct_distance(const CalibrationTable& table, const RangingPair& pair, double measured);

/// Holds the pair at each reference distance, averages samples_per_point
/// measurements into one CalibrationSample, then fits. Campaign sequences
/// live in a dedicated range so they never reuse draws of a positioning run
/// on the same seed.
CalibrationModel run_calibration_campaign(
    const RangingPair& pair, const ErrorModel& error, const ClockMap& clocks,
    const std::vector<double>& reference_distances = default_reference_distances(),
    int samples_per_point = kDefaultSamplesPerPoint);

}  // namespace coloc

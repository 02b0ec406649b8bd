#include "coloc/calibration.hpp"

#include <cmath>

#include "coloc/errors.hpp"

namespace coloc {

CalibrationModel fit_linear(const std::vector<CalibrationSample>& samples) {
  if (samples.size() < 2) {
    throw DomainError("fit_linear: need at least two calibration samples");
  }
  const RangingPair pair = samples.front().pair;
  for (const auto& sample : samples) {
    if (!(sample.pair == pair)) {
      throw DomainError("fit_linear: samples mix different pairs");
    }
    if (sample.sample_count < 1) {
      throw DomainError("fit_linear: sample_count must be positive");
    }
  }

  const auto n = static_cast<double>(samples.size());
  double mean_x = 0.0;
  double mean_y = 0.0;
  for (const auto& sample : samples) {
    mean_x += sample.reference_distance;
    mean_y += sample.mean_measured;
  }
  mean_x /= n;
  mean_y /= n;

  double sxx = 0.0;
  double sxy = 0.0;
  for (const auto& sample : samples) {
    const double dx = sample.reference_distance - mean_x;
    sxx += dx * dx;
    sxy += dx * (sample.mean_measured - mean_y);
  }
  if (!(sxx > 0.0)) {
    throw DomainError("fit_linear: reference distances are not distinct");
  }

  CalibrationModel model;
  model.pair = pair;
  model.slope = sxy / sxx;
  model.intercept = mean_y - model.slope * mean_x;
  model.n_points = static_cast<int>(samples.size());
  if (!(model.slope > 0.0)) {
    throw NumericalError("fit_linear: fitted slope is not positive");
  }

  double sum_sq = 0.0;
  for (const auto& sample : samples) {
    const double residual =
        sample.mean_measured - (model.slope * sample.reference_distance + model.intercept);
    sum_sq += residual * residual;
  }
  model.residual_rms = std::sqrt(sum_sq / n);
  model.flagged = model.residual_rms > kFitQualityGate;
  return model;
}

double apply_calibration(const CalibrationModel& model, double measured) {
  if (!(model.slope > 0.0)) {
    throw DomainError("apply_calibration: model slope must be positive");
  }
  return (measured - model.intercept) / model.slope;
}

double correct_distance(const CalibrationTable& table, const RangingPair& pair, double measured) {
  auto it = table.find(pair);
  return it == table.end() ? measured : apply_calibration(it->second, measured);
}

namespace {

// Sequence range reserved for calibration so campaign draws are disjoint
// from positioning-run draws under a shared seed.
constexpr std::uint64_t kCampaignSequenceBase = std::uint64_t{1} << 24;

}  // namespace

CalibrationModel run_calibration_campaign(const RangingPair& pair, const ErrorModel& error,
                                          const ClockMap& clocks,
                                          const std::vector<double>& reference_distances,
                                          int samples_per_point) {
  if (reference_distances.empty()) {
    throw DomainError("run_calibration_campaign: no reference distances");
  }
  if (samples_per_point < 1) {
    throw DomainError("run_calibration_campaign: samples_per_point must be >= 1");
  }

  std::vector<CalibrationSample> samples;
  samples.reserve(reference_distances.size());
  std::uint64_t sequence = kCampaignSequenceBase;
  for (const double reference : reference_distances) {
    if (!(reference > 0.0)) {
      throw DomainError("run_calibration_campaign: reference distances must be positive");
    }
    double sum = 0.0;
    for (int i = 0; i < samples_per_point; ++i, ++sequence) {
      const double timestamp = 0.1 * static_cast<double>(i);
      sum += measure_range(pair, reference, error, clocks, sequence, timestamp).distance;
    }
    CalibrationSample sample;
    sample.pair = pair;
    sample.reference_distance = reference;
    sample.mean_measured = sum / samples_per_point;
    sample.sample_count = samples_per_point;
    samples.push_back(sample);
  }
  return fit_linear(samples);
}

}  // namespace coloc

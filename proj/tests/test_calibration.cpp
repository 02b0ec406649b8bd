#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "coloc/calibration.hpp"
#include "coloc/errors.hpp"

using namespace coloc;

namespace {

std::vector<CalibrationSample> line_samples(const RangingPair& pair, double slope,
                                            double intercept,
                                            const std::vector<double>& references) {
  std::vector<CalibrationSample> samples;
  for (double reference : references) {
    CalibrationSample sample;
    sample.pair = pair;
    sample.reference_distance = reference;
    sample.mean_measured = slope * reference + intercept;
    sample.sample_count = 1200;
    samples.push_back(sample);
  }
  return samples;
}

}  // namespace

TEST_CASE("fit_linear recovers an exact line to 1e-12") {
  const auto samples = line_samples({2, 0}, 0.98, 0.35, {1.0, 2.0, 3.0, 4.0});
  const CalibrationModel model = fit_linear(samples);
  CHECK(std::abs(model.slope - 0.98) < 1e-12);
  CHECK(std::abs(model.intercept - 0.35) < 1e-12);
  CHECK(model.residual_rms < 1e-12);
  CHECK(model.n_points == 4);
  CHECK_FALSE(model.flagged);
  CHECK(model.pair == RangingPair{2, 0});
}

TEST_CASE("fit_linear on the identity line") {
  const CalibrationModel model = fit_linear(line_samples({1, 0}, 1.0, 0.0, {0.5, 1.5, 4.0}));
  CHECK(std::abs(model.slope - 1.0) < 1e-12);
  CHECK(std::abs(model.intercept) < 1e-12);
}

TEST_CASE("fit_linear matches a hand-computed scattered fit") {
  // measured = reference + (+0.2, -0.2, +0.2, -0.2):
  //   slope = 4.6/5 = 0.92, intercept = 2.5 - 0.92*2.5 = 0.2,
  //   residuals (0.08, -0.24, 0.24, -0.08), rms = sqrt(0.032).
  std::vector<CalibrationSample> samples;
  const double measured[] = {1.2, 1.8, 3.2, 3.8};
  for (int i = 0; i < 4; ++i) {
    samples.push_back({{2, 0}, static_cast<double>(i + 1), measured[i], 100});
  }
  const CalibrationModel model = fit_linear(samples);
  CHECK(model.slope == doctest::Approx(0.92).epsilon(1e-12));
  CHECK(model.intercept == doctest::Approx(0.2).epsilon(1e-12));
  CHECK(model.residual_rms == doctest::Approx(std::sqrt(0.032)).epsilon(1e-12));
  CHECK(model.flagged);  // 0.1789 > 0.05 gate
}

TEST_CASE("fit_linear is invariant to sample order") {
  auto samples = line_samples({2, 1}, 1.01, -0.12, {1.0, 2.0, 3.0, 4.0});
  const CalibrationModel forward = fit_linear(samples);
  std::reverse(samples.begin(), samples.end());
  const CalibrationModel reversed = fit_linear(samples);
  CHECK(forward.slope == doctest::Approx(reversed.slope).epsilon(1e-13));
  CHECK(forward.intercept == doctest::Approx(reversed.intercept).epsilon(1e-13));
}

TEST_CASE("fit_linear rejects degenerate inputs") {
  CHECK_THROWS_AS(fit_linear({}), DomainError);
  CHECK_THROWS_AS(fit_linear(line_samples({2, 0}, 1.0, 0.0, {1.0})), DomainError);

  auto mixed = line_samples({2, 0}, 1.0, 0.0, {1.0, 2.0});
  mixed[1].pair = {3, 0};
  CHECK_THROWS_AS(fit_linear(mixed), DomainError);

  auto repeated = line_samples({2, 0}, 1.0, 0.0, {2.0, 2.0});
  CHECK_THROWS_AS(fit_linear(repeated), DomainError);

  auto bad_count = line_samples({2, 0}, 1.0, 0.0, {1.0, 2.0});
  bad_count[0].sample_count = 0;
  CHECK_THROWS_AS(fit_linear(bad_count), DomainError);

  // Decreasing data fits a negative slope, which can never be inverted.
  std::vector<CalibrationSample> decreasing;
  decreasing.push_back({{2, 0}, 1.0, 3.0, 10});
  decreasing.push_back({{2, 0}, 2.0, 2.0, 10});
  decreasing.push_back({{2, 0}, 3.0, 1.0, 10});
  CHECK_THROWS_AS(fit_linear(decreasing), NumericalError);
}

TEST_CASE("apply_calibration inverts the bias model") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> slopes(0.9, 1.1);
  std::uniform_real_distribution<double> intercepts(-0.5, 0.5);
  std::uniform_real_distribution<double> distances(0.1, 50.0);
  for (int i = 0; i < 1000; ++i) {
    CalibrationModel model;
    model.slope = slopes(rng);
    model.intercept = intercepts(rng);
    const double d = distances(rng);
    const double measured = model.slope * d + model.intercept;
    CHECK(apply_calibration(model, measured) == doctest::Approx(d).epsilon(1e-12));
  }

  CalibrationModel invalid;
  invalid.slope = 0.0;
  CHECK_THROWS_AS(apply_calibration(invalid, 1.0), DomainError);
}

TEST_CASE("correct_distance passes through pairs without a model") {
  CalibrationTable table;
  CalibrationModel model;
  model.pair = {2, 0};
  model.slope = 2.0;
  model.intercept = 1.0;
  table[model.pair] = model;
  CHECK(correct_distance(table, {2, 0}, 5.0) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(correct_distance(table, {3, 0}, 5.0) == 5.0);
  CHECK(correct_distance({}, {2, 0}, 5.0) == 5.0);
}

TEST_CASE("noise-free campaign recovers the injected bias through the ranging engine") {
  ErrorModel error;
  error.gaussian_sigma = 0.0;
  error.pair_bias[{2, 0}] = {0.98, 0.35};
  const CalibrationModel model = run_calibration_campaign({2, 0}, error, {});
  // The DS-TWR floor (~4e-12 m per point) keeps this from being 1e-12 exact.
  CHECK(std::abs(model.slope - 0.98) < 1e-9);
  CHECK(std::abs(model.intercept - 0.35) < 1e-9);
  CHECK(model.residual_rms < 1e-9);
  CHECK_FALSE(model.flagged);
  CHECK(model.n_points == 4);
}

TEST_CASE("campaign is deterministic for a fixed seed") {
  ErrorModel error;
  error.gaussian_sigma = 0.02;
  error.seed = 42;
  const CalibrationModel a = run_calibration_campaign({2, 0}, error, {});
  const CalibrationModel b = run_calibration_campaign({2, 0}, error, {});
  CHECK(a.slope == b.slope);
  CHECK(a.intercept == b.intercept);
  CHECK(a.residual_rms == b.residual_rms);
}

TEST_CASE("noisy campaign estimator matches the OLS variance oracle") {
  // d_m = 0.98 d_r + 0.35 + N(0, 0.02), 1200 samples per point, refs {1,2,3,4}.
  // Per-point sigma: 0.02/sqrt(1200) = 5.77e-4. OLS oracle:
  //   sd(intercept) = 5.77e-4 * sqrt(1/4 + 2.5^2/5) = 7.07e-4
  //   sd(slope)     = 5.77e-4 / sqrt(5)             = 2.58e-4
  ErrorModel error;
  error.gaussian_sigma = 0.02;
  error.pair_bias[{2, 0}] = {0.98, 0.35};

  const int repetitions = 60;
  std::vector<double> slopes;
  std::vector<double> intercepts;
  for (int i = 0; i < repetitions; ++i) {
    error.seed = static_cast<std::uint64_t>(1000 + i);
    const CalibrationModel model = run_calibration_campaign({2, 0}, error, {});
    slopes.push_back(model.slope);
    intercepts.push_back(model.intercept);
    CHECK_FALSE(model.flagged);
  }

  const auto moments = [](const std::vector<double>& xs) {
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var /= static_cast<double>(xs.size() - 1);
    return std::pair<double, double>(mean, std::sqrt(var));
  };

  const auto [slope_mean, slope_sd] = moments(slopes);
  const auto [intercept_mean, intercept_sd] = moments(intercepts);
  CHECK(std::abs(slope_mean - 0.98) < 4.0 * 2.58e-4 / std::sqrt(60.0));
  CHECK(std::abs(intercept_mean - 0.35) < 4.0 * 7.07e-4 / std::sqrt(60.0));
  CHECK(slope_sd > 0.5 * 2.58e-4);
  CHECK(slope_sd < 1.5 * 2.58e-4);
  CHECK(intercept_sd > 0.5 * 7.07e-4);
  CHECK(intercept_sd < 1.5 * 7.07e-4);
}

TEST_CASE("campaign validates its inputs") {
  CHECK_THROWS_AS(run_calibration_campaign({2, 0}, {}, {}, {}), DomainError);
  CHECK_THROWS_AS(run_calibration_campaign({2, 0}, {}, {}, {1.0, 2.0}, 0), DomainError);
  CHECK_THROWS_AS(run_calibration_campaign({2, 0}, {}, {}, {1.0, -2.0}), DomainError);
}

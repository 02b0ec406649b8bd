#pragma once

#include <cstdint>
#include <functional>
#include <map>

#include "coloc/geometry.hpp"
#include "coloc/rng.hpp"

namespace coloc {

/// Speed of light in vacuum, m/s.
inline constexpr double kSpeedOfLight = 299792458.0;

/// Per-node clock: local = (global + offset) * (1 + drift), quantized to
/// tick_resolution at timestamp capture. tick_resolution 0 disables
/// quantization; the default matches a typical UWB chip tick.
struct ClockModel {
  double offset = 0.0;            // seconds
  double drift = 0.0;             // dimensionless parts (20e-6 = 20 ppm)
  double tick_resolution = 15.65e-12;  // seconds

  static ClockModel ideal() { return {0.0, 0.0, 0.0}; }

  /// Local reading of a global instant.
  double capture(double global_time) const;
};

using ClockMap = std::map<NodeId, ClockModel>;

/// Clock for a node, ideal when the map has no entry for it.
ClockModel clock_for(const ClockMap& clocks, NodeId id);

/// The four local-clock durations of one double-sided exchange.
struct TwrExchange {
  double t_round1 = 0.0;
  double t_reply1 = 0.0;
  double t_round2 = 0.0;
  double t_reply2 = 0.0;
};

/// Injected per-pair measurement bias: measured = slope * true + intercept.
struct LinearBias {
  double slope = 1.0;      // dimensionless
  double intercept = 0.0;  // meters
};

struct ErrorModel {
  double gaussian_sigma = 0.02;  // meters
  std::map<RangingPair, LinearBias> pair_bias;
  double outlier_prob = 0.0;
  double outlier_sigma = 0.5;  // meters
  std::uint64_t seed = 0;

  LinearBias bias_for(const RangingPair& pair) const;
};

struct RangeMeasurement {
  RangingPair pair;
  double distance = 0.0;   // meters
  double timestamp = 0.0;  // seconds since run start
  std::uint64_t sequence = 0;
  int quality = 100;  // 0..100

  bool operator==(const RangeMeasurement&) const = default;
};

/// Flight-time estimate from the four exchange durations:
///   (t_round1 * t_round2 - t_reply1 * t_reply2) / (sum of all four).
double tof_estimate(const TwrExchange& exchange);

/// Plays the three-message exchange in global time and reads every event on
/// the owning node's clock. Flight time = true_distance / c.
TwrExchange simulate_exchange(double true_distance, const ClockModel& initiator_clock,
                              const ClockModel& responder_clock, double reply_delay1 = 300e-6,
                              double reply_delay2 = 250e-6);

/// One noisy ranged distance: DS-TWR through the pair's clocks, then the
/// linear bias, gaussian noise, and optional outlier, clamped at zero.
/// Deterministic in (error.seed, pair, sequence).
RangeMeasurement measure_range(const RangingPair& pair, double true_distance,
                               const ErrorModel& error, const ClockMap& clocks,
                               std::uint64_t sequence, double timestamp,
                               double reply_delay1 = 300e-6, double reply_delay2 = 250e-6);

/// Sink returns false to stop the run; the schedule raises TransportError.
using MeasurementSink = std::function<bool(const RangeMeasurement&)>;

/// Time-division schedule: floor(rate * duration) epochs, one measurement per
/// pair per epoch in topology order, all stamped with the epoch start time.
/// Returns the number of measurements emitted.
std::uint64_t run_ranging_schedule(const NetworkTopology& topology,
                                   const std::map<NodeId, Position2D>& positions,
                                   const ErrorModel& error, const ClockMap& clocks, double rate,
                                   double duration, const MeasurementSink& sink);

}  // namespace coloc

#include "coloc/twr.hpp"

#include <cmath>

#include "coloc/errors.hpp"

namespace coloc {

double ClockModel::capture(double global_time) const {
  double local = (global_time + offset) * (1.0 + drift);
  if (tick_resolution > 0.0) {
    local = std::round(local / tick_resolution) * tick_resolution;
  }
  return local;
}

ClockModel clock_for(const ClockMap& clocks, NodeId id) {
  auto it = clocks.find(id);
  return it == clocks.end() ? ClockModel::ideal() : it->second;
}

LinearBias ErrorModel::bias_for(const RangingPair& pair) const {
  auto it = pair_bias.find(pair);
  return it == pair_bias.end() ? LinearBias{} : it->second;
}

double tof_estimate(const TwrExchange& exchange) {
  const double denominator =
      exchange.t_round1 + exchange.t_round2 + exchange.t_reply1 + exchange.t_reply2;
  if (!(denominator > 0.0)) {
    throw DomainError("tof_estimate: non-positive duration sum");
  }
  return (exchange.t_round1 * exchange.t_round2 - exchange.t_reply1 * exchange.t_reply2) /
         denominator;
}

TwrExchange simulate_exchange(double true_distance, const ClockModel& initiator_clock,
                              const ClockModel& responder_clock, double reply_delay1,
                              double reply_delay2) {
  if (true_distance < 0.0) {
    throw DomainError("simulate_exchange: negative distance");
  }
  if (!(reply_delay1 > 0.0) || !(reply_delay2 > 0.0)) {
    throw DomainError("simulate_exchange: reply delays must be positive");
  }
  const double tof = true_distance / kSpeedOfLight;

  // Global event times of the three messages: poll, response, final.
  const double tx_poll = 0.0;
  const double rx_poll = tx_poll + tof;
  const double tx_response = rx_poll + reply_delay1;
  const double rx_response = tx_response + tof;
  const double tx_final = rx_response + reply_delay2;
  const double rx_final = tx_final + tof;

  TwrExchange exchange;
  exchange.t_round1 = initiator_clock.capture(rx_response) - initiator_clock.capture(tx_poll);
  exchange.t_reply1 = responder_clock.capture(tx_response) - responder_clock.capture(rx_poll);
  exchange.t_round2 = responder_clock.capture(rx_final) - responder_clock.capture(tx_response);
  exchange.t_reply2 = initiator_clock.capture(tx_final) - initiator_clock.capture(rx_response);
  return exchange;
}

namespace {

// Draw slots per (pair, sequence): 0/1 gaussian pair, 2 outlier gate,
// 3/4 outlier magnitude.
constexpr std::uint64_t kDrawGaussian = 0;
constexpr std::uint64_t kDrawOutlierGate = 2;
constexpr std::uint64_t kDrawOutlierMagnitude = 3;

}  // namespace

RangeMeasurement measure_range(const RangingPair& pair, double true_distance,
                               const ErrorModel& error, const ClockMap& clocks,
                               std::uint64_t sequence, double timestamp, double reply_delay1,
                               double reply_delay2) {
  if (true_distance < 0.0) {
    throw DomainError("measure_range: negative distance");
  }
  const ClockModel initiator = clock_for(clocks, pair.tag);
  const ClockModel responder = clock_for(clocks, pair.anchor);
  const TwrExchange exchange =
      simulate_exchange(true_distance, initiator, responder, reply_delay1, reply_delay2);
  const double ranged = kSpeedOfLight * tof_estimate(exchange);

  const LinearBias bias = error.bias_for(pair);
  const CounterRng rng(error.seed);
  const std::uint64_t stream = pair_stream(pair.tag, pair.anchor);

  double distance = bias.slope * ranged + bias.intercept;
  if (error.gaussian_sigma > 0.0) {
    distance += error.gaussian_sigma * rng.normal_at(stream, sequence, kDrawGaussian);
  }
  int quality = 100;
  if (error.outlier_prob > 0.0 &&
      rng.uniform_at(stream, sequence, kDrawOutlierGate) < error.outlier_prob) {
    distance += error.outlier_sigma * rng.normal_at(stream, sequence, kDrawOutlierMagnitude);
    quality = 25;
  }
  if (distance < 0.0) distance = 0.0;

  RangeMeasurement measurement;
  measurement.pair = pair;
  measurement.distance = distance;
  measurement.timestamp = timestamp;
  measurement.sequence = sequence;
  measurement.quality = quality;
  return measurement;
}

std::uint64_t run_ranging_schedule(const NetworkTopology& topology,
                                   const std::map<NodeId, Position2D>& positions,
                                   const ErrorModel& error, const ClockMap& clocks, double rate,
                                   double duration, const MeasurementSink& sink) {
  if (!(rate > 0.0)) throw DomainError("run_ranging_schedule: rate must be positive");
  if (!(duration > 0.0)) throw DomainError("run_ranging_schedule: duration must be positive");

  const auto distances = true_distances(positions, topology);
  const auto epochs = static_cast<std::uint64_t>(rate * duration);
  std::uint64_t emitted = 0;
  for (std::uint64_t epoch = 0; epoch < epochs; ++epoch) {
    const double timestamp = static_cast<double>(epoch) / rate;
    for (const auto& pair : topology.pairs) {
      const RangeMeasurement measurement = measure_range(
          pair, distances.at(pair), error, clocks, epoch, timestamp);
      if (!sink(measurement)) {
        throw TransportError("run_ranging_schedule: sink rejected measurement");
      }
      ++emitted;
    }
  }
  return emitted;
}

}  // namespace coloc

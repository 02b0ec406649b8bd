#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "coloc/calibration.hpp"
#include "coloc/experiment.hpp"
#include "coloc/geometry.hpp"
#include "coloc/solver.hpp"
#include "coloc/twr.hpp"
#include "coloc/wire.hpp"

namespace {

using namespace coloc;

void BM_TofEstimate(benchmark::State& state) {
  const TwrExchange exchange = simulate_exchange(4.0, ClockModel::ideal(), ClockModel::ideal());
  for (auto _ : state) {
    benchmark::DoNotOptimize(tof_estimate(exchange));
  }
}
BENCHMARK(BM_TofEstimate);

void BM_SimulateExchange(benchmark::State& state) {
  const ClockModel initiator{1.5e-3, 8e-6, 15.65e-12};
  const ClockModel responder{-0.7e-3, -12e-6, 15.65e-12};
  for (auto _ : state) {
    benchmark::DoNotOptimize(simulate_exchange(4.0, initiator, responder));
  }
}
BENCHMARK(BM_SimulateExchange);

void BM_MeasureRange(benchmark::State& state) {
  ErrorModel error;
  error.seed = 42;
  const RangingPair pair{2, 0};
  std::uint64_t sequence = 0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(measure_range(pair, 2.83, error, {}, sequence++, 0.0));
  }
}
BENCHMARK(BM_MeasureRange);

void BM_SolveNode(benchmark::State& state) {
  ResidualSystem system;
  system.anchors = {Position2D{0.0, 0.0}, Position2D{2.0, 0.0}};
  system.measured = {2.8284271247461903, 2.0};
  for (auto _ : state) {
    benchmark::DoNotOptimize(solve_node(system, {1.1, 0.9}));
  }
}
BENCHMARK(BM_SolveNode);

void BM_EstimatePoses(benchmark::State& state) {
  const auto truth = canonical_geometry(Shape::kSquare, 2.0);
  const auto distances = true_distances(truth, canonical_topology());
  for (auto _ : state) {
    benchmark::DoNotOptimize(estimate_poses(distances, 0.0));
  }
}
BENCHMARK(BM_EstimatePoses);

void BM_EncodeFrame(benchmark::State& state) {
  WireFrame frame;
  frame.tag_id = 2;
  frame.epoch_micros = 1500000;
  frame.entries = {{0, 2828, 100}, {1, 2000, 100}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(encode_frame(frame));
  }
}
BENCHMARK(BM_EncodeFrame);

void BM_DecodeStream(benchmark::State& state) {
  WireFrame frame;
  frame.tag_id = 2;
  frame.epoch_micros = 1500000;
  frame.entries = {{0, 2828, 100}, {1, 2000, 100}};
  const auto bytes = encode_frame(frame);
  for (auto _ : state) {
    FrameDecoder decoder;
    decoder.feed({bytes.data(), bytes.size()});
    WireFrame out;
    decoder.next(out);
    benchmark::DoNotOptimize(out);
  }
}
BENCHMARK(BM_DecodeStream);

void BM_FullEpoch(benchmark::State& state) {
  const auto topology = canonical_topology();
  const auto truth = canonical_geometry(Shape::kSquare, 2.0);
  ErrorModel error;
  error.seed = 42;
  std::uint64_t epoch = 0;
  PoseEstimate previous;
  bool warm = false;
  for (auto _ : state) {
    std::map<RangingPair, double> distances;
    for (const auto& pair : topology.pairs) {
      const auto truth_distance = distance(truth.at(pair.tag), truth.at(pair.anchor));
      distances[pair] =
          measure_range(pair, truth_distance, error, {}, epoch, epoch * 0.1).distance;
    }
    previous = estimate_poses(distances, epoch * 0.1, {}, warm ? &previous : nullptr);
    warm = true;
    ++epoch;
    benchmark::DoNotOptimize(previous);
  }
}
BENCHMARK(BM_FullEpoch);

}  // namespace

BENCHMARK_MAIN();

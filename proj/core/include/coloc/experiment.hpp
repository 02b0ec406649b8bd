#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "coloc/calibration.hpp"
#include "coloc/io.hpp"
#include "coloc/solver.hpp"
#include "coloc/twr.hpp"

namespace coloc {

enum class TransportKind { kInproc, kLoopback };

std::string to_string(TransportKind kind);
TransportKind transport_from_string(const std::string& name);

struct RunConfig {
  Shape shape = Shape::kSquare;
  double scale = 2.0;
  double rate = 10.0;
  double duration = 120.0;
  std::uint64_t seed = 42;
  TransportKind transport = TransportKind::kInproc;
  ErrorModel error;  // seed field is overridden by `seed`
  ClockMap clocks;
  std::optional<CalibrationTable> calibration;
  SolverConfig solver;
  std::optional<Scene> scene;  // overrides shape/scale geometry when set
};

/// Everything a finished run leaves behind.
struct RunRecord {
  RunManifest manifest;
  NetworkTopology topology;
  std::vector<RangeMeasurement> measurements;  // the stream the solver saw (uncalibrated)
  std::vector<PoseEstimate> poses;
};

struct BoxStats {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
  double whisker_low = 0.0;   // smallest sample above q1 - 1.5 IQR
  double whisker_high = 0.0;  // largest sample below q3 + 1.5 IQR
  std::vector<double> outliers;
};

struct NodeErrorStats {
  double rmse = 0.0;
  double max_error = 0.0;
  std::vector<double> cdf;  // sorted error samples
  BoxStats box;
};

struct ErrorSummary {
  std::map<NodeId, NodeErrorStats> nodes;
  double mean_rmse = 0.0;       // across all nodes, node 0 included
  double mean_rmse_tags = 0.0;  // node 0 excluded
};

double euclidean_error(const Position2D& estimate, const Position2D& truth);

/// Linear-interpolation quantile of an ascending sample vector, q in [0, 1].
double quantile(const std::vector<double>& sorted, double q);

BoxStats box_stats(const std::vector<double>& sorted);

ErrorSummary summarize(const RunRecord& record);

struct RunResult {
  RunRecord record;
  ErrorSummary summary;
};

/// Full pipeline: ranging schedule, optional loopback transport, per-epoch
/// pose solving, evaluation. With a non-empty out_dir the run artifacts
/// (manifest, measurement/pose CSVs, summary, plot data) are persisted there.
RunResult run_experiment(const RunConfig& config, const std::filesystem::path& out_dir = {});

/// Persisted file names inside a run directory.
namespace run_files {
inline constexpr const char* kManifest = "manifest.txt";
inline constexpr const char* kMeasurements = "measurements.csv";
inline constexpr const char* kPoses = "poses.csv";
inline constexpr const char* kSummary = "summary.csv";
inline constexpr const char* kBox = "box.csv";
inline constexpr const char* kBoxOutliers = "box_outliers.csv";
inline constexpr const char* kXCoord = "xcoord.csv";
std::string cdf_name(NodeId node);
}  // namespace run_files

void write_run_outputs(const std::filesystem::path& dir, const RunRecord& record,
                       const ErrorSummary& summary);

/// Reads a persisted run back (manifest, poses, measurements).
RunRecord load_run(const std::filesystem::path& dir);

/// One row of summary.csv. Mean rows use node = -1 ("mean") and
/// node = -2 ("mean_ex0") with only the rmse column populated.
struct SummaryRow {
  std::string config;
  std::string node;
  double rmse = 0.0;
  double max_error = 0.0;
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};

std::vector<SummaryRow> load_summary(const std::filesystem::path& path);

/// Per-node error deciles (10%..90%) of two runs side by side.
struct DecileComparison {
  std::array<double, 9> a{};
  std::array<double, 9> b{};
  bool a_dominates = false;  // a <= b at every decile
  bool tie = false;
};

struct DominanceReport {
  std::map<NodeId, DecileComparison> nodes;
  bool a_dominates_tags = false;  // every decile of every node except 0
  bool tie = false;
};

/// Quantile-by-quantile error comparison of two runs with matched geometry.
DominanceReport compare_runs(const RunRecord& a, const RunRecord& b);

}  // namespace coloc

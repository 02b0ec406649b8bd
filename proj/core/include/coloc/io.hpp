#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "coloc/calibration.hpp"
#include "coloc/geometry.hpp"
#include "coloc/solver.hpp"
#include "coloc/twr.hpp"

namespace coloc {

/// Shortest exact decimal form (round-trips bit-identically).
std::string format_double(double value);
double parse_double(const std::string& text);

/// Topology plus ground-truth layout, as read from a scene file:
///   node <id> <A|T|AT>
///   pair <tag> <anchor>
///   pos <id> <x> <y>
/// with # comments and blank lines ignored.
struct Scene {
  NetworkTopology topology;
  std::map<NodeId, Position2D> positions;
};

Scene load_scene(const std::filesystem::path& path);
void save_scene(const std::filesystem::path& path, const Scene& scene);

/// Error/clock configuration file:
///   noise sigma <meters>
///   noise outlier <prob> <sigma_m>
///   bias <tag> <anchor> <slope> <intercept_m>
///   clock <id> <offset_s> <drift_ppm>
///   tick <seconds>
/// `tick` applies to every clock entry; nodes without a clock line are ideal.
struct NoiseConfig {
  ErrorModel error;
  ClockMap clocks;
  double tick = 0.0;
};

NoiseConfig load_noise_config(const std::filesystem::path& path);
void save_noise_config(const std::filesystem::path& path, const NoiseConfig& config);

/// Calibration CSV: tag,anchor,m_c,q_c,residual_rms,n_points
void save_calibration(const std::filesystem::path& path, const CalibrationTable& table);
CalibrationTable load_calibration(const std::filesystem::path& path);

/// Measurement CSV: seq,epoch_time_s,tag,anchor,distance_m,quality
void save_measurements(const std::filesystem::path& path,
                       const std::vector<RangeMeasurement>& measurements);
std::vector<RangeMeasurement> load_measurements(const std::filesystem::path& path);

/// Pose CSV: epoch_time_s,node,x_m,y_m,residual_norm,converged,iterations
void save_poses(const std::filesystem::path& path, const std::vector<PoseEstimate>& poses);
std::vector<PoseEstimate> load_poses(const std::filesystem::path& path);

/// Run manifest: the config snapshot and ground truth a run directory needs
/// to be evaluated on its own. Same line-oriented format family as scenes.
struct RunManifest {
  std::string shape = "square";
  double scale = 2.0;
  double rate = 10.0;
  double duration = 120.0;
  std::uint64_t seed = 42;
  std::string transport = "inproc";
  bool calibrated = false;
  std::map<NodeId, Position2D> truth;
};

void save_manifest(const std::filesystem::path& path, const RunManifest& manifest);
RunManifest load_manifest(const std::filesystem::path& path);

}  // namespace coloc

#pragma once

#include <array>
#include <map>
#include <vector>

#include "coloc/geometry.hpp"

namespace coloc {

/// Two-range system for one unknown node: two fixed anchors and the measured
/// distance to each.
struct ResidualSystem {
  NodeId unknown = 2;
  std::array<Position2D, 2> anchors;
  std::array<double, 2> measured = {0.0, 0.0};
};

struct SolverConfig {
  int max_iterations = 50;
  double gradient_tolerance = 1e-10;  // on the cost gradient norm
  double step_tolerance = 1e-12;      // meters
  double initial_damping = 1e-3;
};

/// Outcome of one damped Gauss-Newton solve.
struct NodeSolve {
  Position2D position;
  double residual_norm = 0.0;  // sqrt of the final cost
  int iterations = 0;
  bool converged = false;
};

/// Joint per-epoch estimate. positions always holds all four nodes with the
/// frame convention exact; solves carries per-node diagnostics.
struct PoseEstimate {
  std::map<NodeId, Position2D> positions;
  std::map<NodeId, NodeSolve> solves;
  double residual_norm = 0.0;
  int iterations = 0;
  bool converged = false;
  double epoch = 0.0;  // seconds
};

using Matrix2 = std::array<std::array<double, 2>, 2>;

/// Residuals (distance to anchor minus measured) in anchor order.
std::array<double, 2> residuals(const ResidualSystem& system, const Position2D& candidate);

/// Cost = sum of squared residuals.
double cost(const ResidualSystem& system, const Position2D& candidate);

/// Analytic Jacobian of the residuals; row i is the unit vector from anchor i
/// to the candidate. Candidate exactly on an anchor is a singular point.
Matrix2 jacobian(const ResidualSystem& system, const Position2D& candidate);

/// Damped Gauss-Newton minimization of the two-range cost. When trace is
/// given it receives the cost after the initial point and after every
/// accepted step.
NodeSolve solve_node(const ResidualSystem& system, const Position2D& initial_guess,
                     const SolverConfig& config = {}, std::vector<double>* trace = nullptr);

/// Closed-form circle intersection used as the solver's test oracle. Returns
/// zero, one, or two points; with two, the first has the positive offset from
/// the anchor baseline.
std::vector<Position2D> circle_intersection_oracle(const ResidualSystem& system);

/// Minimum anchor separation accepted by estimate_poses.
inline constexpr double kMinBaseline = 0.01;

/// Full per-epoch pipeline over the canonical five pairs: node 0 pinned at
/// the origin, node 1 at (d10, 0), nodes 2 and 3 solved against those two
/// anchors. Warm-starts each unknown from `previous` when that node's solve
/// converged; cold starts use the upper half-plane intersection point, or the
/// anchor midpoint nudged to y = +0.1 when the circles miss.
PoseEstimate estimate_poses(const std::map<RangingPair, double>& distances, double epoch_time,
                            const SolverConfig& config = {},
                            const PoseEstimate* previous = nullptr);

}  // namespace coloc

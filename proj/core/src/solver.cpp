#include "coloc/solver.hpp"

#include <cmath>

#include "coloc/errors.hpp"

namespace coloc {

std::array<double, 2> residuals(const ResidualSystem& system, const Position2D& candidate) {
  return {distance(candidate, system.anchors[0]) - system.measured[0],
          distance(candidate, system.anchors[1]) - system.measured[1]};
}

double cost(const ResidualSystem& system, const Position2D& candidate) {
  const auto r = residuals(system, candidate);
  return r[0] * r[0] + r[1] * r[1];
}

Matrix2 jacobian(const ResidualSystem& system, const Position2D& candidate) {
  Matrix2 j;
  for (int i = 0; i < 2; ++i) {
    const double dx = candidate.x - system.anchors[i].x;
    const double dy = candidate.y - system.anchors[i].y;
    const double rho = std::hypot(dx, dy);
    if (rho == 0.0) {
      throw NumericalError("jacobian: candidate coincides with anchor " + std::to_string(i));
    }
    j[i] = {dx / rho, dy / rho};
  }
  return j;
}

NodeSolve solve_node(const ResidualSystem& system, const Position2D& initial_guess,
                     const SolverConfig& config, std::vector<double>* trace) {
  if (!std::isfinite(initial_guess.x) || !std::isfinite(initial_guess.y)) {
    throw DomainError("solve_node: initial guess is not finite");
  }
  if (system.anchors[0] == system.anchors[1]) {
    throw DomainError("solve_node: anchors coincide");
  }

  Position2D point = initial_guess;
  auto r = residuals(system, point);
  double current_cost = r[0] * r[0] + r[1] * r[1];
  if (!std::isfinite(current_cost)) {
    throw NumericalError("solve_node: non-finite cost at initial guess");
  }
  if (trace != nullptr) trace->push_back(current_cost);

  double damping = config.initial_damping;
  NodeSolve result;
  result.iterations = 0;

  while (result.iterations < config.max_iterations) {
    const Matrix2 j = jacobian(system, point);

    // Normal equations pieces: JtJ and Jt r.
    const double a00 = j[0][0] * j[0][0] + j[1][0] * j[1][0];
    const double a01 = j[0][0] * j[0][1] + j[1][0] * j[1][1];
    const double a11 = j[0][1] * j[0][1] + j[1][1] * j[1][1];
    const double g0 = j[0][0] * r[0] + j[1][0] * r[1];
    const double g1 = j[0][1] * r[0] + j[1][1] * r[1];

    // Cost gradient is 2 Jt r.
    if (2.0 * std::hypot(g0, g1) <= config.gradient_tolerance) {
      result.converged = true;
      break;
    }

    ++result.iterations;

    const double m00 = a00 + damping;
    const double m11 = a11 + damping;
    const double det = m00 * m11 - a01 * a01;
    if (!(det > 0.0)) {
      damping *= 10.0;
      continue;
    }
    const double step_x = -(m11 * g0 - a01 * g1) / det;
    const double step_y = -(m00 * g1 - a01 * g0) / det;

    const Position2D candidate{point.x + step_x, point.y + step_y};
    const auto candidate_r = residuals(system, candidate);
    const double candidate_cost = candidate_r[0] * candidate_r[0] + candidate_r[1] * candidate_r[1];
    if (!std::isfinite(candidate_cost)) {
      throw NumericalError("solve_node: non-finite cost during iteration");
    }

    if (candidate_cost < current_cost) {
      point = candidate;
      r = candidate_r;
      current_cost = candidate_cost;
      damping *= 0.1;
      if (trace != nullptr) trace->push_back(current_cost);
      if (std::hypot(step_x, step_y) <= config.step_tolerance) {
        result.converged = true;
        break;
      }
    } else {
      // A rejected step at or below the step tolerance means even the heavily
      // damped model cannot improve the cost at this resolution; the point is
      // numerically stationary (e.g. the flat valley between disjoint circles).
      if (std::hypot(step_x, step_y) <= config.step_tolerance) {
        result.converged = true;
        break;
      }
      damping *= 10.0;
    }
  }

  result.position = point;
  result.residual_norm = std::sqrt(current_cost);
  return result;
}

std::vector<Position2D> circle_intersection_oracle(const ResidualSystem& system) {
  const Position2D& a0 = system.anchors[0];
  const Position2D& a1 = system.anchors[1];
  const double d = distance(a0, a1);
  if (d == 0.0) {
    throw DomainError("circle_intersection_oracle: anchors coincide");
  }
  const double r0 = system.measured[0];
  const double r1 = system.measured[1];
  if (d > r0 + r1 || d < std::abs(r0 - r1)) {
    return {};
  }
  const double along = (r0 * r0 - r1 * r1 + d * d) / (2.0 * d);
  double h_sq = r0 * r0 - along * along;
  if (h_sq < 0.0) h_sq = 0.0;
  const double h = std::sqrt(h_sq);

  const double ux = (a1.x - a0.x) / d;
  const double uy = (a1.y - a0.y) / d;
  const Position2D foot{a0.x + along * ux, a0.y + along * uy};
  if (h == 0.0) {
    return {foot};
  }
  return {{foot.x - h * uy, foot.y + h * ux}, {foot.x + h * uy, foot.y - h * ux}};
}

namespace {

NodeSolve trivial_solve(const Position2D& position) {
  NodeSolve solve;
  solve.position = position;
  solve.residual_norm = 0.0;
  solve.iterations = 0;
  solve.converged = true;
  return solve;
}

Position2D cold_start(const ResidualSystem& system) {
  const auto points = circle_intersection_oracle(system);
  for (const auto& point : points) {
    if (point.y >= 0.0) return point;
  }
  if (!points.empty()) return points.front();
  const Position2D mid{0.5 * (system.anchors[0].x + system.anchors[1].x),
                       0.5 * (system.anchors[0].y + system.anchors[1].y)};
  return {mid.x, mid.y + 0.1};
}

}  // namespace

PoseEstimate estimate_poses(const std::map<RangingPair, double>& distances, double epoch_time,
                            const SolverConfig& config, const PoseEstimate* previous) {
  for (const auto& pair : canonical_pairs()) {
    if (distances.find(pair) == distances.end()) {
      throw DomainError("estimate_poses: epoch is missing pair " + std::to_string(pair.tag) +
                        "->" + std::to_string(pair.anchor));
    }
  }
  const double d10 = distances.at({1, 0});
  if (d10 < kMinBaseline) {
    throw DomainError("estimate_poses: degenerate baseline, d10 below 1 cm");
  }

  PoseEstimate estimate;
  estimate.epoch = epoch_time;
  estimate.solves[0] = trivial_solve({0.0, 0.0});
  estimate.solves[1] = trivial_solve({d10, 0.0});

  double total_cost = 0.0;
  estimate.converged = true;
  for (NodeId node : {NodeId{2}, NodeId{3}}) {
    ResidualSystem system;
    system.unknown = node;
    system.anchors = {Position2D{0.0, 0.0}, Position2D{d10, 0.0}};
    system.measured = {distances.at({node, 0}), distances.at({node, 1})};

    Position2D guess;
    bool warm = false;
    if (previous != nullptr) {
      auto it = previous->solves.find(node);
      if (it != previous->solves.end() && it->second.converged) {
        guess = it->second.position;
        warm = true;
      }
    }
    if (!warm) guess = cold_start(system);

    const NodeSolve solve = solve_node(system, guess, config);
    estimate.solves[node] = solve;
    estimate.iterations += solve.iterations;
    estimate.converged = estimate.converged && solve.converged;
    total_cost += solve.residual_norm * solve.residual_norm;
  }
  estimate.residual_norm = std::sqrt(total_cost);

  for (const auto& [node, solve] : estimate.solves) {
    estimate.positions[node] = solve.position;
  }
  return estimate;
}

}  // namespace coloc

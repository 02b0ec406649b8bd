#include "coloc/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "coloc/errors.hpp"

namespace coloc {

double distance(const Position2D& a, const Position2D& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

bool NetworkTopology::has_node(NodeId id) const { return find_node(id) != nullptr; }

const NodeSpec* NetworkTopology::find_node(NodeId id) const {
  for (const auto& node : nodes) {
    if (node.id == id) return &node;
  }
  return nullptr;
}

int NetworkTopology::pair_count(NodeId id) const {
  int count = 0;
  for (const auto& pair : pairs) {
    if (pair.tag == id || pair.anchor == id) ++count;
  }
  return count;
}

std::vector<RangingPair> NetworkTopology::pairs_for_tag(NodeId tag) const {
  std::vector<RangingPair> result;
  for (const auto& pair : pairs) {
    if (pair.tag == tag) result.push_back(pair);
  }
  return result;
}

NetworkTopology canonical_topology() {
  NetworkTopology topology;
  topology.nodes = {
      {0, {.anchor = true, .tag = false}},
      {1, {.anchor = true, .tag = true}},
      {2, {.anchor = false, .tag = true}},
      {3, {.anchor = false, .tag = true}},
  };
  topology.pairs = canonical_pairs();
  return topology;
}

const std::vector<RangingPair>& canonical_pairs() {
  static const std::vector<RangingPair> pairs = {
      {1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1},
  };
  return pairs;
}

ValidationReport validate_topology(const NetworkTopology& topology) {
  ValidationReport report;
  auto flag = [&report](std::string issue) {
    report.valid = false;
    report.issues.push_back(std::move(issue));
  };

  std::set<NodeId> seen;
  for (const auto& node : topology.nodes) {
    if (!seen.insert(node.id).second) {
      flag("duplicate node id " + std::to_string(node.id));
    }
    if (!node.roles.anchor && !node.roles.tag) {
      flag("node " + std::to_string(node.id) + " has no role");
    }
  }

  std::set<RangingPair> seen_pairs;
  for (const auto& pair : topology.pairs) {
    const std::string label =
        "pair " + std::to_string(pair.tag) + "->" + std::to_string(pair.anchor);
    if (pair.tag == pair.anchor) {
      flag(label + " connects a node to itself");
      continue;
    }
    if (!seen_pairs.insert(pair).second) {
      flag("duplicate " + label);
    }
    const NodeSpec* tag = topology.find_node(pair.tag);
    const NodeSpec* anchor = topology.find_node(pair.anchor);
    if (tag == nullptr) {
      flag(label + " references unknown tag node");
    } else if (!tag->roles.tag) {
      flag(label + " uses node " + std::to_string(pair.tag) + " as tag without the tag role");
    }
    if (anchor == nullptr) {
      flag(label + " references unknown anchor node");
    } else if (!anchor->roles.anchor) {
      flag(label + " uses node " + std::to_string(pair.anchor) +
           " as anchor without the anchor role");
    }
  }

  for (const auto& node : topology.nodes) {
    if (topology.pair_count(node.id) < 2) {
      flag("node " + std::to_string(node.id) + " takes part in fewer than two measurements");
    }
  }

  return report;
}

std::string to_string(Shape shape) {
  switch (shape) {
    case Shape::kSquare: return "square";
    case Shape::kRectangle: return "rectangle";
    case Shape::kQuadrilateral: return "quadrilateral";
  }
  throw DomainError("unknown shape value");
}

Shape shape_from_string(const std::string& name) {
  if (name == "square") return Shape::kSquare;
  if (name == "rectangle") return Shape::kRectangle;
  if (name == "quadrilateral") return Shape::kQuadrilateral;
  throw DomainError("unknown shape name: " + name);
}

std::map<NodeId, Position2D> canonical_geometry(Shape shape, double scale) {
  if (!(scale > 0.0) || !std::isfinite(scale)) {
    throw DomainError("shape scale must be positive and finite");
  }
  std::map<NodeId, Position2D> positions;
  positions[0] = {0.0, 0.0};
  positions[1] = {scale, 0.0};
  switch (shape) {
    case Shape::kSquare:
      positions[2] = {scale, scale};
      positions[3] = {0.0, scale};
      break;
    case Shape::kRectangle:
      positions[2] = {scale, 0.5 * scale};
      positions[3] = {0.0, 0.5 * scale};
      break;
    case Shape::kQuadrilateral:
      positions[2] = {1.2 * scale, 0.75 * scale};
      positions[3] = {0.25 * scale, 1.1 * scale};
      break;
  }
  return positions;
}

std::map<RangingPair, double> true_distances(const std::map<NodeId, Position2D>& positions,
                                             const NetworkTopology& topology) {
  std::map<RangingPair, double> distances;
  for (const auto& pair : topology.pairs) {
    auto tag = positions.find(pair.tag);
    auto anchor = positions.find(pair.anchor);
    if (tag == positions.end() || anchor == positions.end()) {
      throw DomainError("missing position for pair " + std::to_string(pair.tag) + "->" +
                        std::to_string(pair.anchor));
    }
    distances[pair] = distance(tag->second, anchor->second);
  }
  return distances;
}

}  // namespace coloc

#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace coloc {

/// Index of a node in the network (0..3 in the canonical four-node setup).
using NodeId = std::uint16_t;

enum class DeviceRole : std::uint8_t { kAnchor, kTag };

/// Roles carried by one physical node. A node may be an anchor, a tag, or both.
struct RoleSet {
  bool anchor = false;
  bool tag = false;

  bool operator==(const RoleSet&) const = default;
};

/// Ordered tag->anchor ranging couple. The ordering matters: calibration
/// models and measurement streams are keyed per ordered couple.
struct RangingPair {
  NodeId tag = 0;
  NodeId anchor = 0;

  auto operator<=>(const RangingPair&) const = default;
};

struct Position2D {
  double x = 0.0;
  double y = 0.0;

  bool operator==(const Position2D&) const = default;
};

double distance(const Position2D& a, const Position2D& b);

/// Gauge fixing for the relative frame: origin_node pinned at (0,0),
/// axis_node on the +x axis with y exactly 0.
struct FrameConvention {
  NodeId origin_node = 0;
  NodeId axis_node = 1;
};

struct NodeSpec {
  NodeId id = 0;
  RoleSet roles;

  bool operator==(const NodeSpec&) const = default;
};

struct NetworkTopology {
  std::vector<NodeSpec> nodes;
  std::vector<RangingPair> pairs;

  bool operator==(const NetworkTopology&) const = default;

  bool has_node(NodeId id) const;
  const NodeSpec* find_node(NodeId id) const;
  /// Number of pairs the node participates in, as tag or anchor.
  int pair_count(NodeId id) const;
  /// Pairs in which `tag` is the tag endpoint, in declaration order.
  std::vector<RangingPair> pairs_for_tag(NodeId tag) const;
};

/// The four-node network used throughout: node 0 anchor, node 1 anchor+tag,
/// nodes 2 and 3 tags; pairs d10, d20, d21, d30, d31.
NetworkTopology canonical_topology();

/// The five canonical ranging pairs in schedule order.
const std::vector<RangingPair>& canonical_pairs();

struct ValidationReport {
  bool valid = true;
  std::vector<std::string> issues;
};

/// Checks the topology invariants: pairs connect a tag device to an anchor
/// device on distinct nodes, node ids are unique, and every node takes part
/// in at least two distance measurements. Violations are reported as data,
/// never thrown.
ValidationReport validate_topology(const NetworkTopology& topology);

enum class Shape { kSquare, kRectangle, kQuadrilateral };

std::string to_string(Shape shape);
Shape shape_from_string(const std::string& name);

/// Ground-truth node positions for one of the test shapes, expressed in the
/// relative frame (node 0 at the origin, node 1 at (scale, 0)).
/// Square: side `scale`. Rectangle: scale x scale/2. Quadrilateral: a convex
/// four-gon with all sides distinct and no right angles.
std::map<NodeId, Position2D> canonical_geometry(Shape shape, double scale);

/// Euclidean distance for every pair in the topology.
std::map<RangingPair, double> true_distances(const std::map<NodeId, Position2D>& positions,
                                             const NetworkTopology& topology);

}  // namespace coloc

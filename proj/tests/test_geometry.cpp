#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "coloc/errors.hpp"
#include "coloc/geometry.hpp"
#include "coloc/io.hpp"

using namespace coloc;

namespace {

double cross(const Position2D& o, const Position2D& a, const Position2D& b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

TEST_CASE("distance matches hand-computed values") {
  CHECK(distance({0.0, 0.0}, {3.0, 4.0}) == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(distance({1.0, 1.0}, {1.0, 1.0}) == 0.0);
  CHECK(distance({-2.0, 0.0}, {2.0, 0.0}) == doctest::Approx(4.0).epsilon(1e-15));
  CHECK(distance({0.0, 0.0}, {1.0, 1.0}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("distance is symmetric and obeys the triangle inequality") {
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> coord(-50.0, 50.0);
  for (int i = 0; i < 2000; ++i) {
    const Position2D a{coord(rng), coord(rng)};
    const Position2D b{coord(rng), coord(rng)};
    const Position2D c{coord(rng), coord(rng)};
    CHECK(distance(a, b) == distance(b, a));
    CHECK(distance(a, c) <= distance(a, b) + distance(b, c) + 1e-12);
    CHECK(distance(a, b) >= 0.0);
  }
}

TEST_CASE("canonical topology: roles, pairs, and validity") {
  const NetworkTopology topology = canonical_topology();
  REQUIRE(topology.nodes.size() == 4);
  CHECK(topology.nodes[0].roles == RoleSet{.anchor = true, .tag = false});
  CHECK(topology.nodes[1].roles == RoleSet{.anchor = true, .tag = true});
  CHECK(topology.nodes[2].roles == RoleSet{.anchor = false, .tag = true});
  CHECK(topology.nodes[3].roles == RoleSet{.anchor = false, .tag = true});

  REQUIRE(topology.pairs.size() == 5);
  const std::vector<RangingPair> expected = {{1, 0}, {2, 0}, {2, 1}, {3, 0}, {3, 1}};
  CHECK(topology.pairs == expected);
  CHECK(canonical_pairs() == expected);

  const ValidationReport report = validate_topology(topology);
  CHECK(report.valid);
  CHECK(report.issues.empty());

  CHECK(topology.has_node(3));
  CHECK_FALSE(topology.has_node(4));
  CHECK(topology.pair_count(0) == 3);
  CHECK(topology.pair_count(1) == 3);
  CHECK(topology.pair_count(2) == 2);
  CHECK(topology.pair_count(3) == 2);
  CHECK(topology.pairs_for_tag(2) == std::vector<RangingPair>{{2, 0}, {2, 1}});
  CHECK(topology.pairs_for_tag(0).empty());
}

TEST_CASE("validate_topology reports each violation as data") {
  NetworkTopology topology = canonical_topology();

  SUBCASE("duplicate node id") {
    topology.nodes.push_back({2, {.anchor = false, .tag = true}});
    const auto report = validate_topology(topology);
    CHECK_FALSE(report.valid);
    CHECK(report.issues.front().find("duplicate node id 2") != std::string::npos);
  }
  SUBCASE("node without a role") {
    topology.nodes.push_back({7, {}});
    const auto report = validate_topology(topology);
    CHECK_FALSE(report.valid);
  }
  SUBCASE("self pair") {
    topology.pairs.push_back({2, 2});
    CHECK_FALSE(validate_topology(topology).valid);
  }
  SUBCASE("duplicate pair") {
    topology.pairs.push_back({2, 0});
    CHECK_FALSE(validate_topology(topology).valid);
  }
  SUBCASE("pair referencing an unknown node") {
    topology.pairs.push_back({9, 0});
    CHECK_FALSE(validate_topology(topology).valid);
  }
  SUBCASE("tag endpoint without the tag role") {
    topology.pairs.push_back({0, 1});  // node 0 is anchor-only
    CHECK_FALSE(validate_topology(topology).valid);
  }
  SUBCASE("anchor endpoint without the anchor role") {
    topology.pairs.push_back({3, 2});  // node 2 is tag-only
    CHECK_FALSE(validate_topology(topology).valid);
  }
  SUBCASE("node below two measurements") {
    topology.pairs.pop_back();  // drop 3->1, node 3 keeps only 3->0
    const auto report = validate_topology(topology);
    CHECK_FALSE(report.valid);
    bool mentioned = false;
    for (const auto& issue : report.issues) {
      if (issue.find("node 3") != std::string::npos) mentioned = true;
    }
    CHECK(mentioned);
  }
}

TEST_CASE("square and rectangle layouts are exact") {
  const auto square = canonical_geometry(Shape::kSquare, 2.0);
  CHECK(square.at(0) == Position2D{0.0, 0.0});
  CHECK(square.at(1) == Position2D{2.0, 0.0});
  CHECK(square.at(2) == Position2D{2.0, 2.0});
  CHECK(square.at(3) == Position2D{0.0, 2.0});

  const auto rectangle = canonical_geometry(Shape::kRectangle, 2.0);
  CHECK(rectangle.at(2) == Position2D{2.0, 1.0});
  CHECK(rectangle.at(3) == Position2D{0.0, 1.0});
}

TEST_CASE("quadrilateral layout matches the frozen golden file") {
  const Scene golden = load_scene(std::filesystem::path(COLOC_TEST_DATA_DIR) /
                                  "quad_scale2_golden.txt");
  const auto quad = canonical_geometry(Shape::kQuadrilateral, 2.0);
  REQUIRE(golden.positions.size() == 4);
  for (const auto& [node, position] : golden.positions) {
    CAPTURE(node);
    CHECK(quad.at(node).x == position.x);
    CHECK(quad.at(node).y == position.y);
  }
}

TEST_CASE("quadrilateral is convex with distinct sides and no right angles") {
  const auto quad = canonical_geometry(Shape::kQuadrilateral, 2.0);
  const Position2D p[4] = {quad.at(0), quad.at(1), quad.at(2), quad.at(3)};

  // Convexity: every corner turns the same way walking 0-1-2-3.
  for (int i = 0; i < 4; ++i) {
    CHECK(cross(p[i], p[(i + 1) % 4], p[(i + 2) % 4]) > 0.0);
  }

  std::set<double> side_lengths;
  for (int i = 0; i < 4; ++i) {
    const double side = distance(p[i], p[(i + 1) % 4]);
    for (double other : side_lengths) {
      CHECK(std::abs(side - other) > 1e-6);
    }
    side_lengths.insert(side);
  }

  // No right angle: adjacent edge dot products stay away from zero.
  for (int i = 0; i < 4; ++i) {
    const Position2D& a = p[(i + 3) % 4];
    const Position2D& b = p[i];
    const Position2D& c = p[(i + 1) % 4];
    const double dot = (a.x - b.x) * (c.x - b.x) + (a.y - b.y) * (c.y - b.y);
    CHECK(std::abs(dot) > 1e-3);
  }
}

TEST_CASE("layouts scale linearly and pin the frame convention") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> scales(0.1, 25.0);
  for (Shape shape : {Shape::kSquare, Shape::kRectangle, Shape::kQuadrilateral}) {
    for (int i = 0; i < 50; ++i) {
      const double s = scales(rng);
      const auto layout = canonical_geometry(shape, s);
      const auto unit = canonical_geometry(shape, 1.0);
      CHECK(layout.at(0) == Position2D{0.0, 0.0});
      CHECK(layout.at(1).x == doctest::Approx(s).epsilon(1e-15));
      CHECK(layout.at(1).y == 0.0);
      for (NodeId node : {NodeId{2}, NodeId{3}}) {
        CHECK(layout.at(node).x == doctest::Approx(unit.at(node).x * s).epsilon(1e-12));
        CHECK(layout.at(node).y == doctest::Approx(unit.at(node).y * s).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("canonical_geometry rejects degenerate scales") {
  CHECK_THROWS_AS(canonical_geometry(Shape::kSquare, 0.0), DomainError);
  CHECK_THROWS_AS(canonical_geometry(Shape::kSquare, -1.0), DomainError);
  CHECK_THROWS_AS(canonical_geometry(Shape::kSquare, std::nan("")), DomainError);
  CHECK_THROWS_AS(canonical_geometry(Shape::kSquare,
                                     std::numeric_limits<double>::infinity()),
                  DomainError);
}

TEST_CASE("true pair distances match hand-computed values") {
  const NetworkTopology topology = canonical_topology();

  const auto square = true_distances(canonical_geometry(Shape::kSquare, 2.0), topology);
  CHECK(square.at({1, 0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(square.at({2, 0}) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));
  CHECK(square.at({2, 1}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(square.at({3, 0}) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(square.at({3, 1}) == doctest::Approx(std::sqrt(8.0)).epsilon(1e-15));

  const auto rect = true_distances(canonical_geometry(Shape::kRectangle, 2.0), topology);
  CHECK(rect.at({2, 0}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));
  CHECK(rect.at({2, 1}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rect.at({3, 0}) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rect.at({3, 1}) == doctest::Approx(std::sqrt(5.0)).epsilon(1e-15));

  const auto quad = true_distances(canonical_geometry(Shape::kQuadrilateral, 2.0), topology);
  CHECK(quad.at({2, 0}) == doctest::Approx(std::sqrt(8.01)).epsilon(1e-15));
  CHECK(quad.at({2, 1}) == doctest::Approx(std::sqrt(2.41)).epsilon(1e-15));
  CHECK(quad.at({3, 0}) == doctest::Approx(std::sqrt(5.09)).epsilon(1e-15));
  CHECK(quad.at({3, 1}) == doctest::Approx(std::sqrt(7.09)).epsilon(1e-15));
}

TEST_CASE("true_distances needs a position for every pair endpoint") {
  auto positions = canonical_geometry(Shape::kSquare, 2.0);
  positions.erase(3);
  CHECK_THROWS_AS(true_distances(positions, canonical_topology()), DomainError);
}

TEST_CASE("shape names round-trip") {
  for (Shape shape : {Shape::kSquare, Shape::kRectangle, Shape::kQuadrilateral}) {
    CHECK(shape_from_string(to_string(shape)) == shape);
  }
  CHECK_THROWS_AS(shape_from_string("triangle"), DomainError);
}

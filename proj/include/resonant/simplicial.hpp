#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace resonant {

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// Vertex indices in counter-clockwise order.
using Triangle = std::array<std::size_t, 3>;

struct PointPair {
  Point2 domain;
  std::vector<double> codomain;
};

inline constexpr double kAreaTolerance = 1e-12;
inline constexpr double kDuplicateTolerance = 1e-9;
inline constexpr double kBarycentricTolerance = 1e-12;

class MapError : public std::runtime_error {
 public:
  enum class Kind {
    TooFewPoints,
    DimensionMismatch,
    DuplicatePoint,
    Collinear,
    NonFinite,
    DegenerateTriangle,
    BrokenTopology,
    Parse,
  };

  MapError(Kind kind, std::vector<std::size_t> indices, const std::string& what, int line = 0)
      : std::runtime_error(what), kind_(kind), indices_(std::move(indices)), line_(line) {}

  Kind kind() const { return kind_; }
  // Offending point or triangle indices.
  const std::vector<std::size_t>& indices() const { return indices_; }
  int line() const { return line_; }

 private:
  Kind kind_;
  std::vector<std::size_t> indices_;
  int line_;
};

// Twice the signed area of (a, b, c); positive when counter-clockwise.
double orient(Point2 a, Point2 b, Point2 c);

// Positive when d lies strictly inside the circumcircle of the
// counter-clockwise triangle (a, b, c).
double incircle(Point2 a, Point2 b, Point2 c, Point2 d);

// Delaunay triangulation. A lexicographic sweep builds an initial mesh and
// Lawson flips legalize it; only strictly non-Delaunay edges flip, so
// cocircular ties keep the sweep's diagonal. Triangles come back with the
// smallest vertex index first and sorted, making the output depend only on
// the input order.
std::vector<Triangle> triangulate(std::span<const Point2> points);

// (l1, l2, l3) with l1 + l2 + l3 = 1 and l1·a + l2·b + l3·c = p.
std::array<double, 3> barycentric(Point2 a, Point2 b, Point2 c, Point2 p);

struct HullProjection {
  Point2 point;
  std::size_t from = 0;  // hull edge endpoints
  std::size_t to = 0;
  double t = 0.0;        // point = (1 - t)·from + t·to
};

struct MeshStats {
  std::size_t points = 0;
  std::size_t triangles = 0;
  std::size_t hull_edges = 0;
  std::size_t interior_edges = 0;
  double min_area = 0.0;
};

// Piecewise-linear map from a triangulated set of points in the plane to
// parameter vectors. Immutable once built.
class SimplicialMap {
 public:
  std::size_t size() const { return domain_.size(); }
  std::size_t dimension() const { return dimension_; }
  const std::vector<Point2>& domain() const { return domain_; }
  std::span<const double> codomain(std::size_t i) const {
    return {codomain_.data() + i * dimension_, dimension_};
  }
  const std::vector<Triangle>& triangles() const { return triangles_; }
  // Boundary as counter-clockwise directed edges.
  const std::vector<std::array<std::size_t, 2>>& hull() const { return hull_; }
  const MeshStats& stats() const { return stats_; }

  // Lowest-index triangle whose closed region contains p.
  std::optional<std::size_t> locate(Point2 p) const;
  HullProjection project_to_hull(Point2 p) const;

  // Barycentric evaluation against one specific triangle.
  std::vector<double> evaluate_in(std::size_t triangle, Point2 p) const;
  // Points outside the hull evaluate at their nearest hull point.
  std::vector<double> interpolate(Point2 p) const;
  void interpolate(Point2 p, std::span<double> out) const;

  friend SimplicialMap validate_map(std::vector<PointPair> pairs);

 private:
  std::vector<Point2> domain_;
  std::vector<double> codomain_;
  std::size_t dimension_ = 0;
  std::vector<Triangle> triangles_;
  std::vector<std::array<std::size_t, 2>> hull_;
  MeshStats stats_;
};

// Checks the pairs, triangulates the domain and verifies the mesh.
SimplicialMap validate_map(std::vector<PointPair> pairs);

// Map file: a header line `n <dim>`, then `lat lon : v1 ... vn` per pair;
// `#` starts a comment.
std::vector<PointPair> parse_map(std::string_view text);
SimplicialMap load_map(const std::string& path);

}  // namespace resonant

#include "resonant/simplicial.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

namespace resonant {

namespace {

using Edge = std::array<std::size_t, 2>;

Edge key(std::size_t a, std::size_t b) { return a < b ? Edge{a, b} : Edge{b, a}; }

Triangle ccw(const std::vector<Point2>& pts, std::size_t a, std::size_t b, std::size_t c) {
  return orient(pts[a], pts[b], pts[c]) > 0.0 ? Triangle{a, b, c} : Triangle{a, c, b};
}

Triangle canonical(Triangle t) {
  const auto first = std::min_element(t.begin(), t.end()) - t.begin();
  std::rotate(t.begin(), t.begin() + first, t.end());
  return t;
}

double area(const std::vector<Point2>& pts, const Triangle& t) {
  return 0.5 * orient(pts[t[0]], pts[t[1]], pts[t[2]]);
}

// Lexicographic sweep: each new point is the rightmost so far, hence a hull
// vertex, and is joined to every hull edge it sees.
std::vector<Triangle> sweep(const std::vector<Point2>& pts) {
  const std::size_t n = pts.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (pts[a].x != pts[b].x) return pts[a].x < pts[b].x;
    if (pts[a].y != pts[b].y) return pts[a].y < pts[b].y;
    return a < b;
  });

  std::size_t apex = 0;
  for (std::size_t k = 2; k < n; ++k) {
    if (std::abs(orient(pts[order[0]], pts[order[1]], pts[order[k]])) > 2.0 * kAreaTolerance) {
      apex = k;
      break;
    }
  }
  if (apex == 0) throw MapError(MapError::Kind::Collinear, order, "all domain points are collinear");

  std::vector<Triangle> tris;
  std::vector<std::size_t> hull;
  const std::size_t q = order[apex];
  const bool left = orient(pts[order[0]], pts[order[1]], pts[q]) > 0.0;
  for (std::size_t i = 0; i + 1 < apex; ++i) tris.push_back(ccw(pts, order[i], order[i + 1], q));
  if (left) {
    for (std::size_t i = 0; i < apex; ++i) hull.push_back(order[i]);
  } else {
    for (std::size_t i = apex; i-- > 0;) hull.push_back(order[i]);
  }
  hull.push_back(q);

  for (std::size_t k = apex + 1; k < n; ++k) {
    const std::size_t p = order[k];
    const std::size_t m = hull.size();
    std::vector<bool> visible(m);
    bool any = false;
    for (std::size_t i = 0; i < m; ++i) {
      visible[i] = orient(pts[hull[i]], pts[hull[(i + 1) % m]], pts[p]) < -2.0 * kAreaTolerance;
      any = any || visible[i];
    }
    if (!any) {
      throw MapError(MapError::Kind::DegenerateTriangle, {p}, "point " + std::to_string(p) + " is degenerate with the hull");
    }
    std::size_t start = 0;
    while (!(visible[start] && !visible[(start + m - 1) % m])) ++start;
    std::size_t end = start;
    while (visible[(end + 1) % m]) end = (end + 1) % m;

    for (std::size_t j = start;; j = (j + 1) % m) {
      tris.push_back(ccw(pts, hull[j], hull[(j + 1) % m], p));
      if (j == end) break;
    }
    std::vector<std::size_t> next;
    for (std::size_t j = (end + 1) % m;; j = (j + 1) % m) {
      next.push_back(hull[j]);
      if (j == start) break;
    }
    next.push_back(p);
    hull = std::move(next);
  }
  return tris;
}

void legalize(const std::vector<Point2>& pts, std::vector<Triangle>& tris) {
  double extent = 0.0;
  for (const auto& p : pts) {
    extent = std::max({extent, std::abs(p.x - pts[0].x), std::abs(p.y - pts[0].y)});
  }
  const double tol = 1e-12 * std::pow(extent, 4);

  for (;;) {
    std::map<Edge, std::vector<std::pair<std::size_t, std::size_t>>> edges;
    for (std::size_t t = 0; t < tris.size(); ++t) {
      for (int e = 0; e < 3; ++e) {
        edges[key(tris[t][e], tris[t][(e + 1) % 3])].push_back({t, tris[t][(e + 2) % 3]});
      }
    }
    bool flipped = false;
    for (const auto& [edge, side] : edges) {
      if (side.size() != 2) continue;
      const auto [t1, a] = side[0];
      const auto [t2, b] = side[1];
      const auto& tri = tris[t1];
      if (incircle(pts[tri[0]], pts[tri[1]], pts[tri[2]], pts[b]) <= tol) continue;
      const Triangle n1 = ccw(pts, a, b, edge[0]);
      const Triangle n2 = ccw(pts, a, b, edge[1]);
      if (area(pts, n1) <= kAreaTolerance || area(pts, n2) <= kAreaTolerance) continue;
      tris[t1] = n1;
      tris[t2] = n2;
      flipped = true;
      break;
    }
    if (!flipped) return;
  }
}

}  // namespace

double orient(Point2 a, Point2 b, Point2 c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

double incircle(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double adx = a.x - d.x, ady = a.y - d.y;
  const double bdx = b.x - d.x, bdy = b.y - d.y;
  const double cdx = c.x - d.x, cdy = c.y - d.y;
  return (adx * adx + ady * ady) * (bdx * cdy - cdx * bdy) + (bdx * bdx + bdy * bdy) * (cdx * ady - adx * cdy) +
         (cdx * cdx + cdy * cdy) * (adx * bdy - bdx * ady);
}

std::vector<Triangle> triangulate(std::span<const Point2> points) {
  std::vector<Point2> pts(points.begin(), points.end());
  if (pts.size() < 3) throw MapError(MapError::Kind::TooFewPoints, {}, "need at least 3 domain points");
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!std::isfinite(pts[i].x) || !std::isfinite(pts[i].y)) {
      throw MapError(MapError::Kind::NonFinite, {i}, "domain point " + std::to_string(i) + " is not finite");
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) {
      if (std::hypot(pts[i].x - pts[j].x, pts[i].y - pts[j].y) <= kDuplicateTolerance) {
        throw MapError(MapError::Kind::DuplicatePoint, {i, j},
                       "domain points " + std::to_string(i) + " and " + std::to_string(j) + " coincide");
      }
    }
  }
  auto tris = sweep(pts);
  legalize(pts, tris);
  for (auto& t : tris) t = canonical(t);
  std::sort(tris.begin(), tris.end());
  return tris;
}

std::array<double, 3> barycentric(Point2 a, Point2 b, Point2 c, Point2 p) {
  const double den = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  if (!(std::abs(den) > 2.0 * kAreaTolerance)) throw std::invalid_argument("degenerate triangle");
  const double l2 = ((p.x - a.x) * (c.y - a.y) - (p.y - a.y) * (c.x - a.x)) / den;
  const double l3 = ((b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x)) / den;
  return {1.0 - l2 - l3, l2, l3};
}

std::optional<std::size_t> SimplicialMap::locate(Point2 p) const {
  for (std::size_t t = 0; t < triangles_.size(); ++t) {
    const auto& tri = triangles_[t];
    const auto l = barycentric(domain_[tri[0]], domain_[tri[1]], domain_[tri[2]], p);
    if (l[0] >= -kBarycentricTolerance && l[1] >= -kBarycentricTolerance && l[2] >= -kBarycentricTolerance) {
      return t;
    }
  }
  return std::nullopt;
}

HullProjection SimplicialMap::project_to_hull(Point2 p) const {
  HullProjection best;
  double best_dist = std::numeric_limits<double>::infinity();
  for (const auto& [from, to] : hull_) {
    const Point2 a = domain_[from];
    const Point2 b = domain_[to];
    const double dx = b.x - a.x, dy = b.y - a.y;
    double t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / (dx * dx + dy * dy);
    t = std::clamp(t, 0.0, 1.0);
    const Point2 q = t == 0.0 ? a : t == 1.0 ? b : Point2{a.x + t * dx, a.y + t * dy};
    const double d = std::hypot(p.x - q.x, p.y - q.y);
    if (d < best_dist) {
      best_dist = d;
      best = {q, from, to, t};
    }
  }
  return best;
}

std::vector<double> SimplicialMap::evaluate_in(std::size_t triangle, Point2 p) const {
  const auto& tri = triangles_.at(triangle);
  const auto l = barycentric(domain_[tri[0]], domain_[tri[1]], domain_[tri[2]], p);
  std::vector<double> out(dimension_);
  for (std::size_t k = 0; k < dimension_; ++k) {
    out[k] = l[0] * codomain(tri[0])[k] + l[1] * codomain(tri[1])[k] + l[2] * codomain(tri[2])[k];
  }
  return out;
}

std::vector<double> SimplicialMap::interpolate(Point2 p) const {
  std::vector<double> out(dimension_);
  interpolate(p, out);
  return out;
}

void SimplicialMap::interpolate(Point2 p, std::span<double> out) const {
  if (out.size() != dimension_) throw std::invalid_argument("output span does not match map dimension");
  if (const auto t = locate(p)) {
    const auto& tri = triangles_[*t];
    auto l = barycentric(domain_[tri[0]], domain_[tri[1]], domain_[tri[2]], p);
    if (l[0] < 0.0 || l[1] < 0.0 || l[2] < 0.0) {
      for (auto& v : l) v = std::max(v, 0.0);
      const double sum = l[0] + l[1] + l[2];
      for (auto& v : l) v /= sum;
    }
    for (std::size_t k = 0; k < dimension_; ++k) {
      out[k] = l[0] * codomain(tri[0])[k] + l[1] * codomain(tri[1])[k] + l[2] * codomain(tri[2])[k];
    }
    return;
  }
  const auto proj = project_to_hull(p);
  const auto a = codomain(proj.from);
  const auto b = codomain(proj.to);
  for (std::size_t k = 0; k < dimension_; ++k) out[k] = (1.0 - proj.t) * a[k] + proj.t * b[k];
}

SimplicialMap validate_map(std::vector<PointPair> pairs) {
  if (pairs.size() < 3) throw MapError(MapError::Kind::TooFewPoints, {}, "a map needs at least 3 point pairs");
  const std::size_t dim = pairs[0].codomain.size();
  if (dim == 0) throw MapError(MapError::Kind::DimensionMismatch, {0}, "codomain vectors must be non-empty");
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    if (pairs[i].codomain.size() != dim) {
      throw MapError(MapError::Kind::DimensionMismatch, {0, i},
                     "codomain " + std::to_string(i) + " has dimension " + std::to_string(pairs[i].codomain.size()) +
                         ", point 0 has " + std::to_string(dim));
    }
    for (double v : pairs[i].codomain) {
      if (!std::isfinite(v)) {
        throw MapError(MapError::Kind::NonFinite, {i}, "codomain " + std::to_string(i) + " is not finite");
      }
    }
  }

  SimplicialMap map;
  map.dimension_ = dim;
  for (auto& pair : pairs) {
    map.domain_.push_back(pair.domain);
    map.codomain_.insert(map.codomain_.end(), pair.codomain.begin(), pair.codomain.end());
  }
  map.triangles_ = triangulate(map.domain_);
  const auto& pts = map.domain_;
  const auto& tris = map.triangles_;

  double min_area = std::numeric_limits<double>::infinity();
  double total_area = 0.0;
  std::vector<bool> used(pts.size(), false);
  std::map<Edge, int> directed;
  std::map<Edge, int> undirected;
  for (std::size_t t = 0; t < tris.size(); ++t) {
    const double a = area(pts, tris[t]);
    if (!(a > kAreaTolerance)) {
      throw MapError(MapError::Kind::DegenerateTriangle, {t}, "triangle " + std::to_string(t) + " has no area");
    }
    min_area = std::min(min_area, a);
    total_area += a;
    for (int e = 0; e < 3; ++e) {
      const std::size_t u = tris[t][e], v = tris[t][(e + 1) % 3];
      used[u] = true;
      if (++directed[{u, v}] > 1) {
        throw MapError(MapError::Kind::BrokenTopology, {t}, "triangle " + std::to_string(t) + " overlaps a neighbour");
      }
      ++undirected[key(u, v)];
    }
  }
  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (!used[i]) throw MapError(MapError::Kind::BrokenTopology, {i}, "point " + std::to_string(i) + " is unused");
  }

  std::map<std::size_t, std::size_t> next;
  std::size_t interior = 0;
  for (const auto& [e, uses] : directed) {
    if (undirected[key(e[0], e[1])] == 2) {
      ++interior;
      continue;
    }
    next[e[0]] = e[1];
    map.hull_.push_back(e);
  }
  interior /= 2;
  // Chain boundary edges into one loop starting at the lowest vertex.
  std::vector<std::array<std::size_t, 2>> loop;
  const std::size_t first = next.begin()->first;
  std::size_t at = first;
  do {
    const auto it = next.find(at);
    if (it == next.end() || loop.size() > next.size()) {
      throw MapError(MapError::Kind::BrokenTopology, {at}, "boundary is not a single loop");
    }
    loop.push_back({at, it->second});
    at = it->second;
  } while (at != first);
  if (loop.size() != next.size()) throw MapError(MapError::Kind::BrokenTopology, {}, "boundary is not a single loop");
  map.hull_ = std::move(loop);

  double hull_area = 0.0;
  for (const auto& [u, v] : map.hull_) hull_area += 0.5 * (pts[u].x * pts[v].y - pts[v].x * pts[u].y);
  if (std::abs(hull_area - total_area) > 1e-9 * std::max(1.0, hull_area)) {
    throw MapError(MapError::Kind::BrokenTopology, {}, "triangles do not tile the convex hull");
  }

  map.stats_ = {pts.size(), tris.size(), map.hull_.size(), interior, min_area};
  return map;
}

std::vector<PointPair> parse_map(std::string_view text) {
  std::vector<PointPair> pairs;
  std::optional<std::size_t> dim;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    if (const auto hash = raw.find('#'); hash != std::string::npos) raw.erase(hash);
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fail = [&](MapError::Kind kind, const std::string& msg) {
      return MapError(kind, {pairs.size()}, "line " + std::to_string(line_no) + ": " + msg, line_no);
    };

    if (!dim) {
      std::istringstream header(raw);
      std::string tag;
      long long n = 0;
      std::string extra;
      header >> tag >> n;
      if (tag != "n" || header.fail() || n <= 0 || (header >> extra)) {
        throw fail(MapError::Kind::Parse, "expected header 'n <dim>'");
      }
      dim = static_cast<std::size_t>(n);
      continue;
    }

    const auto colon = raw.find(':');
    if (colon == std::string::npos) throw fail(MapError::Kind::Parse, "expected 'lat lon : v1 ... vn'");
    std::istringstream lhs(raw.substr(0, colon));
    std::istringstream rhs(raw.substr(colon + 1));
    PointPair pair;
    std::string extra;
    lhs >> pair.domain.x >> pair.domain.y;
    if (lhs.fail() || (lhs >> extra)) throw fail(MapError::Kind::Parse, "expected two domain coordinates");
    std::string token;
    while (rhs >> token) {
      std::size_t used = 0;
      double v = 0.0;
      try {
        v = std::stod(token, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != token.size()) throw fail(MapError::Kind::Parse, "bad number '" + token + "'");
      pair.codomain.push_back(v);
    }
    if (pair.codomain.size() != *dim) {
      throw fail(MapError::Kind::DimensionMismatch, "expected " + std::to_string(*dim) + " values, found " +
                                                        std::to_string(pair.codomain.size()));
    }
    pairs.push_back(std::move(pair));
  }
  if (!dim) throw MapError(MapError::Kind::Parse, {}, "missing header 'n <dim>'");
  return pairs;
}

SimplicialMap load_map(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw std::runtime_error("cannot open map file '" + path + "'");
  std::ostringstream buf;
  buf << file.rdbuf();
  return validate_map(parse_map(buf.str()));
}

}  // namespace resonant

#pragma once

#include "resonant/simplicial.hpp"

namespace testgeo {

// Circumcircle containment computed from the explicit circumcenter, kept
// separate from the library's determinant predicate.
inline bool strictly_inside_circumcircle(resonant::Point2 a, resonant::Point2 b, resonant::Point2 c,
                                         resonant::Point2 p, double rel_tol) {
  const double d = 2.0 * (a.x * (b.y - c.y) + b.x * (c.y - a.y) + c.x * (a.y - b.y));
  const double a2 = a.x * a.x + a.y * a.y, b2 = b.x * b.x + b.y * b.y, c2 = c.x * c.x + c.y * c.y;
  const double ux = (a2 * (b.y - c.y) + b2 * (c.y - a.y) + c2 * (a.y - b.y)) / d;
  const double uy = (a2 * (c.x - b.x) + b2 * (a.x - c.x) + c2 * (b.x - a.x)) / d;
  const double r2 = (a.x - ux) * (a.x - ux) + (a.y - uy) * (a.y - uy);
  const double p2 = (p.x - ux) * (p.x - ux) + (p.y - uy) * (p.y - uy);
  return p2 < r2 * (1.0 - rel_tol);
}

}  // namespace testgeo

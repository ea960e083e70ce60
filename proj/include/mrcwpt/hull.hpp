#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace mrcwpt {

using Vec2 = std::array<double, 2>;
using Vec3 = std::array<double, 3>;

/// Counter-clockwise hull vertices without repeats (Andrew's monotone chain).
/// Collinear input yields its two endpoints, a single point yields itself.
std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts, double eps = 1e-9);

double polygon_area(const std::vector<Vec2>& ccw);

/// Inside or within `tol` of a hull returned by convex_hull_2d.
bool hull_contains(const std::vector<Vec2>& ccw, const Vec2& p, double tol);

/// Outward-facing triangulated hull. Flat inputs (all points within eps of a
/// plane) are kept as a planar polygon so containment still works.
struct Hull3 {
  std::vector<Vec3> vertices;
  std::vector<std::array<std::size_t, 3>> faces;  // indices into vertices, outward by right-hand rule
  std::vector<Vec3> normals;                        // unit, one per face
  std::vector<double> offsets;                      // normal . x = offset on the face

  bool flat = false;
  Vec3 origin{}, e1{}, e2{}, plane_normal{};        // flat case: 2-D frame of the plane
  std::vector<Vec2> polygon;

  double volume() const;
  bool contains(const Vec3& p, double tol) const;
};

/// Quickhull with conflict lists; relative tolerance `eps` for coplanarity.
Hull3 convex_hull_3d(const std::vector<Vec3>& pts, double eps = 1e-9);

}  // namespace mrcwpt

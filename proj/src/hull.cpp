#include "mrcwpt/hull.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

namespace mrcwpt {

namespace {

double cross(const Vec2& o, const Vec2& a, const Vec2& b) {
  return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
}

Vec3 sub(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
Vec3 cross(const Vec3& a, const Vec3& b) {
  return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}
double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
Vec3 scaled(const Vec3& a, double s) { return {a[0] * s, a[1] * s, a[2] * s}; }

double segment_distance(const Vec2& a, const Vec2& b, const Vec2& p) {
  const double dx = b[0] - a[0], dy = b[1] - a[1];
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

struct Face {
  std::array<std::size_t, 3> v;
  std::array<std::size_t, 3> nb;  // neighbour across edge v[i] -> v[i+1]
  Vec3 n;
  double d;
  std::vector<std::size_t> outside;
  bool alive = true;
};

}  // namespace

std::vector<Vec2> convex_hull_2d(std::vector<Vec2> pts, double eps) {
  std::sort(pts.begin(), pts.end());
  pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
  if (pts.size() <= 1) return pts;
  double y_lo = pts.front()[1], y_hi = y_lo;
  for (const auto& p : pts) y_lo = std::min(y_lo, p[1]), y_hi = std::max(y_hi, p[1]);
  const double span = std::hypot(pts.back()[0] - pts.front()[0], y_hi - y_lo);
  // Drop a middle point only if it lies within eps * span of the chord.
  const double tol = eps * span;
  const auto turn_ok = [&](const Vec2& a, const Vec2& b, const Vec2& p) {
    return cross(a, b, p) > tol * std::hypot(p[0] - a[0], p[1] - a[1]);
  };

  std::vector<Vec2> h(2 * pts.size());
  std::size_t k = 0;
  for (const auto& p : pts) {
    while (k >= 2 && !turn_ok(h[k - 2], h[k - 1], p)) --k;
    h[k++] = p;
  }
  const std::size_t lower = k + 1;
  for (std::size_t i = pts.size() - 1; i-- > 0;) {
    while (k >= lower && !turn_ok(h[k - 2], h[k - 1], pts[i])) --k;
    h[k++] = pts[i];
  }
  h.resize(k - 1);
  // Collinear input collapses the chain onto its two endpoints.
  if (h.size() < 2) h = {pts.front(), pts.back()};
  return h;
}

double polygon_area(const std::vector<Vec2>& ccw) {
  double a = 0.0;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& p = ccw[i];
    const auto& q = ccw[(i + 1) % ccw.size()];
    a += p[0] * q[1] - p[1] * q[0];
  }
  return 0.5 * a;
}

bool hull_contains(const std::vector<Vec2>& ccw, const Vec2& p, double tol) {
  if (ccw.empty()) return false;
  if (ccw.size() == 1) return std::hypot(p[0] - ccw[0][0], p[1] - ccw[0][1]) <= tol;
  if (ccw.size() == 2) return segment_distance(ccw[0], ccw[1], p) <= tol;
  for (std::size_t i = 0; i < ccw.size(); ++i) {
    const auto& a = ccw[i];
    const auto& b = ccw[(i + 1) % ccw.size()];
    const double len = std::hypot(b[0] - a[0], b[1] - a[1]);
    if (cross(a, b, p) < -tol * len) return false;
  }
  return true;
}

double Hull3::volume() const {
  if (flat) return 0.0;
  double v = 0.0;
  for (const auto& f : faces) v += dot(vertices[f[0]], cross(vertices[f[1]], vertices[f[2]]));
  return v / 6.0;
}

bool Hull3::contains(const Vec3& p, double tol) const {
  if (flat) {
    const Vec3 r = sub(p, origin);
    if (std::abs(dot(r, plane_normal)) > tol) return false;
    return hull_contains(polygon, {dot(r, e1), dot(r, e2)}, tol);
  }
  for (std::size_t f = 0; f < faces.size(); ++f)
    if (dot(normals[f], p) - offsets[f] > tol) return false;
  return !faces.empty();
}

Hull3 convex_hull_3d(const std::vector<Vec3>& pts, double eps) {
  Hull3 out;
  if (pts.empty()) return out;
  double scale = 0.0;
  for (const auto& p : pts)
    for (double c : p) scale = std::max(scale, std::abs(c));
  const double tol = eps * std::max(scale, 1e-300);

  // Initial simplex from extreme points.
  std::array<std::size_t, 6> ext{};
  for (std::size_t i = 0; i < pts.size(); ++i)
    for (int a = 0; a < 3; ++a) {
      if (pts[i][a] < pts[ext[2 * a]][a]) ext[2 * a] = i;
      if (pts[i][a] > pts[ext[2 * a + 1]][a]) ext[2 * a + 1] = i;
    }
  std::size_t i0 = 0, i1 = 0;
  double best = -1;
  for (auto a : ext)
    for (auto b : ext)
      if (double d = norm(sub(pts[a], pts[b])); d > best) best = d, i0 = a, i1 = b;

  const Vec3 dir = best > 0 ? scaled(sub(pts[i1], pts[i0]), 1.0 / best) : Vec3{1, 0, 0};
  std::size_t i2 = i0;
  best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const Vec3 r = sub(pts[i], pts[i0]);
    if (double d = norm(cross(r, dir)); d > best) best = d, i2 = i;
  }
  Vec3 pn{0, 0, 0};
  if (best > tol) pn = cross(dir, sub(pts[i2], pts[i0]));
  else pn = std::abs(dir[0]) < 0.9 ? cross(dir, Vec3{1, 0, 0}) : cross(dir, Vec3{0, 1, 0});
  pn = scaled(pn, 1.0 / norm(pn));
  std::size_t i3 = i0;
  best = 0;
  for (std::size_t i = 0; i < pts.size(); ++i)
    if (double d = std::abs(dot(sub(pts[i], pts[i0]), pn)); d > best) best = d, i3 = i;

  if (best <= tol) {
    out.flat = true;
    out.origin = pts[i0];
    out.plane_normal = pn;
    out.e1 = dir;
    out.e2 = cross(pn, dir);
    std::vector<Vec2> flat;
    flat.reserve(pts.size());
    for (const auto& p : pts) {
      const Vec3 r = sub(p, out.origin);
      flat.push_back({dot(r, out.e1), dot(r, out.e2)});
    }
    out.polygon = convex_hull_2d(std::move(flat), eps);
    for (const auto& q : out.polygon)
      out.vertices.push_back({out.origin[0] + q[0] * out.e1[0] + q[1] * out.e2[0],
                              out.origin[1] + q[0] * out.e1[1] + q[1] * out.e2[1],
                              out.origin[2] + q[0] * out.e1[2] + q[1] * out.e2[2]});
    return out;
  }

  std::vector<Face> faces;
  const auto make_face = [&](std::size_t a, std::size_t b, std::size_t c) {
    Face f;
    f.v = {a, b, c};
    f.n = cross(sub(pts[b], pts[a]), sub(pts[c], pts[a]));
    const double len = norm(f.n);
    f.n = scaled(f.n, len > 0 ? 1.0 / len : 0.0);
    f.d = dot(f.n, pts[a]);
    return f;
  };
  const auto dist = [&](const Face& f, std::size_t i) { return dot(f.n, pts[i]) - f.d; };

  std::array<std::size_t, 4> s{i0, i1, i2, i3};
  const Face probe = make_face(i0, i1, i2);
  if (dist(probe, i3) > 0) std::swap(s[1], s[2]);  // make (s0,s1,s2) face away from s3
  const std::array<std::array<std::size_t, 3>, 4> tet{{{s[0], s[1], s[2]},
                                                        {s[0], s[3], s[1]},
                                                        {s[1], s[3], s[2]},
                                                        {s[2], s[3], s[0]}}};
  for (const auto& t : tet) faces.push_back(make_face(t[0], t[1], t[2]));
  // Link neighbours by matching reversed edges.
  for (std::size_t f = 0; f < 4; ++f)
    for (int e = 0; e < 3; ++e) {
      const std::size_t a = faces[f].v[e], b = faces[f].v[(e + 1) % 3];
      for (std::size_t g = 0; g < 4; ++g)
        for (int k = 0; k < 3; ++k)
          if (faces[g].v[k] == b && faces[g].v[(k + 1) % 3] == a) faces[f].nb[e] = g;
    }

  for (std::size_t i = 0; i < pts.size(); ++i) {
    if (i == s[0] || i == s[1] || i == s[2] || i == s[3]) continue;
    for (auto& f : faces)
      if (dist(f, i) > tol) {
        f.outside.push_back(i);
        break;
      }
  }

  std::vector<std::size_t> mark;  // stamp per face for the visibility search
  std::size_t stamp = 0;
  for (std::size_t fi = 0; fi < faces.size(); ++fi) {
    if (!faces[fi].alive || faces[fi].outside.empty()) continue;
    std::size_t apex = faces[fi].outside.front();
    double far = -1;
    for (std::size_t i : faces[fi].outside)
      if (double d = dist(faces[fi], i); d > far) far = d, apex = i;

    ++stamp;
    mark.resize(faces.size(), 0);
    std::vector<std::size_t> visible{fi}, stack{fi};
    mark[fi] = stamp;
    while (!stack.empty()) {
      const std::size_t f = stack.back();
      stack.pop_back();
      for (std::size_t g : faces[f].nb) {
        if (mark[g] == stamp || dist(faces[g], apex) <= tol) continue;
        mark[g] = stamp;
        visible.push_back(g);
        stack.push_back(g);
      }
    }

    std::unordered_map<std::size_t, std::size_t> by_start, by_end;
    std::vector<std::size_t> created;
    for (std::size_t f : visible)
      for (int e = 0; e < 3; ++e) {
        const std::size_t g = faces[f].nb[e];
        if (mark[g] == stamp) continue;
        const std::size_t a = faces[f].v[e], b = faces[f].v[(e + 1) % 3];
        Face nf = make_face(a, b, apex);
        nf.nb[0] = g;
        const std::size_t id = faces.size();
        for (auto& x : faces[g].nb)
          if (x == f) x = id;
        faces.push_back(std::move(nf));
        by_start[a] = id;
        by_end[b] = id;
        created.push_back(id);
      }
    for (std::size_t id : created) {
      faces[id].nb[1] = by_start.at(faces[id].v[1]);
      faces[id].nb[2] = by_end.at(faces[id].v[0]);
    }
    for (std::size_t f : visible) {
      faces[f].alive = false;
      for (std::size_t i : faces[f].outside) {
        if (i == apex) continue;
        for (std::size_t id : created)
          if (dist(faces[id], i) > tol) {
            faces[id].outside.push_back(i);
            break;
          }
      }
      faces[f].outside.clear();
      faces[f].outside.shrink_to_fit();
    }
  }

  std::unordered_map<std::size_t, std::size_t> remap;
  for (const auto& f : faces) {
    if (!f.alive) continue;
    std::array<std::size_t, 3> idx{};
    for (int k = 0; k < 3; ++k) {
      auto [it, fresh] = remap.try_emplace(f.v[k], out.vertices.size());
      if (fresh) out.vertices.push_back(pts[f.v[k]]);
      idx[k] = it->second;
    }
    out.faces.push_back(idx);
    out.normals.push_back(f.n);
    out.offsets.push_back(f.d);
  }
  return out;
}

}  // namespace mrcwpt

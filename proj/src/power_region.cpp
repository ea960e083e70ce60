#include "mrcwpt/power_region.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "mrcwpt/error.hpp"
#include "mrcwpt/parallel.hpp"
#include "mrcwpt/time_sharing.hpp"

namespace mrcwpt {

namespace {

std::vector<std::size_t> closed_indices(const SwitchState& sw) {
  std::vector<std::size_t> out;
  for (std::size_t n = 0; n < sw.size(); ++n)
    if (sw.closed(n)) out.push_back(n);
  return out;
}

std::size_t checked_pow(std::size_t base, std::size_t exp) {
  std::size_t r = 1;
  for (std::size_t k = 0; k < exp; ++k) {
    if (r > (std::size_t{1} << 40) / std::max<std::size_t>(base, 1))
      throw ValidationError("grid too large", "grid.resolution");
    r *= base;
  }
  return r;
}

// Appends the powers of config `cfg` at every grid point, projected on `coords`.
void sample_config(const SystemConfig& sys, const SwitchState& cfg, const RegionGrid& grid,
                   const std::vector<std::size_t>& coords, std::size_t threads,
                   std::vector<std::vector<double>>& out) {
  const auto active = closed_indices(cfg);
  const std::size_t R = grid.resolution;
  const std::size_t total = checked_pow(R, active.size());
  const std::size_t base = out.size();
  out.resize(base + total);
  parallel_for(total, threads, [&](std::size_t i) {
    LoadVector x(sys.size(), 1.0);
    std::size_t rest = i;
    for (std::size_t k = active.size(); k-- > 0;) {
      x[active[k]] = grid.axes[active[k]][rest % R];
      rest /= R;
    }
    const SteadyState st = solve_closed_form(sys, cfg, x);
    std::vector<double> p(coords.size());
    for (std::size_t c = 0; c < coords.size(); ++c) p[c] = st.p[coords[c]];
    out[base + i] = std::move(p);
  });
}

bool dominates(const std::vector<double>& a, const std::vector<double>& b) {
  for (std::size_t k = 0; k < a.size(); ++k)
    if (a[k] < b[k]) return false;
  return true;
}

// Points not weakly dominated by an earlier or larger point, sorted ascending.
std::vector<std::vector<double>> pareto_front(std::vector<std::vector<double>> pts) {
  if (pts.empty()) return pts;
  const std::size_t d = pts.front().size();
  std::sort(pts.begin(), pts.end(), std::greater<>());
  std::vector<std::vector<double>> front;
  if (d == 1) {
    front.push_back(pts.front());
  } else if (d == 2) {
    double best = -INFINITY;
    for (const auto& p : pts)
      if (p[1] > best) best = p[1], front.push_back(p);
  } else if (d == 3) {
    std::map<double, double> stair;  // p2 -> p3, p3 decreasing in p2
    for (const auto& p : pts) {
      auto it = stair.lower_bound(p[1]);
      if (it != stair.end() && it->second >= p[2]) continue;
      while (it != stair.begin()) {
        auto prev = std::prev(it);
        if (prev->second > p[2]) break;
        stair.erase(prev);
      }
      stair[p[1]] = p[2];
      front.push_back(p);
    }
  } else {
    for (const auto& p : pts) {
      bool dom = false;
      for (const auto& f : front) dom = dom || dominates(f, p);
      if (!dom) front.push_back(p);
    }
  }
  std::sort(front.begin(), front.end());
  return front;
}

}  // namespace

const char* to_string(RegionMode m) { return m == RegionMode::WithTS ? "with-ts" : "without-ts"; }

RegionGrid RegionGrid::log_spaced(const SystemConfig& sys, std::size_t resolution) {
  if (resolution < 2) throw ValidationError("must be >= 2", "grid.resolution");
  sys.validate();
  RegionGrid g;
  g.resolution = resolution;
  for (const auto& rx : sys.receivers) {
    std::vector<double> axis(resolution);
    const double ratio = rx.x_hi / rx.x_lo;
    for (std::size_t k = 0; k < resolution; ++k)
      axis[k] = rx.x_lo * std::pow(ratio, static_cast<double>(k) / static_cast<double>(resolution - 1));
    axis.front() = rx.x_lo;
    axis.back() = rx.x_hi;
    g.axes.push_back(std::move(axis));
  }
  return g;
}

std::size_t default_resolution(std::size_t active_receivers) {
  if (active_receivers <= 2) return 200;
  if (active_receivers == 3) return 60;
  return 12;
}

PowerRegionSample sample_region_without_ts(const SystemConfig& sys, const SwitchState& sw, const RegionGrid& grid,
                                           std::size_t threads) {
  sys.validate();
  if (sw.size() != sys.size() || !sw.any()) throw ValidationError("needs a nonzero mask per receiver", "mask");
  if (grid.axes.size() != sys.size()) throw ValidationError("one axis per receiver", "grid");
  PowerRegionSample s;
  s.mode = RegionMode::WithoutTS;
  s.receivers = closed_indices(sw);
  s.resolution = grid.resolution;
  sample_config(sys, sw, grid, s.receivers, threads, s.points);
  if (s.dims() <= 3) s.boundary = pareto_front(s.points);
  return s;
}

PowerRegionSample sample_region_with_ts(const SystemConfig& sys, const SwitchState& sw, const RegionGrid& grid,
                                        std::size_t threads) {
  sys.validate();
  if (sw.size() != sys.size() || !sw.any()) throw ValidationError("needs a nonzero mask per receiver", "mask");
  if (grid.axes.size() != sys.size()) throw ValidationError("one axis per receiver", "grid");
  PowerRegionSample s;
  s.mode = RegionMode::WithTS;
  s.receivers = closed_indices(sw);
  s.resolution = grid.resolution;
  s.points.push_back(std::vector<double>(s.dims(), 0.0));

  // Sub-configurations in the same order as the time-sharing enumeration.
  const std::size_t k = s.dims();
  for (const auto& sub : enumerate_configs(k).configs) {
    std::vector<bool> closed(sys.size(), false);
    for (std::size_t c = 0; c < k; ++c) closed[s.receivers[c]] = sub.closed(c);
    sample_config(sys, SwitchState(closed), grid, s.receivers, threads, s.points);
  }
  if (k <= 3) s.boundary = pareto_front(RegionHull(s).vertices());
  return s;
}

RegionHull::RegionHull(const PowerRegionSample& s) : dims_(s.dims()) {
  if (dims_ < 1 || dims_ > 3) throw ValidationError("hulls are built for 1 to 3 receivers", "region");
  if (dims_ == 3) {
    std::vector<Vec3> pts;
    pts.reserve(s.points.size());
    for (const auto& p : s.points) pts.push_back({p[0], p[1], p[2]});
    hull3_ = convex_hull_3d(pts);
    return;
  }
  std::vector<Vec2> pts;
  pts.reserve(s.points.size());
  for (const auto& p : s.points) pts.push_back({p[0], dims_ == 2 ? p[1] : 0.0});
  poly_ = convex_hull_2d(std::move(pts));
}

bool RegionHull::contains(const std::vector<double>& p, double tol) const {
  if (p.size() != dims_) throw ValidationError("point dimension mismatch", "point");
  if (dims_ == 3) return hull3_.contains({p[0], p[1], p[2]}, tol);
  return hull_contains(poly_, {p[0], dims_ == 2 ? p[1] : 0.0}, tol);
}

double RegionHull::measure() const {
  if (dims_ == 3) return hull3_.volume();
  if (dims_ == 1) return poly_.size() == 2 ? std::abs(poly_[1][0] - poly_[0][0]) : 0.0;
  return poly_.size() >= 3 ? polygon_area(poly_) : 0.0;
}

std::vector<std::vector<double>> RegionHull::vertices() const {
  std::vector<std::vector<double>> out;
  if (dims_ == 3) {
    for (const auto& v : hull3_.vertices) out.push_back({v[0], v[1], v[2]});
  } else {
    for (const auto& v : poly_) out.push_back(dims_ == 2 ? std::vector<double>{v[0], v[1]} : std::vector<double>{v[0]});
  }
  return out;
}

double mapped_area(const PowerRegionSample& s, std::size_t pixels) {
  const std::size_t R = s.resolution;
  if (s.mode != RegionMode::WithoutTS || s.dims() != 2 || s.points.size() != R * R)
    throw ValidationError("needs a full two-receiver no-TS grid sample", "region");
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& p : s.points) {
    x0 = std::min(x0, p[0]), x1 = std::max(x1, p[0]);
    y0 = std::min(y0, p[1]), y1 = std::max(y1, p[1]);
  }
  const double wx = (x1 - x0) / pixels, wy = (y1 - y0) / pixels;
  if (!(wx > 0) || !(wy > 0)) return 0.0;
  std::vector<char> hit(pixels * pixels, 0);

  const auto fill = [&](const std::vector<double>& a, const std::vector<double>& b, const std::vector<double>& c) {
    const double det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
    if (det == 0.0) return;
    const auto lo = [&](double v, double o, double w) {
      return static_cast<std::size_t>(std::clamp(std::floor((v - o) / w - 0.5), 0.0, double(pixels - 1)));
    };
    const auto hi = [&](double v, double o, double w) {
      return static_cast<std::size_t>(std::clamp(std::ceil((v - o) / w - 0.5), 0.0, double(pixels - 1)));
    };
    const std::size_t i0 = lo(std::min({a[0], b[0], c[0]}), x0, wx), i1 = hi(std::max({a[0], b[0], c[0]}), x0, wx);
    const std::size_t j0 = lo(std::min({a[1], b[1], c[1]}), y0, wy), j1 = hi(std::max({a[1], b[1], c[1]}), y0, wy);
    for (std::size_t i = i0; i <= i1; ++i)
      for (std::size_t j = j0; j <= j1; ++j) {
        const double px = x0 + (i + 0.5) * wx, py = y0 + (j + 0.5) * wy;
        const double l1 = ((b[0] - px) * (c[1] - py) - (b[1] - py) * (c[0] - px)) / det;
        const double l2 = ((c[0] - px) * (a[1] - py) - (c[1] - py) * (a[0] - px)) / det;
        const double l3 = 1.0 - l1 - l2;
        if (l1 >= 0 && l2 >= 0 && l3 >= 0) hit[i * pixels + j] = 1;
      }
  };
  for (std::size_t i = 0; i + 1 < R; ++i)
    for (std::size_t j = 0; j + 1 < R; ++j) {
      const auto& a = s.points[i * R + j];
      const auto& b = s.points[(i + 1) * R + j];
      const auto& c = s.points[(i + 1) * R + j + 1];
      const auto& d = s.points[i * R + j + 1];
      fill(a, b, c);
      fill(a, c, d);
    }
  const auto count = static_cast<double>(std::count(hit.begin(), hit.end(), 1));
  return count * wx * wy;
}

void write_region_csv(std::ostream& os, const PowerRegionSample& s, int digits) {
  if (digits < 1 || digits > 17) throw ValidationError("must lie in [1, 17]", "digits");
  for (std::size_t n : s.receivers) os << "p_" << n + 1 << ',';
  os << "section\n";
  char buf[40];
  const auto rows = [&](const std::vector<std::vector<double>>& pts, const char* tag) {
    for (const auto& p : pts) {
      for (double v : p) {
        std::snprintf(buf, sizeof buf, "%.*e", digits - 1, v);
        os << buf << ',';
      }
      os << tag << '\n';
    }
  };
  rows(s.points, "point");
  rows(s.boundary, "boundary");
}

void region_to_csv(const PowerRegionSample& s, const std::string& path, int digits) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error(path + ": cannot open for writing");
  write_region_csv(f, s, digits);
  f.flush();
  if (!f) throw std::runtime_error(path + ": write failed");
}

PowerRegionSample read_region_csv(std::istream& is, const std::string& where) {
  PowerRegionSample s;
  std::string line;
  int line_no = 1;
  if (!std::getline(is, line)) throw ParseError(where, 1, 1, "missing header");
  {
    std::istringstream hs(line);
    std::string col;
    int column = 1;
    bool saw_section = false;
    while (std::getline(hs, col, ',')) {
      if (saw_section) throw ParseError(where, 1, column, "columns after 'section'");
      if (col == "section") {
        saw_section = true;
      } else if (col.size() > 2 && col.rfind("p_", 0) == 0) {
        char* end = nullptr;
        const long n = std::strtol(col.c_str() + 2, &end, 10);
        if (*end != '\0' || n < 1) throw ParseError(where, 1, column, "bad column '" + col + "'");
        s.receivers.push_back(static_cast<std::size_t>(n - 1));
      } else {
        throw ParseError(where, 1, column, "bad column '" + col + "'");
      }
      column += static_cast<int>(col.size()) + 1;
    }
    if (!saw_section) throw ParseError(where, 1, 1, "missing 'section' column");
  }
  while (std::getline(is, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::vector<double> p;
    std::size_t pos = 0;
    for (std::size_t k = 0; k < s.receivers.size(); ++k) {
      const std::size_t comma = line.find(',', pos);
      if (comma == std::string::npos) throw ParseError(where, line_no, int(pos) + 1, "too few fields");
      const std::string field = line.substr(pos, comma - pos);
      char* end = nullptr;
      const double v = std::strtod(field.c_str(), &end);
      if (field.empty() || *end != '\0') throw ParseError(where, line_no, int(pos) + 1, "bad number '" + field + "'");
      p.push_back(v);
      pos = comma + 1;
    }
    const std::string tag = line.substr(pos);
    if (tag == "point") s.points.push_back(std::move(p));
    else if (tag == "boundary") s.boundary.push_back(std::move(p));
    else throw ParseError(where, line_no, int(pos) + 1, "unknown section '" + tag + "'");
  }
  return s;
}

}  // namespace mrcwpt

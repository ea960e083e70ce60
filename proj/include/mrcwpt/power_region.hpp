#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrcwpt/circuit.hpp"
#include "mrcwpt/hull.hpp"

namespace mrcwpt {

enum class RegionMode { WithoutTS, WithTS };

const char* to_string(RegionMode m);

/// Log-spaced load values per receiver over [x_lo, x_hi], endpoints included.
/// Resolution 2R-1 contains every value of resolution R exactly.
struct RegionGrid {
  std::size_t resolution = 0;
  std::vector<std::vector<double>> axes;

  static RegionGrid log_spaced(const SystemConfig& sys, std::size_t resolution);
};

/// 200 points per axis for two active receivers, 60 for three, 12 beyond.
std::size_t default_resolution(std::size_t active_receivers);

struct PowerRegionSample {
  RegionMode mode = RegionMode::WithoutTS;
  std::vector<std::size_t> receivers;        // 0-based receivers behind each coordinate
  std::vector<std::vector<double>> points;   // W, one coordinate per entry of `receivers`
  std::vector<std::vector<double>> boundary; // Pareto-optimal points (no TS) or hull vertices (TS)
  std::size_t resolution = 0;

  std::size_t dims() const { return receivers.size(); }
};

/// Every grid point of the receivers closed in `sw`, in lexicographic grid
/// order with the last receiver varying fastest.
PowerRegionSample sample_region_without_ts(const SystemConfig& sys, const SwitchState& sw, const RegionGrid& grid,
                                           std::size_t threads = 1);

/// Origin plus the samples of every nonzero sub-configuration of `sw`; the
/// region is their convex hull.
PowerRegionSample sample_region_with_ts(const SystemConfig& sys, const SwitchState& sw, const RegionGrid& grid,
                                        std::size_t threads = 1);

/// Convex hull of a sample's points, for dims 1 to 3.
class RegionHull {
 public:
  explicit RegionHull(const PowerRegionSample& s);
  bool contains(const std::vector<double>& p, double tol) const;
  /// Length, area or volume.
  double measure() const;
  std::vector<std::vector<double>> vertices() const;

 private:
  std::size_t dims_;
  std::vector<Vec2> poly_;  // dims 1 (as y = 0) and 2
  Hull3 hull3_;
};

/// Area of a two-receiver no-TS region, from the images of the grid cells
/// rasterized on a pixels x pixels lattice over the bounding box.
double mapped_area(const PowerRegionSample& s, std::size_t pixels = 1024);

/// Writes points then boundary; header p_<k>...,section. `digits` significant
/// digits in scientific notation (17 round-trips exactly).
void write_region_csv(std::ostream& os, const PowerRegionSample& s, int digits = 17);
void region_to_csv(const PowerRegionSample& s, const std::string& path, int digits = 17);

/// Inverse of write_region_csv; mode and resolution are not stored.
PowerRegionSample read_region_csv(std::istream& is, const std::string& where = "<stream>");

}  // namespace mrcwpt

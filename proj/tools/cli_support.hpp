#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace mrcwpt::cli {

/// "name=a:b:step". Points are a + k*step for k = 0..K with
/// K = round((b - a)/step); the last one is replaced by b, so both ends are
/// always present and b may sit up to half a step off the lattice.
struct Sweep {
  std::string name;   // e.g. "x_2", "w", "p_req_3"
  std::string base;   // "x", "w", "p_req"
  std::size_t index = 0;  // 0-based receiver; unused for "w"
  std::vector<double> values;
};

std::vector<double> sweep_values(double a, double b, double step);
Sweep parse_sweep(const std::string& spec, std::size_t receivers);

/// Fixed scientific notation, 12 significant digits; NaN prints as "nan".
std::string fmt(double v);

/// Existing paths are used as given; a bare name such as "paper_fig2" is
/// looked up as <dir>/<name>.yaml.
std::string resolve_scenario(const std::string& arg, const std::string& dir);

}  // namespace mrcwpt::cli

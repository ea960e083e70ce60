#pragma once

// Reference computations shared by the unit and acceptance suites, written
// without the library's solvers.

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "mrcwpt/circuit.hpp"
#include "support.hpp"

namespace mrcwpt::testing {

/// Measured transmitter and receiver coils; the receiver sits 0.91 m up the axis by default.
inline CoilGeometry tx_coil() { return {0.199, 0.201, 200, 0.0168e-6, {0, 0, 0}, {0, 0, 1}}; }
inline CoilGeometry rx_coil(Vec3 center = {0, 0, 0.91}, Vec3 normal = {0, 0, 1}) {
  return {0.0495, 0.0505, 10, 0.0168e-6, center, normal};
}

inline double complex_rel(Complex a, Complex b) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

inline double max_state_diff(const SteadyState& a, const SteadyState& b) {
  double worst = std::max({complex_rel(a.i_tx, b.i_tx), rel_diff(a.p_tx, b.p_tx), rel_diff(a.p_sum, b.p_sum),
                           rel_diff(a.rho, b.rho)});
  for (std::size_t n = 0; n < a.i.size(); ++n) {
    if (a.i[n] == Complex{} && b.i[n] == Complex{}) continue;
    worst = std::max({worst, complex_rel(a.i[n], b.i[n]), rel_diff(a.p[n], b.p[n])});
  }
  return worst;
}

using Big = boost::multiprecision::cpp_bin_float_50;

// {p_tx, rho, p_1..p_N} with every receiver connected, in 50 digits.
inline std::vector<Big> precise_state(const SystemConfig& sys, const std::vector<Big>& x) {
  const Big w2 = Big(sys.w) * Big(sys.w);
  Big D = sys.transmitter.r, delivered = 0;
  std::vector<Big> a(sys.size()), s(sys.size());
  for (std::size_t k = 0; k < sys.size(); ++k) {
    a[k] = w2 * Big(sys.receivers[k].h) * Big(sys.receivers[k].h);
    s[k] = Big(sys.receivers[k].coil.r) + x[k];
    D += a[k] / s[k];
    delivered += a[k] * x[k] / (s[k] * s[k]);
  }
  const Big half_v2 = Big(std::norm(sys.v_tx)) / 2;
  std::vector<Big> out{half_v2 / D, delivered / D};
  for (std::size_t k = 0; k < sys.size(); ++k) out.push_back(half_v2 * a[k] * x[k] / (s[k] * s[k] * D * D));
  return out;
}

}  // namespace mrcwpt::testing

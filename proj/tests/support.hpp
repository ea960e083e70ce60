#pragma once

// Shared fixtures for the unit and acceptance suites.

#include <cmath>
#include <random>
#include <vector>

#include "mrcwpt/circuit.hpp"

namespace mrcwpt::testing {

/// Three-receiver reference setup (measured coil parameters),
/// v_tx = 20*sqrt(2) V, w = 42.6e6 rad/s, loads bounded to [1, 100] Ohm.
inline SystemConfig reference_system(double p1 = 17.5, double p2 = 17.5, double p3 = 30.0) {
  SystemConfig sys;
  sys.v_tx = {20.0 * std::sqrt(2.0), 0.0};
  sys.w = 42.6e6;
  sys.transmitter = {1.3440, 54.0630e-3, std::nullopt};
  const double h[3] = {-0.0921e-6, 0.0402e-6, 0.0245e-6};
  const double preq[3] = {p1, p2, p3};
  for (int n = 0; n < 3; ++n) {
    ReceiverConfig rx;
    rx.coil = {0.0672, 0.0294e-3, std::nullopt};
    rx.h = h[n];
    rx.x_lo = 1.0;
    rx.x_hi = 100.0;
    rx.p_req = preq[n];
    sys.receivers.push_back(rx);
  }
  return sys.retuned(sys.w);
}

/// Receivers 1 and 2 of the reference setup only.
inline SystemConfig two_receiver_system(double w = 42.6e6) {
  SystemConfig sys = reference_system();
  sys.receivers.pop_back();
  return sys.retuned(w);
}

inline double log_uniform(std::mt19937_64& rng, double lo, double hi) {
  std::uniform_real_distribution<double> u(std::log(lo), std::log(hi));
  return std::exp(u(rng));
}

/// Random tuned system with N receivers. Quality factors are kept below 1e6
/// so the off-resonance reactances stay well resolved in double precision.
inline SystemConfig random_system(std::mt19937_64& rng, std::size_t N) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  SystemConfig sys;
  const double v = log_uniform(rng, 1.0, 100.0);
  const double phase = 2.0 * 3.14159265358979323846 * unit(rng);
  sys.v_tx = std::polar(v, phase);
  sys.w = log_uniform(rng, 1e6, 1e8);
  sys.transmitter.r = log_uniform(rng, 0.1, 10.0);
  sys.transmitter.l = log_uniform(rng, 10.0, 1e6) * sys.transmitter.r / sys.w;
  for (std::size_t n = 0; n < N; ++n) {
    ReceiverConfig rx;
    rx.coil.r = log_uniform(rng, 0.01, 1.0);
    rx.coil.l = log_uniform(rng, 10.0, 1e5) * rx.coil.r / sys.w;
    const double k = log_uniform(rng, 1e-4, 0.3);
    rx.h = (unit(rng) < 0.5 ? -1.0 : 1.0) * k * std::sqrt(rx.coil.l * sys.transmitter.l);
    rx.x_lo = log_uniform(rng, 0.1, 2.0);
    rx.x_hi = rx.x_lo * log_uniform(rng, 5.0, 200.0);
    rx.p_req = 1.0;
    sys.receivers.push_back(rx);
  }
  return sys.retuned(sys.w);
}

inline LoadVector random_loads(std::mt19937_64& rng, const SystemConfig& sys) {
  LoadVector x(sys.size());
  for (std::size_t n = 0; n < sys.size(); ++n) x[n] = log_uniform(rng, sys.receivers[n].x_lo, sys.receivers[n].x_hi);
  return x;
}

inline SwitchState random_switches(std::mt19937_64& rng, std::size_t N) {
  std::bernoulli_distribution coin(0.7);
  std::vector<bool> s(N);
  bool any = false;
  for (std::size_t n = 0; n < N; ++n) any |= (s[n] = coin(rng));
  if (!any) s[std::uniform_int_distribution<std::size_t>(0, N - 1)(rng)] = true;
  return SwitchState(s);
}

inline double rel_diff(double a, double b, double floor = 1e-300) {
  return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

}  // namespace mrcwpt::testing

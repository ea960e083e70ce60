#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mrcwpt/coil_model.hpp"

namespace mrcwpt {

using Complex = std::complex<double>;

struct ReceiverConfig {
  CoilElectrical coil;
  double h = 0.0;      // signed mutual inductance with the transmitter (H)
  double x_lo = 1.0;   // load-resistance bounds (Ohm)
  double x_hi = 1.0;
  double p_req = 1.0;  // minimum load power (W)

  bool operator==(const ReceiverConfig&) const = default;
};

/// One transmitter driving N receivers at a common resonant frequency.
struct SystemConfig {
  Complex v_tx{0.0, 0.0};
  double w = 0.0;  // rad/s
  CoilElectrical transmitter;
  std::vector<ReceiverConfig> receivers;

  std::size_t size() const { return receivers.size(); }

  /// Throws ValidationError with a field path such as "receiver.2.h".
  void validate() const;

  /// Copy with every compensator retuned for operating frequency `w_new`.
  SystemConfig retuned(double w_new) const;

  bool operator==(const SystemConfig&) const = default;
};

/// Receiver switch positions; closed(n) means load n is connected.
class SwitchState {
 public:
  SwitchState() = default;
  explicit SwitchState(std::vector<bool> closed) : closed_(std::move(closed)) {}

  static SwitchState all_closed(std::size_t n) { return SwitchState(std::vector<bool>(n, true)); }
  static SwitchState all_open(std::size_t n) { return SwitchState(std::vector<bool>(n, false)); }
  /// Parses "110" style masks, receiver 1 first.
  static SwitchState parse(const std::string& bits);

  std::size_t size() const { return closed_.size(); }
  bool closed(std::size_t n) const { return closed_[n]; }
  std::size_t count() const;
  bool any() const { return count() > 0; }
  /// Receiver 1 is the most significant bit.
  std::uint64_t value() const;
  std::string bits() const;
  /// True when every closed switch here is also closed in `outer`.
  bool subset_of(const SwitchState& outer) const;

  bool operator==(const SwitchState&) const = default;

 private:
  std::vector<bool> closed_;
};

/// Steady-state phasors and powers for one switch configuration.
struct SteadyState {
  Complex i_tx;
  std::vector<Complex> i;
  double p_tx = 0.0;
  std::vector<double> p;
  double p_sum = 0.0;
  double rho = 0.0;
};

/// Load resistances, one per receiver (entries of open receivers are ignored).
using LoadVector = std::vector<double>;

/// Exact resonant solution of the coupled circuit.
SteadyState solve_closed_form(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x);

/// Reference solution from the full complex Kirchhoff system evaluated at
/// `w_eval`, with the compensators fixed at their tuned values. Works off
/// resonance.
SteadyState solve_linear_oracle(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x,
                                double w_eval);

/// Sum over connected receivers of h_k^2 / (r_k + x_k).
double coupling_sum(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x);

/// Frequency that maximizes every |i_n| (and hence every p_n) for fixed loads.
double optimal_frequency(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x);

struct Derivatives {
  double dptx_dxn = 0.0;
  std::vector<double> dpm_dxn;  // entry n holds dpn_dxn; open receivers hold 0
  double dpn_dxn = 0.0;
  double drho_dxn = 0.0;
};

/// Closed-form partial derivatives with respect to x_n (0-based n).
Derivatives analytic_derivatives(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x,
                                 std::size_t n);

struct Thresholds {
  double phi = 0.0;     // w^2 sum_{k!=n} h_k^2/(r_k+x_k)
  double varphi = 0.0;  // w^2 sum_{k!=n} h_k^2 x_k/(r_k+x_k)^2
  double x_dot = 0.0;   // peak of p_n
  std::optional<double> x_ddot;   // peak of p_sum; empty when p_sum is monotone
  std::optional<double> x_dddot;  // peak of rho; empty when rho is monotone
  bool psum_monotone = false;     // r_tx + phi - 2 varphi <= 0
  bool rho_monotone = false;      // varphi - phi - r_tx >= 0
};

/// Peak locations of p_n, p_sum and rho as functions of x_n (0-based n).
Thresholds thresholds(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x, std::size_t n);

}  // namespace mrcwpt

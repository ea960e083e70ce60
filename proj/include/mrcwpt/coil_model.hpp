#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace mrcwpt {

using Vec3 = std::array<double, 3>;

/// Magnetic permeability of air (N/A^2).
inline constexpr double kMu0 = 4.0e-7 * 3.14159265358979323846;

/// Physical description of a circular, closely wound coil.
struct CoilGeometry {
  double inner_radius = 0.0;      // m
  double outer_radius = 0.0;      // m
  int turns = 0;
  double wire_resistivity = 0.0;  // Ohm*m
  Vec3 center{0.0, 0.0, 0.0};     // m
  Vec3 normal{0.0, 0.0, 1.0};     // unit

  double average_radius() const { return 0.5 * (outer_radius + inner_radius); }
  double wire_radius() const { return 0.5 * (outer_radius - inner_radius); }
};

/// Electrical parameters of a coil. The tuning capacitance is unset until
/// the operating frequency is known.
struct CoilElectrical {
  double r = 0.0;  // Ohm
  double l = 0.0;  // H
  std::optional<double> c;  // F

  bool operator==(const CoilElectrical&) const = default;
};

/// Throws ValidationError naming the first field that breaks an invariant.
void validate_geometry(const CoilGeometry& geom);

/// Soft checks that do not prevent evaluation (thin-wire ratio, etc.).
std::vector<std::string> geometry_warnings(const CoilGeometry& geom);

/// Thin-wire resistance and self-inductance of a circular coil.
CoilElectrical derive_coil_electrical(const CoilGeometry& geom);

/// Series capacitance that makes the coil resonate at `w`: 1/(l w^2).
double tune_capacitor(double l, double w);

/// Signed far-field (dipole) mutual inductance between `coil1`, which must sit
/// at the origin with normal +z, and an arbitrarily placed `coil2`.
/// Throws ValidationError when the coils coincide or coil1 is not canonical.
double mutual_inductance(const CoilGeometry& coil1, const CoilGeometry& coil2);

/// True when the separation is at least five times the larger average radius,
/// the range where the dipole formula is trusted.
bool dipole_approximation_valid(const CoilGeometry& coil1, const CoilGeometry& coil2);

/// Recovers h_n from a transmitter power measurement taken with only
/// receiver n connected. `direction_match` selects the sign.
double estimate_mutual_inductance(double p_tx_measured, double v_tx_magnitude, double r_tx,
                                  double r_n, double x_n, double w, bool direction_match);

}  // namespace mrcwpt

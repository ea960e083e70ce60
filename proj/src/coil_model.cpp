#include "mrcwpt/coil_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

double norm(const Vec3& v) { return std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]); }

}  // namespace

void validate_geometry(const CoilGeometry& geom) {
  if (!(geom.inner_radius > 0.0)) throw ValidationError("must be > 0", "inner_radius");
  if (!(geom.outer_radius > geom.inner_radius))
    throw ValidationError("must exceed inner_radius", "outer_radius");
  if (geom.turns <= 0) throw ValidationError("must be a positive integer", "turns");
  if (!(geom.wire_resistivity > 0.0)) throw ValidationError("must be > 0", "resistivity");
  for (double c : geom.center)
    if (!std::isfinite(c)) throw ValidationError("must be finite", "center");
  if (std::abs(norm(geom.normal) - 1.0) > 1e-12) throw ValidationError("must be a unit vector", "normal");
}

std::vector<std::string> geometry_warnings(const CoilGeometry& geom) {
  std::vector<std::string> out;
  const double ratio = geom.wire_radius() / geom.average_radius();
  if (ratio > 0.1) {
    std::ostringstream os;
    os << "wire radius is " << ratio << " of the average radius; thin-wire formulas lose accuracy";
    out.push_back(os.str());
  }
  return out;
}

CoilElectrical derive_coil_electrical(const CoilGeometry& geom) {
  validate_geometry(geom);
  const double e_ave = geom.average_radius();
  const double e_wire = geom.wire_radius();
  const double b = geom.turns;
  CoilElectrical out;
  out.r = 2.0 * geom.wire_resistivity * b * e_ave / (e_wire * e_wire);
  out.l = b * b * e_ave * kMu0 * (std::log(8.0 * e_ave / e_wire) - 2.0);
  if (!(out.l > 0.0))
    throw ValidationError("coil too thick for the thin-wire inductance formula", "outer_radius");
  return out;
}

double tune_capacitor(double l, double w) {
  if (!(l > 0.0)) throw ValidationError("must be > 0", "l");
  if (!(w > 0.0)) throw ValidationError("must be > 0", "w");
  return 1.0 / (l * w * w);
}

double mutual_inductance(const CoilGeometry& coil1, const CoilGeometry& coil2) {
  validate_geometry(coil1);
  validate_geometry(coil2);
  if (coil1.center != Vec3{0.0, 0.0, 0.0} || coil1.normal != Vec3{0.0, 0.0, 1.0})
    throw ValidationError("reference coil must be at the origin with normal +z", "transmitter");

  const auto& [xp, yp, zp] = coil2.center;
  const double d = norm(coil2.center);
  if (d == 0.0) throw ValidationError("coils coincide (zero separation)", "center");

  const double theta = std::acos(std::clamp(zp / d, -1.0, 1.0));
  const double phi = std::atan2(yp, xp);
  const double ct = std::cos(theta);
  const double st = std::sin(theta);
  const auto& n2 = coil2.normal;

  const double a1 = coil1.average_radius();
  const double a2 = coil2.average_radius();
  const double scale = -3.14159265358979323846 * kMu0 * coil1.turns * coil2.turns * a1 * a1 * a2 * a2 /
                       (4.0 * d * d * d);
  const double angular = 3.0 * ct * st * std::cos(phi) * n2[0] + 3.0 * ct * st * std::sin(phi) * n2[1] +
                         (2.0 * ct * ct - st * st) * n2[2];
  const double h = scale * angular;

  const double bound = std::sqrt(derive_coil_electrical(coil1).l * derive_coil_electrical(coil2).l);
  if (std::abs(h) > bound)
    throw NumericalError("mutual inductance exceeds sqrt(l1 l2); coils are far too close for the dipole model");
  return h;
}

bool dipole_approximation_valid(const CoilGeometry& coil1, const CoilGeometry& coil2) {
  const Vec3 diff{coil2.center[0] - coil1.center[0], coil2.center[1] - coil1.center[1],
                  coil2.center[2] - coil1.center[2]};
  return norm(diff) >= 5.0 * std::max(coil1.average_radius(), coil2.average_radius());
}

double estimate_mutual_inductance(double p_tx_measured, double v_tx_magnitude, double r_tx,
                                  double r_n, double x_n, double w, bool direction_match) {
  if (!(p_tx_measured > 0.0)) throw ValidationError("must be > 0", "p_tx");
  if (!(r_tx > 0.0)) throw ValidationError("must be > 0", "r_tx");
  if (!(r_n > 0.0)) throw ValidationError("must be > 0", "r_n");
  if (!(x_n > 0.0)) throw ValidationError("must be > 0", "x_n");
  if (!(w > 0.0)) throw ValidationError("must be > 0", "w");
  const double reflected = v_tx_magnitude * v_tx_magnitude / (2.0 * p_tx_measured) - r_tx;
  // Rounding can push an uncoupled measurement a hair below zero.
  const double tol = 1e-12 * r_tx;
  if (reflected < -tol)
    throw ValidationError("measured power exceeds |v_tx|^2/(2 r_tx); inconsistent measurement", "p_tx");
  const double magnitude = std::sqrt(std::max(reflected, 0.0) * (r_n + x_n)) / w;
  return direction_match ? magnitude : -magnitude;
}

}  // namespace mrcwpt

#pragma once

#include <cstddef>
#include <vector>

#include "mrcwpt/circuit.hpp"

namespace mrcwpt {

/// Minimum-transmitter-power charging problem for one switch configuration.
/// `p_req_eff` holds one requirement per receiver; entries <= 0 (and entries
/// of open receivers) impose no constraint.
struct ChargingProblem {
  SystemConfig sys;
  SwitchState sw;
  std::vector<double> p_req_eff;

  /// All switches closed, requirements taken from the scenario.
  static ChargingProblem from_system(const SystemConfig& sys);
  static ChargingProblem from_system(const SystemConfig& sys, const SwitchState& sw);

  void validate() const;
};

enum class SolveStatus { Optimal, Infeasible };

const char* to_string(SolveStatus s);

/// Optimizer of the convex reformulation in y = 1/(r + x).
struct P3Solution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> y;       // per receiver; open receivers hold 0
  double objective = 0.0;      // sum_k w^2 h_k^2 y_k over connected receivers
  double phase1_value = 0.0;   // smallest max-violation found by phase I (normalized)
  double kkt_residual = 0.0;
  int newton_steps = 0;
};

struct CentralSolution {
  SolveStatus status = SolveStatus::Infeasible;
  std::vector<double> x_star;  // open receivers hold NaN
  double p_tx_star = 0.0;
  std::vector<double> p;
  double kkt_residual = 0.0;
};

double to_y(double x, double r);
double from_y(double y, double r);
/// Elementwise maps over all receivers; throw ValidationError when out of range.
std::vector<double> to_y_space(const SystemConfig& sys, std::span<const double> x);
std::vector<double> from_y_space(const SystemConfig& sys, std::span<const double> y);

/// Log-barrier interior point: phase I (minimize the largest normalized
/// constraint violation) then a barrier path with damped Newton steps.
P3Solution solve_p3(const ChargingProblem& prob);

/// Centralized charging control: solve in y-space and map back to loads.
CentralSolution algorithm1(const ChargingProblem& prob);

struct OracleResult {
  bool feasible = false;
  std::vector<double> x;
  double p_tx = 0.0;
};

/// Exhaustive log-spaced grid search over at most three connected receivers.
OracleResult brute_force_oracle(const ChargingProblem& prob, std::size_t grid_resolution);

}  // namespace mrcwpt

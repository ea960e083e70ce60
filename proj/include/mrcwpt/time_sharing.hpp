#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "mrcwpt/circuit.hpp"
#include "mrcwpt/simplex.hpp"

namespace mrcwpt {

/// Nonzero switch configurations; configs[0] is all-closed, the rest follow
/// in decreasing population count, ties by decreasing binary value.
struct ConfigSet {
  std::vector<SwitchState> configs;
  std::size_t size() const { return configs.size(); }
  const SwitchState& operator[](std::size_t q) const { return configs[q]; }
};

ConfigSet enumerate_configs(std::size_t n_receivers);

struct TimeSharingSchedule {
  ConfigSet configs;
  double tau_total = 1.0;
  std::vector<double> tau;          // per config, seconds
  std::vector<LoadVector> x;        // x[q][n]; ignored where config q leaves n open

  void validate(const SystemConfig& sys) const;
};

struct AveragePowers {
  double p_tx_avg = 0.0;
  std::vector<double> p_avg;
};

/// Time-weighted closed-form powers; idle time draws and delivers nothing.
AveragePowers average_powers(const SystemConfig& sys, const TimeSharingSchedule& sched);

struct TimeLpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<double> tau;
  double p_tx_avg = 0.0;
};

/// Optimal time split for fixed per-configuration loads.
TimeLpResult solve_time_lp(const SystemConfig& sys, const ConfigSet& configs, const std::vector<LoadVector>& x,
                           double tau_total, const std::vector<double>& p_req);

/// Re-optimizes the loads of config q with the other configurations' energy
/// credited against each requirement. Throws InfeasibleError if the
/// subproblem has no solution, and ValidationError if tau_q is zero.
LoadVector solve_p4_q(const SystemConfig& sys, std::size_t q, const TimeSharingSchedule& sched,
                      const std::vector<double>& p_req);

struct Algorithm3Options {
  double tau_total = 1.0;
  double dp_stop = 1e-3;
  int max_iterations = 50;
};

struct Algorithm3Result {
  TimeSharingSchedule schedule;
  std::vector<double> p_tx_trace;  // entry 0 is the all-closed optimum
  int iterations = 0;
  bool converged = false;
  std::vector<std::string> events;  // retained-subproblem notes
};

/// Alternates the time LP with per-configuration load updates. Throws
/// InfeasibleError when the all-closed problem is infeasible.
Algorithm3Result algorithm3(const SystemConfig& sys, const Algorithm3Options& opt = {});

/// Columns: q, mask, tau, x_1..x_N, p_tx, p_1..p_N (per-configuration powers).
void write_schedule_csv(std::ostream& os, const SystemConfig& sys, const TimeSharingSchedule& sched);

}  // namespace mrcwpt

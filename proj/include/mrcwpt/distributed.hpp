#pragma once

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "mrcwpt/circuit.hpp"

namespace mrcwpt {

enum class Probe { Below, AtPeak, Above };

const char* to_string(Probe p);

/// When peers' one-bit feedback is sampled. The protocol broadcasts at the
/// start of every iteration; PerRound freezes the bits for a whole 1..N sweep
/// and exists only for sensitivity studies.
enum class FeedbackTiming { PerIteration, PerRound };

/// Flat per-iteration record; row k describes the state after iteration k+1.
struct DistributedTrace {
  std::size_t receivers = 0;
  std::vector<long> itr;
  std::vector<std::size_t> receiver;  // 0-based receiver that acted
  std::vector<int> case_id;           // 1..5
  std::vector<double> x;              // rows of size `receivers`
  std::vector<double> p;
  std::vector<double> p_tx;
  std::vector<char> fb;

  std::size_t rows() const { return itr.size(); }
  void write_csv(std::ostream& os) const;
};

struct DistributedState {
  LoadVector x;
  std::vector<bool> fb;  // fb[n]: load n currently meets its requirement
  long itr = 0;          // iterations completed
  DistributedTrace trace;
};

struct DistributedOptions {
  double dx = 1e-3;
  long itr_max = 300000;
  FeedbackTiming timing = FeedbackTiming::PerIteration;
  bool record_trace = true;
  /// Feasibility is judged over the last `window_rounds` full rounds, since
  /// the fixed-step updates settle into a small limit cycle instead of a point.
  long window_rounds = 10;
};

struct DistributedResult {
  LoadVector x;               // final iterate
  bool feasible = false;
  LoadVector x_feasible;      // last feasible iterate in the window (empty if none)
  double p_tx = 0.0;          // at x_feasible when feasible, else at x
  std::vector<double> p;
  long iterations = 0;
  long settled_at = 0;        // first iteration after which x stays within 10 dx of the final x
  std::vector<long> case_counts;  // index 1..5
  DistributedTrace trace;
};

/// fb[n] = p_n >= p_req_n within 1e-9 relative.
std::vector<bool> feedback_bits(const SystemConfig& sys, std::span<const double> p);

/// Clamped solo-peak starting loads with the feedback they produce.
DistributedState init_distributed(const SystemConfig& sys);

/// Classifies x_n against the peak of p_n by evaluating p_n at x_n +- dx with
/// every other load fixed. Probes are simulated, never applied.
Probe probe_direction(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x, std::size_t n,
                      double dx);

/// One protocol update by receiver n (0-based), using `peer_fb` as the bits
/// broadcast by the other receivers. Returns the case that fired.
int step(const SystemConfig& sys, DistributedState& state, std::size_t n, double dx, const std::vector<bool>& peer_fb,
         bool record_trace = true);

/// Round-robin simulation from receiver 1 for itr_max iterations.
DistributedResult algorithm2(const SystemConfig& sys, const DistributedOptions& opt = {});

}  // namespace mrcwpt

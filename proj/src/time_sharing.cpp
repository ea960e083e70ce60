#include "mrcwpt/time_sharing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

#include "mrcwpt/central.hpp"
#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

constexpr double kFeasTol = 1e-9;   // relative slack when rechecking requirements
constexpr double kIdleFrac = 1e-12;  // configs below this share of the horizon are not re-optimized

bool meets(const AveragePowers& avg, const std::vector<double>& p_req) {
  for (std::size_t n = 0; n < p_req.size(); ++n)
    if (avg.p_avg[n] < p_req[n] * (1.0 - kFeasTol)) return false;
  return true;
}

LoadVector solo_peak_loads(const SystemConfig& sys, const SwitchState& sw) {
  LoadVector x(sys.size(), std::numeric_limits<double>::quiet_NaN());
  const double r_tx = sys.transmitter.r;
  for (std::size_t n = 0; n < sys.size(); ++n) {
    if (!sw.closed(n)) continue;
    const auto& rx = sys.receivers[n];
    x[n] = std::clamp((rx.coil.r * r_tx + sys.w * sys.w * rx.h * rx.h) / r_tx, rx.x_lo, rx.x_hi);
  }
  return x;
}

}  // namespace

ConfigSet enumerate_configs(std::size_t n_receivers) {
  if (n_receivers < 1 || n_receivers > 16) throw ValidationError("must lie in [1, 16]", "receivers");
  const std::uint32_t full = (1u << n_receivers) - 1u;
  std::vector<std::uint32_t> masks;
  for (std::uint32_t m = full; m >= 1; --m) masks.push_back(m);
  std::stable_sort(masks.begin(), masks.end(),
                   [](std::uint32_t a, std::uint32_t b) { return std::popcount(a) > std::popcount(b); });
  ConfigSet set;
  for (std::uint32_t m : masks) {
    std::vector<bool> closed(n_receivers);
    // Receiver 1 is the most significant bit.
    for (std::size_t n = 0; n < n_receivers; ++n) closed[n] = (m >> (n_receivers - 1 - n)) & 1u;
    set.configs.emplace_back(std::move(closed));
  }
  return set;
}

void TimeSharingSchedule::validate(const SystemConfig& sys) const {
  if (!(tau_total > 0.0) || !std::isfinite(tau_total)) throw ValidationError("must be > 0", "tau_total");
  if (tau.size() != configs.size() || x.size() != configs.size())
    throw ValidationError("one entry per configuration required", "schedule");
  double sum = 0.0;
  for (std::size_t q = 0; q < configs.size(); ++q) {
    if (configs[q].size() != sys.size()) throw ValidationError("switch size mismatch", "schedule.config");
    if (!(tau[q] >= 0.0)) throw ValidationError("must be >= 0", "schedule.tau." + std::to_string(q + 1));
    sum += tau[q];
    if (tau[q] == 0.0) continue;
    if (x[q].size() != sys.size()) throw ValidationError("load vector size mismatch", "schedule.x");
    for (std::size_t n = 0; n < sys.size(); ++n) {
      if (!configs[q].closed(n)) continue;
      const auto& rx = sys.receivers[n];
      if (!(x[q][n] >= rx.x_lo && x[q][n] <= rx.x_hi))
        throw ValidationError("load outside bounds",
                              "schedule.x." + std::to_string(q + 1) + "." + std::to_string(n + 1));
    }
  }
  if (sum > tau_total * (1.0 + 1e-12)) throw ValidationError("slot times exceed the horizon", "schedule.tau");
}

AveragePowers average_powers(const SystemConfig& sys, const TimeSharingSchedule& sched) {
  sched.validate(sys);
  AveragePowers avg;
  avg.p_avg.assign(sys.size(), 0.0);
  for (std::size_t q = 0; q < sched.configs.size(); ++q) {
    if (sched.tau[q] == 0.0) continue;
    const SteadyState st = solve_closed_form(sys, sched.configs[q], sched.x[q]);
    const double f = sched.tau[q] / sched.tau_total;
    avg.p_tx_avg += f * st.p_tx;
    for (std::size_t n = 0; n < sys.size(); ++n) avg.p_avg[n] += f * st.p[n];
  }
  return avg;
}

TimeLpResult solve_time_lp(const SystemConfig& sys, const ConfigSet& configs, const std::vector<LoadVector>& x,
                           double tau_total, const std::vector<double>& p_req) {
  if (!(tau_total > 0.0)) throw ValidationError("must be > 0", "tau_total");
  if (p_req.size() != sys.size()) throw ValidationError("one requirement per receiver", "p_req");
  if (x.size() != configs.size()) throw ValidationError("one load vector per configuration", "x");
  const std::size_t Q = configs.size(), N = sys.size();

  // Work in horizon fractions theta_q = tau_q / tau_total.
  std::vector<double> a(Q);
  std::vector<std::vector<double>> b(N, std::vector<double>(Q));
  for (std::size_t q = 0; q < Q; ++q) {
    const SteadyState st = solve_closed_form(sys, configs[q], x[q]);
    a[q] = st.p_tx;
    for (std::size_t n = 0; n < N; ++n) b[n][q] = st.p[n];
  }

  LinearProgram<double> lp;
  const double a_scale = std::max(*std::max_element(a.begin(), a.end()), 1e-300);
  lp.c.resize(Q);
  for (std::size_t q = 0; q < Q; ++q) lp.c[q] = a[q] / a_scale;
  for (std::size_t n = 0; n < N; ++n) {
    const double s = std::max(*std::max_element(b[n].begin(), b[n].end()), std::max(p_req[n], 1e-300));
    std::vector<double> row(Q);
    for (std::size_t q = 0; q < Q; ++q) row[q] = b[n][q] / s;
    lp.add_row(std::move(row), RowSense::GreaterEq, p_req[n] / s);
  }
  lp.add_row(std::vector<double>(Q, 1.0), RowSense::LessEq, 1.0);

  const auto sol = simplex_minimize(lp, 1e-12, 1e-9);
  TimeLpResult res;
  res.status = sol.status;
  if (sol.status != LpStatus::Optimal) return res;
  res.tau.resize(Q);
  for (std::size_t q = 0; q < Q; ++q) {
    res.tau[q] = sol.x[q] * tau_total;
    res.p_tx_avg += sol.x[q] * a[q];
  }
  return res;
}

LoadVector solve_p4_q(const SystemConfig& sys, std::size_t q, const TimeSharingSchedule& sched,
                      const std::vector<double>& p_req) {
  sched.validate(sys);
  if (q >= sched.configs.size()) throw ValidationError("configuration index out of range", "q");
  if (!(sched.tau[q] > 0.0)) throw ValidationError("configuration has no time", "schedule.tau." + std::to_string(q + 1));
  const std::size_t N = sys.size();

  // Energy the other configurations already deliver, as horizon averages.
  std::vector<double> others(N, 0.0);
  for (std::size_t k = 0; k < sched.configs.size(); ++k) {
    if (k == q || sched.tau[k] == 0.0) continue;
    const SteadyState st = solve_closed_form(sys, sched.configs[k], sched.x[k]);
    for (std::size_t n = 0; n < N; ++n) others[n] += st.p[n] * sched.tau[k] / sched.tau_total;
  }

  ChargingProblem prob{sys, sched.configs[q], std::vector<double>(N, 0.0)};
  const double stretch = sched.tau_total / sched.tau[q];
  for (std::size_t n = 0; n < N; ++n) {
    const double deficit = p_req[n] - others[n];
    if (sched.configs[q].closed(n)) {
      prob.p_req_eff[n] = deficit * stretch;
    } else if (deficit > p_req[n] * kFeasTol) {
      throw InfeasibleError("receiver " + std::to_string(n + 1) + " is open in configuration " +
                            std::to_string(q + 1) + " and short elsewhere");
    }
  }
  const CentralSolution sol = algorithm1(prob);
  if (sol.status != SolveStatus::Optimal)
    throw InfeasibleError("configuration " + std::to_string(q + 1) + " subproblem is infeasible");
  return sol.x_star;
}

Algorithm3Result algorithm3(const SystemConfig& sys, const Algorithm3Options& opt) {
  if (!(opt.tau_total > 0.0)) throw ValidationError("must be > 0", "options.tau_total");
  if (!(opt.dp_stop >= 0.0)) throw ValidationError("must be >= 0", "options.dp_stop");
  if (opt.max_iterations < 1) throw ValidationError("must be >= 1", "options.max_iterations");
  const CentralSolution p1 = algorithm1(ChargingProblem::from_system(sys));
  if (p1.status != SolveStatus::Optimal) throw InfeasibleError("all-closed charging problem is infeasible");

  std::vector<double> p_req;
  for (const auto& rx : sys.receivers) p_req.push_back(rx.p_req);

  Algorithm3Result res;
  auto& s = res.schedule;
  s.configs = enumerate_configs(sys.size());
  s.tau_total = opt.tau_total;
  s.tau.assign(s.configs.size(), 0.0);
  s.tau[0] = opt.tau_total;
  s.x.resize(s.configs.size());
  s.x[0] = p1.x_star;
  for (std::size_t q = 1; q < s.configs.size(); ++q) s.x[q] = solo_peak_loads(sys, s.configs[q]);

  // Candidates are accepted only if they keep every requirement and do not
  // raise the average draw, so the trace is nonincreasing by construction.
  double current = average_powers(sys, s).p_tx_avg;
  res.p_tx_trace.push_back(current);
  const auto note = [&](int itr, const std::string& msg) {
    res.events.push_back("itr " + std::to_string(itr) + ": " + msg);
  };

  for (int itr = 1; itr <= opt.max_iterations; ++itr) {
    res.iterations = itr;
    const double p_prev = current;
    const TimeLpResult lp = solve_time_lp(sys, s.configs, s.x, s.tau_total, p_req);
    if (lp.status == LpStatus::Optimal) {
      auto trial = s;
      trial.tau = lp.tau;
      const AveragePowers avg = average_powers(sys, trial);
      if (!meets(avg, p_req)) {
        note(itr, "time allocation misses a requirement, kept previous");
      } else if (avg.p_tx_avg <= current) {
        s = std::move(trial);
        current = avg.p_tx_avg;
      }
    } else {
      note(itr, std::string("time LP ") + to_string(lp.status));
    }

    for (std::size_t q = 0; q < s.configs.size(); ++q) {
      if (s.tau[q] <= kIdleFrac * s.tau_total) continue;
      auto trial = s;
      try {
        trial.x[q] = solve_p4_q(sys, q, s, p_req);
      } catch (const InfeasibleError& e) {
        note(itr, "kept loads of config " + std::to_string(q + 1) + " (" + e.what() + ")");
        continue;
      }
      const AveragePowers avg = average_powers(sys, trial);
      // The interior-point answer can sit a hair above an already optimal x.
      if (avg.p_tx_avg > current) continue;
      if (!meets(avg, p_req)) {
        note(itr, "config " + std::to_string(q + 1) + " update misses a requirement, kept previous");
        continue;
      }
      s = std::move(trial);
      current = avg.p_tx_avg;
    }

    res.p_tx_trace.push_back(current);
    if (p_prev - current <= opt.dp_stop) {
      res.converged = true;
      break;
    }
  }
  return res;
}

void write_schedule_csv(std::ostream& os, const SystemConfig& sys, const TimeSharingSchedule& sched) {
  const std::size_t N = sys.size();
  os << "q,mask,tau";
  for (std::size_t n = 1; n <= N; ++n) os << ",x_" << n;
  os << ",p_tx";
  for (std::size_t n = 1; n <= N; ++n) os << ",p_" << n;
  os << '\n';
  char buf[32];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.11e", v);
    os << ',' << buf;
  };
  for (std::size_t q = 0; q < sched.configs.size(); ++q) {
    const auto& sw = sched.configs[q];
    os << q + 1 << ',' << sw.bits();
    num(sched.tau[q]);
    for (std::size_t n = 0; n < N; ++n) {
      if (sw.closed(n)) num(sched.x[q][n]);
      else os << ",nan";
    }
    const SteadyState st = solve_closed_form(sys, sw, sched.x[q]);
    num(st.p_tx);
    for (std::size_t n = 0; n < N; ++n) num(st.p[n]);
    os << '\n';
  }
}

}  // namespace mrcwpt

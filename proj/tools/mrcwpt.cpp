// Command-line front end: scenario in, CSV out.

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cli_support.hpp"
#include "mrcwpt/central.hpp"
#include "mrcwpt/distributed.hpp"
#include "mrcwpt/error.hpp"
#include "mrcwpt/parallel.hpp"
#include "mrcwpt/power_region.hpp"
#include "mrcwpt/scenario.hpp"
#include "mrcwpt/time_sharing.hpp"

using namespace mrcwpt;
using cli::fmt;

namespace {

constexpr int kOk = 0, kValidation = 1, kInfeasible = 2, kNumerical = 3;

struct Common {
  std::string scenario;
  std::string out;
  std::string sweep;
  std::string mask;
};

struct Context {
  Scenario sc;
  SwitchState sw;
  std::size_t threads = 1;
};

Context load(const Common& c, std::size_t threads) {
  Context ctx;
  ctx.sc = parse_scenario(cli::resolve_scenario(c.scenario, MRCWPT_SCENARIO_DIR));
  for (const auto& w : ctx.sc.warnings) std::cerr << "warning: " << w << '\n';
  const std::size_t N = ctx.sc.sys.size();
  ctx.sw = c.mask.empty() ? SwitchState::all_closed(N) : SwitchState::parse(c.mask);
  if (ctx.sw.size() != N)
    throw ValidationError("has " + std::to_string(ctx.sw.size()) + " bits for " + std::to_string(N) + " receivers",
                          "mask");
  ctx.threads = threads;
  return ctx;
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  std::ofstream f(path);
  f << text;
  f.flush();
  if (!f) throw std::runtime_error(path + ": cannot write");
}

std::vector<double> default_loads(const SystemConfig& sys) {
  std::vector<double> x;
  for (const auto& rx : sys.receivers) x.push_back(std::sqrt(rx.x_lo * rx.x_hi));
  return x;
}

std::vector<double> parse_loads(const std::string& s, const SystemConfig& sys) {
  if (s.empty()) return default_loads(sys);
  std::vector<double> x;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    std::size_t used = 0;
    double v = NAN;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
    }
    if (used != item.size() || !(v > 0.0)) throw ValidationError("'" + item + "' is not a positive number", "x");
    x.push_back(v);
  }
  if (x.size() != sys.size())
    throw ValidationError("expected " + std::to_string(sys.size()) + " comma-separated loads", "x");
  return x;
}

std::string cols(const std::string& prefix, std::size_t N) {
  std::string s;
  for (std::size_t n = 1; n <= N; ++n) s += "," + prefix + std::to_string(n);
  return s;
}

/// Evaluates rows in parallel and concatenates them in order.
std::string run_rows(std::size_t count, std::size_t threads, const std::function<std::string(std::size_t)>& row) {
  std::vector<std::string> rows(count);
  parallel_for(count, threads, [&](std::size_t k) { rows[k] = row(k); });
  std::string out;
  for (auto& r : rows) out += r;
  return out;
}

// ---- analyze

std::string analyze_header(std::size_t N) {
  std::string h = "w" + cols("x_", N) + ",p_tx" + cols("p_", N) + ",p_sum,rho";
  h += cols("xdot_", N) + cols("xddot_", N) + cols("xdddot_", N) + ",w_dot";
  h += cols("dptx_dx_", N);
  for (std::size_t n = 1; n <= N; ++n)
    for (std::size_t m = 1; m <= N; ++m) h += ",dp" + std::to_string(m) + "_dx" + std::to_string(n);
  h += cols("drho_dx_", N);
  return h + "\n";
}

std::string analyze_row(const SystemConfig& sys, const SwitchState& sw, const std::vector<double>& x) {
  const std::size_t N = sys.size();
  const auto st = solve_closed_form(sys, sw, x);
  std::string r = fmt(sys.w);
  for (std::size_t n = 0; n < N; ++n) r += "," + (sw.closed(n) ? fmt(x[n]) : std::string("nan"));
  r += "," + fmt(st.p_tx);
  for (double p : st.p) r += "," + fmt(p);
  r += "," + fmt(st.p_sum) + "," + fmt(st.rho);

  std::vector<Thresholds> th(N);
  std::vector<Derivatives> dv(N);
  for (std::size_t n = 0; n < N; ++n) {
    if (!sw.closed(n)) continue;
    th[n] = thresholds(sys, sw, x, n);
    dv[n] = analytic_derivatives(sys, sw, x, n);
  }
  const auto per = [&](auto get) {
    for (std::size_t n = 0; n < N; ++n) r += "," + (sw.closed(n) ? fmt(get(n)) : std::string("nan"));
  };
  per([&](std::size_t n) { return th[n].x_dot; });
  per([&](std::size_t n) { return th[n].x_ddot.value_or(NAN); });
  per([&](std::size_t n) { return th[n].x_dddot.value_or(NAN); });
  r += "," + fmt(optimal_frequency(sys, sw, x));
  per([&](std::size_t n) { return dv[n].dptx_dxn; });
  for (std::size_t n = 0; n < N; ++n)
    for (std::size_t m = 0; m < N; ++m)
      r += "," + (sw.closed(n) && sw.closed(m) ? fmt(dv[n].dpm_dxn[m]) : std::string("nan"));
  per([&](std::size_t n) { return dv[n].drho_dxn; });
  return r + "\n";
}

int cmd_analyze(const Common& c, const std::string& loads, std::size_t threads) {
  const auto ctx = load(c, threads);
  const auto& sys = ctx.sc.sys;
  const auto x0 = parse_loads(loads, sys);
  std::string out = analyze_header(sys.size());
  if (c.sweep.empty()) {
    out += analyze_row(sys, ctx.sw, x0);
  } else {
    const auto sw = cli::parse_sweep(c.sweep, sys.size());
    if (sw.base != "x" && sw.base != "w") throw ValidationError("analyze sweeps x_n or w", "sweep");
    if (sw.base == "x" && !ctx.sw.closed(sw.index)) throw ValidationError("receiver is open in --mask", "sweep");
    out += run_rows(sw.values.size(), ctx.threads, [&](std::size_t k) {
      auto x = x0;
      if (sw.base == "w") {
        if (!(sw.values[k] > 0.0)) throw ValidationError("must be > 0", "w");
        return analyze_row(sys.retuned(sw.values[k]), ctx.sw, x);
      }
      x[sw.index] = sw.values[k];
      if (!(x[sw.index] > 0.0)) throw ValidationError("must be > 0", sw.name);
      return analyze_row(sys, ctx.sw, x);
    });
  }
  emit(out, c.out);
  return kOk;
}

// ---- sweeps over a requirement

std::vector<SystemConfig> requirement_sweep(const Context& ctx, const std::string& spec) {
  if (spec.empty()) return {ctx.sc.sys};
  const auto sw = cli::parse_sweep(spec, ctx.sc.sys.size());
  if (sw.base != "p_req") throw ValidationError("only p_req_n sweeps are supported here", "sweep");
  std::vector<SystemConfig> out;
  for (double v : sw.values) {
    auto sys = ctx.sc.sys;
    sys.receivers[sw.index].p_req = v;
    sys.validate();
    out.push_back(std::move(sys));
  }
  return out;
}

std::string preq_cells(const SystemConfig& sys) {
  std::string r;
  for (const auto& rx : sys.receivers) r += (r.empty() ? "" : ",") + fmt(rx.p_req);
  return r;
}

/// Single runs report infeasibility through the exit code; a sweep only does
/// so when every point is infeasible.
int infeasible_code(std::size_t infeasible, std::size_t total) {
  return infeasible > 0 && infeasible == total ? kInfeasible : kOk;
}

double central_ptx(const SystemConfig& sys, const SwitchState& sw) {
  const auto r = algorithm1(ChargingProblem::from_system(sys, sw));
  return r.status == SolveStatus::Optimal ? r.p_tx_star : NAN;
}

// ---- optimize

int cmd_optimize(const Common& c, std::size_t threads) {
  const auto ctx = load(c, threads);
  const auto systems = requirement_sweep(ctx, c.sweep);
  const std::size_t N = ctx.sc.sys.size();
  std::vector<char> bad(systems.size(), 0);
  std::string out = cols("p_req_", N).substr(1) + ",status" + cols("x_", N) + ",p_tx" + cols("p_", N) +
                    ",kkt_residual\n";
  out += run_rows(systems.size(), ctx.threads, [&](std::size_t k) {
    const auto& sys = systems[k];
    const auto r = algorithm1(ChargingProblem::from_system(sys, ctx.sw));
    const bool ok = r.status == SolveStatus::Optimal;
    bad[k] = !ok;
    std::string row = preq_cells(sys) + "," + to_string(r.status);
    for (std::size_t n = 0; n < N; ++n) row += "," + (ok ? fmt(r.x_star[n]) : std::string("nan"));
    row += "," + (ok ? fmt(r.p_tx_star) : std::string("nan"));
    for (std::size_t n = 0; n < N; ++n) row += "," + (ok ? fmt(r.p[n]) : std::string("nan"));
    return row + "," + (ok ? fmt(r.kkt_residual) : std::string("nan")) + "\n";
  });
  emit(out, c.out);
  return infeasible_code(std::count(bad.begin(), bad.end(), 1), systems.size());
}

// ---- distributed

struct DistributedFlags {
  std::optional<double> dx;
  std::optional<long> itr_max;
  std::optional<long> window_rounds;
  std::string trace;
};

int cmd_distributed(const Common& c, const DistributedFlags& f, std::size_t threads) {
  if (!c.mask.empty()) throw ValidationError("not supported by this command", "mask");
  const auto ctx = load(c, threads);
  const auto systems = requirement_sweep(ctx, c.sweep);
  if (!f.trace.empty() && systems.size() > 1) throw ValidationError("cannot be combined with --sweep", "trace");
  DistributedOptions opt;
  opt.dx = f.dx.value_or(ctx.sc.options.dx);
  opt.itr_max = f.itr_max.value_or(ctx.sc.options.itr_max);
  opt.window_rounds = f.window_rounds.value_or(ctx.sc.options.window_rounds);
  opt.record_trace = !f.trace.empty();
  if (!(opt.dx > 0.0)) throw ValidationError("must be > 0", "dx");
  if (opt.itr_max < 1) throw ValidationError("must be >= 1", "itr-max");
  if (opt.window_rounds < 1) throw ValidationError("must be >= 1", "window-rounds");

  const std::size_t N = ctx.sc.sys.size();
  std::vector<char> bad(systems.size(), 0);
  std::vector<DistributedTrace> traces(systems.size());
  std::string out = cols("p_req_", N).substr(1) + ",feasible,iterations,settled_at" + cols("x_", N) + ",p_tx" +
                    cols("p_", N) + ",p_tx_central\n";
  out += run_rows(systems.size(), ctx.threads, [&](std::size_t k) {
    const auto& sys = systems[k];
    auto r = algorithm2(sys, opt);
    bad[k] = !r.feasible;
    const auto& x = r.feasible ? r.x_feasible : r.x;
    std::string row = preq_cells(sys) + "," + (r.feasible ? "1" : "0") + "," + std::to_string(r.iterations) + "," +
                      std::to_string(r.settled_at);
    for (double v : x) row += "," + fmt(v);
    row += "," + fmt(r.p_tx);
    for (double p : r.p) row += "," + fmt(p);
    traces[k] = std::move(r.trace);
    return row + "," + fmt(central_ptx(sys, SwitchState::all_closed(N))) + "\n";
  });
  emit(out, c.out);
  if (!f.trace.empty()) {
    std::ostringstream t;
    traces[0].write_csv(t);
    emit(t.str(), f.trace);
  }
  return infeasible_code(std::count(bad.begin(), bad.end(), 1), systems.size());
}

// ---- timeshare

struct TimeshareFlags {
  std::optional<double> dp_stop;
  std::optional<double> tau_total;
  std::string trace;
};

int cmd_timeshare(const Common& c, const TimeshareFlags& f, std::size_t threads) {
  if (!c.mask.empty()) throw ValidationError("not supported by this command", "mask");
  const auto ctx = load(c, threads);
  Algorithm3Options opt;
  opt.dp_stop = f.dp_stop.value_or(ctx.sc.options.dp_stop);
  opt.tau_total = f.tau_total.value_or(ctx.sc.options.tau_total);
  if (!(opt.dp_stop >= 0.0)) throw ValidationError("must be >= 0", "dp-stop");
  if (!(opt.tau_total > 0.0)) throw ValidationError("must be > 0", "tau-total");
  const std::size_t N = ctx.sc.sys.size();

  if (c.sweep.empty()) {
    const auto r = algorithm3(ctx.sc.sys, opt);  // InfeasibleError -> exit 2
    for (const auto& e : r.events) std::cerr << "note: " << e << '\n';
    std::ostringstream os;
    write_schedule_csv(os, ctx.sc.sys, r.schedule);
    emit(os.str(), c.out);
    if (!f.trace.empty()) {
      std::string t = "itr,p_tx\n";
      for (std::size_t k = 0; k < r.p_tx_trace.size(); ++k) t += std::to_string(k) + "," + fmt(r.p_tx_trace[k]) + "\n";
      emit(t, f.trace);
    }
    return kOk;
  }
  if (!f.trace.empty()) throw ValidationError("cannot be combined with --sweep", "trace");
  const auto systems = requirement_sweep(ctx, c.sweep);
  std::vector<char> bad(systems.size(), 0);
  std::string out = cols("p_req_", N).substr(1) + ",status,iterations,converged,p_tx,p_tx_central\n";
  out += run_rows(systems.size(), ctx.threads, [&](std::size_t k) {
    const auto& sys = systems[k];
    std::string row = preq_cells(sys);
    try {
      const auto r = algorithm3(sys, opt);
      row += ",optimal," + std::to_string(r.iterations) + "," + (r.converged ? "1" : "0") + "," +
             fmt(r.p_tx_trace.back());
    } catch (const InfeasibleError&) {
      bad[k] = 1;
      row += ",infeasible,0,0,nan";
    }
    return row + "," + fmt(central_ptx(sys, SwitchState::all_closed(N))) + "\n";
  });
  emit(out, c.out);
  return infeasible_code(std::count(bad.begin(), bad.end(), 1), systems.size());
}

// ---- region

struct RegionFlags {
  bool with_ts = false;
  bool summary = false;
  std::size_t resolution = 0;
  std::optional<double> w;
};

int cmd_region(const Common& c, const RegionFlags& f, std::size_t threads) {
  if (!c.sweep.empty()) throw ValidationError("not supported by this command", "sweep");
  const auto ctx = load(c, threads);
  auto sys = ctx.sc.sys;
  if (f.w) {
    if (!(*f.w > 0.0)) throw ValidationError("must be > 0", "w");
    sys = sys.retuned(*f.w);
  }
  std::size_t res = f.resolution ? f.resolution : ctx.sc.options.grid_resolution;
  if (!res) res = default_resolution(ctx.sw.count());
  const auto grid = RegionGrid::log_spaced(sys, res);
  const auto plain = sample_region_without_ts(sys, ctx.sw, grid, ctx.threads);
  const auto sample = f.with_ts ? sample_region_with_ts(sys, ctx.sw, grid, ctx.threads) : plain;

  std::size_t outside = 0;
  if (f.with_ts) {
    const RegionHull hull(sample);
    for (const auto& p : plain.points) outside += !hull.contains(p, 1e-6);
    std::cerr << "containment: " << plain.points.size() - outside << "/" << plain.points.size()
              << " samples without time sharing inside the time-sharing hull\n";
  }

  if (f.summary) {
    std::string s = "key,value\n";
    s += "w," + fmt(sys.w) + "\n";
    s += "mode," + std::string(to_string(sample.mode)) + "\n";
    s += "mask," + ctx.sw.bits() + "\n";
    s += "resolution," + std::to_string(res) + "\n";
    s += "points," + std::to_string(sample.points.size()) + "\n";
    s += "boundary_points," + std::to_string(sample.boundary.size()) + "\n";
    s += "hull_measure," + fmt(RegionHull(sample).measure()) + "\n";
    s += "mapped_area," + fmt(plain.dims() == 2 ? mapped_area(plain) : NAN) + "\n";
    if (f.with_ts) s += "outside," + std::to_string(outside) + "\n";
    emit(s, c.out);
  } else {
    std::ostringstream os;
    write_region_csv(os, sample, 12);
    emit(os.str(), c.out);
  }
  if (outside > 0) throw NumericalError(std::to_string(outside) + " samples fall outside the time-sharing hull");
  return kOk;
}

// ---- estimate-h

struct EstimateFlags {
  std::size_t receiver = 0;
  double p_tx = 0;
  int direction = 0;
  std::optional<double> x;
};

int cmd_estimate(const Common& c, const EstimateFlags& f, std::size_t threads) {
  if (!c.sweep.empty() || !c.mask.empty()) throw ValidationError("only --receiver, --ptx, --direction, --x", "flags");
  const auto ctx = load(c, threads);
  const auto& sys = ctx.sc.sys;
  if (f.receiver < 1 || f.receiver > sys.size())
    throw ValidationError("must lie in 1.." + std::to_string(sys.size()), "receiver");
  const auto& rx = sys.receivers[f.receiver - 1];
  const double x = f.x.value_or(std::sqrt(rx.x_lo * rx.x_hi));
  const double h = estimate_mutual_inductance(f.p_tx, std::abs(sys.v_tx), sys.transmitter.r, rx.coil.r, x, sys.w,
                                              f.direction == 1);
  emit("receiver,x,p_tx,h,h_scenario\n" + std::to_string(f.receiver) + "," + fmt(x) + "," + fmt(f.p_tx) + "," +
           fmt(h) + "," + fmt(rx.h) + "\n",
       c.out);
  return kOk;
}

void add_common(CLI::App* sub, Common& c, bool sweep, bool mask) {
  sub->add_option("scenario", c.scenario, "Scenario file, or a bundled name such as paper_fig2")->required();
  sub->add_option("--out", c.out, "Write the CSV here instead of stdout");
  if (sweep) sub->add_option("--sweep", c.sweep, "name=a:b:step, both ends included");
  if (mask) sub->add_option("--mask", c.mask, "Switch states, receiver 1 first (e.g. 110)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic resonant coupling WPT: analysis, charging control, time sharing, power regions"};
  app.require_subcommand(1);
  int threads = 0;
  app.add_option("--threads", threads, "Worker threads (default: MRC_THREADS or all cores)");

  Common common;
  std::string loads;
  DistributedFlags dflags;
  TimeshareFlags tflags;
  RegionFlags rflags;
  EstimateFlags eflags;

  auto* analyze = app.add_subcommand("analyze", "Steady state, peak thresholds and derivatives");
  add_common(analyze, common, true, true);
  analyze->add_option("--x", loads, "Comma-separated loads in Ohm (default: geometric mean of the bounds)");

  auto* optimize = app.add_subcommand("optimize", "Centralized minimum transmit power");
  add_common(optimize, common, true, true);

  auto* distributed = app.add_subcommand("distributed", "Distributed one-bit feedback control");
  add_common(distributed, common, true, false);
  distributed->add_option("--dx", dflags.dx, "Load step in Ohm");
  distributed->add_option("--itr-max", dflags.itr_max, "Iterations");
  distributed->add_option("--window-rounds", dflags.window_rounds, "Rounds inspected for the feasibility verdict");
  distributed->add_option("--trace", dflags.trace, "Write the per-iteration trace CSV here");

  auto* timeshare = app.add_subcommand("timeshare", "Time sharing over switch configurations");
  add_common(timeshare, common, true, false);
  timeshare->add_option("--dp-stop", tflags.dp_stop, "Stop when p_tx improves by less than this (W)");
  timeshare->add_option("--tau-total", tflags.tau_total, "Horizon length (s)");
  timeshare->add_option("--trace", tflags.trace, "Write the outer-loop p_tx trace CSV here");

  auto* region = app.add_subcommand("region", "Achievable power region samples");
  add_common(region, common, false, true);
  region->add_flag("--with-ts", rflags.with_ts, "Include time sharing over sub-configurations");
  region->add_flag("--summary", rflags.summary, "Print counts and areas instead of the samples");
  region->add_option("--resolution", rflags.resolution, "Grid points per load axis");
  region->add_option("--w", rflags.w, "Operating frequency in rad/s (compensators retuned)");

  auto* estimate = app.add_subcommand("estimate-h", "Mutual inductance from a transmitter power reading");
  add_common(estimate, common, false, false);
  estimate->add_option("--receiver", eflags.receiver, "Receiver index, 1-based")->required();
  estimate->add_option("--ptx", eflags.p_tx, "Measured transmitter power (W)")->required();
  estimate->add_option("--direction", eflags.direction, "1 when the coil orientation matches the transmitter")
      ->required()
      ->check(CLI::IsMember({0, 1}));
  estimate->add_option("--x", eflags.x, "Load of the receiver during the reading (Ohm)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    std::cout << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << "\n\n";
    const auto* sub = app.get_subcommands().empty() ? &app : app.get_subcommands().front();
    std::cerr << sub->help();
    return kValidation;
  }

  try {
    const std::size_t n_threads = resolve_threads(threads);
    if (*analyze) return cmd_analyze(common, loads, n_threads);
    if (*optimize) return cmd_optimize(common, n_threads);
    if (*distributed) return cmd_distributed(common, dflags, n_threads);
    if (*timeshare) return cmd_timeshare(common, tflags, n_threads);
    if (*region) return cmd_region(common, rflags, n_threads);
    return cmd_estimate(common, eflags, n_threads);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return kInfeasible;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kValidation;
  }
}

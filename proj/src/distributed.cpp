#include "mrcwpt/distributed.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

constexpr double kReqTol = 1e-9;     // relative band treated as "exactly at p_req"
constexpr double kProbeTol = 1e-12;  // W; absorbs rounding flicker in probe comparisons

void record(DistributedTrace& t, long itr, std::size_t n, int case_id, const DistributedState& s,
            const SteadyState& st) {
  t.itr.push_back(itr);
  t.receiver.push_back(n);
  t.case_id.push_back(case_id);
  t.x.insert(t.x.end(), s.x.begin(), s.x.end());
  t.p.insert(t.p.end(), st.p.begin(), st.p.end());
  t.p_tx.push_back(st.p_tx);
  for (bool b : s.fb) t.fb.push_back(b ? 1 : 0);
}

}  // namespace

const char* to_string(Probe p) {
  switch (p) {
    case Probe::Below: return "below";
    case Probe::AtPeak: return "at-peak";
    case Probe::Above: return "above";
  }
  return "?";
}

void DistributedTrace::write_csv(std::ostream& os) const {
  os << "itr,receiver,case";
  for (std::size_t n = 1; n <= receivers; ++n) os << ",x_" << n;
  for (std::size_t n = 1; n <= receivers; ++n) os << ",p_" << n;
  os << ",p_tx";
  for (std::size_t n = 1; n <= receivers; ++n) os << ",fb_" << n;
  os << '\n';
  char buf[32];
  const auto num = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.11e", v);
    os << ',' << buf;
  };
  for (std::size_t k = 0; k < rows(); ++k) {
    os << itr[k] << ',' << receiver[k] + 1 << ',' << case_id[k];
    for (std::size_t n = 0; n < receivers; ++n) num(x[k * receivers + n]);
    for (std::size_t n = 0; n < receivers; ++n) num(p[k * receivers + n]);
    num(p_tx[k]);
    for (std::size_t n = 0; n < receivers; ++n) os << ',' << int(fb[k * receivers + n]);
    os << '\n';
  }
}

std::vector<bool> feedback_bits(const SystemConfig& sys, std::span<const double> p) {
  std::vector<bool> fb(sys.size());
  for (std::size_t n = 0; n < sys.size(); ++n) fb[n] = p[n] >= sys.receivers[n].p_req * (1.0 - kReqTol);
  return fb;
}

DistributedState init_distributed(const SystemConfig& sys) {
  sys.validate();
  DistributedState s;
  s.x.resize(sys.size());
  const double w2 = sys.w * sys.w;
  const double r_tx = sys.transmitter.r;
  for (std::size_t n = 0; n < sys.size(); ++n) {
    const auto& rx = sys.receivers[n];
    const double solo_peak = (rx.coil.r * r_tx + w2 * rx.h * rx.h) / r_tx;
    s.x[n] = std::min(std::max(solo_peak, rx.x_lo), rx.x_hi);
  }
  const SteadyState st = solve_closed_form(sys, SwitchState::all_closed(sys.size()), s.x);
  s.fb = feedback_bits(sys, st.p);
  s.trace.receivers = sys.size();
  return s;
}

Probe probe_direction(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x, std::size_t n,
                      double dx) {
  if (!(dx > 0.0)) throw ValidationError("must be > 0", "dx");
  if (n >= sys.size() || !sw.closed(n)) throw ValidationError("receiver must be connected", "n");
  LoadVector probe(x.begin(), x.end());
  const double p0 = solve_closed_form(sys, sw, probe).p[n];
  probe[n] = x[n] + dx;
  const double p_up = solve_closed_form(sys, sw, probe).p[n];
  // Keep the lower probe inside the positive domain.
  probe[n] = std::max(x[n] - dx, 0.5 * x[n]);
  const double p_down = solve_closed_form(sys, sw, probe).p[n];
  if (p_up > p0 + kProbeTol) return Probe::Below;
  if (p_down > p0 + kProbeTol) return Probe::Above;
  return Probe::AtPeak;
}

int step(const SystemConfig& sys, DistributedState& state, std::size_t n, double dx, const std::vector<bool>& peer_fb,
         bool record_trace) {
  const auto sw = SwitchState::all_closed(sys.size());
  const auto& rx = sys.receivers[n];
  const double p_n = solve_closed_form(sys, sw, state.x).p[n];
  const bool short_of = p_n < rx.p_req * (1.0 - kReqTol);
  const bool surplus = p_n > rx.p_req * (1.0 + kReqTol);

  int case_id = 5;
  if (short_of || surplus) {
    const Probe dir = probe_direction(sys, sw, state.x, n, dx);
    if (short_of) {
      if (dir == Probe::Below) case_id = 1;
      else if (dir == Probe::Above) case_id = 2;
    } else if (dir != Probe::AtPeak) {
      bool peer_short = false;
      for (std::size_t m = 0; m < sys.size(); ++m)
        if (m != n && !peer_fb[m]) peer_short = true;
      case_id = peer_short ? 3 : 4;
    }
  }

  double& xn = state.x[n];
  if (case_id == 1 || case_id == 3) xn = std::min(rx.x_hi, xn + dx);
  if (case_id == 2 || case_id == 4) xn = std::max(rx.x_lo, xn - dx);

  ++state.itr;
  const SteadyState st = solve_closed_form(sys, sw, state.x);
  state.fb = feedback_bits(sys, st.p);
  if (record_trace) record(state.trace, state.itr, n, case_id, state, st);
  return case_id;
}

DistributedResult algorithm2(const SystemConfig& sys, const DistributedOptions& opt) {
  if (!(opt.dx > 0.0)) throw ValidationError("must be > 0", "options.dx");
  if (opt.itr_max < 1) throw ValidationError("must be >= 1", "options.itr_max");
  DistributedState state = init_distributed(sys);
  const std::size_t N = sys.size();
  const auto sw = SwitchState::all_closed(N);

  DistributedResult res;
  res.case_counts.assign(6, 0);
  std::vector<double> history;
  history.reserve(static_cast<std::size_t>(opt.itr_max) * N);
  const long window = std::max(1L, opt.window_rounds) * static_cast<long>(N);

  std::vector<bool> peer_fb = state.fb;
  for (long itr = 1; itr <= opt.itr_max; ++itr) {
    const std::size_t n = static_cast<std::size_t>((itr - 1) % static_cast<long>(N));
    if (opt.timing == FeedbackTiming::PerIteration || n == 0) peer_fb = state.fb;
    const int c = step(sys, state, n, opt.dx, peer_fb, opt.record_trace);
    ++res.case_counts[static_cast<std::size_t>(c)];
    history.insert(history.end(), state.x.begin(), state.x.end());
    if (itr > opt.itr_max - window && std::all_of(state.fb.begin(), state.fb.end(), [](bool b) { return b; })) {
      res.feasible = true;
      res.x_feasible = state.x;
    }
  }

  res.x = state.x;
  res.iterations = state.itr;
  const SteadyState st = solve_closed_form(sys, sw, res.feasible ? res.x_feasible : res.x);
  res.p_tx = st.p_tx;
  res.p = st.p;

  // Walk back until the trajectory leaves a 10 dx neighbourhood of the end.
  res.settled_at = 0;
  for (long k = opt.itr_max - 1; k >= 0; --k) {
    bool near = true;
    for (std::size_t m = 0; m < N && near; ++m)
      near = std::abs(history[static_cast<std::size_t>(k) * N + m] - res.x[m]) <= 10.0 * opt.dx;
    if (!near) {
      res.settled_at = k + 2;
      break;
    }
  }
  if (res.settled_at == 0) res.settled_at = 1;
  res.trace = std::move(state.trace);
  return res;
}

}  // namespace mrcwpt

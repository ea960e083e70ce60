#include "mrcwpt/circuit.hpp"

#include <Eigen/Dense>
#include <cmath>

#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

std::string receiver_field(std::size_t n, const char* key) {
  return "receiver." + std::to_string(n + 1) + "." + key;
}

void check_inputs(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x) {
  if (sw.size() != sys.size()) throw ValidationError("switch state size does not match receiver count", "switch");
  if (x.size() != sys.size()) throw ValidationError("load vector size does not match receiver count", "x");
  for (std::size_t n = 0; n < sys.size(); ++n)
    if (sw.closed(n) && !(x[n] > 0.0) ) throw ValidationError("load resistance must be > 0", receiver_field(n, "x"));
}

void check_receiver_index(const SystemConfig& sys, const SwitchState& sw, std::size_t n) {
  if (n >= sys.size()) throw ValidationError("receiver index out of range", "n");
  if (!sw.closed(n)) throw ValidationError("receiver is not connected", receiver_field(n, "switch"));
}

}  // namespace

void SystemConfig::validate() const {
  if (!(w > 0.0) || !std::isfinite(w)) throw ValidationError("must be > 0", "source.w");
  if (!std::isfinite(v_tx.real()) || !std::isfinite(v_tx.imag())) throw ValidationError("must be finite", "source.v_tx");
  if (!(transmitter.r > 0.0)) throw ValidationError("must be > 0", "transmitter.r");
  if (!(transmitter.l > 0.0)) throw ValidationError("must be > 0", "transmitter.l");
  if (receivers.empty()) throw ValidationError("at least one receiver is required", "receiver");
  for (std::size_t n = 0; n < receivers.size(); ++n) {
    const auto& rx = receivers[n];
    if (!(rx.coil.r > 0.0)) throw ValidationError("must be > 0", receiver_field(n, "r"));
    if (!(rx.coil.l > 0.0)) throw ValidationError("must be > 0", receiver_field(n, "l"));
    if (!std::isfinite(rx.h)) throw ValidationError("must be finite", receiver_field(n, "h"));
    if (std::abs(rx.h) > std::sqrt(rx.coil.l * transmitter.l))
      throw ValidationError("|h| exceeds sqrt(l_n l_tx)", receiver_field(n, "h"));
    if (!(rx.x_lo > 0.0)) throw ValidationError("must be > 0", receiver_field(n, "x_lo"));
    if (!(rx.x_hi >= rx.x_lo) || !std::isfinite(rx.x_hi))
      throw ValidationError("x_lo must not exceed x_hi", receiver_field(n, "x_hi"));
    if (!(rx.p_req > 0.0) || !std::isfinite(rx.p_req)) throw ValidationError("must be > 0", receiver_field(n, "p_req"));
  }
}

SystemConfig SystemConfig::retuned(double w_new) const {
  SystemConfig out = *this;
  out.w = w_new;
  out.transmitter.c = tune_capacitor(transmitter.l, w_new);
  for (auto& rx : out.receivers) rx.coil.c = tune_capacitor(rx.coil.l, w_new);
  return out;
}

SwitchState SwitchState::parse(const std::string& bits) {
  std::vector<bool> closed;
  closed.reserve(bits.size());
  for (char c : bits) {
    if (c != '0' && c != '1') throw ValidationError("switch mask must contain only 0 and 1", "mask");
    closed.push_back(c == '1');
  }
  if (closed.empty()) throw ValidationError("switch mask is empty", "mask");
  return SwitchState(std::move(closed));
}

std::size_t SwitchState::count() const {
  std::size_t k = 0;
  for (bool b : closed_) k += b ? 1 : 0;
  return k;
}

std::uint64_t SwitchState::value() const {
  std::uint64_t v = 0;
  for (bool b : closed_) v = (v << 1) | (b ? 1u : 0u);
  return v;
}

std::string SwitchState::bits() const {
  std::string s;
  s.reserve(closed_.size());
  for (bool b : closed_) s.push_back(b ? '1' : '0');
  return s;
}

bool SwitchState::subset_of(const SwitchState& outer) const {
  if (outer.size() != size()) return false;
  for (std::size_t n = 0; n < size(); ++n)
    if (closed_[n] && !outer.closed_[n]) return false;
  return true;
}

double coupling_sum(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x) {
  double s = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (!sw.closed(k)) continue;
    const auto& rx = sys.receivers[k];
    s += rx.h * rx.h / (rx.coil.r + x[k]);
  }
  return s;
}

SteadyState solve_closed_form(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x) {
  check_inputs(sys, sw, x);
  const std::size_t N = sys.size();
  const double w2 = sys.w * sys.w;
  const double denom = sys.transmitter.r + w2 * coupling_sum(sys, sw, x);
  const double v2 = std::norm(sys.v_tx);

  SteadyState st;
  st.i_tx = sys.v_tx / denom;
  st.i.assign(N, Complex{});
  st.p.assign(N, 0.0);
  st.p_tx = 0.5 * v2 / denom;
  double delivered = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    if (!sw.closed(n)) continue;
    const auto& rx = sys.receivers[n];
    const double s = rx.coil.r + x[n];
    st.i[n] = Complex(0.0, sys.w * rx.h / s) * st.i_tx;
    st.p[n] = 0.5 * v2 * w2 * rx.h * rx.h * x[n] / (s * s * denom * denom);
    st.p_sum += st.p[n];
    delivered += w2 * rx.h * rx.h * x[n] / (s * s);
  }
  st.rho = delivered / denom;
  return st;
}

SteadyState solve_linear_oracle(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x,
                                double w_eval) {
  check_inputs(sys, sw, x);
  if (!(w_eval > 0.0)) throw ValidationError("must be > 0", "w_eval");
  if (!sys.transmitter.c) throw ValidationError("tuning capacitance not set", "transmitter.c");

  std::vector<std::size_t> connected;
  for (std::size_t n = 0; n < sys.size(); ++n) {
    if (!sw.closed(n)) continue;
    if (!sys.receivers[n].coil.c) throw ValidationError("tuning capacitance not set", receiver_field(n, "c"));
    connected.push_back(n);
  }

  const auto reactance = [w_eval](const CoilElectrical& coil) { return w_eval * coil.l - 1.0 / (w_eval * *coil.c); };
  const Eigen::Index M = static_cast<Eigen::Index>(connected.size()) + 1;
  Eigen::MatrixXcd A = Eigen::MatrixXcd::Zero(M, M);
  Eigen::VectorXcd b = Eigen::VectorXcd::Zero(M);
  A(0, 0) = Complex(sys.transmitter.r, reactance(sys.transmitter));
  b(0) = sys.v_tx;
  for (Eigen::Index k = 1; k < M; ++k) {
    const auto n = connected[static_cast<std::size_t>(k - 1)];
    const auto& rx = sys.receivers[n];
    const Complex coupling(0.0, -w_eval * rx.h);
    A(0, k) = coupling;
    A(k, 0) = coupling;
    A(k, k) = Complex(rx.coil.r + x[n], reactance(rx.coil));
  }

  Eigen::PartialPivLU<Eigen::MatrixXcd> lu(A);
  if (!(lu.rcond() > 1e-15)) throw NumericalError("Kirchhoff system is numerically singular");
  Eigen::VectorXcd sol = lu.solve(b);
  // Weakly coupled receivers carry currents orders of magnitude below the
  // transmitter's, and LU is only accurate relative to the largest entry.
  // Refinement with an extended-precision residual restores those digits.
  using ComplexL = std::complex<long double>;
  for (int pass = 0; pass < 2; ++pass) {
    Eigen::VectorXcd res(M);
    for (Eigen::Index i = 0; i < M; ++i) {
      ComplexL acc(b(i));
      for (Eigen::Index j = 0; j < M; ++j) acc -= ComplexL(A(i, j)) * ComplexL(sol(j));
      res(i) = Complex(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
    }
    sol += lu.solve(res);
  }
  const double residual = (A * sol - b).norm();
  if (!std::isfinite(residual) || residual > 1e-10 * std::max(b.norm(), 1e-300))
    throw NumericalError("Kirchhoff solve residual " + std::to_string(residual) + " exceeds tolerance");

  SteadyState st;
  st.i_tx = sol(0);
  st.i.assign(sys.size(), Complex{});
  st.p.assign(sys.size(), 0.0);
  st.p_tx = 0.5 * (sys.v_tx * std::conj(st.i_tx)).real();
  for (Eigen::Index k = 1; k < M; ++k) {
    const auto n = connected[static_cast<std::size_t>(k - 1)];
    st.i[n] = sol(k);
    st.p[n] = 0.5 * x[n] * std::norm(sol(k));
    st.p_sum += st.p[n];
  }
  st.rho = st.p_tx > 0.0 ? st.p_sum / st.p_tx : 0.0;
  return st;
}

double optimal_frequency(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x) {
  check_inputs(sys, sw, x);
  const double s = coupling_sum(sys, sw, x);
  if (!(s > 0.0)) throw NumericalError("no finite maximizer: every connected receiver is uncoupled");
  return std::sqrt(sys.transmitter.r / s);
}

Derivatives analytic_derivatives(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x,
                                 std::size_t n) {
  check_inputs(sys, sw, x);
  check_receiver_index(sys, sw, n);
  const double w2 = sys.w * sys.w;
  const double half_v2 = 0.5 * std::norm(sys.v_tx);
  const double D = sys.transmitter.r + w2 * coupling_sum(sys, sw, x);
  const auto& rn = sys.receivers[n];
  const double an = w2 * rn.h * rn.h;
  const double sn = rn.coil.r + x[n];

  double phi = 0.0;
  double varphi = 0.0;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (k == n || !sw.closed(k)) continue;
    const auto& rk = sys.receivers[k];
    const double sk = rk.coil.r + x[k];
    phi += w2 * rk.h * rk.h / sk;
    varphi += w2 * rk.h * rk.h * x[k] / (sk * sk);
  }

  Derivatives d;
  d.dptx_dxn = half_v2 * an / (sn * sn * D * D);
  d.dpn_dxn = half_v2 * an / (sn * sn * sn * D * D * D) * (an + (sys.transmitter.r + phi) * (rn.coil.r - x[n]));
  d.dpm_dxn.assign(sys.size(), 0.0);
  for (std::size_t m = 0; m < sys.size(); ++m) {
    if (!sw.closed(m)) continue;
    if (m == n) {
      d.dpm_dxn[m] = d.dpn_dxn;
      continue;
    }
    const auto& rm = sys.receivers[m];
    const double sm = rm.coil.r + x[m];
    d.dpm_dxn[m] = half_v2 * 2.0 * w2 * rm.h * rm.h * x[m] * an / (sm * sm * sn * sn * D * D * D);
  }
  // rho does not depend on |v_tx|, so no half_v2 prefactor here.
  const double r = rn.coil.r;
  const double xn = x[n];
  const double bracket = 2.0 * r * varphi * xn + r * an + xn * xn * (varphi - phi - sys.transmitter.r) +
                         r * r * (varphi + phi + sys.transmitter.r);
  d.drho_dxn = an / (sn * sn * sn * sn * D * D) * bracket;
  return d;
}

Thresholds thresholds(const SystemConfig& sys, const SwitchState& sw, std::span<const double> x, std::size_t n) {
  check_inputs(sys, sw, x);
  check_receiver_index(sys, sw, n);
  const double w2 = sys.w * sys.w;
  const double r_tx = sys.transmitter.r;
  const auto& rn = sys.receivers[n];
  const double r = rn.coil.r;
  const double a = w2 * rn.h * rn.h;

  Thresholds t;
  for (std::size_t k = 0; k < sys.size(); ++k) {
    if (k == n || !sw.closed(k)) continue;
    const auto& rk = sys.receivers[k];
    const double sk = rk.coil.r + x[k];
    t.phi += w2 * rk.h * rk.h / sk;
    t.varphi += w2 * rk.h * rk.h * x[k] / (sk * sk);
  }
  const double R = r_tx + t.phi;
  t.x_dot = (r * R + a) / R;

  const double psum_denom = R - 2.0 * t.varphi;
  t.psum_monotone = psum_denom <= 0.0;
  if (!t.psum_monotone) t.x_ddot = (r * R + a + 2.0 * r * t.varphi) / psum_denom;

  const double B = t.varphi - t.phi - r_tx;
  t.rho_monotone = B >= 0.0;
  if (!t.rho_monotone) {
    const double gamma = B * (r * r * (r_tx + t.varphi + t.phi) + r * a);
    t.x_dddot = (-r * t.varphi - std::sqrt(r * r * t.varphi * t.varphi - gamma)) / B;
  }
  return t;
}

}  // namespace mrcwpt

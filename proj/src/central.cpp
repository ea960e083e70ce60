#include "mrcwpt/central.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>

#include "mrcwpt/error.hpp"

namespace mrcwpt {

namespace {

constexpr double kBarrierGap = 1e-9;
constexpr double kPhase1Gap = 1e-11;
constexpr double kInfeasibleThreshold = 1e-9;
constexpr double kBarrierGrowth = 10.0;
constexpr int kMaxNewtonPerCentering = 200;

// Quadratic load-power constraints of the y-space problem in scaled
// variables u in [0, 1], y = lo + (hi - lo) u. Each constraint
//   (D^2 - A a_n y_n (1 - r_n y_n) / p_n) / D_ref^2 <= 0,  D = r_tx + sum_k a_k y_k
// is divided by the largest attainable D^2 so that all terms stay O(1)
// however strongly the receivers are coupled.
struct QuadraticModel {
  Eigen::VectorXd a;       // w^2 h_k^2 per variable
  Eigen::VectorXd r;       // coil resistance per variable
  Eigen::VectorXd lo, hi;  // y bounds
  double r_tx = 0.0;
  double d_ref = 1.0;
  std::vector<Eigen::Index> con_var;  // variable touched by each constraint
  std::vector<double> gain;           // A a_n / p_n per constraint

  Eigen::Index vars() const { return a.size(); }
  std::size_t cons() const { return con_var.size(); }

  Eigen::VectorXd y_of(const Eigen::VectorXd& u) const {
    return lo + (hi - lo).cwiseProduct(u.head(vars()));
  }
  double D(const Eigen::VectorXd& y) const { return r_tx + a.dot(y); }

  double g(std::size_t i, const Eigen::VectorXd& u) const {
    const Eigen::VectorXd y = y_of(u);
    const auto n = con_var[i];
    const double d = D(y);
    return (d * d - gain[i] * y(n) * (1.0 - r(n) * y(n))) / (d_ref * d_ref);
  }

  // Gradient and Hessian with respect to u.
  void g_derivs(std::size_t i, const Eigen::VectorXd& u, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    const Eigen::VectorXd y = y_of(u);
    const Eigen::VectorXd span = hi - lo;
    const auto n = con_var[i];
    const double d = D(y);
    const double s2 = 1.0 / (d_ref * d_ref);
    const Eigen::VectorXd as = a.cwiseProduct(span);
    grad = 2.0 * d * s2 * as;
    grad(n) -= gain[i] * (1.0 - 2.0 * r(n) * y(n)) * span(n) * s2;
    hess = 2.0 * s2 * as * as.transpose();
    hess(n, n) += 2.0 * gain[i] * r(n) * span(n) * span(n) * s2;
  }
};

// Barrier minimization of  c.z  subject to the model constraints (optionally
// shifted by a slack variable z_K, as in phase I) and the unit box.
class BarrierSolver {
 public:
  BarrierSolver(const QuadraticModel& model, bool phase1) : m_(model), phase1_(phase1) {
    dim_ = m_.vars() + (phase1_ ? 1 : 0);
    c_ = Eigen::VectorXd::Zero(dim_);
    if (phase1_) {
      c_(dim_ - 1) = 1.0;
    } else {
      // Maximize sum a_k y_k, scaled so the objective spans at most [-1, 0].
      const Eigen::VectorXd span = m_.hi - m_.lo;
      const double scale = m_.a.dot(span);
      c_.head(m_.vars()) = -m_.a.cwiseProduct(span) / (scale > 0.0 ? scale : 1.0);
    }
  }

  std::size_t inequality_count() const { return m_.cons() + 2 * static_cast<std::size_t>(m_.vars()); }

  double f(std::size_t i, const Eigen::VectorXd& z) const {
    return m_.g(i, z) - (phase1_ ? z(dim_ - 1) : 0.0);
  }

  bool strictly_feasible(const Eigen::VectorXd& z) const {
    for (Eigen::Index j = 0; j < m_.vars(); ++j)
      if (!(z(j) > 0.0 && z(j) < 1.0)) return false;
    for (std::size_t i = 0; i < m_.cons(); ++i)
      if (!(f(i, z) < 0.0)) return false;
    return true;
  }

  // phi(z + dz) - phi(z), written as sums of log ratios so the difference
  // stays accurate when phi itself is large.
  double phi_change(double t, const Eigen::VectorXd& z, const Eigen::VectorXd& dz) const {
    double v = t * c_.dot(dz);
    for (Eigen::Index j = 0; j < m_.vars(); ++j)
      v -= std::log1p(dz(j) / z(j)) + std::log1p(-dz(j) / (1.0 - z(j)));
    const Eigen::VectorXd zn = z + dz;
    for (std::size_t i = 0; i < m_.cons(); ++i) v -= std::log(f(i, zn) / f(i, z));
    return v;
  }

  void derivs(double t, const Eigen::VectorXd& z, Eigen::VectorXd& grad, Eigen::MatrixXd& hess) const {
    grad = t * c_;
    hess = Eigen::MatrixXd::Zero(dim_, dim_);
    for (Eigen::Index j = 0; j < m_.vars(); ++j) {
      const double dl = z(j);
      const double dh = 1.0 - z(j);
      grad(j) += -1.0 / dl + 1.0 / dh;
      hess(j, j) += 1.0 / (dl * dl) + 1.0 / (dh * dh);
    }
    Eigen::VectorXd gy;
    Eigen::MatrixXd hy;
    Eigen::VectorXd gf(dim_);
    for (std::size_t i = 0; i < m_.cons(); ++i) {
      m_.g_derivs(i, z, gy, hy);
      gf.setZero();
      gf.head(m_.vars()) = gy;
      if (phase1_) gf(dim_ - 1) = -1.0;
      const double fi = f(i, z);
      grad += gf / (-fi);
      hess += gf * gf.transpose() / (fi * fi);
      hess.topLeftCorner(m_.vars(), m_.vars()) += hy / (-fi);
    }
  }

  // Damped Newton centering; returns number of steps taken. `stop` lets
  // phase I bail out as soon as a strictly feasible point appears.
  template <class Stop>
  int center(double t, Eigen::VectorXd& z, Stop stop) const {
    Eigen::VectorXd grad;
    Eigen::MatrixXd hess;
    int steps = 0;
    for (; steps < kMaxNewtonPerCentering; ++steps) {
      if (stop(z)) break;
      derivs(t, z, grad, hess);
      // Symmetric diagonal scaling keeps the factorization well conditioned
      // when barrier terms differ by many orders of magnitude.
      const Eigen::VectorXd sc = hess.diagonal().cwiseSqrt().cwiseInverse();
      const Eigen::MatrixXd hs = sc.asDiagonal() * hess * sc.asDiagonal();
      // Near the boundary one constraint gradient dominates and rounding can
      // leave a slightly negative pivot; a tiny ridge restores definiteness.
      Eigen::VectorXd dz;
      bool solved = false;
      for (double ridge = 0.0; ridge <= 1e-4 && !solved; ridge = ridge == 0.0 ? 1e-14 : ridge * 100.0) {
        Eigen::LLT<Eigen::MatrixXd> llt(hs + ridge * Eigen::MatrixXd::Identity(dim_, dim_));
        if (llt.info() != Eigen::Success) continue;
        dz = sc.cwiseProduct(llt.solve(-sc.cwiseProduct(grad)));
        solved = dz.allFinite();
      }
      if (!solved) throw NumericalError("barrier Newton system could not be solved");
      const double decrement2 = -grad.dot(dz);
      if (!(decrement2 > 2e-12)) break;
      double step = 1.0;
      bool accepted = false;
      for (int k = 0; k < 60; ++k, step *= 0.5) {
        const Eigen::VectorXd trial = z + step * dz;
        if (!strictly_feasible(trial)) continue;
        if (phi_change(t, z, step * dz) <= -0.25 * step * decrement2) {
          z = trial;
          accepted = true;
          break;
        }
      }
      if (!accepted) break;  // no further progress possible at this precision
    }
    return steps;
  }

  // KKT residual at z: multipliers for the near-active inequalities are
  // fitted by nonnegative least squares, then the residual is the larger of
  // relative stationarity and complementarity. Barrier multipliers are not
  // used directly because the last centering can stall on rounding noise.
  double kkt_residual(const Eigen::VectorXd& z) const {
    constexpr double kActive = 1e-3;
    std::vector<Eigen::VectorXd> grads;
    std::vector<double> slack;
    for (Eigen::Index j = 0; j < m_.vars(); ++j) {
      if (z(j) <= kActive) {
        grads.push_back(-Eigen::VectorXd::Unit(dim_, j));
        slack.push_back(z(j));
      }
      if (1.0 - z(j) <= kActive) {
        grads.push_back(Eigen::VectorXd::Unit(dim_, j));
        slack.push_back(1.0 - z(j));
      }
    }
    Eigen::VectorXd gy;
    Eigen::MatrixXd hy;
    for (std::size_t i = 0; i < m_.cons(); ++i) {
      const double fi = f(i, z);
      if (-fi > kActive) continue;
      m_.g_derivs(i, z, gy, hy);
      grads.push_back(gy);
      slack.push_back(-fi);
    }

    std::vector<std::size_t> keep(grads.size());
    for (std::size_t k = 0; k < keep.size(); ++k) keep[k] = k;
    Eigen::VectorXd lambda;
    while (true) {
      Eigen::MatrixXd J(dim_, static_cast<Eigen::Index>(keep.size()));
      for (std::size_t k = 0; k < keep.size(); ++k) J.col(static_cast<Eigen::Index>(k)) = grads[keep[k]];
      lambda = keep.empty() ? Eigen::VectorXd() : Eigen::VectorXd(J.completeOrthogonalDecomposition().solve(-c_));
      if (keep.empty() || lambda.minCoeff() >= 0.0) {
        const Eigen::VectorXd r = c_ + (keep.empty() ? Eigen::VectorXd::Zero(dim_) : Eigen::VectorXd(J * lambda));
        const double cn = c_.lpNorm<Eigen::Infinity>();
        double comp = 0.0;
        for (std::size_t k = 0; k < keep.size(); ++k)
          comp = std::max(comp, lambda(static_cast<Eigen::Index>(k)) * slack[keep[k]] / cn);
        return std::max(r.lpNorm<Eigen::Infinity>() / cn, comp);
      }
      Eigen::Index worst;
      lambda.minCoeff(&worst);
      keep.erase(keep.begin() + worst);
    }
  }

  Eigen::Index dim() const { return dim_; }

 private:
  const QuadraticModel& m_;
  bool phase1_;
  Eigen::Index dim_ = 0;
  Eigen::VectorXd c_;
};

}  // namespace

const char* to_string(SolveStatus s) { return s == SolveStatus::Optimal ? "optimal" : "infeasible"; }

ChargingProblem ChargingProblem::from_system(const SystemConfig& sys) {
  return from_system(sys, SwitchState::all_closed(sys.size()));
}

ChargingProblem ChargingProblem::from_system(const SystemConfig& sys, const SwitchState& sw) {
  ChargingProblem p{sys, sw, {}};
  p.p_req_eff.reserve(sys.size());
  for (const auto& rx : sys.receivers) p.p_req_eff.push_back(rx.p_req);
  return p;
}

void ChargingProblem::validate() const {
  sys.validate();
  if (sw.size() != sys.size()) throw ValidationError("switch state size does not match receiver count", "switch");
  if (!sw.any()) throw ValidationError("at least one switch must be closed", "switch");
  if (p_req_eff.size() != sys.size())
    throw ValidationError("requirement vector size does not match receiver count", "p_req_eff");
  for (std::size_t n = 0; n < sys.size(); ++n) {
    if (!sw.closed(n)) continue;
    const auto& rx = sys.receivers[n];
    if (!(to_y(rx.x_hi, rx.coil.r) < to_y(rx.x_lo, rx.coil.r)))
      throw ValidationError("load bounds must satisfy x_lo < x_hi", "receiver." + std::to_string(n + 1) + ".x_hi");
    if (std::isnan(p_req_eff[n])) throw ValidationError("requirement is NaN", "p_req_eff");
  }
}

double to_y(double x, double r) {
  if (!(x > 0.0)) throw ValidationError("load resistance must be > 0", "x");
  return 1.0 / (r + x);
}

double from_y(double y, double r) {
  if (!(y > 0.0 && y < 1.0 / r)) throw ValidationError("y must lie in (0, 1/r)", "y");
  return 1.0 / y - r;
}

std::vector<double> to_y_space(const SystemConfig& sys, std::span<const double> x) {
  if (x.size() != sys.size()) throw ValidationError("size mismatch", "x");
  std::vector<double> y(x.size());
  for (std::size_t n = 0; n < x.size(); ++n) y[n] = to_y(x[n], sys.receivers[n].coil.r);
  return y;
}

std::vector<double> from_y_space(const SystemConfig& sys, std::span<const double> y) {
  if (y.size() != sys.size()) throw ValidationError("size mismatch", "y");
  std::vector<double> x(y.size());
  for (std::size_t n = 0; n < y.size(); ++n) x[n] = from_y(y[n], sys.receivers[n].coil.r);
  return x;
}

P3Solution solve_p3(const ChargingProblem& prob) {
  prob.validate();
  const auto& sys = prob.sys;
  const double w2 = sys.w * sys.w;
  const double half_v2 = 0.5 * std::norm(sys.v_tx);

  std::vector<std::size_t> vars;
  for (std::size_t n = 0; n < sys.size(); ++n)
    if (prob.sw.closed(n)) vars.push_back(n);
  const auto K = static_cast<Eigen::Index>(vars.size());

  QuadraticModel model;
  model.a.resize(K);
  model.r.resize(K);
  model.lo.resize(K);
  model.hi.resize(K);
  model.r_tx = sys.transmitter.r;
  for (Eigen::Index j = 0; j < K; ++j) {
    const auto& rx = sys.receivers[vars[static_cast<std::size_t>(j)]];
    model.a(j) = w2 * rx.h * rx.h;
    model.r(j) = rx.coil.r;
    model.lo(j) = 1.0 / (rx.coil.r + rx.x_hi);
    model.hi(j) = 1.0 / (rx.coil.r + rx.x_lo);
    const double preq = prob.p_req_eff[vars[static_cast<std::size_t>(j)]];
    if (preq > 0.0) {
      model.con_var.push_back(j);
      model.gain.push_back(half_v2 * model.a(j) / preq);
    }
  }
  model.d_ref = model.D(model.hi);

  P3Solution sol;
  sol.y.assign(sys.size(), 0.0);
  const auto finish = [&](const Eigen::VectorXd& u) {
    const Eigen::VectorXd y = model.y_of(u);
    for (Eigen::Index j = 0; j < K; ++j) sol.y[vars[static_cast<std::size_t>(j)]] = y(j);
    sol.objective = model.a.dot(y);
  };

  Eigen::VectorXd u = Eigen::VectorXd::Constant(K, 0.5);

  // Phase I: find a strictly feasible point, or certify that none exists.
  if (model.cons() > 0) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < model.cons(); ++i) worst = std::max(worst, model.g(i, u));
    if (!(worst < 0.0)) {
      BarrierSolver p1(model, true);
      Eigen::VectorXd z(K + 1);
      z.head(K) = u;
      z(K) = worst + 1.0;
      const auto found = [K](const Eigen::VectorXd& v) { return v(K) < -1e-12; };
      double t = 1.0;
      bool feasible = false;
      while (true) {
        sol.newton_steps += p1.center(t, z, found);
        if (found(z)) {
          feasible = true;
          break;
        }
        if (static_cast<double>(p1.inequality_count()) / t < kPhase1Gap) break;
        t *= kBarrierGrowth;
      }
      sol.phase1_value = z(K);
      if (!feasible) {
        if (z(K) > kInfeasibleThreshold) {
          sol.status = SolveStatus::Infeasible;
          return sol;
        }
        // The feasible set is (numerically) a single boundary point.
        sol.status = SolveStatus::Optimal;
        finish(z.head(K));
        sol.kkt_residual = std::numeric_limits<double>::infinity();
        return sol;
      }
      u = z.head(K);
    } else {
      sol.phase1_value = worst;
    }
  }

  // Phase II: barrier path toward the optimum.
  BarrierSolver p2(model, false);
  const auto never = [](const Eigen::VectorXd&) { return false; };
  double t = 1.0;
  while (true) {
    sol.newton_steps += p2.center(t, u, never);
    if (static_cast<double>(p2.inequality_count()) / t <= kBarrierGap) break;
    t *= kBarrierGrowth;
  }

  sol.status = SolveStatus::Optimal;
  finish(u);
  sol.kkt_residual = std::max(p2.kkt_residual(u), static_cast<double>(p2.inequality_count()) / t);
  return sol;
}

CentralSolution algorithm1(const ChargingProblem& prob) {
  const P3Solution p3 = solve_p3(prob);
  CentralSolution out;
  out.status = p3.status;
  out.x_star.assign(prob.sys.size(), std::numeric_limits<double>::quiet_NaN());
  out.p.assign(prob.sys.size(), 0.0);
  if (p3.status != SolveStatus::Optimal) return out;

  LoadVector x(prob.sys.size(), 1.0);
  for (std::size_t n = 0; n < prob.sys.size(); ++n) {
    if (!prob.sw.closed(n)) continue;
    const auto& rx = prob.sys.receivers[n];
    x[n] = std::clamp(from_y(p3.y[n], rx.coil.r), rx.x_lo, rx.x_hi);
    out.x_star[n] = x[n];
  }
  const SteadyState st = solve_closed_form(prob.sys, prob.sw, x);
  out.p_tx_star = st.p_tx;
  out.p = st.p;
  out.kkt_residual = p3.kkt_residual;
  return out;
}

OracleResult brute_force_oracle(const ChargingProblem& prob, std::size_t grid_resolution) {
  prob.validate();
  const auto& sys = prob.sys;
  std::vector<std::size_t> vars;
  for (std::size_t n = 0; n < sys.size(); ++n)
    if (prob.sw.closed(n)) vars.push_back(n);
  if (vars.size() > 3) throw ValidationError("brute-force oracle supports at most three connected receivers", "switch");
  if (grid_resolution < 2) throw ValidationError("grid resolution must be >= 2", "grid_resolution");

  std::vector<std::vector<double>> axes;
  for (auto n : vars) {
    const auto& rx = sys.receivers[n];
    std::vector<double> axis(grid_resolution);
    const double l0 = std::log(rx.x_lo);
    const double l1 = std::log(rx.x_hi);
    for (std::size_t i = 0; i < grid_resolution; ++i)
      axis[i] = std::exp(l0 + (l1 - l0) * static_cast<double>(i) / static_cast<double>(grid_resolution - 1));
    axis.front() = rx.x_lo;
    axis.back() = rx.x_hi;
    axes.push_back(std::move(axis));
  }

  const double w2 = sys.w * sys.w;
  const double half_v2 = 0.5 * std::norm(sys.v_tx);
  const std::size_t K = vars.size();
  std::size_t total = 1;
  for (std::size_t k = 0; k < K; ++k) total *= grid_resolution;

  OracleResult best;
  best.p_tx = std::numeric_limits<double>::infinity();
  std::vector<double> xs(K), a(K), r(K), preq(K);
  for (std::size_t k = 0; k < K; ++k) {
    const auto& rx = sys.receivers[vars[k]];
    a[k] = w2 * rx.h * rx.h;
    r[k] = rx.coil.r;
    preq[k] = prob.p_req_eff[vars[k]];
  }
  for (std::size_t idx = 0; idx < total; ++idx) {
    std::size_t rem = idx;
    double D = sys.transmitter.r;
    for (std::size_t k = 0; k < K; ++k) {
      xs[k] = axes[k][rem % grid_resolution];
      rem /= grid_resolution;
      D += a[k] / (r[k] + xs[k]);
    }
    const double ptx = half_v2 / D;
    if (ptx >= best.p_tx) continue;
    bool ok = true;
    for (std::size_t k = 0; k < K && ok; ++k) {
      if (preq[k] <= 0.0) continue;
      const double s = r[k] + xs[k];
      ok = half_v2 * a[k] * xs[k] / (s * s * D * D) >= preq[k];
    }
    if (!ok) continue;
    best.feasible = true;
    best.p_tx = ptx;
    best.x.assign(sys.size(), std::numeric_limits<double>::quiet_NaN());
    for (std::size_t k = 0; k < K; ++k) best.x[vars[k]] = xs[k];
  }
  if (!best.feasible) best.p_tx = std::numeric_limits<double>::quiet_NaN();
  return best;
}

}  // namespace mrcwpt

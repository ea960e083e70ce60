#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "mrcwpt/central.hpp"
#include "mrcwpt/error.hpp"
#include "support.hpp"

using namespace mrcwpt;
using testing::rel_diff;

namespace {

void check_certificate(const ChargingProblem& prob, const CentralSolution& sol) {
  REQUIRE(sol.status == SolveStatus::Optimal);
  LoadVector x(prob.sys.size(), 1.0);
  for (std::size_t n = 0; n < prob.sys.size(); ++n) {
    if (!prob.sw.closed(n)) {
      CHECK(std::isnan(sol.x_star[n]));
      continue;
    }
    const auto& rx = prob.sys.receivers[n];
    CHECK(sol.x_star[n] >= rx.x_lo);
    CHECK(sol.x_star[n] <= rx.x_hi);
    x[n] = sol.x_star[n];
  }
  const auto st = solve_closed_form(prob.sys, prob.sw, x);
  for (std::size_t n = 0; n < prob.sys.size(); ++n) {
    if (!prob.sw.closed(n) || prob.p_req_eff[n] <= 0) continue;
    CHECK(st.p[n] >= prob.p_req_eff[n] - 1e-6 * std::max(prob.p_req_eff[n], 1.0));
  }
  CHECK(rel_diff(st.p_tx, sol.p_tx_star) < 1e-9);
  CHECK(sol.kkt_residual <= 1e-6);
}

ChargingProblem random_feasible_problem(std::mt19937_64& rng, std::size_t N) {
  const auto sys = testing::random_system(rng, N);
  const auto sw = SwitchState::all_closed(N);
  const auto x = testing::random_loads(rng, sys);
  const auto st = solve_closed_form(sys, sw, x);
  auto prob = ChargingProblem::from_system(sys);
  std::uniform_real_distribution<double> frac(0.3, 0.98);
  for (std::size_t n = 0; n < N; ++n) prob.p_req_eff[n] = frac(rng) * st.p[n];
  return prob;
}

bool feasible_at(double p3) {
  const auto prob = ChargingProblem::from_system(testing::reference_system(17.5, 17.5, p3));
  return algorithm1(prob).status == SolveStatus::Optimal;
}

}  // namespace

TEST_CASE("y-space maps") {
  CHECK(to_y(1.0, 1.0) == 0.5);
  CHECK(from_y(0.5, 1.0) == 1.0);
  const auto sys = testing::reference_system();
  const LoadVector lo{1.0, 1.0, 1.0};
  const LoadVector hi{100.0, 100.0, 100.0};
  const auto ylo = to_y_space(sys, lo);
  const auto yhi = to_y_space(sys, hi);
  for (int n = 0; n < 3; ++n) CHECK(ylo[n] > yhi[n]);
  const LoadVector x{0.37, 12.0, 99.9};
  const auto back = from_y_space(sys, to_y_space(sys, x));
  for (int n = 0; n < 3; ++n) CHECK(rel_diff(back[n], x[n]) < 1e-12);
  CHECK_THROWS_AS(to_y(0.0, 1.0), ValidationError);
  CHECK_THROWS_AS(from_y(1.0, 1.0), ValidationError);
  CHECK_THROWS_AS(from_y(-0.1, 1.0), ValidationError);
}

TEST_CASE("problem validation") {
  auto prob = ChargingProblem::from_system(testing::reference_system());
  prob.sw = SwitchState::all_open(3);
  CHECK_THROWS_AS(algorithm1(prob), ValidationError);
  prob = ChargingProblem::from_system(testing::reference_system());
  prob.sys.receivers[0].x_hi = prob.sys.receivers[0].x_lo;
  CHECK_THROWS_AS(algorithm1(prob), ValidationError);
}

TEST_CASE("single receiver with a tiny requirement sits at the lower load bound") {
  auto sys = testing::reference_system();
  sys.receivers.resize(1);
  sys.receivers[0].p_req = 1e-3;
  const auto prob = ChargingProblem::from_system(sys);
  const auto sol = algorithm1(prob);
  check_certificate(prob, sol);

  // 1-D scan at 1e-3 Ohm.
  double best_x = 0, best_p = INFINITY;
  for (double x = 1.0; x <= 100.0 + 1e-9; x += 1e-3) {
    const auto st = solve_closed_form(sys, SwitchState::all_closed(1), LoadVector{x});
    if (st.p[0] >= 1e-3 && st.p_tx < best_p) best_p = st.p_tx, best_x = x;
  }
  CHECK(best_x == doctest::Approx(1.0));
  CHECK(sol.x_star[0] == doctest::Approx(best_x).epsilon(1e-6));
  CHECK(sol.p_tx_star <= best_p * (1 + 1e-7));
}

TEST_CASE("inactive requirements leave every load at its lower bound") {
  auto prob = ChargingProblem::from_system(testing::reference_system());
  prob.p_req_eff = {0.0, -3.0, 0.0};
  const auto sol = algorithm1(prob);
  check_certificate(prob, sol);
  for (int n = 0; n < 3; ++n) CHECK(sol.x_star[n] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("transmitter power matches the y-space objective") {
  const auto prob = ChargingProblem::from_system(testing::reference_system());
  const auto p3 = solve_p3(prob);
  REQUIRE(p3.status == SolveStatus::Optimal);
  const auto sol = algorithm1(prob);
  const double expected = 0.5 * std::norm(prob.sys.v_tx) / (prob.sys.transmitter.r + prob.sys.w * prob.sys.w * [&] {
    double s = 0;
    for (int n = 0; n < 3; ++n) s += prob.sys.receivers[n].h * prob.sys.receivers[n].h * p3.y[n];
    return s;
  }());
  CHECK(rel_diff(sol.p_tx_star, expected) < 1e-9);
}

TEST_CASE("reference setup at p3 = 30 W: optimal against a 50^3 grid and KKT shaped") {
  const auto prob = ChargingProblem::from_system(testing::reference_system(17.5, 17.5, 30.0));
  const auto sol = algorithm1(prob);
  check_certificate(prob, sol);
  const auto grid = brute_force_oracle(prob, 50);
  REQUIRE(grid.feasible);
  CHECK(sol.p_tx_star <= grid.p_tx + 1e-6);
  // Only load 3 binds and x_3 sits on its lower bound. The optimum is then a
  // face: D fixes a_1 y_1 + a_2 y_2 but not the split, so receivers 1 and 2
  // stay interior with slack constraints. Stationarity on that face needs
  // lambda = 1/(2D) from both free coordinates and a nonnegative bound
  // multiplier on y_3.
  const auto& sys = prob.sys;
  CHECK(sol.p[2] == doctest::Approx(30.0).epsilon(1e-6));
  CHECK(sol.x_star[2] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(sol.p[0] > 17.5);
  CHECK(sol.p[1] > 17.5);
  const auto& r3 = sys.receivers[2];
  const double y3 = 1.0 / (r3.coil.r + sol.x_star[2]);
  const double D = sys.transmitter.r + sys.w * sys.w * coupling_sum(sys, prob.sw, sol.x_star);
  const double a3 = sys.w * sys.w * r3.h * r3.h;
  const double gain3 = 0.5 * std::norm(sys.v_tx) * a3 / 30.0;
  const double lambda = 1.0 / (2.0 * D);
  const double mu3 = a3 - lambda * (2.0 * D * a3 - gain3 * (1.0 - 2.0 * r3.coil.r * y3));
  CHECK(mu3 > 0.0);
  CHECK(sol.p_tx_star == doctest::Approx(112.011).epsilon(1e-4));
}

TEST_CASE("feasibility boundary along p3 with p1 = p2 = 17.5 W") {
  double lo = 30.0, hi = 45.0;
  REQUIRE(feasible_at(lo));
  REQUIRE_FALSE(feasible_at(hi));
  for (int i = 0; i < 40; ++i) {
    const double mid = 0.5 * (lo + hi);
    (feasible_at(mid) ? lo : hi) = mid;
  }
  // Independent check: the largest p3 over the 2-D grid of (x1, x2) at x3
  // chosen per point, with p1, p2 >= 17.5.
  auto prob = ChargingProblem::from_system(testing::reference_system(17.5, 17.5, 1.0));
  double best_p3 = 0;
  const auto& sys = prob.sys;
  std::vector<double> axis(300);
  for (int i = 0; i < 300; ++i) axis[i] = std::pow(100.0, i / 299.0);
  for (double x1 : axis)
    for (double x2 : axis)
      for (double x3 : axis) {
        const LoadVector x{x1, x2, x3};
        const auto st = solve_closed_form(sys, prob.sw, x);
        if (st.p[0] >= 17.5 && st.p[1] >= 17.5) best_p3 = std::max(best_p3, st.p[2]);
      }
  CHECK(best_p3 <= lo + 1e-6);
  CHECK(best_p3 == doctest::Approx(lo).epsilon(5e-3));
  CHECK(lo == doctest::Approx(37.58).epsilon(1e-3));
  CHECK_FALSE(feasible_at(38.5));
}

TEST_CASE("near-far mitigation: closer receivers raise their loads as p3 grows") {
  double last1 = 0, last2 = 0, last_ptx = 0;
  for (double p3 = 1.0; p3 <= 37.0; p3 += 1.0) {
    const auto sol = algorithm1(ChargingProblem::from_system(testing::reference_system(17.5, 17.5, p3)));
    REQUIRE(sol.status == SolveStatus::Optimal);
    CHECK(sol.x_star[0] >= last1 - 1e-6);
    CHECK(sol.x_star[1] >= last2 - 1e-6);
    CHECK(sol.p_tx_star >= last_ptx - 1e-9);
    last1 = sol.x_star[0];
    last2 = sol.x_star[1];
    last_ptx = sol.p_tx_star;
  }
}

TEST_CASE("random two-receiver problems against the grid oracle") {
  std::mt19937_64 rng(31337);
  const std::size_t G = 300;
  for (int trial = 0; trial < 20; ++trial) {
    const auto prob = random_feasible_problem(rng, 2);
    const auto sol = algorithm1(prob);
    check_certificate(prob, sol);
    const auto grid = brute_force_oracle(prob, G);
    REQUIRE(grid.feasible);
    CHECK(sol.p_tx_star <= grid.p_tx * (1 + 1e-9));
    // The grid optimum can be worse by at most the change across a couple of
    // grid cells at the optimum.
    LoadVector up(2);
    for (int n = 0; n < 2; ++n) {
      const auto& rx = prob.sys.receivers[n];
      const double q = std::pow(rx.x_hi / rx.x_lo, 2.0 / (G - 1));
      up[n] = std::min(sol.x_star[n] * q, rx.x_hi);
    }
    const double gap = solve_closed_form(prob.sys, prob.sw, up).p_tx - sol.p_tx_star;
    CHECK(grid.p_tx - sol.p_tx_star <= gap + 1e-12);
  }
}

TEST_CASE("random problems with up to six receivers satisfy the certificate") {
  std::mt19937_64 rng(4242);
  for (int trial = 0; trial < 40; ++trial) {
    auto prob = random_feasible_problem(rng, 1 + trial % 6);
    prob.sw = testing::random_switches(rng, prob.sys.size());
    check_certificate(prob, algorithm1(prob));
  }
}

TEST_CASE("infeasible problems agree with the oracle") {
  auto prob = ChargingProblem::from_system(testing::reference_system(17.5, 17.5, 45.0));
  CHECK(algorithm1(prob).status == SolveStatus::Infeasible);
  CHECK_FALSE(brute_force_oracle(prob, 60).feasible);
  prob.p_req_eff = {1e4, 1.0, 1.0};
  CHECK(algorithm1(prob).status == SolveStatus::Infeasible);
}

TEST_CASE("oracle p_tx never drops when a requirement rises") {
  double last = 0;
  for (double p3 = 5; p3 <= 35; p3 += 5) {
    const auto res = brute_force_oracle(ChargingProblem::from_system(testing::reference_system(17.5, 17.5, p3)), 40);
    REQUIRE(res.feasible);
    CHECK(res.p_tx >= last);
    last = res.p_tx;
  }
  std::mt19937_64 rng(1);
  auto big = ChargingProblem::from_system(testing::random_system(rng, 4));
  CHECK_THROWS_AS(brute_force_oracle(big, 10), ValidationError);
}

TEST_CASE("algorithm1 is deterministic") {
  const auto prob = ChargingProblem::from_system(testing::reference_system(17.5, 17.5, 25.0));
  const auto a = algorithm1(prob);
  const auto b = algorithm1(prob);
  CHECK(std::memcmp(a.x_star.data(), b.x_star.data(), sizeof(double) * 3) == 0);
  CHECK(std::memcmp(&a.p_tx_star, &b.p_tx_star, sizeof(double)) == 0);
}

#include <Eigen/Dense>
#include <boost/multiprecision/cpp_int.hpp>
#include <limits>
#include <random>

#include "doctest.h"
#include "mrcwpt/simplex.hpp"
#include "support.hpp"

using namespace mrcwpt;
using Rational = boost::multiprecision::cpp_rational;

namespace {

template <class T>
LinearProgram<T> convert(const LinearProgram<int>& lp) {
  LinearProgram<T> out;
  for (std::size_t i = 0; i < lp.a.size(); ++i) {
    std::vector<T> row(lp.a[i].begin(), lp.a[i].end());
    out.add_row(row, lp.sense[i], T(lp.b[i]));
  }
  out.c.assign(lp.c.begin(), lp.c.end());
  return out;
}

// Best vertex of {x >= 0, rows} by trying every choice of n tight constraints.
struct VertexResult {
  bool feasible = false;
  double value = std::numeric_limits<double>::infinity();
};

VertexResult enumerate_vertices(const LinearProgram<int>& lp) {
  const std::size_t n = lp.c.size(), m = lp.a.size();
  const std::size_t total = m + n;  // rows then nonnegativity
  VertexResult best;
  std::vector<bool> pick(total, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(n), true);
  std::sort(pick.begin(), pick.end());
  do {
    Eigen::MatrixXd a(n, n);
    Eigen::VectorXd b(n);
    std::size_t k = 0;
    for (std::size_t i = 0; i < total; ++i) {
      if (!pick[i]) continue;
      if (i < m) {
        for (std::size_t j = 0; j < n; ++j) a(k, j) = lp.a[i][j];
        b(k) = lp.b[i];
      } else {
        a.row(k).setZero();
        a(k, i - m) = 1.0;
        b(k) = 0.0;
      }
      ++k;
    }
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    if (!lu.isInvertible()) continue;
    const Eigen::VectorXd x = lu.solve(b);
    bool ok = true;
    for (std::size_t j = 0; j < n && ok; ++j) ok = x(j) >= -1e-9;
    for (std::size_t i = 0; i < m && ok; ++i) {
      double lhs = 0;
      for (std::size_t j = 0; j < n; ++j) lhs += lp.a[i][j] * x(j);
      const double tol = 1e-9 * (1 + std::abs(lp.b[i]));
      if (lp.sense[i] == RowSense::LessEq) ok = lhs <= lp.b[i] + tol;
      else if (lp.sense[i] == RowSense::GreaterEq) ok = lhs >= lp.b[i] - tol;
      else ok = std::abs(lhs - lp.b[i]) <= tol;
    }
    if (!ok) continue;
    best.feasible = true;
    double v = 0;
    for (std::size_t j = 0; j < n; ++j) v += lp.c[j] * x(j);
    best.value = std::min(best.value, v);
  } while (std::next_permutation(pick.begin(), pick.end()));
  return best;
}

// Bounded random LP with small integer data; the box rows keep it bounded.
LinearProgram<int> random_lp(std::mt19937_64& rng, std::size_t n, std::size_t m) {
  std::uniform_int_distribution<int> coef(-6, 9), rhs(-5, 20), box(1, 10);
  std::uniform_int_distribution<int> kind(0, 5);
  LinearProgram<int> lp;
  for (std::size_t i = 0; i < m; ++i) {
    std::vector<int> row(n);
    for (auto& v : row) v = coef(rng);
    const int k = kind(rng);
    lp.add_row(row, k < 3 ? RowSense::LessEq : (k < 5 ? RowSense::GreaterEq : RowSense::Equal), rhs(rng));
  }
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<int> row(n, 0);
    row[j] = 1;
    lp.add_row(row, RowSense::LessEq, box(rng));
  }
  lp.c.resize(n);
  for (auto& v : lp.c) v = coef(rng);
  return lp;
}

}  // namespace

TEST_CASE("simplex textbook instance") {
  LinearProgram<double> lp;
  lp.add_row({1, 0}, RowSense::LessEq, 4);
  lp.add_row({0, 2}, RowSense::LessEq, 12);
  lp.add_row({3, 2}, RowSense::LessEq, 18);
  lp.c = {-3, -5};
  const auto r = simplex_minimize(lp, 1e-12);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == doctest::Approx(-36));
  CHECK(r.x[0] == doctest::Approx(2));
  CHECK(r.x[1] == doctest::Approx(6));
}

TEST_CASE("simplex infeasible, unbounded, redundant equalities") {
  LinearProgram<double> bad;
  bad.add_row({1}, RowSense::GreaterEq, 2);
  bad.add_row({1}, RowSense::LessEq, 1);
  bad.c = {1};
  CHECK(simplex_minimize(bad, 1e-12, 1e-9).status == LpStatus::Infeasible);

  LinearProgram<double> open;
  open.add_row({1, -1}, RowSense::LessEq, 1);
  open.c = {-1, 0};
  CHECK(simplex_minimize(open, 1e-12).status == LpStatus::Unbounded);

  LinearProgram<Rational> eq;
  eq.add_row({1, 1}, RowSense::Equal, 1);
  eq.add_row({2, 2}, RowSense::Equal, 2);
  eq.add_row({-1, 0}, RowSense::LessEq, Rational(-1, 4));  // x >= 1/4 after sign flip
  eq.c = {1, 2};
  const auto r = simplex_minimize(eq);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.x[0] == 1);
  CHECK(r.x[1] == 0);
}

TEST_CASE("Bland's rule terminates on Beale's cycling example") {
  LinearProgram<Rational> lp;
  lp.add_row({Rational(1, 4), -60, Rational(-1, 25), 9}, RowSense::LessEq, 0);
  lp.add_row({Rational(1, 2), -90, Rational(-1, 50), 3}, RowSense::LessEq, 0);
  lp.add_row({0, 0, 1, 0}, RowSense::LessEq, 1);
  lp.c = {Rational(-3, 4), 150, Rational(-1, 50), 6};
  const auto r = simplex_minimize(lp);
  REQUIRE(r.status == LpStatus::Optimal);
  CHECK(r.value == Rational(-1, 20));
  CHECK(r.x[0] == Rational(1, 25));
  CHECK(r.x[2] == 1);
}

TEST_CASE("double simplex agrees with exact rational pivots and vertex enumeration") {
  std::mt19937_64 rng(7);
  int optimal = 0, infeasible = 0;
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = 1 + trial % 6;
    const std::size_t m = 1 + (trial / 6) % 4;
    const auto lp = random_lp(rng, n, m);
    const auto exact = simplex_minimize(convert<Rational>(lp));
    const auto fast = simplex_minimize(convert<double>(lp), 1e-11, 1e-9);
    const auto vert = enumerate_vertices(lp);
    REQUIRE(exact.status != LpStatus::Unbounded);
    CHECK(fast.status == exact.status);
    CHECK(vert.feasible == (exact.status == LpStatus::Optimal));
    if (exact.status != LpStatus::Optimal || fast.status != LpStatus::Optimal) {
      ++infeasible;
      continue;
    }
    ++optimal;
    const double ref = static_cast<double>(exact.value);
    CHECK(testing::rel_diff(fast.value, ref, 1.0) <= 1e-9);
    CHECK(testing::rel_diff(vert.value, ref, 1.0) <= 1e-9);
  }
  CHECK(optimal > 100);
  CHECK(infeasible > 10);
}

TEST_CASE("duplicate columns leave the optimum unchanged") {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    auto lp = random_lp(rng, 3, 3);
    auto dup = lp;
    for (auto& row : dup.a) row.push_back(row[1]);
    dup.c.push_back(dup.c[1]);
    const auto a = simplex_minimize(convert<Rational>(lp));
    const auto b = simplex_minimize(convert<Rational>(dup));
    CHECK(a.status == b.status);
    if (a.status == LpStatus::Optimal) CHECK(a.value == b.value);
  }
}

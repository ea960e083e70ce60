#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace mrcwpt {

enum class LpStatus { Optimal, Infeasible, Unbounded };

inline const char* to_string(LpStatus s) {
  switch (s) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
  }
  return "?";
}

enum class RowSense { LessEq, GreaterEq, Equal };

/// minimize c.x  s.t.  A x (sense) b,  x >= 0.
template <class T>
struct LinearProgram {
  std::vector<std::vector<T>> a;
  std::vector<T> b;
  std::vector<RowSense> sense;
  std::vector<T> c;

  void add_row(std::vector<T> row, RowSense s, T rhs) {
    a.push_back(std::move(row));
    sense.push_back(s);
    b.push_back(std::move(rhs));
  }
};

template <class T>
struct LpResult {
  LpStatus status = LpStatus::Infeasible;
  std::vector<T> x;
  T value{};
  int pivots = 0;
};

namespace detail {

template <class T>
T abs_of(const T& v) {
  return v < T(0) ? T(-v) : v;
}

// Dense tableau: rows 0..m-1 are constraints, row m is the objective
// (reduced costs), last column is the right-hand side.
template <class T>
class Tableau {
 public:
  Tableau(std::size_t m, std::size_t n) : m_(m), n_(n), t_(m + 1, std::vector<T>(n + 1, T(0))), basis_(m) {}

  T& at(std::size_t i, std::size_t j) { return t_[i][j]; }
  T& rhs(std::size_t i) { return t_[i][n_]; }
  T& cost(std::size_t j) { return t_[m_][j]; }
  std::size_t& basis(std::size_t i) { return basis_[i]; }
  std::size_t rows() const { return m_; }

  void pivot(std::size_t r, std::size_t col) {
    const T p = t_[r][col];
    for (auto& v : t_[r]) v /= p;
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r || t_[i][col] == T(0)) continue;
      const T f = t_[i][col];
      for (std::size_t j = 0; j <= n_; ++j) t_[i][j] -= f * t_[r][j];
      t_[i][col] = T(0);
    }
    basis_[r] = col;
  }

  // Bland's rule over columns [0, active); false when unbounded.
  bool optimize(std::size_t active, const T& eps, int& pivots) {
    for (;;) {
      std::size_t enter = active;
      for (std::size_t j = 0; j < active; ++j)
        if (t_[m_][j] < -eps) {
          enter = j;
          break;
        }
      if (enter == active) return true;
      std::size_t leave = m_;
      T best{};
      for (std::size_t i = 0; i < m_; ++i) {
        if (!(t_[i][enter] > eps)) continue;
        const T ratio = t_[i][n_] / t_[i][enter];
        if (leave == m_ || ratio < best || (!(best < ratio) && basis_[i] < basis_[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave == m_) return false;
      pivot(leave, enter);
      ++pivots;
    }
  }

  void drop_row(std::size_t r) {
    t_.erase(t_.begin() + static_cast<std::ptrdiff_t>(r));
    basis_.erase(basis_.begin() + static_cast<std::ptrdiff_t>(r));
    --m_;
  }

 private:
  std::size_t m_, n_;
  std::vector<std::vector<T>> t_;
  std::vector<std::size_t> basis_;
};

}  // namespace detail

/// Two-phase dense simplex with Bland's anti-cycling rule. `eps` is the pivot
/// and optimality tolerance (use 0 for exact arithmetic); phase one declares
/// infeasibility when the artificial sum exceeds `feas_tol`.
template <class T>
LpResult<T> simplex_minimize(const LinearProgram<T>& lp, T eps = T(0), T feas_tol = T(0)) {
  const std::size_t m = lp.a.size();
  const std::size_t n = lp.c.size();
  if (lp.b.size() != m || lp.sense.size() != m) throw std::invalid_argument("simplex: row count mismatch");
  for (const auto& row : lp.a)
    if (row.size() != n) throw std::invalid_argument("simplex: column count mismatch");

  // Normalize to b >= 0 and count auxiliary columns.
  std::vector<std::vector<T>> a = lp.a;
  std::vector<T> b = lp.b;
  std::vector<RowSense> sense = lp.sense;
  std::size_t n_slack = 0, n_art = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (b[i] < T(0)) {
      for (auto& v : a[i]) v = -v;
      b[i] = -b[i];
      if (sense[i] == RowSense::LessEq) sense[i] = RowSense::GreaterEq;
      else if (sense[i] == RowSense::GreaterEq) sense[i] = RowSense::LessEq;
    }
    if (sense[i] != RowSense::Equal) ++n_slack;
    if (sense[i] != RowSense::LessEq) ++n_art;
  }

  // Columns: originals, slacks/surpluses, artificials.
  const std::size_t n_real = n + n_slack;
  const std::size_t n_all = n_real + n_art;
  detail::Tableau<T> tab(m, n_all);
  std::size_t s = n, art = n_real;
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) tab.at(i, j) = a[i][j];
    tab.rhs(i) = b[i];
    if (sense[i] == RowSense::LessEq) {
      tab.at(i, s) = T(1);
      tab.basis(i) = s++;
    } else {
      if (sense[i] == RowSense::GreaterEq) tab.at(i, s++) = T(-1);
      tab.at(i, art) = T(1);
      tab.basis(i) = art++;
    }
  }

  LpResult<T> res;
  res.x.assign(n, T(0));

  if (n_art > 0) {
    // Phase one objective: sum of artificials, expressed in reduced costs.
    for (std::size_t i = 0; i < m; ++i) {
      if (tab.basis(i) < n_real) continue;
      for (std::size_t j = 0; j < n_real; ++j) tab.cost(j) -= tab.at(i, j);
      tab.rhs(m) -= tab.rhs(i);
    }
    tab.optimize(n_all, eps, res.pivots);
    if (-tab.rhs(tab.rows()) > feas_tol) {
      res.status = LpStatus::Infeasible;
      return res;
    }
    // Drive zero-level artificials out; rows with no real pivot are redundant.
    for (std::size_t i = 0; i < tab.rows();) {
      if (tab.basis(i) < n_real) {
        ++i;
        continue;
      }
      std::size_t col = n_real;
      for (std::size_t j = 0; j < n_real; ++j)
        if (detail::abs_of(tab.at(i, j)) > eps) {
          col = j;
          break;
        }
      if (col == n_real) {
        tab.drop_row(i);
      } else {
        tab.pivot(i, col);
        ++res.pivots;
        ++i;
      }
    }
  }

  // Phase two reduced costs from the original objective.
  const std::size_t mm = tab.rows();
  for (std::size_t j = 0; j <= n_all; ++j) tab.at(mm, j) = T(0);
  for (std::size_t j = 0; j < n; ++j) tab.cost(j) = lp.c[j];
  for (std::size_t i = 0; i < mm; ++i) {
    const std::size_t bj = tab.basis(i);
    if (bj >= n || tab.cost(bj) == T(0)) continue;
    const T f = tab.cost(bj);
    for (std::size_t j = 0; j <= n_all; ++j) tab.at(mm, j) -= f * tab.at(i, j);
  }
  if (!tab.optimize(n_real, eps, res.pivots)) {
    res.status = LpStatus::Unbounded;
    return res;
  }
  for (std::size_t i = 0; i < mm; ++i)
    if (tab.basis(i) < n) res.x[tab.basis(i)] = tab.rhs(i);
  res.value = T(0);
  for (std::size_t j = 0; j < n; ++j) res.value += lp.c[j] * res.x[j];
  res.status = LpStatus::Optimal;
  return res;
}

}  // namespace mrcwpt

#include "reserve/simplex.hpp"

#include <cmath>
#include <stdexcept>

namespace reserve::lp {

namespace {

// Tableau layout: m constraint rows over n structural + m artificial columns,
// plus the rhs column. Row `obj` below holds reduced costs of the phase
// objective being maximized (stored as z_j - c_j, optimal when all >= -tol).
struct Tableau {
  int m, n;                          // constraints, structural variables
  std::vector<std::vector<double>> t;  // m rows, n + m + 1 columns
  std::vector<int> basis;              // basic variable per row
  std::vector<double> obj;             // reduced-cost row, n + m + 1 entries

  int cols() const { return n + m + 1; }
  int rhs() const { return n + m; }

  void pivot(int row, int col) {
    double piv = t[row][col];
    for (int j = 0; j < cols(); ++j) t[row][j] /= piv;
    for (int i = 0; i < m; ++i) {
      if (i == row) continue;
      double f = t[i][col];
      if (f == 0.0) continue;
      for (int j = 0; j < cols(); ++j) t[i][j] -= f * t[row][j];
    }
    double f = obj[col];
    if (f != 0.0)
      for (int j = 0; j < cols(); ++j) obj[j] -= f * t[row][j];
    basis[row] = col;
  }

  // Runs simplex on the current objective row. `allowed(j)` limits entering
  // columns. Returns false iff unbounded.
  template <typename Allowed>
  bool run(Allowed allowed) {
    for (;;) {
      // Bland: smallest-index column with negative reduced cost.
      int enter = -1;
      for (int j = 0; j < n + m; ++j) {
        if (!allowed(j)) continue;
        if (obj[j] < -kOptTol) {
          enter = j;
          break;
        }
      }
      if (enter < 0) return true;
      // Ratio test; ties broken by smallest basis index (Bland).
      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i) {
        if (t[i][enter] <= kFeasTol) continue;
        double ratio = t[i][rhs()] / t[i][enter];
        if (leave < 0 || ratio < best - kFeasTol ||
            (ratio < best + kFeasTol && basis[i] < basis[leave])) {
          leave = i;
          best = ratio;
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
  }
};

}  // namespace

Result maximize(const std::vector<std::vector<double>>& A,
                const std::vector<double>& b, const std::vector<double>& c) {
  const int m = static_cast<int>(A.size());
  const int n = static_cast<int>(c.size());
  if (static_cast<int>(b.size()) != m)
    throw std::invalid_argument("simplex: b size mismatch");
  for (const auto& row : A)
    if (static_cast<int>(row.size()) != n)
      throw std::invalid_argument("simplex: A row size mismatch");

  Tableau tab;
  tab.m = m;
  tab.n = n;
  tab.t.assign(m, std::vector<double>(n + m + 1, 0.0));
  tab.basis.resize(m);
  for (int i = 0; i < m; ++i) {
    double sign = (b[i] < 0.0) ? -1.0 : 1.0;
    for (int j = 0; j < n; ++j) tab.t[i][j] = sign * A[i][j];
    tab.t[i][n + i] = 1.0;  // artificial
    tab.t[i][tab.rhs()] = sign * b[i];
    tab.basis[i] = n + i;
  }

  // Phase 1: maximize -(sum of artificials). Reduced costs start as
  // z_j - c_j with c = -1 on artificials and the artificial basis priced in.
  tab.obj.assign(tab.cols(), 0.0);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < tab.cols(); ++j)
      if (j != n + i) tab.obj[j] -= tab.t[i][j];

  if (!tab.run([](int) { return true; }))
    throw std::logic_error("simplex: phase 1 unbounded");
  if (tab.obj[tab.rhs()] < -1e-8) return {Status::infeasible, 0.0, {}};

  // Drive leftover artificials out of the basis; rows with no structural
  // pivot are redundant and harmless to leave (their rhs is ~0).
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::fabs(tab.t[i][j]) > 1e-9) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 objective: z_j - c_j for the real c over the current basis.
  tab.obj.assign(tab.cols(), 0.0);
  for (int j = 0; j < n; ++j) tab.obj[j] = -c[j];
  for (int i = 0; i < m; ++i) {
    if (tab.basis[i] >= n) continue;
    double cb = c[tab.basis[i]];
    if (cb == 0.0) continue;
    for (int j = 0; j < tab.cols(); ++j) tab.obj[j] += cb * tab.t[i][j];
  }
  // Exact zeros on basic columns (they are unit columns by construction).
  for (int i = 0; i < m; ++i) tab.obj[tab.basis[i]] = 0.0;

  bool bounded = tab.run([&](int j) {
    if (j >= n) return false;  // artificials stay out
    return true;
  });
  if (!bounded) return {Status::unbounded, 0.0, {}};

  Result res;
  res.status = Status::optimal;
  res.x.assign(n, 0.0);
  for (int i = 0; i < m; ++i)
    if (tab.basis[i] < n) res.x[tab.basis[i]] = tab.t[i][tab.rhs()];
  res.objective = 0.0;
  for (int j = 0; j < n; ++j) res.objective += c[j] * res.x[j];
  return res;
}

}  // namespace reserve::lp

#include "sparselab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sparselab {

std::string to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::iteration_limit: return "iteration_limit";
  }
  return "unknown";
}

namespace {

class Tableau {
 public:
  Tableau(const std::vector<std::vector<double>>& a, const std::vector<double>& b, const std::vector<double>& c,
          double eps)
      : m_(static_cast<int>(b.size())),
        n_(static_cast<int>(c.size())),
        eps_(eps),
        w_(n_ + 2),
        d_(static_cast<std::size_t>(m_ + 2) * (n_ + 2), 0.0),
        basis_(m_),
        nonbasis_(n_ + 1) {
    for (int i = 0; i < m_; ++i) {
      if (static_cast<int>(a[i].size()) != n_) throw std::invalid_argument("LP row width mismatch");
      for (int j = 0; j < n_; ++j) at(i, j) = a[i][j];
      at(i, n_) = -1.0;
      at(i, n_ + 1) = b[i];
      basis_[i] = n_ + i;
    }
    for (int j = 0; j < n_; ++j) {
      nonbasis_[j] = j;
      at(m_, j) = -c[j];
    }
    nonbasis_[n_] = -1;
    at(m_ + 1, n_) = 1.0;
  }

  LpResult solve(std::uint64_t max_pivots) {
    LpResult out;
    cap_ = max_pivots;
    int r = 0;
    for (int i = 1; i < m_; ++i) {
      if (at(i, n_ + 1) < at(r, n_ + 1)) r = i;
    }
    if (m_ > 0 && at(r, n_ + 1) < -eps_) {
      pivot(r, n_);
      const int s1 = run(1);
      if (s1 == 2) {
        out.status = LpStatus::iteration_limit;
        out.pivots = pivots_;
        return out;
      }
      if (s1 == 1 || at(m_ + 1, n_ + 1) < -eps_) {
        out.status = LpStatus::infeasible;
        out.pivots = pivots_;
        return out;
      }
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] != -1) continue;
        int s = -1;
        for (int j = 0; j <= n_; ++j) {
          if (s == -1 || at(i, j) < at(i, s) || (at(i, j) == at(i, s) && nonbasis_[j] < nonbasis_[s])) s = j;
        }
        pivot(i, s);
      }
    }
    const int s2 = run(2);
    out.status = s2 == 0 ? LpStatus::optimal : s2 == 1 ? LpStatus::unbounded : LpStatus::iteration_limit;
    out.x.assign(n_, 0.0);
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] >= 0 && basis_[i] < n_) out.x[basis_[i]] = at(i, n_ + 1);
    }
    out.duals.assign(m_, 0.0);
    for (int j = 0; j <= n_; ++j) {
      if (nonbasis_[j] >= n_) out.duals[nonbasis_[j] - n_] = at(m_, j);
    }
    out.objective = at(m_, n_ + 1);
    out.pivots = pivots_;
    return out;
  }

 private:
  double& at(int i, int j) { return d_[static_cast<std::size_t>(i) * w_ + j]; }

  void pivot(int r, int s) {
    const double inv = 1.0 / at(r, s);
    double* row_r = &at(r, 0);
    for (int i = 0; i < m_ + 2; ++i) {
      if (i == r) continue;
      double* row = &at(i, 0);
      const double f = row[s] * inv;
      if (f == 0.0) continue;
      for (int j = 0; j < n_ + 2; ++j) row[j] -= row_r[j] * f;
      row[s] = -f;
    }
    for (int j = 0; j < n_ + 2; ++j) row_r[j] *= inv;
    row_r[s] = inv;
    std::swap(basis_[r], nonbasis_[s]);
    ++pivots_;
  }

  // 0 optimal, 1 unbounded, 2 pivot cap
  int run(int phase) {
    const int x = phase == 1 ? m_ + 1 : m_;
    while (true) {
      if (pivots_ >= cap_) return 2;
      int s = -1;
      for (int j = 0; j <= n_; ++j) {
        if (phase == 2 && nonbasis_[j] == -1) continue;
        if (s == -1 || at(x, j) < at(x, s) || (at(x, j) == at(x, s) && nonbasis_[j] < nonbasis_[s])) s = j;
      }
      if (at(x, s) > -eps_) return 0;
      int r = -1;
      for (int i = 0; i < m_; ++i) {
        if (at(i, s) < eps_) continue;
        if (r == -1) {
          r = i;
          continue;
        }
        const double lhs = at(i, n_ + 1) / at(i, s), rhs = at(r, n_ + 1) / at(r, s);
        if (lhs < rhs || (lhs == rhs && basis_[i] < basis_[r])) r = i;
      }
      if (r == -1) return 1;
      pivot(r, s);
    }
  }

  int m_, n_;
  double eps_;
  std::size_t w_;
  std::vector<double> d_;
  std::vector<int> basis_, nonbasis_;
  std::uint64_t pivots_ = 0, cap_ = 0;
};

}  // namespace

LpResult solve_lp(const std::vector<std::vector<double>>& a, const std::vector<double>& b,
                  const std::vector<double>& c, std::uint64_t max_pivots, double eps) {
  if (a.size() != b.size()) throw std::invalid_argument("LP needs one bound per row");
  Tableau t(a, b, c, eps);
  return t.solve(max_pivots);
}

}  // namespace sparselab

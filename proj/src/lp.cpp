/*
 Copyright 2026 The acmpc Authors

 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      https://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

#include "acmpc/lp.hpp"

#include <cmath>
#include <vector>

namespace acmpc
{

namespace
{

constexpr double kTol = 1e-12;

struct Tableau
{
  Mat T;  // rows: constraints, last column: rhs
  std::vector<int> basis;
  int n_cols = 0;

  void pivot(int row, int col)
  {
    T.row(row) /= T(row, col);
    for (int i = 0; i < T.rows(); ++i)
    {
      if (i != row && T(i, col) != 0.0)
        T.row(i) -= T(i, col) * T.row(row);
    }
    basis[row] = col;
  }

  // Maximizes cost'x over the columns flagged in `allowed`.
  LpResult::Status optimize(const Vec &cost, const std::vector<bool> &allowed)
  {
    const int m = static_cast<int>(T.rows());
    for (int guard = 0; guard < 100000; ++guard)
    {
      int enter = -1;
      for (int j = 0; j < n_cols; ++j)
      {
        if (!allowed[j])
          continue;
        double rc = cost(j);
        for (int i = 0; i < m; ++i)
          rc -= cost(basis[i]) * T(i, j);
        if (rc > kTol)
        {
          enter = j;
          break;
        }
      }
      if (enter < 0)
        return LpResult::Status::Optimal;

      int leave = -1;
      double best = 0.0;
      for (int i = 0; i < m; ++i)
      {
        if (T(i, enter) > kTol)
        {
          const double ratio = T(i, n_cols) / T(i, enter);
          if (leave < 0 || ratio < best - kTol ||
              (std::abs(ratio - best) <= kTol && basis[i] < basis[leave]))
          {
            leave = i;
            best = ratio;
          }
        }
      }
      if (leave < 0)
        return LpResult::Status::Unbounded;
      pivot(leave, enter);
    }
    throw SolverError("lp_maximize: iteration guard exceeded");
  }
};

} // namespace

LpResult lp_maximize(const Vec &c, const Mat &A_le, const Vec &b_le, const Mat &A_eq,
                     const Vec &b_eq)
{
  const int n = static_cast<int>(c.size());
  const int m_le = static_cast<int>(A_le.rows());
  const int m_eq = static_cast<int>(A_eq.rows());
  require(m_le == 0 || (A_le.cols() == n && b_le.size() == m_le), "lp_maximize: A_le mismatch");
  require(m_eq == 0 || (A_eq.cols() == n && b_eq.size() == m_eq), "lp_maximize: A_eq mismatch");

  const int m = m_le + m_eq;
  // Columns: x | slack per <= row | artificial per row that needs one.
  int n_art = m_eq;
  for (int i = 0; i < m_le; ++i)
  {
    if (b_le(i) < 0.0)
      ++n_art;
  }
  const int n_cols = n + m_le + n_art;

  Tableau tab;
  tab.n_cols = n_cols;
  tab.T = Mat::Zero(m, n_cols + 1);
  tab.basis.assign(m, -1);
  int art = n + m_le;
  for (int i = 0; i < m_le; ++i)
  {
    const double sign = b_le(i) < 0.0 ? -1.0 : 1.0;
    tab.T.row(i).head(n) = sign * A_le.row(i);
    tab.T(i, n + i) = sign;
    tab.T(i, n_cols) = sign * b_le(i);
    if (sign > 0.0)
    {
      tab.basis[i] = n + i;
    }
    else
    {
      tab.T(i, art) = 1.0;
      tab.basis[i] = art++;
    }
  }
  for (int k = 0; k < m_eq; ++k)
  {
    const int i = m_le + k;
    const double sign = b_eq(k) < 0.0 ? -1.0 : 1.0;
    tab.T.row(i).head(n) = sign * A_eq.row(k);
    tab.T(i, n_cols) = sign * b_eq(k);
    tab.T(i, art) = 1.0;
    tab.basis[i] = art++;
  }

  LpResult res;
  std::vector<bool> allowed(n_cols, true);
  if (n_art > 0)
  {
    Vec phase1 = Vec::Zero(n_cols);
    phase1.tail(n_art).setConstant(-1.0);
    tab.optimize(phase1, allowed);
    double infeas = 0.0;
    for (int i = 0; i < m; ++i)
    {
      if (tab.basis[i] >= n + m_le)
        infeas += tab.T(i, n_cols);
    }
    if (infeas > 1e-9)
    {
      res.status = LpResult::Status::Infeasible;
      return res;
    }
    for (int i = 0; i < m; ++i)
    {
      if (tab.basis[i] < n + m_le)
        continue;
      for (int j = 0; j < n + m_le; ++j)
      {
        if (std::abs(tab.T(i, j)) > 1e-9)
        {
          tab.pivot(i, j);
          break;
        }
      }
    }
    for (int j = n + m_le; j < n_cols; ++j)
      allowed[j] = false;
  }

  Vec cost = Vec::Zero(n_cols);
  cost.head(n) = c;
  res.status = tab.optimize(cost, allowed);
  res.x = Vec::Zero(n);
  for (int i = 0; i < m; ++i)
  {
    if (tab.basis[i] < n)
      res.x(tab.basis[i]) = tab.T(i, n_cols);
  }
  res.value = c.dot(res.x);
  return res;
}

} // namespace acmpc

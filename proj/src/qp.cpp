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

#include "acmpc/qp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace acmpc
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kEps = std::numeric_limits<double>::epsilon();

enum class RowKind
{
  General,
  Lower,
  Upper
};

struct RowSource
{
  RowKind kind;
  int index;
};

// Givens-rotate d so that only its first iq+1 entries are non-zero, then append
// the new column to R. Returns false when the new constraint is dependent.
bool add_constraint(Mat &R, Mat &J, Vec &d, int &iq, double &R_norm)
{
  const int n = static_cast<int>(d.size());
  for (int j = n - 1; j >= iq + 1; --j)
  {
    double cc = d(j - 1);
    double ss = d(j);
    const double h = std::hypot(cc, ss);
    if (h < kEps)
      continue;
    d(j) = 0.0;
    ss /= h;
    cc /= h;
    if (cc < 0.0)
    {
      cc = -cc;
      ss = -ss;
      d(j - 1) = -h;
    }
    else
    {
      d(j - 1) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = 0; k < n; ++k)
    {
      const double t1 = J(k, j - 1);
      const double t2 = J(k, j);
      J(k, j - 1) = t1 * cc + t2 * ss;
      J(k, j) = xny * (t1 + J(k, j - 1)) - t2;
    }
  }
  ++iq;
  R.col(iq - 1).head(iq) = d.head(iq);
  if (std::abs(d(iq - 1)) <= kEps * R_norm)
    return false;
  R_norm = std::max(R_norm, std::abs(d(iq - 1)));
  return true;
}

void delete_constraint(Mat &R, Mat &J, std::vector<int> &A, Vec &u, int p, int &iq, int l)
{
  const int n = static_cast<int>(R.rows());
  int qq = -1;
  for (int i = p; i < iq; ++i)
  {
    if (A[i] == l)
    {
      qq = i;
      break;
    }
  }
  if (qq < 0)
    return;

  for (int i = qq; i < iq - 1; ++i)
  {
    A[i] = A[i + 1];
    u(i) = u(i + 1);
    R.col(i) = R.col(i + 1);
  }
  A[iq - 1] = A[iq];
  u(iq - 1) = u(iq);
  A[iq] = 0;
  u(iq) = 0.0;
  R.col(iq - 1).head(iq).setZero();
  --iq;
  if (iq == 0)
    return;

  for (int j = qq; j < iq; ++j)
  {
    double cc = R(j, j);
    double ss = R(j + 1, j);
    const double h = std::hypot(cc, ss);
    if (h < kEps)
      continue;
    cc /= h;
    ss /= h;
    R(j + 1, j) = 0.0;
    if (cc < 0.0)
    {
      R(j, j) = -h;
      cc = -cc;
      ss = -ss;
    }
    else
    {
      R(j, j) = h;
    }
    const double xny = ss / (1.0 + cc);
    for (int k = j + 1; k < iq; ++k)
    {
      const double t1 = R(j, k);
      const double t2 = R(j + 1, k);
      R(j, k) = t1 * cc + t2 * ss;
      R(j + 1, k) = xny * (t1 + R(j, k)) - t2;
    }
    for (int k = 0; k < n; ++k)
    {
      const double t1 = J(k, j);
      const double t2 = J(k, j + 1);
      J(k, j) = t1 * cc + t2 * ss;
      J(k, j + 1) = xny * (J(k, j) + t1) - t2;
    }
  }
}

bool factor(const Mat &H, Eigen::LLT<Mat> &llt)
{
  llt.compute(H);
  if (llt.info() != Eigen::Success)
    return false;
  const Vec dg = llt.matrixLLT().diagonal();
  return dg.minCoeff() > 1e-13 * std::max(1.0, dg.maxCoeff());
}

} // namespace

QpResult solve_qp(const QpProblem &qp, const QpOptions &opts)
{
  const int n = static_cast<int>(qp.H.rows());
  require(qp.H.cols() == n && qp.g.size() == n, "solve_qp: H/g dimension mismatch");
  const int p = static_cast<int>(qp.A_eq.rows());
  require(p == 0 || (qp.A_eq.cols() == n && qp.b_eq.size() == p), "solve_qp: A_eq mismatch");
  const int m_gen = static_cast<int>(qp.A_in.rows());
  require(m_gen == 0 || (qp.A_in.cols() == n && qp.b_in.size() == m_gen),
          "solve_qp: A_in mismatch");
  require(qp.lb.size() == 0 || qp.lb.size() == n, "solve_qp: lb mismatch");
  require(qp.ub.size() == 0 || qp.ub.size() == n, "solve_qp: ub mismatch");

  // Inequalities in the form CI' z + ci0 >= 0.
  std::vector<RowSource> src;
  for (int i = 0; i < m_gen; ++i)
    src.push_back({RowKind::General, i});
  for (int i = 0; i < qp.lb.size(); ++i)
  {
    if (std::isfinite(qp.lb(i)))
      src.push_back({RowKind::Lower, i});
  }
  for (int i = 0; i < qp.ub.size(); ++i)
  {
    if (std::isfinite(qp.ub(i)))
      src.push_back({RowKind::Upper, i});
  }
  const int m = static_cast<int>(src.size());
  Mat CI = Mat::Zero(n, m);
  Vec ci0(m);
  for (int k = 0; k < m; ++k)
  {
    const RowSource &s = src[k];
    switch (s.kind)
    {
    case RowKind::General:
      CI.col(k) = -qp.A_in.row(s.index).transpose();
      ci0(k) = qp.b_in(s.index);
      break;
    case RowKind::Lower:
      CI(s.index, k) = 1.0;
      ci0(k) = -qp.lb(s.index);
      break;
    case RowKind::Upper:
      CI(s.index, k) = -1.0;
      ci0(k) = qp.ub(s.index);
      break;
    }
  }
  const Mat CE = p > 0 ? Mat(qp.A_eq.transpose()) : Mat(n, 0);
  const Vec ce0 = p > 0 ? Vec(-qp.b_eq) : Vec(0);

  Mat G = qp.H;
  Vec g0 = qp.g;
  Eigen::LLT<Mat> llt;
  if (!factor(G, llt))
  {
    if (p == 0)
      throw SolverError("indefinite reduced Hessian");
    const double rho = std::max(1.0, G.diagonal().cwiseAbs().maxCoeff());
    G += rho * CE * CE.transpose();
    g0 += rho * CE * ce0;
    if (!factor(G, llt))
      throw SolverError("indefinite reduced Hessian");
  }

  const int max_iter = opts.max_iter > 0 ? opts.max_iter : 10 * (n + m + p) + 50;

  // J = L^{-T} so that J J' = G^{-1}.
  const Mat L = llt.matrixL();
  Mat J = L.transpose().triangularView<Eigen::Upper>().solve(Mat::Identity(n, n));
  Mat R = Mat::Zero(n, n);
  const double c1 = G.trace();
  const double c2 = J.trace();
  double R_norm = 1.0;

  Vec x = -llt.solve(g0);
  Vec u = Vec::Zero(m + p + 1);
  std::vector<int> A(m + p + 1, 0), A_old(m + p + 1, 0);
  Vec u_old = Vec::Zero(m + p + 1);
  Vec d(n), z(n), r(m + p + 1), np(n), s = Vec::Zero(m);
  int iq = 0;

  auto solve_r = [&](int q) {
    if (q > 0)
      r.head(q) = R.topLeftCorner(q, q).triangularView<Eigen::Upper>().solve(d.head(q));
  };

  for (int i = 0; i < p; ++i)
  {
    np = CE.col(i);
    d.noalias() = J.transpose() * np;
    z.noalias() = J.rightCols(n - iq) * d.tail(n - iq);
    solve_r(iq);
    double t2 = 0.0;
    if (std::abs(z.dot(z)) > kEps)
      t2 = (-np.dot(x) - ce0(i)) / z.dot(np);
    x += t2 * z;
    u(iq) = t2;
    u.head(iq) -= t2 * r.head(iq);
    A[i] = -i - 1;
    if (!add_constraint(R, J, d, iq, R_norm))
      throw SolverError("solve_qp: equality constraints are linearly dependent");
  }

  std::vector<int> iai(m), iaexcl(m, 1);
  for (int i = 0; i < m; ++i)
    iai[i] = i;

  int iter = 0;
  bool converged = false;
  while (iter < max_iter)
  {
    ++iter;
    for (int i = p; i < iq; ++i)
      iai[A[i]] = -1;

    double psi = 0.0;
    if (m > 0)
    {
      s.noalias() = CI.transpose() * x;
      s += ci0;
    }
    for (int i = 0; i < m; ++i)
    {
      iaexcl[i] = 1;
      psi += std::min(0.0, s(i));
    }
    if (std::abs(psi) <= m * kEps * c1 * c2 * 100.0)
    {
      converged = true;
      break;
    }
    for (int i = p; i < iq; ++i)
    {
      u_old(i) = u(i);
      A_old[i] = A[i];
    }
    const Vec x_old = x;

    bool restart_outer = false;
    while (!restart_outer && iter < max_iter)
    {
      // Select the most violated inequality.
      double ss = 0.0;
      int ip = -1;
      for (int i = 0; i < m; ++i)
      {
        if (s(i) < ss && iai[i] != -1 && iaexcl[i])
        {
          ss = s(i);
          ip = i;
        }
      }
      if (ip < 0)
      {
        converged = true;
        break;
      }
      np = CI.col(ip);
      u(iq) = 0.0;
      A[iq] = ip;

      bool reselect = false;
      while (iter < max_iter)
      {
        ++iter;
        d.noalias() = J.transpose() * np;
        z.noalias() = J.rightCols(n - iq) * d.tail(n - iq);
        solve_r(iq);

        int l = 0;
        double t1 = kInf;
        for (int k = p; k < iq; ++k)
        {
          if (r(k) > 0.0 && u(k) / r(k) < t1)
          {
            t1 = u(k) / r(k);
            l = A[k];
          }
        }
        double t2 = kInf;
        if (std::abs(z.dot(z)) > kEps)
        {
          t2 = -s(ip) / z.dot(np);
          if (t2 < 0.0)
            t2 = kInf;
        }
        const double t = std::min(t1, t2);
        if (!(t < kInf))
          throw SolverError("infeasible QP");

        if (!(t2 < kInf))
        {
          // Dual step only.
          u.head(iq) -= t * r.head(iq);
          u(iq) += t;
          iai[l] = l;
          delete_constraint(R, J, A, u, p, iq, l);
          continue;
        }

        x += t * z;
        u.head(iq) -= t * r.head(iq);
        u(iq) += t;

        if (std::abs(t - t2) < kEps)
        {
          // Full step.
          if (!add_constraint(R, J, d, iq, R_norm))
          {
            iaexcl[ip] = 0;
            delete_constraint(R, J, A, u, p, iq, ip);
            for (int i = 0; i < m; ++i)
              iai[i] = i;
            for (int i = p; i < iq; ++i)
            {
              A[i] = A_old[i];
              u(i) = u_old(i);
              iai[A[i]] = -1;
            }
            x = x_old;
            reselect = true;
          }
          else
          {
            iai[ip] = -1;
            restart_outer = true;
          }
          break;
        }

        // Partial step: drop the blocking constraint and continue.
        iai[l] = l;
        delete_constraint(R, J, A, u, p, iq, l);
        s(ip) = CI.col(ip).dot(x) + ci0(ip);
      }
      if (converged || !reselect)
        break;
    }
    if (converged)
      break;
  }

  QpResult res;
  res.z = x;
  res.iterations = iter;
  res.converged = converged;
  res.y_eq = Vec::Zero(p);
  res.y_in = Vec::Zero(m_gen);
  res.y_lb = Vec::Zero(n);
  res.y_ub = Vec::Zero(n);
  for (int i = 0; i < iq; ++i)
  {
    if (A[i] < 0)
    {
      res.y_eq(-A[i] - 1) = -u(i);
      continue;
    }
    const RowSource &s_i = src[A[i]];
    switch (s_i.kind)
    {
    case RowKind::General:
      res.y_in(s_i.index) = u(i);
      break;
    case RowKind::Lower:
      res.y_lb(s_i.index) = u(i);
      break;
    case RowKind::Upper:
      res.y_ub(s_i.index) = u(i);
      break;
    }
  }
  res.objective = 0.5 * x.dot(qp.H * x) + qp.g.dot(x);
  qp_kkt_check(qp, res);
  return res;
}

QpResult solve_qp(const Mat &H, const Vec &g, const Mat &A_eq, const Vec &b_eq, const Vec &lb,
                  const Vec &ub)
{
  QpProblem qp;
  qp.H = H;
  qp.g = g;
  qp.A_eq = A_eq;
  qp.b_eq = b_eq;
  qp.lb = lb;
  qp.ub = ub;
  return solve_qp(qp);
}

void qp_kkt_check(const QpProblem &qp, QpResult &res)
{
  const Vec &z = res.z;
  Vec grad = qp.H * z + qp.g;
  double viol = 0.0;
  double comp = 0.0;
  if (qp.A_eq.rows() > 0)
  {
    grad += qp.A_eq.transpose() * res.y_eq;
    viol = std::max(viol, (qp.A_eq * z - qp.b_eq).cwiseAbs().maxCoeff());
  }
  if (qp.A_in.rows() > 0)
  {
    grad += qp.A_in.transpose() * res.y_in;
    const Vec slack = qp.A_in * z - qp.b_in;
    viol = std::max(viol, slack.maxCoeff());
    comp = std::max(comp, (res.y_in.array() * slack.array()).abs().maxCoeff());
  }
  for (int i = 0; i < z.size(); ++i)
  {
    if (qp.lb.size() > 0 && std::isfinite(qp.lb(i)))
    {
      viol = std::max(viol, qp.lb(i) - z(i));
      comp = std::max(comp, std::abs(res.y_lb(i) * (z(i) - qp.lb(i))));
    }
    if (qp.ub.size() > 0 && std::isfinite(qp.ub(i)))
    {
      viol = std::max(viol, z(i) - qp.ub(i));
      comp = std::max(comp, std::abs(res.y_ub(i) * (qp.ub(i) - z(i))));
    }
  }
  grad -= res.y_lb;
  grad += res.y_ub;
  res.kkt_residual = grad.size() > 0 ? grad.cwiseAbs().maxCoeff() : 0.0;
  res.complementarity = comp;
  res.primal_violation = std::max(0.0, viol);
}

} // namespace acmpc

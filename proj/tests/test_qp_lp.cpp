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
#include "acmpc/qp.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace acmpc;

namespace
{

// FISTA on the box; converges to the unique minimizer for H positive definite.
Vec projected_gradient(const Mat &H, const Vec &g, const Vec &lb, const Vec &ub)
{
  const double L = Eigen::SelfAdjointEigenSolver<Mat>(H).eigenvalues().maxCoeff();
  Vec z = Vec::Zero(g.size()).cwiseMax(lb).cwiseMin(ub);
  Vec y = z;
  double t = 1.0;
  for (int it = 0; it < 200000; ++it)
  {
    const Vec z_next = (y - (H * y + g) / L).cwiseMax(lb).cwiseMin(ub);
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    y = z_next + ((t - 1.0) / t_next) * (z_next - z);
    const double step = (z_next - z).norm();
    z = z_next;
    t = t_next;
    if (step < 1e-13)
      break;
  }
  return z;
}

Mat random_spd(int n, std::mt19937_64 &rng)
{
  std::normal_distribution<double> nd;
  Mat M(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      M(i, j) = nd(rng);
  return M.transpose() * M + 0.1 * Mat::Identity(n, n);
}

} // namespace

TEST(Qp, BoxQpMatchesProjectedGradient)
{
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd;
  std::uniform_int_distribution<int> dim(2, 12);
  for (int trial = 0; trial < 50; ++trial)
  {
    const int n = dim(rng);
    const Mat H = random_spd(n, rng);
    Vec g(n), lb(n), ub(n);
    for (int i = 0; i < n; ++i)
    {
      g(i) = 3.0 * nd(rng);
      lb(i) = -std::abs(nd(rng));
      ub(i) = std::abs(nd(rng));
    }
    const QpResult res = solve_qp(H, g, Mat(0, n), Vec(0), lb, ub);
    ASSERT_TRUE(res.converged) << "trial " << trial;
    const Vec oracle = projected_gradient(H, g, lb, ub);
    EXPECT_LT((res.z - oracle).cwiseAbs().maxCoeff(), 1e-6) << "trial " << trial;
  }
}

TEST(Qp, EqualityConstrainedMatchesKktSystem)
{
  std::mt19937_64 rng(7);
  std::normal_distribution<double> nd;
  for (int trial = 0; trial < 20; ++trial)
  {
    const int n = 6, m = 2;
    const Mat H = random_spd(n, rng);
    Vec g(n);
    Mat A(m, n);
    Vec b(m);
    for (int i = 0; i < n; ++i)
      g(i) = nd(rng);
    for (int i = 0; i < m; ++i)
    {
      b(i) = nd(rng);
      for (int j = 0; j < n; ++j)
        A(i, j) = nd(rng);
    }
    Mat K = Mat::Zero(n + m, n + m);
    K.topLeftCorner(n, n) = H;
    K.topRightCorner(n, m) = A.transpose();
    K.bottomLeftCorner(m, n) = A;
    Vec rhs(n + m);
    rhs << -g, b;
    const Vec sol = K.fullPivLu().solve(rhs);
    const Vec inf = Vec::Constant(n, std::numeric_limits<double>::infinity());
    const QpResult res = solve_qp(H, g, A, b, -inf, inf);
    ASSERT_TRUE(res.converged);
    EXPECT_LT((res.z - sol.head(n)).norm(), 1e-9);
  }
}

TEST(Qp, HalfspaceProjectionClosedForm)
{
  // min 0.5 ||z - p||^2 s.t. a'z <= b has z = p - max(0, a'p - b) a / ||a||^2.
  QpProblem qp;
  const int n = 4;
  Vec p(n), a(n);
  p << 1.0, 2.0, -1.0, 0.5;
  a << 1.0, 1.0, 0.0, 2.0;
  const double b = 1.0;
  qp.H = Mat::Identity(n, n);
  qp.g = -p;
  qp.A_in = a.transpose();
  qp.b_in = Vec::Constant(1, b);
  const QpResult res = solve_qp(qp);
  ASSERT_TRUE(res.converged);
  const Vec expect = p - (a.dot(p) - b) / a.squaredNorm() * a;
  EXPECT_LT((res.z - expect).norm(), 1e-10);
  EXPECT_NEAR(res.y_in(0), (a.dot(p) - b) / a.squaredNorm(), 1e-10);
  EXPECT_LT(res.kkt_residual, 1e-9);
}

TEST(Qp, InfeasibleThrows)
{
  QpProblem qp;
  qp.H = Mat::Identity(2, 2);
  qp.g = Vec::Zero(2);
  qp.A_in = Mat(2, 2);
  qp.A_in << 1.0, 0.0, -1.0, 0.0;
  qp.b_in = Vec(2);
  qp.b_in << -1.0, -1.0;  // z0 <= -1 and z0 >= 1
  EXPECT_THROW(solve_qp(qp), SolverError);
}

TEST(Lp, KnownOptimum)
{
  // max 3x + 2y s.t. x + y <= 4, x + 3y <= 6, x <= 3.
  Vec c(2);
  c << 3.0, 2.0;
  Mat A(3, 2);
  A << 1, 1, 1, 3, 1, 0;
  Vec b(3);
  b << 4, 6, 3;
  const LpResult r = lp_maximize(c, A, b, Mat(0, 2), Vec(0));
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.value, 11.0, 1e-10);
  EXPECT_NEAR(r.x(0), 3.0, 1e-10);
  EXPECT_NEAR(r.x(1), 1.0, 1e-10);
}

TEST(Lp, EqualityAndStatuses)
{
  Vec c(2);
  c << 1.0, -1.0;
  Mat Aeq(1, 2);
  Aeq << 1.0, 1.0;
  const LpResult r = lp_maximize(c, Mat(0, 2), Vec(0), Aeq, Vec::Ones(1));
  ASSERT_EQ(r.status, LpResult::Status::Optimal);
  EXPECT_NEAR(r.value, 1.0, 1e-12);

  const LpResult unb = lp_maximize(Vec::Ones(2), Mat(0, 2), Vec(0), Mat(0, 2), Vec(0));
  EXPECT_EQ(unb.status, LpResult::Status::Unbounded);

  Mat A(1, 2);
  A << 1.0, 1.0;
  const LpResult inf = lp_maximize(Vec::Ones(2), A, Vec::Constant(1, -1.0), Mat(0, 2), Vec(0));
  EXPECT_EQ(inf.status, LpResult::Status::Infeasible);
}

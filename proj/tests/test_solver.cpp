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

#include "acmpc/benchmarks.hpp"
#include "acmpc/lqr.hpp"
#include "acmpc/solver.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace acmpc;

namespace
{

MpcProblem problem_from(const BenchmarkSetup &s, const Vec &theta, const Vec &x,
                        const TailPolicy &tail)
{
  MpcProblem p;
  p.model = s.model.get();
  p.theta_hat = theta;
  p.x_hat = x;
  p.weights = s.controller.weights;
  p.constraints = s.controller.constraints;
  p.target = s.controller.target;
  p.tail = tail;
  return p;
}

Mat central_jacobian(const NlpProblem::Eval &fn, const Vec &z)
{
  Vec f0;
  fn(z, f0, nullptr);
  Mat J(f0.size(), z.size());
  for (int i = 0; i < z.size(); ++i)
  {
    const double h = 1e-6 * std::max(1.0, std::abs(z(i)));
    Vec zp = z, zm = z, fp, fm;
    zp(i) += h;
    zm(i) -= h;
    fn(zp, fp, nullptr);
    fn(zm, fm, nullptr);
    J.col(i) = (fp - fm) / (2.0 * h);
  }
  return J;
}

void expect_jacobian(const NlpProblem::Eval &fn, const Vec &z, const char *what)
{
  if (!fn)
    return;
  Vec val;
  Mat J;
  fn(z, val, &J);
  if (val.size() == 0)
    return;
  const Mat Jfd = central_jacobian(fn, z);
  const double scale = std::max(1.0, Jfd.cwiseAbs().maxCoeff());
  EXPECT_LT((J - Jfd).cwiseAbs().maxCoeff() / scale, 1e-4) << what;
}

} // namespace

TEST(Dare, ScalarClosedForm)
{
  const double a = 1.2, b = 0.5, q = 2.0, r = 0.3;
  // b^2 p^2 + (r (1 - a^2) - q b^2) p - q r = 0.
  const double B1 = r * (1.0 - a * a) - q * b * b;
  const double p = (-B1 + std::sqrt(B1 * B1 + 4.0 * b * b * q * r)) / (2.0 * b * b);
  const LqrResult res = solve_dare(Mat::Constant(1, 1, a), Mat::Constant(1, 1, b),
                                   Mat::Constant(1, 1, q), Mat::Constant(1, 1, r));
  EXPECT_NEAR(res.P(0, 0), p, 1e-8);
  EXPECT_NEAR(res.K(0, 0), -a * b * p / (r + b * b * p), 1e-8);
  EXPECT_LT(res.spectral_radius, 1.0);
}

TEST(Dare, MatrixResidual)
{
  Mat A(2, 2), B(2, 1), Q(2, 2), R(1, 1);
  A << 1, 1, 0, 1;
  B << 0, 1;
  Q << 1, 0, 0, 0;
  R << 0.3;
  const LqrResult res = solve_dare(A, B, Q, R);
  const Mat &X = res.P;
  const Mat Y = A.transpose() * X * A - X -
                A.transpose() * X * B * (B.transpose() * X * B + R).inverse() * B.transpose() * X * A + Q;
  EXPECT_LT(Y.cwiseAbs().maxCoeff(), 1e-8);
  EXPECT_LT((X - X.transpose()).norm(), 1e-12);
}

TEST(Dare, UnstabilizableThrows)
{
  Mat A = Mat::Identity(2, 2) * 1.5;
  Mat B(2, 1);
  B << 1, 0;
  EXPECT_THROW(solve_dare(A, B, Mat::Identity(2, 2), Mat::Identity(1, 1)), SolverError);
}

TEST(Solver, SqpMatchesQpPathOnChain)
{
  const BenchmarkSetup s = build_msd_chain({});
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> ud(-0.5, 0.5);
  for (int trial = 0; trial < 3; ++trial)
  {
    Vec x(s.model->n_x);
    for (int i = 0; i < x.size(); ++i)
      x(i) = ud(rng);
    const MpcProblem p = problem_from(s, s.theta_hat0, x, TailPolicy::constant_input());
    const MpcSolution qp = solve(p);
    ASSERT_TRUE(qp.stats.qp_path);
    SolverOptions o;
    o.force_sqp = true;
    o.sqp.kkt_tol = 1e-12;
    o.sqp.max_iter = 200;
    const MpcSolution sq = solve(p, o);
    EXPECT_FALSE(sq.stats.qp_path);
    EXPECT_LT((qp.u_star - sq.u_star).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_LT((qp.setpoint.x - sq.setpoint.x).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_NEAR(qp.J_star, sq.J_star, 1e-8 * std::max(1.0, qp.J_star));
  }
}

TEST(Solver, AtTheTargetSteadyStateTheCostVanishes)
{
  const BenchmarkSetup s = build_msd_chain({});
  const ControllerConfig &c = s.controller;
  const Setpoint sp = optimal_setpoint(*s.model, s.theta_true, c.target, c.constraints);
  const MpcProblem p = problem_from(s, s.theta_true, sp.x, TailPolicy::constant_input());
  const MpcSolution sol = solve(p);
  EXPECT_LT(sol.J_star, 1e-8);
  EXPECT_LT((sol.u_star.colwise() - sp.u).cwiseAbs().maxCoeff(), 1e-5);
  EXPECT_LT((sol.setpoint.y - c.target.y_d).norm(), 1e-6);
}

TEST(Solver, SolutionRespectsInputBounds)
{
  const BenchmarkSetup s = build_msd_chain({});
  Vec x = Vec::Constant(s.model->n_x, 3.0);
  const MpcSolution sol = solve(problem_from(s, s.theta_true, x, TailPolicy::constant_input()));
  const ConstraintSpec &c = s.controller.constraints;
  EXPECT_LE(sol.u_star.maxCoeff(), c.u_hi(0) + 1e-12);
  EXPECT_GE(sol.u_star.minCoeff(), c.u_lo(0) - 1e-12);
  EXPECT_GE(sol.slacks.minCoeff(), 0.0);
  EXPECT_EQ(sol.slacks.cols(), s.controller.weights.N + s.controller.weights.M);
}

TEST(Solver, NlpJacobiansMatchFiniteDifferences)
{
  const BenchmarkSetup q = build_quadrotor({});
  const ControllerConfig &c = q.controller;
  const Setpoint sp = optimal_setpoint(*q.model, q.theta_true, c.target, c.constraints);
  const TailPolicy tail = make_lqr_feedback(*q.model, q.theta_true, sp.x, sp.u, c.weights.Q,
                                            c.weights.R, c.constraints.u_lo, c.constraints.u_hi);
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> ud(-0.3, 0.3);
  Vec x0 = sp.x;
  for (int i = 0; i < 6; ++i)
    x0(i) += ud(rng);
  const MpcProblem p = problem_from(q, q.theta_true, x0, tail);
  const Vec z0 = mpc_initial_guess(p);
  const NlpProblem nlp = mpc_nlp(p, z0, 0.0);
  for (int s = 0; s < 20; ++s)
  {
    Vec z = z0;
    for (int i = 0; i < z.size(); ++i)
      z(i) += 0.05 * ud(rng);
    expect_jacobian(nlp.residual, z, "residual");
    expect_jacobian(nlp.eq, z, "equality");
    expect_jacobian(nlp.ineq, z, "inequality");
  }
}

TEST(Solver, ValidationRejectsBadProblems)
{
  const BenchmarkSetup s = build_msd_chain({});
  MpcProblem p = problem_from(s, s.theta_true, Vec::Zero(3), TailPolicy::constant_input());
  EXPECT_THROW(solve(p), ConfigError);
  p.x_hat = Vec::Zero(s.model->n_x);
  p.model = nullptr;
  EXPECT_THROW(solve(p), ConfigError);
}

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

#include "acmpc/cost.hpp"

#include "acmpc/qp.hpp"

namespace acmpc
{

void CostWeights::validate(int n_x, int n_u) const
{
  require(Q.rows() == n_x && Q.cols() == n_x, "weights: Q has wrong shape");
  require(R.rows() == n_u && R.cols() == n_u, "weights: R has wrong shape");
  require(omega > 0.0, "weights: omega must be positive");
  require(N >= 1, "weights: N must be at least 1");
  require(M >= 0, "weights: M must be nonnegative");
  Eigen::SelfAdjointEigenSolver<Mat> eq(Q, Eigen::EigenvaluesOnly);
  Eigen::SelfAdjointEigenSolver<Mat> er(R, Eigen::EigenvaluesOnly);
  require(eq.eigenvalues().minCoeff() > 0.0, "weights: Q must be positive definite");
  require(er.eigenvalues().minCoeff() > 0.0, "weights: R must be positive definite");
}

TailPolicy TailPolicy::feedback(Mat K, Vec u_lo, Vec u_hi)
{
  TailPolicy t;
  t.kind = Kind::Feedback;
  t.K = std::move(K);
  t.u_lo = std::move(u_lo);
  t.u_hi = std::move(u_hi);
  return t;
}

Vec TailPolicy::apply(const Vec &x, const Vec &x_s, const Vec &u_s, Vec *active) const
{
  if (kind == Kind::ConstantInput)
  {
    if (active)
      *active = Vec::Zero(u_s.size());
    return u_s;
  }
  Vec u = u_s + K * (x - x_s);
  if (active)
    *active = Vec::Ones(u.size());
  for (int i = 0; i < u.size(); ++i)
  {
    if (u(i) < u_lo(i) || u(i) > u_hi(i))
    {
      u(i) = std::min(std::max(u(i), u_lo(i)), u_hi(i));
      if (active)
        (*active)(i) = 0.0;
    }
  }
  return u;
}

double slack_penalty(const Vec &x, const ConstraintSpec &constraints)
{
  if (constraints.rows() == 0)
    return 0.0;
  const Vec viol = (constraints.D * x - constraints.d).cwiseMax(0.0);
  return constraints.q_xi.dot(viol.cwiseAbs2());
}

double stage_cost(const Vec &x, const Vec &u, const Vec &x_s, const Vec &u_s,
                  const CostWeights &weights, const ConstraintSpec &constraints)
{
  const Vec dx = x - x_s;
  const Vec du = u - u_s;
  return dx.dot(weights.Q * dx) + du.dot(weights.R * du) + slack_penalty(x, constraints);
}

double terminal_cost(const Vec &x_N, const Vec &x_s, const Vec &u_s, const Vec &theta,
                     const CostWeights &weights, const TailPolicy &tail,
                     const ParametricModel &model, const ConstraintSpec &constraints)
{
  double sum = 0.0;
  Vec x = x_N;
  for (int k = 0; k < weights.M; ++k)
  {
    const Vec u = tail.apply(x, x_s, u_s);
    sum += stage_cost(x, u, x_s, u_s, weights, constraints);
    x = model.eval_f(x, u, theta);
  }
  return sum;
}

double open_loop_cost(const Vec &x0, const Vec &theta, const Mat &inputs, const Vec &x_s,
                      const Vec &u_s, const CostWeights &weights, const TailPolicy &tail,
                      const ParametricModel &model, const ConstraintSpec &constraints)
{
  const Mat xs = rollout(model, x0, theta, inputs);
  double sum = 0.0;
  for (int k = 0; k < inputs.cols(); ++k)
    sum += stage_cost(xs.col(k), inputs.col(k), x_s, u_s, weights, constraints);
  const Vec x_N = xs.col(inputs.cols());
  return sum + weights.omega * terminal_cost(x_N, x_s, u_s, theta, weights, tail, model,
                                             constraints);
}

double offset_cost(const Vec &y_s, const TrackingTarget &target)
{
  const Vec e = y_s - target.y_d;
  return e.dot(target.T * e);
}

double constraint_distance_sq(const Vec &x, const ConstraintSpec &constraints)
{
  if (constraints.rows() == 0)
    return 0.0;
  const Vec r = constraints.D * x - constraints.d;
  if (r.maxCoeff() <= 0.0)
    return 0.0;
  if (constraints.rows() == 1)
  {
    const double nn = constraints.D.row(0).squaredNorm();
    return r(0) * r(0) / nn;
  }
  // min ||s - x||^2 s.t. D s <= d.
  const int n = static_cast<int>(x.size());
  QpProblem qp;
  qp.H = Mat::Identity(n, n);
  qp.g = -x;
  qp.A_in = constraints.D;
  qp.b_in = constraints.d;
  const QpResult res = solve_qp(qp);
  return (res.z - x).squaredNorm();
}

} // namespace acmpc

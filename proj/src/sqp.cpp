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

#include "acmpc/sqp.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>

namespace acmpc
{

namespace
{

struct Point
{
  Vec z;
  Vec r;
  Mat Jr;
  Vec ce;
  Mat Ae;
  Vec ci;
  Mat Ai;
  double f = 0.0;
  double infeas = 0.0;
};

void evaluate(const NlpProblem &nlp, const Vec &z, Point &pt, bool jac)
{
  pt.z = z;
  nlp.residual(z, pt.r, jac ? &pt.Jr : nullptr);
  pt.f = pt.r.squaredNorm();
  if (nlp.reg > 0.0 && nlp.z_ref.size() == z.size())
    pt.f += nlp.reg * (z - nlp.z_ref).squaredNorm();
  pt.infeas = 0.0;
  if (nlp.eq)
  {
    nlp.eq(z, pt.ce, jac ? &pt.Ae : nullptr);
    pt.infeas += pt.ce.cwiseAbs().sum();
  }
  else
  {
    pt.ce.resize(0);
    pt.Ae.resize(0, z.size());
  }
  if (nlp.ineq)
  {
    nlp.ineq(z, pt.ci, jac ? &pt.Ai : nullptr);
    pt.infeas += pt.ci.cwiseMax(0.0).sum();
  }
  else
  {
    pt.ci.resize(0);
    pt.Ai.resize(0, z.size());
  }
}

Vec clamp(const NlpProblem &nlp, const Vec &z)
{
  Vec out = z;
  if (nlp.lb.size() == z.size())
    out = out.cwiseMax(nlp.lb);
  if (nlp.ub.size() == z.size())
    out = out.cwiseMin(nlp.ub);
  return out;
}

double inf_norm(const Vec &v) { return v.size() > 0 ? v.cwiseAbs().maxCoeff() : 0.0; }

} // namespace

Mat fd_jacobian(const NlpProblem::Eval &fn, const Vec &z, double rel_step)
{
  Vec f0;
  fn(z, f0, nullptr);
  Mat jac(f0.size(), z.size());
  const double h = rel_step * (1.0 + z.norm());
  Vec zp = z, fp, fm;
  for (int j = 0; j < z.size(); ++j)
  {
    zp(j) = z(j) + h;
    fn(zp, fp, nullptr);
    zp(j) = z(j) - h;
    fn(zp, fm, nullptr);
    zp(j) = z(j);
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

SqpResult sqp_solve(const NlpProblem &nlp, const Vec &z0, const SqpOptions &opts)
{
  require(z0.size() == nlp.n, "sqp_solve: initial point dimension mismatch");
  require(static_cast<bool>(nlp.residual), "sqp_solve: residual evaluator missing");
  const int n = nlp.n;
  const bool has_reg = nlp.reg > 0.0 && nlp.z_ref.size() == n;

  Point cur, trial;
  evaluate(nlp, clamp(nlp, z0), cur, true);

  SqpResult out;
  double lambda = opts.lambda0;
  double nu = 0.0;
  QpResult last;
  bool have_step = false;

  for (int it = 0; it < opts.max_iter; ++it)
  {
    out.iterations = it + 1;
    Vec grad = 2.0 * cur.Jr.transpose() * cur.r;
    if (has_reg)
      grad += 2.0 * nlp.reg * (cur.z - nlp.z_ref);

    QpProblem qp;
    qp.H = 2.0 * cur.Jr.transpose() * cur.Jr;
    qp.H.diagonal().array() += 2.0 * (lambda + (has_reg ? nlp.reg : 0.0));
    qp.g = grad;
    qp.A_eq = cur.Ae;
    qp.b_eq = -cur.ce;
    qp.A_in = cur.Ai;
    qp.b_in = -cur.ci;
    if (nlp.lb.size() == n)
      qp.lb = nlp.lb - cur.z;
    if (nlp.ub.size() == n)
      qp.ub = nlp.ub - cur.z;

    try
    {
      last = solve_qp(qp);
    }
    catch (const SolverError &)
    {
      break;
    }
    have_step = true;
    const Vec &dz = last.z;

    Vec stat = grad;
    if (cur.Ae.rows() > 0)
      stat += cur.Ae.transpose() * last.y_eq;
    if (cur.Ai.rows() > 0)
      stat += cur.Ai.transpose() * last.y_in;
    stat -= last.y_lb;
    stat += last.y_ub;
    out.kkt_residual = inf_norm(stat);

    const double znorm = 1.0 + inf_norm(cur.z);
    const bool feasible = cur.infeas <= 1e-9 * znorm;
    if (opts.trace)
    {
      *opts.trace << "sqp " << std::setw(3) << it << " f " << std::setprecision(10) << cur.f
                  << " infeas " << cur.infeas << " kkt " << out.kkt_residual << " step "
                  << inf_norm(dz) << " lambda " << lambda << '\n';
    }
    if (feasible && (inf_norm(dz) <= opts.step_tol * znorm ||
                     out.kkt_residual <= opts.kkt_tol * (1.0 + std::abs(cur.f))))
    {
      out.converged = true;
      break;
    }

    const double y_max = std::max(inf_norm(last.y_eq), inf_norm(last.y_in));
    nu = std::max(nu, 1.1 * y_max + 1e-8);
    const double phi0 = cur.f + nu * cur.infeas;
    const double slope = grad.dot(dz) - nu * cur.infeas;

    double t = 1.0;
    bool accepted = false;
    for (int bt = 0; bt <= opts.max_backtracks; ++bt)
    {
      evaluate(nlp, clamp(nlp, cur.z + t * dz), trial, false);
      const double phi = trial.f + nu * trial.infeas;
      if (std::isfinite(phi) && phi <= phi0 + 1e-4 * t * std::min(slope, 0.0))
      {
        accepted = true;
        break;
      }
      t *= 0.5;
    }

    if (accepted)
    {
      evaluate(nlp, trial.z, cur, true);
      lambda = std::max(1e-12, lambda / 10.0);
    }
    else
    {
      lambda *= 10.0;
      if (lambda > opts.lambda_max)
      {
        out.line_search_failed = true;
        break;
      }
    }
  }

  out.z = cur.z;
  out.cost = cur.f;
  out.infeasibility = cur.infeas;
  if (have_step)
  {
    out.y_eq = last.y_eq;
    out.y_in = last.y_in;
  }
  return out;
}

} // namespace acmpc

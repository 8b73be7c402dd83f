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

#include "acmpc/lms.hpp"

#include "acmpc/lp.hpp"
#include "acmpc/qp.hpp"

#include <cmath>
#include <iostream>
#include <limits>
#include <random>

namespace acmpc
{

namespace
{

bool is_diagonal(const Mat &M)
{
  Mat off = M;
  off.diagonal().setZero();
  return off.cwiseAbs().maxCoeff() == 0.0;
}

} // namespace

double v_theta(const Mat &gamma, const Vec &a)
{
  if (is_diagonal(gamma))
    return (a.array().square() / gamma.diagonal().array()).sum();
  return a.dot(gamma.llt().solve(a));
}

Vec project_weighted(const Vec &theta_tilde, const Mat &gamma, const ParameterSet &set)
{
  require(theta_tilde.size() == set.dim(), "project_weighted: dimension mismatch");
  require(gamma.rows() == set.dim() && gamma.cols() == set.dim(),
          "project_weighted: gamma has wrong shape");
  if (set.kind == ParameterSet::Kind::Box && is_diagonal(gamma))
    return theta_tilde.cwiseMax(set.lo).cwiseMin(set.hi);
  if (set.contains(theta_tilde, 0.0))
    return theta_tilde;

  const Mat Ginv = gamma.llt().solve(Mat::Identity(set.dim(), set.dim()));
  QpProblem qp;
  qp.H = 0.5 * (Ginv + Ginv.transpose());
  qp.g = -qp.H * theta_tilde;
  if (set.kind == ParameterSet::Kind::Box)
  {
    qp.lb = set.lo;
    qp.ub = set.hi;
  }
  else
  {
    qp.A_in = set.H;
    qp.b_in = set.b;
  }
  const QpResult res = solve_qp(qp);
  if (!res.converged)
    throw SolverError("project_weighted: projection QP did not converge");
  Vec out = res.z;
  if (set.kind == ParameterSet::Kind::Box)
    out = out.cwiseMax(set.lo).cwiseMin(set.hi);
  return out;
}

LmsState lms_update(const LmsState &state, const ParametricModel &model, const Vec &x_hat_k,
                    const Vec &u_k, const Vec &x_hat_next)
{
  require(state.theta_hat.size() == model.n_theta, "lms_update: theta_hat has wrong size");
  const Mat phi = model.eval_G(x_hat_k, u_k);
  const Vec innovation = x_hat_next - model.eval_f(x_hat_k, u_k, state.theta_hat);
  const Vec theta_tilde = state.theta_hat + state.gamma * (phi.transpose() * innovation);
  LmsState next = state;
  next.theta_hat = project_weighted(theta_tilde, state.gamma, state.theta_set);
  return next;
}

double gain_condition(const ParametricModel &model, const Mat &gamma, const Vec &x, const Vec &u)
{
  const Mat phi = model.eval_G(x, u);
  const Mat M = phi * gamma * phi.transpose();
  Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (M + M.transpose()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().maxCoeff();
}

GainDesign design_gain(const ParametricModel &model, const Vec &state_lo, const Vec &state_hi,
                       const ConstraintSpec &constraints, const Vec &noise_lo,
                       const Vec &noise_hi, int samples, unsigned seed)
{
  const int nx = model.n_x, nu = model.n_u;
  require(state_lo.size() == nx && state_hi.size() == nx, "design_gain: state box size mismatch");
  require(noise_lo.size() == nx && noise_hi.size() == nx, "design_gain: noise box size mismatch");
  require(state_lo.allFinite() && state_hi.allFinite() && noise_lo.allFinite() &&
              noise_hi.allFinite(),
          "design_gain: boxes must be bounded");
  require((state_lo.array() <= state_hi.array()).all() &&
              (noise_lo.array() <= noise_hi.array()).all(),
          "design_gain: empty box");

  // The measured state x + v ranges over the Minkowski sum of both boxes.
  const Vec lo = state_lo + noise_lo, hi = state_hi + noise_hi;
  const int dims = nx + nu;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  double sup = 0.0;
  auto probe = [&](const Vec &x, const Vec &u) {
    const Mat phi = model.eval_G(x, u);
    const Mat gram = phi.rows() <= phi.cols() ? Mat(phi * phi.transpose())
                                              : Mat(phi.transpose() * phi);
    if (gram.size() == 0)
      return;
    Eigen::SelfAdjointEigenSolver<Mat> es(gram, Eigen::EigenvaluesOnly);
    sup = std::max(sup, es.eigenvalues().maxCoeff());
  };
  auto corner = [&](std::uint64_t bits, Vec &x, Vec &u) {
    for (int i = 0; i < nx; ++i)
      x(i) = (bits >> i) & 1U ? hi(i) : lo(i);
    for (int i = 0; i < nu; ++i)
      u(i) = (bits >> (nx + i)) & 1U ? constraints.u_hi(i) : constraints.u_lo(i);
  };

  Vec x(nx), u(nu);
  if (dims <= 12)
  {
    for (std::uint64_t b = 0; b < (std::uint64_t{1} << dims); ++b)
    {
      corner(b, x, u);
      probe(x, u);
    }
  }
  else
  {
    for (int s = 0; s < samples; ++s)
    {
      for (int i = 0; i < nx; ++i)
        x(i) = unif(rng) < 0.5 ? lo(i) : hi(i);
      for (int i = 0; i < nu; ++i)
        u(i) = unif(rng) < 0.5 ? constraints.u_lo(i) : constraints.u_hi(i);
      probe(x, u);
    }
  }
  for (int s = 0; s < samples; ++s)
  {
    for (int i = 0; i < nx; ++i)
      x(i) = lo(i) + unif(rng) * (hi(i) - lo(i));
    for (int i = 0; i < nu; ++i)
      u(i) = constraints.u_lo(i) + unif(rng) * (constraints.u_hi(i) - constraints.u_lo(i));
    probe(x, u);
  }

  GainDesign out;
  out.sup_phi_sq = sup;
  if (sup <= 0.0)
  {
    std::cerr << "design_gain: regressor vanishes on all samples, using identity gain\n";
    out.degenerate = true;
    out.mu = 1.0;
    out.gamma = Mat::Identity(model.n_theta, model.n_theta);
    return out;
  }
  out.mu = 1.0 / (1.2 * sup);
  out.gamma = out.mu * Mat::Identity(model.n_theta, model.n_theta);
  return out;
}

double c_theta(const Mat &gamma, const ParameterSet &set)
{
  const int p = set.dim();
  Vec width(p);
  if (set.kind == ParameterSet::Kind::Box)
  {
    width = set.hi - set.lo;
  }
  else
  {
    Mat A(set.H.rows(), 2 * p);
    A << set.H, -set.H;
    for (int j = 0; j < p; ++j)
    {
      Vec c = Vec::Zero(2 * p);
      c(j) = 1.0;
      c(p + j) = -1.0;
      const double up = lp_maximize(c, A, set.b, Mat(0, 2 * p), Vec(0)).value;
      const double down = -lp_maximize(-c, A, set.b, Mat(0, 2 * p), Vec(0)).value;
      width(j) = up - down;
    }
  }
  if (is_diagonal(gamma) && set.kind == ParameterSet::Kind::Box)
    return std::sqrt((width.array().square() / gamma.diagonal().array()).sum());
  Eigen::SelfAdjointEigenSolver<Mat> es(gamma, Eigen::EigenvaluesOnly);
  return width.norm() / std::sqrt(es.eigenvalues().minCoeff());
}

LmsDiagnostics lms_diagnostics(const LmsState &state, const ParametricModel &model,
                               const Vec &theta_true, const Vec &theta_true_next,
                               const Vec &x_true, const Vec &u, const Vec &w, const Vec &v,
                               const Vec &v_next)
{
  const Vec x_hat = x_true + v;
  const Vec x_hat_next = model.eval_f(x_true, u, theta_true, w) + v_next;
  const LmsState next = lms_update(state, model, x_hat, u, x_hat_next);

  LmsDiagnostics dg;
  dg.theta_hat_next = next.theta_hat;
  const Mat phi = model.eval_G(x_hat, u);
  dg.x_tilde = phi * (theta_true - state.theta_hat);
  dg.w_tilde = x_hat_next - model.eval_f(x_hat, u, theta_true);
  dg.v_theta_err = v_theta(state.gamma, state.theta_hat - theta_true);
  dg.v_theta_err_next = v_theta(state.gamma, next.theta_hat - theta_true_next);
  dg.v_theta_step = v_theta(state.gamma, next.theta_hat - state.theta_hat);
  dg.v_theta_drift = v_theta(state.gamma, theta_true_next - theta_true);
  dg.c_theta = c_theta(state.gamma, state.theta_set);

  const double xt2 = dg.x_tilde.squaredNorm();
  const double wt2 = dg.w_tilde.squaredNorm();

  const double lhs_a = dg.v_theta_err_next - dg.v_theta_err;
  const double rhs_a = -xt2 + wt2 + dg.c_theta * std::sqrt(dg.v_theta_drift);
  dg.lyap_slack = rhs_a - lhs_a;
  const double scale_a = std::max({dg.v_theta_err, dg.v_theta_err_next, xt2, wt2});
  dg.lyap_ok = dg.lyap_slack >= -(1e-9 + 1e-9 * scale_a);

  const double rhs_b = (dg.x_tilde + dg.w_tilde).squaredNorm();
  dg.step_slack = rhs_b - dg.v_theta_step;
  dg.step_ok = dg.step_slack >= -(1e-9 + 1e-9 * std::max(rhs_b, dg.v_theta_step));

  if (model.L_f)
  {
    const double rhs_c = *model.L_f * (w.norm() + v.norm()) + v_next.norm();
    dg.noise_slack = rhs_c - dg.w_tilde.norm();
    dg.noise_ok = dg.noise_slack >= -(1e-9 + 1e-9 * rhs_c);
  }
  else
  {
    dg.noise_slack = std::numeric_limits<double>::quiet_NaN();
    dg.noise_ok = true;
  }
  return dg;
}

} // namespace acmpc

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

#include "acmpc/solver.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <memory>

namespace acmpc
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

Mat upper_factor(const Mat &W)
{
  Eigen::LLT<Mat> llt(W);
  if (llt.info() != Eigen::Success)
    throw ConfigError("weight matrix is not positive definite");
  return llt.matrixU();
}

// Index map and forward simulation of the condensed transcription.
class Transcription
{
public:
  explicit Transcription(const MpcProblem &p)
      : p_(p), m_(*p.model), nx_(m_.n_x), nu_(m_.n_u), ny_(m_.n_y), N_(p.weights.N),
        M_(p.weights.M), r_(p.constraints.rows())
  {
    i_xs_ = N_ * nu_;
    i_us_ = i_xs_ + nx_;
    i_ys_ = i_us_ + nu_;
    i_xi_ = i_ys_ + ny_;
    nz_ = i_xi_ + r_ * (N_ + M_);
    Lq_ = upper_factor(p.weights.Q);
    Lr_ = upper_factor(p.weights.R);
    Lt_ = upper_factor(p.target.T);
    sq_ = p.constraints.q_xi.cwiseSqrt();
    sw_ = std::sqrt(p.weights.omega);
    w0_ = Vec::Zero(m_.n_w);
  }

  int nz() const { return nz_; }
  int i_xs() const { return i_xs_; }
  int i_us() const { return i_us_; }
  int i_ys() const { return i_ys_; }
  int i_xi() const { return i_xi_; }
  int steps() const { return N_ + M_; }

  Vec u_k(const Vec &z, int k) const { return z.segment(k * nu_, nu_); }
  Vec xs(const Vec &z) const { return z.segment(i_xs_, nx_); }
  Vec us(const Vec &z) const { return z.segment(i_us_, nu_); }
  Vec ys(const Vec &z) const { return z.segment(i_ys_, ny_); }
  Vec xi(const Vec &z, int k) const { return z.segment(i_xi_ + k * r_, r_); }

  // States x_0..x_{N+M} and, when requested, their sensitivities dx_k/dz.
  void simulate(const Vec &z, bool sens)
  {
    if (have_ && z.size() == z_.size() && z == z_ && (have_sens_ || !sens))
      return;
    const int K = N_ + M_;
    X_.resize(K + 1);
    U_.resize(K);
    if (sens)
    {
      S_.resize(K + 1);
      dU_.resize(K);
    }
    const Vec x_s = xs(z), u_s = us(z);
    X_[0] = p_.x_hat;
    if (sens)
      S_[0] = Mat::Zero(nx_, nz_);
    Mat fx, fu;
    for (int k = 0; k < K; ++k)
    {
      Vec act;
      if (k < N_)
      {
        U_[k] = u_k(z, k);
      }
      else
      {
        U_[k] = p_.tail.apply(X_[k], x_s, u_s, &act);
      }
      X_[k + 1] = m_.f(X_[k], U_[k], p_.theta_hat, w0_);
      if (!sens)
        continue;
      Mat &dU = dU_[k];
      dU = Mat::Zero(nu_, nz_);
      if (k < N_)
      {
        dU.middleCols(k * nu_, nu_).setIdentity();
      }
      else if (p_.tail.kind == TailPolicy::Kind::ConstantInput)
      {
        dU.middleCols(i_us_, nu_).setIdentity();
      }
      else
      {
        Mat dk = p_.tail.K * S_[k];
        dk.middleCols(i_xs_, nx_) -= p_.tail.K;
        dk.middleCols(i_us_, nu_) += Mat::Identity(nu_, nu_);
        dU = act.asDiagonal() * dk;
      }
      m_.jacobian_f(X_[k], U_[k], p_.theta_hat, fx, fu);
      S_[k + 1] = fx * S_[k] + fu * dU;
    }
    z_ = z;
    have_ = true;
    have_sens_ = sens;
  }

  int residual_size() const
  {
    const int tail_u = p_.tail.kind == TailPolicy::Kind::Feedback ? nu_ : 0;
    return N_ * (nx_ + nu_ + r_) + M_ * (nx_ + tail_u + r_) + ny_;
  }

  void residual(const Vec &z, Vec &res, Mat *J)
  {
    simulate(z, J != nullptr);
    const bool fb = p_.tail.kind == TailPolicy::Kind::Feedback;
    const Vec x_s = xs(z), u_s = us(z);
    res.resize(residual_size());
    if (J)
      J->setZero(residual_size(), nz_);
    int row = 0;
    for (int k = 0; k < N_ + M_; ++k)
    {
      const bool tail = k >= N_;
      const double s = tail ? sw_ : 1.0;
      res.segment(row, nx_) = s * Lq_ * (X_[k] - x_s);
      if (J)
      {
        Mat dx = S_[k];
        dx.middleCols(i_xs_, nx_) -= Mat::Identity(nx_, nx_);
        J->middleRows(row, nx_) = s * Lq_ * dx;
      }
      row += nx_;
      if (!tail || fb)
      {
        res.segment(row, nu_) = s * Lr_ * (U_[k] - u_s);
        if (J)
        {
          Mat du = dU_[k];
          du.middleCols(i_us_, nu_) -= Mat::Identity(nu_, nu_);
          J->middleRows(row, nu_) = s * Lr_ * du;
        }
        row += nu_;
      }
      if (r_ > 0)
      {
        res.segment(row, r_) = s * sq_.cwiseProduct(xi(z, k));
        if (J)
          J->block(row, i_xi_ + k * r_, r_, r_) = (s * sq_).asDiagonal();
        row += r_;
      }
    }
    res.segment(row, ny_) = Lt_ * (ys(z) - p_.target.y_d);
    if (J)
      J->block(row, i_ys_, ny_, ny_) = Lt_;
  }

  void equality(const Vec &z, Vec &c, Mat *J) const
  {
    const Vec x_s = xs(z), u_s = us(z);
    c.resize(nx_ + ny_);
    c << m_.f(x_s, u_s, p_.theta_hat, w0_) - x_s, m_.h(x_s, u_s, p_.theta_hat) - ys(z);
    if (J)
    {
      Mat fx, fu, hx, hu;
      m_.jacobian_f(x_s, u_s, p_.theta_hat, fx, fu);
      m_.jacobian_h(x_s, u_s, p_.theta_hat, hx, hu);
      J->setZero(nx_ + ny_, nz_);
      J->block(0, i_xs_, nx_, nx_) = fx - Mat::Identity(nx_, nx_);
      J->block(0, i_us_, nx_, nu_) = fu;
      J->block(nx_, i_xs_, ny_, nx_) = hx;
      J->block(nx_, i_us_, ny_, nu_) = hu;
      J->block(nx_, i_ys_, ny_, ny_) = -Mat::Identity(ny_, ny_);
    }
  }

  // Hard D x_s <= d, then soft D x_k - d - xi_k <= 0 for every predicted step.
  void inequality(const Vec &z, Vec &c, Mat *J)
  {
    const int K = N_ + M_;
    const Mat &D = p_.constraints.D;
    const Vec &d = p_.constraints.d;
    simulate(z, J != nullptr);
    c.resize(r_ * (K + 1));
    if (J)
      J->setZero(r_ * (K + 1), nz_);
    c.head(r_) = D * xs(z) - d;
    if (J)
      J->block(0, i_xs_, r_, nx_) = D;
    for (int k = 0; k < K; ++k)
    {
      const int row = r_ * (k + 1);
      c.segment(row, r_) = D * X_[k] - d - xi(z, k);
      if (J)
      {
        J->middleRows(row, r_) = D * S_[k];
        J->block(row, i_xi_ + k * r_, r_, r_) -= Mat::Identity(r_, r_);
      }
    }
  }

  void bounds(Vec &lb, Vec &ub) const
  {
    lb = Vec::Constant(nz_, -kInf);
    ub = Vec::Constant(nz_, kInf);
    for (int k = 0; k < N_; ++k)
    {
      lb.segment(k * nu_, nu_) = p_.constraints.u_lo;
      ub.segment(k * nu_, nu_) = p_.constraints.u_hi;
    }
    lb.segment(i_us_, nu_) = p_.constraints.us_lo();
    ub.segment(i_us_, nu_) = p_.constraints.us_hi();
    lb.tail(nz_ - i_xi_).setZero();
  }

  // Slacks at their optimal value for the current inputs and setpoint.
  void fill_slacks(Vec &z)
  {
    if (r_ == 0)
      return;
    simulate(z, false);
    const Vec d = p_.constraints.d;
    for (int k = 0; k < N_ + M_; ++k)
      z.segment(i_xi_ + k * r_, r_) = (p_.constraints.D * X_[k] - d).cwiseMax(0.0);
    have_ = false;
  }

private:
  const MpcProblem &p_;
  const ParametricModel &m_;
  int nx_, nu_, ny_, N_, M_, r_;
  int i_xs_ = 0, i_us_ = 0, i_ys_ = 0, i_xi_ = 0, nz_ = 0;
  Mat Lq_, Lr_, Lt_;
  Vec sq_;
  double sw_ = 1.0;
  Vec w0_;

  Vec z_;
  bool have_ = false;
  bool have_sens_ = false;
  std::vector<Vec> X_, U_;
  std::vector<Mat> S_, dU_;
};

NlpProblem build_nlp(const std::shared_ptr<Transcription> &tr, const Vec &z_ref, double reg)
{
  NlpProblem nlp;
  nlp.n = tr->nz();
  nlp.residual = [tr](const Vec &z, Vec &r, Mat *J) { tr->residual(z, r, J); };
  nlp.eq = [tr](const Vec &z, Vec &c, Mat *J) { tr->equality(z, c, J); };
  nlp.ineq = [tr](const Vec &z, Vec &c, Mat *J) { tr->inequality(z, c, J); };
  tr->bounds(nlp.lb, nlp.ub);
  nlp.z_ref = z_ref;
  nlp.reg = reg;
  return nlp;
}

Vec initial_guess(const MpcProblem &p, Transcription &tr)
{
  const ParametricModel &m = *p.model;
  const int nx = m.n_x, nu = m.n_u, N = p.weights.N;
  Vec z = Vec::Zero(tr.nz());
  const MpcSolution *ws = p.warm_start;
  if (ws && ws->u_star.cols() == N && ws->u_star.rows() == nu && ws->setpoint.x.size() == nx)
  {
    for (int k = 0; k + 1 < N; ++k)
      z.segment(k * nu, nu) = ws->u_star.col(k + 1);
    z.segment((N - 1) * nu, nu) = ws->setpoint.u;
    z.segment(tr.i_xs(), nx) = ws->setpoint.x;
    z.segment(tr.i_us(), nu) = ws->setpoint.u;
    z.segment(tr.i_ys(), m.n_y) = ws->setpoint.y;
  }
  else
  {
    Setpoint sp;
    try
    {
      sp = optimal_setpoint(m, p.theta_hat, p.target, p.constraints);
    }
    catch (const std::exception &)
    {
      sp.u = 0.5 * (p.constraints.us_lo() + p.constraints.us_hi());
      sp.x = p.x_hat;
      sp.y = m.eval_h(sp.x, sp.u, p.theta_hat);
    }
    for (int k = 0; k < N; ++k)
      z.segment(k * nu, nu) = sp.u;
    z.segment(tr.i_xs(), nx) = sp.x;
    z.segment(tr.i_us(), nu) = sp.u;
    z.segment(tr.i_ys(), m.n_y) = sp.y;
  }
  // Keep the guess inside the bounds.
  Vec lb, ub;
  tr.bounds(lb, ub);
  z = z.cwiseMax(lb).cwiseMin(ub);
  tr.fill_slacks(z);
  return z;
}

} // namespace

void MpcProblem::validate() const
{
  require(model != nullptr, "MpcProblem: model is missing");
  require(theta_hat.size() == model->n_theta, "MpcProblem: theta_hat has wrong size");
  require(x_hat.size() == model->n_x, "MpcProblem: x_hat has wrong size");
  weights.validate(model->n_x, model->n_u);
  constraints.validate(model->n_x, model->n_u);
  target.validate(model->n_y);
  if (tail.kind == TailPolicy::Kind::Feedback)
  {
    require(tail.K.rows() == model->n_u && tail.K.cols() == model->n_x,
            "MpcProblem: feedback gain has wrong shape");
    require(tail.u_lo.size() == model->n_u && tail.u_hi.size() == model->n_u,
            "MpcProblem: feedback clip bounds have wrong size");
  }
}

NlpProblem mpc_nlp(const MpcProblem &problem, const Vec &z_ref, double reg)
{
  problem.validate();
  auto tr = std::make_shared<Transcription>(problem);
  return build_nlp(tr, z_ref, reg);
}

Vec mpc_initial_guess(const MpcProblem &problem)
{
  problem.validate();
  Transcription tr(problem);
  return initial_guess(problem, tr);
}

MpcSolution solve(const MpcProblem &problem, const SolverOptions &opts)
{
  const auto t0 = std::chrono::steady_clock::now();
  problem.validate();
  const ParametricModel &m = *problem.model;
  auto tr = std::make_shared<Transcription>(problem);
  const Vec z0 = initial_guess(problem, *tr);
  const NlpProblem nlp = build_nlp(tr, z0, opts.reg);

  MpcSolution sol;
  const bool qp_path = !opts.force_sqp && m.linear &&
                       problem.tail.kind == TailPolicy::Kind::ConstantInput;
  Vec z;
  if (qp_path)
  {
    // Residuals and constraints are affine: one exact Gauss-Newton step.
    Vec r, ce, ci;
    Mat Jr, Ae, Ai;
    nlp.residual(z0, r, &Jr);
    nlp.eq(z0, ce, &Ae);
    nlp.ineq(z0, ci, &Ai);
    QpProblem qp;
    qp.H = 2.0 * Jr.transpose() * Jr;
    qp.H.diagonal().array() += 2.0 * opts.reg;
    qp.g = 2.0 * Jr.transpose() * r;
    qp.A_eq = Ae;
    qp.b_eq = -ce;
    qp.A_in = Ai;
    qp.b_in = -ci;
    qp.lb = nlp.lb - z0;
    qp.ub = nlp.ub - z0;
    const QpResult res = solve_qp(qp);
    if (!res.converged)
      throw SolverError("MPC QP did not converge");
    z = z0 + res.z;
    sol.stats.iterations = res.iterations;
    sol.stats.kkt_residual = res.kkt_residual;
    sol.stats.converged = true;
  }
  else
  {
    const SqpResult res = sqp_solve(nlp, z0, opts.sqp);
    z = res.z;
    sol.stats.iterations = res.iterations;
    sol.stats.kkt_residual = res.kkt_residual;
    sol.stats.converged = res.converged;
  }
  sol.stats.qp_path = qp_path;
  z = z.cwiseMax(nlp.lb).cwiseMin(nlp.ub);

  const int nu = m.n_u, N = problem.weights.N, r = problem.constraints.rows();
  sol.z = z;
  sol.u_star.resize(nu, N);
  for (int k = 0; k < N; ++k)
    sol.u_star.col(k) = z.segment(k * nu, nu);
  sol.setpoint.x = z.segment(tr->i_xs(), m.n_x);
  sol.setpoint.u = z.segment(tr->i_us(), nu);
  sol.setpoint.y = z.segment(tr->i_ys(), m.n_y);
  sol.slacks.resize(r, tr->steps());
  for (int k = 0; k < tr->steps(); ++k)
    sol.slacks.col(k) = z.segment(tr->i_xi() + k * r, r);
  sol.J_star = open_loop_cost(problem.x_hat, problem.theta_hat, sol.u_star, sol.setpoint.x,
                              sol.setpoint.u, problem.weights, problem.tail, m,
                              problem.constraints) +
               offset_cost(sol.setpoint.y, problem.target);
  sol.stats.solve_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return sol;
}

} // namespace acmpc

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

#include "acmpc/controller.hpp"

#include <cmath>

namespace acmpc
{

namespace
{

double q_norm(const Mat &Q, const Vec &a) { return std::sqrt(std::max(0.0, a.dot(Q * a))); }

const Mat &lqr_Q(const ControllerConfig &c)
{
  return c.Q_kappa.size() > 0 ? c.Q_kappa : c.weights.Q;
}

const Mat &lqr_R(const ControllerConfig &c)
{
  return c.R_kappa.size() > 0 ? c.R_kappa : c.weights.R;
}

MpcProblem make_problem(const ControllerConfig &c, const ParametricModel &model, const Vec &theta,
                        const Vec &x_hat, const TailPolicy &tail, const MpcSolution *warm)
{
  MpcProblem p;
  p.model = &model;
  p.theta_hat = theta;
  p.x_hat = x_hat;
  p.weights = c.weights;
  p.constraints = c.constraints;
  p.target = c.target;
  p.tail = tail;
  p.warm_start = warm;
  return p;
}

} // namespace

void ControllerConfig::validate(const ParametricModel &model) const
{
  weights.validate(model.n_x, model.n_u);
  constraints.validate(model.n_x, model.n_u);
  target.validate(model.n_y);
  if (mode == ControllerMode::Regional)
  {
    require(J_bar > 0.0, "controller: regional mode requires J_bar > 0");
    if (Q_kappa.size() > 0)
      require(Q_kappa.rows() == model.n_x && Q_kappa.cols() == model.n_x,
              "controller: Q_kappa has wrong shape");
    if (R_kappa.size() > 0)
      require(R_kappa.rows() == model.n_u && R_kappa.cols() == model.n_u,
              "controller: R_kappa has wrong shape");
  }
  require(resynth_theta_tol >= 0.0 && resynth_setpoint_tol >= 0.0,
          "controller: resynthesis tolerances must be nonnegative");
}

AdaptiveController::AdaptiveController(ModelPtr model, LmsState lms, ControllerConfig config)
    : model_(std::move(model)), lms_(std::move(lms)), config_(std::move(config))
{
  require(model_ != nullptr, "controller: model is missing");
  model_->validate();
  config_.validate(*model_);
  require(lms_.theta_hat.size() == model_->n_theta, "controller: theta_hat has wrong size");
  require(lms_.gamma.rows() == model_->n_theta && lms_.gamma.cols() == model_->n_theta,
          "controller: gain has wrong shape");
  require(lms_.theta_set.contains(lms_.theta_hat, 1e-9),
          "controller: initial estimate lies outside the parameter set");
}

void AdaptiveController::set_target(const TrackingTarget &target)
{
  target.validate(model_->n_y);
  config_.target = target;
}

void AdaptiveController::update_tail()
{
  if (config_.mode != ControllerMode::Regional)
  {
    tail_ = TailPolicy::constant_input();
    have_tail_ = true;
    return;
  }
  Setpoint sp;
  if (last_)
    sp = last_->setpoint;
  else
    sp = optimal_setpoint(*model_, lms_.theta_hat, config_.target, config_.constraints);

  const bool stale =
      !have_tail_ || (lms_.theta_hat - theta_synth_).norm() > config_.resynth_theta_tol ||
      q_norm(config_.weights.Q, sp.x - xs_synth_) > config_.resynth_setpoint_tol;
  if (!stale)
    return;
  try
  {
    tail_ = make_lqr_feedback(*model_, lms_.theta_hat, sp.x, sp.u, lqr_Q(config_), lqr_R(config_),
                              config_.constraints.u_lo, config_.constraints.u_hi);
    theta_synth_ = lms_.theta_hat;
    xs_synth_ = sp.x;
    have_tail_ = true;
  }
  catch (const SolverError &)
  {
    // Keep the previous gain when the current linearization is not stabilizable.
    if (!have_tail_)
      throw;
  }
}

MpcSolution AdaptiveController::solve_current(const Vec &x_hat, bool &converged)
{
  const MpcProblem p = make_problem(config_, *model_, lms_.theta_hat, x_hat, tail_,
                                    last_ ? &*last_ : nullptr);
  try
  {
    MpcSolution sol = solve(p, config_.solver);
    converged = sol.stats.converged;
    return sol;
  }
  catch (const SolverError &)
  {
    if (!last_)
      throw;
  }
  // Fall back to the shifted previous plan.
  converged = false;
  MpcSolution sol = *last_;
  const int N = static_cast<int>(sol.u_star.cols());
  for (int k = 0; k + 1 < N; ++k)
    sol.u_star.col(k) = sol.u_star.col(k + 1);
  sol.u_star.col(N - 1) = sol.setpoint.u;
  sol.J_star = open_loop_cost(x_hat, lms_.theta_hat, sol.u_star, sol.setpoint.x, sol.setpoint.u,
                              config_.weights, tail_, *model_, config_.constraints) +
               offset_cost(sol.setpoint.y, config_.target);
  sol.stats.converged = false;
  return sol;
}

StepRecord AdaptiveController::step(const Vec &x_hat)
{
  require(x_hat.size() == model_->n_x, "controller: measured state has wrong size");
  StepRecord rec;
  rec.step = k_;
  rec.x_hat = x_hat;

  if (k_ > 0)
  {
    const Vec pred = model_->eval_f(x_prev_, u_prev_, lms_.theta_hat);
    rec.innovation_sq = (x_hat - pred).squaredNorm();
    rec.gain_condition = gain_condition(*model_, lms_.gamma, x_prev_, u_prev_);
    rec.gain_violation = rec.gain_condition > 1.0 + 1e-12;
    if (rec.gain_violation)
      ++gain_violations_;
    const Vec before = lms_.theta_hat;
    lms_ = lms_update(lms_, *model_, x_prev_, u_prev_, x_hat);
    rec.estimate_step_sq = (lms_.theta_hat - before).squaredNorm();
    rec.lms_updated = true;
  }

  const TailPolicy previous_tail = tail_;
  const bool had_tail = have_tail_;
  update_tail();
  rec.tail_resynthesized = config_.mode == ControllerMode::Regional &&
                           (!had_tail || previous_tail.K.size() != tail_.K.size() ||
                            previous_tail.K != tail_.K);

  bool converged = true;
  MpcSolution sol = solve_current(x_hat, converged);

  rec.u_applied = sol.u_star.col(0);
  rec.J_star = sol.J_star;
  rec.setpoint = sol.setpoint;
  rec.slacks = sol.slacks;
  rec.theta_hat = lms_.theta_hat;
  rec.converged = converged;
  rec.iterations = sol.stats.iterations;
  rec.kkt_residual = sol.stats.kkt_residual;
  rec.solve_ms = sol.stats.solve_ms;
  if (config_.mode == ControllerMode::Regional)
  {
    rec.sublevel_flag = sol.J_star <= config_.J_bar;
    const MpcProblem p = make_problem(config_, *model_, lms_.theta_hat, x_hat, tail_, nullptr);
    rec.tail_clips = count_tail_clips(*model_, lms_.theta_hat, p, sol);
  }
  if (last_ && config_.rho_V && config_.c_V && rec.lms_updated)
  {
    rec.decrease_slack = sol.J_star - *config_.rho_V * last_->J_star -
                         *config_.c_V * (rec.innovation_sq + rec.estimate_step_sq);
  }

  last_ = std::move(sol);
  x_prev_ = x_hat;
  u_prev_ = rec.u_applied;
  ++k_;
  return rec;
}

TailPolicy nominal_tail(const ControllerConfig &config, const ParametricModel &model,
                        const Vec &theta)
{
  if (config.mode != ControllerMode::Regional)
    return TailPolicy::constant_input();
  const Setpoint sp = optimal_setpoint(model, theta, config.target, config.constraints);
  return make_lqr_feedback(model, theta, sp.x, sp.u, lqr_Q(config), lqr_R(config),
                           config.constraints.u_lo, config.constraints.u_hi);
}

int count_tail_clips(const ParametricModel &model, const Vec &theta, const MpcProblem &problem,
                     const MpcSolution &sol)
{
  if (problem.tail.kind != TailPolicy::Kind::Feedback || problem.weights.M == 0)
    return 0;
  const Mat X = rollout(model, problem.x_hat, theta, sol.u_star);
  Vec x = X.col(X.cols() - 1);
  int clips = 0;
  for (int j = 0; j < problem.weights.M; ++j)
  {
    Vec active;
    const Vec u = problem.tail.apply(x, sol.setpoint.x, sol.setpoint.u, &active);
    clips += static_cast<int>(active.size() - active.sum());
    x = model.eval_f(x, u, theta);
  }
  return clips;
}

double nominal_decrease_check(const AdaptiveController &controller, const ParametricModel &model,
                              const Vec &theta_true, const Vec &x, double alpha)
{
  const ControllerConfig &c = controller.config();
  const TailPolicy tail = nominal_tail(c, model, theta_true);
  const MpcSolution s0 =
      solve(make_problem(c, model, theta_true, x, tail, nullptr), c.solver);
  const Vec u0 = s0.u_star.col(0);
  const Vec x_next = model.eval_f(x, u0, theta_true);
  const MpcSolution s1 =
      solve(make_problem(c, model, theta_true, x_next, tail, &s0), c.solver);
  const double ell =
      stage_cost(x, u0, s0.setpoint.x, s0.setpoint.u, c.weights, c.constraints);
  return s1.J_star - s0.J_star + alpha * ell;
}

} // namespace acmpc

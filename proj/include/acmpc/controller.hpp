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

#pragma once

#include "acmpc/cost.hpp"
#include "acmpc/lms.hpp"
#include "acmpc/lqr.hpp"
#include "acmpc/model.hpp"
#include "acmpc/solver.hpp"

#include <limits>
#include <optional>

namespace acmpc
{

enum class ControllerMode
{
  Semiglobal,  // constant-input tail
  Regional     // LQR feedback tail, monitored sublevel set
};

struct ControllerConfig
{
  ControllerMode mode = ControllerMode::Semiglobal;
  CostWeights weights;
  ConstraintSpec constraints;
  TrackingTarget target;
  SolverOptions solver;

  // Regional mode.
  double J_bar = 0.0;
  Mat Q_kappa;  // LQR weights; empty means weights.Q / weights.R
  Mat R_kappa;
  double resynth_theta_tol = 1e-3;
  double resynth_setpoint_tol = 1e-2;  // in the Q norm

  // Trial constants for the logged decrease slack (diagnostic only).
  std::optional<double> rho_V;
  std::optional<double> c_V;

  void validate(const ParametricModel &model) const;
};

struct StepRecord
{
  static constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

  int step = 0;
  Vec x_hat;
  Vec u_applied;
  double J_star = 0.0;
  Setpoint setpoint;
  Mat slacks;
  Vec theta_hat;  // estimate used in this step's solve
  bool lms_updated = false;
  double gain_condition = kNaN;  // lambda_max(Phi Gamma Phi') of the update
  bool gain_violation = false;
  double innovation_sq = kNaN;   // ||x_hat - f(x_hat_prev, u_prev, theta_hat_prev)||^2
  double estimate_step_sq = kNaN;
  bool sublevel_flag = true;     // J_star <= J_bar (regional mode only)
  double decrease_slack = kNaN;
  bool tail_resynthesized = false;
  int tail_clips = 0;            // clipped inputs along the predicted tail
  bool converged = true;
  int iterations = 0;
  double kkt_residual = 0.0;
  double solve_ms = 0.0;
};

/**
 * @brief Certainty-equivalent MPC with projected LMS adaptation
 *
 * Each call to step() first updates the estimate with the transition
 * (x_hat_{k-1}, u_{k-1}) -> x_hat_k, then solves the MPC problem at
 * (x_hat_k, theta_hat_k) and returns the first input.
 */
class AdaptiveController
{
public:
  AdaptiveController(ModelPtr model, LmsState lms, ControllerConfig config);

  StepRecord step(const Vec &x_hat);

  /// Replaces the tracking target (the warm start is kept).
  void set_target(const TrackingTarget &target);

  const LmsState &lms() const { return lms_; }
  const ControllerConfig &config() const { return config_; }
  const ParametricModel &model() const { return *model_; }
  const std::optional<MpcSolution> &last_solution() const { return last_; }
  const TailPolicy &tail() const { return tail_; }
  int steps_taken() const { return k_; }
  int gain_violations() const { return gain_violations_; }

private:
  void update_tail();
  MpcSolution solve_current(const Vec &x_hat, bool &converged);

  ModelPtr model_;
  LmsState lms_;
  ControllerConfig config_;
  TailPolicy tail_;
  bool have_tail_ = false;
  Vec theta_synth_;
  Vec xs_synth_;
  std::optional<MpcSolution> last_;
  Vec x_prev_;
  Vec u_prev_;
  int k_ = 0;
  int gain_violations_ = 0;
};

/// Tail policy the controller would use for a known theta at the optimal setpoint.
TailPolicy nominal_tail(const ControllerConfig &config, const ParametricModel &model,
                        const Vec &theta);

/// Number of clipped inputs along the tail rollout of a solution.
int count_tail_clips(const ParametricModel &model, const Vec &theta, const MpcProblem &problem,
                     const MpcSolution &sol);

/**
 * @brief Nominal decrease slack with theta_hat = theta and no noise
 *
 * J*(x+) - J*(x) + alpha l(x, u*_0, x_s*, u_s*), where x+ = f(x, u*_0, theta, 0).
 * Nonpositive values mean the certified decrease holds.
 */
double nominal_decrease_check(const AdaptiveController &controller, const ParametricModel &model,
                              const Vec &theta_true, const Vec &x, double alpha);

} // namespace acmpc

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

#include "acmpc/model.hpp"

namespace acmpc
{

struct LmsState
{
  Vec theta_hat;
  Mat gamma;
  ParameterSet theta_set;
};

/**
 * @brief Per-step quantities of the LMS convergence inequalities
 *
 * Slacks are rhs - lhs, so a nonnegative slack means the inequality holds.
 */
struct LmsDiagnostics
{
  Vec x_tilde;
  Vec w_tilde;
  Vec theta_hat_next;
  double v_theta_err = 0.0;       // V(theta_hat_k - theta_k)
  double v_theta_err_next = 0.0;  // V(theta_hat_{k+1} - theta_{k+1})
  double v_theta_step = 0.0;      // V(theta_hat_{k+1} - theta_hat_k)
  double v_theta_drift = 0.0;     // V(theta_{k+1} - theta_k)
  double c_theta = 0.0;
  double lyap_slack = 0.0;
  double step_slack = 0.0;
  double noise_slack = 0.0;  // NaN when no Lipschitz constant is supplied
  bool lyap_ok = true;
  bool step_ok = true;
  bool noise_ok = true;
};

/// argmin_{theta in set} ||theta - theta_tilde||^2_{gamma^{-1}}.
Vec project_weighted(const Vec &theta_tilde, const Mat &gamma, const ParameterSet &set);

/// One projected LMS step using x_hat_next - f(x_hat_k, u_k, theta_hat, 0) as innovation.
LmsState lms_update(const LmsState &state, const ParametricModel &model, const Vec &x_hat_k,
                    const Vec &u_k, const Vec &x_hat_next);

struct GainDesign
{
  Mat gamma;
  double mu = 1.0;
  double sup_phi_sq = 0.0;
  bool degenerate = false;
};

/**
 * @brief Scalar gain mu I with mu = 1 / (1.2 sup ||G(x + v, u, 0)||^2)
 *
 * The supremum is estimated on box corners (all of them when there are at
 * most 2^12, random ones otherwise) plus `samples` uniform interior points.
 */
GainDesign design_gain(const ParametricModel &model, const Vec &state_lo, const Vec &state_hi,
                       const ConstraintSpec &constraints, const Vec &noise_lo,
                       const Vec &noise_hi, int samples = 2000, unsigned seed = 1);

/// Largest eigenvalue of Phi gamma Phi' at (x, u); the gain condition asks for <= 1.
double gain_condition(const ParametricModel &model, const Mat &gamma, const Vec &x, const Vec &u);

/// V(a) = a' gamma^{-1} a.
double v_theta(const Mat &gamma, const Vec &a);

/// Diameter of the set in the gamma^{-1} norm (exact for boxes with diagonal gamma,
/// an upper bound otherwise).
double c_theta(const Mat &gamma, const ParameterSet &set);

LmsDiagnostics lms_diagnostics(const LmsState &state, const ParametricModel &model,
                               const Vec &theta_true, const Vec &theta_true_next,
                               const Vec &x_true, const Vec &u, const Vec &w, const Vec &v,
                               const Vec &v_next);

} // namespace acmpc

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

struct CostWeights
{
  Mat Q;
  Mat R;
  double omega = 1.0;
  int N = 1;
  int M = 0;

  void validate(int n_x, int n_u) const;
};

/**
 * @brief Input policy used along the terminal rollout
 *
 * ConstantInput applies u_s. Feedback applies clip(u_s + K (x - x_s), u_lo, u_hi).
 */
struct TailPolicy
{
  enum class Kind
  {
    ConstantInput,
    Feedback
  };

  Kind kind = Kind::ConstantInput;
  Mat K;
  Vec u_lo;
  Vec u_hi;

  static TailPolicy constant_input() { return {}; }
  static TailPolicy feedback(Mat K, Vec u_lo, Vec u_hi);

  /// `active` (optional) receives 1 for unsaturated input channels, 0 for clipped ones.
  Vec apply(const Vec &x, const Vec &x_s, const Vec &u_s, Vec *active = nullptr) const;
};

/// sum_i q_i max(D_i x - d_i, 0)^2.
double slack_penalty(const Vec &x, const ConstraintSpec &constraints);

double stage_cost(const Vec &x, const Vec &u, const Vec &x_s, const Vec &u_s,
                  const CostWeights &weights, const ConstraintSpec &constraints);

/// Sum of M stage costs along the tail rollout from x_N.
double terminal_cost(const Vec &x_N, const Vec &x_s, const Vec &u_s, const Vec &theta,
                     const CostWeights &weights, const TailPolicy &tail,
                     const ParametricModel &model, const ConstraintSpec &constraints);

/// Stage costs over the horizon plus omega times the terminal cost.
double open_loop_cost(const Vec &x0, const Vec &theta, const Mat &inputs, const Vec &x_s,
                      const Vec &u_s, const CostWeights &weights, const TailPolicy &tail,
                      const ParametricModel &model, const ConstraintSpec &constraints);

double offset_cost(const Vec &y_s, const TrackingTarget &target);

/// Squared Euclidean distance from x to the state polytope {D x <= d}.
double constraint_distance_sq(const Vec &x, const ConstraintSpec &constraints);

} // namespace acmpc

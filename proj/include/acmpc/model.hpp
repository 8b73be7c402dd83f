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

#include "acmpc/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>

namespace acmpc
{

/**
 * @brief Affine-in-parameter linear system
 *
 * x+ = A(theta) x + B(theta) u + E w + e(theta),  y = C x + D u + c.
 */
struct LinearForm
{
  std::function<Mat(const Vec &)> A;
  std::function<Mat(const Vec &)> B;
  std::function<Vec(const Vec &)> e;
  Mat E;
  Mat C;
  Mat D;
  Vec c;
};

/**
 * @brief Uncertain discrete-time system, linear in the parameters
 *
 * f(x,u,theta,w) = f(x,u,0,w) + G(x,u,w) theta.
 */
struct ParametricModel
{
  using DynFn = std::function<Vec(const Vec &, const Vec &, const Vec &, const Vec &)>;
  using RegFn = std::function<Mat(const Vec &, const Vec &, const Vec &)>;
  using OutFn = std::function<Vec(const Vec &, const Vec &, const Vec &)>;
  // Jacobians with respect to (x, u) at w = 0.
  using JacFn = std::function<void(const Vec &, const Vec &, const Vec &, Mat &, Mat &)>;

  std::string name;
  int n_x = 0;
  int n_u = 0;
  int n_theta = 0;
  int n_w = 0;
  int n_y = 0;

  DynFn f;
  RegFn G;
  OutFn h;
  JacFn f_jac;
  JacFn h_jac;

  std::optional<LinearForm> linear;
  std::optional<double> L_f;
  std::optional<double> L_h;

  Vec eval_f(const Vec &x, const Vec &u, const Vec &theta) const;
  Vec eval_f(const Vec &x, const Vec &u, const Vec &theta, const Vec &w) const;
  Mat eval_G(const Vec &x, const Vec &u) const;
  Mat eval_G(const Vec &x, const Vec &u, const Vec &w) const;
  Vec eval_h(const Vec &x, const Vec &u, const Vec &theta) const;

  // Analytic when provided, central differences otherwise.
  void jacobian_f(const Vec &x, const Vec &u, const Vec &theta, Mat &fx, Mat &fu) const;
  void jacobian_h(const Vec &x, const Vec &u, const Vec &theta, Mat &hx, Mat &hu) const;

  bool is_linear() const { return linear.has_value(); }
  void validate() const;
};

using ModelPtr = std::shared_ptr<const ParametricModel>;

/// Builds a model from an analytic linear form with regressor derived from A, B, e.
ParametricModel make_linear_model(std::string name, int n_x, int n_u, int n_theta,
                                  LinearForm form);

struct ParameterSet
{
  enum class Kind
  {
    Box,
    Polytope
  };

  Kind kind = Kind::Box;
  Vec lo;
  Vec hi;
  Mat H;
  Vec b;

  static ParameterSet box(Vec lo, Vec hi);
  /// Throws ConfigError unless {theta : H theta <= b} is non-empty and bounded.
  static ParameterSet polytope(Mat H, Vec b);

  int dim() const;
  bool contains(const Vec &theta, double tol = 1e-9) const;
};

struct ConstraintSpec
{
  Vec u_lo;
  Vec u_hi;
  Mat D;
  Vec d;
  Vec q_xi;
  double u_margin = 0.0;

  int rows() const { return static_cast<int>(D.rows()); }
  Vec us_lo() const { return u_lo.array() + u_margin; }
  Vec us_hi() const { return u_hi.array() - u_margin; }
  void validate(int n_x, int n_u) const;
};

struct TrackingTarget
{
  Vec y_d;
  Mat T;

  void validate(int n_y) const;
};

struct Setpoint
{
  Vec x;
  Vec u;
  Vec y;
};

/// States x(0..N) as columns; inputs are the columns of `inputs`.
Mat rollout(const ParametricModel &model, const Vec &x0, const Vec &theta, const Mat &inputs);

/// ||f(x,u,theta,0) - x||.
double steady_state_residual(const ParametricModel &model, const Vec &theta, const Vec &x,
                             const Vec &u);

/// Closest reachable steady output to the target (input set shrunk by u_margin).
Setpoint optimal_setpoint(const ParametricModel &model, const Vec &theta,
                          const TrackingTarget &target, const ConstraintSpec &constraints);

/// Maximum deviation of the linear-parametrization identity over `samples` random points.
double linear_param_defect(const ParametricModel &model, int samples, unsigned seed);

} // namespace acmpc

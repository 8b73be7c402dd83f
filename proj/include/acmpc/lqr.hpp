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
#include "acmpc/model.hpp"

namespace acmpc
{

struct LqrResult
{
  Mat P;
  Mat K;  // u = u_s + K (x - x_s)
  double spectral_radius = 0.0;
  int iterations = 0;
};

/**
 * @brief Discrete algebraic Riccati equation by fixed-point iteration
 *
 * P <- Q + A'PA - A'PB (R + B'PB)^{-1} B'PA, starting from P = Q.
 * Throws SolverError("not stabilizable at setpoint") when the iteration does
 * not settle within `max_iter` steps or the closed loop is not stable.
 */
LqrResult solve_dare(const Mat &A, const Mat &B, const Mat &Q, const Mat &R,
                     int max_iter = 10000, double tol = 1e-10);

/// LQR for the dynamics linearized at (x_s, u_s, theta); inputs clipped to [u_lo, u_hi].
TailPolicy make_lqr_feedback(const ParametricModel &model, const Vec &theta, const Vec &x_s,
                             const Vec &u_s, const Mat &Q, const Mat &R, const Vec &u_lo,
                             const Vec &u_hi, LqrResult *info = nullptr);

} // namespace acmpc

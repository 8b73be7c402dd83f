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

namespace acmpc
{

/**
 * @brief Dense convex QP
 *
 *   min 0.5 z'Hz + g'z
 *   s.t. A_eq z = b_eq,  A_in z <= b_in,  lb <= z <= ub
 *
 * Infinite bounds are ignored. Empty matrices mean "no such constraint".
 */
struct QpProblem
{
  Mat H;
  Vec g;
  Mat A_eq;
  Vec b_eq;
  Mat A_in;
  Vec b_in;
  Vec lb;
  Vec ub;
};

struct QpResult
{
  Vec z;
  Vec y_eq;  // multipliers of A_eq z = b_eq
  Vec y_in;  // >= 0, multipliers of A_in z <= b_in
  Vec y_lb;  // >= 0
  Vec y_ub;  // >= 0
  double objective = 0.0;
  double kkt_residual = 0.0;
  double complementarity = 0.0;
  double primal_violation = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct QpOptions
{
  int max_iter = 0;  // 0 selects 10 * (#variables + #constraints)
};

/**
 * @brief Goldfarb-Idnani dual active-set method
 *
 * H must be positive definite on the null space of A_eq. If H itself is only
 * semidefinite the equality rows are added as an augmented-Lagrangian term.
 * Throws SolverError("indefinite reduced Hessian") when that does not help and
 * SolverError("infeasible QP") when the constraints cannot be satisfied.
 */
QpResult solve_qp(const QpProblem &qp, const QpOptions &opts = {});

QpResult solve_qp(const Mat &H, const Vec &g, const Mat &A_eq, const Vec &b_eq, const Vec &lb,
                  const Vec &ub);

/// Stationarity, feasibility and complementarity of (z, multipliers) for `qp`.
void qp_kkt_check(const QpProblem &qp, QpResult &res);

} // namespace acmpc

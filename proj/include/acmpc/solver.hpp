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
#include "acmpc/sqp.hpp"

#include <ostream>

namespace acmpc
{

struct MpcSolution;

struct MpcProblem
{
  const ParametricModel *model = nullptr;
  Vec theta_hat;
  Vec x_hat;
  CostWeights weights;
  ConstraintSpec constraints;
  TrackingTarget target;
  TailPolicy tail;
  const MpcSolution *warm_start = nullptr;

  void validate() const;
};

struct MpcStats
{
  int iterations = 0;
  double kkt_residual = 0.0;
  double solve_ms = 0.0;
  bool converged = false;
  bool qp_path = false;
};

struct MpcSolution
{
  Mat u_star;  // n_u x N
  Setpoint setpoint;
  Mat slacks;  // r x (N + M), stage 0 first
  double J_star = 0.0;
  MpcStats stats;
  Vec z;  // raw decision vector [u, x_s, u_s, y_s, slacks]
};

struct SolverOptions
{
  SqpOptions sqp;
  bool force_sqp = false;
  double reg = 1e-9;  // weight of ||z - z_warm||^2
};

/**
 * @brief MPC with artificial setpoint, finite-tail terminal cost and soft state constraints
 *
 * The predicted states are eliminated by forward simulation; the decision
 * vector is [u_0..u_{N-1}, x_s, u_s, y_s, slacks]. Linear models with a
 * constant-input tail are solved by a single QP; everything else by
 * Gauss-Newton SQP.
 */
MpcSolution solve(const MpcProblem &problem, const SolverOptions &opts = {});

/// The smooth NLP behind `solve`, exposed for derivative checks.
NlpProblem mpc_nlp(const MpcProblem &problem, const Vec &z_ref, double reg);

/// Initial decision vector (shifted warm start or steady-state guess).
Vec mpc_initial_guess(const MpcProblem &problem);

} // namespace acmpc

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

#include "acmpc/qp.hpp"
#include "acmpc/types.hpp"

#include <functional>
#include <ostream>

namespace acmpc
{

/**
 * @brief Smooth least-squares NLP
 *
 *   min ||r(z)||^2 + reg ||z - z_ref||^2
 *   s.t. c_eq(z) = 0,  c_in(z) <= 0,  lb <= z <= ub
 *
 * Each evaluator fills the value and, when the matrix pointer is non-null,
 * its Jacobian.
 */
struct NlpProblem
{
  using Eval = std::function<void(const Vec &z, Vec &val, Mat *jac)>;

  int n = 0;
  Eval residual;
  Eval eq;
  Eval ineq;
  Vec lb;
  Vec ub;
  Vec z_ref;
  double reg = 0.0;
};

struct SqpOptions
{
  int max_iter = 50;
  double kkt_tol = 1e-6;
  double step_tol = 1e-10;
  double lambda0 = 1e-6;
  double lambda_max = 1e6;
  int max_backtracks = 30;
  std::ostream *trace = nullptr;
};

struct SqpResult
{
  Vec z;
  double cost = 0.0;  // ||r||^2 + reg ||z - z_ref||^2
  double kkt_residual = 0.0;
  double infeasibility = 0.0;
  Vec y_eq;
  Vec y_in;
  int iterations = 0;
  bool converged = false;
  bool line_search_failed = false;
};

/**
 * @brief Gauss-Newton SQP with Levenberg damping and an l1 merit line search
 */
SqpResult sqp_solve(const NlpProblem &nlp, const Vec &z0, const SqpOptions &opts = {});

/// Central-difference Jacobian of a vector evaluator.
Mat fd_jacobian(const NlpProblem::Eval &fn, const Vec &z, double rel_step = 1e-6);

} // namespace acmpc

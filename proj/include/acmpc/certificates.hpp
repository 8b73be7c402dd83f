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

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace acmpc
{

struct DecayEstimate
{
  double C_rho = 1.0;
  double rho = 0.0;
  double C_ell = 1.0;
  std::string source = "sampled";  // "analytic" for a single known linear model
};

struct CertificateReport
{
  DecayEstimate decay;
  std::vector<double> gamma;  // gamma_1 .. gamma_N
  double gamma_bar = 0.0;
  double epsilon_f = 0.0;
  double alpha = 0.0;
  std::optional<double> omega_lower;  // empty when C_ell rho^M >= 1
  std::optional<int> N_min;
  std::optional<int> regional_N_min;
  std::optional<double> J_bar;
  std::optional<double> c_loc;
  bool certified = false;
  std::string note;
};

using TailFactory = std::function<TailPolicy(const Vec &theta, const Setpoint &sp)>;

struct DecayOptions
{
  int horizon_probe = 200;
  int rollouts = 200;
  int rollout_length = 50;
  double radius_sq = 1.0;  // initial ||x - x_s||_Q^2 for sampled rollouts
  unsigned seed = 7;
  TailFactory tail;        // empty: constant input u_s
};

/**
 * @brief Decay constants of the tail rollout
 *
 * Linear models with constant-input tail: G_k = max_theta ||Qbar^{1/2} A^k Q^{-1/2}||^2
 * for k <= horizon_probe, where Qbar = Q + sum_i q_xi,i D_i^T D_i. rho is scanned over
 * (r^2, 1), r the largest spectral radius, with C_ell = max_k G_k / rho^k, and the
 * pair with the largest alpha for the given weights is returned. C_rho reports
 * max_k ||A^k|| / r^k. Otherwise: log-linear least-squares fit of stage costs
 * along sampled rollouts to the given setpoints, C_ell inflated by 1.1.
 * Throws SolverError if a sample is not decaying.
 */
DecayEstimate estimate_decay(const ParametricModel &model, const std::vector<Vec> &theta_samples,
                             const std::vector<Setpoint> &setpoint_samples,
                             const CostWeights &weights, const ConstraintSpec &constraints,
                             const DecayOptions &opts = {});

/// C_ell from C_rho: C_rho (sigma_max(Q) + sigma_xi) / sigma_min(Q).
double stage_cost_constant(double C_rho, const Mat &Q, const ConstraintSpec &constraints);

double gamma_n(const DecayEstimate &decay, const CostWeights &weights, int N);
double gamma_bar(const DecayEstimate &decay, const CostWeights &weights);

double epsilon_f_closed(const DecayEstimate &decay, double omega, int M);
double epsilon_f_lp(const DecayEstimate &decay, double omega, int M);

/// Decrease constant for gammas = (gamma_1, ..., gamma_N). Returns -inf when the
/// denominator is not positive.
double alpha(const std::vector<double> &gammas, double epsilon_f);

/// Throws ConfigError when C_ell rho^M >= 1.
double omega_lower(const DecayEstimate &decay, int M);

/// Smallest N in [1, cap] with alpha > 0. Throws SolverError past the cap.
int minimal_horizon(const DecayEstimate &decay, const CostWeights &weights, int cap = 500);

int regional_minimal_horizon(double gamma_bar, double epsilon_f, double J_bar, double c_loc);
int regional_minimal_horizon(const DecayEstimate &decay, const CostWeights &weights,
                             double J_bar, double c_loc);

CertificateReport certify(const DecayEstimate &decay, const CostWeights &weights);

} // namespace acmpc

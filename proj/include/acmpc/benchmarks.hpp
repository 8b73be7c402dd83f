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

#include "acmpc/controller.hpp"
#include "acmpc/model.hpp"

#include <cstdint>
#include <vector>

namespace acmpc
{

/// Piecewise-constant reference: y_d applies from step `start` on.
struct ReferenceSegment
{
  int start = 0;
  Vec y_d;
};

/**
 * @brief Everything a benchmark contributes to a scenario
 */
struct BenchmarkSetup
{
  std::string name;
  ModelPtr model;
  ParameterSet theta_set;
  Vec theta_hat0;
  Vec theta_true;
  std::vector<Vec> theta_samples;  // members of the set used for certificates
  ControllerConfig controller;
  std::vector<ReferenceSegment> schedule;
  Vec x0;
  Vec w_lo, w_hi;
  Vec v_lo, v_hi;
  Vec gain_state_lo, gain_state_hi;  // state box for the LMS gain design
  int steps = 0;
  double divergence_bound = 1e6;
};

/// Exact zero-order-hold discretization through the exponential of [Ac Bc; 0 0] dt.
void discretize_zoh(const Mat &Ac, const Mat &Bc, double dt, Mat &A, Mat &B);

struct ChainParams
{
  Vec mass;       // per mass
  Vec stiffness;  // spring i connects mass i to mass i-1 (the wall for i = 0)
  Vec damping;    // damper in parallel with spring i
  Vec ground;     // damping of mass i to ground
};

/// Continuous-time chain; the actuator pushes the last mass, the output is the first position.
void chain_continuous(const ChainParams &p, Mat &Ac, Mat &Bc);

struct ChainOptions
{
  int n_masses = 10;
  double dt = 0.5;
  double true_scale = 0.5;  // physical parameters deviate by exactly this fraction
  double mass = 1.0;
  double stiffness = 20.0;
  double damping = 3.0;
  double ground = 1.0;
  int set_samples = 32;     // random physical corners in the certificate sample
  std::uint64_t truth_seed = 0;
  double u_max = 25.0;
  double y_max = 0.7;
  double velocity_weight = 7.0;  // Q = diag(I, velocity_weight I)
  double terminal_weight = 1e4;  // offset cost T
  double noise_amp = 1e-3;
  double disturbance_amp = 1e-3;
  int steps = 400;
};

/// Chain with theta = rows of the discrete [A B] (n_x (n_x + 1) parameters).
BenchmarkSetup build_msd_chain(const ChainOptions &opts = {});

/// Linear chain model parametrized by the entries of [A B], with disturbance matrix I.
ParametricModel chain_model(int n_masses);

/// theta for given discrete matrices (row-major [A B]).
Vec chain_theta(const Mat &A, const Mat &B);

struct QuadrotorOptions
{
  double dt = 0.025;
  double mass = 0.486;
  double arm = 0.25;
  double inertia = 0.00383;
  double thrust_factor = 2.0;    // theta_hat0 = (thrust_factor, torque_factor) .* theta_true
  double torque_factor = 0.5;
  Vec start;                     // default: hover at the origin
  Vec target;                    // default (4, 1)
  double ceiling = 1.2;          // obstacle row p2 <= ceiling
  double wall = 4.3;             // obstacle row p1 <= wall
  double v_max = 3.0;
  double phi_max = 0.5;
  double wind_amp = 0.05;
  double noise_amp = 1e-3;
  int steps = 2000;
  double J_bar = 50.0;
  double divergence_bound = 1e2;
};

/// Euler-discretized planar quadrotor, theta = (thrust gain, torque gain).
ParametricModel quadrotor_model(double dt);

BenchmarkSetup build_quadrotor(const QuadrotorOptions &opts = {});

} // namespace acmpc

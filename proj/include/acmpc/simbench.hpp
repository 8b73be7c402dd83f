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

#include "acmpc/benchmarks.hpp"
#include "acmpc/controller.hpp"
#include "acmpc/lms.hpp"

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace acmpc
{

enum class Ablation
{
  Full,
  NoTerm,   // M = 0
  NoAdapt   // Gamma = 0
};

std::string to_string(Ablation a);
/// Throws ConfigError for unknown names.
Ablation parse_ablation(const std::string &name);

struct Scenario
{
  std::string name;
  ModelPtr model;
  ParameterSet theta_set;
  Vec theta_hat0;
  Vec theta_true;          // theta_0
  double drift_amp = 0.0;  // per-step uniform parameter drift, kept inside the set
  Vec x0;
  Vec w_lo, w_hi;
  Vec v_lo, v_hi;
  std::vector<ReferenceSegment> schedule;
  int steps = 0;
  ControllerConfig controller;
  Vec gain_state_lo, gain_state_hi;
  std::optional<Mat> gamma;  // overrides the gain design
  Ablation ablation = Ablation::Full;
  std::uint64_t seed = 0;
  double divergence_bound = 1e6;
  bool check_lms = true;

  void validate() const;
};

Scenario make_scenario(const BenchmarkSetup &setup, Ablation ablation, std::uint64_t seed);

struct SimStep
{
  int k = 0;
  Vec x;
  Vec x_hat;
  Vec u;
  Vec y;
  Vec y_d;
  Vec y_rd;              // optimal reachable output for the true parameters
  double theta_err = 0.0;  // ||theta_hat_k - theta_k||
  double track = 0.0;    // ||y_k - y_rd||^2
  double constr = 0.0;   // squared distance of x_k to the state constraints
  StepRecord record;
  std::optional<LmsDiagnostics> lms;  // transition k-1 -> k
};

struct SimResult
{
  std::string scenario;
  Ablation ablation = Ablation::Full;
  std::uint64_t seed = 0;
  std::vector<SimStep> steps;
  Vec theta_hat_final;
  double mu = 0.0;
  double track = 0.0;
  double constr = 0.0;
  bool diverged = false;
  std::string diverged_reason;
  Vec last_state;
  int lms_failures = 0;  // steps where an LMS inequality was violated
  int gain_violations = 0;
  int nonconverged = 0;
  double wall_ms = 0.0;

  double wall_ms_per_step() const;
};

/**
 * @brief Closed loop of true plant, noise and adaptive controller
 *
 * Copyable: a copy continues the same realization from the same state.
 */
class Simulator
{
public:
  explicit Simulator(Scenario scenario);

  /// Advances up to n steps; stops early on divergence.
  void advance(int n);
  bool finished() const { return k_ >= sc_.steps || result_.diverged; }
  int step_index() const { return k_; }
  const SimResult &result() const { return result_; }
  const AdaptiveController &controller() const { return ctrl_; }
  const Scenario &scenario() const { return sc_; }

private:
  Vec noise(int k) const;
  Vec disturbance(int k) const;
  Vec reference(int k) const;
  const Vec &reachable_output(const Vec &y_d);

  Scenario sc_;
  AdaptiveController ctrl_;
  SimResult result_;
  int k_ = 0;
  Vec x_;
  Vec theta_;
  // Previous transition, for the LMS inequality checks.
  Vec x_prev_, u_prev_, w_prev_, v_prev_, theta_prev_;
  LmsState lms_prev_;
  // Cache of the optimal reachable output.
  Vec yrd_theta_, yrd_yd_, yrd_;
};

SimResult run(const Scenario &scenario);

struct ComparisonRow
{
  Ablation ablation = Ablation::Full;
  double track = 0.0;
  double constr = 0.0;
  double track_ratio = 1.0;
  double constr_ratio = 1.0;
  bool diverged = false;
};

/// Runs the scenarios (up to `jobs` at a time) and normalizes by the Full one.
/// Throws ConfigError if the list is empty, lacks Full, or mixes seeds.
std::vector<ComparisonRow> compare(const std::vector<Scenario> &scenarios, int jobs = 1,
                                   std::vector<SimResult> *results = nullptr);

/// Steps after which ||y - y_d|| stays within tol until the end; -1 if never.
/// First step from which ||y - y_d|| < tol holds until the end; -1 if never.
int settling_step(const SimResult &result, double tol);

/// First step with ||y - y_d|| < tol; -1 if never.
int first_within(const SimResult &result, double tol);

inline constexpr const char *kCsvSchema = "acmpc-sim v1";

void write_csv(const SimResult &result, std::ostream &os);
void write_comparison_csv(const std::vector<ComparisonRow> &rows, std::ostream &os);
/// {"track", "constr", "diverged", "wall_ms_per_step"} plus run identifiers.
std::string summary_json(const SimResult &result);

} // namespace acmpc

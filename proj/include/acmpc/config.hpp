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
#include "acmpc/certificates.hpp"
#include "acmpc/simbench.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace acmpc
{

/**
 * @brief Batch run description
 *
 * Parsed from a JSON object; every key is optional and unknown keys are
 * rejected. Unset values fall back to the builtin benchmark defaults.
 */
struct RunConfig
{
  std::string builtin = "msd";
  std::optional<ControllerMode> mode;
  Ablation ablation = Ablation::Full;
  std::vector<Ablation> ablations = {Ablation::Full, Ablation::NoTerm, Ablation::NoAdapt};
  std::uint64_t seed = 0;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4};
  std::optional<int> steps;
  std::optional<int> N;
  std::optional<int> M;
  std::optional<double> omega;
  std::optional<double> noise_amp;
  std::optional<double> disturbance_amp;
  std::optional<double> drift_amp;
  std::optional<double> J_bar;
  std::optional<double> estimate_factor;  // quadrotor: sets both thrust and torque factors
  std::optional<std::uint64_t> truth_seed;  // chain
  std::string output_dir = "out";
};

/// Throws ConfigError on malformed JSON, wrong types or unknown keys.
RunConfig parse_run_config(const std::string &json_text);
RunConfig load_run_config(const std::string &path);

std::string to_string(ControllerMode mode);

BenchmarkSetup build_setup(const RunConfig &config);
Scenario build_scenario(const RunConfig &config, Ablation ablation, std::uint64_t seed);

/**
 * @brief Heuristic local radius for the regional certificate
 *
 * Largest ||x - x_s||_Q^2 for which the LQR input stays unsaturated, computed
 * per input row in closed form and minimized over the parameter samples.
 */
double regional_c_loc(const BenchmarkSetup &setup);

/// Certificate for the configured controller (decay fit through the tail in regional mode).
CertificateReport certify_setup(const BenchmarkSetup &setup);

} // namespace acmpc

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

#include "acmpc/config.hpp"

#include <gtest/gtest.h>

using namespace acmpc;

TEST(Config, EmptyObjectGivesDefaults)
{
  const RunConfig c = parse_run_config("{}");
  EXPECT_EQ(c.builtin, "msd");
  EXPECT_FALSE(c.mode.has_value());
  EXPECT_EQ(c.ablation, Ablation::Full);
  EXPECT_EQ(c.ablations.size(), 3u);
  EXPECT_EQ(c.seeds.size(), 5u);
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, ParsesAllKeys)
{
  const RunConfig c = parse_run_config(R"({
    "builtin": "quadrotor", "mode": "semiglobal", "ablation": "no_adapt",
    "ablations": ["full", "no_term"], "seed": 9, "seeds": [1, 2], "steps": 30,
    "N": 4, "M": 7, "omega": 3.5, "noise_amp": 0.0, "disturbance_amp": 0.01,
    "drift_amp": 1e-4, "J_bar": 20, "estimate_factor": 1.1, "truth_seed": 3,
    "output_dir": "runs"})");
  EXPECT_EQ(c.builtin, "quadrotor");
  EXPECT_EQ(*c.mode, ControllerMode::Semiglobal);
  EXPECT_EQ(c.ablation, Ablation::NoAdapt);
  ASSERT_EQ(c.ablations.size(), 2u);
  EXPECT_EQ(c.ablations[1], Ablation::NoTerm);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.seeds, (std::vector<std::uint64_t>{1, 2}));
  EXPECT_EQ(*c.steps, 30);
  EXPECT_EQ(*c.N, 4);
  EXPECT_EQ(*c.M, 7);
  EXPECT_DOUBLE_EQ(*c.omega, 3.5);
  EXPECT_DOUBLE_EQ(*c.noise_amp, 0.0);
  EXPECT_DOUBLE_EQ(*c.disturbance_amp, 0.01);
  EXPECT_DOUBLE_EQ(*c.drift_amp, 1e-4);
  EXPECT_DOUBLE_EQ(*c.J_bar, 20.0);
  EXPECT_DOUBLE_EQ(*c.estimate_factor, 1.1);
  EXPECT_EQ(*c.truth_seed, 3u);
  EXPECT_EQ(c.output_dir, "runs");
}

TEST(Config, RejectsMalformedInput)
{
  EXPECT_THROW(parse_run_config("{"), ConfigError);
  EXPECT_THROW(parse_run_config("[1, 2]"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"horizon": 5})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"N": "five"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"N": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"M": -1})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"omega": 0})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"noise_amp": -1e-3})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"builtin": "pendulum"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"mode": "global"})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"ablations": ["full", "fast"]})"), ConfigError);
  EXPECT_THROW(parse_run_config(R"({"seeds": 3})"), ConfigError);
  EXPECT_THROW(load_run_config("/nonexistent/acmpc.json"), ConfigError);
}

TEST(Config, OverridesReachTheScenario)
{
  const RunConfig c =
      parse_run_config(R"({"N": 3, "M": 5, "omega": 2, "steps": 17, "drift_amp": 2e-4})");
  const Scenario sc = build_scenario(c, Ablation::NoTerm, 4);
  EXPECT_EQ(sc.controller.weights.N, 3);
  EXPECT_EQ(sc.controller.weights.M, 5);
  EXPECT_DOUBLE_EQ(sc.controller.weights.omega, 2.0);
  EXPECT_EQ(sc.steps, 17);
  EXPECT_DOUBLE_EQ(sc.drift_amp, 2e-4);
  EXPECT_EQ(sc.ablation, Ablation::NoTerm);
  EXPECT_EQ(sc.seed, 4u);
}

TEST(Config, EstimateFactorScalesBothQuadrotorParameters)
{
  const BenchmarkSetup s =
      build_setup(parse_run_config(R"({"builtin": "quadrotor", "estimate_factor": 1.03})"));
  EXPECT_NEAR(s.theta_hat0(0), 1.03 * s.theta_true(0), 1e-12);
  EXPECT_NEAR(s.theta_hat0(1), 1.03 * s.theta_true(1), 1e-12);
  EXPECT_EQ(s.controller.mode, ControllerMode::Regional);
}

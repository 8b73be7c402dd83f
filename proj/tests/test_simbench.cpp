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

#include "acmpc/benchmarks.hpp"
#include "acmpc/simbench.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <algorithm>
#include <sstream>
#include <string>

using namespace acmpc;

namespace
{

Scenario chain_scenario(Ablation a, std::uint64_t seed, int steps)
{
  ChainOptions o;
  o.steps = steps;
  return make_scenario(build_msd_chain(o), a, seed);
}

double last_quarter_track(const SimResult &r)
{
  const std::size_t n = r.steps.size();
  double sum = 0.0;
  for (std::size_t k = n - n / 4; k < n; ++k)
    sum += (r.steps[k].y - r.steps[k].y_rd).squaredNorm();
  return sum;
}

SimStep synthetic_step(int k, double y, double y_d)
{
  SimStep s;
  s.k = k;
  s.y = Vec::Constant(1, y);
  s.y_d = Vec::Constant(1, y_d);
  return s;
}

} // namespace

TEST(Simbench, AblationNamesRoundTrip)
{
  for (Ablation a : {Ablation::Full, Ablation::NoTerm, Ablation::NoAdapt})
    EXPECT_EQ(parse_ablation(to_string(a)), a);
  EXPECT_EQ(to_string(Ablation::NoTerm), "no_term");
  EXPECT_THROW(parse_ablation("none"), ConfigError);
}

TEST(Simbench, AblationsChangeTheController)
{
  const Simulator full(chain_scenario(Ablation::Full, 0, 10));
  EXPECT_GT(full.controller().config().weights.M, 0);
  EXPECT_GT(full.controller().lms().gamma.norm(), 0.0);
  const Simulator nt(chain_scenario(Ablation::NoTerm, 0, 10));
  EXPECT_EQ(nt.controller().config().weights.M, 0);
  const Simulator na(chain_scenario(Ablation::NoAdapt, 0, 10));
  EXPECT_EQ(na.controller().lms().gamma.norm(), 0.0);
  EXPECT_EQ(na.controller().config().weights.M, full.controller().config().weights.M);
}

TEST(Simbench, RunsAreDeterministic)
{
  const SimResult a = run(chain_scenario(Ablation::Full, 3, 40));
  const SimResult b = run(chain_scenario(Ablation::Full, 3, 40));
  ASSERT_EQ(a.steps.size(), b.steps.size());
  for (std::size_t k = 0; k < a.steps.size(); ++k)
  {
    EXPECT_EQ(a.steps[k].x, b.steps[k].x);
    EXPECT_EQ(a.steps[k].u, b.steps[k].u);
  }
  EXPECT_EQ(a.track, b.track);
  const SimResult c = run(chain_scenario(Ablation::Full, 4, 40));
  EXPECT_NE(a.steps.back().x, c.steps.back().x);
}

TEST(Simbench, SplitAdvanceAndCopiesContinueTheSameRealization)
{
  const Scenario sc = chain_scenario(Ablation::Full, 1, 40);
  const SimResult whole = run(sc);

  Simulator sim(sc);
  sim.advance(15);
  Simulator copy = sim;
  sim.advance(100);
  copy.advance(100);
  EXPECT_TRUE(sim.finished());
  ASSERT_EQ(sim.result().steps.size(), whole.steps.size());
  ASSERT_EQ(copy.result().steps.size(), whole.steps.size());
  for (std::size_t k = 0; k < whole.steps.size(); ++k)
  {
    EXPECT_EQ(sim.result().steps[k].x, whole.steps[k].x);
    EXPECT_EQ(copy.result().steps[k].u, whole.steps[k].u);
  }
}

TEST(Simbench, MetricsAreSumsOfPerStepTerms)
{
  const SimResult r = run(chain_scenario(Ablation::Full, 2, 60));
  double track = 0.0, constr = 0.0;
  for (const SimStep &s : r.steps)
  {
    track += (s.y - s.y_rd).squaredNorm();
    constr += s.constr;
    EXPECT_GE(s.constr, 0.0);
  }
  EXPECT_NEAR(r.track, track, 1e-12 * (1.0 + track));
  EXPECT_NEAR(r.constr, constr, 1e-12 * (1.0 + constr));
  EXPECT_FALSE(r.diverged);
  EXPECT_EQ(r.nonconverged, 0);
}

TEST(Simbench, CompareNormalizesByFull)
{
  std::vector<Scenario> list;
  for (Ablation a : {Ablation::NoTerm, Ablation::Full, Ablation::NoAdapt})
    list.push_back(chain_scenario(a, 0, 30));
  std::vector<SimResult> res;
  const std::vector<ComparisonRow> rows = compare(list, 2, &res);
  ASSERT_EQ(rows.size(), 3u);
  ASSERT_EQ(res.size(), 3u);
  EXPECT_EQ(rows[1].track_ratio, 1.0);
  for (std::size_t i = 0; i < 3; ++i)
  {
    EXPECT_EQ(rows[i].ablation, list[i].ablation);
    EXPECT_NEAR(rows[i].track_ratio, res[i].track / res[1].track, 1e-14);
    EXPECT_EQ(rows[i].track, run(list[i]).track);
  }
}

TEST(Simbench, CompareRejectsBadLists)
{
  EXPECT_THROW(compare({}), ConfigError);
  EXPECT_THROW(compare({chain_scenario(Ablation::NoTerm, 0, 5)}), ConfigError);
  EXPECT_THROW(compare({chain_scenario(Ablation::Full, 0, 5), chain_scenario(Ablation::NoTerm, 1, 5)}),
               ConfigError);
}

TEST(Simbench, SettlingStepOnSyntheticTrace)
{
  SimResult r;
  const double ys[] = {0.0, 0.5, 0.99, 0.5, 0.995, 0.999, 1.0};
  for (int k = 0; k < 7; ++k)
    r.steps.push_back(synthetic_step(k, ys[k], 1.0));
  // Last violation of |y - 1| < 0.02 is at k = 3.
  EXPECT_EQ(settling_step(r, 0.02), 4);
  // Only k = 0 is off by more than 0.6.
  EXPECT_EQ(settling_step(r, 0.6), 1);
  EXPECT_EQ(settling_step(r, 2.0), 0);
  // Only the final sample is exact.
  EXPECT_EQ(settling_step(r, 1e-6), 6);
  EXPECT_EQ(settling_step(r, 0.0), -1);
  EXPECT_EQ(first_within(r, 0.02), 2);
  EXPECT_EQ(first_within(r, 1e-6), 6);
  EXPECT_EQ(first_within(r, 0.0), -1);
  r.diverged = true;
  EXPECT_EQ(settling_step(r, 0.6), -1);
}

TEST(Simbench, DivergenceStopsTheRun)
{
  Scenario sc = chain_scenario(Ablation::Full, 0, 50);
  sc.divergence_bound = 1e-6;
  const SimResult r = run(sc);
  EXPECT_TRUE(r.diverged);
  EXPECT_LT(r.steps.size(), 50u);
  EXPECT_FALSE(r.diverged_reason.empty());
}

TEST(Simbench, CsvAndJsonOutputs)
{
  const SimResult r = run(chain_scenario(Ablation::NoTerm, 5, 12));
  std::ostringstream os;
  write_csv(r, os);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "# acmpc-sim v1 scenario=" + r.scenario + " ablation=no_term seed=5");
  std::getline(is, line);
  EXPECT_EQ(line.rfind("step,x0,", 0), 0u);
  const auto columns = std::count(line.begin(), line.end(), ',') + 1;
  int rows = 0;
  while (std::getline(is, line))
  {
    EXPECT_EQ(std::count(line.begin(), line.end(), ',') + 1, columns);
    ++rows;
  }
  EXPECT_EQ(rows, 12);

  const nlohmann::json j = nlohmann::json::parse(summary_json(r));
  EXPECT_EQ(j["ablation"], "no_term");
  EXPECT_EQ(j["seed"], 5);
  EXPECT_EQ(j["steps"], 12);
  EXPECT_DOUBLE_EQ(j["track"].get<double>(), r.track);
}

TEST(Simbench, HalvingNoiseDoesNotIncreaseLateTracking)
{
  ChainOptions o;
  o.steps = 200;
  const BenchmarkSetup base = build_msd_chain(o);
  o.noise_amp *= 0.5;
  o.disturbance_amp *= 0.5;
  const BenchmarkSetup quiet = build_msd_chain(o);
  for (std::uint64_t seed : {0u, 1u})
  {
    const double loud = last_quarter_track(run(make_scenario(base, Ablation::Full, seed)));
    const double soft = last_quarter_track(run(make_scenario(quiet, Ablation::Full, seed)));
    EXPECT_LE(soft, loud) << "seed " << seed;
  }
}

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

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace
{

fs::path scratch_dir(const std::string &name)
{
  const fs::path p = fs::temp_directory_path() / ("acmpc_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

fs::path write_config(const fs::path &dir, const std::string &json)
{
  const fs::path p = dir / "config.json";
  std::ofstream(p) << json;
  return p;
}

int run_cli(const std::string &args)
{
  const std::string cmd = std::string(ACMPC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path &p)
{
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

} // namespace

TEST(Cli, CertifyExitCodes)
{
  const fs::path dir = scratch_dir("certify");
  EXPECT_EQ(run_cli("certify --builtin msd"), 0);
  EXPECT_EQ(run_cli("certify --config " + write_config(dir, R"({"M": 1})").string()), 2);
  EXPECT_EQ(run_cli("certify --config " + write_config(dir, R"({"M": 0})").string()), 1);
  EXPECT_EQ(run_cli("certify --config " +
                    write_config(dir, R"({"builtin": "quadrotor", "mode": "semiglobal"})").string()),
            1);
}

TEST(Cli, RejectsBadArguments)
{
  const fs::path dir = scratch_dir("bad");
  EXPECT_EQ(run_cli("certify --builtin pendulum"), 1);
  EXPECT_EQ(run_cli("simulate --ablation fastest --out " + dir.string()), 1);
  EXPECT_EQ(run_cli("certify --config " + write_config(dir, R"({"horizon": 3})").string()), 1);
  EXPECT_EQ(run_cli("compare --out " + dir.string() + " --config " +
                    write_config(dir, R"({"ablations": []})").string()),
            1);
  EXPECT_EQ(run_cli("frobnicate"), 1);
}

TEST(Cli, SimulateIsByteIdenticalAcrossRuns)
{
  const fs::path a = scratch_dir("sim_a"), b = scratch_dir("sim_b");
  const std::string cfg = write_config(a, R"({"steps": 25})").string();
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --seed 7 --out " + a.string()), 0);
  ASSERT_EQ(run_cli("simulate --config " + cfg + " --seed 7 --out " + b.string()), 0);
  const std::string csv_a = slurp(a / "msd_full_seed7.csv");
  ASSERT_FALSE(csv_a.empty());
  EXPECT_EQ(csv_a, slurp(b / "msd_full_seed7.csv"));
  EXPECT_EQ(csv_a.rfind("# acmpc-sim v1", 0), 0u);
  EXPECT_TRUE(fs::exists(a / "msd_full_seed7.json"));

  ASSERT_EQ(run_cli("simulate --config " + cfg + " --seed 8 --out " + b.string()), 0);
  EXPECT_NE(csv_a, slurp(b / "msd_full_seed8.csv"));
}

TEST(Cli, CompareWritesTable)
{
  const fs::path dir = scratch_dir("compare");
  const std::string cfg =
      write_config(dir, R"({"steps": 15, "ablations": ["full", "no_term"]})").string();
  ASSERT_EQ(run_cli("compare --config " + cfg + " --seed 2 --jobs 2 --out " + dir.string()), 0);
  const std::string table = slurp(dir / "msd_compare_seed2.csv");
  EXPECT_NE(table.find("ablation,track,constr,track_ratio,constr_ratio,diverged"),
            std::string::npos);
  EXPECT_NE(table.find("\nfull,"), std::string::npos);
  EXPECT_NE(table.find("\nno_term,"), std::string::npos);
  EXPECT_TRUE(fs::exists(dir / "msd_no_term_seed2.csv"));
}

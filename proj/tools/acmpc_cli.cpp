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

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace acmpc;
namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

struct Flags
{
  std::string config_path;
  std::string builtin;
  std::string ablation;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
  bool as_json = false;
  std::string out_dir;
};

RunConfig resolve(const Flags &f)
{
  RunConfig c = f.config_path.empty() ? RunConfig{} : load_run_config(f.config_path);
  if (!f.builtin.empty())
  {
    if (f.builtin != "msd" && f.builtin != "quadrotor")
      throw ConfigError("--builtin must be msd or quadrotor");
    c.builtin = f.builtin;
  }
  if (!f.ablation.empty())
    c.ablation = parse_ablation(f.ablation);
  if (f.seed)
    c.seed = *f.seed;
  if (!f.out_dir.empty())
    c.output_dir = f.out_dir;
  return c;
}

// Writes through a temporary file so readers never see partial output.
void write_atomic(const fs::path &path, const std::string &content)
{
  fs::create_directories(path.parent_path().empty() ? fs::path(".") : path.parent_path());
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out)
      throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << content;
    if (!out)
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
  }
  fs::rename(tmp, path);
}

std::string stem(const RunConfig &c, Ablation a, std::uint64_t seed)
{
  return c.builtin + "_" + to_string(a) + "_seed" + std::to_string(seed);
}

json report_json(const CertificateReport &r)
{
  json j;
  j["C_rho"] = r.decay.C_rho;
  j["rho"] = r.decay.rho;
  j["C_ell"] = r.decay.C_ell;
  j["decay_source"] = r.decay.source;
  j["gamma"] = r.gamma;
  j["gamma_bar"] = r.gamma_bar;
  j["epsilon_f"] = r.epsilon_f;
  j["alpha"] = std::isfinite(r.alpha) ? json(r.alpha) : json(nullptr);
  j["omega_lower"] = r.omega_lower ? json(*r.omega_lower) : json(nullptr);
  j["N_min"] = r.N_min ? json(*r.N_min) : json(nullptr);
  if (r.J_bar)
    j["J_bar"] = *r.J_bar;
  if (r.c_loc)
    j["c_loc"] = *r.c_loc;
  if (r.regional_N_min)
    j["regional_N_min"] = *r.regional_N_min;
  j["certified"] = r.certified;
  j["note"] = r.note;
  return j;
}

int cmd_certify(const Flags &f)
{
  const RunConfig c = resolve(f);
  const BenchmarkSetup s = build_setup(c);
  CertificateReport rep;
  try
  {
    rep = certify_setup(s);
  }
  catch (const SolverError &e)
  {
    std::cerr << "certify: " << e.what() << "\n";
    if (s.controller.mode == ControllerMode::Semiglobal)
      std::cerr << "certify: the tail rollout does not decay; use regional mode\n";
    return 1;
  }
  const CostWeights &w = s.controller.weights;
  if (f.as_json)
  {
    json j = report_json(rep);
    j["builtin"] = c.builtin;
    j["mode"] = to_string(s.controller.mode);
    j["N"] = w.N;
    j["M"] = w.M;
    j["omega"] = w.omega;
    std::cout << j.dump() << "\n";
  }
  else
  {
    std::cout << "builtin " << c.builtin << " (" << to_string(s.controller.mode) << "), N=" << w.N
              << " M=" << w.M << " omega=" << w.omega << "\n"
              << "  decay: C_rho=" << rep.decay.C_rho << " rho=" << rep.decay.rho
              << " C_ell=" << rep.decay.C_ell << " (" << rep.decay.source << ")\n"
              << "  gamma_N=" << rep.gamma.back() << " gamma_bar=" << rep.gamma_bar << "\n"
              << "  epsilon_f=" << rep.epsilon_f << " alpha=" << rep.alpha << "\n";
    std::cout << "  omega_lower="
              << (rep.omega_lower ? std::to_string(*rep.omega_lower) : std::string("undefined"))
              << " N_min=" << (rep.N_min ? std::to_string(*rep.N_min) : std::string("none"))
              << "\n";
    if (rep.regional_N_min)
      std::cout << "  J_bar=" << *rep.J_bar << " c_loc=" << *rep.c_loc
                << " regional_N_min=" << *rep.regional_N_min << "\n";
    std::cout << "  " << (rep.certified ? "certified" : "NOT certified") << "\n";
  }
  if (!rep.note.empty())
    std::cerr << "certify: " << rep.note << "\n";
  return rep.certified ? 0 : 2;
}

int cmd_simulate(const Flags &f)
{
  const RunConfig c = resolve(f);
  const SimResult r = run(build_scenario(c, c.ablation, c.seed));
  const fs::path dir(c.output_dir);
  std::ostringstream csv;
  write_csv(r, csv);
  write_atomic(dir / (stem(c, c.ablation, c.seed) + ".csv"), csv.str());
  const std::string summary = summary_json(r);
  write_atomic(dir / (stem(c, c.ablation, c.seed) + ".json"), summary + "\n");
  if (f.as_json)
    std::cout << summary << "\n";
  else
    std::cout << c.builtin << " " << to_string(c.ablation) << " seed " << c.seed << ": track "
              << r.track << ", constr " << r.constr << (r.diverged ? ", DIVERGED" : "") << "\n";
  if (r.lms_failures > 0)
    std::cerr << "simulate: LMS inequality violated at " << r.lms_failures << " steps\n";
  if (r.gain_violations > 0)
    std::cerr << "simulate: gain condition violated at " << r.gain_violations << " steps\n";
  if (r.diverged)
  {
    std::cerr << "simulate: " << r.diverged_reason << "\n";
    return 3;
  }
  return 0;
}

int cmd_compare(const Flags &f)
{
  const RunConfig c = resolve(f);
  if (c.ablations.empty())
    throw ConfigError("compare: the ablation list is empty");
  std::vector<Scenario> scenarios;
  for (Ablation a : c.ablations)
    scenarios.push_back(build_scenario(c, a, c.seed));
  std::vector<SimResult> results;
  const std::vector<ComparisonRow> rows = compare(scenarios, f.jobs, &results);

  const fs::path dir(c.output_dir);
  for (const SimResult &r : results)
  {
    std::ostringstream csv;
    write_csv(r, csv);
    write_atomic(dir / (stem(c, r.ablation, c.seed) + ".csv"), csv.str());
  }
  std::ostringstream table;
  write_comparison_csv(rows, table);
  write_atomic(dir / (c.builtin + "_compare_seed" + std::to_string(c.seed) + ".csv"), table.str());

  if (f.as_json)
  {
    json j = json::array();
    for (const ComparisonRow &r : rows)
      j.push_back({{"ablation", to_string(r.ablation)},
                   {"track", r.track},
                   {"constr", r.constr},
                   {"track_ratio", std::isfinite(r.track_ratio) ? json(r.track_ratio) : json(nullptr)},
                   {"constr_ratio", std::isfinite(r.constr_ratio) ? json(r.constr_ratio) : json(nullptr)},
                   {"diverged", r.diverged}});
    std::cout << j.dump() << "\n";
  }
  else
  {
    std::cout << "ablation    Track    Constr\n";
    for (const ComparisonRow &r : rows)
    {
      char buf[128];
      std::snprintf(buf, sizeof(buf), "%-10s %7.2f %9.2f%s\n", to_string(r.ablation).c_str(),
                    r.track_ratio, r.constr_ratio, r.diverged ? "  (diverged)" : "");
      std::cout << buf;
    }
  }
  return 0;
}

double median(std::vector<double> v)
{
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

int cmd_bench(const Flags &f)
{
  const RunConfig c = resolve(f);
  if (c.seeds.empty())
    throw ConfigError("bench: the seed list is empty");
  const fs::path dir(c.output_dir);
  json out;
  out["builtin"] = c.builtin;
  std::ostringstream table;
  table << "# " << kCsvSchema << " bench\n";

  if (c.builtin == "msd")
  {
    std::vector<double> term_track, adapt_constr;
    table << "seed,ablation,track,constr,track_ratio,constr_ratio,diverged\n";
    for (std::uint64_t seed : c.seeds)
    {
      std::vector<Scenario> sc;
      for (Ablation a : {Ablation::Full, Ablation::NoTerm, Ablation::NoAdapt})
        sc.push_back(build_scenario(c, a, seed));
      const auto rows = compare(sc, f.jobs);
      for (const ComparisonRow &r : rows)
        table << seed << "," << to_string(r.ablation) << "," << r.track << "," << r.constr << ","
              << r.track_ratio << "," << r.constr_ratio << "," << (r.diverged ? 1 : 0) << "\n";
      term_track.push_back(rows[1].track_ratio);
      adapt_constr.push_back(rows[2].constr_ratio);
    }
    out["median_no_term_track_ratio"] = median(term_track);
    out["median_no_adapt_constr_ratio"] = median(adapt_constr);
  }
  else
  {
    table << "ablation,steps,first_step_1cm,settle_step_1cm,diverged,track,constr\n";
    std::vector<Scenario> sc;
    for (Ablation a : {Ablation::Full, Ablation::NoTerm, Ablation::NoAdapt})
      sc.push_back(build_scenario(c, a, c.seed));
    std::vector<SimResult> res;
    compare(sc, f.jobs, &res);
    for (const SimResult &r : res)
    {
      const int first = first_within(r, 0.01);
      const int settle = settling_step(r, 0.01);
      table << to_string(r.ablation) << "," << r.steps.size() << "," << first << "," << settle << ","
            << (r.diverged ? 1 : 0) << "," << r.track << "," << r.constr << "\n";
      out[to_string(r.ablation)] = {
          {"first_step_1cm", first}, {"settle_step_1cm", settle}, {"diverged", r.diverged}};
    }
  }
  write_atomic(dir / (c.builtin + "_bench.csv"), table.str());
  if (f.as_json)
    std::cout << out.dump() << "\n";
  else
    std::cout << table.str();
  return 0;
}

} // namespace

int main(int argc, char **argv)
{
  CLI::App app{"Adaptive MPC toolkit: certificates, closed-loop simulation and ablations"};
  app.require_subcommand(1);
  Flags flags;
  auto add_common = [&flags](CLI::App *sub) {
    sub->add_option("--config", flags.config_path, "JSON run configuration");
    sub->add_option("--builtin", flags.builtin, "Builtin benchmark (msd or quadrotor)");
    sub->add_option("--ablation", flags.ablation, "full, no_term or no_adapt");
    sub->add_option("--seed", flags.seed, "Random seed");
    sub->add_option("--jobs", flags.jobs, "Parallel scenario runs")->check(CLI::PositiveNumber);
    sub->add_flag("--json", flags.as_json, "Machine-readable JSON on stdout");
    sub->add_option("--out", flags.out_dir, "Output directory");
  };
  CLI::App *certify = app.add_subcommand("certify", "Stability certificate for a configuration");
  CLI::App *simulate = app.add_subcommand("simulate", "Run one closed-loop scenario");
  CLI::App *comp = app.add_subcommand("compare", "Run and normalize an ablation set");
  CLI::App *bench = app.add_subcommand("bench", "Regenerate the benchmark tables");
  for (CLI::App *s : {certify, simulate, comp, bench})
    add_common(s);

  try
  {
    app.parse(argc, argv);
  }
  catch (const CLI::ParseError &e)
  {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try
  {
    if (certify->parsed())
      return cmd_certify(flags);
    if (simulate->parsed())
      return cmd_simulate(flags);
    if (comp->parsed())
      return cmd_compare(flags);
    return cmd_bench(flags);
  }
  catch (const std::exception &e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}

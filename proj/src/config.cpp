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

#include "acmpc/lqr.hpp"

#include <json.hpp>

#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace acmpc
{

namespace
{

using nlohmann::json;

template <typename T>
T get_as(const json &j, const std::string &key)
{
  try
  {
    return j.at(key).get<T>();
  }
  catch (const json::exception &)
  {
    throw ConfigError("config: key '" + key + "' has the wrong type");
  }
}

ControllerMode parse_mode(const std::string &s)
{
  if (s == "semiglobal")
    return ControllerMode::Semiglobal;
  if (s == "regional")
    return ControllerMode::Regional;
  throw ConfigError("config: unknown mode '" + s + "' (expected semiglobal or regional)");
}

std::vector<Setpoint> schedule_setpoints(const BenchmarkSetup &s, const Vec &theta)
{
  std::vector<Setpoint> out;
  for (const ReferenceSegment &seg : s.schedule)
  {
    TrackingTarget t = s.controller.target;
    t.y_d = seg.y_d;
    try
    {
      Setpoint sp = optimal_setpoint(*s.model, theta, t, s.controller.constraints);
      if (steady_state_residual(*s.model, theta, sp.x, sp.u) <= 1e-6)
        out.push_back(std::move(sp));
    }
    catch (const SolverError &)
    {
      // No admissible steady state for these parameters.
    }
  }
  return out;
}

} // namespace

std::string to_string(ControllerMode mode)
{
  return mode == ControllerMode::Regional ? "regional" : "semiglobal";
}

RunConfig parse_run_config(const std::string &json_text)
{
  json j;
  try
  {
    j = json::parse(json_text);
  }
  catch (const json::parse_error &e)
  {
    throw ConfigError(std::string("config: invalid JSON: ") + e.what());
  }
  if (!j.is_object())
    throw ConfigError("config: top level must be an object");

  static const std::set<std::string> known = {
      "builtin", "mode",      "ablation",        "ablations", "seed",           "seeds",
      "steps",   "N",         "M",               "omega",     "noise_amp",      "disturbance_amp",
      "drift_amp", "J_bar",   "estimate_factor", "truth_seed", "output_dir"};
  for (const auto &item : j.items())
    if (!known.count(item.key()))
      throw ConfigError("config: unknown key '" + item.key() + "'");

  RunConfig c;
  if (j.contains("builtin"))
    c.builtin = get_as<std::string>(j, "builtin");
  if (c.builtin != "msd" && c.builtin != "quadrotor")
    throw ConfigError("config: builtin must be 'msd' or 'quadrotor'");
  if (j.contains("mode"))
    c.mode = parse_mode(get_as<std::string>(j, "mode"));
  if (j.contains("ablation"))
    c.ablation = parse_ablation(get_as<std::string>(j, "ablation"));
  if (j.contains("ablations"))
  {
    c.ablations.clear();
    for (const std::string &a : get_as<std::vector<std::string>>(j, "ablations"))
      c.ablations.push_back(parse_ablation(a));
  }
  if (j.contains("seed"))
    c.seed = get_as<std::uint64_t>(j, "seed");
  if (j.contains("seeds"))
    c.seeds = get_as<std::vector<std::uint64_t>>(j, "seeds");
  auto opt_int = [&](const char *k, std::optional<int> &dst, int lo) {
    if (!j.contains(k))
      return;
    dst = get_as<int>(j, k);
    if (*dst < lo)
      throw ConfigError(std::string("config: '") + k + "' must be at least " + std::to_string(lo));
  };
  auto opt_num = [&](const char *k, std::optional<double> &dst, double lo) {
    if (!j.contains(k))
      return;
    dst = get_as<double>(j, k);
    if (!(*dst >= lo))
      throw ConfigError(std::string("config: '") + k + "' is out of range");
  };
  opt_int("steps", c.steps, 0);
  opt_int("N", c.N, 1);
  opt_int("M", c.M, 0);
  opt_num("omega", c.omega, std::numeric_limits<double>::min());
  opt_num("noise_amp", c.noise_amp, 0.0);
  opt_num("disturbance_amp", c.disturbance_amp, 0.0);
  opt_num("drift_amp", c.drift_amp, 0.0);
  opt_num("J_bar", c.J_bar, std::numeric_limits<double>::min());
  opt_num("estimate_factor", c.estimate_factor, std::numeric_limits<double>::min());
  if (j.contains("truth_seed"))
    c.truth_seed = get_as<std::uint64_t>(j, "truth_seed");
  if (j.contains("output_dir"))
    c.output_dir = get_as<std::string>(j, "output_dir");
  return c;
}

RunConfig load_run_config(const std::string &path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str());
}

BenchmarkSetup build_setup(const RunConfig &c)
{
  BenchmarkSetup s;
  if (c.builtin == "msd")
  {
    ChainOptions o;
    if (c.steps)
      o.steps = *c.steps;
    if (c.noise_amp)
      o.noise_amp = *c.noise_amp;
    if (c.disturbance_amp)
      o.disturbance_amp = *c.disturbance_amp;
    if (c.truth_seed)
      o.truth_seed = *c.truth_seed;
    s = build_msd_chain(o);
  }
  else if (c.builtin == "quadrotor")
  {
    QuadrotorOptions o;
    if (c.steps)
      o.steps = *c.steps;
    if (c.noise_amp)
      o.noise_amp = *c.noise_amp;
    if (c.disturbance_amp)
      o.wind_amp = *c.disturbance_amp;
    if (c.estimate_factor)
      o.thrust_factor = o.torque_factor = *c.estimate_factor;
    if (c.J_bar)
      o.J_bar = *c.J_bar;
    s = build_quadrotor(o);
  }
  else
  {
    throw ConfigError("config: builtin must be 'msd' or 'quadrotor'");
  }
  if (c.mode)
    s.controller.mode = *c.mode;
  if (c.N)
    s.controller.weights.N = *c.N;
  if (c.M)
    s.controller.weights.M = *c.M;
  if (c.omega)
    s.controller.weights.omega = *c.omega;
  if (c.J_bar)
    s.controller.J_bar = *c.J_bar;
  if (s.controller.mode == ControllerMode::Regional && s.controller.J_bar <= 0.0)
    s.controller.J_bar = 50.0;
  return s;
}

Scenario build_scenario(const RunConfig &c, Ablation ablation, std::uint64_t seed)
{
  Scenario sc = make_scenario(build_setup(c), ablation, seed);
  if (c.drift_amp)
    sc.drift_amp = *c.drift_amp;
  return sc;
}

double regional_c_loc(const BenchmarkSetup &s)
{
  const ControllerConfig &c = s.controller;
  const Mat Qinv = c.weights.Q.inverse();
  double best = std::numeric_limits<double>::infinity();
  for (const Vec &th : s.theta_samples)
  {
    for (const Setpoint &sp : schedule_setpoints(s, th))
    {
      LqrResult lqr;
      try
      {
        make_lqr_feedback(*s.model, th, sp.x, sp.u, c.weights.Q, c.weights.R, c.constraints.u_lo,
                          c.constraints.u_hi, &lqr);
      }
      catch (const SolverError &)
      {
        continue;
      }
      for (int i = 0; i < s.model->n_u; ++i)
      {
        const double margin =
            std::min(sp.u(i) - c.constraints.u_lo(i), c.constraints.u_hi(i) - sp.u(i));
        const double gain = lqr.K.row(i).dot(Qinv * lqr.K.row(i).transpose());
        if (gain > 0.0)
          best = std::min(best, margin * margin / gain);
      }
    }
  }
  if (!std::isfinite(best) || best <= 0.0)
    throw SolverError("regional certificate: no admissible setpoint sample for c_loc");
  return best;
}

CertificateReport certify_setup(const BenchmarkSetup &s)
{
  const ControllerConfig &c = s.controller;
  DecayOptions opts;
  std::vector<Setpoint> setpoints;
  std::vector<Vec> thetas;
  for (const Vec &th : s.theta_samples)
  {
    std::vector<Setpoint> sps = schedule_setpoints(s, th);
    if (sps.empty())
      continue;
    thetas.push_back(th);
    if (setpoints.empty())
      setpoints = sps;
  }
  if (thetas.empty())
    throw SolverError("certificate: no parameter sample admits a steady state");

  if (c.mode == ControllerMode::Regional)
  {
    const Mat Q = c.weights.Q, R = c.weights.R;
    const ParametricModel *model = s.model.get();
    const Vec lo = c.constraints.u_lo, hi = c.constraints.u_hi;
    opts.tail = [model, Q, R, lo, hi](const Vec &th, const Setpoint &sp) {
      return make_lqr_feedback(*model, th, sp.x, sp.u, Q, R, lo, hi);
    };
    // Each rollout uses a setpoint that is steady for its own parameters; the
    // certificate takes the worst rate and constant over the samples.
    DecayEstimate worst;
    worst.rho = 0.0;
    worst.C_ell = 0.0;
    worst.C_rho = 1.0;
    for (const Vec &th : thetas)
    {
      const DecayEstimate d =
          estimate_decay(*s.model, {th}, schedule_setpoints(s, th), c.weights, c.constraints, opts);
      worst.rho = std::max(worst.rho, d.rho);
      worst.C_ell = std::max(worst.C_ell, d.C_ell);
      worst.C_rho = std::max(worst.C_rho, d.C_rho);
    }
    CertificateReport rep = certify(worst, c.weights);
    rep.J_bar = c.J_bar;
    rep.c_loc = regional_c_loc(s);
    rep.regional_N_min = regional_minimal_horizon(worst, c.weights, c.J_bar, *rep.c_loc);
    return rep;
  }
  const DecayEstimate d = estimate_decay(*s.model, thetas, setpoints, c.weights, c.constraints, opts);
  return certify(d, c.weights);
}

} // namespace acmpc

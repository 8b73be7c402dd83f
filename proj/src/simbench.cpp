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

#include "acmpc/simbench.hpp"

#include "acmpc/random.hpp"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <thread>

namespace acmpc
{

namespace
{

enum Channel : std::uint64_t
{
  kNoise = 1,
  kDisturbance = 2,
  kDrift = 3
};

Vec uniform_box(std::uint64_t seed, int k, Channel ch, const Vec &lo, const Vec &hi)
{
  Vec out(lo.size());
  for (int i = 0; i < lo.size(); ++i)
    out(i) = lo(i) + (hi(i) - lo(i)) * keyed_uniform(seed, static_cast<std::uint64_t>(k), ch,
                                                       static_cast<std::uint64_t>(i));
  return out;
}

LmsState initial_lms(const Scenario &sc)
{
  LmsState lms;
  lms.theta_hat = sc.theta_hat0;
  lms.theta_set = sc.theta_set;
  const int p = sc.model->n_theta;
  if (sc.ablation == Ablation::NoAdapt)
    lms.gamma = Mat::Zero(p, p);
  else if (sc.gamma)
    lms.gamma = *sc.gamma;
  else
    lms.gamma = design_gain(*sc.model, sc.gain_state_lo, sc.gain_state_hi, sc.controller.constraints,
                            sc.v_lo, sc.v_hi)
                    .gamma;
  return lms;
}

ControllerConfig ablated(ControllerConfig c, Ablation a)
{
  if (a == Ablation::NoTerm)
    c.weights.M = 0;
  return c;
}

void put(std::string &line, double v)
{
  char buf[32];
  std::snprintf(buf, sizeof(buf), ",%.10g", v);
  line += buf;
}

void put_vec(std::string &line, const Vec &v)
{
  for (int i = 0; i < v.size(); ++i)
    put(line, v(i));
}

nlohmann::json finite_or_null(double v)
{
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

std::string to_string(Ablation a)
{
  switch (a)
  {
  case Ablation::Full:
    return "full";
  case Ablation::NoTerm:
    return "no_term";
  case Ablation::NoAdapt:
    return "no_adapt";
  }
  return "full";
}

Ablation parse_ablation(const std::string &name)
{
  if (name == "full")
    return Ablation::Full;
  if (name == "no_term")
    return Ablation::NoTerm;
  if (name == "no_adapt")
    return Ablation::NoAdapt;
  throw ConfigError("unknown ablation '" + name + "' (expected full, no_term or no_adapt)");
}

void Scenario::validate() const
{
  require(model != nullptr, "scenario: model is missing");
  model->validate();
  require(steps >= 0, "scenario: steps must be nonnegative");
  require(theta_set.dim() == model->n_theta, "scenario: parameter set has wrong dimension");
  require(theta_hat0.size() == model->n_theta && theta_true.size() == model->n_theta,
          "scenario: parameter vectors have wrong size");
  require(theta_set.contains(theta_hat0), "scenario: initial estimate outside the parameter set");
  require(theta_set.contains(theta_true), "scenario: true parameters outside the parameter set");
  require(x0.size() == model->n_x, "scenario: x0 has wrong size");
  require(w_lo.size() == model->n_w && w_hi.size() == model->n_w,
          "scenario: disturbance box has wrong size");
  require(v_lo.size() == model->n_x && v_hi.size() == model->n_x,
          "scenario: noise box has wrong size");
  require((w_lo.array() <= w_hi.array()).all() && (v_lo.array() <= v_hi.array()).all(),
          "scenario: box bounds are inverted");
  require(drift_amp >= 0.0, "scenario: drift_amp must be nonnegative");
  require(divergence_bound > 0.0, "scenario: divergence_bound must be positive");
  require(!schedule.empty() || steps == 0, "scenario: reference schedule is empty");
  for (const ReferenceSegment &s : schedule)
    require(s.y_d.size() == model->n_y, "scenario: reference has wrong size");
  if (gamma)
    require(gamma->rows() == model->n_theta && gamma->cols() == model->n_theta,
            "scenario: gain has wrong shape");
  else if (ablation != Ablation::NoAdapt)
    require(gain_state_lo.size() == model->n_x && gain_state_hi.size() == model->n_x,
            "scenario: gain state box has wrong size");
  ablated(controller, ablation).validate(*model);
}

Scenario make_scenario(const BenchmarkSetup &setup, Ablation ablation, std::uint64_t seed)
{
  Scenario sc;
  sc.name = setup.name;
  sc.model = setup.model;
  sc.theta_set = setup.theta_set;
  sc.theta_hat0 = setup.theta_hat0;
  sc.theta_true = setup.theta_true;
  sc.x0 = setup.x0;
  sc.w_lo = setup.w_lo;
  sc.w_hi = setup.w_hi;
  sc.v_lo = setup.v_lo;
  sc.v_hi = setup.v_hi;
  sc.schedule = setup.schedule;
  sc.steps = setup.steps;
  sc.controller = setup.controller;
  sc.gain_state_lo = setup.gain_state_lo;
  sc.gain_state_hi = setup.gain_state_hi;
  sc.ablation = ablation;
  sc.seed = seed;
  sc.divergence_bound = setup.divergence_bound;
  return sc;
}

double SimResult::wall_ms_per_step() const
{
  return steps.empty() ? 0.0 : wall_ms / static_cast<double>(steps.size());
}

Simulator::Simulator(Scenario scenario)
    : sc_((scenario.validate(), std::move(scenario))),
      ctrl_(sc_.model, initial_lms(sc_), ablated(sc_.controller, sc_.ablation))
{
  result_.scenario = sc_.name;
  result_.ablation = sc_.ablation;
  result_.seed = sc_.seed;
  result_.mu = ctrl_.lms().gamma.diagonal().size() > 0 ? ctrl_.lms().gamma.diagonal().maxCoeff() : 0.0;
  result_.theta_hat_final = sc_.theta_hat0;
  result_.last_state = sc_.x0;
  x_ = sc_.x0;
  theta_ = sc_.theta_true;
}

Vec Simulator::noise(int k) const { return uniform_box(sc_.seed, k, kNoise, sc_.v_lo, sc_.v_hi); }

Vec Simulator::disturbance(int k) const
{
  return uniform_box(sc_.seed, k, kDisturbance, sc_.w_lo, sc_.w_hi);
}

Vec Simulator::reference(int k) const
{
  Vec y_d = sc_.schedule.front().y_d;
  for (const ReferenceSegment &s : sc_.schedule)
    if (s.start <= k)
      y_d = s.y_d;
  return y_d;
}

const Vec &Simulator::reachable_output(const Vec &y_d)
{
  const bool hit = yrd_.size() > 0 && yrd_theta_.size() == theta_.size() && yrd_theta_ == theta_ &&
                   yrd_yd_ == y_d;
  if (!hit)
  {
    TrackingTarget t = sc_.controller.target;
    t.y_d = y_d;
    yrd_ = optimal_setpoint(*sc_.model, theta_, t, sc_.controller.constraints).y;
    yrd_theta_ = theta_;
    yrd_yd_ = y_d;
  }
  return yrd_;
}

void Simulator::advance(int n)
{
  const ParametricModel &m = *sc_.model;
  const bool adaptive = ctrl_.lms().gamma.cwiseAbs().maxCoeff() > 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int i = 0; i < n && !finished(); ++i)
  {
    const int k = k_;
    SimStep st;
    st.k = k;
    st.x = x_;
    const Vec v = noise(k);
    st.x_hat = x_ + v;

    if (k > 0 && sc_.check_lms && adaptive)
    {
      st.lms = lms_diagnostics(lms_prev_, m, theta_prev_, theta_, x_prev_, u_prev_, w_prev_,
                               v_prev_, v);
      if (!(st.lms->lyap_ok && st.lms->step_ok && st.lms->noise_ok))
        ++result_.lms_failures;
    }

    st.y_d = reference(k);
    if (k == 0 || st.y_d != ctrl_.config().target.y_d)
    {
      TrackingTarget t = ctrl_.config().target;
      t.y_d = st.y_d;
      ctrl_.set_target(t);
    }
    try
    {
      st.record = ctrl_.step(st.x_hat);
    }
    catch (const SolverError &e)
    {
      result_.diverged = true;
      result_.diverged_reason = std::string("solver failure: ") + e.what();
      break;
    }
    if (st.record.gain_violation)
      ++result_.gain_violations;
    if (!st.record.converged)
      ++result_.nonconverged;
    lms_prev_ = ctrl_.lms();

    st.u = st.record.u_applied;
    st.y = m.eval_h(x_, st.u, theta_);
    st.y_rd = reachable_output(st.y_d);
    st.theta_err = (st.record.theta_hat - theta_).norm();
    st.track = (st.y - st.y_rd).squaredNorm();
    st.constr = constraint_distance_sq(x_, sc_.controller.constraints);
    result_.track += st.track;
    result_.constr += st.constr;

    const Vec w = disturbance(k);
    const Vec x_next = m.eval_f(x_, st.u, theta_, w);
    Vec theta_next = theta_;
    if (sc_.drift_amp > 0.0)
    {
      const Vec amp = Vec::Constant(theta_.size(), sc_.drift_amp);
      const Vec step = uniform_box(sc_.seed, k, kDrift, -amp, amp);
      if (sc_.theta_set.kind == ParameterSet::Kind::Box)
        theta_next = (theta_ + step).cwiseMax(sc_.theta_set.lo).cwiseMin(sc_.theta_set.hi);
      else if (sc_.theta_set.contains(theta_ + step))
        theta_next = theta_ + step;
    }

    x_prev_ = x_;
    u_prev_ = st.u;
    w_prev_ = w;
    v_prev_ = v;
    theta_prev_ = theta_;
    result_.theta_hat_final = st.record.theta_hat;
    result_.steps.push_back(std::move(st));
    ++k_;

    result_.last_state = x_;
    if (!x_next.allFinite() || x_next.norm() > sc_.divergence_bound)
    {
      result_.diverged = true;
      result_.diverged_reason = x_next.allFinite() ? "state norm exceeded the divergence bound"
                                                   : "non-finite state";
      break;
    }
    x_ = x_next;
    theta_ = theta_next;
    result_.last_state = x_;
  }
  result_.wall_ms +=
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

SimResult run(const Scenario &scenario)
{
  Simulator sim(scenario);
  sim.advance(scenario.steps);
  return sim.result();
}

std::vector<ComparisonRow> compare(const std::vector<Scenario> &scenarios, int jobs,
                                   std::vector<SimResult> *results)
{
  if (scenarios.empty())
    throw ConfigError("compare: the ablation list is empty");
  int full = -1;
  for (std::size_t i = 0; i < scenarios.size(); ++i)
  {
    if (scenarios[i].seed != scenarios.front().seed)
      throw ConfigError("compare: all scenarios must share one seed");
    if (scenarios[i].ablation == Ablation::Full && full < 0)
      full = static_cast<int>(i);
  }
  if (full < 0)
    throw ConfigError("compare: the ablation list must contain 'full'");

  std::vector<SimResult> res(scenarios.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next++; i < scenarios.size(); i = next++)
      res[i] = run(scenarios[i]);
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(scenarios.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n_threads; ++t)
    pool.emplace_back(worker);
  worker();
  for (std::thread &t : pool)
    t.join();

  std::vector<ComparisonRow> rows;
  const SimResult &ref = res[static_cast<std::size_t>(full)];
  for (const SimResult &r : res)
  {
    ComparisonRow row;
    row.ablation = r.ablation;
    row.track = r.track;
    row.constr = r.constr;
    row.track_ratio = ref.track > 0.0 ? r.track / ref.track : (r.track > 0.0 ? INFINITY : 1.0);
    row.constr_ratio = ref.constr > 0.0 ? r.constr / ref.constr : (r.constr > 0.0 ? INFINITY : 1.0);
    row.diverged = r.diverged;
    rows.push_back(row);
  }
  if (results)
    *results = std::move(res);
  return rows;
}

int settling_step(const SimResult &result, double tol)
{
  if (result.diverged || result.steps.empty())
    return -1;
  int k = static_cast<int>(result.steps.size());
  while (k > 0)
  {
    const SimStep &s = result.steps[static_cast<std::size_t>(k - 1)];
    if ((s.y - s.y_d).norm() >= tol)
      break;
    --k;
  }
  return k == static_cast<int>(result.steps.size()) ? -1 : k;
}

int first_within(const SimResult &result, double tol)
{
  for (const SimStep &s : result.steps)
    if ((s.y - s.y_d).norm() < tol)
      return s.k;
  return -1;
}

void write_csv(const SimResult &result, std::ostream &os)
{
  os << "# " << kCsvSchema << " scenario=" << result.scenario
     << " ablation=" << to_string(result.ablation) << " seed=" << result.seed << "\n";
  if (result.steps.empty())
  {
    os << "step\n";
    return;
  }
  const SimStep &f = result.steps.front();
  std::string head = "step";
  auto names = [&head](const char *p, long n) {
    for (long i = 0; i < n; ++i)
      head += "," + std::string(p) + std::to_string(i);
  };
  names("x", f.x.size());
  names("u", f.u.size());
  names("y", f.y.size());
  names("y_d", f.y_d.size());
  names("y_rd", f.y_rd.size());
  head += ",theta_err,J_star";
  names("y_s", f.record.setpoint.y.size());
  head += ",sublevel_flag";
  names("slack", f.record.slacks.rows());
  head += ",track,constr,lms_lyap,lms_step,lms_noise,converged\n";
  os << head;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (const SimStep &s : result.steps)
  {
    std::string line = std::to_string(s.k);
    put_vec(line, s.x);
    put_vec(line, s.u);
    put_vec(line, s.y);
    put_vec(line, s.y_d);
    put_vec(line, s.y_rd);
    put(line, s.theta_err);
    put(line, s.record.J_star);
    put_vec(line, s.record.setpoint.y);
    line += s.record.sublevel_flag ? ",1" : ",0";
    if (s.record.slacks.cols() > 0)
      put_vec(line, s.record.slacks.col(0));
    put(line, s.track);
    put(line, s.constr);
    put(line, s.lms ? s.lms->lyap_slack : nan);
    put(line, s.lms ? s.lms->step_slack : nan);
    put(line, s.lms ? s.lms->noise_slack : nan);
    line += s.record.converged ? ",1\n" : ",0\n";
    os << line;
  }
}

void write_comparison_csv(const std::vector<ComparisonRow> &rows, std::ostream &os)
{
  os << "# " << kCsvSchema << " comparison\n";
  os << "ablation,track,constr,track_ratio,constr_ratio,diverged\n";
  for (const ComparisonRow &r : rows)
  {
    std::string line = to_string(r.ablation);
    put(line, r.track);
    put(line, r.constr);
    put(line, r.track_ratio);
    put(line, r.constr_ratio);
    line += r.diverged ? ",1\n" : ",0\n";
    os << line;
  }
}

std::string summary_json(const SimResult &result)
{
  nlohmann::json j;
  j["scenario"] = result.scenario;
  j["ablation"] = to_string(result.ablation);
  j["seed"] = result.seed;
  j["steps"] = result.steps.size();
  j["track"] = finite_or_null(result.track);
  j["constr"] = finite_or_null(result.constr);
  j["diverged"] = result.diverged;
  j["wall_ms_per_step"] = result.wall_ms_per_step();
  return j.dump();
}

} // namespace acmpc

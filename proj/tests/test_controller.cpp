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
#include "acmpc/config.hpp"
#include "acmpc/controller.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

using namespace acmpc;

namespace
{

// x+ = theta x + u, y = x.
ModelPtr scalar_model()
{
  LinearForm lf;
  lf.A = [](const Vec &th) { return Mat::Constant(1, 1, th(0)); };
  lf.B = [](const Vec &) { return Mat::Ones(1, 1); };
  lf.E = Mat::Ones(1, 1);
  lf.C = Mat::Ones(1, 1);
  lf.D = Mat::Zero(1, 1);
  lf.c = Vec::Zero(1);
  auto m = std::make_shared<ParametricModel>(make_linear_model("scalar", 1, 1, 1, lf));
  m->L_f = 1.0;
  return m;
}

ControllerConfig scalar_config(double y_d)
{
  ControllerConfig c;
  c.weights.Q = Mat::Constant(1, 1, 1.0);
  c.weights.R = Mat::Constant(1, 1, 0.1);
  c.weights.N = 5;
  c.weights.M = 10;
  c.weights.omega = 2.0;
  c.constraints.u_lo = Vec::Constant(1, -5.0);
  c.constraints.u_hi = Vec::Constant(1, 5.0);
  c.constraints.D = Mat(0, 1);
  c.constraints.d = Vec(0);
  c.constraints.q_xi = Vec(0);
  c.target.y_d = Vec::Constant(1, y_d);
  c.target.T = Mat::Constant(1, 1, 1e3);
  return c;
}

LmsState scalar_lms(double theta_hat, double gamma)
{
  LmsState s;
  s.theta_hat = Vec::Constant(1, theta_hat);
  s.gamma = Mat::Constant(1, 1, gamma);
  s.theta_set = ParameterSet::box(Vec::Constant(1, -0.9), Vec::Constant(1, 0.9));
  return s;
}

} // namespace

TEST(Controller, EstimateFollowsScalarUpdateFormula)
{
  const double theta_true = 0.6, gamma = 0.05;
  AdaptiveController ctrl(scalar_model(), scalar_lms(0.2, gamma), scalar_config(1.0));
  Vec x = Vec::Constant(1, 0.5);
  double theta_hat = 0.2;
  for (int k = 0; k < 6; ++k)
  {
    const StepRecord r = ctrl.step(x);
    EXPECT_NEAR(r.theta_hat(0), theta_hat, 1e-14);
    EXPECT_EQ(r.lms_updated, k > 0);
    const double u = r.u_applied(0);
    const double x_next = theta_true * x(0) + u;
    // theta+ = clip(theta + gamma x (x+ - theta x - u)).
    theta_hat = std::clamp(theta_hat + gamma * x(0) * (x_next - theta_hat * x(0) - u), -0.9, 0.9);
    x(0) = x_next;
  }
  // The last transition is applied on the next call.
  EXPECT_NEAR(ctrl.step(x).theta_hat(0), theta_hat, 1e-14);
  EXPECT_NEAR(ctrl.lms().theta_hat(0), theta_hat, 1e-14);
  EXPECT_EQ(ctrl.steps_taken(), 7);
}

TEST(Controller, ScalarLoopReachesTarget)
{
  const double theta_true = 0.6;
  AdaptiveController ctrl(scalar_model(), scalar_lms(theta_true, 0.0), scalar_config(1.0));
  Vec x = Vec::Constant(1, 0.0);
  for (int k = 0; k < 60; ++k)
  {
    const StepRecord r = ctrl.step(x);
    ASSERT_TRUE(r.converged);
    x(0) = theta_true * x(0) + r.u_applied(0);
  }
  EXPECT_NEAR(x(0), 1.0, 1e-6);
  // Steady input u = (1 - theta) y.
  EXPECT_NEAR(ctrl.last_solution()->setpoint.u(0), 0.4, 1e-6);

  TrackingTarget t = ctrl.config().target;
  t.y_d(0) = -2.0;
  ctrl.set_target(t);
  for (int k = 0; k < 60; ++k)
    x(0) = theta_true * x(0) + ctrl.step(x).u_applied(0);
  EXPECT_NEAR(x(0), -2.0, 1e-6);
}

TEST(Controller, AppliedInputRespectsBounds)
{
  AdaptiveController ctrl(scalar_model(), scalar_lms(0.6, 0.0), scalar_config(1.0));
  Vec x = Vec::Constant(1, 0.0);
  TrackingTarget t = ctrl.config().target;
  t.y_d(0) = 100.0;  // needs u_s = 40, far outside [-5, 5]
  ctrl.set_target(t);
  for (int k = 0; k < 30; ++k)
  {
    const StepRecord r = ctrl.step(x);
    EXPECT_LE(std::abs(r.u_applied(0)), 5.0 + 1e-9);
    x(0) = 0.6 * x(0) + r.u_applied(0);
  }
  // Closest reachable steady state: u_s = 5, x_s = 12.5.
  EXPECT_NEAR(x(0), 12.5, 1e-4);
}

TEST(Controller, RejectsInvalidConfiguration)
{
  EXPECT_THROW(AdaptiveController(nullptr, scalar_lms(0.2, 0.1), scalar_config(1.0)),
               ConfigError);
  LmsState bad = scalar_lms(0.2, 0.1);
  bad.theta_hat = Vec::Zero(2);
  EXPECT_THROW(AdaptiveController(scalar_model(), bad, scalar_config(1.0)), ConfigError);
  ControllerConfig regional = scalar_config(1.0);
  regional.mode = ControllerMode::Regional;
  regional.J_bar = 0.0;
  EXPECT_THROW(AdaptiveController(scalar_model(), scalar_lms(0.2, 0.1), regional), ConfigError);
}

TEST(Controller, ChainNominalDecreaseHolds)
{
  const BenchmarkSetup s = build_msd_chain();
  const CertificateReport cert = certify_setup(s);
  ASSERT_TRUE(cert.certified);
  LmsState lms{s.theta_true, Mat::Zero(s.theta_true.size(), s.theta_true.size()), s.theta_set};
  AdaptiveController ctrl(s.model, lms, s.controller);
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> pos(-0.5, 0.5), vel(-0.2, 0.2);
  const int n = s.model->n_x / 2;
  for (int trial = 0; trial < 10; ++trial)
  {
    Vec x(s.model->n_x);
    for (int i = 0; i < n; ++i)
    {
      x(i) = pos(rng);
      x(n + i) = vel(rng);
    }
    EXPECT_LE(nominal_decrease_check(ctrl, *s.model, s.theta_true, x, cert.alpha), 1e-8)
        << "trial " << trial;
  }
}

TEST(Controller, RegionalTailIsSynthesizedOnce)
{
  BenchmarkSetup s = build_quadrotor();
  ASSERT_EQ(s.controller.mode, ControllerMode::Regional);
  const int p = static_cast<int>(s.theta_hat0.size());
  LmsState lms{s.theta_hat0, Mat::Zero(p, p), s.theta_set};
  AdaptiveController ctrl(s.model, lms, s.controller);
  const StepRecord r0 = ctrl.step(s.x0);
  EXPECT_TRUE(r0.tail_resynthesized);
  EXPECT_EQ(ctrl.tail().kind, TailPolicy::Kind::Feedback);
  EXPECT_EQ(ctrl.tail().K.rows(), s.model->n_u);
  EXPECT_EQ(ctrl.tail().K.cols(), s.model->n_x);
  EXPECT_EQ(r0.sublevel_flag, r0.J_star <= s.controller.J_bar);
  // Frozen estimate and unchanged setpoint: the tail is reused.
  const Vec x1 = s.model->eval_f(s.x0, r0.u_applied, s.theta_true);
  const StepRecord r1 = ctrl.step(x1);
  EXPECT_FALSE(r1.tail_resynthesized && (r1.setpoint.x - r0.setpoint.x).norm() < 1e-6);
  EXPECT_GE(r1.tail_clips, 0);
}

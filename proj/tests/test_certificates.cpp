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
#include "acmpc/certificates.hpp"
#include "acmpc/random.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace acmpc;

namespace
{

DecayEstimate decay(double C, double rho)
{
  DecayEstimate d;
  d.C_ell = C;
  d.rho = rho;
  return d;
}

CostWeights weights(int N, int M, double omega, int n = 1)
{
  CostWeights w;
  w.Q = Mat::Identity(n, n);
  w.R = Mat::Identity(1, 1);
  w.N = N;
  w.M = M;
  w.omega = omega;
  return w;
}

// Direct evaluation of the decrease constant without any rescaling.
double alpha_direct(const std::vector<double> &g, double eps)
{
  const int N = static_cast<int>(g.size());
  double p = 1.0, pm = 1.0;
  for (int j = 1; j <= N - 1; ++j)
  {
    p *= g[N - j];
    pm *= g[N - j] - 1.0;
  }
  return 1.0 - eps * (g[N - 1] - 1.0) * pm / ((1.0 + eps) * p - eps * pm);
}

ParametricModel matrix_model(const Mat &A)
{
  const int n = static_cast<int>(A.rows());
  LinearForm lf;
  lf.A = [A](const Vec &th) { return Mat(th(0) * A); };
  lf.B = [n](const Vec &) { return Mat(Mat::Zero(n, 1)); };
  lf.E = Mat::Identity(n, n);
  lf.C = Mat::Identity(1, n);
  lf.D = Mat::Zero(1, 1);
  lf.c = Vec::Zero(1);
  return make_linear_model("matrix", n, 1, 1, lf);
}

ConstraintSpec no_rows(int n)
{
  ConstraintSpec c;
  c.u_lo = Vec::Constant(1, -1.0);
  c.u_hi = Vec::Constant(1, 1.0);
  c.D = Mat(0, n);
  c.d = Vec(0);
  c.q_xi = Vec(0);
  return c;
}

} // namespace

TEST(Certificates, EpsilonClosedFormMatchesLp)
{
  for (int i = 0; i < 200; ++i)
  {
    const double C = 1.0 + 4.0 * keyed_uniform(1, i, 0, 0);
    const double rho = 0.1 + 0.85 * keyed_uniform(1, i, 0, 1);
    const int M = 1 + static_cast<int>(20.0 * keyed_uniform(1, i, 0, 2)) % 20;
    const double omega = 1.0 + 9.0 * keyed_uniform(1, i, 0, 3);
    const DecayEstimate d = decay(C, rho);
    EXPECT_NEAR(epsilon_f_closed(d, omega, M), epsilon_f_lp(d, omega, M), 1e-8)
        << "C=" << C << " rho=" << rho << " M=" << M << " omega=" << omega;
  }
  EXPECT_THROW(epsilon_f_closed(decay(2.0, 0.5), 1.0, 0), ConfigError);
}

TEST(Certificates, GammaIsTheGeometricBound)
{
  const DecayEstimate d = decay(2.5, 0.7);
  const CostWeights w = weights(4, 6, 3.0);
  for (int N = 1; N <= 6; ++N)
  {
    double s = 0.0;
    for (int k = 0; k < N; ++k)
      s += std::pow(0.7, k);
    for (int j = 0; j < 6; ++j)
      s += 3.0 * std::pow(0.7, N + j);
    EXPECT_NEAR(gamma_n(d, w, N), 2.5 * s, 1e-12);
  }
  EXPECT_NEAR(gamma_bar(d, w), 2.5 * 3.0 / 0.3, 1e-12);
}

TEST(Certificates, AlphaMatchesDirectProductFormula)
{
  const DecayEstimate d = decay(1.8, 0.6);
  for (double omega : {1.0, 1.5, 3.0})
    for (int N = 1; N <= 8; ++N)
    {
      const CostWeights w = weights(N, 3, omega);
      std::vector<double> g;
      for (int k = 1; k <= N; ++k)
        g.push_back(gamma_n(d, w, k));
      const double eps = epsilon_f_closed(d, omega, 3);
      EXPECT_NEAR(alpha(g, eps), alpha_direct(g, eps), 1e-12);
    }
  EXPECT_DOUBLE_EQ(alpha({5.0, 7.0}, 0.0), 1.0);
}

TEST(Certificates, OmegaLowerBound)
{
  EXPECT_THROW(omega_lower(decay(3.0, 0.9), 2), ConfigError);
  const DecayEstimate d = decay(3.0, 0.6);
  const int M = 6;
  const double wl = omega_lower(d, M);
  EXPECT_GE(wl, 1.0);
  // Above the bound, epsilon_f vanishes and every horizon is certified.
  for (int N = 1; N <= 10; ++N)
  {
    const CostWeights w = weights(N, M, 1.01 * wl);
    EXPECT_GT(certify(d, w).alpha, 0.0) << "N=" << N;
  }
}

TEST(Certificates, MinimalHorizonIsTight)
{
  const DecayEstimate d = decay(4.0, 0.8);
  const CostWeights w = weights(1, 2, 1.0);
  const int N = minimal_horizon(d, w);
  auto alpha_at = [&](int n) {
    std::vector<double> g;
    for (int k = 1; k <= n; ++k)
      g.push_back(gamma_n(d, w, k));
    return alpha(g, epsilon_f_closed(d, 1.0, 2));
  };
  EXPECT_GT(alpha_at(N), 0.0);
  if (N > 1)
    EXPECT_LE(alpha_at(N - 1), 0.0);
}

TEST(Certificates, RegionalHorizonByHand)
{
  // N0 = (J - gb c) / c = (100 - 10) / 1 = 90; extra = (ln 10 + ln 0.5) / (ln 10 - ln 9).
  const double extra = (std::log(10.0) + std::log(0.5)) / (std::log(10.0) - std::log(9.0));
  EXPECT_EQ(regional_minimal_horizon(10.0, 0.5, 100.0, 1.0),
            static_cast<int>(std::ceil(90.0 + extra)));
  EXPECT_EQ(regional_minimal_horizon(10.0, 0.0, 5.0, 1.0), 1);
  EXPECT_THROW(regional_minimal_horizon(10.0, 0.5, 100.0, 0.0), ConfigError);
}

TEST(Certificates, ScalarDecayIsExact)
{
  const ParametricModel m = matrix_model(Mat::Constant(1, 1, 0.6));
  const CostWeights w = weights(3, 10, 2.0);
  const DecayEstimate d =
      estimate_decay(m, {Vec::Ones(1)}, {}, w, no_rows(1));
  EXPECT_DOUBLE_EQ(d.C_ell, 1.0);
  EXPECT_GT(d.rho, 0.36);
  EXPECT_LT(d.rho, 1.0);
  EXPECT_EQ(d.source, "analytic");
}

TEST(Certificates, NonNormalDecayBoundsEveryPower)
{
  Mat A(2, 2);
  A << 0.5, 2.0, 0.0, 0.6;
  const ParametricModel m = matrix_model(A);
  CostWeights w = weights(4, 15, 3.0, 2);
  w.Q << 2.0, 0.3, 0.3, 1.0;
  const DecayEstimate d = estimate_decay(m, {Vec::Ones(1), Vec::Constant(1, 0.9)}, {}, w, no_rows(2));
  // ||x_k - x_s||_Q^2 <= C_ell rho^k ||x_0 - x_s||_Q^2 on random directions.
  for (int s = 0; s < 200; ++s)
  {
    Vec x(2);
    x << keyed_uniform(2, s, 0, 0) - 0.5, keyed_uniform(2, s, 0, 1) - 0.5;
    for (double scale : {1.0, 0.9})
    {
      const double q0 = x.dot(w.Q * x);
      Vec xk = x;
      for (int k = 0; k < 300; ++k)
      {
        EXPECT_LE(xk.dot(w.Q * xk), d.C_ell * std::pow(d.rho, k) * q0 * (1.0 + 1e-9));
        xk = scale * A * xk;
      }
    }
  }
}

TEST(Certificates, UnstableModelIsRejected)
{
  const ParametricModel m = matrix_model(Mat::Constant(1, 1, 1.1));
  EXPECT_THROW(estimate_decay(m, {Vec::Ones(1)}, {}, weights(2, 2, 1.0), no_rows(1)),
               SolverError);
}

TEST(Certificates, ChainBenchmarkIsCertified)
{
  const BenchmarkSetup s = build_msd_chain({});
  const ControllerConfig &c = s.controller;
  const DecayEstimate d = estimate_decay(*s.model, s.theta_samples, {}, c.weights, c.constraints);
  const CertificateReport rep = certify(d, c.weights);
  EXPECT_TRUE(rep.certified);
  EXPECT_GT(rep.alpha, 0.0);
  ASSERT_TRUE(rep.N_min.has_value());
  EXPECT_LE(*rep.N_min, c.weights.N);
}

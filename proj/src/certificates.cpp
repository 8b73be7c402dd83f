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

#include "acmpc/certificates.hpp"

#include "acmpc/lp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace acmpc
{

namespace
{

double spectral_norm(const Mat &A)
{
  Eigen::SelfAdjointEigenSolver<Mat> es(A.transpose() * A, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

double spectral_radius(const Mat &A)
{
  Eigen::EigenSolver<Mat> es(A, false);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

Mat slack_weighted(const Mat &Q, const ConstraintSpec &constraints)
{
  Mat Qbar = Q;
  for (int i = 0; i < constraints.rows(); ++i)
    Qbar += constraints.q_xi(i) * constraints.D.row(i).transpose() * constraints.D.row(i);
  return Qbar;
}

double alpha_for(const DecayEstimate &d, const CostWeights &weights)
{
  std::vector<double> gammas;
  for (int N = 1; N <= weights.N; ++N)
    gammas.push_back(gamma_n(d, weights, N));
  return alpha(gammas, epsilon_f_closed(d, weights.omega, weights.M));
}

// Stage cost along x_{k+1} - x_s = A (x_k - x_s) is bounded by G_k ||x_0 - x_s||_Q^2
// with G_k = max_theta ||Qbar^{1/2} A^k Q^{-1/2}||^2, where Qbar adds the slack
// penalty of the violated rows. Every rho in (r^2, 1) admits C_ell = max_k G_k / rho^k;
// the rate with the largest alpha (then the smallest gamma_bar) is kept.
DecayEstimate decay_linear(const ParametricModel &model, const std::vector<Vec> &thetas,
                           const CostWeights &weights, const ConstraintSpec &constraints,
                           int probe)
{
  const int n = model.n_x;
  std::vector<Mat> As;
  double r = 0.0;
  for (const Vec &th : thetas)
  {
    As.push_back(model.linear->A(th));
    const double ri = spectral_radius(As.back());
    if (ri >= 1.0)
    {
      std::ostringstream os;
      os << "not open-loop stable (spectral radius " << ri << "); use regional mode";
      throw SolverError(os.str());
    }
    r = std::max(r, ri);
  }
  const Mat Qbar = slack_weighted(weights.Q, constraints);
  const Mat Linv_t =
      Eigen::LLT<Mat>(weights.Q).matrixL().solve(Mat::Identity(n, n)).transpose();

  std::vector<double> G(probe + 1, 0.0);
  double C_rho = 1.0;
  for (const Mat &A : As)
  {
    Mat P = Mat::Identity(n, n);
    for (int k = 0; k <= probe; ++k)
    {
      if (k > 0)
        P = P * A;
      const Mat W = P * Linv_t;
      const Mat S = W.transpose() * Qbar * W;
      Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (S + S.transpose()), Eigen::EigenvaluesOnly);
      G[k] = std::max(G[k], es.eigenvalues().maxCoeff());
      if (k > 0 && r > 0.0)
        C_rho = std::max(C_rho, spectral_norm(P) / std::pow(r, k));
    }
  }

  const double r2 = r * r;
  constexpr int kGrid = 400;
  DecayEstimate best;
  double best_alpha = -std::numeric_limits<double>::infinity();
  double best_gbar = std::numeric_limits<double>::infinity();
  for (int j = 1; j < kGrid; ++j)
  {
    const double rho = r2 + (1.0 - r2) * j / kGrid;
    std::vector<double> ratio(probe + 1);
    double C = 1.0;
    for (int k = 0; k <= probe; ++k)
    {
      ratio[k] = G[k] / std::pow(rho, k);
      C = std::max(C, ratio[k]);
    }
    // The probe must cover the peak: the last quarter decreases and stays below C.
    bool settled = ratio[probe] < C;
    for (int k = 3 * probe / 4; k < probe && settled; ++k)
      settled = ratio[k + 1] <= ratio[k];
    if (!settled)
      continue;
    DecayEstimate d;
    d.rho = rho;
    d.C_rho = C_rho;
    d.C_ell = C;
    const double a = alpha_for(d, weights);
    const double gb = gamma_bar(d, weights);
    if (a > best_alpha || (a == best_alpha && gb < best_gbar))
    {
      best = d;
      best_alpha = a;
      best_gbar = gb;
    }
  }
  if (!std::isfinite(best_gbar))
    throw SolverError("estimate_decay: horizon_probe too short to bound the transient");
  best.source = thetas.size() == 1 ? "analytic" : "sampled";
  return best;
}

DecayEstimate decay_fit(const ParametricModel &model, const std::vector<Vec> &thetas,
                        const std::vector<Setpoint> &setpoints, const CostWeights &weights,
                        const ConstraintSpec &constraints, const DecayOptions &opts)
{
  require(!setpoints.empty(), "estimate_decay: setpoint samples are required");
  std::mt19937_64 rng(opts.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> unif(0.1, 1.0);

  std::vector<std::pair<int, double>> pts;
  for (int s = 0; s < opts.rollouts; ++s)
  {
    const Vec &th = thetas[s % thetas.size()];
    const Setpoint &sp = setpoints[(s / thetas.size()) % setpoints.size()];
    const TailPolicy tail = opts.tail ? opts.tail(th, sp) : TailPolicy::constant_input();
    Vec dx(model.n_x);
    for (int i = 0; i < model.n_x; ++i)
      dx(i) = nd(rng);
    dx *= std::sqrt(opts.radius_sq * unif(rng) / dx.dot(weights.Q * dx));
    const double ell0 = dx.dot(weights.Q * dx);
    Vec x = sp.x + dx;
    for (int k = 0; k < opts.rollout_length; ++k)
    {
      const Vec u = tail.apply(x, sp.x, sp.u);
      const double ell = stage_cost(x, u, sp.x, sp.u, weights, constraints);
      if (!std::isfinite(ell))
        throw SolverError("estimate_decay: rollout diverged; use regional mode");
      if (ell > 1e-280)
        pts.emplace_back(k, std::log(ell / ell0));
      x = model.eval_f(x, u, th);
    }
  }
  require(pts.size() > 2, "estimate_decay: not enough rollout data");
  double sk = 0, sy = 0, skk = 0, sky = 0;
  for (const auto &[k, y] : pts)
  {
    sk += k;
    sy += y;
    skk += double(k) * k;
    sky += k * y;
  }
  const double n = static_cast<double>(pts.size());
  const double slope = (n * sky - sk * sy) / (n * skk - sk * sk);
  const double rho = std::exp(slope);
  if (!(rho < 1.0))
  {
    std::ostringstream os;
    os << "not open-loop stable (fitted decay rate " << rho << "); use regional mode";
    throw SolverError(os.str());
  }
  double C = 1.0;
  for (const auto &[k, y] : pts)
    C = std::max(C, std::exp(y - k * slope));

  DecayEstimate d;
  d.rho = rho;
  d.C_ell = 1.1 * C;
  const double base = stage_cost_constant(1.0, weights.Q, constraints);
  d.C_rho = std::max(1.0, d.C_ell / base);
  d.source = "sampled";
  return d;
}

} // namespace

double stage_cost_constant(double C_rho, const Mat &Q, const ConstraintSpec &constraints)
{
  Eigen::SelfAdjointEigenSolver<Mat> eq(Q, Eigen::EigenvaluesOnly);
  double sigma_xi = 0.0;
  if (constraints.rows() > 0)
  {
    Mat S = Mat::Zero(Q.rows(), Q.cols());
    for (int i = 0; i < constraints.rows(); ++i)
      S += constraints.q_xi(i) * constraints.D.row(i).transpose() * constraints.D.row(i);
    Eigen::SelfAdjointEigenSolver<Mat> es(S, Eigen::EigenvaluesOnly);
    sigma_xi = es.eigenvalues().maxCoeff();
  }
  return C_rho * (eq.eigenvalues().maxCoeff() + sigma_xi) / eq.eigenvalues().minCoeff();
}

DecayEstimate estimate_decay(const ParametricModel &model, const std::vector<Vec> &theta_samples,
                             const std::vector<Setpoint> &setpoint_samples,
                             const CostWeights &weights, const ConstraintSpec &constraints,
                             const DecayOptions &opts)
{
  require(!theta_samples.empty(), "estimate_decay: parameter samples are required");
  if (model.linear && !opts.tail)
    return decay_linear(model, theta_samples, weights, constraints, opts.horizon_probe);
  return decay_fit(model, theta_samples, setpoint_samples, weights, constraints, opts);
}

double gamma_n(const DecayEstimate &decay, const CostWeights &weights, int N)
{
  require(N >= 1, "gamma_n: N must be at least 1");
  const double r = decay.rho;
  const double rN = std::pow(r, N), rM = std::pow(r, weights.M);
  return decay.C_ell * ((1.0 - rN) / (1.0 - r) + weights.omega * rN * (1.0 - rM) / (1.0 - r));
}

double gamma_bar(const DecayEstimate &decay, const CostWeights &weights)
{
  return decay.C_ell * std::max(1.0, weights.omega) / (1.0 - decay.rho);
}

double epsilon_f_closed(const DecayEstimate &decay, double omega, int M)
{
  require(M >= 1, "epsilon_f: the terminal rollout is empty (M = 0)");
  const double r = decay.rho, rM = std::pow(r, M);
  const double val = (1.0 - r) / (1.0 - rM) * (decay.C_ell * rM + (1.0 - omega) / omega);
  return std::max(val, 0.0);
}

double epsilon_f_lp(const DecayEstimate &decay, double omega, int M)
{
  require(M >= 1, "epsilon_f: the terminal rollout is empty (M = 0)");
  // Variables l_0 .. l_M >= 0.
  const int n = M + 1;
  Vec c = Vec::Zero(n);
  c(M) = 1.0;
  c(0) += (1.0 - omega) / omega;
  Mat A_eq = Mat::Zero(1, n);
  A_eq.leftCols(M).setOnes();
  const Vec b_eq = Vec::Ones(1);
  Mat A_le = Mat::Zero(M, n);
  for (int k = 0; k < M; ++k)
  {
    A_le(k, M) = 1.0;
    A_le(k, k) = -decay.C_ell * std::pow(decay.rho, M - k);
  }
  const LpResult res = lp_maximize(c, A_le, Vec::Zero(M), A_eq, b_eq);
  if (res.status != LpResult::Status::Optimal)
    throw SolverError("epsilon_f_lp: LP did not reach an optimum");
  return std::max(res.value, 0.0);
}

double alpha(const std::vector<double> &gammas, double epsilon_f)
{
  require(!gammas.empty(), "alpha: at least one gamma is required");
  require(epsilon_f >= 0.0, "alpha: epsilon_f must be nonnegative");
  if (epsilon_f == 0.0)
    return 1.0;
  const int N = static_cast<int>(gammas.size());
  const double gN = gammas[N - 1];
  // Divide numerator and denominator by prod gamma_{N-j+1} to avoid overflow.
  double q = 1.0;
  for (int j = 1; j <= N - 1; ++j)
  {
    const double g = gammas[N - j];
    q *= (g - 1.0) / g;
  }
  const double den = (1.0 + epsilon_f) - epsilon_f * q;
  if (!(den > 0.0))
    return -std::numeric_limits<double>::infinity();
  return 1.0 - epsilon_f * (gN - 1.0) * q / den;
}

double omega_lower(const DecayEstimate &decay, int M)
{
  const double rM = std::pow(decay.rho, M);
  const double C = decay.C_ell;
  if (C * rM >= 1.0)
  {
    std::ostringstream os;
    os << "C_ell rho^M = " << C * rM << " >= 1; increase M";
    throw ConfigError(os.str());
  }
  return std::max((C - 1.0 + rM) / (C * (1.0 - C * rM)), 1.0);
}

int minimal_horizon(const DecayEstimate &decay, const CostWeights &weights, int cap)
{
  const double eps = epsilon_f_closed(decay, weights.omega, weights.M);
  std::vector<double> gammas;
  for (int N = 1; N <= cap; ++N)
  {
    gammas.push_back(gamma_n(decay, weights, N));
    if (alpha(gammas, eps) > 0.0)
      return N;
  }
  throw SolverError("no certified horizon up to N = " + std::to_string(cap));
}

int regional_minimal_horizon(double gamma_bar, double epsilon_f, double J_bar, double c_loc)
{
  require(c_loc > 0.0, "regional horizon: c_loc must be positive");
  require(gamma_bar > 1.0, "regional horizon: gamma_bar must exceed 1");
  const double N0 = std::max(0.0, (J_bar - gamma_bar * c_loc) / c_loc);
  if (epsilon_f <= 0.0)
    return static_cast<int>(std::ceil(N0)) + 1;
  const double extra = (std::log(gamma_bar) + std::log(epsilon_f)) /
                       (std::log(gamma_bar) - std::log(gamma_bar - 1.0));
  return std::max(1, static_cast<int>(std::ceil(N0 + std::max(0.0, extra))));
}

int regional_minimal_horizon(const DecayEstimate &decay, const CostWeights &weights,
                             double J_bar, double c_loc)
{
  return regional_minimal_horizon(gamma_bar(decay, weights),
                                  epsilon_f_closed(decay, weights.omega, weights.M), J_bar,
                                  c_loc);
}

CertificateReport certify(const DecayEstimate &decay, const CostWeights &weights)
{
  CertificateReport rep;
  rep.decay = decay;
  for (int N = 1; N <= weights.N; ++N)
    rep.gamma.push_back(gamma_n(decay, weights, N));
  rep.gamma_bar = gamma_bar(decay, weights);
  rep.epsilon_f = epsilon_f_closed(decay, weights.omega, weights.M);
  rep.alpha = alpha(rep.gamma, rep.epsilon_f);
  try
  {
    rep.omega_lower = omega_lower(decay, weights.M);
  }
  catch (const ConfigError &e)
  {
    rep.note = e.what();
  }
  try
  {
    rep.N_min = minimal_horizon(decay, weights);
  }
  catch (const SolverError &e)
  {
    if (!rep.note.empty())
      rep.note += "; ";
    rep.note += e.what();
  }
  rep.certified = rep.alpha > 0.0;
  return rep;
}

} // namespace acmpc

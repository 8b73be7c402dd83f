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

#include "acmpc/random.hpp"

#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>

namespace acmpc
{

namespace
{

constexpr double kGravity = 9.81;

Mat unpack_rows(const Vec &theta, int rows, int cols)
{
  return Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      theta.data(), rows, cols);
}

ChainParams chain_params(const ChainOptions &o, const Eigen::Matrix<double, 4, Eigen::Dynamic> &s)
{
  ChainParams p;
  p.mass = o.mass * s.row(0).transpose().array();
  p.stiffness = o.stiffness * s.row(1).transpose().array();
  p.damping = o.damping * s.row(2).transpose().array();
  p.ground = o.ground * s.row(3).transpose().array();
  return p;
}

void chain_discrete(const ChainOptions &o, const Eigen::Matrix<double, 4, Eigen::Dynamic> &s,
                    Mat &A, Mat &B)
{
  Mat Ac, Bc;
  chain_continuous(chain_params(o, s), Ac, Bc);
  discretize_zoh(Ac, Bc, o.dt, A, B);
}

} // namespace

void discretize_zoh(const Mat &Ac, const Mat &Bc, double dt, Mat &A, Mat &B)
{
  require(dt > 0.0, "discretize: dt must be positive");
  require(Ac.rows() == Ac.cols() && Bc.rows() == Ac.rows(), "discretize: shape mismatch");
  const int n = static_cast<int>(Ac.rows());
  const int m = static_cast<int>(Bc.cols());
  Mat Z = Mat::Zero(n + m, n + m);
  Z.topLeftCorner(n, n) = Ac * dt;
  Z.topRightCorner(n, m) = Bc * dt;
  const Mat E = Z.exp();
  A = E.topLeftCorner(n, n);
  B = E.topRightCorner(n, m);
}

void chain_continuous(const ChainParams &p, Mat &Ac, Mat &Bc)
{
  const int n = static_cast<int>(p.mass.size());
  require(n >= 1, "chain: at least one mass is required");
  require(p.stiffness.size() == n && p.damping.size() == n && p.ground.size() == n,
          "chain: parameter vectors must have one entry per mass");
  require((p.mass.array() > 0.0).all(), "chain: masses must be positive");
  Mat K = Mat::Zero(n, n), C = Mat::Zero(n, n);
  for (int i = 0; i < n; ++i)
  {
    K(i, i) += p.stiffness(i);
    C(i, i) += p.damping(i) + p.ground(i);
    if (i > 0)
    {
      K(i - 1, i - 1) += p.stiffness(i);
      K(i - 1, i) -= p.stiffness(i);
      K(i, i - 1) -= p.stiffness(i);
      C(i - 1, i - 1) += p.damping(i);
      C(i - 1, i) -= p.damping(i);
      C(i, i - 1) -= p.damping(i);
    }
  }
  const Vec inv_m = p.mass.cwiseInverse();
  Ac = Mat::Zero(2 * n, 2 * n);
  Ac.topRightCorner(n, n).setIdentity();
  Ac.bottomLeftCorner(n, n) = -(inv_m.asDiagonal() * K);
  Ac.bottomRightCorner(n, n) = -(inv_m.asDiagonal() * C);
  Bc = Mat::Zero(2 * n, 1);
  Bc(2 * n - 1, 0) = inv_m(n - 1);
}

Vec chain_theta(const Mat &A, const Mat &B)
{
  const int n = static_cast<int>(A.rows());
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> AB(n, A.cols() + B.cols());
  AB << A, B;
  return Eigen::Map<const Vec>(AB.data(), AB.size());
}

ParametricModel chain_model(int n_masses)
{
  require(n_masses >= 1, "chain: at least one mass is required");
  const int nx = 2 * n_masses;
  const int nz = nx + 1;
  LinearForm form;
  form.A = [nx, nz](const Vec &th) -> Mat { return unpack_rows(th, nx, nz).leftCols(nx); };
  form.B = [nx, nz](const Vec &th) -> Mat { return unpack_rows(th, nx, nz).rightCols(1); };
  form.E = Mat::Identity(nx, nx);
  form.C = Mat::Zero(1, nx);
  form.C(0, 0) = 1.0;
  form.D = Mat::Zero(1, 1);
  form.c = Vec::Zero(1);
  ParametricModel m = make_linear_model("msd_chain", nx, 1, nx * nz, form);

  // f = [A B] z + w and G = I kron z' for z = [x; u].
  m.f = [nx, nz](const Vec &x, const Vec &u, const Vec &th, const Vec &w) -> Vec {
    Vec z(nz);
    z << x, u;
    Vec out = unpack_rows(th, nx, nz) * z;
    if (w.size() > 0)
      out += w;
    return out;
  };
  m.G = [nx, nz](const Vec &x, const Vec &u, const Vec &) -> Mat {
    Mat G = Mat::Zero(nx, nx * nz);
    for (int i = 0; i < nx; ++i)
    {
      G.block(i, i * nz, 1, nx) = x.transpose();
      G(i, i * nz + nx) = u(0);
    }
    return G;
  };
  m.f_jac = [nx, nz](const Vec &, const Vec &, const Vec &th, Mat &fx, Mat &fu) {
    const Mat AB = unpack_rows(th, nx, nz);
    fx = AB.leftCols(nx);
    fu = AB.rightCols(1);
  };
  m.h_jac = [nx](const Vec &, const Vec &, const Vec &, Mat &hx, Mat &hu) {
    hx = Mat::Zero(1, nx);
    hx(0, 0) = 1.0;
    hu = Mat::Zero(1, 1);
  };
  return m;
}

BenchmarkSetup build_msd_chain(const ChainOptions &o)
{
  require(o.n_masses >= 1, "chain: at least one mass is required");
  require(o.dt > 0.0, "chain: dt must be positive");
  require(o.true_scale >= 0.0 && o.true_scale < 1.0, "chain: true_scale must lie in [0, 1)");
  require(o.velocity_weight > 0.0 && o.terminal_weight > 0.0, "chain: weights must be positive");
  const int n = o.n_masses;
  const int nx = 2 * n;
  using Scale = Eigen::Matrix<double, 4, Eigen::Dynamic>;

  BenchmarkSetup s;
  s.name = "msd";
  auto model = std::make_shared<ParametricModel>(chain_model(n));

  Mat A, B;
  chain_discrete(o, Scale::Ones(4, n), A, B);
  s.theta_hat0 = chain_theta(A, B);

  // True physical parameters deviate by exactly +-true_scale; the wall spring is softer.
  Scale sign(4, n);
  for (int r = 0; r < 4; ++r)
    for (int i = 0; i < n; ++i)
      sign(r, i) = keyed_uniform(o.truth_seed, 0, 11, r * n + i) < 0.5 ? -1.0 : 1.0;
  sign(1, 0) = -1.0;
  chain_discrete(o, (Scale::Ones(4, n) + o.true_scale * sign).eval(), A, B);
  s.theta_true = chain_theta(A, B);

  s.theta_samples = {s.theta_hat0, s.theta_true};
  for (int j = 0; j < o.set_samples; ++j)
  {
    Scale c(4, n);
    for (int r = 0; r < 4; ++r)
      for (int i = 0; i < n; ++i)
        c(r, i) = keyed_uniform(5, j, 12, r * n + i) < 0.5 ? -1.0 : 1.0;
    chain_discrete(o, (Scale::Ones(4, n) + 0.5 * c).eval(), A, B);
    s.theta_samples.push_back(chain_theta(A, B));
  }

  // Entrywise hull of +-50% around the estimate and every sampled member.
  Vec lo = s.theta_hat0 - 0.5 * s.theta_hat0.cwiseAbs();
  Vec hi = s.theta_hat0 + 0.5 * s.theta_hat0.cwiseAbs();
  for (const Vec &th : s.theta_samples)
  {
    lo = lo.cwiseMin(th);
    hi = hi.cwiseMax(th);
  }
  s.theta_set = ParameterSet::box(lo, hi);

  double lf = 0.0;
  for (const Vec &th : s.theta_samples)
  {
    Mat ABE(nx, 2 * nx + 1);
    ABE << unpack_rows(th, nx, nx + 1), Mat::Identity(nx, nx);
    lf = std::max(lf, Eigen::JacobiSVD<Mat>(ABE).singularValues()(0));
  }
  model->L_f = 1.05 * lf;
  model->L_h = 1.0;
  s.model = model;

  ControllerConfig &c = s.controller;
  c.mode = ControllerMode::Semiglobal;
  c.weights.Q = Mat::Identity(nx, nx);
  c.weights.Q.bottomRightCorner(n, n) *= o.velocity_weight;
  c.weights.R = 0.01 * Mat::Identity(1, 1);
  c.weights.N = 6;
  c.weights.M = 22;
  c.weights.omega = 5.0;
  c.constraints.u_lo = Vec::Constant(1, -o.u_max);
  c.constraints.u_hi = Vec::Constant(1, o.u_max);
  c.constraints.D = Mat::Zero(1, nx);
  c.constraints.D(0, 0) = 1.0;
  c.constraints.d = Vec::Constant(1, o.y_max);
  c.constraints.q_xi = Vec::Ones(1);
  c.target.T = o.terminal_weight * Mat::Identity(1, 1);
  c.target.y_d = Vec::Constant(1, 0.5);

  const int seg = std::max(1, o.steps / 4);
  const double refs[4] = {0.5, 1.0, -0.5, 0.9};
  for (int i = 0; i < 4; ++i)
    s.schedule.push_back({i * seg, Vec::Constant(1, refs[i])});

  s.x0 = Vec::Zero(nx);
  s.w_lo = Vec::Constant(nx, -o.disturbance_amp);
  s.w_hi = Vec::Constant(nx, o.disturbance_amp);
  s.v_lo = Vec::Constant(nx, -o.noise_amp);
  s.v_hi = Vec::Constant(nx, o.noise_amp);

  // State box for the gain: static deflection of the estimated chain under
  // the largest input, with the matching velocity scale.
  {
    const Mat A0 = unpack_rows(s.theta_hat0, nx, nx + 1).leftCols(nx);
    const Mat B0 = unpack_rows(s.theta_hat0, nx, nx + 1).rightCols(1);
    const Vec dc = (Mat::Identity(nx, nx) - A0).partialPivLu().solve(B0).col(0).cwiseAbs();
    Vec box = o.u_max * dc;
    box.tail(n) = box.head(n) / (o.dt * 4.0);
    s.gain_state_lo = -box;
    s.gain_state_hi = box;
  }
  s.steps = o.steps;
  s.divergence_bound = 1e6;
  return s;
}

ParametricModel quadrotor_model(double dt)
{
  require(dt > 0.0, "quadrotor: dt must be positive");
  ParametricModel m;
  m.name = "quadrotor";
  m.n_x = 6;
  m.n_u = 2;
  m.n_theta = 2;
  m.n_w = 1;
  m.n_y = 2;
  m.f = [dt](const Vec &x, const Vec &u, const Vec &th, const Vec &w) -> Vec {
    const double phi = x(2), v1 = x(3), v2 = x(4), om = x(5);
    const double wind = w.size() > 0 ? w(0) : 0.0;
    const double c = std::cos(phi), s = std::sin(phi);
    Vec dx(6);
    dx << v1 * c - v2 * s, v1 * s + v2 * c, om, v2 * om - kGravity * s + c * wind,
        -v1 * om - kGravity * c + th(0) * (u(0) + u(1)) - s * wind, th(1) * (u(0) - u(1));
    return x + dt * dx;
  };
  m.G = [dt](const Vec &, const Vec &u, const Vec &) -> Mat {
    Mat G = Mat::Zero(6, 2);
    G(4, 0) = dt * (u(0) + u(1));
    G(5, 1) = dt * (u(0) - u(1));
    return G;
  };
  m.h = [](const Vec &x, const Vec &, const Vec &) -> Vec { return x.head(2); };
  m.f_jac = [dt](const Vec &x, const Vec &, const Vec &th, Mat &fx, Mat &fu) {
    const double phi = x(2), v1 = x(3), v2 = x(4), om = x(5);
    const double c = std::cos(phi), s = std::sin(phi);
    Mat J = Mat::Zero(6, 6);
    J(0, 2) = -v1 * s - v2 * c;
    J(0, 3) = c;
    J(0, 4) = -s;
    J(1, 2) = v1 * c - v2 * s;
    J(1, 3) = s;
    J(1, 4) = c;
    J(2, 5) = 1.0;
    J(3, 2) = -kGravity * c;
    J(3, 4) = om;
    J(3, 5) = v2;
    J(4, 2) = kGravity * s;
    J(4, 3) = -om;
    J(4, 5) = -v1;
    fx = Mat::Identity(6, 6) + dt * J;
    fu = Mat::Zero(6, 2);
    fu(4, 0) = fu(4, 1) = dt * th(0);
    fu(5, 0) = dt * th(1);
    fu(5, 1) = -dt * th(1);
  };
  m.h_jac = [](const Vec &, const Vec &, const Vec &, Mat &hx, Mat &hu) {
    hx = Mat::Zero(2, 6);
    hx(0, 0) = hx(1, 1) = 1.0;
    hu = Mat::Zero(2, 2);
  };
  return m;
}

BenchmarkSetup build_quadrotor(const QuadrotorOptions &o)
{
  require(o.dt > 0.0, "quadrotor: dt must be positive");
  require(o.mass > 0.0 && o.inertia > 0.0 && o.arm > 0.0, "quadrotor: physical constants must be positive");
  require(o.thrust_factor > 0.0 && o.torque_factor > 0.0,
          "quadrotor: estimate factors must be positive");
  BenchmarkSetup s;
  s.name = "quadrotor";
  s.model = std::make_shared<ParametricModel>(quadrotor_model(o.dt));

  s.theta_true = Vec(2);
  s.theta_true << 1.0 / o.mass, o.arm / o.inertia;
  s.theta_hat0 = Vec(2);
  s.theta_hat0 << o.thrust_factor * s.theta_true(0), o.torque_factor * s.theta_true(1);
  const Vec lo = 0.8 * s.theta_true.cwiseMin(s.theta_hat0);
  const Vec hi = 1.25 * s.theta_true.cwiseMax(s.theta_hat0);
  s.theta_set = ParameterSet::box(lo, hi);
  s.theta_samples = {s.theta_hat0, s.theta_true, lo, hi};

  ControllerConfig &c = s.controller;
  c.mode = ControllerMode::Regional;
  c.weights.Q = Vec((Vec(6) << 10.0, 10.0, 10.0, 1.0, 1.0, 1.0).finished()).asDiagonal();
  c.weights.R = 0.005 * Mat::Identity(2, 2);
  c.weights.N = 5;
  c.weights.M = 10;
  c.weights.omega = 1.0;
  c.constraints.u_lo = Vec::Constant(2, -1.0);
  c.constraints.u_hi = Vec::Constant(2, 4.0);
  c.constraints.u_margin = 0.1;
  // |v1|, |v2| <= v_max, |phi| <= phi_max, then the two obstacle rows.
  c.constraints.D = Mat::Zero(8, 6);
  c.constraints.d = Vec::Zero(8);
  const int rows_idx[3] = {3, 4, 2};
  const double bounds[3] = {o.v_max, o.v_max, o.phi_max};
  for (int i = 0; i < 3; ++i)
  {
    c.constraints.D(2 * i, rows_idx[i]) = 1.0;
    c.constraints.D(2 * i + 1, rows_idx[i]) = -1.0;
    c.constraints.d(2 * i) = c.constraints.d(2 * i + 1) = bounds[i];
  }
  c.constraints.D(6, 1) = 1.0;
  c.constraints.d(6) = o.ceiling;
  c.constraints.D(7, 0) = 1.0;
  c.constraints.d(7) = o.wall;
  c.constraints.q_xi = Vec::Constant(8, 100.0);
  c.target.T = 1000.0 * Mat::Identity(2, 2);
  c.J_bar = o.J_bar;

  Vec target = o.target.size() == 2 ? o.target : Vec((Vec(2) << 4.0, 1.0).finished());
  c.target.y_d = target;
  s.schedule = {{0, target}};
  s.x0 = Vec::Zero(6);
  if (o.start.size() == 6)
    s.x0 = o.start;
  s.w_lo = Vec::Constant(1, -o.wind_amp);
  s.w_hi = Vec::Constant(1, o.wind_amp);
  s.v_lo = Vec::Constant(6, -o.noise_amp);
  s.v_hi = Vec::Constant(6, o.noise_amp);
  // The regressor depends on the inputs only.
  s.gain_state_lo = Vec::Zero(6);
  s.gain_state_hi = Vec::Zero(6);
  s.steps = o.steps;
  s.divergence_bound = o.divergence_bound;
  return s;
}

} // namespace acmpc

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

#include "acmpc/model.hpp"

#include "acmpc/lp.hpp"
#include "acmpc/qp.hpp"
#include "acmpc/sqp.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

namespace acmpc
{

Vec ParametricModel::eval_f(const Vec &x, const Vec &u, const Vec &theta) const
{
  return f(x, u, theta, Vec::Zero(n_w));
}

Vec ParametricModel::eval_f(const Vec &x, const Vec &u, const Vec &theta, const Vec &w) const
{
  return f(x, u, theta, w);
}

Mat ParametricModel::eval_G(const Vec &x, const Vec &u) const { return G(x, u, Vec::Zero(n_w)); }

Mat ParametricModel::eval_G(const Vec &x, const Vec &u, const Vec &w) const { return G(x, u, w); }

Vec ParametricModel::eval_h(const Vec &x, const Vec &u, const Vec &theta) const
{
  return h(x, u, theta);
}

void ParametricModel::jacobian_f(const Vec &x, const Vec &u, const Vec &theta, Mat &fx,
                                 Mat &fu) const
{
  if (f_jac)
  {
    f_jac(x, u, theta, fx, fu);
    return;
  }
  if (linear)
  {
    fx = linear->A(theta);
    fu = linear->B(theta);
    return;
  }
  const Vec w0 = Vec::Zero(n_w);
  const double hx = 1e-6 * (1.0 + x.norm());
  const double hu = 1e-6 * (1.0 + u.norm());
  fx.resize(n_x, n_x);
  fu.resize(n_x, n_u);
  Vec xp = x;
  for (int j = 0; j < n_x; ++j)
  {
    xp(j) = x(j) + hx;
    const Vec fp = f(xp, u, theta, w0);
    xp(j) = x(j) - hx;
    const Vec fm = f(xp, u, theta, w0);
    xp(j) = x(j);
    fx.col(j) = (fp - fm) / (2.0 * hx);
  }
  Vec up = u;
  for (int j = 0; j < n_u; ++j)
  {
    up(j) = u(j) + hu;
    const Vec fp = f(x, up, theta, w0);
    up(j) = u(j) - hu;
    const Vec fm = f(x, up, theta, w0);
    up(j) = u(j);
    fu.col(j) = (fp - fm) / (2.0 * hu);
  }
}

void ParametricModel::jacobian_h(const Vec &x, const Vec &u, const Vec &theta, Mat &hx,
                                 Mat &hu) const
{
  if (h_jac)
  {
    h_jac(x, u, theta, hx, hu);
    return;
  }
  if (linear)
  {
    hx = linear->C;
    hu = linear->D;
    return;
  }
  const double sx = 1e-6 * (1.0 + x.norm());
  const double su = 1e-6 * (1.0 + u.norm());
  hx.resize(n_y, n_x);
  hu.resize(n_y, n_u);
  Vec xp = x;
  for (int j = 0; j < n_x; ++j)
  {
    xp(j) = x(j) + sx;
    const Vec hp = h(xp, u, theta);
    xp(j) = x(j) - sx;
    const Vec hm = h(xp, u, theta);
    xp(j) = x(j);
    hx.col(j) = (hp - hm) / (2.0 * sx);
  }
  Vec up = u;
  for (int j = 0; j < n_u; ++j)
  {
    up(j) = u(j) + su;
    const Vec hp = h(x, up, theta);
    up(j) = u(j) - su;
    const Vec hm = h(x, up, theta);
    up(j) = u(j);
    hu.col(j) = (hp - hm) / (2.0 * su);
  }
}

void ParametricModel::validate() const
{
  require(n_x > 0 && n_u > 0 && n_theta >= 0 && n_w >= 0 && n_y > 0,
          "model '" + name + "': dimensions must be positive");
  require(static_cast<bool>(f) && static_cast<bool>(G) && static_cast<bool>(h),
          "model '" + name + "': evaluators f, G, h are required");
  if (linear)
  {
    require(linear->E.rows() == n_x && linear->E.cols() == n_w, "linear form: E has wrong shape");
    require(linear->C.rows() == n_y && linear->C.cols() == n_x, "linear form: C has wrong shape");
    require(linear->D.rows() == n_y && linear->D.cols() == n_u, "linear form: D has wrong shape");
    require(linear->c.size() == n_y, "linear form: c has wrong size");
  }
}

ParametricModel make_linear_model(std::string name, int n_x, int n_u, int n_theta,
                                  LinearForm form)
{
  require(static_cast<bool>(form.A) && static_cast<bool>(form.B),
          "linear form: A(theta) and B(theta) are required");
  if (!form.e)
  {
    form.e = [n_x](const Vec &) { return Vec(Vec::Zero(n_x)); };
  }
  ParametricModel m;
  m.name = std::move(name);
  m.n_x = n_x;
  m.n_u = n_u;
  m.n_theta = n_theta;
  m.n_w = static_cast<int>(form.E.cols());
  m.n_y = static_cast<int>(form.C.rows());

  const auto lf = std::make_shared<const LinearForm>(form);
  m.f = [lf](const Vec &x, const Vec &u, const Vec &th, const Vec &w) -> Vec {
    Vec out = lf->A(th) * x + lf->B(th) * u + lf->e(th);
    if (w.size() > 0)
      out += lf->E * w;
    return out;
  };
  m.h = [lf](const Vec &x, const Vec &u, const Vec &) -> Vec { return lf->C * x + lf->D * u + lf->c; };

  // Columns of G are the affine increments along each coordinate direction.
  m.G = [lf, n_x, n_theta](const Vec &x, const Vec &u, const Vec &) -> Mat {
    const Vec zero = Vec::Zero(n_theta);
    const Vec base = lf->A(zero) * x + lf->B(zero) * u + lf->e(zero);
    Mat G(n_x, n_theta);
    Vec ej = Vec::Zero(n_theta);
    for (int j = 0; j < n_theta; ++j)
    {
      ej(j) = 1.0;
      G.col(j) = lf->A(ej) * x + lf->B(ej) * u + lf->e(ej) - base;
      ej(j) = 0.0;
    }
    return G;
  };
  m.linear = form;
  return m;
}

ParameterSet ParameterSet::box(Vec lo, Vec hi)
{
  require(lo.size() == hi.size(), "parameter box: lo/hi size mismatch");
  require(lo.allFinite() && hi.allFinite(), "parameter box must be bounded");
  require((lo.array() <= hi.array()).all(), "parameter box: lo must not exceed hi");
  ParameterSet s;
  s.kind = Kind::Box;
  s.lo = std::move(lo);
  s.hi = std::move(hi);
  return s;
}

ParameterSet ParameterSet::polytope(Mat H, Vec b)
{
  require(H.rows() == b.size() && H.rows() > 0, "parameter polytope: H/b size mismatch");
  const int p = static_cast<int>(H.cols());
  // theta = t+ - t-, both nonnegative.
  Mat A(H.rows(), 2 * p);
  A << H, -H;
  for (int j = 0; j < p; ++j)
  {
    for (double sign : {1.0, -1.0})
    {
      Vec c = Vec::Zero(2 * p);
      c(j) = sign;
      c(p + j) = -sign;
      const LpResult r = lp_maximize(c, A, b, Mat(0, 2 * p), Vec(0));
      require(r.status != LpResult::Status::Infeasible, "parameter polytope is empty");
      require(r.status == LpResult::Status::Optimal,
              "parameter polytope is unbounded along coordinate " + std::to_string(j));
    }
  }
  ParameterSet s;
  s.kind = Kind::Polytope;
  s.H = std::move(H);
  s.b = std::move(b);
  return s;
}

int ParameterSet::dim() const
{
  return kind == Kind::Box ? static_cast<int>(lo.size()) : static_cast<int>(H.cols());
}

bool ParameterSet::contains(const Vec &theta, double tol) const
{
  if (theta.size() != dim())
    return false;
  if (kind == Kind::Box)
    return (theta.array() >= lo.array() - tol).all() && (theta.array() <= hi.array() + tol).all();
  return ((H * theta - b).array() <= tol).all();
}

void ConstraintSpec::validate(int n_x, int n_u) const
{
  require(u_lo.size() == n_u && u_hi.size() == n_u, "constraints: input bounds size mismatch");
  require((u_lo.array() <= u_hi.array()).all(), "constraints: u_lo exceeds u_hi");
  require(D.rows() == d.size() && (D.rows() == 0 || D.cols() == n_x),
          "constraints: state rows D/d mismatch");
  require(q_xi.size() == D.rows(), "constraints: one slack weight per state row is required");
  require((q_xi.array() > 0.0).all(), "constraints: slack weights must be positive");
  require(u_margin >= 0.0, "constraints: u_margin must be nonnegative");
  require((us_lo().array() <= us_hi().array()).all(),
          "constraints: u_margin leaves an empty steady-state input set");
}

void TrackingTarget::validate(int n_y) const
{
  require(y_d.size() == n_y, "target: y_d has wrong size");
  require(T.rows() == n_y && T.cols() == n_y, "target: T has wrong shape");
  require((T - T.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * (1.0 + T.cwiseAbs().maxCoeff()),
          "target: T must be symmetric");
  Eigen::SelfAdjointEigenSolver<Mat> es(T);
  require(es.eigenvalues().minCoeff() > 0.0, "target: T must be positive definite");
}

Mat rollout(const ParametricModel &model, const Vec &x0, const Vec &theta, const Mat &inputs)
{
  require(x0.size() == model.n_x, "rollout: x0 has wrong size");
  require(theta.size() == model.n_theta, "rollout: theta has wrong size");
  require(inputs.cols() == 0 || inputs.rows() == model.n_u, "rollout: inputs have wrong size");
  const int N = static_cast<int>(inputs.cols());
  Mat xs(model.n_x, N + 1);
  xs.col(0) = x0;
  const Vec w0 = Vec::Zero(model.n_w);
  for (int k = 0; k < N; ++k)
    xs.col(k + 1) = model.f(xs.col(k), inputs.col(k), theta, w0);
  return xs;
}

double steady_state_residual(const ParametricModel &model, const Vec &theta, const Vec &x,
                             const Vec &u)
{
  return (model.eval_f(x, u, theta) - x).norm();
}

namespace
{

Setpoint setpoint_linear(const ParametricModel &model, const Vec &theta,
                         const TrackingTarget &target, const ConstraintSpec &cons)
{
  const int nx = model.n_x, nu = model.n_u, ny = model.n_y;
  const int n = nx + nu + ny;
  const LinearForm &lf = *model.linear;
  QpProblem qp;
  qp.H = Mat::Zero(n, n);
  qp.H.bottomRightCorner(ny, ny) = 2.0 * target.T;
  qp.g = Vec::Zero(n);
  qp.g.tail(ny) = -2.0 * target.T * target.y_d;

  qp.A_eq = Mat::Zero(nx + ny, n);
  qp.A_eq.block(0, 0, nx, nx) = lf.A(theta) - Mat::Identity(nx, nx);
  qp.A_eq.block(0, nx, nx, nu) = lf.B(theta);
  qp.A_eq.block(nx, 0, ny, nx) = lf.C;
  qp.A_eq.block(nx, nx, ny, nu) = lf.D;
  qp.A_eq.block(nx, nx + nu, ny, ny) = -Mat::Identity(ny, ny);
  qp.b_eq.resize(nx + ny);
  qp.b_eq << -lf.e(theta), -lf.c;

  if (cons.rows() > 0)
  {
    qp.A_in = Mat::Zero(cons.rows(), n);
    qp.A_in.leftCols(nx) = cons.D;
    qp.b_in = cons.d;
  }
  const double inf = std::numeric_limits<double>::infinity();
  qp.lb = Vec::Constant(n, -inf);
  qp.ub = Vec::Constant(n, inf);
  qp.lb.segment(nx, nu) = cons.us_lo();
  qp.ub.segment(nx, nu) = cons.us_hi();

  QpResult res;
  try
  {
    res = solve_qp(qp);
  }
  catch (const SolverError &)
  {
    // Outputs do not pin down (x, u): pick the minimum-norm representative.
    qp.H.diagonal().head(nx + nu).array() += 1e-9;
    res = solve_qp(qp);
  }
  if (!res.converged || res.primal_violation > 1e-8 * (1.0 + res.z.cwiseAbs().maxCoeff()))
  {
    std::ostringstream os;
    os << "optimal_setpoint: QP failed (kkt " << res.kkt_residual << ", violation "
       << res.primal_violation << ")";
    throw SolverError(os.str());
  }
  return {res.z.head(nx), res.z.segment(nx, nu), res.z.tail(ny)};
}

Setpoint setpoint_nonlinear(const ParametricModel &model, const Vec &theta,
                            const TrackingTarget &target, const ConstraintSpec &cons)
{
  const int nx = model.n_x, nu = model.n_u, ny = model.n_y;
  const int n = nx + nu + ny;
  const Eigen::LLT<Mat> tl(target.T);
  const Mat Tsqrt = tl.matrixU();

  NlpProblem nlp;
  nlp.n = n;
  nlp.residual = [&](const Vec &z, Vec &r, Mat *J) {
    r = Tsqrt * (z.tail(ny) - target.y_d);
    if (J)
    {
      *J = Mat::Zero(ny, n);
      J->rightCols(ny) = Tsqrt;
    }
  };
  nlp.eq = [&](const Vec &z, Vec &c, Mat *J) {
    const Vec x = z.head(nx), u = z.segment(nx, nu), y = z.tail(ny);
    c.resize(nx + ny);
    c << model.eval_f(x, u, theta) - x, model.eval_h(x, u, theta) - y;
    if (J)
    {
      Mat fx, fu, hx, hu;
      model.jacobian_f(x, u, theta, fx, fu);
      model.jacobian_h(x, u, theta, hx, hu);
      *J = Mat::Zero(nx + ny, n);
      J->block(0, 0, nx, nx) = fx - Mat::Identity(nx, nx);
      J->block(0, nx, nx, nu) = fu;
      J->block(nx, 0, ny, nx) = hx;
      J->block(nx, nx, ny, nu) = hu;
      J->block(nx, nx + nu, ny, ny) = -Mat::Identity(ny, ny);
    }
  };
  if (cons.rows() > 0)
  {
    nlp.ineq = [&](const Vec &z, Vec &c, Mat *J) {
      c = cons.D * z.head(nx) - cons.d;
      if (J)
      {
        *J = Mat::Zero(cons.rows(), n);
        J->leftCols(nx) = cons.D;
      }
    };
  }
  const double inf = std::numeric_limits<double>::infinity();
  nlp.lb = Vec::Constant(n, -inf);
  nlp.ub = Vec::Constant(n, inf);
  nlp.lb.segment(nx, nu) = cons.us_lo();
  nlp.ub.segment(nx, nu) = cons.us_hi();

  Vec z0 = Vec::Zero(n);
  z0.segment(nx, nu) = 0.5 * (cons.us_lo() + cons.us_hi());
  z0.tail(ny) = model.eval_h(z0.head(nx), z0.segment(nx, nu), theta);

  SqpOptions opts;
  opts.max_iter = 200;
  opts.kkt_tol = 1e-9;
  const SqpResult res = sqp_solve(nlp, z0, opts);
  if (!res.converged || res.infeasibility > 1e-8)
  {
    std::ostringstream os;
    os << "optimal_setpoint: SQP did not converge (kkt " << res.kkt_residual
       << ", infeasibility " << res.infeasibility << ")";
    throw SolverError(os.str());
  }
  return {res.z.head(nx), res.z.segment(nx, nu), res.z.tail(ny)};
}

} // namespace

Setpoint optimal_setpoint(const ParametricModel &model, const Vec &theta,
                          const TrackingTarget &target, const ConstraintSpec &constraints)
{
  require(theta.size() == model.n_theta, "optimal_setpoint: theta has wrong size");
  target.validate(model.n_y);
  constraints.validate(model.n_x, model.n_u);
  if (model.linear)
    return setpoint_linear(model, theta, target, constraints);
  return setpoint_nonlinear(model, theta, target, constraints);
}

double linear_param_defect(const ParametricModel &model, int samples, unsigned seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  auto randn = [&](int k) {
    Vec v(k);
    for (int i = 0; i < k; ++i)
      v(i) = nd(rng);
    return v;
  };
  double worst = 0.0;
  const Vec th0 = Vec::Zero(model.n_theta);
  for (int s = 0; s < samples; ++s)
  {
    const Vec x = randn(model.n_x), u = randn(model.n_u), th = randn(model.n_theta),
              w = randn(model.n_w);
    const Vec lhs = model.f(x, u, th, w) - model.f(x, u, th0, w) - model.G(x, u, w) * th;
    worst = std::max(worst, lhs.norm() / (1.0 + x.norm()));
  }
  return worst;
}

} // namespace acmpc

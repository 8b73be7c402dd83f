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

#include "acmpc/lqr.hpp"

#include <Eigen/Eigenvalues>

namespace acmpc
{

LqrResult solve_dare(const Mat &A, const Mat &B, const Mat &Q, const Mat &R, int max_iter,
                     double tol)
{
  require(A.rows() == A.cols(), "dare: A must be square");
  require(B.rows() == A.rows(), "dare: B has wrong row count");
  require(Q.rows() == A.rows() && Q.cols() == A.cols(), "dare: Q has wrong shape");
  require(R.rows() == B.cols() && R.cols() == B.cols(), "dare: R has wrong shape");

  LqrResult out;
  Mat P = Q;
  bool settled = false;
  for (int it = 1; it <= max_iter; ++it)
  {
    const Mat BtP = B.transpose() * P;
    const Mat S = R + BtP * B;
    const Mat Pn = Q + A.transpose() * P * A -
                   (BtP * A).transpose() * S.ldlt().solve(BtP * A);
    const Mat Psym = 0.5 * (Pn + Pn.transpose());
    if (!Psym.allFinite())
      break;
    const double diff = (Psym - P).cwiseAbs().maxCoeff();
    P = Psym;
    out.iterations = it;
    if (diff <= tol * (1.0 + P.cwiseAbs().maxCoeff()))
    {
      settled = true;
      break;
    }
  }
  if (!settled)
    throw SolverError("not stabilizable at setpoint");

  const Mat BtP = B.transpose() * P;
  out.K = -(R + BtP * B).ldlt().solve(BtP * A);
  out.P = P;
  const Mat Acl = A + B * out.K;
  out.spectral_radius = Acl.eigenvalues().cwiseAbs().maxCoeff();
  if (!(out.spectral_radius < 1.0))
    throw SolverError("not stabilizable at setpoint");
  return out;
}

TailPolicy make_lqr_feedback(const ParametricModel &model, const Vec &theta, const Vec &x_s,
                             const Vec &u_s, const Mat &Q, const Mat &R, const Vec &u_lo,
                             const Vec &u_hi, LqrResult *info)
{
  Mat A, B;
  model.jacobian_f(x_s, u_s, theta, A, B);
  LqrResult res = solve_dare(A, B, Q, R);
  TailPolicy tail = TailPolicy::feedback(res.K, u_lo, u_hi);
  if (info)
    *info = std::move(res);
  return tail;
}

} // namespace acmpc

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

#pragma once

#include "acmpc/types.hpp"

namespace acmpc
{

struct LpResult
{
  enum class Status
  {
    Optimal,
    Infeasible,
    Unbounded
  };
  Status status = Status::Infeasible;
  Vec x;
  double value = 0.0;
};

/**
 * @brief Dense two-phase simplex with Bland's rule
 *
 * max c'x  s.t.  A_le x <= b_le,  A_eq x = b_eq,  x >= 0.
 */
LpResult lp_maximize(const Vec &c, const Mat &A_le, const Vec &b_le, const Mat &A_eq,
                     const Vec &b_eq);

} // namespace acmpc

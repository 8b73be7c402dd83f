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

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace acmpc
{

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Raised for inconsistent dimensions, invalid weights and malformed configs.
class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

// Raised when a numerical routine cannot deliver a result.
class SolverError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string &msg)
{
  if (!cond)
    throw ConfigError(msg);
}

} // namespace acmpc

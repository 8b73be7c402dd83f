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

#include <cstdint>

namespace acmpc
{

/**
 * @brief Counter-based random numbers
 *
 * Every draw is a pure function of (seed, step, channel, index), so runs that
 * differ only in the controller see identical noise realizations.
 */
inline std::uint64_t mix64(std::uint64_t z)
{
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t keyed_bits(std::uint64_t seed, std::uint64_t step, std::uint64_t channel,
                                std::uint64_t index)
{
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ step);
  h = mix64(h ^ (channel << 32) ^ index);
  return h;
}

/// Uniform in [0, 1).
inline double keyed_uniform(std::uint64_t seed, std::uint64_t step, std::uint64_t channel,
                            std::uint64_t index)
{
  return static_cast<double>(keyed_bits(seed, step, channel, index) >> 11) * 0x1.0p-53;
}

} // namespace acmpc

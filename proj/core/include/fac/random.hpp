// core/include/fac/random.hpp

// Copyright 2026  fac contributors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef FAC_RANDOM_HPP_
#define FAC_RANDOM_HPP_

#include <cstdint>
#include <random>

#include "fac/frame_sequence.hpp"

namespace fac {

using Rng = std::mt19937_64;

Matrix random_normal(Index rows, Index cols, double stddev, Rng &rng);
Matrix random_uniform(Index rows, Index cols, double lo, double hi, Rng &rng);

/// splitmix64 finalizer; used to derive independent seeds from one root seed.
uint64_t mix_seed(uint64_t seed, uint64_t stream);

}  // namespace fac

#endif  // FAC_RANDOM_HPP_

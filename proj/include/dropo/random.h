// Copyright 2026 The dropo Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DROPO_RANDOM_H_
#define DROPO_RANDOM_H_

#include <cstdint>
#include <random>

namespace dropo {

using Rng = std::mt19937_64;

// independent stream families derived from one master seed
enum class Stream : std::uint64_t {
  kLikelihood = 1,   // dynamics samples, keyed by evaluation index
  kCmaes = 2,        // optimizer candidate sampling
  kGroundTruth = 3,  // data generation: dynamics draws
  kNoise = 4,        // data generation: observation noise
  kPolicy = 5,       // data generation: excitation parameters
  kReport = 6,       // final-report evaluations
};

// splitmix64 finalizer
constexpr std::uint64_t Mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t DeriveSeed(std::uint64_t master, Stream stream,
                                   std::uint64_t index = 0) {
  std::uint64_t h = Mix64(master);
  h = Mix64(h ^ static_cast<std::uint64_t>(stream));
  return Mix64(h ^ index);
}

inline Rng MakeRng(std::uint64_t master, Stream stream,
                   std::uint64_t index = 0) {
  return Rng(DeriveSeed(master, stream, index));
}

}  // namespace dropo

#endif  // DROPO_RANDOM_H_

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

#ifndef DROPO_NORMALIZE_H_
#define DROPO_NORMALIZE_H_

#include <Eigen/Core>

#include "dropo/core.h"

namespace dropo {

inline constexpr double kNormalizedMax = 4.0;

// search coordinates in [0, 4]^{2d}: the first d entries are the means,
// mapped linearly from [lower, upper]; the last d are the stds, mapped in log
// scale from [std_min, std_max]
struct NormalizedPhi {
  VectorXd z;
};

// throws InvalidArgument on degenerate bounds or phi outside the box
NormalizedPhi NormalizePhi(const DynamicsDistribution& phi);

// z is clamped to [0, 4] first
DynamicsDistribution DenormalizePhi(const NormalizedPhi& z,
                                    const ParameterSpace& space);

// the mean half of the map, used by the mean-only search
VectorXd NormalizeMeans(const VectorXd& mean, const ParameterSpace& space);
VectorXd DenormalizeMeans(const VectorXd& z, const ParameterSpace& space);

// physical length of one normalized unit along each mean axis
VectorXd MeanScale(const ParameterSpace& space);

}  // namespace dropo

#endif  // DROPO_NORMALIZE_H_

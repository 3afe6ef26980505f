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

#include "dropo/normalize.h"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dropo {
namespace {

void CheckSpace(const ParameterSpace& space) {
  const int d = space.dim();
  if (space.lower.size() != d || space.upper.size() != d ||
      space.std_max.size() != d) {
    throw InvalidArgument("parameter space dimension mismatch");
  }
  for (int i = 0; i < d; ++i) {
    if (!(space.upper[i] > space.lower[i])) {
      throw InvalidArgument("degenerate search bounds for '" + space.names[i] +
                            "' (upper must exceed lower)");
    }
    if (!(space.std_min > 0.0) || !(space.std_max[i] > space.std_min)) {
      throw InvalidArgument("degenerate std bounds for '" + space.names[i] +
                            "' (std_max must exceed std_min > 0)");
    }
  }
}

}  // namespace

VectorXd MeanScale(const ParameterSpace& space) {
  return (space.upper - space.lower) / kNormalizedMax;
}

VectorXd NormalizeMeans(const VectorXd& mean, const ParameterSpace& space) {
  CheckSpace(space);
  if (mean.size() != space.dim()) {
    throw InvalidArgument("mean dimension mismatch");
  }
  for (int i = 0; i < space.dim(); ++i) {
    if (mean[i] < space.lower[i] || mean[i] > space.upper[i]) {
      std::ostringstream os;
      os << "mean of '" << space.names[i] << "' (" << mean[i]
         << ") lies outside [" << space.lower[i] << ", " << space.upper[i]
         << "]";
      throw InvalidArgument(os.str());
    }
  }
  return kNormalizedMax *
         (mean - space.lower).cwiseQuotient(space.upper - space.lower);
}

VectorXd DenormalizeMeans(const VectorXd& z, const ParameterSpace& space) {
  CheckSpace(space);
  if (z.size() != space.dim()) throw InvalidArgument("z dimension mismatch");
  const VectorXd u = z.cwiseMax(0.0).cwiseMin(kNormalizedMax) / kNormalizedMax;
  VectorXd mean = space.lower + u.cwiseProduct(space.upper - space.lower);
  // keep the endpoints exact
  for (int i = 0; i < space.dim(); ++i) {
    if (u[i] == 0.0) mean[i] = space.lower[i];
    if (u[i] == 1.0) mean[i] = space.upper[i];
  }
  return mean;
}

NormalizedPhi NormalizePhi(const DynamicsDistribution& phi) {
  const ParameterSpace& space = phi.space;
  const int d = space.dim();
  if (phi.std.size() != d) throw InvalidArgument("std dimension mismatch");
  NormalizedPhi out;
  out.z.resize(2 * d);
  out.z.head(d) = NormalizeMeans(phi.mean, space);
  const double log_min = std::log(space.std_min);
  for (int i = 0; i < d; ++i) {
    const double s = phi.std[i];
    if (s < space.std_min || s > space.std_max[i]) {
      std::ostringstream os;
      os << "std of '" << space.names[i] << "' (" << s << ") lies outside ["
         << space.std_min << ", " << space.std_max[i] << "]";
      throw InvalidArgument(os.str());
    }
    out.z[d + i] = kNormalizedMax * (std::log(s) - log_min) /
                   (std::log(space.std_max[i]) - log_min);
  }
  return out;
}

DynamicsDistribution DenormalizePhi(const NormalizedPhi& z,
                                    const ParameterSpace& space) {
  const int d = space.dim();
  if (z.z.size() != 2 * d) {
    throw InvalidArgument("normalized vector must have 2 * dim entries");
  }
  DynamicsDistribution phi;
  phi.space = space;
  phi.mean = DenormalizeMeans(z.z.head(d), space);
  phi.std.resize(d);
  const double log_min = std::log(space.std_min);
  for (int i = 0; i < d; ++i) {
    const double u =
        std::clamp(z.z[d + i], 0.0, kNormalizedMax) / kNormalizedMax;
    const double log_max = std::log(space.std_max[i]);
    if (u == 0.0) {
      phi.std[i] = space.std_min;
    } else if (u == 1.0) {
      phi.std[i] = space.std_max[i];
    } else {
      phi.std[i] = std::exp(log_min + u * (log_max - log_min));
    }
  }
  return phi;
}

}  // namespace dropo

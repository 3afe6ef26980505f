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

#ifndef DROPO_AKIMA_H_
#define DROPO_AKIMA_H_

#include <Eigen/Core>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "dropo/core.h"

namespace dropo {

// Akima's local piecewise-cubic interpolant. Knot slopes weight the
// neighbouring chord slopes by the change of slope on the opposite side,
// which keeps flat runs flat and avoids the ringing of a global cubic
// spline. Two extra chords are extrapolated linearly at each end. With fewer
// than five knots the interpolant is piecewise linear.
template <typename Scalar>
class AkimaSpline {
 public:
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  static constexpr int kMinKnotsForCubic = 5;

  AkimaSpline() = default;

  static AkimaSpline Fit(const Vector& xs, const Vector& ys) {
    const Eigen::Index n = xs.size();
    if (n != ys.size())
      throw InvalidArgument("akima: xs and ys differ in size");
    if (n < 2) throw InvalidArgument("akima: need at least 2 knots");
    for (Eigen::Index i = 1; i < n; ++i) {
      if (!(xs[i] > xs[i - 1])) {
        std::ostringstream os;
        os << "akima: knots not strictly increasing at index " << i;
        throw InvalidArgument(os.str());
      }
    }

    AkimaSpline s;
    s.x_ = xs;
    s.y_ = ys;
    const Eigen::Index segments = n - 1;
    const Vector h = xs.tail(segments) - xs.head(segments);
    const Vector chord =
        ((ys.tail(segments) - ys.head(segments)).array() / h.array()).matrix();

    s.slope_.resize(n);
    if (n < kMinKnotsForCubic) {
      // piecewise linear: each segment carries its chord slope
      s.b_ = chord;
      s.c_ = Vector::Zero(segments);
      s.d_ = Vector::Zero(segments);
      return s;
    }

    // chords m[2 .. n] are the data; two ghost chords on each side
    Vector m(segments + 4);
    m.segment(2, segments) = chord;
    m[1] = 2 * m[2] - m[3];
    m[0] = 2 * m[1] - m[2];
    m[segments + 2] = 2 * m[segments + 1] - m[segments];
    m[segments + 3] = 2 * m[segments + 2] - m[segments + 1];

    for (Eigen::Index i = 0; i < n; ++i) {
      // knot i sits between chords m[i+1] (left) and m[i+2] (right)
      const Scalar w_left = std::abs(m[i + 3] - m[i + 2]);
      const Scalar w_right = std::abs(m[i + 1] - m[i]);
      const Scalar total = w_left + w_right;
      s.slope_[i] = total == Scalar(0)
                        ? Scalar(0.5) * (m[i + 1] + m[i + 2])
                        : (w_left * m[i + 1] + w_right * m[i + 2]) / total;
    }

    s.b_ = s.slope_.head(segments);
    s.c_.resize(segments);
    s.d_.resize(segments);
    for (Eigen::Index i = 0; i < segments; ++i) {
      const Scalar t0 = s.slope_[i];
      const Scalar t1 = s.slope_[i + 1];
      s.c_[i] = (3 * chord[i] - 2 * t0 - t1) / h[i];
      s.d_[i] = (t0 + t1 - 2 * chord[i]) / (h[i] * h[i]);
    }
    return s;
  }

  Scalar operator()(Scalar x) const {
    const Eigen::Index i = Segment(x);
    const Scalar dx = x - x_[i];
    return y_[i] + dx * (b_[i] + dx * (c_[i] + dx * d_[i]));
  }

  Scalar Derivative(Scalar x) const {
    const Eigen::Index i = Segment(x);
    const Scalar dx = x - x_[i];
    return b_[i] + dx * (2 * c_[i] + 3 * dx * d_[i]);
  }

  Scalar x_min() const { return x_[0]; }
  Scalar x_max() const { return x_[x_.size() - 1]; }
  const Vector& knots() const { return x_; }

 private:
  Eigen::Index Segment(Scalar x) const {
    if (!(x >= x_min() && x <= x_max())) {
      std::ostringstream os;
      os << "akima: " << x << " outside knot range [" << x_min() << ", "
         << x_max() << "], extrapolation is not supported";
      throw InvalidArgument(os.str());
    }
    const Scalar* begin = x_.data();
    const Scalar* end = begin + x_.size();
    const Eigen::Index upper = std::upper_bound(begin, end, x) - begin;
    return std::clamp<Eigen::Index>(upper - 1, 0, x_.size() - 2);
  }

  Vector x_, y_, slope_;
  Vector b_, c_, d_;  // per-segment polynomial coefficients
};

}  // namespace dropo

#endif  // DROPO_AKIMA_H_

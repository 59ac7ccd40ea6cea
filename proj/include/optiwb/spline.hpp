// Copyright 2026 The OptiWB Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <array>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

namespace optiwb {

/// Vector-valued clamped cubic B-spline: first and last knots repeat four
/// times so the curve starts and ends on its first and last control points.
template <typename Scalar>
class ClampedCubicBSpline {
 public:
  static constexpr int kDegree = 3;
  using Knots = std::vector<Scalar>;
  using ControlPoints = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;  // dim x count
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  ClampedCubicBSpline() = default;

  ClampedCubicBSpline(Knots knots, ControlPoints control_points)
      : knots_(std::move(knots)), control_points_(std::move(control_points)) {
    if (knots_.size() < 8) throw std::invalid_argument("clamped cubic spline needs at least 8 knots");
    if (static_cast<Eigen::Index>(knots_.size()) != control_points_.cols() + kDegree + 1)
      throw std::invalid_argument("knot count must equal control point count + 4");
    for (std::size_t i = 1; i < knots_.size(); ++i)
      if (knots_[i] < knots_[i - 1]) throw std::invalid_argument("knots must be non-decreasing");
    for (int i = 1; i <= kDegree; ++i) {
      if (knots_[i] != knots_[0] || knots_[knots_.size() - 1 - i] != knots_.back())
        throw std::invalid_argument("end knots must have multiplicity 4");
    }
    if (!(knots_.back() > knots_.front())) throw std::invalid_argument("spline domain is empty");
  }

  /// Knot vector with the interpolation sites as breakpoints.
  static Knots knots_for_sites(const std::vector<Scalar>& sites) {
    if (sites.size() < 2) throw std::invalid_argument("need at least two interpolation sites");
    Knots knots;
    knots.reserve(sites.size() + 6);
    for (int i = 0; i < kDegree; ++i) knots.push_back(sites.front());
    knots.insert(knots.end(), sites.begin(), sites.end());
    for (int i = 0; i < kDegree; ++i) knots.push_back(sites.back());
    return knots;
  }

  const Knots& knots() const { return knots_; }
  const ControlPoints& control_points() const { return control_points_; }
  Eigen::Index dimension() const { return control_points_.rows(); }
  Scalar start() const { return knots_.front(); }
  Scalar end() const { return knots_.back(); }

  /// Index of the knot span containing t; the last span is closed on the right.
  int span(Scalar t) const { return find_span(knots_, t); }

  /// Value (derivative = 0) or derivative of the requested order (<= 3).
  Vector evaluate(Scalar t, int derivative = 0) const {
    const int s = span(t);
    const auto ders = basis_derivatives(knots_, s, t, derivative);
    Vector out = Vector::Zero(dimension());
    for (int j = 0; j <= kDegree; ++j) out += ders[derivative][j] * control_points_.col(s - kDegree + j);
    return out;
  }

  static int find_span(const Knots& knots, Scalar t) {
    const int n = static_cast<int>(knots.size()) - kDegree - 2;  // last control index
    if (t >= knots[n + 1]) return n;
    if (t <= knots[kDegree]) return kDegree;
    const auto it = std::upper_bound(knots.begin() + kDegree, knots.begin() + n + 2, t);
    return static_cast<int>(it - knots.begin()) - 1;
  }

  /// Non-zero basis functions N_{s-3..s} and their derivatives up to `order`
  /// at t, following the standard triangular recurrence.
  static std::array<std::array<Scalar, 4>, 4> basis_derivatives(const Knots& u, int s, Scalar t, int order) {
    constexpr int p = kDegree;
    Scalar ndu[p + 1][p + 1];
    Scalar left[p + 1], right[p + 1];
    ndu[0][0] = Scalar(1);
    for (int j = 1; j <= p; ++j) {
      left[j] = t - u[s + 1 - j];
      right[j] = u[s + j] - t;
      Scalar saved = Scalar(0);
      for (int r = 0; r < j; ++r) {
        ndu[j][r] = right[r + 1] + left[j - r];
        const Scalar temp = ndu[r][j - 1] / ndu[j][r];
        ndu[r][j] = saved + right[r + 1] * temp;
        saved = left[j - r] * temp;
      }
      ndu[j][j] = saved;
    }
    std::array<std::array<Scalar, 4>, 4> ders{};
    for (int j = 0; j <= p; ++j) ders[0][j] = ndu[j][p];
    Scalar a[2][p + 1];
    for (int r = 0; r <= p; ++r) {
      int s1 = 0, s2 = 1;
      a[0][0] = Scalar(1);
      for (int k = 1; k <= order; ++k) {
        Scalar d = Scalar(0);
        const int rk = r - k, pk = p - k;
        if (r >= k) {
          a[s2][0] = a[s1][0] / ndu[pk + 1][rk];
          d = a[s2][0] * ndu[rk][pk];
        }
        const int j1 = rk >= -1 ? 1 : -rk;
        const int j2 = (r - 1 <= pk) ? k - 1 : p - r;
        for (int j = j1; j <= j2; ++j) {
          a[s2][j] = (a[s1][j] - a[s1][j - 1]) / ndu[pk + 1][rk + j];
          d += a[s2][j] * ndu[rk + j][pk];
        }
        if (r <= pk) {
          a[s2][k] = -a[s1][k - 1] / ndu[pk + 1][r];
          d += a[s2][k] * ndu[r][pk];
        }
        ders[k][r] = d;
        std::swap(s1, s2);
      }
    }
    Scalar factor = Scalar(p);
    for (int k = 1; k <= order; ++k) {
      for (int j = 0; j <= p; ++j) ders[k][j] *= factor;
      factor *= Scalar(p - k);
    }
    return ders;
  }

 private:
  Knots knots_;
  ControlPoints control_points_;
};

/// Interpolation through values at fixed sites with prescribed end
/// velocities. The collocation system depends only on the sites, so one
/// factorization serves every data set.
template <typename Scalar>
class CubicInterpolator {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Spline = ClampedCubicBSpline<Scalar>;

  explicit CubicInterpolator(std::vector<Scalar> sites) : sites_(std::move(sites)) {
    for (std::size_t i = 1; i < sites_.size(); ++i)
      if (!(sites_[i] > sites_[i - 1])) throw std::invalid_argument("interpolation sites must increase");
    knots_ = Spline::knots_for_sites(sites_);
    const int count = static_cast<int>(sites_.size()) + 2;
    Matrix system = Matrix::Zero(count, count);
    // Row order: start velocity, values at every site, end velocity.
    const auto add_row = [&](int row, Scalar t, int derivative) {
      const int s = Spline::find_span(knots_, t);
      const auto ders = Spline::basis_derivatives(knots_, s, t, derivative);
      for (int j = 0; j <= 3; ++j) system(row, s - 3 + j) += ders[derivative][j];
    };
    add_row(0, sites_.front(), 1);
    for (std::size_t i = 0; i < sites_.size(); ++i) add_row(static_cast<int>(i) + 1, sites_[i], 0);
    add_row(count - 1, sites_.back(), 1);
    lu_.compute(system);
  }

  const std::vector<Scalar>& sites() const { return sites_; }
  const typename Spline::Knots& knots() const { return knots_; }

  /// values: dim x sites; end velocities default to rest.
  Spline interpolate(const Matrix& values) const {
    const Eigen::Index dim = values.rows();
    return interpolate(values, Matrix::Zero(dim, 1), Matrix::Zero(dim, 1));
  }

  Spline interpolate(const Matrix& values, const Matrix& start_velocity, const Matrix& end_velocity) const {
    const Eigen::Index dim = values.rows();
    const Eigen::Index n = static_cast<Eigen::Index>(sites_.size());
    if (values.cols() != n) throw std::invalid_argument("value count must match site count");
    Matrix rhs(n + 2, dim);
    rhs.row(0) = start_velocity.transpose();
    rhs.middleRows(1, n) = values.transpose();
    rhs.row(n + 1) = end_velocity.transpose();
    const Matrix controls = lu_.solve(rhs);
    return Spline(knots_, controls.transpose());
  }

  /// Linear map from rest-to-rest site values (sites x 1 per dimension) to
  /// the spline's derivative of the given order at `times`.
  Matrix sampling_matrix(const std::vector<Scalar>& times, int derivative) const {
    const Eigen::Index n = static_cast<Eigen::Index>(sites_.size());
    Matrix basis = Matrix::Zero(static_cast<Eigen::Index>(times.size()), n + 2);
    for (std::size_t r = 0; r < times.size(); ++r) {
      const int s = Spline::find_span(knots_, times[r]);
      const auto ders = Spline::basis_derivatives(knots_, s, times[r], derivative);
      for (int j = 0; j <= 3; ++j) basis(static_cast<Eigen::Index>(r), s - 3 + j) = ders[derivative][j];
    }
    Matrix selector = Matrix::Zero(n + 2, n);
    selector.middleRows(1, n) = Matrix::Identity(n, n);
    const Matrix data_to_controls = lu_.solve(selector);
    return basis * data_to_controls;
  }

 private:
  std::vector<Scalar> sites_;
  typename Spline::Knots knots_;
  Eigen::PartialPivLU<Matrix> lu_;
};

}  // namespace optiwb

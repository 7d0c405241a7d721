#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <utility>

namespace saddle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// A primal-dual point z = (x, y).
struct PointPair {
  Vector x;
  Vector y;

  PointPair() = default;
  PointPair(Vector x_block, Vector y_block)
      : x(std::move(x_block)), y(std::move(y_block)) {}

  static PointPair zeros(Eigen::Index dim_x, Eigen::Index dim_y) {
    return {Vector::Zero(dim_x), Vector::Zero(dim_y)};
  }

  Eigen::Index dim_x() const { return x.size(); }
  Eigen::Index dim_y() const { return y.size(); }

  double squared_norm() const { return x.squaredNorm() + y.squaredNorm(); }
  double norm() const { return std::sqrt(squared_norm()); }
  bool all_finite() const { return x.allFinite() && y.allFinite(); }

  double squared_distance(const PointPair& other) const {
    return (x - other.x).squaredNorm() + (y - other.y).squaredNorm();
  }
};

/// Value of the operator F(z) = (grad_x f, -grad_y f), or a stochastic
/// estimate of it. `calls` counts the gradient-oracle invocations behind it.
struct FieldValue {
  Vector gx;
  Vector gy_neg;
  std::int64_t calls = 0;

  double squared_norm() const {
    return gx.squaredNorm() + gy_neg.squaredNorm();
  }
  bool all_finite() const { return gx.allFinite() && gy_neg.allFinite(); }
};

/// Randomness of one oracle call. Identical (seed, batch, z) always produces
/// an identical gradient.
struct OracleSample {
  std::uint64_t seed = 0;
  int batch = 1;
};

}  // namespace saddle

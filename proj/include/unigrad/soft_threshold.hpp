#pragma once

#include <Eigen/Dense>

#include <stdexcept>

namespace unigrad {

/// Componentwise sign(z)·max(|z| − τ, 0), the prox of τ‖·‖₁.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> soft_threshold(
    const Eigen::MatrixBase<Derived>& z, typename Derived::Scalar tau) {
  using Scalar = typename Derived::Scalar;
  if (!(tau >= Scalar(0)))
    throw std::invalid_argument("soft_threshold: tau must be nonnegative");
  return z.unaryExpr([tau](Scalar zi) {
    const Scalar mag = std::abs(zi) - tau;
    if (mag <= Scalar(0)) return Scalar(0);
    return zi > Scalar(0) ? mag : -mag;
  });
}

}  // namespace unigrad

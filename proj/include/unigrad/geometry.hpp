#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <type_traits>

namespace unigrad {

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Vector parameter excluded from Scalar deduction, so Eigen expressions bind.
template <typename Scalar>
using VectorIn = std::type_identity_t<Vector<Scalar>>;

using Index = Eigen::Index;

class DimensionMismatch : public std::invalid_argument {
 public:
  DimensionMismatch(const std::string& where, Index expected, Index got)
      : std::invalid_argument(where + ": dimension mismatch (expected " +
                              std::to_string(expected) + ", got " +
                              std::to_string(got) + ")") {}
};

inline void require_dimension(const char* where, Index expected, Index got) {
  if (expected != got) throw DimensionMismatch(where, expected, got);
}

enum class ProxKind { SquaredEuclidean };

/// Hölder data of the prox-function gradient: ‖∇d(x) − ∇d(y)‖ ≤ M_d‖x − y‖^degree.
template <typename Scalar>
struct GeometrySmoothness {
  Scalar degree;
  Scalar modulus;
};

/// A 1-strongly convex prox-function d with min d = 0 attained at `center`.
///
/// Only the squared-Euclidean kind ½‖x − c‖² ships; the kind tag marks the
/// extension point. Norms are Euclidean throughout, so the dual norm is too.
template <typename Scalar>
class ProxFunction {
 public:
  explicit ProxFunction(Vector<Scalar> center,
                        ProxKind kind = ProxKind::SquaredEuclidean)
      : center_(std::move(center)), kind_(kind) {
    if (center_.size() <= 0)
      throw std::invalid_argument("ProxFunction: dimension must be positive");
  }

  static ProxFunction squared_euclidean(Index dimension) {
    return ProxFunction(Vector<Scalar>::Zero(dimension));
  }

  Index dimension() const { return center_.size(); }
  const Vector<Scalar>& center() const { return center_; }
  ProxKind kind() const { return kind_; }

  ProxFunction recentered(Vector<Scalar> center) const {
    require_dimension("ProxFunction::recentered", dimension(), center.size());
    return ProxFunction(std::move(center), kind_);
  }

  template <typename Derived>
  Scalar value(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension("prox_value", dimension(), x.size());
    return Scalar(0.5) * (x - center_).squaredNorm();
  }

  template <typename Derived>
  Vector<Scalar> gradient(const Eigen::MatrixBase<Derived>& x) const {
    require_dimension("prox_gradient", dimension(), x.size());
    return x - center_;
  }

  GeometrySmoothness<Scalar> smoothness() const { return {Scalar(1), Scalar(1)}; }

 private:
  Vector<Scalar> center_;
  ProxKind kind_;
};

template <typename Scalar, typename Derived>
Scalar prox_value(const ProxFunction<Scalar>& d,
                  const Eigen::MatrixBase<Derived>& x) {
  return d.value(x);
}

/// ξ(x, y) = d(y) − d(x) − ⟨∇d(x), y − x⟩.
template <typename Scalar, typename DerivedX, typename DerivedY>
Scalar bregman_distance(const ProxFunction<Scalar>& d,
                        const Eigen::MatrixBase<DerivedX>& x,
                        const Eigen::MatrixBase<DerivedY>& y) {
  require_dimension("bregman_distance", d.dimension(), x.size());
  require_dimension("bregman_distance", d.dimension(), y.size());
  // squared-Euclidean: the center cancels and ξ(x, y) = ½‖y − x‖² exactly.
  return Scalar(0.5) * (y - x).squaredNorm();
}

/// ∇_y ξ(x, y) = ∇d(y) − ∇d(x).
template <typename Scalar, typename DerivedX, typename DerivedY>
Vector<Scalar> bregman_distance_grad_y(const ProxFunction<Scalar>& d,
                                       const Eigen::MatrixBase<DerivedX>& x,
                                       const Eigen::MatrixBase<DerivedY>& y) {
  require_dimension("bregman_distance_grad_y", d.dimension(), x.size());
  require_dimension("bregman_distance_grad_y", d.dimension(), y.size());
  return y - x;
}

}  // namespace unigrad

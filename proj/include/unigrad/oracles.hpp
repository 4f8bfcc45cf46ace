#pragma once

#include "unigrad/geometry.hpp"
#include "unigrad/soft_threshold.hpp"

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace unigrad {

/// (v, M_v) with ‖∇g(x) − ∇g(y)‖ ≤ M_v‖x − y‖^v.
template <typename Scalar>
struct HolderConstants {
  Scalar degree;
  Scalar modulus;
};

/// One loss g_t. `subgradient` is a fixed selection from ∂g_t; the Hölder
/// constants are supplied by whoever builds the oracle and are only read by
/// fixed-step variants and bound checks.
template <typename Scalar>
struct ComponentOracle {
  std::function<Scalar(const Vector<Scalar>&)> value;
  std::function<Vector<Scalar>(const Vector<Scalar>&)> subgradient;
  HolderConstants<Scalar> holder{Scalar(1), Scalar(1)};
};

class UnsupportedStructure : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

enum class RegularizerKind { Zero, L1, ElasticNet, Custom };

inline const char* to_string(RegularizerKind kind) {
  switch (kind) {
    case RegularizerKind::Zero: return "zero";
    case RegularizerKind::L1: return "l1";
    case RegularizerKind::ElasticNet: return "elastic-net";
    case RegularizerKind::Custom: return "custom";
  }
  return "unknown";
}

/// The fixed convex regularizer h.
///
/// Built-in kinds are h = 0, h = μ‖x‖₁ and h = μ‖x‖₁ + (σ/2)‖x‖². A custom
/// regularizer carries its own value and, optionally, a proximal operator
/// prox(z, τ) = argmin_x ½‖x − z‖² + τh(x).
template <typename Scalar>
class Regularizer {
 public:
  using ValueFn = std::function<Scalar(const Vector<Scalar>&)>;
  using ProxFn = std::function<Vector<Scalar>(const Vector<Scalar>&, Scalar)>;

  static Regularizer zero() { return Regularizer(RegularizerKind::Zero, 0, 0); }

  static Regularizer l1(Scalar mu) {
    if (!(mu >= Scalar(0)))
      throw std::invalid_argument("Regularizer::l1: weight must be nonnegative");
    return Regularizer(RegularizerKind::L1, mu, 0);
  }

  static Regularizer elastic_net(Scalar mu, Scalar sigma) {
    if (!(mu >= Scalar(0)) || !(sigma >= Scalar(0)))
      throw std::invalid_argument(
          "Regularizer::elastic_net: weights must be nonnegative");
    return Regularizer(RegularizerKind::ElasticNet, mu, sigma);
  }

  static Regularizer custom(ValueFn value, ProxFn prox = {},
                            Scalar strong_convexity = Scalar(0)) {
    Regularizer h(RegularizerKind::Custom, 0, 0);
    h.value_ = std::move(value);
    h.prox_ = std::move(prox);
    h.custom_mu_ = strong_convexity;
    return h;
  }

  RegularizerKind kind() const { return kind_; }
  Scalar l1_weight() const { return mu_; }
  Scalar ridge() const { return sigma_; }

  /// μ_h, the strong-convexity modulus.
  Scalar strong_convexity() const {
    return kind_ == RegularizerKind::Custom ? custom_mu_ : sigma_;
  }

  Scalar value(const Vector<Scalar>& x) const {
    switch (kind_) {
      case RegularizerKind::Zero: return Scalar(0);
      case RegularizerKind::L1: return mu_ * x.template lpNorm<1>();
      case RegularizerKind::ElasticNet:
        return mu_ * x.template lpNorm<1>() + Scalar(0.5) * sigma_ * x.squaredNorm();
      case RegularizerKind::Custom: return value_(x);
    }
    return Scalar(0);
  }

  bool has_prox() const { return kind_ != RegularizerKind::Custom || bool(prox_); }

  /// argmin_x ½‖x − z‖² + τ·h(x).
  Vector<Scalar> prox(const Vector<Scalar>& z, Scalar tau) const {
    if (!(tau >= Scalar(0)))
      throw std::invalid_argument("Regularizer::prox: tau must be nonnegative");
    switch (kind_) {
      case RegularizerKind::Zero: return z;
      case RegularizerKind::L1: return soft_threshold(z, tau * mu_);
      case RegularizerKind::ElasticNet:
        return soft_threshold(z, tau * mu_) / (Scalar(1) + tau * sigma_);
      case RegularizerKind::Custom:
        if (!prox_)
          throw UnsupportedStructure(
              "Regularizer::prox: custom regularizer has no proximal operator");
        return prox_(z, tau);
    }
    return z;
  }

  /// Subgradient selection with sign(0) = 0.
  Vector<Scalar> subgradient(const Vector<Scalar>& x) const {
    switch (kind_) {
      case RegularizerKind::Zero: return Vector<Scalar>::Zero(x.size());
      case RegularizerKind::L1: return mu_ * sign(x);
      case RegularizerKind::ElasticNet: return mu_ * sign(x) + sigma_ * x;
      case RegularizerKind::Custom: break;
    }
    throw UnsupportedStructure("Regularizer::subgradient: custom regularizer");
  }

  /// dist(0, smooth_grad + ∂h(x)), the first-order optimality residual of
  /// min_x s(x) + h(x) given smooth_grad = ∇s(x).
  Scalar stationarity_residual(const Vector<Scalar>& x,
                               const Vector<Scalar>& smooth_grad) const {
    require_dimension("stationarity_residual", x.size(), smooth_grad.size());
    if (kind_ == RegularizerKind::Custom)
      throw UnsupportedStructure(
          "stationarity_residual: custom regularizer has no subdifferential rule");
    Vector<Scalar> v = smooth_grad;
    if (kind_ == RegularizerKind::ElasticNet) v += sigma_ * x;
    if (kind_ == RegularizerKind::Zero) return v.norm();
    Scalar sq = 0;
    for (Index i = 0; i < x.size(); ++i) {
      Scalar r;
      if (x[i] > 0) r = v[i] + mu_;
      else if (x[i] < 0) r = v[i] - mu_;
      else r = std::max(std::abs(v[i]) - mu_, Scalar(0));
      sq += r * r;
    }
    return std::sqrt(sq);
  }

 private:
  Regularizer(RegularizerKind kind, Scalar mu, Scalar sigma)
      : kind_(kind), mu_(mu), sigma_(sigma) {}

  static Vector<Scalar> sign(const Vector<Scalar>& x) {
    return x.unaryExpr([](Scalar xi) {
      return xi > 0 ? Scalar(1) : (xi < 0 ? Scalar(-1) : Scalar(0));
    });
  }

  RegularizerKind kind_;
  Scalar mu_ = 0;
  Scalar sigma_ = 0;
  Scalar custom_mu_ = 0;
  ValueFn value_;
  ProxFn prox_;
};

/// f(x) = (1/n)Σ g_i(x) + h(x) over a fixed list of components.
template <typename Scalar>
class CompositeProblem {
 public:
  CompositeProblem(Index dimension, std::vector<ComponentOracle<Scalar>> components,
                   Regularizer<Scalar> regularizer)
      : dimension_(dimension),
        components_(std::move(components)),
        regularizer_(std::move(regularizer)) {
    if (dimension_ <= 0)
      throw std::invalid_argument("CompositeProblem: dimension must be positive");
    if (components_.empty())
      throw std::invalid_argument("CompositeProblem: needs at least one component");
  }

  Index dimension() const { return dimension_; }
  Index size() const { return static_cast<Index>(components_.size()); }

  const ComponentOracle<Scalar>& component(Index t) const {
    if (t < 0 || t >= size())
      throw std::out_of_range("component index " + std::to_string(t) +
                              " out of range [0, " + std::to_string(size()) + ")");
    return components_[static_cast<std::size_t>(t)];
  }

  const std::vector<ComponentOracle<Scalar>>& components() const { return components_; }
  const Regularizer<Scalar>& regularizer() const { return regularizer_; }

  ProxFunction<Scalar> geometry() const {
    return ProxFunction<Scalar>::squared_euclidean(dimension_);
  }

  /// Common degree and the largest modulus over all components.
  HolderConstants<Scalar> stream_holder() const {
    HolderConstants<Scalar> out = components_.front().holder;
    for (const auto& c : components_) {
      if (c.holder.degree != out.degree)
        throw std::invalid_argument(
            "stream_holder: components have different Hölder degrees");
      out.modulus = std::max(out.modulus, c.holder.modulus);
    }
    return out;
  }

 private:
  Index dimension_;
  std::vector<ComponentOracle<Scalar>> components_;
  Regularizer<Scalar> regularizer_;
};

template <typename Scalar>
Scalar component_value(const CompositeProblem<Scalar>& p, Index t,
                       const VectorIn<Scalar>& x) {
  const auto& g = p.component(t);
  require_dimension("component_value", p.dimension(), x.size());
  return g.value(x);
}

template <typename Scalar>
Vector<Scalar> component_subgradient(const CompositeProblem<Scalar>& p, Index t,
                                     const VectorIn<Scalar>& x) {
  const auto& g = p.component(t);
  require_dimension("component_subgradient", p.dimension(), x.size());
  return g.subgradient(x);
}

/// f_{g_t}(x) = g_t(x) + h(x); the regularizer is charged every round.
template <typename Scalar>
Scalar per_sample_value(const CompositeProblem<Scalar>& p, Index t,
                        const VectorIn<Scalar>& x) {
  return component_value(p, t, x) + p.regularizer().value(x);
}

/// g(x) = (1/n)Σ g_i(x).
template <typename Scalar>
Scalar smooth_value(const CompositeProblem<Scalar>& p, const VectorIn<Scalar>& x) {
  require_dimension("smooth_value", p.dimension(), x.size());
  Scalar sum = 0;
  for (const auto& g : p.components()) sum += g.value(x);
  return sum / static_cast<Scalar>(p.size());
}

template <typename Scalar>
Vector<Scalar> smooth_subgradient(const CompositeProblem<Scalar>& p,
                                  const VectorIn<Scalar>& x) {
  require_dimension("smooth_subgradient", p.dimension(), x.size());
  Vector<Scalar> sum = Vector<Scalar>::Zero(p.dimension());
  for (const auto& g : p.components()) sum += g.subgradient(x);
  return sum / static_cast<Scalar>(p.size());
}

template <typename Scalar>
Scalar composite_value(const CompositeProblem<Scalar>& p, const VectorIn<Scalar>& x) {
  return smooth_value(p, x) + p.regularizer().value(x);
}

/// The averaged loss g as a single component; its Hölder modulus is bounded
/// by the largest component modulus.
template <typename Scalar>
ComponentOracle<Scalar> averaged_component(const CompositeProblem<Scalar>& p) {
  return ComponentOracle<Scalar>{
      [&p](const Vector<Scalar>& x) { return smooth_value(p, x); },
      [&p](const Vector<Scalar>& x) { return smooth_subgradient(p, x); },
      p.stream_holder()};
}

}  // namespace unigrad

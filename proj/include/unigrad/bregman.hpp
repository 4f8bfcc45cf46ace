#pragma once

#include "unigrad/geometry.hpp"
#include "unigrad/oracles.hpp"
#include "unigrad/soft_threshold.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>

namespace unigrad {

/// γ(M_v, ε) = (1/ε)^{(1−v)/(1+v)} · M_v^{2/(1+v)}: the modulus above which
/// the quadratic upper model with slack ε/2 is valid for a C^{1,v} function.
template <typename Scalar>
Scalar gamma(Scalar Mv, Scalar v, Scalar eps) {
  if (!(Mv > Scalar(0))) throw std::invalid_argument("gamma: Mv must be positive");
  if (!(eps > Scalar(0))) throw std::invalid_argument("gamma: eps must be positive");
  if (!(v >= Scalar(0) && v <= Scalar(1)))
    throw std::invalid_argument("gamma: v must lie in [0, 1]");
  return std::pow(Scalar(1) / eps, (Scalar(1) - v) / (Scalar(1) + v)) *
         std::pow(Mv, Scalar(2) / (Scalar(1) + v));
}

/// Linearization data of g at `point` plus the modulus M of the Bregman term.
template <typename Scalar>
struct BregmanMapInput {
  Vector<Scalar> point;
  Scalar value;
  Vector<Scalar> gradient;
  Scalar modulus;
};

/// Minimizer x̂ of the model ψ and its optimal value ψ*.
template <typename Scalar>
struct ModelValue {
  Vector<Scalar> minimizer;
  Scalar psi_star;
};

class SolverFailure : public std::runtime_error {
 public:
  SolverFailure(const std::string& what, double residual)
      : std::runtime_error(what + " (residual " + std::to_string(residual) + ")"),
        residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

namespace detail {
template <typename Scalar>
void validate(const BregmanMapInput<Scalar>& in, const ProxFunction<Scalar>& d) {
  if (!(in.modulus > Scalar(0)))
    throw std::invalid_argument("bregman_map: modulus M must be positive");
  require_dimension("bregman_map", d.dimension(), in.point.size());
  require_dimension("bregman_map", d.dimension(), in.gradient.size());
}
}  // namespace detail

/// ψ_{M,g}(x; y) = g(x) + ⟨∇g(x), y − x⟩ + M·ξ(y, x) + h(y).
template <typename Scalar>
Scalar model_value(const BregmanMapInput<Scalar>& in, const Regularizer<Scalar>& h,
                   const ProxFunction<Scalar>& d, const Vector<Scalar>& y) {
  return in.value + in.gradient.dot(y - in.point) +
         in.modulus * bregman_distance(d, y, in.point) + h.value(y);
}

/// Bregman mapping solved by proximal-gradient iterations on the model with
/// step 1/M. Needs only h's proximal operator; used for custom regularizers
/// and to cross-check the closed form.
template <typename Scalar>
ModelValue<Scalar> bregman_map_numeric(const BregmanMapInput<Scalar>& in,
                                       const Regularizer<Scalar>& h,
                                       const ProxFunction<Scalar>& d,
                                       int max_iters = 10000,
                                       Scalar tol = Scalar(1e-10)) {
  detail::validate(in, d);
  if (!h.has_prox())
    throw UnsupportedStructure(
        "bregman_map: regularizer has neither a closed form nor a proximal operator");
  const Scalar step = Scalar(1) / in.modulus;
  Vector<Scalar> y = in.point;
  Scalar residual = std::numeric_limits<Scalar>::infinity();
  for (int it = 0; it < max_iters; ++it) {
    // ∇_y[M·ξ(y, x)] coincides with M(∇d(y) − ∇d(x)) for the Euclidean geometry.
    const Vector<Scalar> smooth_grad =
        in.gradient + in.modulus * bregman_distance_grad_y(d, in.point, y);
    Vector<Scalar> next = h.prox(Vector<Scalar>(y - step * smooth_grad), step);
    residual = (next - y).norm();
    y = std::move(next);
    if (residual <= tol) return {y, model_value(in, h, d, y)};
  }
  throw SolverFailure("bregman_map: numeric fallback did not converge",
                      static_cast<double>(residual));
}

/// 𝔅_{M,g}(x) = argmin_y ψ_{M,g}(x; y).
///
/// For the squared-Euclidean geometry the minimizer is prox_{h/M}(x − ∇g(x)/M),
/// which is closed-form for the built-in regularizers. Custom regularizers go
/// through bregman_map_numeric.
template <typename Scalar>
ModelValue<Scalar> bregman_map(const BregmanMapInput<Scalar>& in,
                               const Regularizer<Scalar>& h,
                               const ProxFunction<Scalar>& d) {
  detail::validate(in, d);
  if (h.kind() == RegularizerKind::Custom) return bregman_map_numeric(in, h, d);
  const Scalar step = Scalar(1) / in.modulus;
  Vector<Scalar> xhat = h.prox(Vector<Scalar>(in.point - step * in.gradient), step);
  const Scalar psi = model_value(in, h, d, xhat);
  return {std::move(xhat), psi};
}

/// g(x̂) ≤ g(x) + ⟨∇g(x), x̂ − x⟩ + M·ξ(x̂, x) + ε/2, given g(x̂) already
/// evaluated. h(x̂) appears on both sides of the line-search test and cancels.
template <typename Scalar>
bool descent_condition_holds(const BregmanMapInput<Scalar>& in,
                             const ProxFunction<Scalar>& d,
                             const Vector<Scalar>& xhat, Scalar g_xhat, Scalar eps) {
  const Scalar upper = in.value + in.gradient.dot(xhat - in.point) +
                       in.modulus * bregman_distance(d, xhat, in.point) +
                       eps / Scalar(2);
  return g_xhat <= upper;
}

template <typename Scalar>
bool check_descent_condition(const ComponentOracle<Scalar>& g, const Vector<Scalar>& x,
                             const Vector<Scalar>& xhat, Scalar M, Scalar eps,
                             const ProxFunction<Scalar>& d) {
  require_dimension("check_descent_condition", d.dimension(), x.size());
  require_dimension("check_descent_condition", d.dimension(), xhat.size());
  const BregmanMapInput<Scalar> in{x, g.value(x), g.subgradient(x), M};
  return descent_condition_holds(in, d, xhat, g.value(xhat), eps);
}

class BacktrackOverflow : public std::runtime_error {
 public:
  explicit BacktrackOverflow(int max_doublings)
      : std::runtime_error("backtrack: no acceptable modulus within " +
                           std::to_string(max_doublings) +
                           " doublings; the oracle or geometry is mis-specified") {}
};

template <typename Scalar, typename Candidate>
struct BacktrackResult {
  int doublings;     // i, the smallest accepted exponent
  Scalar modulus;    // 2^i·L
  Scalar next_L;     // 2^{i−1}·L
  Candidate candidate;
};

/// Tries M = 2^i·L for i = 0, 1, ... and stops at the first accepted trial.
/// `trial(M)` returns std::pair<Candidate, bool>.
template <typename Scalar, typename Trial>
auto backtrack(Scalar initial_L, Trial&& trial, int max_doublings = 64) {
  using Outcome = std::invoke_result_t<Trial&, Scalar>;
  using Candidate = typename Outcome::first_type;
  if (!(initial_L > Scalar(0)))
    throw std::invalid_argument("backtrack: initial L must be positive");
  Scalar M = initial_L;
  for (int i = 0; i <= max_doublings; ++i, M *= Scalar(2)) {
    Outcome outcome = trial(M);
    if (outcome.second)
      return BacktrackResult<Scalar, Candidate>{i, M, M / Scalar(2),
                                                std::move(outcome.first)};
  }
  throw BacktrackOverflow(max_doublings);
}

}  // namespace unigrad

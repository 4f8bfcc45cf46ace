#pragma once

#include "unigrad/bregman.hpp"
#include "unigrad/online_common.hpp"

#include <cmath>
#include <limits>
#include <optional>
#include <random>
#include <string>

namespace unigrad {

template <typename Scalar>
struct SugConfig {
  Scalar modulus = Scalar(1);  // M, shared by every surrogate
  Scalar eps = Scalar(1e-2);
  std::uint64_t seed = 0;
  std::int64_t max_iters = 1000;
  // Stop once sug_bound drops to this value; needs dist0_sq. 0 disables.
  Scalar stop_threshold = 0;
  std::optional<Scalar> dist0_sq;
  bool record_full_objective = true;
  bool record_time = true;
};

/// Per-component quadratic upper models
///   g_i^k(x) = g_i(z_i) + ⟨∇g_i(z_i), x − z_i⟩ + M_i·ξ(z_i, x)
/// anchored at z_i, with the aggregates that make
///   G^k(x) = (1/n)Σ g_i^k(x) = (ΣM_i/(2n))‖x‖² + (1/n)⟨lin, x⟩ + const_sum/n
/// for the Euclidean geometry, where lin = Σ(∇g_i(z_i) − M_i z_i) and
/// const_sum = Σ[g_i(z_i) − ⟨∇g_i(z_i), z_i⟩ + (M_i/2)‖z_i‖²].
template <typename Scalar>
class SurrogateTable {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

  struct Aggregates {
    Scalar sum_M;
    Vector<Scalar> lin;
    Scalar const_sum;
  };

  SurrogateTable(Index dimension, Index n)
      : anchors_(Matrix::Zero(dimension, n)),
        gradients_(Matrix::Zero(dimension, n)),
        values_(Vector<Scalar>::Zero(n)),
        moduli_(Vector<Scalar>::Zero(n)),
        agg_{Scalar(0), Vector<Scalar>::Zero(dimension), Scalar(0)} {}

  Index size() const { return values_.size(); }
  Index dimension() const { return anchors_.rows(); }

  const Matrix& anchors() const { return anchors_; }
  const Matrix& gradients() const { return gradients_; }
  const Vector<Scalar>& values() const { return values_; }
  const Vector<Scalar>& moduli() const { return moduli_; }
  const Aggregates& aggregates() const { return agg_; }

  /// Re-anchors row j; aggregates move by the row delta in O(p).
  void set_row(Index j, const Vector<Scalar>& anchor, Scalar value,
               const Vector<Scalar>& gradient, Scalar modulus) {
    if (j < 0 || j >= size())
      throw std::out_of_range("surrogate index " + std::to_string(j) + " out of range");
    require_dimension("SurrogateTable::set_row", dimension(), anchor.size());
    require_dimension("SurrogateTable::set_row", dimension(), gradient.size());
    const Vector<Scalar> old_lin = row_lin(gradients_.col(j), moduli_[j], anchors_.col(j));
    const Scalar old_const =
        row_const(values_[j], gradients_.col(j), moduli_[j], anchors_.col(j));
    const Vector<Scalar> new_lin = row_lin(gradient, modulus, anchor);
    const Scalar new_const = row_const(value, gradient, modulus, anchor);

    agg_.sum_M += modulus - moduli_[j];
    agg_.lin += new_lin - old_lin;
    agg_.const_sum += new_const - old_const;

    anchors_.col(j) = anchor;
    gradients_.col(j) = gradient;
    values_[j] = value;
    moduli_[j] = modulus;
  }

  /// Aggregates rebuilt from the rows.
  Aggregates recompute() const {
    Aggregates out{Scalar(0), Vector<Scalar>::Zero(dimension()), Scalar(0)};
    for (Index i = 0; i < size(); ++i) {
      out.sum_M += moduli_[i];
      out.lin += row_lin(gradients_.col(i), moduli_[i], anchors_.col(i));
      out.const_sum += row_const(values_[i], gradients_.col(i), moduli_[i], anchors_.col(i));
    }
    return out;
  }

  /// G^k(x) from the aggregates.
  Scalar value(const Vector<Scalar>& x) const {
    const Scalar n = static_cast<Scalar>(size());
    return agg_.sum_M / (Scalar(2) * n) * x.squaredNorm() + agg_.lin.dot(x) / n +
           agg_.const_sum / n;
  }

 private:
  template <typename G, typename Z>
  static Vector<Scalar> row_lin(const G& gradient, Scalar modulus, const Z& anchor) {
    return gradient - modulus * anchor;
  }

  template <typename G, typename Z>
  static Scalar row_const(Scalar value, const G& gradient, Scalar modulus,
                          const Z& anchor) {
    return value - gradient.dot(anchor) + Scalar(0.5) * modulus * anchor.squaredNorm();
  }

  Matrix anchors_;
  Matrix gradients_;
  Vector<Scalar> values_;
  Vector<Scalar> moduli_;
  Aggregates agg_;
};

template <typename Scalar>
void validate(const SugConfig<Scalar>& cfg) {
  if (!(cfg.modulus > Scalar(0))) throw std::invalid_argument("SUG: M must be positive");
  if (!(cfg.eps > Scalar(0))) throw std::invalid_argument("SUG: eps must be positive");
  if (cfg.max_iters < 0) throw std::invalid_argument("SUG: max_iters must be nonnegative");
}

/// Anchors every component at x0 with modulus M.
template <typename Scalar>
SurrogateTable<Scalar> sug_init(const CompositeProblem<Scalar>& problem,
                                const VectorIn<Scalar>& x0, const SugConfig<Scalar>& cfg) {
  validate(cfg);
  require_dimension("sug_init", problem.dimension(), x0.size());
  SurrogateTable<Scalar> table(problem.dimension(), problem.size());
  for (Index i = 0; i < problem.size(); ++i) {
    const auto& g = problem.component(i);
    table.set_row(i, x0, g.value(x0), g.subgradient(x0), cfg.modulus);
  }
  return table;
}

/// argmin_x G^k(x) + h(x) = prox_{h/q}(−lin/(n·q)) with q = ΣM_i/n.
template <typename Scalar>
Vector<Scalar> sug_subproblem(const SurrogateTable<Scalar>& table,
                              const Regularizer<Scalar>& h) {
  if (!h.has_prox())
    throw UnsupportedStructure("sug_subproblem: no minimizer rule for this regularizer");
  const auto& agg = table.aggregates();
  const Scalar n = static_cast<Scalar>(table.size());
  const Scalar q = agg.sum_M / n;
  return h.prox(Vector<Scalar>(-agg.lin / (n * q)), Scalar(1) / q);
}

/// Re-anchors component j at x_new; other rows are untouched.
template <typename Scalar>
void sug_update(SurrogateTable<Scalar>& table, const CompositeProblem<Scalar>& problem,
                Index j, const VectorIn<Scalar>& x_new, Scalar modulus) {
  const auto& g = problem.component(j);
  table.set_row(j, x_new, g.value(x_new), g.subgradient(x_new), modulus);
}

/// Right-hand side of the expected-suboptimality bound at iterate k ≥ 1:
///   M·ρ^{k−1}·‖x* − x⁰‖² + (3ε/(4nμ_h))·(1 − ρ^{k−1})/(1 − ρ) + 3ε/4,
/// with ρ = (1/n)(M/μ_h) + (1 − 1/n). Vacuous (value = +∞) when ρ ≥ 1.
template <typename Scalar>
struct SugBound {
  Scalar value;
  Scalar rho;
  bool vacuous;
};

template <typename Scalar>
Scalar sug_rho(Scalar M, Scalar mu_h, Index n) {
  const Scalar inv_n = Scalar(1) / static_cast<Scalar>(n);
  return inv_n * (M / mu_h) + (Scalar(1) - inv_n);
}

template <typename Scalar>
SugBound<Scalar> sug_bound(std::int64_t k, Scalar M, Scalar mu_h, Index n, Scalar eps,
                           Scalar dist0_sq) {
  if (!(mu_h > Scalar(0))) throw std::invalid_argument("sug_bound: mu_h must be positive");
  if (k < 1) throw std::invalid_argument("sug_bound: k must be at least 1");
  if (n < 1) throw std::invalid_argument("sug_bound: n must be at least 1");
  const Scalar rho = sug_rho(M, mu_h, n);
  if (rho >= Scalar(1))
    return {std::numeric_limits<Scalar>::infinity(), rho, true};
  const Scalar rk = std::pow(rho, static_cast<Scalar>(k - 1));
  const Scalar value = M * rk * dist0_sq +
                       Scalar(3) * eps / (Scalar(4) * static_cast<Scalar>(n) * mu_h) *
                           (Scalar(1) - rk) / (Scalar(1) - rho) +
                       Scalar(3) * eps / Scalar(4);
  return {value, rho, false};
}

struct IterationEstimate {
  std::optional<std::int64_t> iterations;
  double raw = 0;  // the unrounded right-hand side when defined
  std::string diagnostic;
};

namespace detail {

template <typename Scalar>
IterationEstimate iterations_from_factor(Scalar factor, Scalar eps, Scalar M,
                                         Scalar mu_h, Index n, Scalar dist0_sq) {
  IterationEstimate out;
  const Scalar rho = sug_rho(M, mu_h, n);
  if (rho >= Scalar(1)) {
    out.diagnostic = "rho >= 1: no linear rate";
    return out;
  }
  const Scalar arg = factor * eps / (M * dist0_sq);
  if (!(arg > Scalar(0)) || !std::isfinite(static_cast<double>(arg))) {
    out.diagnostic = "log argument is not positive and finite";
    return out;
  }
  const Scalar k = std::log(arg) / std::log(rho) + Scalar(1);
  out.raw = static_cast<double>(k);
  out.iterations = std::max<std::int64_t>(1, static_cast<std::int64_t>(std::ceil(k)));
  return out;
}

}  // namespace detail

/// k ≥ (log ρ)^{-1}·log[(¼ − 3/(4(μ_h − M)))·ε/(M·‖x* − x⁰‖²)] + 1, evaluated as
/// printed; undefined when ρ ≥ 1 or the log argument is not positive.
template <typename Scalar>
IterationEstimate sug_iteration_estimate(Scalar eps, Scalar M, Scalar mu_h, Index n,
                                         Scalar dist0_sq) {
  if (!(mu_h > Scalar(0)))
    throw std::invalid_argument("sug_iteration_estimate: mu_h must be positive");
  const Scalar factor = Scalar(0.25) - Scalar(3) / (Scalar(4) * (mu_h - M));
  return detail::iterations_from_factor(factor, eps, M, mu_h, n, dist0_sq);
}

/// Iteration count for Pr(f(x^k) − f* ≤ ε) ≥ 1 − δ, with factor
/// (δ − ¾ − 3/(4(μ_h − M))) in place of (¼ − 3/(4(μ_h − M))).
template <typename Scalar>
IterationEstimate sug_high_prob_iters(Scalar eps, Scalar delta, Scalar M, Scalar mu_h,
                                      Index n, Scalar dist0_sq) {
  if (!(delta > Scalar(0) && delta < Scalar(1)))
    throw std::invalid_argument("sug_high_prob_iters: delta must lie in (0, 1)");
  if (!(mu_h > Scalar(0)))
    throw std::invalid_argument("sug_high_prob_iters: mu_h must be positive");
  const Scalar factor = delta - Scalar(0.75) - Scalar(3) / (Scalar(4) * (mu_h - M));
  return detail::iterations_from_factor(factor, eps, M, mu_h, n, dist0_sq);
}

template <typename Scalar>
struct SugResult {
  Vector<Scalar> x;
  RunTrace trace;
  std::int64_t iterations = 0;
  bool stopped_by_bound = false;
};

/// Row k of the trace describes the iteration that produces x^{k+1}:
/// f_gt_xt = f_{g_j}(x^k), f_gt_xnext = f_{g_j}(x^{k+1}), f_full = f(x^{k+1})
/// where j is the component re-anchored afterwards. L_next holds M.
template <typename Scalar>
SugResult<Scalar> sug_run(const CompositeProblem<Scalar>& problem, const VectorIn<Scalar>& x0,
                          const SugConfig<Scalar>& cfg) {
  SurrogateTable<Scalar> table = sug_init(problem, x0, cfg);
  const Regularizer<Scalar>& h = problem.regularizer();
  const Scalar mu_h = h.strong_convexity();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_int_distribution<Index> pick(0, problem.size() - 1);

  SugResult<Scalar> result;
  result.x = x0;
  result.trace.rows.reserve(static_cast<std::size_t>(cfg.max_iters));
  detail::Stopwatch clock;
  for (std::int64_t k = 0; k < cfg.max_iters; ++k) {
    Vector<Scalar> next = sug_subproblem(table, h);
    const Index j = pick(rng);

    TraceRow row;
    row.t = k;
    row.component = j;
    row.L_next = static_cast<double>(cfg.modulus);
    row.f_gt_xt = static_cast<double>(per_sample_value(problem, j, result.x));
    row.f_gt_xnext = static_cast<double>(per_sample_value(problem, j, next));
    if (cfg.record_full_objective)
      row.f_full = static_cast<double>(composite_value(problem, next));

    sug_update(table, problem, j, next, cfg.modulus);
    result.x = std::move(next);
    result.iterations = k + 1;
    if (cfg.record_time) row.elapsed_s = clock.seconds();
    result.trace.rows.push_back(std::move(row));

    if (cfg.stop_threshold > Scalar(0) && cfg.dist0_sq && mu_h > Scalar(0)) {
      const SugBound<Scalar> b =
          sug_bound(k + 1, cfg.modulus, mu_h, problem.size(), cfg.eps, *cfg.dist0_sq);
      if (!b.vacuous && b.value <= cfg.stop_threshold) {
        result.stopped_by_bound = true;
        break;
      }
    }
  }
  result.trace.set("algorithm", "sug");
  result.trace.set("eps", detail::format_number(static_cast<double>(cfg.eps)));
  result.trace.set("M", detail::format_number(static_cast<double>(cfg.modulus)));
  result.trace.set("seed", std::to_string(cfg.seed));
  return result;
}

}  // namespace unigrad

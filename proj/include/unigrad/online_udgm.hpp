#pragma once

#include "unigrad/bregman.hpp"
#include "unigrad/online_common.hpp"

namespace unigrad {

/// Aggregated dual model
///   φ_t(x) = ξ(x_0, x) + ⟨s, x⟩ + A·h(x) + c,
/// the running sum of ξ(x_0, ·) and the coefficient-weighted linearizations
/// a_i[g_i(x_i) + ⟨∇g_i(x_i), x − x_i⟩ + h(x)]. Storing (s, A, c) instead of
/// the list of pieces is lossless for the Euclidean geometry.
template <typename Scalar>
struct DualModel {
  Vector<Scalar> anchor;        // x_0
  Vector<Scalar> gradient_sum;  // s = Σ a_i ∇g_i(x_i)
  Scalar coeff_sum = 0;         // A = Σ a_i
  Scalar constant = 0;          // c = Σ a_i [g_i(x_i) − ⟨∇g_i(x_i), x_i⟩]

  explicit DualModel(Vector<Scalar> x0)
      : anchor(std::move(x0)), gradient_sum(Vector<Scalar>::Zero(anchor.size())) {}

  void fold(Scalar coeff, Scalar g_value, const Vector<Scalar>& gradient,
            const Vector<Scalar>& at) {
    gradient_sum += coeff * gradient;
    coeff_sum += coeff;
    constant += coeff * (g_value - gradient.dot(at));
  }

  Scalar value(const Vector<Scalar>& x, const Regularizer<Scalar>& h,
               const ProxFunction<Scalar>& d) const {
    return bregman_distance(d, anchor, x) + gradient_sum.dot(x) +
           coeff_sum * h.value(x) + constant;
  }
};

/// argmin_x φ(x) + c'·[⟨∇g, x⟩ + h(x)] (+ constants), i.e.
/// prox_{(A + c')h}(x_0 − s − c'·∇g).
template <typename Scalar>
Vector<Scalar> model_argmin(const DualModel<Scalar>& model, Scalar extra_coeff,
                            const VectorIn<Scalar>& extra_grad,
                            const Regularizer<Scalar>& h) {
  if (!(extra_coeff >= Scalar(0)))
    throw std::invalid_argument("model_argmin: extra coefficient must be nonnegative");
  require_dimension("model_argmin", model.anchor.size(), extra_grad.size());
  if (!h.has_prox())
    throw UnsupportedStructure("model_argmin: no minimizer rule for this regularizer");
  const Vector<Scalar> z = model.anchor - model.gradient_sum - extra_coeff * extra_grad;
  return h.prox(z, model.coeff_sum + extra_coeff);
}

template <typename Scalar>
struct UdgmState {
  Vector<Scalar> x;
  Scalar L;
  std::int64_t t = 0;
  DualModel<Scalar> model;
  WeightedAverage<Scalar> average;

  UdgmState(Vector<Scalar> x0, Scalar L0)
      : x(x0), L(L0), model(std::move(x0)), average(x.size()) {
    if (!(L > Scalar(0))) throw std::invalid_argument("L0 must be positive");
  }
};

namespace detail {

/// Records y_t = 𝔅_{M,g_t}(x_t), φ*_{t+1} and f_{g_t}(x_{t+1}) after the
/// model has been updated.
template <typename Scalar>
void finish_udgm_record(StepRecord<Scalar>& rec, const UdgmState<Scalar>& state,
                        const BregmanMapInput<Scalar>& at_xt,
                        const ComponentOracle<Scalar>& g, const Regularizer<Scalar>& h,
                        const ProxFunction<Scalar>& d) {
  const ModelValue<Scalar> y = bregman_map(at_xt, h, d);
  rec.f_gt_yt = g.value(y.minimizer) + h.value(y.minimizer);
  rec.model_min = state.model.value(state.x, h, d);
  rec.f_gt_xnext = g.value(state.x) + h.value(state.x);
}

}  // namespace detail

/// One adaptive dual step. For trial M = 2^i L_t the candidate
/// x_{t,i} = argmin φ_t + (1/M)[g_t(x_t) + ⟨∇g_t(x_t), · − x_t⟩ + h] is accepted
/// when the Bregman point at x_{t,i} satisfies
/// f_{g_t}(𝔅_{M,g_t}(x_{t,i})) ≤ ψ*_{M,g_t}(x_{t,i}) + ε/2.
template <typename Scalar>
StepRecord<Scalar> udgm_step(UdgmState<Scalar>& state, const ComponentOracle<Scalar>& g,
                             const Regularizer<Scalar>& h, const ProxFunction<Scalar>& d,
                             Scalar eps, int max_doublings = 64) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("udgm_step: eps must be positive");
  const Scalar g_xt = g.value(state.x);
  const Vector<Scalar> grad_xt = g.subgradient(state.x);

  auto trial = [&](Scalar M) {
    Vector<Scalar> candidate = model_argmin(state.model, Scalar(1) / M, grad_xt, h);
    const BregmanMapInput<Scalar> in{candidate, g.value(candidate),
                                     g.subgradient(candidate), M};
    const ModelValue<Scalar> mapped = bregman_map(in, h, d);
    // f(𝔅) ≤ ψ* + ε/2 with ψ* = g(x) + ⟨∇g, 𝔅 − x⟩ + Mξ + h(𝔅): h(𝔅) cancels.
    const bool ok = descent_condition_holds(in, d, mapped.minimizer,
                                            g.value(mapped.minimizer), eps);
    return std::make_pair(std::move(candidate), ok);
  };
  auto found = backtrack(state.L, trial, max_doublings);

  StepRecord<Scalar> rec;
  rec.doublings = found.doublings;
  rec.L_next = found.next_L;
  rec.f_gt_xt = g_xt + h.value(state.x);
  const BregmanMapInput<Scalar> at_xt{state.x, g_xt, grad_xt, found.modulus};

  state.model.fold(Scalar(1) / found.modulus, g_xt, grad_xt, state.x);
  state.x = std::move(found.candidate);
  state.L = found.next_L;
  state.average.add(state.x, state.L);
  ++state.t;
  detail::finish_udgm_record(rec, state, at_xt, g, h, d);
  return rec;
}

/// Fixed-step dual step with every model coefficient equal to 1/(2γ).
template <typename Scalar>
StepRecord<Scalar> udgm_fixed_step(UdgmState<Scalar>& state,
                                   const ComponentOracle<Scalar>& g,
                                   const Regularizer<Scalar>& h,
                                   const ProxFunction<Scalar>& d, Scalar gamma_value) {
  const Scalar g_xt = g.value(state.x);
  const Vector<Scalar> grad_xt = g.subgradient(state.x);
  const Scalar coeff = Scalar(1) / (Scalar(2) * gamma_value);

  StepRecord<Scalar> rec;
  rec.L_next = gamma_value;
  rec.f_gt_xt = g_xt + h.value(state.x);
  const BregmanMapInput<Scalar> at_xt{state.x, g_xt, grad_xt, Scalar(2) * gamma_value};

  Vector<Scalar> next = model_argmin(state.model, coeff, grad_xt, h);
  state.model.fold(coeff, g_xt, grad_xt, state.x);
  state.x = std::move(next);
  state.L = gamma_value;
  state.average.add(state.x, state.L);
  ++state.t;
  detail::finish_udgm_record(rec, state, at_xt, g, h, d);
  return rec;
}

namespace detail {

template <typename Scalar, typename Step>
OnlineResult<Scalar> drive_dual(const CompositeProblem<Scalar>& problem,
                                std::span<const Index> order, UdgmState<Scalar>& state,
                                const OnlineOptions<Scalar>& opts, Step&& step) {
  OnlineResult<Scalar> result;
  result.trace.rows.reserve(order.size());
  Stopwatch clock;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const Index j = order[t];
    std::optional<double> f_full;
    if (opts.record_full_objective)
      f_full = static_cast<double>(composite_value(problem, state.x));
    TraceRow row = make_row(static_cast<std::int64_t>(t), j, step(problem.component(j)));
    row.f_full = f_full;
    if (opts.record_time) row.elapsed_s = clock.seconds();
    result.trace.rows.push_back(std::move(row));
  }
  result.average = state.average.value();
  result.last = state.x;
  result.trace.set("eps", format_number(static_cast<double>(opts.eps)));
  return result;
}

}  // namespace detail

template <typename Scalar>
OnlineResult<Scalar> udgm_run(const CompositeProblem<Scalar>& problem,
                              std::span<const Index> order, const VectorIn<Scalar>& x0,
                              const OnlineOptions<Scalar>& opts) {
  detail::validate_online(problem, order, x0, opts.eps);
  const ProxFunction<Scalar> d = problem.geometry().recentered(x0);
  UdgmState<Scalar> state(x0, opts.L0);
  auto result = detail::drive_dual(problem, order, state, opts,
                                   [&](const ComponentOracle<Scalar>& g) {
                                     return udgm_step(state, g, problem.regularizer(), d,
                                                      opts.eps, opts.max_doublings);
                                   });
  result.trace.set("algorithm", "oudgm");
  result.trace.set("L0", detail::format_number(static_cast<double>(opts.L0)));
  return result;
}

template <typename Scalar>
OnlineResult<Scalar> udgm_fixed_step_run(const CompositeProblem<Scalar>& problem,
                                         std::span<const Index> order,
                                         const VectorIn<Scalar>& x0,
                                         HolderConstants<Scalar> holder,
                                         const OnlineOptions<Scalar>& opts) {
  detail::validate_online(problem, order, x0, opts.eps);
  if (!problem.regularizer().has_prox())
    throw UnsupportedStructure("udgm_fixed_step_run: unsupported regularizer");
  const Scalar gam = gamma(holder.modulus, holder.degree, opts.eps);
  const ProxFunction<Scalar> d = problem.geometry().recentered(x0);
  UdgmState<Scalar> state(x0, gam);
  auto result = detail::drive_dual(
      problem, order, state, opts, [&](const ComponentOracle<Scalar>& g) {
        return udgm_fixed_step(state, g, problem.regularizer(), d, gam);
      });
  result.trace.set("algorithm", "oudgm-fixed");
  result.trace.set("gamma", detail::format_number(static_cast<double>(gam)));
  return result;
}

}  // namespace unigrad

#pragma once

#include "unigrad/bregman.hpp"
#include "unigrad/online_common.hpp"

namespace unigrad {

/// Online universal primal gradient method state: x_t, L_t and the running
/// 1/L_t-weighted average of the iterates x_1, x_2, ...
template <typename Scalar>
struct UpgmState {
  Vector<Scalar> x;
  Scalar L;
  std::int64_t t = 0;
  WeightedAverage<Scalar> average;

  UpgmState(Vector<Scalar> x0, Scalar L0)
      : x(std::move(x0)), L(L0), average(x.size()) {
    if (!(L > Scalar(0))) throw std::invalid_argument("L0 must be positive");
  }
};

/// One adaptive step: the smallest i ≥ 0 such that x̂ = 𝔅_{2^i L_t, g_t}(x_t)
/// passes the descent test, then x_{t+1} = x̂ and L_{t+1} = 2^{i−1}L_t.
template <typename Scalar>
StepRecord<Scalar> upgm_step(UpgmState<Scalar>& state, const ComponentOracle<Scalar>& g,
                             const Regularizer<Scalar>& h, const ProxFunction<Scalar>& d,
                             Scalar eps, int max_doublings = 64) {
  if (!(eps > Scalar(0))) throw std::invalid_argument("upgm_step: eps must be positive");
  BregmanMapInput<Scalar> in{state.x, g.value(state.x), g.subgradient(state.x), Scalar(0)};

  auto trial = [&](Scalar M) {
    in.modulus = M;
    ModelValue<Scalar> mapped = bregman_map(in, h, d);
    const Scalar g_new = g.value(mapped.minimizer);
    const bool ok = descent_condition_holds(in, d, mapped.minimizer, g_new, eps);
    return std::make_pair(std::make_pair(std::move(mapped.minimizer), g_new), ok);
  };
  auto found = backtrack(state.L, trial, max_doublings);

  StepRecord<Scalar> rec;
  rec.doublings = found.doublings;
  rec.L_next = found.next_L;
  rec.f_gt_xt = in.value + h.value(state.x);
  auto& [x_next, g_next] = found.candidate;
  rec.f_gt_xnext = g_next + h.value(x_next);

  state.x = std::move(x_next);
  state.L = found.next_L;
  state.average.add(state.x, state.L);
  ++state.t;
  return rec;
}

/// Fixed-step variant: x_{t+1} = 𝔅_{2γ, g_t}(x_t) and L_{t+1} = γ.
template <typename Scalar>
StepRecord<Scalar> upgm_fixed_step(UpgmState<Scalar>& state,
                                   const ComponentOracle<Scalar>& g,
                                   const Regularizer<Scalar>& h,
                                   const ProxFunction<Scalar>& d, Scalar gamma_value) {
  const BregmanMapInput<Scalar> in{state.x, g.value(state.x), g.subgradient(state.x),
                                   Scalar(2) * gamma_value};
  ModelValue<Scalar> mapped = bregman_map(in, h, d);

  StepRecord<Scalar> rec;
  rec.L_next = gamma_value;
  rec.f_gt_xt = in.value + h.value(state.x);
  rec.f_gt_xnext = g.value(mapped.minimizer) + h.value(mapped.minimizer);

  state.x = std::move(mapped.minimizer);
  state.L = gamma_value;
  state.average.add(state.x, state.L);
  ++state.t;
  return rec;
}

namespace detail {

template <typename Scalar, typename Step>
OnlineResult<Scalar> drive_online(const CompositeProblem<Scalar>& problem,
                                  std::span<const Index> order, Vector<Scalar> x,
                                  const OnlineOptions<Scalar>& opts, Step&& step) {
  OnlineResult<Scalar> result;
  result.trace.rows.reserve(order.size());
  Stopwatch clock;
  for (std::size_t t = 0; t < order.size(); ++t) {
    const Index j = order[t];
    std::optional<double> f_full;
    if (opts.record_full_objective)
      f_full = static_cast<double>(composite_value(problem, x));
    TraceRow row = make_row(static_cast<std::int64_t>(t), j, step(problem.component(j), x));
    row.f_full = f_full;
    if (opts.record_time) row.elapsed_s = clock.seconds();
    result.trace.rows.push_back(std::move(row));
  }
  result.last = std::move(x);
  return result;
}

}  // namespace detail

/// Runs T+1 = order.size() steps of the adaptive method over g_{order[t]}.
template <typename Scalar>
OnlineResult<Scalar> upgm_run(const CompositeProblem<Scalar>& problem,
                              std::span<const Index> order, const VectorIn<Scalar>& x0,
                              const OnlineOptions<Scalar>& opts) {
  detail::validate_online(problem, order, x0, opts.eps);
  const ProxFunction<Scalar> d = problem.geometry().recentered(x0);
  UpgmState<Scalar> state(x0, opts.L0);
  auto result = detail::drive_online(
      problem, order, x0, opts,
      [&](const ComponentOracle<Scalar>& g, Vector<Scalar>& x) {
        auto rec = upgm_step(state, g, problem.regularizer(), d, opts.eps,
                             opts.max_doublings);
        x = state.x;
        return rec;
      });
  result.average = state.average.value();
  result.trace.set("algorithm", "oupgm");
  result.trace.set("eps", detail::format_number(static_cast<double>(opts.eps)));
  result.trace.set("L0", detail::format_number(static_cast<double>(opts.L0)));
  return result;
}

/// Fixed steps L_{t+1} = γ(M_v, ε) using the supplied Hölder constants.
template <typename Scalar>
OnlineResult<Scalar> upgm_fixed_step_run(const CompositeProblem<Scalar>& problem,
                                         std::span<const Index> order,
                                         const VectorIn<Scalar>& x0,
                                         HolderConstants<Scalar> holder,
                                         const OnlineOptions<Scalar>& opts) {
  detail::validate_online(problem, order, x0, opts.eps);
  const Scalar gam = gamma(holder.modulus, holder.degree, opts.eps);
  const ProxFunction<Scalar> d = problem.geometry().recentered(x0);
  UpgmState<Scalar> state(x0, gam);
  auto result = detail::drive_online(
      problem, order, x0, opts,
      [&](const ComponentOracle<Scalar>& g, Vector<Scalar>& x) {
        auto rec = upgm_fixed_step(state, g, problem.regularizer(), d, gam);
        x = state.x;
        return rec;
      });
  result.average = state.average.value();
  result.trace.set("algorithm", "oupgm-fixed");
  result.trace.set("eps", detail::format_number(static_cast<double>(opts.eps)));
  result.trace.set("gamma", detail::format_number(static_cast<double>(gam)));
  return result;
}

}  // namespace unigrad

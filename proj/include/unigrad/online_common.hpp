#pragma once

#include "unigrad/bregman.hpp"
#include "unigrad/oracles.hpp"
#include "unigrad/trace.hpp"

#include <chrono>
#include <optional>
#include <span>
#include <sstream>
#include <string>

namespace unigrad {

template <typename Scalar>
struct OnlineOptions {
  Scalar eps = Scalar(1e-2);
  Scalar L0 = Scalar(1);
  int max_doublings = 64;
  bool record_full_objective = true;
  bool record_time = true;
};

/// What one online step observed; the run turns it into a TraceRow.
template <typename Scalar>
struct StepRecord {
  int doublings = 0;
  Scalar L_next = 0;
  Scalar f_gt_xt = 0;     // f_{g_t}(x_t)
  Scalar f_gt_xnext = 0;  // f_{g_t}(x_{t+1})
  std::optional<Scalar> f_gt_yt;
  std::optional<Scalar> model_min;
};

template <typename Scalar>
struct OnlineResult {
  Vector<Scalar> average;  // x̄ = (1/S_T)Σ_{t=1}^{T+1}(1/L_t)x_t
  Vector<Scalar> last;     // x_{T+1}
  RunTrace trace;
};

/// Running Σ 1/L_t and Σ (1/L_t)·x_t over t = 1..T+1.
template <typename Scalar>
struct WeightedAverage {
  Scalar weight_sum = 0;
  Vector<Scalar> weighted_x;

  explicit WeightedAverage(Index dimension)
      : weighted_x(Vector<Scalar>::Zero(dimension)) {}

  void add(const Vector<Scalar>& x, Scalar L) {
    weight_sum += Scalar(1) / L;
    weighted_x += x / L;
  }

  Vector<Scalar> value() const { return weighted_x / weight_sum; }
};

namespace detail {

class Stopwatch {
 public:
  Stopwatch() : start_(std::chrono::steady_clock::now()) {}
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_)
        .count();
  }

 private:
  std::chrono::steady_clock::time_point start_;
};

inline std::string format_number(double value) {
  std::ostringstream out;
  out.precision(17);
  out << value;
  return out.str();
}

template <typename Scalar>
void validate_online(const CompositeProblem<Scalar>& problem,
                     std::span<const Index> order, const Vector<Scalar>& x0,
                     Scalar eps) {
  require_dimension("online run", problem.dimension(), x0.size());
  if (!(eps > Scalar(0))) throw std::invalid_argument("eps must be positive");
  if (order.empty()) throw std::invalid_argument("sample order must be nonempty");
  for (Index t : order) (void)problem.component(t);
}

template <typename Scalar>
TraceRow make_row(std::int64_t t, Index component, const StepRecord<Scalar>& rec) {
  TraceRow row;
  row.t = t;
  row.i_t = rec.doublings;
  row.L_next = static_cast<double>(rec.L_next);
  row.f_gt_xt = static_cast<double>(rec.f_gt_xt);
  row.f_gt_xnext = static_cast<double>(rec.f_gt_xnext);
  if (rec.f_gt_yt) row.f_gt_yt = static_cast<double>(*rec.f_gt_yt);
  if (rec.model_min) row.model_min = static_cast<double>(*rec.model_min);
  row.component = component;
  return row;
}

}  // namespace detail
}  // namespace unigrad

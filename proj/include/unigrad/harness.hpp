#pragma once

#include "unigrad/oracles.hpp"
#include "unigrad/problems.hpp"
#include "unigrad/trace.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace unigrad {

// ---------------------------------------------------------------- sample order

enum class OrderKind { Sequential, Cyclic, Random };

OrderKind parse_order_kind(const std::string& name);
const char* to_string(OrderKind kind);

/// T+1 component indices. Sequential visits 0..T and needs n ≥ T+1; cyclic
/// wraps modulo n; random draws uniformly with a seeded generator.
std::vector<Index> sample_order(OrderKind kind, Index n, std::int64_t T, std::uint64_t seed);

// ---------------------------------------------------------- reference solution

struct ReferenceSolution {
  Eigen::VectorXd x;
  double value = 0;
  std::int64_t iterations = 0;
  double residual = 0;
};

/// Batch proximal gradient with backtracking on the averaged loss, stopped
/// when ‖x_{k+1} − x_k‖ ≤ tol.
ReferenceSolution reference_solution(const CompositeProblem<double>& problem,
                                     double tol = 1e-10,
                                     std::int64_t max_iters = 1'000'000);

/// Weiszfeld iterations for the mean-distance objective, with the
/// Vardi–Zhang correction when an iterate lands on a center.
ReferenceSolution reference_solution(const SteinerInstance& inst, double tol = 1e-10,
                                     std::int64_t max_iters = 1'000'000);

// ------------------------------------------------------------------ trace I/O

inline constexpr const char* kTraceColumns =
    "t,i_t,L_next,f_gt_xt,f_gt_xnext,f_gt_yt,f_full,elapsed_s";

void write_trace_csv(std::ostream& out, const RunTrace& trace);
void write_trace_csv(const std::filesystem::path& path, const RunTrace& trace);
RunTrace read_trace_csv(std::istream& in);
RunTrace read_trace_csv(const std::filesystem::path& path);

// ------------------------------------------------------------ bound checking

/// Additive slack used by every bound check.
inline bool within_bound(double lhs, double rhs) {
  return lhs <= rhs + 1e-9 * (1.0 + std::abs(rhs));
}

struct RegretReport {
  std::int64_t steps = 0;  // T + 1
  double eps = 0;
  double S_T = 0;          // Σ_{t=1}^{T+1} 1/L_t
  double r0 = 0;           // ξ(x_0, x*)

  double regret_as_defined = 0;  // Σ f_{g_t}(x_t) − Σ f_{g_t}(x*)
  double regret_shifted = 0;     // Σ f_{g_t}(x_{t+1}) − Σ f_{g_t}(x*)

  double weighted_lhs_thm1 = 0;  // Σ (1/L_{t+1})[f_{g_t}(x_{t+1}) − f_{g_t}(x*)]
  double rhs_thm1 = 0;           // (ε/2)S_T + 2r_0
  bool satisfied_thm1 = false;

  double weighted_lhs_thm2 = 0;  // Σ (1/(2L_{t+1}))[f_{g_t}(x_t) − f_{g_t}(x*)]
  double rhs_thm2 = 0;           // S_T·ε/4 + r_0
  bool satisfied_thm2 = false;

  // The same sum at the Bregman points y_t, when the trace records them.
  std::optional<double> weighted_lhs_thm2_at_y;
  std::optional<bool> satisfied_thm2_at_y;

  // Σ_{i≤t} f_{g_i}(y_i)/(2L_{i+1}) ≤ φ*_{t+1} + S_t·ε/4 at every prefix t.
  bool dual_target_checked = false;
  bool dual_target_satisfied = false;
  double dual_target_min_margin = 0;

  double max_L_next = 0;
  std::optional<double> gamma;  // γ(M_v, ε) when Hölder constants are known
  std::optional<bool> line_search_cap_satisfied;  // max L_{t+1} ≤ γ

  std::optional<double> corollary_rhs;  // (ε/2)(T+1) + 2r_0·γ
  std::optional<bool> corollary_satisfied_as_defined;
  std::optional<bool> corollary_satisfied_shifted;
};

/// Evaluates the regret identities and weighted bounds from a trace. `order`
/// maps each row to its component; the trace rows carry every per-step value.
RegretReport evaluate_regret(const RunTrace& trace, const CompositeProblem<double>& problem,
                             std::span<const Index> order, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& x_star, double eps,
                             std::optional<HolderConstants<double>> holder = std::nullopt);

nlohmann::json to_json(const RegretReport& report);

struct SugReport {
  double rho = 0;
  double mu_h = 0;
  double M = 0;
  double dist0_sq = 0;
  bool vacuous = true;
  bool hypothesis_satisfied = false;  // M > (2/ε)^{(1−v)/(1+v)} M_v^{2/(1+v)}
  bool bound_dominates = false;       // f(x^k) − f* ≤ bound(k) on every row
  double worst_margin = 0;            // min_k bound(k) − gap(k)
  std::optional<std::int64_t> iteration_estimate;
  std::string iteration_estimate_diagnostic;
  std::optional<std::int64_t> first_within_eps;  // first k with f(x^k) − f* ≤ ε
};

struct BoundCurveRow {
  std::int64_t k = 0;
  double gap = 0;
  std::optional<double> bound;
};

SugReport evaluate_sug(const RunTrace& trace, Index n, double M, double mu_h, double eps,
                       double f_star, double dist0_sq,
                       std::optional<HolderConstants<double>> holder);

nlohmann::json to_json(const SugReport& report);

void write_bound_curve(const std::filesystem::path& path,
                       const std::vector<BoundCurveRow>& rows);

// ------------------------------------------------------------- experiments

class ConfigError : public std::invalid_argument {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : std::invalid_argument("invalid --" + field + ": " + what), field_(field) {}
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct RunConfig {
  std::string algorithm = "oupgm";  // oupgm | oudgm | sug | batch
  bool fixed_step = false;
  std::string problem = "synth-lasso";  // synth-lasso | lasso-csv | steiner
  std::string data;
  std::optional<double> eps;
  bool eps_auto = false;
  std::optional<double> v;
  std::optional<double> Mv;
  double L0 = 1.0;
  std::optional<double> M;
  double mu = 0.1;
  double ridge = 0.0;
  std::int64_t T = 1000;
  std::string order;  // empty: sequential when n ≥ T+1, cyclic otherwise
  std::uint64_t seed = 0;
  std::string out = "unigrad-out";
  Index p = 20;
  Index n = 0;  // 0: T+1 samples
  Index m = 50;
  double sparsity = 0.25;
  double noise = 0.1;
  bool timing = true;
  double stop_threshold = 0.0;
  double reference_tol = 1e-10;
};

/// Problem built from a config, with the Hölder constants bound checks use.
struct ProblemBundle {
  CompositeProblem<double> problem;
  HolderConstants<double> holder;
  std::optional<SteinerInstance> steiner;
  std::optional<Eigen::VectorXd> ground_truth;
  std::string description;
};

void validate(const RunConfig& cfg);
ProblemBundle build_problem(const RunConfig& cfg);
ReferenceSolution solve_reference(const ProblemBundle& bundle, double tol);
double resolve_eps(const RunConfig& cfg);

/// Trace metadata round-trip for check-bounds.
void write_config_metadata(RunTrace& trace, const RunConfig& cfg);
RunConfig config_from_metadata(const RunTrace& trace);

struct RunOutcome {
  RunTrace trace;
  nlohmann::json report;
  std::filesystem::path trace_path;
  std::filesystem::path report_path;
  std::filesystem::path curve_path;
  bool bounds_satisfied = false;
};

/// Runs one experiment and writes trace.csv, report.json and bound_curve.csv
/// under cfg.out.
RunOutcome run_experiment(const RunConfig& cfg);

/// Runs an experiment in memory without touching the filesystem.
RunOutcome execute_experiment(const RunConfig& cfg);

/// Re-derives the report for a trace file from its metadata.
nlohmann::json check_bounds(const std::filesystem::path& trace_path, bool* satisfied = nullptr);

}  // namespace unigrad

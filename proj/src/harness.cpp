#include "unigrad/harness.hpp"

#include "number_format.hpp"
#include "unigrad/online_udgm.hpp"
#include "unigrad/online_upgm.hpp"
#include "unigrad/sug.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <random>
#include <unordered_map>

namespace unigrad {

// ---------------------------------------------------------------- sample order

OrderKind parse_order_kind(const std::string& name) {
  if (name == "sequential") return OrderKind::Sequential;
  if (name == "cyclic") return OrderKind::Cyclic;
  if (name == "random") return OrderKind::Random;
  throw ConfigError("order", "expected sequential, cyclic or random, got '" + name + "'");
}

const char* to_string(OrderKind kind) {
  switch (kind) {
    case OrderKind::Sequential: return "sequential";
    case OrderKind::Cyclic: return "cyclic";
    case OrderKind::Random: return "random";
  }
  return "?";
}

std::vector<Index> sample_order(OrderKind kind, Index n, std::int64_t T, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sample_order: n must be at least 1");
  if (T < 0) throw std::invalid_argument("sample_order: T must be nonnegative");
  std::vector<Index> order(static_cast<std::size_t>(T + 1));
  switch (kind) {
    case OrderKind::Sequential:
      if (n < T + 1)
        throw std::invalid_argument("sample_order: sequential order needs n >= T+1 (n = " +
                                    std::to_string(n) + ", T = " + std::to_string(T) + ")");
      for (std::int64_t t = 0; t <= T; ++t) order[static_cast<std::size_t>(t)] = t;
      break;
    case OrderKind::Cyclic:
      for (std::int64_t t = 0; t <= T; ++t) order[static_cast<std::size_t>(t)] = t % n;
      break;
    case OrderKind::Random: {
      std::mt19937_64 rng(seed);
      std::uniform_int_distribution<Index> pick(0, n - 1);
      for (auto& i : order) i = pick(rng);
      break;
    }
  }
  return order;
}

// ---------------------------------------------------------- reference solution

ReferenceSolution reference_solution(const CompositeProblem<double>& problem, double tol,
                                     std::int64_t max_iters) {
  if (!(tol > 0)) throw std::invalid_argument("reference_solution: tol must be positive");
  const Regularizer<double>& h = problem.regularizer();
  if (!h.has_prox())
    throw UnsupportedStructure("reference_solution: regularizer has no prox");

  ReferenceSolution out;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(problem.dimension());
  double gx = smooth_value(problem, x);
  double L = 1.0;
  for (std::int64_t k = 0; k < max_iters; ++k) {
    const Eigen::VectorXd grad = smooth_subgradient(problem, x);
    Eigen::VectorXd y;
    double gy = 0;
    for (int doubling = 0;; ++doubling) {
      y = h.prox(Eigen::VectorXd(x - grad / L), 1.0 / L);
      gy = smooth_value(problem, y);
      const Eigen::VectorXd step = y - x;
      const double model = gx + grad.dot(step) + 0.5 * L * step.squaredNorm();
      if (gy <= model + 1e-14 * (std::abs(gx) + std::abs(gy))) break;
      if (doubling > 200) throw SolverFailure("reference_solution: line search diverged", L);
      L *= 2.0;
    }
    out.residual = (y - x).norm();
    x = std::move(y);
    gx = gy;
    out.iterations = k + 1;
    if (out.residual <= tol) {
      out.x = std::move(x);
      out.value = gx + h.value(out.x);
      return out;
    }
  }
  throw SolverFailure("reference_solution: iteration cap reached", out.residual);
}

ReferenceSolution reference_solution(const SteinerInstance& inst, double tol,
                                     std::int64_t max_iters) {
  if (!(tol > 0)) throw std::invalid_argument("reference_solution: tol must be positive");
  const Eigen::Index m = inst.size();
  if (m == 0) throw std::invalid_argument("reference_solution: no centers");
  const Eigen::MatrixXd& C = inst.centers;

  ReferenceSolution out;
  Eigen::VectorXd x = C.colwise().mean().transpose();
  for (std::int64_t k = 0; k < max_iters; ++k) {
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(x.size());
    Eigen::VectorXd pull = Eigen::VectorXd::Zero(x.size());
    double weight = 0;
    int coincident = 0;
    for (Eigen::Index i = 0; i < m; ++i) {
      const Eigen::VectorXd diff = C.row(i).transpose() - x;
      const double r = diff.norm();
      if (r <= 1e-300) {
        ++coincident;
        continue;
      }
      weighted += C.row(i).transpose() / r;
      pull += diff / r;
      weight += 1.0 / r;
    }
    Eigen::VectorXd next;
    if (coincident == 0) {
      next = weighted / weight;
    } else {
      const double r = pull.norm();
      if (r <= coincident) {  // x is a center and already optimal
        out.residual = 0;
        out.iterations = k + 1;
        break;
      }
      const double step = std::min(1.0, coincident / r);
      next = (1.0 - step) * (weighted / weight) + step * x;
    }
    out.residual = (next - x).norm();
    x = std::move(next);
    out.iterations = k + 1;
    if (out.residual <= tol) break;
    if (k + 1 == max_iters)
      throw SolverFailure("reference_solution: iteration cap reached", out.residual);
  }
  double value = 0;
  for (Eigen::Index i = 0; i < m; ++i) value += (x - C.row(i).transpose()).norm();
  out.value = value / static_cast<double>(m);
  out.x = std::move(x);
  return out;
}

// ------------------------------------------------------------ bound checking

RegretReport evaluate_regret(const RunTrace& trace, const CompositeProblem<double>& problem,
                             std::span<const Index> order, const Eigen::VectorXd& x0,
                             const Eigen::VectorXd& x_star, double eps,
                             std::optional<HolderConstants<double>> holder) {
  if (trace.rows.empty()) throw std::invalid_argument("evaluate_regret: empty trace");
  if (order.size() != trace.rows.size())
    throw std::invalid_argument("evaluate_regret: trace has " +
                                std::to_string(trace.rows.size()) + " rows but order has " +
                                std::to_string(order.size()) + " entries");
  require_dimension("evaluate_regret x0", problem.dimension(), x0.size());
  require_dimension("evaluate_regret x*", problem.dimension(), x_star.size());
  if (!(eps > 0)) throw std::invalid_argument("evaluate_regret: eps must be positive");

  std::unordered_map<Index, double> at_star;
  auto f_star_of = [&](Index j) {
    auto it = at_star.find(j);
    if (it != at_star.end()) return it->second;
    const double v = per_sample_value(problem, j, x_star);
    at_star.emplace(j, v);
    return v;
  };

  RegretReport rep;
  rep.steps = static_cast<std::int64_t>(trace.rows.size());
  rep.eps = eps;
  rep.r0 = 0.5 * (x_star - x0).squaredNorm();

  bool dual_all = true;
  double dual_margin = std::numeric_limits<double>::infinity();
  double lhs_dual = 0;
  bool dual_possible = true;
  double lhs_at_y = 0;
  bool at_y_possible = true;
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    const TraceRow& r = trace.rows[t];
    if (!(r.L_next > 0))
      throw std::invalid_argument("evaluate_regret: row " + std::to_string(t) +
                                  " has nonpositive L_next");
    if (r.component >= 0 && r.component != order[t])
      throw std::invalid_argument("evaluate_regret: row " + std::to_string(t) +
                                  " was produced by a different component");
    const double fs = f_star_of(order[t]);
    const double w = 1.0 / r.L_next;
    rep.S_T += w;
    rep.regret_as_defined += r.f_gt_xt - fs;
    rep.regret_shifted += r.f_gt_xnext - fs;
    rep.weighted_lhs_thm1 += w * (r.f_gt_xnext - fs);
    rep.weighted_lhs_thm2 += 0.5 * w * (r.f_gt_xt - fs);
    rep.max_L_next = std::max(rep.max_L_next, r.L_next);

    if (r.f_gt_yt) lhs_at_y += 0.5 * w * (*r.f_gt_yt - fs);
    else at_y_possible = false;
    if (r.f_gt_yt && r.model_min) {
      lhs_dual += 0.5 * w * *r.f_gt_yt;
      const double rhs = *r.model_min + rep.S_T * eps / 4.0;
      dual_margin = std::min(dual_margin, rhs - lhs_dual);
      dual_all = dual_all && within_bound(lhs_dual, rhs);
    } else {
      dual_possible = false;
    }
  }
  rep.rhs_thm1 = 0.5 * eps * rep.S_T + 2.0 * rep.r0;
  rep.rhs_thm2 = rep.S_T * eps / 4.0 + rep.r0;
  rep.satisfied_thm1 = within_bound(rep.weighted_lhs_thm1, rep.rhs_thm1);
  rep.satisfied_thm2 = within_bound(rep.weighted_lhs_thm2, rep.rhs_thm2);
  if (at_y_possible && !trace.rows.empty()) {
    rep.weighted_lhs_thm2_at_y = lhs_at_y;
    rep.satisfied_thm2_at_y = within_bound(lhs_at_y, rep.rhs_thm2);
  }
  if (dual_possible) {
    rep.dual_target_checked = true;
    rep.dual_target_satisfied = dual_all;
    rep.dual_target_min_margin = dual_margin;
  }

  if (holder) {
    const double gam = gamma(holder->modulus, holder->degree, eps);
    rep.gamma = gam;
    rep.line_search_cap_satisfied = within_bound(rep.max_L_next, gam);
    const double rhs = 0.5 * eps * static_cast<double>(rep.steps) + 2.0 * rep.r0 * gam;
    rep.corollary_rhs = rhs;
    rep.corollary_satisfied_as_defined = within_bound(rep.regret_as_defined, rhs);
    rep.corollary_satisfied_shifted = within_bound(rep.regret_shifted, rhs);
  }
  return rep;
}

namespace {

template <typename T>
nlohmann::json opt(const std::optional<T>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json finite(double v) {
  return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

double slack(double rhs) { return 1e-9 * (1.0 + std::abs(rhs)); }

}  // namespace

nlohmann::json to_json(const RegretReport& r) {
  nlohmann::json j;
  j["steps"] = r.steps;
  j["eps"] = r.eps;
  j["S_T"] = r.S_T;
  j["r0"] = r.r0;
  j["regret_as_defined"] = r.regret_as_defined;
  j["regret_shifted"] = r.regret_shifted;
  j["weighted_lhs_thm1"] = r.weighted_lhs_thm1;
  j["rhs_thm1"] = r.rhs_thm1;
  j["slack_thm1"] = slack(r.rhs_thm1);
  j["satisfied_thm1"] = r.satisfied_thm1;
  j["weighted_lhs_thm2"] = r.weighted_lhs_thm2;
  j["rhs_thm2"] = r.rhs_thm2;
  j["slack_thm2"] = slack(r.rhs_thm2);
  j["satisfied_thm2"] = r.satisfied_thm2;
  j["weighted_lhs_thm2_at_y"] = opt(r.weighted_lhs_thm2_at_y);
  j["satisfied_thm2_at_y"] = opt(r.satisfied_thm2_at_y);
  j["dual_target_checked"] = r.dual_target_checked;
  j["dual_target_satisfied"] =
      r.dual_target_checked ? nlohmann::json(r.dual_target_satisfied) : nlohmann::json(nullptr);
  j["dual_target_min_margin"] =
      r.dual_target_checked ? finite(r.dual_target_min_margin) : nlohmann::json(nullptr);
  j["max_L_next"] = r.max_L_next;
  j["gamma"] = opt(r.gamma);
  j["line_search_cap_satisfied"] = opt(r.line_search_cap_satisfied);
  j["corollary_rhs"] = opt(r.corollary_rhs);
  j["slack_corollary"] = r.corollary_rhs ? nlohmann::json(slack(*r.corollary_rhs))
                                         : nlohmann::json(nullptr);
  j["corollary_satisfied_as_defined"] = opt(r.corollary_satisfied_as_defined);
  j["corollary_satisfied_shifted"] = opt(r.corollary_satisfied_shifted);
  return j;
}

SugReport evaluate_sug(const RunTrace& trace, Index n, double M, double mu_h, double eps,
                       double f_star, double dist0_sq,
                       std::optional<HolderConstants<double>> holder) {
  SugReport rep;
  rep.M = M;
  rep.mu_h = mu_h;
  rep.dist0_sq = dist0_sq;
  rep.rho = mu_h > 0 ? sug_rho(M, mu_h, n) : std::numeric_limits<double>::infinity();
  rep.vacuous = !(rep.rho < 1.0);
  if (holder) rep.hypothesis_satisfied = M > gamma(holder->modulus, holder->degree, eps / 2);

  rep.bound_dominates = !rep.vacuous;
  rep.worst_margin = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < trace.rows.size(); ++r) {
    const auto& row = trace.rows[r];
    if (!row.f_full) throw std::invalid_argument("evaluate_sug: trace lacks f_full");
    const auto k = static_cast<std::int64_t>(r) + 1;
    const double gap = *row.f_full - f_star;
    if (!rep.first_within_eps && gap <= eps) rep.first_within_eps = k;
    if (!rep.vacuous) {
      const double b = sug_bound(k, M, mu_h, n, eps, dist0_sq).value;
      rep.worst_margin = std::min(rep.worst_margin, b - gap);
      rep.bound_dominates = rep.bound_dominates && within_bound(gap, b);
    }
  }
  if (mu_h > 0) {
    const auto est = sug_iteration_estimate(eps, M, mu_h, n, dist0_sq);
    rep.iteration_estimate = est.iterations;
    rep.iteration_estimate_diagnostic = est.diagnostic;
  } else {
    rep.iteration_estimate_diagnostic = "h is not strongly convex";
  }
  return rep;
}

nlohmann::json to_json(const SugReport& r) {
  nlohmann::json j;
  j["rho"] = finite(r.rho);
  j["mu_h"] = r.mu_h;
  j["M"] = r.M;
  j["dist0_sq"] = r.dist0_sq;
  j["vacuous"] = r.vacuous;
  j["hypothesis_satisfied"] = r.hypothesis_satisfied;
  j["bound_dominates"] = r.vacuous ? nlohmann::json(nullptr) : nlohmann::json(r.bound_dominates);
  j["worst_margin"] = r.vacuous ? nlohmann::json(nullptr) : finite(r.worst_margin);
  j["iteration_estimate"] = opt(r.iteration_estimate);
  j["iteration_estimate_diagnostic"] = r.iteration_estimate_diagnostic;
  j["first_within_eps"] = opt(r.first_within_eps);
  return j;
}

// ------------------------------------------------------------- experiments

void validate(const RunConfig& cfg) {
  static const char* algorithms[] = {"oupgm", "oudgm", "sug", "batch"};
  static const char* problems[] = {"synth-lasso", "lasso-csv", "steiner"};
  if (std::find_if(std::begin(algorithms), std::end(algorithms),
                   [&](const char* a) { return cfg.algorithm == a; }) == std::end(algorithms))
    throw ConfigError("algorithm", "expected oupgm, oudgm, sug or batch, got '" +
                                       cfg.algorithm + "'");
  if (std::find_if(std::begin(problems), std::end(problems),
                   [&](const char* a) { return cfg.problem == a; }) == std::end(problems))
    throw ConfigError("problem", "expected synth-lasso, lasso-csv or steiner, got '" +
                                     cfg.problem + "'");
  if (cfg.problem == "lasso-csv" && cfg.data.empty())
    throw ConfigError("data", "lasso-csv needs a sample file");
  if (!cfg.eps && !cfg.eps_auto) throw ConfigError("eps", "required (a positive number or auto)");
  if (cfg.eps && !(*cfg.eps > 0)) throw ConfigError("eps", "must be positive");
  if (cfg.eps_auto && !cfg.v) throw ConfigError("eps", "auto needs --v");
  if (cfg.v && !(*cfg.v >= 0 && *cfg.v <= 1)) throw ConfigError("v", "must lie in [0, 1]");
  if (cfg.Mv && !(*cfg.Mv > 0)) throw ConfigError("Mv", "must be positive");
  if (!(cfg.L0 > 0)) throw ConfigError("L0", "must be positive");
  if (cfg.M && !(*cfg.M > 0)) throw ConfigError("M", "must be positive");
  if (!(cfg.mu >= 0)) throw ConfigError("mu", "must be nonnegative");
  if (!(cfg.ridge >= 0)) throw ConfigError("ridge", "must be nonnegative");
  if (cfg.T < 0) throw ConfigError("T", "must be nonnegative");
  if (!cfg.order.empty()) (void)parse_order_kind(cfg.order);
  if (cfg.p < 1) throw ConfigError("p", "must be at least 1");
  if (cfg.n < 0) throw ConfigError("n", "must be nonnegative");
  if (cfg.m < 1) throw ConfigError("m", "must be at least 1");
  if (!(cfg.sparsity >= 0 && cfg.sparsity <= 1)) throw ConfigError("sparsity", "must lie in [0, 1]");
  if (!(cfg.noise >= 0)) throw ConfigError("noise", "must be nonnegative");
  if (!(cfg.stop_threshold >= 0)) throw ConfigError("stop-threshold", "must be nonnegative");
  if (cfg.fixed_step && cfg.algorithm == "sug")
    throw ConfigError("fixed-step", "not available for sug");
}

ProblemBundle build_problem(const RunConfig& cfg) {
  ProblemBundle out{CompositeProblem<double>(1, {lasso_component(Eigen::VectorXd::Ones(1), 0)},
                                             Regularizer<double>::zero()),
                    {}, std::nullopt, std::nullopt, {}};
  if (cfg.problem == "steiner") {
    SteinerInstance inst = synth_steiner(cfg.p, cfg.m, cfg.seed);
    out.problem = steiner_problem(inst);
    out.steiner = std::move(inst);
    out.description = "steiner p=" + std::to_string(cfg.p) + " m=" + std::to_string(cfg.m);
  } else {
    LassoInstance inst;
    if (cfg.problem == "lasso-csv") {
      inst = load_samples(cfg.data);
      out.description = "lasso-csv " + cfg.data;
    } else {
      const Index n = cfg.n > 0 ? cfg.n : static_cast<Index>(cfg.T + 1);
      inst = synth_lasso(cfg.p, n, cfg.sparsity, cfg.noise, cfg.seed);
      out.description = "synth-lasso p=" + std::to_string(cfg.p) + " n=" + std::to_string(n);
    }
    inst.l1_weight = cfg.mu;
    inst.ridge = cfg.ridge;
    out.ground_truth = inst.ground_truth;
    out.problem = lasso_problem(inst);
  }
  out.holder = out.problem.stream_holder();
  if (cfg.v) out.holder.degree = *cfg.v;
  if (cfg.Mv) out.holder.modulus = *cfg.Mv;
  return out;
}

ReferenceSolution solve_reference(const ProblemBundle& bundle, double tol) {
  if (bundle.steiner) return reference_solution(*bundle.steiner, tol);
  return reference_solution(bundle.problem, tol);
}

double resolve_eps(const RunConfig& cfg) {
  if (cfg.eps_auto) {
    if (!cfg.v) throw ConfigError("eps", "auto needs --v");
    return std::pow(static_cast<double>(std::max<std::int64_t>(cfg.T, 1)), -(1.0 + *cfg.v) / 2.0);
  }
  if (!cfg.eps) throw ConfigError("eps", "required");
  return *cfg.eps;
}

namespace {

std::string fmt(double v) { return detail::shortest(v); }

OrderKind resolved_order(const RunConfig& cfg, Index n) {
  if (!cfg.order.empty()) return parse_order_kind(cfg.order);
  return n >= cfg.T + 1 ? OrderKind::Sequential : OrderKind::Cyclic;
}

}  // namespace

void write_config_metadata(RunTrace& trace, const RunConfig& cfg) {
  trace.set("algorithm", cfg.algorithm);
  trace.set("fixed_step", cfg.fixed_step ? "1" : "0");
  trace.set("problem", cfg.problem);
  if (!cfg.data.empty()) trace.set("data", cfg.data);
  if (cfg.eps) trace.set("eps", fmt(*cfg.eps));
  trace.set("eps_auto", cfg.eps_auto ? "1" : "0");
  if (cfg.v) trace.set("v", fmt(*cfg.v));
  if (cfg.Mv) trace.set("Mv", fmt(*cfg.Mv));
  trace.set("L0", fmt(cfg.L0));
  if (cfg.M) trace.set("M", fmt(*cfg.M));
  trace.set("mu", fmt(cfg.mu));
  trace.set("ridge", fmt(cfg.ridge));
  trace.set("T", std::to_string(cfg.T));
  if (!cfg.order.empty()) trace.set("order", cfg.order);
  trace.set("seed", std::to_string(cfg.seed));
  trace.set("p", std::to_string(cfg.p));
  trace.set("n", std::to_string(cfg.n));
  trace.set("m", std::to_string(cfg.m));
  trace.set("sparsity", fmt(cfg.sparsity));
  trace.set("noise", fmt(cfg.noise));
  trace.set("stop_threshold", fmt(cfg.stop_threshold));
  trace.set("reference_tol", fmt(cfg.reference_tol));
  trace.set("x0", "zero");
}

RunConfig config_from_metadata(const RunTrace& trace) {
  RunConfig cfg;
  auto num = [&](const char* key) -> std::optional<double> {
    const std::string* s = trace.find(key);
    if (!s) return std::nullopt;
    const auto v = detail::parse_double(*s);
    if (!v) throw ConfigError(key, "unreadable trace metadata '" + *s + "'");
    return v;
  };
  auto str = [&](const char* key, std::string fallback) {
    const std::string* s = trace.find(key);
    return s ? *s : fallback;
  };
  std::string algorithm = str("algorithm", cfg.algorithm);
  // Solver-level names carry a "-fixed" suffix.
  if (algorithm.size() > 6 && algorithm.ends_with("-fixed")) {
    algorithm.resize(algorithm.size() - 6);
    cfg.fixed_step = true;
  }
  cfg.algorithm = algorithm;
  cfg.fixed_step = cfg.fixed_step || str("fixed_step", "0") == "1";
  cfg.problem = str("problem", cfg.problem);
  cfg.data = str("data", "");
  cfg.eps = num("eps");
  cfg.eps_auto = str("eps_auto", "0") == "1";
  cfg.v = num("v");
  cfg.Mv = num("Mv");
  cfg.L0 = num("L0").value_or(cfg.L0);
  cfg.M = num("M");
  cfg.mu = num("mu").value_or(cfg.mu);
  cfg.ridge = num("ridge").value_or(cfg.ridge);
  cfg.T = static_cast<std::int64_t>(num("T").value_or(static_cast<double>(cfg.T)));
  cfg.order = str("order", "");
  cfg.seed = std::stoull(str("seed", "0"));
  cfg.p = static_cast<Index>(num("p").value_or(static_cast<double>(cfg.p)));
  cfg.n = static_cast<Index>(num("n").value_or(0));
  cfg.m = static_cast<Index>(num("m").value_or(static_cast<double>(cfg.m)));
  cfg.sparsity = num("sparsity").value_or(cfg.sparsity);
  cfg.noise = num("noise").value_or(cfg.noise);
  cfg.stop_threshold = num("stop_threshold").value_or(0);
  cfg.reference_tol = num("reference_tol").value_or(cfg.reference_tol);
  return cfg;
}

namespace {

struct Evaluation {
  nlohmann::json report;
  std::vector<BoundCurveRow> curve;
  bool satisfied = false;
};

nlohmann::json vector_json(const Eigen::VectorXd& x) {
  return nlohmann::json(std::vector<double>(x.data(), x.data() + x.size()));
}

/// Builds report and bound curve for a finished trace. `order` is empty for SUG.
Evaluation evaluate(const RunConfig& cfg, const ProblemBundle& bundle,
                    const CompositeProblem<double>& run_problem,
                    const HolderConstants<double>& run_holder, std::span<const Index> order,
                    const RunTrace& trace, const ReferenceSolution& ref, double eps) {
  Evaluation ev;
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(bundle.problem.dimension());
  nlohmann::json& j = ev.report;
  j["algorithm"] = cfg.algorithm;
  j["fixed_step"] = cfg.fixed_step;
  j["problem"] = bundle.description;
  j["seed"] = cfg.seed;
  j["eps"] = eps;
  j["holder_degree"] = run_holder.degree;
  j["holder_modulus"] = run_holder.modulus;
  j["f_star"] = ref.value;
  j["x_star"] = vector_json(ref.x);
  j["reference_iterations"] = ref.iterations;
  j["reference_residual"] = ref.residual;
  j["rows"] = trace.rows.size();

  if (cfg.algorithm == "sug") {
    const double M = std::stod(*trace.find("M"));
    const double mu_h = bundle.problem.regularizer().strong_convexity();
    const double dist0 = (ref.x - x0).squaredNorm();
    const Index n = bundle.problem.size();
    const SugReport rep = evaluate_sug(trace, n, M, mu_h, eps, ref.value, dist0, run_holder);
    j.update(to_json(rep));
    for (std::size_t r = 0; r < trace.rows.size(); ++r) {
      BoundCurveRow row;
      row.k = static_cast<std::int64_t>(r) + 1;
      row.gap = *trace.rows[r].f_full - ref.value;
      if (!rep.vacuous) row.bound = sug_bound(row.k, M, mu_h, n, eps, dist0).value;
      ev.curve.push_back(row);
    }
    ev.satisfied = !rep.vacuous && rep.bound_dominates;
    j["bounds_satisfied"] = ev.satisfied;
    return ev;
  }

  const RegretReport rep =
      evaluate_regret(trace, run_problem, order, x0, ref.x, eps, run_holder);
  j.update(to_json(rep));

  const bool dual = cfg.algorithm == "oudgm";
  double lhs = 0, S = 0;
  std::unordered_map<Index, double> at_star;
  for (std::size_t t = 0; t < trace.rows.size(); ++t) {
    const TraceRow& r = trace.rows[t];
    auto it = at_star.find(order[t]);
    if (it == at_star.end())
      it = at_star.emplace(order[t], per_sample_value(run_problem, order[t], ref.x)).first;
    S += 1.0 / r.L_next;
    BoundCurveRow row;
    row.k = static_cast<std::int64_t>(t) + 1;
    if (dual) {
      lhs += 0.5 / r.L_next * (r.f_gt_xt - it->second);
      row.bound = S * eps / 4.0 + rep.r0;
    } else {
      lhs += (r.f_gt_xnext - it->second) / r.L_next;
      row.bound = 0.5 * eps * S + 2.0 * rep.r0;
    }
    row.gap = lhs;
    ev.curve.push_back(row);
  }

  bool ok = dual ? rep.satisfied_thm2 : rep.satisfied_thm1;
  if (!cfg.fixed_step && rep.line_search_cap_satisfied && cfg.L0 <= *rep.gamma)
    ok = ok && *rep.line_search_cap_satisfied;
  if (cfg.fixed_step && rep.corollary_rhs)
    ok = ok && (dual ? *rep.corollary_satisfied_as_defined : *rep.corollary_satisfied_shifted);
  ev.satisfied = ok;
  j["bounds_satisfied"] = ok;
  return ev;
}

struct Execution {
  RunTrace trace;
  Evaluation eval;
};

Execution execute(const RunConfig& cfg) {
  validate(cfg);
  const double eps = resolve_eps(cfg);
  const ProblemBundle bundle = build_problem(cfg);
  const ReferenceSolution ref = solve_reference(bundle, cfg.reference_tol);
  const Eigen::VectorXd x0 = Eigen::VectorXd::Zero(bundle.problem.dimension());
  const std::uint64_t stream_seed = cfg.seed + 1;

  Execution ex;
  if (cfg.algorithm == "sug") {
    SugConfig<double> sc;
    sc.eps = eps;
    sc.modulus = cfg.M ? *cfg.M
                       : 1.01 * gamma(bundle.holder.modulus, bundle.holder.degree, eps / 2);
    sc.seed = stream_seed;
    sc.max_iters = std::max<std::int64_t>(cfg.T, 1);
    sc.stop_threshold = cfg.stop_threshold;
    sc.dist0_sq = (ref.x - x0).squaredNorm();
    sc.record_time = cfg.timing;
    auto res = sug_run(bundle.problem, x0, sc);
    ex.trace = std::move(res.trace);
    write_config_metadata(ex.trace, cfg);
    ex.trace.set("M", fmt(sc.modulus));
    ex.trace.set("eps", fmt(eps));
    ex.eval = evaluate(cfg, bundle, bundle.problem, bundle.holder, {}, ex.trace, ref, eps);
    return ex;
  }

  OnlineOptions<double> opts;
  opts.eps = eps;
  opts.L0 = cfg.L0;
  opts.record_time = cfg.timing;

  const bool batch = cfg.algorithm == "batch";
  // The batch baseline sees the averaged loss at every step.
  const CompositeProblem<double> batch_problem(
      bundle.problem.dimension(), {averaged_component(bundle.problem)},
      bundle.problem.regularizer());
  const CompositeProblem<double>& run_problem = batch ? batch_problem : bundle.problem;
  HolderConstants<double> holder = bundle.holder;

  const OrderKind kind = batch ? OrderKind::Cyclic : resolved_order(cfg, run_problem.size());
  const std::vector<Index> order = sample_order(kind, run_problem.size(), cfg.T, stream_seed);

  OnlineResult<double> res;
  if (cfg.algorithm == "oudgm") {
    res = cfg.fixed_step ? udgm_fixed_step_run(run_problem, order, x0, holder, opts)
                         : udgm_run(run_problem, order, x0, opts);
  } else {
    res = cfg.fixed_step ? upgm_fixed_step_run(run_problem, order, x0, holder, opts)
                         : upgm_run(run_problem, order, x0, opts);
  }
  ex.trace = std::move(res.trace);
  write_config_metadata(ex.trace, cfg);
  ex.trace.set("eps", fmt(eps));
  ex.trace.set("order", to_string(kind));
  ex.eval = evaluate(cfg, bundle, run_problem, holder, order, ex.trace, ref, eps);
  ex.eval.report["order"] = to_string(kind);
  ex.eval.report["x_average"] = vector_json(res.average);
  ex.eval.report["x_last"] = vector_json(res.last);
  return ex;
}

}  // namespace

RunOutcome execute_experiment(const RunConfig& cfg) {
  Execution ex = execute(cfg);
  RunOutcome out;
  out.trace = std::move(ex.trace);
  out.report = std::move(ex.eval.report);
  out.bounds_satisfied = ex.eval.satisfied;
  return out;
}

RunOutcome run_experiment(const RunConfig& cfg) {
  Execution ex = execute(cfg);
  const std::filesystem::path dir(cfg.out);
  std::filesystem::create_directories(dir);

  RunOutcome out;
  out.trace_path = dir / "trace.csv";
  out.report_path = dir / "report.json";
  out.curve_path = dir / "bound_curve.csv";
  write_trace_csv(out.trace_path, ex.trace);
  {
    std::ofstream rep(out.report_path, std::ios::binary);
    if (!rep) throw ParseError(ParseError::Kind::Io, 0, "cannot write " + out.report_path.string());
    rep << ex.eval.report.dump(2) << '\n';
  }
  write_bound_curve(out.curve_path, ex.eval.curve);
  out.trace = std::move(ex.trace);
  out.report = std::move(ex.eval.report);
  out.bounds_satisfied = ex.eval.satisfied;
  return out;
}

nlohmann::json check_bounds(const std::filesystem::path& trace_path, bool* satisfied) {
  const RunTrace trace = read_trace_csv(trace_path);
  const RunConfig cfg = config_from_metadata(trace);
  validate(cfg);
  const double eps = resolve_eps(cfg);
  const ProblemBundle bundle = build_problem(cfg);
  const ReferenceSolution ref = solve_reference(bundle, cfg.reference_tol);

  Evaluation ev;
  if (cfg.algorithm == "sug") {
    ev = evaluate(cfg, bundle, bundle.problem, bundle.holder, {}, trace, ref, eps);
  } else {
    const bool batch = cfg.algorithm == "batch";
    const CompositeProblem<double> batch_problem(
        bundle.problem.dimension(), {averaged_component(bundle.problem)},
        bundle.problem.regularizer());
    const CompositeProblem<double>& run_problem = batch ? batch_problem : bundle.problem;
    const OrderKind kind = batch ? OrderKind::Cyclic : resolved_order(cfg, run_problem.size());
    const auto order = sample_order(kind, run_problem.size(), cfg.T, cfg.seed + 1);
    ev = evaluate(cfg, bundle, run_problem, bundle.holder, order, trace, ref, eps);
  }
  if (satisfied) *satisfied = ev.satisfied;
  return ev.report;
}

}  // namespace unigrad

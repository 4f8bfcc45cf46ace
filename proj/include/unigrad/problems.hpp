#pragma once

#include "unigrad/oracles.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

namespace unigrad {

/// Lasso samples: row t of `features` is a_t, `targets[t]` is b_t.
/// Component t is (a_tᵀx − b_t)² with v = 1 and M_v = 2‖a_t‖².
struct LassoInstance {
  Eigen::MatrixXd features;
  Eigen::VectorXd targets;
  double l1_weight = 0;
  double ridge = 0;
  std::optional<Eigen::VectorXd> ground_truth;

  Eigen::Index size() const { return features.rows(); }
  Eigen::Index dimension() const { return features.cols(); }
};

/// Steiner / Fermat–Weber centers, one per row. Component i is ‖x − c_i‖
/// with v = 0 and M_v = 2.
struct SteinerInstance {
  Eigen::MatrixXd centers;

  Eigen::Index size() const { return centers.rows(); }
  Eigen::Index dimension() const { return centers.cols(); }
};

ComponentOracle<double> lasso_component(const Eigen::VectorXd& a, double b);
ComponentOracle<double> steiner_component(const Eigen::VectorXd& c);

/// h = μ‖x‖₁, or μ‖x‖₁ + (σ/2)‖x‖² when σ > 0.
CompositeProblem<double> lasso_problem(const LassoInstance& inst);
CompositeProblem<double> steiner_problem(const SteinerInstance& inst);

/// a_t ~ N(0, I), x♮ with round(sparsity·p) standard-normal nonzeros on a
/// random support, b_t = a_tᵀx♮ + noise·η_t. Deterministic in `seed`.
LassoInstance synth_lasso(Eigen::Index p, Eigen::Index n, double sparsity, double noise,
                          std::uint64_t seed);

/// m centers drawn N(0, I) in dimension p.
SteinerInstance synth_steiner(Eigen::Index p, Eigen::Index m, std::uint64_t seed);

class ParseError : public std::runtime_error {
 public:
  enum class Kind { Empty, Ragged, NonNumeric, Io };

  ParseError(Kind kind, std::size_t row, const std::string& what)
      : std::runtime_error(what), kind_(kind), row_(row) {}

  Kind kind() const { return kind_; }
  std::size_t row() const { return row_; }  // 1-based data row, 0 when not row-specific

 private:
  Kind kind_;
  std::size_t row_;
};

/// Reads rows "b, a_1, …, a_p"; the first data row fixes p. Blank lines and
/// lines starting with '#' are skipped.
LassoInstance load_samples(const std::filesystem::path& path);

/// Writes the inverse of load_samples with shortest round-trip decimals.
void save_samples(const std::filesystem::path& path, const LassoInstance& inst);

}  // namespace unigrad

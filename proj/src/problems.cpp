#include "unigrad/problems.hpp"

#include "number_format.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <random>
#include <sstream>
#include <string_view>
#include <vector>

namespace unigrad {

ComponentOracle<double> lasso_component(const Eigen::VectorXd& a, double b) {
  return ComponentOracle<double>{
      [a, b](const Eigen::VectorXd& x) {
        const double r = a.dot(x) - b;
        return r * r;
      },
      [a, b](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        return 2.0 * (a.dot(x) - b) * a;
      },
      {1.0, 2.0 * a.squaredNorm()}};
}

ComponentOracle<double> steiner_component(const Eigen::VectorXd& c) {
  return ComponentOracle<double>{
      [c](const Eigen::VectorXd& x) { return (x - c).norm(); },
      [c](const Eigen::VectorXd& x) -> Eigen::VectorXd {
        Eigen::VectorXd diff = x - c;
        const double r = diff.norm();
        // 0 is the minimum-norm element of the unit ball ∂‖·‖(0).
        if (r == 0.0) return Eigen::VectorXd::Zero(x.size());
        return diff / r;
      },
      {0.0, 2.0}};
}

CompositeProblem<double> lasso_problem(const LassoInstance& inst) {
  if (inst.size() == 0) throw std::invalid_argument("lasso_problem: no samples");
  if (inst.targets.size() != inst.size())
    throw DimensionMismatch("lasso_problem targets", inst.size(), inst.targets.size());
  std::vector<ComponentOracle<double>> components;
  components.reserve(static_cast<std::size_t>(inst.size()));
  for (Eigen::Index t = 0; t < inst.size(); ++t)
    components.push_back(lasso_component(inst.features.row(t).transpose(), inst.targets[t]));
  auto h = inst.ridge > 0 ? Regularizer<double>::elastic_net(inst.l1_weight, inst.ridge)
                          : Regularizer<double>::l1(inst.l1_weight);
  return CompositeProblem<double>(inst.dimension(), std::move(components), std::move(h));
}

CompositeProblem<double> steiner_problem(const SteinerInstance& inst) {
  if (inst.size() == 0) throw std::invalid_argument("steiner_problem: no centers");
  std::vector<ComponentOracle<double>> components;
  components.reserve(static_cast<std::size_t>(inst.size()));
  for (Eigen::Index i = 0; i < inst.size(); ++i)
    components.push_back(steiner_component(inst.centers.row(i).transpose()));
  return CompositeProblem<double>(inst.dimension(), std::move(components),
                                  Regularizer<double>::zero());
}

LassoInstance synth_lasso(Eigen::Index p, Eigen::Index n, double sparsity, double noise,
                          std::uint64_t seed) {
  if (p < 1 || n < 1) throw std::invalid_argument("synth_lasso: p and n must be >= 1");
  if (!(sparsity >= 0.0 && sparsity <= 1.0))
    throw std::invalid_argument("synth_lasso: sparsity must lie in [0, 1]");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  LassoInstance inst;
  inst.features.resize(n, p);
  for (Eigen::Index t = 0; t < n; ++t)
    for (Eigen::Index j = 0; j < p; ++j) inst.features(t, j) = normal(rng);

  Eigen::VectorXd truth = Eigen::VectorXd::Zero(p);
  const auto nnz = static_cast<Eigen::Index>(std::llround(sparsity * static_cast<double>(p)));
  std::vector<Eigen::Index> support(static_cast<std::size_t>(p));
  std::iota(support.begin(), support.end(), Eigen::Index{0});
  std::shuffle(support.begin(), support.end(), rng);
  for (Eigen::Index k = 0; k < nnz; ++k) truth[support[static_cast<std::size_t>(k)]] = normal(rng);

  inst.targets = inst.features * truth;
  for (Eigen::Index t = 0; t < n; ++t) inst.targets[t] += noise * normal(rng);
  inst.ground_truth = std::move(truth);
  return inst;
}

SteinerInstance synth_steiner(Eigen::Index p, Eigen::Index m, std::uint64_t seed) {
  if (p < 1 || m < 1) throw std::invalid_argument("synth_steiner: p and m must be >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  SteinerInstance inst;
  inst.centers.resize(m, p);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j < p; ++j) inst.centers(i, j) = normal(rng);
  return inst;
}

LassoInstance load_samples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(ParseError::Kind::Io, 0, "cannot open " + path.string());

  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t width = 0;
  while (std::getline(in, line)) {
    const std::string_view body = detail::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const std::size_t row_no = rows.size() + 1;
    std::vector<double> values;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = body.find(',', start);
      const std::string_view field =
          body.substr(start, comma == std::string_view::npos ? body.npos : comma - start);
      const auto value = detail::parse_double(field);
      if (!value)
        throw ParseError(ParseError::Kind::NonNumeric, row_no,
                         "row " + std::to_string(row_no) + ": non-numeric field '" +
                             std::string(detail::trim(field)) + "'");
      values.push_back(*value);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (rows.empty()) {
      if (values.size() < 2)
        throw ParseError(ParseError::Kind::Ragged, row_no,
                         "row 1: need a target and at least one feature");
      width = values.size();
    } else if (values.size() != width) {
      throw ParseError(ParseError::Kind::Ragged, row_no,
                       "row " + std::to_string(row_no) + ": expected " +
                           std::to_string(width) + " fields, got " +
                           std::to_string(values.size()));
    }
    rows.push_back(std::move(values));
  }
  if (rows.empty()) throw ParseError(ParseError::Kind::Empty, 0, path.string() + ": no samples");

  LassoInstance inst;
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto p = static_cast<Eigen::Index>(width - 1);
  inst.features.resize(n, p);
  inst.targets.resize(n);
  for (Eigen::Index t = 0; t < n; ++t) {
    const auto& r = rows[static_cast<std::size_t>(t)];
    inst.targets[t] = r[0];
    for (Eigen::Index j = 0; j < p; ++j) inst.features(t, j) = r[static_cast<std::size_t>(j + 1)];
  }
  return inst;
}

void save_samples(const std::filesystem::path& path, const LassoInstance& inst) {
  std::ofstream out(path);
  if (!out) throw ParseError(ParseError::Kind::Io, 0, "cannot write " + path.string());
  for (Eigen::Index t = 0; t < inst.size(); ++t) {
    out << detail::shortest(inst.targets[t]);
    for (Eigen::Index j = 0; j < inst.dimension(); ++j)
      out << ',' << detail::shortest(inst.features(t, j));
    out << '\n';
  }
}

}  // namespace unigrad

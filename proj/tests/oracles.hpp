// Independent reference computations used only by tests. Nothing here calls
// into the valuation or utility code paths it is compared against.
#ifndef PSHAPLEY_TESTS_ORACLES_HPP
#define PSHAPLEY_TESTS_ORACLES_HPP

#include "pshapley/dataset.hpp"
#include "pshapley/model.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <vector>

namespace oracle {

inline double factorial(int k) {
  double f = 1.0;
  for (int i = 2; i <= k; ++i) f *= i;
  return f;
}

inline double choose(int n, int k) { return factorial(n) / (factorial(k) * factorial(n - k)); }

// Plain formulas, straight from their definitions.
inline double relu(double x) { return x < 0 ? 0 : x; }
inline double square(double x) { return x * x; }
inline double mish(double x) { return x * std::tanh(std::log(1.0 + std::exp(x))); }
inline double swish(double x, double beta = 1.0) { return x / (1.0 + std::exp(-beta * x)); }

// Probability-wise utility: mean over validation of AF(true-class confidence)
// for correctly classified points.
inline double probability_utility(const Eigen::VectorXd& p, const Eigen::VectorXd& y,
                                  const std::function<double(double)>& af) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < y.size(); ++j) {
    const int predicted = p[j] >= 0.5 ? 1 : 0;
    if (predicted != static_cast<int>(y[j])) continue;
    const double confidence = y[j] == 1.0 ? p[j] : 1.0 - p[j];
    total += af(confidence);
  }
  return total / static_cast<double>(y.size());
}

inline double accuracy(const Eigen::VectorXd& p, const Eigen::VectorXd& y) {
  int correct = 0;
  for (Eigen::Index j = 0; j < y.size(); ++j) correct += (p[j] >= 0.5 ? 1 : 0) == int(y[j]);
  return double(correct) / double(y.size());
}

// Utility of every subset mask, training each coalition from scratch.
inline std::vector<double> subset_utilities(const pshapley::Dataset& train,
                                            const pshapley::Dataset& valid,
                                            const pshapley::TrainConfig& config,
                                            const std::function<double(const Eigen::VectorXd&,
                                                                       const Eigen::VectorXd&)>& score) {
  const int n = static_cast<int>(train.size());
  std::vector<double> u(std::size_t{1} << n, 0.0);
  for (std::uint64_t mask = 1; mask < u.size(); ++mask) {
    std::vector<Eigen::Index> rows;
    for (int i = 0; i < n; ++i) {
      if (mask >> i & 1) rows.push_back(i);
    }
    const pshapley::Dataset coalition = train.select(rows);
    const auto model = pshapley::train(coalition, config);
    Eigen::VectorXd p(valid.size());
    for (Eigen::Index j = 0; j < valid.size(); ++j) {
      const double z = valid.features().row(j).dot(model.weights) + model.bias;
      p[j] = 1.0 / (1.0 + std::exp(-z));
    }
    u[mask] = score(p, valid.labels());
  }
  return u;
}

// Shapley value from the subset formula with factorial weights
// |S|! (n-|S|-1)! / n!.
inline std::vector<double> shapley_by_subsets(int n, const std::vector<double>& u) {
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (std::uint64_t mask = 0; mask < u.size(); ++mask) {
      if (mask >> i & 1) continue;
      const int s = std::popcount(mask);
      v[i] += factorial(s) * factorial(n - s - 1) / factorial(n) *
              (u[mask | (std::uint64_t{1} << i)] - u[mask]);
    }
  }
  return v;
}

// Shapley value as the average marginal over all n! orderings.
inline std::vector<double> shapley_by_orderings(int n, const std::vector<double>& u) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<double> v(n, 0.0);
  double count = 0.0;
  do {
    std::uint64_t mask = 0;
    for (int k = 0; k < n; ++k) {
      const std::uint64_t next = mask | (std::uint64_t{1} << order[k]);
      v[order[k]] += u[next] - u[mask];
      mask = next;
    }
    count += 1.0;
  } while (std::next_permutation(order.begin(), order.end()));
  for (auto& x : v) x /= count;
  return v;
}

// Beta(alpha, beta) semivalue weight for joining a coalition of size j-1,
// evaluated with std::beta.
inline double beta_weight(int n, int j, double alpha, double beta) {
  return n * choose(n - 1, j - 1) * std::beta(j + alpha - 1.0, n - j + beta) /
         std::beta(alpha, beta);
}

inline std::vector<double> beta_semivalue_by_subsets(int n, const std::vector<double>& u,
                                                     double alpha, double beta) {
  std::vector<double> v(n, 0.0);
  for (int i = 0; i < n; ++i) {
    for (std::uint64_t mask = 0; mask < u.size(); ++mask) {
      if (mask >> i & 1) continue;
      const int s = std::popcount(mask);
      v[i] += beta_weight(n, s + 1, alpha, beta) / (n * choose(n - 1, s)) *
              (u[mask | (std::uint64_t{1} << i)] - u[mask]);
    }
  }
  return v;
}

// Removal-experiment metrics from their definitions.
inline double weighted_drop_double_sum(const std::vector<double>& s) {
  double total = 0.0;
  for (std::size_t j = 1; j < s.size(); ++j) {
    double inner = 0.0;
    for (std::size_t i = 1; i <= j; ++i) inner += s[i - 1] - s[i];
    total += inner / double(j);
  }
  return total;
}

}  // namespace oracle

#endif  // PSHAPLEY_TESTS_ORACLES_HPP

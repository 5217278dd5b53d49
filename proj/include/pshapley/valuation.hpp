#ifndef PSHAPLEY_VALUATION_HPP
#define PSHAPLEY_VALUATION_HPP

#include "pshapley/utility.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pshapley {

struct ValuationResult {
  std::string method;
  std::vector<PointId> ids;        // training point ids, player order
  Eigen::VectorXd values;          // aligned with ids
  Eigen::VectorXd standard_errors; // Monte Carlo methods only; empty otherwise
  Index permutations_used = 0;
  double truncation_rate = 0.0;    // skipped marginals / (permutations * n)
  nlohmann::ordered_json metadata = nlohmann::ordered_json::object();

  double value_of(PointId id) const;
  double total() const { return values.sum(); }
};

nlohmann::ordered_json to_json(const ValuationResult& result);
ValuationResult valuation_from_json(const nlohmann::ordered_json& j);

// Point ids by descending value; equal values go in ascending id order.
std::vector<PointId> rank_descending(const ValuationResult& result);

struct ExactOptions {
  Index max_players = 16;  // enumeration visits 2^n coalitions
  std::size_t threads = 0; // 0 = hardware concurrency
};

// Shapley value by full subset enumeration:
//   v_i = (1/n) sum_{S subset N\{i}} C(n-1,|S|)^{-1} (U(S+i) - U(S)).
// With a probability-utility evaluator this is the exact P-Shapley value.
ValuationResult exact_shapley(const CoalitionGame& game, const ExactOptions& options = {});

// Semivalue by enumeration with cardinality weights: weights[j-1] multiplies
// marginals into coalitions of size j-1, j = 1..n. All-ones is Shapley.
ValuationResult exact_semivalue(const CoalitionGame& game, std::span<const double> weights,
                                const ExactOptions& options = {});

// Cardinality weights for Beta(alpha, beta):
//   w_j = n * C(n-1, j-1) * B(j+alpha-1, n-j+beta) / B(alpha, beta),  j = 1..n.
// They average to 1; alpha = beta = 1 gives all ones, beta > alpha favors
// small coalitions.
Eigen::VectorXd beta_shapley_weights(Index n, double alpha, double beta);

ValuationResult exact_beta_shapley(const CoalitionGame& game, double alpha, double beta,
                                   const ExactOptions& options = {});

struct MonteCarloOptions {
  Index permutations = 500;
  double epsilon = 0.001;  // 0 disables truncation
  std::uint64_t seed = 0;
  std::size_t threads = 0;
};

// Raw output of the truncated permutation scan. Row t of `order` is the t-th
// permutation; marginals(t, j) is what order(t, j) contributed when it joined
// the first j points of that permutation (0 after truncation).
struct PermutationScans {
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> order;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> marginals;
  Index skipped = 0;
  double full_utility = 0.0;

  Index permutations() const { return order.rows(); }
  Index players() const { return order.cols(); }
  double truncation_rate() const;
};

// The t-th permutation drawn from a master seed: Fisher-Yates under a seed
// derived from (seed, t). Independent of how permutations are scheduled.
std::vector<Index> sample_permutation(Index n, std::uint64_t seed, Index t);

// For every permutation, scans prefixes and stops evaluating once
// |U(N) - U(prefix)| < epsilon; the remaining points get zero marginals.
PermutationScans scan_permutations(const CoalitionGame& game, const MonteCarloOptions& options);

// Truncated Monte Carlo Shapley: mean per-point marginal over permutations.
ValuationResult tmc_shapley(const CoalitionGame& game, const MonteCarloOptions& options);
ValuationResult tmc_from_scans(const PermutationScans& scans, const std::vector<PointId>& ids);

// Monte Carlo Beta-Shapley reusing the permutation scans: each marginal is
// weighted by w_j for the position j at which the point joined.
ValuationResult beta_shapley(const CoalitionGame& game, double alpha, double beta,
                             const MonteCarloOptions& options);
ValuationResult beta_from_scans(const PermutationScans& scans, const std::vector<PointId>& ids,
                                double alpha, double beta);

// v_i = U(N) - U(N \ {i}).
ValuationResult leave_one_out(const CoalitionGame& game, std::size_t threads = 0);

}  // namespace pshapley

#endif  // PSHAPLEY_VALUATION_HPP

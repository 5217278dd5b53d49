#include "pshapley/valuation.hpp"

#include "pshapley/parallel.hpp"
#include "pshapley/random.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace pshapley {

namespace {

double log_beta(double a, double b) { return std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b); }

double log_choose(double n, double k) {
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

std::vector<double> utilities_of_all_subsets(const CoalitionGame& game,
                                             const ExactOptions& options) {
  const Index n = game.player_count();
  require(n >= 1, "game has no players");
  require(n <= options.max_players && n <= 30,
          "exact enumeration is capped at " + std::to_string(options.max_players) +
              " players; got " + std::to_string(n));
  const std::size_t subsets = std::size_t{1} << n;
  std::vector<double> u(subsets);
  parallel_for(subsets, options.threads, [&](std::size_t mask) {
    u[mask] = game.utility(Coalition::from_mask(n, mask));
  });
  return u;
}

// Per-point mean and standard error over permutations of sample(t, i).
template <typename Sample>
void aggregate(const PermutationScans& scans, Sample&& sample, ValuationResult& out) {
  const Index m = scans.permutations();
  const Index n = scans.players();
  Eigen::MatrixXd samples(m, n);
  for (Index t = 0; t < m; ++t) {
    for (Index j = 0; j < n; ++j) samples(t, scans.order(t, j)) = sample(t, j);
  }
  out.values.resize(n);
  out.standard_errors.resize(n);
  for (Index i = 0; i < n; ++i) {
    double sum = 0.0;
    for (Index t = 0; t < m; ++t) sum += samples(t, i);
    const double mean = sum / static_cast<double>(m);
    double ss = 0.0;
    for (Index t = 0; t < m; ++t) ss += (samples(t, i) - mean) * (samples(t, i) - mean);
    out.values[i] = mean;
    out.standard_errors[i] =
        m > 1 ? std::sqrt(ss / static_cast<double>(m - 1)) / std::sqrt(static_cast<double>(m))
              : 0.0;
  }
  out.permutations_used = m;
  out.truncation_rate = scans.truncation_rate();
}

nlohmann::ordered_json mc_metadata(const MonteCarloOptions& options) {
  return {{"permutations", options.permutations},
          {"epsilon", options.epsilon},
          {"seed", options.seed}};
}

}  // namespace

double ValuationResult::value_of(PointId id) const {
  const auto it = std::find(ids.begin(), ids.end(), id);
  require(it != ids.end(), "no value for point id " + std::to_string(id));
  return values[it - ids.begin()];
}

nlohmann::ordered_json to_json(const ValuationResult& result) {
  nlohmann::ordered_json values = nlohmann::ordered_json::object();
  nlohmann::ordered_json errors = nlohmann::ordered_json::object();
  for (std::size_t k = 0; k < result.ids.size(); ++k) {
    const auto key = std::to_string(result.ids[k]);
    values[key] = result.values[static_cast<Index>(k)];
    if (result.standard_errors.size() > 0) {
      errors[key] = result.standard_errors[static_cast<Index>(k)];
    }
  }
  return {{"method", result.method},
          {"values", values},
          {"stderr", errors},
          {"permutations_used", result.permutations_used},
          {"truncation_rate", result.truncation_rate},
          {"metadata", result.metadata}};
}

ValuationResult valuation_from_json(const nlohmann::ordered_json& j) {
  ValuationResult result;
  result.method = j.at("method").get<std::string>();
  const auto& values = j.at("values");
  const auto& errors = j.contains("stderr") ? j.at("stderr") : nlohmann::ordered_json::object();
  result.values.resize(static_cast<Index>(values.size()));
  if (!errors.empty()) result.standard_errors.resize(static_cast<Index>(values.size()));
  Index k = 0;
  for (auto it = values.begin(); it != values.end(); ++it, ++k) {
    result.ids.push_back(std::stoll(it.key()));
    result.values[k] = it.value().get<double>();
    if (!errors.empty()) result.standard_errors[k] = errors.at(it.key()).get<double>();
  }
  result.permutations_used = j.value("permutations_used", Index{0});
  result.truncation_rate = j.value("truncation_rate", 0.0);
  result.metadata = j.value("metadata", nlohmann::ordered_json::object());
  return result;
}

std::vector<PointId> rank_descending(const ValuationResult& result) {
  std::vector<std::size_t> order(result.ids.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double va = result.values[static_cast<Index>(a)];
    const double vb = result.values[static_cast<Index>(b)];
    if (va != vb) return va > vb;
    return result.ids[a] < result.ids[b];
  });
  std::vector<PointId> ids;
  ids.reserve(order.size());
  for (auto k : order) ids.push_back(result.ids[k]);
  return ids;
}

ValuationResult exact_semivalue(const CoalitionGame& game, std::span<const double> weights,
                                const ExactOptions& options) {
  const Index n = game.player_count();
  require(static_cast<Index>(weights.size()) == n, "need one weight per coalition size");
  const std::vector<double> u = utilities_of_all_subsets(game, options);

  // coefficient[s] = w_{s+1} / (n * C(n-1, s))
  std::vector<double> coefficient(static_cast<std::size_t>(n));
  for (Index s = 0; s < n; ++s) {
    double c = 1.0;
    for (Index r = 1; r <= s; ++r) c = c * double(n - 1 - s + r) / double(r);
    coefficient[static_cast<std::size_t>(s)] =
        weights[static_cast<std::size_t>(s)] / (static_cast<double>(n) * c);
  }

  ValuationResult result;
  result.ids = game.player_ids();
  result.values = Eigen::VectorXd::Zero(n);
  const std::size_t subsets = u.size();
  for (Index i = 0; i < n; ++i) {
    const std::size_t bit = std::size_t{1} << i;
    double sum = 0.0;
    for (std::size_t mask = 0; mask < subsets; ++mask) {
      if (mask & bit) continue;
      const auto s = static_cast<std::size_t>(std::popcount(mask));
      sum += coefficient[s] * (u[mask | bit] - u[mask]);
    }
    result.values[i] = sum;
  }
  result.metadata = {{"estimator", "exact"},
                     {"utility_empty", u.front()},
                     {"utility_full", u.back()}};
  return result;
}

ValuationResult exact_shapley(const CoalitionGame& game, const ExactOptions& options) {
  const std::vector<double> ones(static_cast<std::size_t>(game.player_count()), 1.0);
  ValuationResult result = exact_semivalue(game, ones, options);
  result.method = "exact-shapley";
  return result;
}

Eigen::VectorXd beta_shapley_weights(Index n, double alpha, double beta) {
  require(n >= 1, "need at least one player");
  require(alpha > 0.0 && beta > 0.0, "beta-shapley parameters must be positive");
  Eigen::VectorXd w(n);
  const double base = log_beta(alpha, beta);
  for (Index j = 1; j <= n; ++j) {
    w[j - 1] = std::exp(std::log(double(n)) + log_choose(double(n - 1), double(j - 1)) +
                        log_beta(double(j) + alpha - 1.0, double(n - j) + beta) - base);
  }
  if (alpha == 1.0 && beta == 1.0) w.setOnes();
  return w;
}

ValuationResult exact_beta_shapley(const CoalitionGame& game, double alpha, double beta,
                                   const ExactOptions& options) {
  const Eigen::VectorXd w = beta_shapley_weights(game.player_count(), alpha, beta);
  ValuationResult result =
      exact_semivalue(game, std::span<const double>(w.data(), static_cast<std::size_t>(w.size())),
                      options);
  result.method = "exact-beta-shapley";
  result.metadata["alpha"] = alpha;
  result.metadata["beta"] = beta;
  return result;
}

double PermutationScans::truncation_rate() const {
  const Index total = permutations() * players();
  return total == 0 ? 0.0 : static_cast<double>(skipped) / static_cast<double>(total);
}

std::vector<Index> sample_permutation(Index n, std::uint64_t seed, Index t) {
  std::vector<Index> perm(static_cast<std::size_t>(n));
  std::iota(perm.begin(), perm.end(), Index{0});
  Rng rng(child_seed(seed, static_cast<std::uint64_t>(t)));
  rng.shuffle(std::span<Index>(perm));
  return perm;
}

PermutationScans scan_permutations(const CoalitionGame& game, const MonteCarloOptions& options) {
  require(options.permutations >= 1, "need at least one permutation");
  require(options.epsilon >= 0.0, "epsilon must be nonnegative");
  const Index n = game.player_count();
  const Index m = options.permutations;
  require(n >= 1, "game has no players");

  PermutationScans scans;
  scans.order.resize(m, n);
  scans.marginals = decltype(scans.marginals)::Zero(m, n);
  scans.full_utility = game.utility(Coalition::full(n));
  const double empty_utility = game.utility(Coalition(n));

  std::vector<Index> skipped(static_cast<std::size_t>(m), 0);
  parallel_for(static_cast<std::size_t>(m), options.threads, [&](std::size_t t) {
    const auto row = static_cast<Index>(t);
    const std::vector<Index> perm = sample_permutation(n, options.seed, row);
    for (Index j = 0; j < n; ++j) scans.order(row, j) = perm[static_cast<std::size_t>(j)];

    Coalition prefix(n);
    double previous = empty_utility;
    for (Index j = 0; j < n; ++j) {
      if (std::abs(scans.full_utility - previous) < options.epsilon) {
        skipped[t] = n - j;
        break;
      }
      prefix.insert(perm[static_cast<std::size_t>(j)]);
      const double current = game.utility(prefix);
      scans.marginals(row, j) = current - previous;
      previous = current;
    }
  });
  scans.skipped = std::accumulate(skipped.begin(), skipped.end(), Index{0});
  return scans;
}

ValuationResult tmc_from_scans(const PermutationScans& scans, const std::vector<PointId>& ids) {
  require(static_cast<Index>(ids.size()) == scans.players(), "id count does not match scans");
  ValuationResult result;
  result.method = "tmc-shapley";
  result.ids = ids;
  aggregate(scans, [&](Index t, Index j) { return scans.marginals(t, j); }, result);
  return result;
}

ValuationResult tmc_shapley(const CoalitionGame& game, const MonteCarloOptions& options) {
  ValuationResult result = tmc_from_scans(scan_permutations(game, options), game.player_ids());
  result.metadata = mc_metadata(options);
  return result;
}

ValuationResult beta_from_scans(const PermutationScans& scans, const std::vector<PointId>& ids,
                                double alpha, double beta) {
  require(static_cast<Index>(ids.size()) == scans.players(), "id count does not match scans");
  const Eigen::VectorXd w = beta_shapley_weights(scans.players(), alpha, beta);
  ValuationResult result;
  result.method = "beta-shapley";
  result.ids = ids;
  aggregate(scans, [&](Index t, Index j) { return w[j] * scans.marginals(t, j); }, result);
  return result;
}

ValuationResult beta_shapley(const CoalitionGame& game, double alpha, double beta,
                             const MonteCarloOptions& options) {
  require(alpha > 0.0 && beta > 0.0, "beta-shapley parameters must be positive");
  ValuationResult result =
      beta_from_scans(scan_permutations(game, options), game.player_ids(), alpha, beta);
  result.metadata = mc_metadata(options);
  result.metadata["alpha"] = alpha;
  result.metadata["beta"] = beta;
  return result;
}

ValuationResult leave_one_out(const CoalitionGame& game, std::size_t threads) {
  const Index n = game.player_count();
  require(n >= 2, "leave-one-out needs at least 2 points");
  const double full = game.utility(Coalition::full(n));
  ValuationResult result;
  result.method = "loo";
  result.ids = game.player_ids();
  result.values.resize(n);
  parallel_for(static_cast<std::size_t>(n), threads, [&](std::size_t k) {
    Coalition rest = Coalition::full(n);
    rest.erase(static_cast<Index>(k));
    result.values[static_cast<Index>(k)] = full - game.utility(rest);
  });
  result.metadata = {{"estimator", "leave-one-out"}, {"utility_full", full}};
  return result;
}

}  // namespace pshapley

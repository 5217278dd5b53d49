#ifndef PSHAPLEY_UTILITY_HPP
#define PSHAPLEY_UTILITY_HPP

#include "pshapley/activation.hpp"
#include "pshapley/coalition.hpp"
#include "pshapley/dataset.hpp"
#include "pshapley/lru_cache.hpp"
#include "pshapley/model.hpp"

#include <functional>
#include <memory>
#include <span>
#include <string>

namespace pshapley {

struct UtilityKind {
  enum class Kind { Accuracy, Probability };

  Kind kind = Kind::Accuracy;
  Activation activation;  // Probability only

  static UtilityKind accuracy() { return {Kind::Accuracy, {}}; }
  static UtilityKind probability(Activation af) { return {Kind::Probability, af}; }

  // "accuracy" or "probability:<activation>".
  std::string name() const;

  friend bool operator==(const UtilityKind& a, const UtilityKind& b) {
    return a.kind == b.kind && (a.kind == Kind::Accuracy || a.activation == b.activation);
  }
};

// The probability-vector overloads take class-1 probabilities aligned with
// `labels`; the model overloads predict them first.
double accuracy_utility(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                        const Eigen::Ref<const LabelVector>& labels, double threshold = 0.5);

// (1/|V|) sum_j AF(true-class confidence_j) * [prediction_j correct]
double probability_utility(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                           const Eigen::Ref<const LabelVector>& labels, const Activation& af,
                           double threshold = 0.5);

double accuracy_utility(const LogisticModel& model, const Dataset& validation);
double probability_utility(const LogisticModel& model, const Dataset& validation,
                           const Activation& af);

double utility_from_probabilities(const UtilityKind& kind,
                                  const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                  const Eigen::Ref<const LabelVector>& labels,
                                  double threshold = 0.5);

// A cooperative game over players 0..n-1. Implementations must be pure:
// the same coalition always yields the same utility, and utility() must be
// safe to call concurrently.
class CoalitionGame {
 public:
  virtual ~CoalitionGame() = default;
  virtual Index player_count() const = 0;
  // External id of each player position; defaults to the position itself.
  virtual std::vector<PointId> player_ids() const;
  virtual double utility(const Coalition& members) const = 0;
};

// Game backed by an arbitrary callable; used for constructed games.
class FunctionGame : public CoalitionGame {
 public:
  using Function = std::function<double(const Coalition&)>;
  FunctionGame(Index players, Function fn) : players_(players), fn_(std::move(fn)) {}
  Index player_count() const override { return players_; }
  double utility(const Coalition& members) const override { return fn_(members); }

 private:
  Index players_;
  Function fn_;
};

// Trains one model per coalition and memoizes its validation probabilities.
// Training does not depend on the utility kind, so evaluators for different
// kinds can share one oracle and never train the same coalition twice.
class TrainingOracle {
 public:
  static constexpr std::size_t kDefaultCapacity = 250'000;

  TrainingOracle(Dataset train, Dataset validation, TrainConfig config,
                 std::size_t cache_capacity = kDefaultCapacity);

  const Dataset& train_data() const { return train_; }
  const Dataset& validation() const { return validation_; }
  const TrainConfig& config() const { return config_; }

  // Non-empty coalitions only.
  LogisticModel fit(const Coalition& members) const;
  std::shared_ptr<const Eigen::VectorXd> validation_probabilities(const Coalition& members) const;

  std::size_t trainings() const { return cache_.misses(); }

 private:
  Dataset train_;
  Dataset validation_;
  TrainConfig config_;
  mutable LruCache<Coalition, std::shared_ptr<const Eigen::VectorXd>, CoalitionHash> cache_;
};

// Coalition -> utility of the model trained on it, scored on the validation
// set. The empty coalition is worth exactly 0 and never reaches the trainer.
class UtilityEvaluator : public CoalitionGame {
 public:
  static constexpr std::size_t kDefaultCapacity = 1'000'000;

  UtilityEvaluator(std::shared_ptr<const TrainingOracle> oracle, UtilityKind kind,
                   std::size_t cache_capacity = kDefaultCapacity);
  UtilityEvaluator(Dataset train, Dataset validation, TrainConfig config, UtilityKind kind,
                   std::size_t cache_capacity = kDefaultCapacity);

  Index player_count() const override { return oracle_->train_data().size(); }
  std::vector<PointId> player_ids() const override { return oracle_->train_data().ids(); }
  double utility(const Coalition& members) const override;

  // Same as utility(), addressed by training point ids.
  double evaluate(std::span<const PointId> ids) const;

  const UtilityKind& kind() const { return kind_; }
  const TrainingOracle& oracle() const { return *oracle_; }
  std::shared_ptr<const TrainingOracle> shared_oracle() const { return oracle_; }

  std::size_t cache_hits() const { return cache_.hits(); }
  std::size_t cache_misses() const { return cache_.misses(); }
  std::size_t cache_size() const { return cache_.size(); }

 private:
  std::shared_ptr<const TrainingOracle> oracle_;
  UtilityKind kind_;
  mutable LruCache<Coalition, double, CoalitionHash> cache_;
};

}  // namespace pshapley

#endif  // PSHAPLEY_UTILITY_HPP

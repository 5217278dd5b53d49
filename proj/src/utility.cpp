#include "pshapley/utility.hpp"

#include <cstdlib>
#include <numeric>

namespace pshapley {

std::string Activation::name() const {
  switch (kind) {
    case Kind::ReLU:
      return "relu";
    case Kind::Square:
      return "square";
    case Kind::Mish:
      return "mish";
    case Kind::Swish: {
      if (swish_beta == 1.0) return "swish";
      char buffer[32];
      std::snprintf(buffer, sizeof(buffer), "swish@%g", swish_beta);
      return buffer;
    }
  }
  return "unknown";
}

Activation Activation::parse(const std::string& text) {
  if (text == "relu") return relu();
  if (text == "square") return square();
  if (text == "mish") return mish();
  if (text == "swish") return swish();
  if (text.rfind("swish@", 0) == 0) {
    char* end = nullptr;
    const double beta = std::strtod(text.c_str() + 6, &end);
    require(end != nullptr && *end == '\0', "bad swish beta in '" + text + "'");
    return swish(beta);
  }
  throw Error("invalid_argument", "unknown activation '" + text + "'");
}

std::string UtilityKind::name() const {
  return kind == Kind::Accuracy ? "accuracy" : "probability:" + activation.name();
}

double accuracy_utility(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                        const Eigen::Ref<const LabelVector>& labels, double threshold) {
  require(labels.size() >= 1, "validation set is empty");
  require(probabilities.size() == labels.size(), "probability count does not match labels");
  Index correct = 0;
  for (Index j = 0; j < labels.size(); ++j) {
    correct += label_from_probability(probabilities[j], threshold) == static_cast<int>(labels[j]);
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

double probability_utility(const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                           const Eigen::Ref<const LabelVector>& labels, const Activation& af,
                           double threshold) {
  require(labels.size() >= 1, "validation set is empty");
  require(probabilities.size() == labels.size(), "probability count does not match labels");
  double total = 0.0;
  for (Index j = 0; j < labels.size(); ++j) {
    const double p = probabilities[j];
    const double y = labels[j];
    if (label_from_probability(p, threshold) != static_cast<int>(y)) continue;
    total += activation_eval(af, y * p + (1.0 - y) * (1.0 - p));
  }
  return total / static_cast<double>(labels.size());
}

double accuracy_utility(const LogisticModel& model, const Dataset& validation) {
  return accuracy_utility(model.predict_proba_rows(validation.features()), validation.labels(),
                          model.threshold);
}

double probability_utility(const LogisticModel& model, const Dataset& validation,
                           const Activation& af) {
  return probability_utility(model.predict_proba_rows(validation.features()), validation.labels(), af,
                             model.threshold);
}

double utility_from_probabilities(const UtilityKind& kind,
                                  const Eigen::Ref<const Eigen::VectorXd>& probabilities,
                                  const Eigen::Ref<const LabelVector>& labels, double threshold) {
  if (kind.kind == UtilityKind::Kind::Accuracy) {
    return accuracy_utility(probabilities, labels, threshold);
  }
  return probability_utility(probabilities, labels, kind.activation, threshold);
}

std::vector<PointId> CoalitionGame::player_ids() const {
  std::vector<PointId> ids(static_cast<std::size_t>(player_count()));
  std::iota(ids.begin(), ids.end(), PointId{0});
  return ids;
}

TrainingOracle::TrainingOracle(Dataset train, Dataset validation, TrainConfig config,
                               std::size_t cache_capacity)
    : train_(std::move(train)),
      validation_(std::move(validation)),
      config_(config),
      cache_(cache_capacity) {
  config_.validate();
  require(!validation_.empty(), "validation set is empty");
  require(train_.dim() == validation_.dim(),
          "train and validation feature dimensions differ");
}

LogisticModel TrainingOracle::fit(const Coalition& members) const {
  require(members.players() == train_.size(), "coalition does not match the training set");
  const auto rows = members.members();
  require(!rows.empty(), "cannot train on an empty coalition");
  const auto k = static_cast<Index>(rows.size());
  FeatureMatrix x(k, train_.dim());
  Eigen::VectorXd y(k);
  for (Index r = 0; r < k; ++r) {
    x.row(r) = train_.features().row(rows[static_cast<std::size_t>(r)]);
    y[r] = train_.labels()[rows[static_cast<std::size_t>(r)]];
  }
  return train(x, y, config_);
}

std::shared_ptr<const Eigen::VectorXd> TrainingOracle::validation_probabilities(
    const Coalition& members) const {
  return cache_.get_or_compute(members, [&] {
    return std::make_shared<const Eigen::VectorXd>(fit(members).predict_proba_rows(validation_.features()));
  });
}

UtilityEvaluator::UtilityEvaluator(std::shared_ptr<const TrainingOracle> oracle, UtilityKind kind,
                                   std::size_t cache_capacity)
    : oracle_(std::move(oracle)), kind_(kind), cache_(cache_capacity) {
  require(oracle_ != nullptr, "utility evaluator needs a training oracle");
}

UtilityEvaluator::UtilityEvaluator(Dataset train, Dataset validation, TrainConfig config,
                                   UtilityKind kind, std::size_t cache_capacity)
    : UtilityEvaluator(std::make_shared<const TrainingOracle>(std::move(train),
                                                              std::move(validation), config),
                       kind, cache_capacity) {}

double UtilityEvaluator::utility(const Coalition& members) const {
  require(members.players() == player_count(), "coalition does not match the training set");
  if (members.empty()) return 0.0;
  return cache_.get_or_compute(members, [&] {
    const auto p = oracle_->validation_probabilities(members);
    return utility_from_probabilities(kind_, *p, oracle_->validation().labels());
  });
}

double UtilityEvaluator::evaluate(std::span<const PointId> ids) const {
  const Dataset& train = oracle_->train_data();
  Coalition members(train.size());
  for (PointId id : ids) {
    const Index pos = train.position_of(id);
    require(pos >= 0, "coalition contains unknown point id " + std::to_string(id));
    members.insert(pos);
  }
  return utility(members);
}

}  // namespace pshapley

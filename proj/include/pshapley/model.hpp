#ifndef PSHAPLEY_MODEL_HPP
#define PSHAPLEY_MODEL_HPP

#include "pshapley/dataset.hpp"
#include "pshapley/types.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdint>

namespace pshapley {

// Branches on the sign so exp() never sees a large positive argument.
template <typename Scalar>
Scalar sigmoid(Scalar z) {
  using std::exp;
  if (z < Scalar(0)) {
    const Scalar e = exp(z);
    return e / (Scalar(1) + e);
  }
  return Scalar(1) / (Scalar(1) + exp(-z));
}

// log(1 + exp(z)) without overflow.
template <typename Scalar>
Scalar softplus(Scalar z) {
  using std::exp;
  using std::log1p;
  return z > Scalar(0) ? z + log1p(exp(-z)) : log1p(exp(z));
}

struct TrainConfig {
  double learning_rate = 0.1;
  int iterations = 500;
  double l2_penalty = 1e-4;
  std::uint64_t seed = 0;  // echoed in metadata; training itself is seed-free

  void validate() const;
};

struct LogisticModel {
  Eigen::VectorXd weights;
  double bias = 0.0;
  double threshold = 0.5;

  double predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  int predict_label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const;
  // Class-1 probability for every row.
  Eigen::VectorXd predict_proba_rows(const FeatureMatrix& x) const;
  LogisticModel negated() const { return {-weights, -bias, threshold}; }
};

// Ties at exactly the threshold go to class 1.
inline int label_from_probability(double p, double threshold = 0.5) {
  return p >= threshold ? 1 : 0;
}

// Mean negative log-likelihood plus (l2/2)*|w|^2; the bias is unpenalized.
double training_loss(const Eigen::Ref<const FeatureMatrix>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& weights,
                     double bias, double l2_penalty);

// Gradient of training_loss; the last entry is the bias component.
Eigen::VectorXd training_gradient(const Eigen::Ref<const FeatureMatrix>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  const Eigen::VectorXd& weights, double bias,
                                  double l2_penalty);

// Full-batch gradient descent from zero, exactly config.iterations steps.
// The same inputs always produce a bit-identical model.
LogisticModel train(const Eigen::Ref<const FeatureMatrix>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const TrainConfig& config);
LogisticModel train(const Dataset& data, const TrainConfig& config);

// Per-iteration training loss, for diagnosing step sizes.
std::vector<double> training_loss_trace(const Dataset& data, const TrainConfig& config);

nlohmann::ordered_json to_json(const LogisticModel& model);
LogisticModel model_from_json(const nlohmann::ordered_json& j);
nlohmann::ordered_json to_json(const TrainConfig& config);

}  // namespace pshapley

#endif  // PSHAPLEY_MODEL_HPP

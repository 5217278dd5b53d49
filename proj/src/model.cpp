#include "pshapley/model.hpp"

namespace pshapley {

namespace {

Eigen::VectorXd sigmoid_of(const Eigen::VectorXd& z) {
  return z.unaryExpr([](double v) { return sigmoid(v); });
}

// One gradient step's worth of work shared by train() and the loss trace.
struct GradientDescent {
  Eigen::Ref<const FeatureMatrix> x;
  Eigen::Ref<const Eigen::VectorXd> y;
  const TrainConfig& config;
  Eigen::VectorXd w;
  double b = 0.0;
  Eigen::VectorXd z;
  Eigen::VectorXd residual;

  GradientDescent(const Eigen::Ref<const FeatureMatrix>& xs,
                  const Eigen::Ref<const Eigen::VectorXd>& ys, const TrainConfig& cfg)
      : x(xs), y(ys), config(cfg), w(Eigen::VectorXd::Zero(xs.cols())) {}

  void step() {
    const double inv_n = 1.0 / static_cast<double>(x.rows());
    z.noalias() = x * w;
    z.array() += b;
    residual = z.unaryExpr([](double v) { return sigmoid(v); }) - y;
    Eigen::VectorXd grad = inv_n * (x.transpose() * residual);
    grad += config.l2_penalty * w;
    w -= config.learning_rate * grad;
    b -= config.learning_rate * inv_n * residual.sum();
  }
};

void check_shapes(const Eigen::Ref<const FeatureMatrix>& x,
                  const Eigen::Ref<const Eigen::VectorXd>& y) {
  require(x.rows() >= 1, "cannot train on an empty coalition");
  require(y.size() == x.rows(), "label count does not match row count");
}

}  // namespace

void TrainConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be positive");
  require(iterations >= 1, "iterations must be at least 1");
  require(l2_penalty >= 0.0 && std::isfinite(l2_penalty), "l2_penalty must be nonnegative");
}

double LogisticModel::predict_proba(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  require(x.size() == weights.size(), "feature dimension does not match model");
  return sigmoid(x.dot(weights.transpose()) + bias);
}

int LogisticModel::predict_label(const Eigen::Ref<const Eigen::RowVectorXd>& x) const {
  return label_from_probability(predict_proba(x), threshold);
}

Eigen::VectorXd LogisticModel::predict_proba_rows(const FeatureMatrix& x) const {
  require(x.cols() == weights.size(), "feature dimension does not match model");
  Eigen::VectorXd z = x * weights;
  z.array() += bias;
  return sigmoid_of(z);
}

double training_loss(const Eigen::Ref<const FeatureMatrix>& x,
                     const Eigen::Ref<const Eigen::VectorXd>& y, const Eigen::VectorXd& weights,
                     double bias, double l2_penalty) {
  check_shapes(x, y);
  require(x.cols() == weights.size(), "feature dimension does not match weights");
  Eigen::VectorXd z = x * weights;
  z.array() += bias;
  double nll = 0.0;
  for (Index i = 0; i < z.size(); ++i) nll += softplus(z[i]) - y[i] * z[i];
  return nll / static_cast<double>(x.rows()) + 0.5 * l2_penalty * weights.squaredNorm();
}

Eigen::VectorXd training_gradient(const Eigen::Ref<const FeatureMatrix>& x,
                                  const Eigen::Ref<const Eigen::VectorXd>& y,
                                  const Eigen::VectorXd& weights, double bias,
                                  double l2_penalty) {
  check_shapes(x, y);
  require(x.cols() == weights.size(), "feature dimension does not match weights");
  Eigen::VectorXd z = x * weights;
  z.array() += bias;
  const Eigen::VectorXd residual = sigmoid_of(z) - y;
  const double inv_n = 1.0 / static_cast<double>(x.rows());
  Eigen::VectorXd grad(weights.size() + 1);
  grad.head(weights.size()) = inv_n * (x.transpose() * residual) + l2_penalty * weights;
  grad[weights.size()] = inv_n * residual.sum();
  return grad;
}

LogisticModel train(const Eigen::Ref<const FeatureMatrix>& x,
                    const Eigen::Ref<const Eigen::VectorXd>& y, const TrainConfig& config) {
  config.validate();
  check_shapes(x, y);
  GradientDescent gd(x, y, config);
  for (int it = 0; it < config.iterations; ++it) gd.step();
  if (!gd.w.allFinite() || !std::isfinite(gd.b)) {
    throw Error("numerical", "training diverged to a non-finite loss; lower the learning rate");
  }
  return {std::move(gd.w), gd.b, 0.5};
}

LogisticModel train(const Dataset& data, const TrainConfig& config) {
  return train(data.features(), data.labels(), config);
}

std::vector<double> training_loss_trace(const Dataset& data, const TrainConfig& config) {
  config.validate();
  GradientDescent gd(data.features(), data.labels(), config);
  std::vector<double> trace;
  trace.reserve(static_cast<std::size_t>(config.iterations) + 1);
  trace.push_back(training_loss(data.features(), data.labels(), gd.w, gd.b, config.l2_penalty));
  for (int it = 0; it < config.iterations; ++it) {
    gd.step();
    trace.push_back(training_loss(data.features(), data.labels(), gd.w, gd.b, config.l2_penalty));
  }
  return trace;
}

nlohmann::ordered_json to_json(const LogisticModel& model) {
  return {{"weights", std::vector<double>(model.weights.data(),
                                          model.weights.data() + model.weights.size())},
          {"bias", model.bias},
          {"threshold", model.threshold}};
}

LogisticModel model_from_json(const nlohmann::ordered_json& j) {
  const auto w = j.at("weights").get<std::vector<double>>();
  LogisticModel model;
  model.weights = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Index>(w.size()));
  model.bias = j.at("bias").get<double>();
  model.threshold = j.value("threshold", 0.5);
  require(model.threshold > 0.0 && model.threshold < 1.0, "threshold must lie in (0, 1)");
  return model;
}

nlohmann::ordered_json to_json(const TrainConfig& config) {
  return {{"learning_rate", config.learning_rate},
          {"iterations", config.iterations},
          {"l2_penalty", config.l2_penalty},
          {"seed", config.seed}};
}

}  // namespace pshapley

#ifndef PSHAPLEY_TESTS_FIXTURES_HPP
#define PSHAPLEY_TESTS_FIXTURES_HPP

#include "pshapley/dataset.hpp"
#include "pshapley/model.hpp"

namespace fixtures {

// 20 synthetic points split into 8 training players and 12 validation points.
inline pshapley::DataSplit small_split(std::uint64_t seed = 3) {
  pshapley::SyntheticSpec spec;
  spec.n_per_class = 10;
  spec.dim = 2;
  spec.class_separation = 1.5;
  spec.noise_fraction = 0.1;
  spec.seed = seed;
  const auto data = pshapley::generate_synthetic(spec).data;
  return pshapley::split_train_valid(data, 0.6, seed);
}

inline pshapley::TrainConfig small_config() {
  pshapley::TrainConfig config;
  config.learning_rate = 0.1;
  config.iterations = 200;
  config.l2_penalty = 1e-4;
  return config;
}

}  // namespace fixtures

#endif  // PSHAPLEY_TESTS_FIXTURES_HPP

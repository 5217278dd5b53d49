#ifndef PSHAPLEY_DATASET_HPP
#define PSHAPLEY_DATASET_HPP

#include "pshapley/types.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pshapley {

// Labeled binary-classification data. Rows are players; point ids are the
// row indices assigned at load time and survive every later subset/split.
class Dataset {
 public:
  Dataset() = default;
  // Validates finiteness, binary labels, and id uniqueness.
  Dataset(FeatureMatrix features, LabelVector labels, std::vector<PointId> ids,
          std::vector<std::string> feature_names = {});
  // Ids default to 0..n-1.
  Dataset(FeatureMatrix features, LabelVector labels);

  Index size() const { return features_.rows(); }
  Index dim() const { return features_.cols(); }
  bool empty() const { return size() == 0; }

  const FeatureMatrix& features() const { return features_; }
  const LabelVector& labels() const { return labels_; }
  const std::vector<PointId>& ids() const { return ids_; }
  const std::vector<std::string>& feature_names() const { return feature_names_; }

  auto row(Index i) const { return features_.row(i); }
  int label(Index i) const { return labels_[i] > 0.5 ? 1 : 0; }
  PointId id(Index i) const { return ids_[static_cast<std::size_t>(i)]; }

  // Position of a point id, or -1.
  Index position_of(PointId id) const;

  // Rows at the given positions, in the given order; ids are carried over.
  Dataset select(std::span<const Index> positions) const;

  Index count_label(int label) const;

 private:
  FeatureMatrix features_;
  LabelVector labels_;
  std::vector<PointId> ids_;
  std::vector<std::string> feature_names_;
};

struct DataSplit {
  Dataset train;
  Dataset validation;
};

// Header row required; every column except `label_column` must be numeric.
Dataset load_csv(const std::filesystem::path& path, const std::string& label_column = "label");

// Writes features with 17 significant digits so load_csv reproduces them exactly.
void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_column = "label");

// Deterministic shuffle under `seed`. The validation size is
// round(valid_fraction * n) clamped to [1, n-1]. When `stratify` is set,
// each class is split separately so both sides see both classes.
DataSplit split_train_valid(const Dataset& data, double valid_fraction, std::uint64_t seed,
                            bool stratify = true);

// Z-scores every column using train-split statistics only; constant columns
// are centered but left unscaled.
DataSplit standardize(const DataSplit& split);

struct SyntheticSpec {
  Index n_per_class = 100;
  Index dim = 2;
  double class_separation = 2.0;
  double noise_fraction = 0.0;
  std::uint64_t seed = 0;
};

struct SyntheticData {
  Dataset data;
  std::vector<PointId> flipped_ids;  // ascending
};

// Two unit-variance Gaussian clusters centered at -+separation/2 on the first
// axis. Class 0 occupies rows [0, n_per_class), class 1 the rest.
// round(noise_fraction * n) labels, chosen under `seed`, are flipped.
SyntheticData generate_synthetic(const SyntheticSpec& spec);

// FNV-1a over the ids of both sides; identifies a split in run metadata.
std::string split_fingerprint(const DataSplit& split);

}  // namespace pshapley

#endif  // PSHAPLEY_DATASET_HPP

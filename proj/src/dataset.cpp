#include "pshapley/dataset.hpp"

#include "pshapley/random.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

namespace pshapley {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream stream(line);
  while (std::getline(stream, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.emplace_back();
  return fields;
}

std::string trim(std::string s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

bool parse_double(const std::string& text, double& out) {
  if (text.empty()) return false;
  const char* begin = text.data();
  const char* end = begin + text.size();
  if (*begin == '+') ++begin;
  const auto result = std::from_chars(begin, end, out);
  return result.ec == std::errc() && result.ptr == end;
}

std::string format_double(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

std::vector<PointId> sequential_ids(Index n) {
  std::vector<PointId> ids(static_cast<std::size_t>(n));
  std::iota(ids.begin(), ids.end(), PointId{0});
  return ids;
}

std::vector<std::string> default_names(Index d) {
  std::vector<std::string> names;
  for (Index j = 0; j < d; ++j) names.push_back("f" + std::to_string(j));
  return names;
}

}  // namespace

Dataset::Dataset(FeatureMatrix features, LabelVector labels, std::vector<PointId> ids,
                 std::vector<std::string> feature_names)
    : features_(std::move(features)),
      labels_(std::move(labels)),
      ids_(std::move(ids)),
      feature_names_(std::move(feature_names)) {
  require(features_.rows() >= 1, "dataset must contain at least one point");
  require(features_.cols() >= 1, "dataset must have at least one feature");
  require(labels_.size() == features_.rows(), "label count does not match row count");
  require(static_cast<Index>(ids_.size()) == features_.rows(),
          "point id count does not match row count");
  require(features_.allFinite(), "features must be finite");
  for (Index i = 0; i < labels_.size(); ++i) {
    require(labels_[i] == 0.0 || labels_[i] == 1.0,
            "label at row " + std::to_string(i) + " is not 0 or 1");
  }
  std::unordered_set<PointId> seen(ids_.begin(), ids_.end());
  require(seen.size() == ids_.size(), "point ids must be unique");
  if (feature_names_.empty()) feature_names_ = default_names(features_.cols());
  require(static_cast<Index>(feature_names_.size()) == features_.cols(),
          "feature name count does not match column count");
}

Dataset::Dataset(FeatureMatrix features, LabelVector labels)
    : Dataset(features, labels, sequential_ids(labels.size())) {}

Index Dataset::position_of(PointId id) const {
  const auto it = std::find(ids_.begin(), ids_.end(), id);
  return it == ids_.end() ? -1 : static_cast<Index>(it - ids_.begin());
}

Dataset Dataset::select(std::span<const Index> positions) const {
  const auto k = static_cast<Index>(positions.size());
  FeatureMatrix x(k, dim());
  LabelVector y(k);
  std::vector<PointId> ids(positions.size());
  for (Index r = 0; r < k; ++r) {
    const Index p = positions[static_cast<std::size_t>(r)];
    require(p >= 0 && p < size(), "row position out of range");
    x.row(r) = features_.row(p);
    y[r] = labels_[p];
    ids[static_cast<std::size_t>(r)] = ids_[static_cast<std::size_t>(p)];
  }
  return Dataset(std::move(x), std::move(y), std::move(ids), feature_names_);
}

Index Dataset::count_label(int label) const {
  return (labels_.array() == static_cast<double>(label)).count();
}

Dataset load_csv(const std::filesystem::path& path, const std::string& label_column) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open data file: " + path.string());

  std::string line;
  if (!std::getline(in, line) || trim(line).empty()) {
    throw Error("parse", "data file is empty: " + path.string());
  }
  if (line.rfind("\xEF\xBB\xBF", 0) == 0) line.erase(0, 3);
  std::vector<std::string> header = split_fields(line);
  for (auto& h : header) h = trim(h);

  const auto label_it = std::find(header.begin(), header.end(), label_column);
  if (label_it == header.end()) {
    throw Error("parse", "label column '" + label_column + "' not found in header");
  }
  const auto label_col = static_cast<std::size_t>(label_it - header.begin());
  std::vector<std::string> names;
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (c != label_col) names.push_back(header[c]);
  }

  std::vector<double> values;
  std::vector<double> labels;
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      throw Error("parse", "row " + std::to_string(row) + " has " +
                               std::to_string(fields.size()) + " fields, expected " +
                               std::to_string(header.size()));
    }
    for (std::size_t c = 0; c < fields.size(); ++c) {
      const std::string cell = trim(fields[c]);
      double v = 0.0;
      const bool ok = parse_double(cell, v);
      if (c == label_col) {
        if (!ok || (v != 0.0 && v != 1.0)) {
          throw Error("parse", "row " + std::to_string(row) + ": label '" + cell +
                                   "' is not 0 or 1");
        }
        labels.push_back(v);
      } else {
        if (!ok || !std::isfinite(v)) {
          throw Error("parse", "row " + std::to_string(row) + ", column '" + header[c] +
                                   "': non-numeric value '" + cell + "'");
        }
        values.push_back(v);
      }
    }
    ++row;
  }
  if (row == 0) throw Error("parse", "data file has a header but no rows: " + path.string());
  if (names.empty()) throw Error("parse", "data file has no feature columns");

  const auto n = static_cast<Index>(row);
  const auto d = static_cast<Index>(names.size());
  FeatureMatrix x = Eigen::Map<FeatureMatrix>(values.data(), n, d);
  LabelVector y = Eigen::Map<LabelVector>(labels.data(), n);
  return Dataset(std::move(x), std::move(y), sequential_ids(n), std::move(names));
}

void save_csv(const Dataset& data, const std::filesystem::path& path,
              const std::string& label_column) {
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write data file: " + path.string());
  for (const auto& name : data.feature_names()) out << name << ',';
  out << label_column << '\n';
  for (Index i = 0; i < data.size(); ++i) {
    for (Index j = 0; j < data.dim(); ++j) out << format_double(data.features()(i, j)) << ',';
    out << data.label(i) << '\n';
  }
}

DataSplit split_train_valid(const Dataset& data, double valid_fraction, std::uint64_t seed,
                            bool stratify) {
  const Index n = data.size();
  require(n >= 2, "cannot split fewer than 2 points");
  require(valid_fraction > 0.0 && valid_fraction < 1.0, "valid_fraction must lie in (0, 1)");
  const Index target =
      std::clamp<Index>(static_cast<Index>(std::llround(valid_fraction * double(n))), 1, n - 1);

  Rng rng(child_seed(seed, 0x5711));
  std::vector<Index> valid_pos;
  std::vector<Index> train_pos;

  if (stratify) {
    std::vector<Index> by_class[2];
    for (Index i = 0; i < n; ++i) by_class[data.label(i)].push_back(i);
    for (int c = 0; c < 2; ++c) {
      require(!by_class[c].empty(),
              "class " + std::to_string(c) + " is absent; stratified split impossible");
      require(by_class[c].size() >= 2, "class " + std::to_string(c) +
                                           " has a single point; cannot place it in both splits");
    }
    // Class 1 gets its proportional share; class 0 gets the remainder.
    const auto n1 = static_cast<Index>(by_class[1].size());
    const auto n0 = static_cast<Index>(by_class[0].size());
    const Index k1 = std::clamp<Index>(
        static_cast<Index>(std::llround(double(target) * double(n1) / double(n))), 1, n1 - 1);
    const Index k0 = std::clamp<Index>(target - k1, 1, n0 - 1);
    const Index take[2] = {k0, k1};
    for (int c = 0; c < 2; ++c) {
      rng.shuffle(std::span<Index>(by_class[c]));
      const auto k = static_cast<std::size_t>(take[c]);
      valid_pos.insert(valid_pos.end(), by_class[c].begin(), by_class[c].begin() + k);
      train_pos.insert(train_pos.end(), by_class[c].begin() + k, by_class[c].end());
    }
  } else {
    std::vector<Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), Index{0});
    rng.shuffle(std::span<Index>(order));
    valid_pos.assign(order.begin(), order.begin() + target);
    train_pos.assign(order.begin() + target, order.end());
  }
  // Positional order keeps ids ascending on both sides.
  std::sort(valid_pos.begin(), valid_pos.end());
  std::sort(train_pos.begin(), train_pos.end());
  return {data.select(train_pos), data.select(valid_pos)};
}

DataSplit standardize(const DataSplit& split) {
  const FeatureMatrix& x = split.train.features();
  const Eigen::RowVectorXd mean = x.colwise().mean();
  Eigen::RowVectorXd scale(x.cols());
  for (Index j = 0; j < x.cols(); ++j) {
    const double var = (x.col(j).array() - mean[j]).square().mean();
    scale[j] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  auto apply = [&](const Dataset& d) {
    FeatureMatrix z = (d.features().rowwise() - mean).array().rowwise() / scale.array();
    return Dataset(std::move(z), d.labels(), d.ids(), d.feature_names());
  };
  return {apply(split.train), apply(split.validation)};
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  require(spec.n_per_class >= 1, "n_per_class must be at least 1");
  require(spec.dim >= 1, "dimension must be at least 1");
  require(spec.class_separation >= 0.0, "class separation must be nonnegative");
  require(spec.noise_fraction >= 0.0 && spec.noise_fraction <= 1.0,
          "noise fraction must lie in [0, 1]");

  const Index n = 2 * spec.n_per_class;
  FeatureMatrix x(n, spec.dim);
  LabelVector y(n);
  Rng features_rng(child_seed(spec.seed, 0xfea7));
  for (Index i = 0; i < n; ++i) {
    const int cls = i < spec.n_per_class ? 0 : 1;
    y[i] = cls;
    for (Index j = 0; j < spec.dim; ++j) x(i, j) = features_rng.normal();
    x(i, 0) += (cls == 1 ? 0.5 : -0.5) * spec.class_separation;
  }

  const auto flips = static_cast<std::size_t>(std::llround(spec.noise_fraction * double(n)));
  std::vector<PointId> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), PointId{0});
  Rng noise_rng(child_seed(spec.seed, 0xf11b));
  noise_rng.shuffle(std::span<PointId>(order));
  std::vector<PointId> flipped(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(flips));
  std::sort(flipped.begin(), flipped.end());
  for (PointId id : flipped) y[id] = 1.0 - y[id];

  return {Dataset(std::move(x), std::move(y)), std::move(flipped)};
}

std::string split_fingerprint(const DataSplit& split) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](std::uint64_t v) {
    for (int b = 0; b < 8; ++b) {
      h ^= (v >> (8 * b)) & 0xff;
      h *= 0x100000001b3ULL;
    }
  };
  for (PointId id : split.train.ids()) feed(static_cast<std::uint64_t>(id));
  feed(~0ULL);
  for (PointId id : split.validation.ids()) feed(static_cast<std::uint64_t>(id));
  char buffer[17];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(h));
  return buffer;
}

}  // namespace pshapley

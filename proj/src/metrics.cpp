#include "pshapley/metrics.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace pshapley {

double brier_score(const LogisticModel& model, const Dataset& validation) {
  return brier_score(model.predict_proba_rows(validation.features()), validation.labels());
}

double cross_entropy(const LogisticModel& model, const Dataset& validation) {
  return cross_entropy(model.predict_proba_rows(validation.features()), validation.labels());
}

void RemovalCurve::validate() const {
  require(rounds.size() == removal_order.size() + 1,
          "removal curve needs exactly one more round than removals");
  std::unordered_set<PointId> seen(removal_order.begin(), removal_order.end());
  require(seen.size() == removal_order.size(), "removal order repeats a point id");
}

std::vector<double> RemovalCurve::accuracies() const {
  std::vector<double> out;
  for (const auto& r : rounds) out.push_back(r.accuracy);
  return out;
}

std::vector<double> RemovalCurve::briers() const {
  std::vector<double> out;
  for (const auto& r : rounds) out.push_back(r.brier);
  return out;
}

std::vector<double> RemovalCurve::cross_entropies() const {
  std::vector<double> out;
  for (const auto& r : rounds) out.push_back(r.cross_entropy);
  return out;
}

double weighted_drop(std::span<const double> scores) {
  require(scores.size() >= 2, "weighted drop needs at least 2 rounds");
  double total = 0.0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    double inner = 0.0;
    for (std::size_t i = 1; i <= j; ++i) inner += scores[i - 1] - scores[i];
    total += inner / static_cast<double>(j);
  }
  return total;
}

double weighted_drop_telescoped(std::span<const double> scores) {
  require(scores.size() >= 2, "weighted drop needs at least 2 rounds");
  double total = 0.0;
  for (std::size_t j = 1; j < scores.size(); ++j) {
    total += (scores[0] - scores[j]) / static_cast<double>(j);
  }
  return total;
}

double wad(const RemovalCurve& curve) { return weighted_drop(curve.accuracies()); }
double wbd(const RemovalCurve& curve) { return -weighted_drop(curve.briers()); }
double wcd(const RemovalCurve& curve) { return -weighted_drop(curve.cross_entropies()); }

MetricSummary summarize(const RemovalCurve& curve) {
  return {wad(curve), wbd(curve), wcd(curve)};
}

nlohmann::ordered_json to_json(const MetricSummary& summary) {
  return {{"wad", summary.wad}, {"wbd", summary.wbd}, {"wcd", summary.wcd}};
}

std::string format_real(double value) {
  char buffer[64];
  const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
  return std::string(buffer, result.ptr);
}

void write_curve_csv(const RemovalCurve& curve, const std::filesystem::path& path) {
  curve.validate();
  std::ofstream out(path);
  if (!out) throw Error("io", "cannot write curve file: " + path.string());
  out << "round,removed_id,accuracy,brier,cross_entropy\n";
  for (std::size_t r = 0; r < curve.rounds.size(); ++r) {
    out << r << ',';
    if (r > 0) out << curve.removal_order[r - 1];
    const auto& m = curve.rounds[r];
    out << ',' << format_real(m.accuracy) << ',' << format_real(m.brier) << ','
        << format_real(m.cross_entropy) << '\n';
  }
}

RemovalCurve read_curve_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open curve file: " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("parse", "curve file is empty: " + path.string());
  RemovalCurve curve;
  std::size_t expected = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::string field;
    std::istringstream stream(line);
    while (std::getline(stream, field, ',')) fields.push_back(field);
    if (fields.size() != 5) throw Error("parse", "malformed curve row: " + line);
    try {
      if (std::stoull(fields[0]) != expected) throw Error("parse", "curve rounds out of order");
      if (expected > 0) curve.removal_order.push_back(std::stoll(fields[1]));
      curve.rounds.push_back({std::stod(fields[2]), std::stod(fields[3]), std::stod(fields[4])});
    } catch (const std::logic_error&) {
      throw Error("parse", "malformed curve row: " + line);
    }
    ++expected;
  }
  curve.validate();
  return curve;
}

}  // namespace pshapley

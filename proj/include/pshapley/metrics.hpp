#ifndef PSHAPLEY_METRICS_HPP
#define PSHAPLEY_METRICS_HPP

#include "pshapley/dataset.hpp"
#include "pshapley/model.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace pshapley {

inline constexpr double kProbabilityClamp = 1e-12;

// (1/|V|) sum_i (y_i (p_i - y_i) + (1 - y_i) p_i)^2, i.e. mean (p_i - y_i)^2
// for binary labels.
template <typename ProbDerived, typename LabelDerived>
typename ProbDerived::Scalar brier_score(const Eigen::MatrixBase<ProbDerived>& p,
                                         const Eigen::MatrixBase<LabelDerived>& y) {
  using Scalar = typename ProbDerived::Scalar;
  require(y.size() >= 1, "validation set is empty");
  require(p.size() == y.size(), "probability count does not match labels");
  const auto one = Scalar(1);
  const auto term =
      (y.array() * (p.array() - y.array()) + (one - y.array()) * p.array()).square();
  return term.sum() / Scalar(y.size());
}

// -sum_i (y_i ln p_i + (1 - y_i) ln(1 - p_i)), a sum rather than a mean, with
// p clamped to [1e-12, 1 - 1e-12].
template <typename ProbDerived, typename LabelDerived>
typename ProbDerived::Scalar cross_entropy(const Eigen::MatrixBase<ProbDerived>& p,
                                           const Eigen::MatrixBase<LabelDerived>& y) {
  using Scalar = typename ProbDerived::Scalar;
  require(y.size() >= 1, "validation set is empty");
  require(p.size() == y.size(), "probability count does not match labels");
  Scalar total(0);
  for (Index i = 0; i < y.size(); ++i) {
    const Scalar q = std::clamp(Scalar(p(i)), Scalar(kProbabilityClamp),
                                Scalar(1) - Scalar(kProbabilityClamp));
    total -= y(i) * std::log(q) + (Scalar(1) - y(i)) * std::log(Scalar(1) - q);
  }
  return total;
}

double brier_score(const LogisticModel& model, const Dataset& validation);
double cross_entropy(const LogisticModel& model, const Dataset& validation);

struct RoundMetrics {
  double accuracy = 0.0;
  double brier = 0.0;
  double cross_entropy = 0.0;
};

// rounds[i] scores the model trained after removing removal_order[0..i).
struct RemovalCurve {
  std::vector<RoundMetrics> rounds;
  std::vector<PointId> removal_order;
  std::string split_fingerprint;

  void validate() const;
  std::vector<double> accuracies() const;
  std::vector<double> briers() const;
  std::vector<double> cross_entropies() const;
};

// sum_{j=1}^{n} (1/j) sum_{i=1}^{j} (s_{i-1} - s_i) over a score sequence s_0..s_n.
double weighted_drop(std::span<const double> scores);
// The same quantity as sum_j (s_0 - s_j) / j.
double weighted_drop_telescoped(std::span<const double> scores);

double wad(const RemovalCurve& curve);
// Brier and cross-entropy are losses, so their drops are negated.
double wbd(const RemovalCurve& curve);
double wcd(const RemovalCurve& curve);

struct MetricSummary {
  double wad = 0.0;
  double wbd = 0.0;
  double wcd = 0.0;
};

MetricSummary summarize(const RemovalCurve& curve);
nlohmann::ordered_json to_json(const MetricSummary& summary);

// Columns: round,removed_id,accuracy,brier,cross_entropy. Round 0 has an
// empty removed_id.
void write_curve_csv(const RemovalCurve& curve, const std::filesystem::path& path);
RemovalCurve read_curve_csv(const std::filesystem::path& path);

// Shortest decimal form that parses back to the same double.
std::string format_real(double value);

}  // namespace pshapley

#endif  // PSHAPLEY_METRICS_HPP

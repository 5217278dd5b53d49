#ifndef PSHAPLEY_EXPERIMENT_HPP
#define PSHAPLEY_EXPERIMENT_HPP

#include "pshapley/dataset.hpp"
#include "pshapley/metrics.hpp"
#include "pshapley/valuation.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace pshapley {

// One requested valuation. Text forms accepted by parse():
//   tmc                     accuracy-utility TMC-Shapley
//   pshapley:<activation>   TMC P-Shapley (relu, square, mish, swish, swish@<beta>)
//   loo[:<activation>]      leave-one-out (accuracy unless an activation is given)
//   beta:<alpha>:<beta>     Monte Carlo Beta-Shapley on accuracy utility
//   exact[:<activation>]    enumeration, small training sets only
struct MethodSpec {
  enum class Family { TmcShapley, PShapley, LeaveOneOut, BetaShapley, Exact };

  Family family = Family::TmcShapley;
  UtilityKind utility = UtilityKind::accuracy();
  double alpha = 1.0;
  double beta = 16.0;

  static MethodSpec parse(const std::string& text);
  // Filesystem-safe identifier, e.g. "pshapley-square", "beta-1-16".
  std::string tag() const;
  std::string text() const;
  bool monte_carlo() const;
};

struct DataSource {
  std::optional<std::filesystem::path> csv;
  std::string label_column = "label";
  std::optional<SyntheticSpec> synthetic;
};

struct RunConfig {
  DataSource data;
  double valid_fraction = 0.2;
  std::uint64_t seed = 0;  // split and permutation master seed
  bool standardize = false;
  // Synthetic sources: undo label flips on points that land in the
  // validation split, so only training labels are corrupted.
  bool clean_validation = false;
  TrainConfig train;
  std::vector<MethodSpec> methods;
  Index permutations = 500;
  double epsilon = 0.001;
  std::optional<Index> removal_count;
  std::filesystem::path out_dir;
  std::size_t threads = 0;
  std::size_t cache_capacity = TrainingOracle::kDefaultCapacity;

  void validate() const;
};

nlohmann::ordered_json to_json(const RunConfig& config);
RunConfig run_config_from_json(const nlohmann::ordered_json& j);

// Loaded, split, and optionally standardized data for one run.
struct PreparedRun {
  DataSplit split;
  std::string fingerprint;
  std::vector<PointId> flipped_ids;  // synthetic sources only
};

// Also checks removal_count against the training-set size.
PreparedRun prepare(const RunConfig& config);

// Values every method on one split. All methods share one training oracle, and
// Monte Carlo methods share the permutation stream of the master seed, so
// methods with the same utility truncate in the same permutation iteration.
class ValuationSuite {
 public:
  ValuationSuite(const RunConfig& config, const PreparedRun& prepared);

  ValuationResult run(const MethodSpec& method);
  const TrainingOracle& oracle() const { return *oracle_; }

 private:
  std::shared_ptr<const UtilityEvaluator> evaluator(const UtilityKind& kind);
  const PermutationScans& scans(const UtilityKind& kind);
  nlohmann::ordered_json metadata(const MethodSpec& method) const;

  RunConfig config_;
  std::string fingerprint_;
  std::shared_ptr<const TrainingOracle> oracle_;
  std::map<std::string, std::shared_ptr<const UtilityEvaluator>> evaluators_;
  std::map<std::string, PermutationScans> scans_;
};

// Results in config.methods order. Nothing is written when out_dir is empty.
std::vector<ValuationResult> run_valuation_suite(const RunConfig& config);
std::vector<ValuationResult> run_valuation_suite(const RunConfig& config,
                                                 const PreparedRun& prepared);

// Removes points in descending value order (ties by ascending id), retraining
// from scratch after each removal and scoring on the fixed validation set.
RemovalCurve run_removal_experiment(const TrainingOracle& oracle, const ValuationResult& values,
                                    Index removal_count, std::size_t threads = 0);
RemovalCurve run_removal_experiment(const RunConfig& config, const PreparedRun& prepared,
                                    const ValuationResult& values);

struct ReportRow {
  std::string method;
  MetricSummary metrics;
  bool max_wad = false;
  bool max_wbd = false;
  bool max_wcd = false;
};

struct Report {
  std::vector<ReportRow> rows;
  std::string split_fingerprint;
};

// Rows follow the map's key order; every column maximum is marked.
Report build_report(const std::map<std::string, RemovalCurve>& curves);

// Writes curves/<method>.csv, summary.csv and summary.json under out_dir.
Report emit_report(const std::map<std::string, RemovalCurve>& curves,
                   const std::filesystem::path& out_dir);

// Run directory layout.
namespace layout {
std::filesystem::path config(const std::filesystem::path& out);
std::filesystem::path values(const std::filesystem::path& out, const std::string& tag);
std::filesystem::path curve(const std::filesystem::path& out, const std::string& tag);
std::filesystem::path summary_csv(const std::filesystem::path& out);
std::filesystem::path summary_json(const std::filesystem::path& out);
}  // namespace layout

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);
nlohmann::ordered_json read_json(const std::filesystem::path& path);

// CLI stages. Each returns normally or throws Error.
void stage_value(const RunConfig& config);
void stage_remove(const std::filesystem::path& out_dir, std::optional<Index> removal_count,
                  std::size_t threads);
void stage_report(const std::filesystem::path& out_dir);
void stage_all(const RunConfig& config);

}  // namespace pshapley

#endif  // PSHAPLEY_EXPERIMENT_HPP

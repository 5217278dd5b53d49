#include "pshapley/experiment.hpp"

#include "pshapley/parallel.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_set>

namespace pshapley {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split_on(const std::string& text, char sep) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream stream(text);
  while (std::getline(stream, part, sep)) parts.push_back(part);
  if (!text.empty() && text.back() == sep) parts.emplace_back();
  return parts;
}

double parse_positive(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::logic_error&) {
    used = 0;
  }
  require(used == text.size() && v > 0.0, what + " must be a positive number, got '" + text + "'");
  return v;
}

std::string short_real(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

std::string activation_tag(const Activation& af) {
  std::string name = af.name();
  if (const auto at = name.find('@'); at != std::string::npos) name.replace(at, 1, "-b");
  return name;
}

nlohmann::ordered_json synthetic_to_json(const SyntheticSpec& s) {
  return {{"n_per_class", s.n_per_class},
          {"dim", s.dim},
          {"class_separation", s.class_separation},
          {"noise_fraction", s.noise_fraction},
          {"seed", s.seed}};
}

SyntheticSpec synthetic_from_json(const nlohmann::ordered_json& j) {
  SyntheticSpec s;
  s.n_per_class = j.at("n_per_class").get<Index>();
  s.dim = j.at("dim").get<Index>();
  s.class_separation = j.at("class_separation").get<double>();
  s.noise_fraction = j.at("noise_fraction").get<double>();
  s.seed = j.at("seed").get<std::uint64_t>();
  return s;
}

MonteCarloOptions mc_options(const RunConfig& config) {
  return {config.permutations, config.epsilon, config.seed, config.threads};
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error("io", "cannot create directory " + dir.string() + ": " + ec.message());
}

nlohmann::ordered_json run_echo(const RunConfig& config, const PreparedRun& prepared) {
  nlohmann::ordered_json echo = to_json(config);
  echo["split_fingerprint"] = prepared.fingerprint;
  echo["train_size"] = prepared.split.train.size();
  echo["validation_size"] = prepared.split.validation.size();
  echo["synthetic_flipped_ids"] = prepared.flipped_ids;
  return echo;
}

void write_text(const std::string& text, const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("io", "cannot write " + path.string());
  out << text;
}

}  // namespace

MethodSpec MethodSpec::parse(const std::string& text) {
  const auto parts = split_on(text, ':');
  require(!parts.empty(), "empty method specification");
  MethodSpec spec;
  const std::string& head = parts[0];
  if (head == "tmc") {
    require(parts.size() == 1, "tmc takes no arguments: '" + text + "'");
    spec.family = Family::TmcShapley;
  } else if (head == "pshapley") {
    require(parts.size() == 2, "pshapley needs an activation, e.g. pshapley:square");
    spec.family = Family::PShapley;
    spec.utility = UtilityKind::probability(Activation::parse(parts[1]));
  } else if (head == "loo" || head == "exact") {
    require(parts.size() <= 2, "malformed method '" + text + "'");
    spec.family = head == "loo" ? Family::LeaveOneOut : Family::Exact;
    if (parts.size() == 2) spec.utility = UtilityKind::probability(Activation::parse(parts[1]));
  } else if (head == "beta") {
    require(parts.size() == 1 || parts.size() == 3, "beta expects beta:<alpha>:<beta>");
    spec.family = Family::BetaShapley;
    if (parts.size() == 3) {
      spec.alpha = parse_positive(parts[1], "beta-shapley alpha");
      spec.beta = parse_positive(parts[2], "beta-shapley beta");
    }
  } else {
    throw Error("invalid_argument", "unknown method '" + text + "'");
  }
  return spec;
}

std::string MethodSpec::tag() const {
  const bool probability = utility.kind == UtilityKind::Kind::Probability;
  switch (family) {
    case Family::TmcShapley:
      return "tmc";
    case Family::PShapley:
      return "pshapley-" + activation_tag(utility.activation);
    case Family::LeaveOneOut:
      return probability ? "loo-" + activation_tag(utility.activation) : "loo";
    case Family::BetaShapley:
      return "beta-" + short_real(alpha) + "-" + short_real(beta);
    case Family::Exact:
      return probability ? "exact-" + activation_tag(utility.activation) : "exact";
  }
  return "unknown";
}

std::string MethodSpec::text() const {
  const bool probability = utility.kind == UtilityKind::Kind::Probability;
  switch (family) {
    case Family::TmcShapley:
      return "tmc";
    case Family::PShapley:
      return "pshapley:" + utility.activation.name();
    case Family::LeaveOneOut:
      return probability ? "loo:" + utility.activation.name() : "loo";
    case Family::BetaShapley:
      return "beta:" + short_real(alpha) + ":" + short_real(beta);
    case Family::Exact:
      return probability ? "exact:" + utility.activation.name() : "exact";
  }
  return "unknown";
}

bool MethodSpec::monte_carlo() const {
  return family == Family::TmcShapley || family == Family::PShapley ||
         family == Family::BetaShapley;
}

void RunConfig::validate() const {
  require(data.csv.has_value() != data.synthetic.has_value(),
          "exactly one of a CSV file or a synthetic spec must be given");
  require(valid_fraction > 0.0 && valid_fraction < 1.0, "valid_fraction must lie in (0, 1)");
  train.validate();
  require(!methods.empty(), "at least one valuation method is required");
  require(permutations >= 1, "permutations must be at least 1");
  require(epsilon >= 0.0, "epsilon must be nonnegative");
  if (removal_count) require(*removal_count >= 1, "removal_count must be at least 1");
  std::unordered_set<std::string> tags;
  for (const auto& m : methods) {
    require(tags.insert(m.tag()).second, "method '" + m.text() + "' requested twice");
  }
}

nlohmann::ordered_json to_json(const RunConfig& config) {
  nlohmann::ordered_json data = {
      {"csv", config.data.csv ? nlohmann::ordered_json(config.data.csv->generic_string())
                              : nlohmann::ordered_json(nullptr)},
      {"label_column", config.data.label_column},
      {"synthetic", config.data.synthetic ? synthetic_to_json(*config.data.synthetic)
                                          : nlohmann::ordered_json(nullptr)}};
  nlohmann::ordered_json methods = nlohmann::ordered_json::array();
  for (const auto& m : config.methods) methods.push_back(m.text());
  return {{"data", data},
          {"valid_fraction", config.valid_fraction},
          {"seed", config.seed},
          {"standardize", config.standardize},
          {"clean_validation", config.clean_validation},
          {"train", to_json(config.train)},
          {"methods", methods},
          {"permutations", config.permutations},
          {"epsilon", config.epsilon},
          {"removal_count", config.removal_count ? nlohmann::ordered_json(*config.removal_count)
                                                 : nlohmann::ordered_json(nullptr)}};
}

RunConfig run_config_from_json(const nlohmann::ordered_json& j) {
  RunConfig config;
  const auto& data = j.at("data");
  if (!data.at("csv").is_null()) config.data.csv = data.at("csv").get<std::string>();
  config.data.label_column = data.value("label_column", std::string("label"));
  if (!data.at("synthetic").is_null()) config.data.synthetic = synthetic_from_json(data.at("synthetic"));
  config.valid_fraction = j.at("valid_fraction").get<double>();
  config.seed = j.at("seed").get<std::uint64_t>();
  config.standardize = j.value("standardize", false);
  config.clean_validation = j.value("clean_validation", false);
  const auto& train = j.at("train");
  config.train.learning_rate = train.at("learning_rate").get<double>();
  config.train.iterations = train.at("iterations").get<int>();
  config.train.l2_penalty = train.at("l2_penalty").get<double>();
  config.train.seed = train.value("seed", std::uint64_t{0});
  for (const auto& m : j.at("methods")) config.methods.push_back(MethodSpec::parse(m.get<std::string>()));
  config.permutations = j.at("permutations").get<Index>();
  config.epsilon = j.at("epsilon").get<double>();
  if (j.contains("removal_count") && !j.at("removal_count").is_null()) {
    config.removal_count = j.at("removal_count").get<Index>();
  }
  config.validate();
  return config;
}

PreparedRun prepare(const RunConfig& config) {
  config.validate();
  PreparedRun prepared;
  Dataset source;
  if (config.data.csv) {
    source = load_csv(*config.data.csv, config.data.label_column);
  } else {
    SyntheticData synthetic = generate_synthetic(*config.data.synthetic);
    source = std::move(synthetic.data);
    prepared.flipped_ids = std::move(synthetic.flipped_ids);
  }
  prepared.split = split_train_valid(source, config.valid_fraction, config.seed);
  if (config.clean_validation && !prepared.flipped_ids.empty()) {
    const Dataset& v = prepared.split.validation;
    LabelVector labels = v.labels();
    for (PointId id : prepared.flipped_ids) {
      const Index pos = v.position_of(id);
      if (pos >= 0) labels[pos] = 1.0 - labels[pos];
    }
    prepared.split.validation = Dataset(v.features(), labels, v.ids(), v.feature_names());
  }
  if (config.standardize) prepared.split = standardize(prepared.split);
  prepared.fingerprint = split_fingerprint(prepared.split);
  if (config.removal_count) {
    require(*config.removal_count <= prepared.split.train.size() - 1,
            "removal_count " + std::to_string(*config.removal_count) +
                " leaves no training point (training set has " +
                std::to_string(prepared.split.train.size()) + ")");
  }
  return prepared;
}

ValuationSuite::ValuationSuite(const RunConfig& config, const PreparedRun& prepared)
    : config_(config),
      fingerprint_(prepared.fingerprint),
      oracle_(std::make_shared<const TrainingOracle>(prepared.split.train,
                                                     prepared.split.validation, config.train,
                                                     config.cache_capacity)) {}

std::shared_ptr<const UtilityEvaluator> ValuationSuite::evaluator(const UtilityKind& kind) {
  auto& slot = evaluators_[kind.name()];
  if (!slot) slot = std::make_shared<const UtilityEvaluator>(oracle_, kind);
  return slot;
}

const PermutationScans& ValuationSuite::scans(const UtilityKind& kind) {
  const auto key = kind.name();
  if (auto it = scans_.find(key); it != scans_.end()) return it->second;
  return scans_.emplace(key, scan_permutations(*evaluator(kind), mc_options(config_)))
      .first->second;
}

nlohmann::ordered_json ValuationSuite::metadata(const MethodSpec& method) const {
  nlohmann::ordered_json meta = {{"method", method.text()},
                                 {"utility", method.utility.name()},
                                 {"seed", config_.seed},
                                 {"split_fingerprint", fingerprint_},
                                 {"train", to_json(config_.train)}};
  if (method.monte_carlo()) {
    meta["permutations"] = config_.permutations;
    meta["epsilon"] = config_.epsilon;
  }
  if (method.family == MethodSpec::Family::BetaShapley) {
    meta["alpha"] = method.alpha;
    meta["beta"] = method.beta;
  }
  return meta;
}

ValuationResult ValuationSuite::run(const MethodSpec& method) {
  const auto ids = oracle_->train_data().ids();
  ValuationResult result;
  switch (method.family) {
    case MethodSpec::Family::TmcShapley:
    case MethodSpec::Family::PShapley:
      result = tmc_from_scans(scans(method.utility), ids);
      break;
    case MethodSpec::Family::BetaShapley:
      result = beta_from_scans(scans(method.utility), ids, method.alpha, method.beta);
      break;
    case MethodSpec::Family::LeaveOneOut:
      result = leave_one_out(*evaluator(method.utility), config_.threads);
      break;
    case MethodSpec::Family::Exact:
      result = exact_shapley(*evaluator(method.utility), {16, config_.threads});
      break;
  }
  result.method = method.tag();
  result.metadata = metadata(method);
  return result;
}

std::vector<ValuationResult> run_valuation_suite(const RunConfig& config,
                                                 const PreparedRun& prepared) {
  ValuationSuite suite(config, prepared);
  std::vector<ValuationResult> results;
  for (const auto& method : config.methods) results.push_back(suite.run(method));
  return results;
}

std::vector<ValuationResult> run_valuation_suite(const RunConfig& config) {
  const PreparedRun prepared = prepare(config);
  std::vector<ValuationResult> results = run_valuation_suite(config, prepared);
  if (!config.out_dir.empty()) {
    ensure_dir(config.out_dir / "values");
    write_json(run_echo(config, prepared), layout::config(config.out_dir));
    for (const auto& r : results) write_json(to_json(r), layout::values(config.out_dir, r.method));
  }
  return results;
}

RemovalCurve run_removal_experiment(const TrainingOracle& oracle, const ValuationResult& values,
                                    Index removal_count, std::size_t threads) {
  const Dataset& train = oracle.train_data();
  const Index n = train.size();
  require(removal_count >= 1 && removal_count <= n - 1,
          "removal_count must lie in [1, " + std::to_string(n - 1) + "]");
  require(static_cast<Index>(values.ids.size()) == n,
          "value map does not cover the training set");
  for (PointId id : train.ids()) {
    require(std::find(values.ids.begin(), values.ids.end(), id) != values.ids.end(),
            "value map is missing training point " + std::to_string(id));
  }

  const std::vector<PointId> ranked = rank_descending(values);
  RemovalCurve curve;
  curve.removal_order.assign(ranked.begin(), ranked.begin() + removal_count);
  curve.rounds.resize(static_cast<std::size_t>(removal_count) + 1);

  std::vector<Index> removed_positions;
  for (PointId id : curve.removal_order) removed_positions.push_back(train.position_of(id));

  const LabelVector& labels = oracle.validation().labels();
  parallel_for(curve.rounds.size(), threads, [&](std::size_t round) {
    Coalition remaining = Coalition::full(n);
    for (std::size_t k = 0; k < round; ++k) remaining.erase(removed_positions[k]);
    const auto p = oracle.validation_probabilities(remaining);
    curve.rounds[round] = {accuracy_utility(*p, labels), brier_score(*p, labels),
                           cross_entropy(*p, labels)};
  });
  return curve;
}

RemovalCurve run_removal_experiment(const RunConfig& config, const PreparedRun& prepared,
                                    const ValuationResult& values) {
  require(config.removal_count.has_value(), "removal_count is required for removal experiments");
  const TrainingOracle oracle(prepared.split.train, prepared.split.validation, config.train,
                              config.cache_capacity);
  RemovalCurve curve = run_removal_experiment(oracle, values, *config.removal_count, config.threads);
  curve.split_fingerprint = prepared.fingerprint;
  return curve;
}

Report build_report(const std::map<std::string, RemovalCurve>& curves) {
  require(!curves.empty(), "no removal curves to report");
  Report report;
  report.split_fingerprint = curves.begin()->second.split_fingerprint;
  for (const auto& [method, curve] : curves) {
    require(curve.split_fingerprint == report.split_fingerprint,
            "curve '" + method + "' was computed on a different train/validation split");
    report.rows.push_back({method, summarize(curve)});
  }
  double best_wad = report.rows.front().metrics.wad;
  double best_wbd = report.rows.front().metrics.wbd;
  double best_wcd = report.rows.front().metrics.wcd;
  for (const auto& row : report.rows) {
    best_wad = std::max(best_wad, row.metrics.wad);
    best_wbd = std::max(best_wbd, row.metrics.wbd);
    best_wcd = std::max(best_wcd, row.metrics.wcd);
  }
  for (auto& row : report.rows) {
    row.max_wad = row.metrics.wad == best_wad;
    row.max_wbd = row.metrics.wbd == best_wbd;
    row.max_wcd = row.metrics.wcd == best_wcd;
  }
  return report;
}

Report emit_report(const std::map<std::string, RemovalCurve>& curves, const fs::path& out_dir) {
  Report report = build_report(curves);
  ensure_dir(out_dir / "curves");
  for (const auto& [method, curve] : curves) write_curve_csv(curve, layout::curve(out_dir, method));

  std::ostringstream csv;
  csv << "method,wad,wbd,wcd,max_wad,max_wbd,max_wcd\n";
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  nlohmann::ordered_json best = nlohmann::ordered_json::object();
  for (const auto& row : report.rows) {
    csv << row.method << ',' << format_real(row.metrics.wad) << ','
        << format_real(row.metrics.wbd) << ',' << format_real(row.metrics.wcd) << ','
        << row.max_wad << ',' << row.max_wbd << ',' << row.max_wcd << '\n';
    nlohmann::ordered_json entry = {{"method", row.method}};
    entry.update(to_json(row.metrics));
    entry["max"] = {{"wad", row.max_wad}, {"wbd", row.max_wbd}, {"wcd", row.max_wcd}};
    rows.push_back(entry);
    for (const char* column : {"wad", "wbd", "wcd"}) {
      const bool is_max = std::string(column) == "wad"   ? row.max_wad
                          : std::string(column) == "wbd" ? row.max_wbd
                                                         : row.max_wcd;
      if (is_max) best[column].push_back(row.method);
    }
  }
  write_text(csv.str(), layout::summary_csv(out_dir));
  write_json({{"split_fingerprint", report.split_fingerprint}, {"methods", rows}, {"best", best}},
             layout::summary_json(out_dir));
  return report;
}

namespace layout {
fs::path config(const fs::path& out) { return out / "config.json"; }
fs::path values(const fs::path& out, const std::string& tag) {
  return out / "values" / (tag + ".json");
}
fs::path curve(const fs::path& out, const std::string& tag) {
  return out / "curves" / (tag + ".csv");
}
fs::path summary_csv(const fs::path& out) { return out / "summary.csv"; }
fs::path summary_json(const fs::path& out) { return out / "summary.json"; }
}  // namespace layout

void write_json(const nlohmann::ordered_json& j, const fs::path& path) {
  write_text(j.dump(2) + "\n", path);
}

nlohmann::ordered_json read_json(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("io", "cannot open " + path.string());
  try {
    return nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse", path.string() + ": " + e.what());
  }
}

void stage_value(const RunConfig& config) {
  require(!config.out_dir.empty(), "an output directory is required");
  run_valuation_suite(config);
}

void stage_remove(const fs::path& out_dir, std::optional<Index> removal_count,
                  std::size_t threads) {
  RunConfig config = run_config_from_json(read_json(layout::config(out_dir)));
  if (removal_count) config.removal_count = removal_count;
  require(config.removal_count.has_value(), "removal_count is required (--removal-count)");
  config.threads = threads;
  config.out_dir = out_dir;
  const PreparedRun prepared = prepare(config);

  std::map<std::string, RemovalCurve> curves;
  for (const auto& method : config.methods) {
    const ValuationResult values = valuation_from_json(read_json(layout::values(out_dir, method.tag())));
    require(values.metadata.value("split_fingerprint", std::string()) == prepared.fingerprint,
            "stored values for '" + method.tag() + "' belong to a different split");
    curves.emplace(method.tag(), run_removal_experiment(config, prepared, values));
  }
  ensure_dir(out_dir / "curves");
  for (const auto& [tag, curve] : curves) write_curve_csv(curve, layout::curve(out_dir, tag));
}

void stage_report(const fs::path& out_dir) {
  const RunConfig config = run_config_from_json(read_json(layout::config(out_dir)));
  std::map<std::string, RemovalCurve> curves;
  for (const auto& method : config.methods) {
    RemovalCurve curve = read_curve_csv(layout::curve(out_dir, method.tag()));
    const auto values = read_json(layout::values(out_dir, method.tag()));
    curve.split_fingerprint =
        values.at("metadata").value("split_fingerprint", std::string());
    curves.emplace(method.tag(), std::move(curve));
  }
  emit_report(curves, out_dir);
}

void stage_all(const RunConfig& config) {
  require(!config.out_dir.empty(), "an output directory is required");
  require(config.removal_count.has_value(), "removal_count is required (--removal-count)");
  const PreparedRun prepared = prepare(config);
  ValuationSuite suite(config, prepared);
  std::vector<ValuationResult> results;
  for (const auto& method : config.methods) results.push_back(suite.run(method));
  std::map<std::string, RemovalCurve> curves;
  for (const auto& r : results) {
    RemovalCurve curve =
        run_removal_experiment(suite.oracle(), r, *config.removal_count, config.threads);
    curve.split_fingerprint = prepared.fingerprint;
    curves.emplace(r.method, std::move(curve));
  }
  ensure_dir(config.out_dir / "values");
  write_json(run_echo(config, prepared), layout::config(config.out_dir));
  for (const auto& r : results) write_json(to_json(r), layout::values(config.out_dir, r.method));
  emit_report(curves, config.out_dir);
}

}  // namespace pshapley

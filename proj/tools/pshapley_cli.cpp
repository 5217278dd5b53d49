// Command-line driver: value, remove, report, all.

#include "pshapley/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <sstream>

namespace {

using pshapley::Error;
using pshapley::RunConfig;

void print_error(const std::string& code, const std::string& message) {
  const nlohmann::ordered_json j = {{"error", {{"code", code}, {"message", message}}}};
  std::cerr << j.dump() << '\n';
}

// N:D:SEPARATION:NOISE[:SEED]
pshapley::SyntheticSpec parse_synthetic(const std::string& text) {
  std::vector<std::string> parts;
  std::string part;
  std::istringstream stream(text);
  while (std::getline(stream, part, ':')) parts.push_back(part);
  pshapley::require(parts.size() == 4 || parts.size() == 5,
                    "--synthetic expects N_PER_CLASS:DIM:SEPARATION:NOISE[:SEED]");
  pshapley::SyntheticSpec spec;
  try {
    spec.n_per_class = std::stoll(parts[0]);
    spec.dim = std::stoll(parts[1]);
    spec.class_separation = std::stod(parts[2]);
    spec.noise_fraction = std::stod(parts[3]);
    if (parts.size() == 5) spec.seed = std::stoull(parts[4]);
  } catch (const std::logic_error&) {
    throw Error("invalid_argument", "malformed --synthetic value '" + text + "'");
  }
  return spec;
}

struct RunOptions {
  std::string data;
  std::string label_column = "label";
  std::string synthetic;
  std::vector<std::string> methods;
  long long removal_count = 0;
  RunConfig config;
};

void add_run_options(CLI::App* cmd, RunOptions& o) {
  auto* data = cmd->add_option("--data", o.data, "CSV file with a header row");
  auto* synth = cmd->add_option("--synthetic", o.synthetic,
                                "Synthetic data N_PER_CLASS:DIM:SEPARATION:NOISE[:SEED]");
  data->excludes(synth);
  cmd->add_option("--label-column", o.label_column, "Label column name")->capture_default_str();
  cmd->add_option("--valid-fraction", o.config.valid_fraction, "Validation share")
      ->capture_default_str();
  cmd->add_option("--seed", o.config.seed, "Split and permutation master seed")
      ->capture_default_str();
  cmd->add_option("--method", o.methods,
                  "Method, repeatable: tmc, pshapley:<af>, loo[:<af>], beta:<a>:<b>, exact[:<af>]")
      ->required();
  cmd->add_option("--permutations", o.config.permutations, "Monte Carlo permutations")
      ->capture_default_str();
  cmd->add_option("--epsilon", o.config.epsilon, "Truncation tolerance (0 disables)")
      ->capture_default_str();
  cmd->add_option("--removal-count", o.removal_count, "High-value points to remove");
  cmd->add_option("--out", o.config.out_dir, "Run directory")->required();
  cmd->add_flag("--standardize", o.config.standardize, "Z-score features on train statistics");
  cmd->add_flag("--clean-validation", o.config.clean_validation,
                "Synthetic data: keep validation labels unflipped");
  cmd->add_option("--lr", o.config.train.learning_rate, "Learning rate")->capture_default_str();
  cmd->add_option("--iterations", o.config.train.iterations, "Gradient steps")
      ->capture_default_str();
  cmd->add_option("--l2", o.config.train.l2_penalty, "L2 penalty")->capture_default_str();
  cmd->add_option("--threads", o.config.threads, "Worker threads (0 = all cores)")
      ->capture_default_str();
}

RunConfig finish(RunOptions& o) {
  RunConfig config = o.config;
  if (!o.data.empty()) {
    config.data.csv = o.data;
    config.data.label_column = o.label_column;
  } else if (!o.synthetic.empty()) {
    config.data.synthetic = parse_synthetic(o.synthetic);
  } else {
    throw Error("invalid_argument", "one of --data or --synthetic is required");
  }
  for (const auto& m : o.methods) config.methods.push_back(pshapley::MethodSpec::parse(m));
  if (o.removal_count != 0) config.removal_count = o.removal_count;
  config.validate();
  return config;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Probability-wise Shapley data valuation"};
  app.require_subcommand(1);

  RunOptions value_opts;
  RunOptions all_opts;
  auto* value_cmd = app.add_subcommand("value", "Value the training set with every method");
  add_run_options(value_cmd, value_opts);
  auto* all_cmd = app.add_subcommand("all", "Value, run removal experiments, and report");
  add_run_options(all_cmd, all_opts);

  std::string remove_out;
  long long remove_count = 0;
  std::size_t remove_threads = 0;
  auto* remove_cmd = app.add_subcommand("remove", "High-value removal from stored values");
  remove_cmd->add_option("--out", remove_out, "Run directory written by `value`")->required();
  remove_cmd->add_option("--removal-count", remove_count, "Overrides the stored count");
  remove_cmd->add_option("--threads", remove_threads, "Worker threads (0 = all cores)");

  std::string report_out;
  auto* report_cmd = app.add_subcommand("report", "Aggregate curves into summary tables");
  report_cmd->add_option("--out", report_out, "Run directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    print_error("usage", e.what());
    return 2;
  }

  try {
    if (*value_cmd) {
      pshapley::stage_value(finish(value_opts));
    } else if (*all_cmd) {
      pshapley::stage_all(finish(all_opts));
    } else if (*remove_cmd) {
      std::optional<pshapley::Index> count;
      if (remove_count != 0) count = remove_count;
      pshapley::stage_remove(remove_out, count, remove_threads);
    } else if (*report_cmd) {
      pshapley::stage_report(report_out);
    }
  } catch (const Error& e) {
    print_error(e.code(), e.what());
    return 1;
  } catch (const std::exception& e) {
    print_error("internal", e.what());
    return 1;
  }
  return 0;
}

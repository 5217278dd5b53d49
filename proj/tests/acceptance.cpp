// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.
#include "pshapley/activation.hpp"
#include "pshapley/experiment.hpp"
#include "pshapley/metrics.hpp"
#include "pshapley/random.hpp"
#include "pshapley/utility.hpp"
#include "pshapley/valuation.hpp"

#include "oracles.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

using namespace pshapley;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void check(bool ok, const std::string& what) {
    if (ok) return;
    if (pass) detail = what;
    pass = false;
  }
};

const Activation kActivations[] = {Activation::relu(), Activation::square(), Activation::swish(),
                                   Activation::mish()};

double af_plain(const Activation& af, double x) {
  switch (af.kind) {
    case Activation::Kind::ReLU: return oracle::relu(x);
    case Activation::Kind::Square: return oracle::square(x);
    case Activation::Kind::Mish: return oracle::mish(x);
    case Activation::Kind::Swish: return oracle::swish(x, af.swish_beta);
  }
  return 0.0;
}

// n = 8 players, 12 validation points.
DataSplit eight_players() {
  SyntheticSpec spec;
  spec.n_per_class = 10;
  spec.dim = 2;
  spec.class_separation = 1.5;
  spec.noise_fraction = 0.1;
  spec.seed = 3;
  return split_train_valid(generate_synthetic(spec).data, 0.6, 3);
}

TrainConfig eight_config() {
  TrainConfig c;
  c.learning_rate = 0.1;
  c.iterations = 200;
  c.l2_penalty = 1e-4;
  return c;
}

std::vector<double> oracle_shapley(const DataSplit& split, const TrainConfig& config,
                                   const Activation& af) {
  const auto table = oracle::subset_utilities(
      split.train, split.validation, config,
      [&](const Eigen::VectorXd& p, const Eigen::VectorXd& y) {
        return oracle::probability_utility(p, y, [&](double x) { return af_plain(af, x); });
      });
  return oracle::shapley_by_subsets(int(split.train.size()), table);
}

Outcome oracle_equivalence() {
  Outcome out;
  const auto split = eight_players();
  const auto config = eight_config();
  if (split.train.size() != 8) out.check(false, "fixture does not have 8 players");
  auto oracle = std::make_shared<TrainingOracle>(split.train, split.validation, config);
  double worst = 0.0;
  for (const auto& af : kActivations) {
    const UtilityEvaluator game(oracle, UtilityKind::probability(af));
    const auto v = exact_shapley(game);
    const auto ref = oracle_shapley(split, config, af);
    for (std::size_t i = 0; i < ref.size(); ++i) worst = std::max(worst, std::abs(v.values[Index(i)] - ref[i]));
  }
  out.check(worst <= 1e-12, "max deviation " + format_real(worst));
  if (out.pass) out.detail = "max deviation " + format_real(worst);
  return out;
}

Outcome tmc_convergence() {
  Outcome out;
  const auto split = eight_players();
  auto oracle = std::make_shared<TrainingOracle>(split.train, split.validation, eight_config());
  std::ostringstream detail;
  for (const auto& af : kActivations) {
    const UtilityEvaluator game(oracle, UtilityKind::probability(af));
    const auto exact = exact_shapley(game);
    int within = 0, total = 0;
    double abs_dev = 0.0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      MonteCarloOptions opts;
      opts.permutations = 5000;
      opts.epsilon = 0.0;
      opts.seed = seed;
      const auto est = tmc_shapley(game, opts);
      for (Index i = 0; i < game.player_count(); ++i) {
        const double dev = std::abs(est.values[i] - exact.values[i]);
        within += dev <= 4.0 * est.standard_errors[i];
        abs_dev += dev;
        ++total;
      }
    }
    const double coverage = double(within) / total;
    const double mad = abs_dev / total;
    detail << af.name() << " coverage " << format_real(coverage) << " mad " << format_real(mad) << "; ";
    out.check(coverage >= 0.95 && mad <= 0.01, af.name() + " out of tolerance");
  }
  if (out.pass) out.detail = detail.str();
  else out.detail += " (" + detail.str() + ")";
  return out;
}

FunctionGame table_game(Index n, std::vector<double> table) {
  return FunctionGame(n, [table = std::move(table)](const Coalition& c) {
    std::uint64_t mask = 0;
    for (Index i : c.members()) mask |= std::uint64_t{1} << i;
    return table[mask];
  });
}

Outcome axioms() {
  Outcome out;
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const Index n = 3 + Index(rng.below(8));  // 3..10
    const std::size_t size = std::size_t{1} << n;
    std::vector<double> t1(size), t2(size);
    for (auto& v : t1) v = rng.uniform();
    for (auto& v : t2) v = rng.uniform();
    if (trial % 2 == 0) t1[0] = 0.0;

    // Players 0 and 1 interchangeable, player n-1 null.
    const std::uint64_t swap01 = 3, null_bit = std::uint64_t{1} << (n - 1);
    for (std::uint64_t m = 0; m < size; ++m) {
      std::uint64_t mm = m & ~null_bit;
      if ((mm & swap01) == 2) mm ^= swap01;
      t1[m] = t1[mm];
    }

    const auto v1 = exact_shapley(table_game(n, t1));
    const auto v2 = exact_shapley(table_game(n, t2));
    std::vector<double> sum(size);
    for (std::size_t m = 0; m < size; ++m) sum[m] = t1[m] + t2[m];
    const auto v12 = exact_shapley(table_game(n, sum));

    out.check(std::abs(v1.total() - (t1[size - 1] - t1[0])) <= 1e-9, "efficiency");
    out.check(std::abs(v2.total() - (t2[size - 1] - t2[0])) <= 1e-9, "efficiency");
    out.check(std::abs(v1.values[0] - v1.values[1]) <= 1e-9, "symmetry");
    out.check(std::abs(v1.values[n - 1]) <= 1e-12, "null player");
    for (Index i = 0; i < n; ++i) {
      out.check(std::abs(v12.values[i] - v1.values[i] - v2.values[i]) <= 1e-9, "additivity");
    }
  }
  return out;
}

Outcome motivating_example() {
  Outcome out;
  const Eigen::Vector2d y(1.0, 1.0);
  const Eigen::Vector2d c1(0.9, 0.3), c2(0.6, 0.3);
  out.check(accuracy_utility(c1, y) == 0.5 && accuracy_utility(c2, y) == 0.5, "accuracy not 0.5");
  const double u1 = probability_utility(c1, y, Activation::relu());
  const double u2 = probability_utility(c2, y, Activation::relu());
  out.check(std::abs(u1 - 0.45) <= 1e-12 && std::abs(u2 - 0.30) <= 1e-12, "ReLU utilities");

  auto game = [&](const UtilityKind& kind) {
    return FunctionGame(2, [kind, y, c1, c2](const Coalition& c) {
      if (c.empty()) return 0.0;
      return utility_from_probabilities(kind, c.contains(0) ? c1 : c2, y);
    });
  };
  const auto acc = exact_shapley(game(UtilityKind::accuracy()));
  out.check(std::abs(acc.values[0] - acc.values[1]) <= 1e-12, "accuracy-Shapley does not tie");
  for (const auto& af : kActivations) {
    const auto p = exact_shapley(game(UtilityKind::probability(af)));
    out.check(p.values[0] - p.values[1] > 1e-12, "P-Shapley does not separate under " + af.name());
  }
  if (out.pass) {
    const auto p = exact_shapley(game(UtilityKind::probability(Activation::relu())));
    out.detail = "relu values " + format_real(p.values[0]) + " vs " + format_real(p.values[1]);
  }
  return out;
}

Outcome activations() {
  Outcome out;
  struct Row {
    double x, mish, swish;
  };
  // 40-digit references rounded to double.
  const Row rows[] = {{0.0, 0.0, 0.0},
                      {0.5, 0.3752452113048951048185624, 0.3112296656009272823194503},
                      {0.9, 0.7612059289525152742679228, 0.6398545523625035671167884},
                      {1.0, 0.8650983882673103461162334, 0.7310585786300048792511592}};
  for (const auto& r : rows) {
    out.check(std::abs(activation_eval(Activation::relu(), r.x) - r.x) <= 1e-12, "relu value");
    out.check(std::abs(activation_eval(Activation::square(), r.x) - r.x * r.x) <= 1e-12, "square value");
    out.check(std::abs(activation_eval(Activation::mish(), r.x) - r.mish) <= 1e-12, "mish value");
    out.check(std::abs(activation_eval(Activation::swish(), r.x) - r.swish) <= 1e-12, "swish value");
  }

  // Closed-form derivatives written out independently.
  auto closed = [](const Activation& af, double x) {
    switch (af.kind) {
      case Activation::Kind::ReLU: return 1.0;
      case Activation::Kind::Square: return 2.0 * x;
      case Activation::Kind::Swish: {
        const double s = 1.0 / (1.0 + std::exp(-x));
        return s + x * s * (1.0 - s);
      }
      case Activation::Kind::Mish: {
        const double e = std::exp(x);
        const double omega = 4.0 * (x + 1.0) + 4.0 * e * e + e * e * e + e * (4.0 * x + 6.0);
        const double delta = 2.0 * e + e * e + 2.0;
        return e * omega / (delta * delta);
      }
    }
    return 0.0;
  };
  const double h = 1e-6;
  double worst_closed = 0.0, worst_fd = 0.0;
  for (const auto& af : kActivations) {
    for (int k = 0; k <= 98; ++k) {
      const double x = 0.01 + 0.01 * k;
      const double d = activation_derivative(af, x);
      const double fd = (activation_eval(af, x + h) - activation_eval(af, x - h)) / (2 * h);
      worst_closed = std::max(worst_closed, std::abs(d - closed(af, x)) / std::abs(d));
      worst_fd = std::max(worst_fd, std::abs(d - fd) / std::abs(d));
    }
  }
  out.check(worst_closed <= 1e-5, "closed form rel error " + format_real(worst_closed));
  out.check(worst_fd <= 1e-5, "finite difference rel error " + format_real(worst_fd));

  const double step = 1e-3;
  double min_second = 1.0;
  for (const auto& af : {Activation::square(), Activation::swish(), Activation::mish()}) {
    for (int k = 1; k < 1000; ++k) {
      const double x = k * step;
      const double second =
          activation_eval(af, x + step) - 2 * activation_eval(af, x) + activation_eval(af, x - step);
      min_second = std::min(min_second, second);
    }
  }
  out.check(min_second >= -1e-9, "negative second difference " + format_real(min_second));
  if (out.pass) {
    out.detail = "closed " + format_real(worst_closed) + " fd " + format_real(worst_fd) +
                 " min second difference " + format_real(min_second);
  }
  return out;
}

Outcome metric_identities() {
  Outcome out;
  Rng rng(11);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<double> s(2 + rng.below(60));
    for (auto& v : s) v = rng.uniform() * 10.0;
    worst = std::max(worst, std::abs(weighted_drop(s) - weighted_drop_telescoped(s)));
    worst = std::max(worst, std::abs(weighted_drop(s) - oracle::weighted_drop_double_sum(s)));
  }
  out.check(worst <= 1e-12, "double sum vs telescoped " + format_real(worst));

  RemovalCurve acc_curve;
  for (double a : {1.0, 0.5, 0.5}) acc_curve.rounds.push_back({a, 0.0, 0.0});
  out.check(wad(acc_curve) == 0.75, "WAD([1, .5, .5]) = " + format_real(wad(acc_curve)));
  RemovalCurve brier_curve;
  for (double b : {0.1, 0.3, 0.3}) brier_curve.rounds.push_back({0.0, b, 0.0});
  out.check(std::abs(wbd(brier_curve) - 0.3) <= 1e-15,
            "WBD([.1, .3, .3]) = " + format_real(wbd(brier_curve)));

  double brier_dev = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const Index n = 1 + Index(rng.below(40));
    Eigen::VectorXd p(n), y(n);
    for (Index i = 0; i < n; ++i) {
      p[i] = rng.uniform();
      y[i] = double(rng.below(2));
    }
    brier_dev = std::max(brier_dev, std::abs(brier_score(p, y) - (p - y).squaredNorm() / double(n)));
  }
  out.check(brier_dev <= 1e-12, "Brier vs MSE " + format_real(brier_dev));
  return out;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

Outcome directional() {
  Outcome out;
  const std::vector<std::string> methods = {"loo",           "pshapley:relu",  "pshapley:square",
                                            "pshapley:swish", "pshapley:mish"};
  std::map<std::string, std::vector<MetricSummary>> runs;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    RunConfig config;
    SyntheticSpec spec;
    spec.n_per_class = 100;
    spec.dim = 2;
    spec.class_separation = 2.0;
    spec.noise_fraction = 0.2;
    spec.seed = seed;
    config.data.synthetic = spec;
    config.seed = seed;
    config.valid_fraction = 0.2;
    config.clean_validation = true;
    config.permutations = 500;
    config.epsilon = 0.001;
    for (const auto& m : methods) config.methods.push_back(MethodSpec::parse(m));
    const PreparedRun prepared = prepare(config);
    const Index removals = Index(std::lround(0.4 * double(prepared.split.train.size())));
    config.removal_count = removals;

    ValuationSuite suite(config, prepared);
    for (const auto& m : config.methods) {
      const auto values = suite.run(m);
      runs[m.tag()].push_back(summarize(run_removal_experiment(suite.oracle(), values, removals)));
    }
  }

  std::map<std::string, std::array<double, 3>> med;
  std::ostringstream detail;
  for (const auto& [tag, list] : runs) {
    std::vector<double> a, b, c;
    for (const auto& s : list) {
      a.push_back(s.wad);
      b.push_back(s.wbd);
      c.push_back(s.wcd);
    }
    med[tag] = {median(a), median(b), median(c)};
    detail << tag << " " << format_real(med[tag][0]) << "/" << format_real(med[tag][1]) << "/"
           << format_real(med[tag][2]) << "; ";
  }
  const auto& loo = med["loo"];
  const auto& relu = med["pshapley-relu"];
  for (const auto& [tag, m] : med) {
    if (tag == "loo") continue;
    for (int k = 0; k < 3; ++k) out.check(m[k] > loo[k], tag + " not above loo");
    if (tag != "pshapley-relu") {
      out.check(m[1] >= relu[1] && m[2] >= relu[2], tag + " below relu");
    }
  }
  out.detail = (out.pass ? "" : out.detail + " | ") + "median wad/wbd/wcd: " + detail.str();
  return out;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = slurp(e.path());
  }
  return files;
}

Outcome cli_determinism() {
  Outcome out;
  const fs::path base = fs::temp_directory_path() / "pshapley_acceptance_determinism";
  fs::remove_all(base);
  const std::string args =
      " all --synthetic 20:2:2:0.1:7 --seed 7 --method tmc --method pshapley:square"
      " --method pshapley:mish --method loo --method beta:1:16 --permutations 60"
      " --epsilon 0.001 --removal-count 6";
  std::vector<std::map<std::string, std::string>> trees;
  for (const char* run : {"a", "b"}) {
    const fs::path dir = base / run;
    const std::string cmd = std::string("\"") + PSHAPLEY_CLI + "\"" + args + " --out \"" +
                            dir.string() + "\"";
    if (std::system(cmd.c_str()) != 0) {
      out.check(false, "CLI exited nonzero");
      return out;
    }
    trees.push_back(tree(dir));
  }
  const auto& first = trees[0];
  out.check(first == trees[1], "outputs differ between runs");
  bool has_values = false, has_curves = false;
  for (const auto& [name, bytes] : first) {
    has_values |= name.rfind("values/", 0) == 0;
    has_curves |= name.rfind("curves/", 0) == 0;
  }
  out.check(has_values && has_curves && first.count("summary.csv") && first.count("summary.json"),
            "missing outputs");
  if (out.pass) out.detail = std::to_string(first.size()) + " files byte-identical";
  fs::remove_all(base);
  return out;
}

Outcome degenerate_inputs() {
  Outcome out;
  const auto split = eight_players();
  auto oracle = std::make_shared<TrainingOracle>(split.train, split.validation, eight_config());
  const Index n = split.train.size();
  for (const auto& kind : {UtilityKind::accuracy(), UtilityKind::probability(Activation::relu()),
                           UtilityKind::probability(Activation::square()),
                           UtilityKind::probability(Activation::swish()),
                           UtilityKind::probability(Activation::mish())}) {
    const UtilityEvaluator game(oracle, kind);
    out.check(game.utility(Coalition(n)) == 0.0, "empty coalition utility not 0");

    for (double label : {0.0, 1.0}) {
      Coalition c(n);
      for (Index i = 0; i < n; ++i) {
        if (split.train.label(i) == label) c.insert(i);
      }
      if (!c.empty()) out.check(std::isfinite(game.utility(c)), "single-class utility not finite");
    }

    MonteCarloOptions opts;
    opts.permutations = 50;
    opts.epsilon = 1e6;
    opts.seed = 1;
    const auto v = tmc_shapley(game, opts);
    for (Index i = 0; i < n; ++i) out.check(v.values[i] == 0.0, "truncated value not zero");
    out.check(v.truncation_rate == 1.0, "truncation rate not 1");
  }

  const Eigen::Vector4d p(0.0, 1.0, 0.0, 1.0), y(1.0, 0.0, 0.0, 1.0);
  const double ce = cross_entropy(p, y);
  out.check(std::isfinite(ce), "cross-entropy not finite");
  out.check(std::abs(ce - 2.0 * -std::log(1e-12)) <= 1e-3, "clamp not applied");
  return out;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const Criterion criteria[] = {
      {1, "exact P-Shapley matches brute-force enumeration", oracle_equivalence},
      {2, "TMC P-Shapley converges to exact values", tmc_convergence},
      {3, "Shapley axioms", axioms},
      {4, "motivating example discrimination", motivating_example},
      {5, "activation values, derivatives and convexity", activations},
      {6, "metric identities", metric_identities},
      {7, "directional removal ordering", directional},
      {8, "CLI determinism", cli_determinism},
      {9, "degenerate inputs", degenerate_inputs},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failures += !o.pass;
    std::printf("%s %d %s (%.1fs)%s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.name, secs,
                o.detail.empty() ? "" : ": ", o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}

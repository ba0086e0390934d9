#include "cli.hpp"

#include "puprior/csv.hpp"
#include "puprior/dataset.hpp"
#include "puprior/improve.hpp"
#include "puprior/pulscar.hpp"
#include "puprior/pulsnar.hpp"
#include "puprior/report.hpp"
#include "puprior/rng.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <numeric>
#include <ostream>

namespace puprior::cli {
namespace {

namespace fs = std::filesystem;

nlohmann::json optional_json(const auto& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

// Sibling path with the extension replaced: report.json -> report.curve.csv.
fs::path sibling(const std::string& out, const std::string& suffix) {
  fs::path p(out);
  return p.parent_path() / (p.stem().string() + suffix);
}

std::vector<std::string> preamble(const RunConfig& config) {
  return {"puprior " + std::string(version()), "config " + to_json(config).dump()};
}

nlohmann::json envelope(const RunConfig& config) {
  return {{"version", std::string(version())}, {"command", config.command},
          {"config", to_json(config)}};
}

void emit(const nlohmann::json& report, const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) {
    out << report.dump(2) << '\n';
  } else {
    write_json(report, config.out);
  }
}

EstimatorConfig estimator_config(const RunConfig& config) {
  EstimatorConfig est;
  est.pulscar.bin_rule = config.bins;
  est.pulscar.n_bins = config.n_bins;
  est.pulscar.grid_step = config.grid_step;
  est.n_clusters = config.n_clusters;
  est.k_max = config.k_max;
  est.jobs = config.jobs;
  return est;
}

PUDataset load_input(const RunConfig& config, bool as_truth) {
  if (config.input.empty()) throw InputError("--input is required for '" + config.command + "'");
  CsvOptions options;
  options.label_column = config.label_column;
  options.one_hot_columns = config.one_hot;
  options.labels_are_truth = as_truth;
  return load_csv(config.input, options);
}

double single_alpha(const RunConfig& config) {
  if (config.alphas.size() != 1) throw InputError("expected exactly one --alpha value");
  return config.alphas.front();
}

SyntheticConfig synthetic_config(const RunConfig& config, double alpha, std::uint64_t seed) {
  SyntheticConfig syn;
  syn.n_positive = config.n_positive;
  syn.n_unlabeled = config.n_unlabeled;
  syn.n_features = config.n_features;
  syn.class_sep = config.class_sep;
  syn.alpha_true = alpha;
  syn.seed = seed;
  if (config.mode == LabelMode::kSnar) {
    syn.n_subclasses = config.n_subclasses;
    syn.subclass_mix = geometric_mix(config.n_subclasses);
  }
  return syn;
}

PUDataset synthesize(const RunConfig& config, double alpha, std::uint64_t seed) {
  const auto syn = synthetic_config(config, alpha, seed);
  return config.mode == LabelMode::kSnar ? generate_snar(syn) : generate_scar(syn);
}

std::optional<double> hidden_fraction(const PUDataset& ds) {
  if (!ds.true_label || ds.n_unlabeled() == 0) return std::nullopt;
  return static_cast<double>(ds.n_hidden_positives()) / static_cast<double>(ds.n_unlabeled());
}

int cmd_generate(const RunConfig& config, std::ostream& out) {
  if (config.out.empty()) throw InputError("--out is required for 'generate'");
  const double alpha = single_alpha(config);
  PUDataset ds;
  if (config.input.empty()) {
    ds = synthesize(config, alpha, config.seed);
  } else {
    ds = flip_to_unlabeled(load_input(config, true), alpha, config.mode, config.seed);
  }
  write_csv(ds, config.out, preamble(config));
  nlohmann::json summary = {{"rows", ds.size()},
                            {"labeled", ds.n_labeled()},
                            {"unlabeled", ds.n_unlabeled()},
                            {"features", ds.n_features()},
                            {"n_hidden_positives", ds.true_label ? nlohmann::json(ds.n_hidden_positives())
                                                                 : nlohmann::json(nullptr)},
                            {"alpha_true", optional_json(hidden_fraction(ds))},
                            {"out", config.out}};
  out << summary.dump() << '\n';
  return kExitOk;
}

nlohmann::json estimate_once(const PUDataset& ds, const RunConfig& config) {
  const auto est = estimator_config(config);
  const auto pre = preamble(config);
  nlohmann::json result;
  if (config.mode == LabelMode::kScar) {
    const auto sub = estimate_alpha_pulscar(ds, est, config.seed);
    result = to_json(sub, true);
    result["alpha"] = sub.estimate.alpha;
    if (!config.out.empty()) {
      write_curve_csv(sub.estimate, sibling(config.out, ".curve.csv"), pre);
      write_density_csv(sub.estimate.density_positive, sibling(config.out, ".density_positive.csv"),
                        pre);
      write_density_csv(sub.estimate.density_unlabeled,
                        sibling(config.out, ".density_unlabeled.csv"), pre);
    }
  } else {
    const auto snar = estimate_alpha_snar(ds, est, config.seed);
    result = to_json(snar, true);
    result["alpha"] = snar.alpha_total;
    if (!config.out.empty()) {
      for (const auto& sub : snar.per_cluster) {
        write_curve_csv(sub.estimate,
                        sibling(config.out, ".cluster" + std::to_string(sub.cluster) + ".curve.csv"),
                        pre);
      }
    }
  }
  return result;
}

int cmd_estimate(const RunConfig& config, std::ostream& out) {
  const auto ds = load_input(config, false);
  auto report = envelope(config);
  report["alpha_true"] = optional_json(hidden_fraction(ds));
  if (config.repeats <= 1) {
    report["result"] = estimate_once(ds, config);
  } else {
    auto est = estimator_config(config);
    est.jobs = 1;
    const auto summary = run_repeated([&](std::uint64_t) { return ds; }, config.repeats,
                                      config.mode, est, config.seed, config.jobs);
    report["result"] = to_json(summary);
  }
  emit(report, config, out);
  return kExitOk;
}

double resolve_alpha(const PUDataset& ds, const RunConfig& config) {
  if (!config.alphas.empty()) return single_alpha(config);
  return estimate_alpha(ds, config.mode, estimator_config(config), config.seed);
}

int cmd_calibrate(const RunConfig& config, std::ostream& out) {
  const auto ds = load_input(config, false);
  ds.validate();
  const double alpha = resolve_alpha(ds, config);

  ClassifierConfig cls;
  cls.seed = derive_seed(config.seed, seed_stage::kClassifier);
  const auto probs = oof_probabilities(ds, cls);

  CalibrationConfig cal;
  cal.method = config.method;
  cal.scope = config.scope;
  cal.seed = derive_seed(config.seed, seed_stage::kCalibration);
  const auto result = calibrate(probs, ds.pu_label, alpha, cal);

  double unlabeled_sum = 0.0;
  std::size_t unlabeled_count = 0;
  for (std::size_t j = 0; j < result.rows.size(); ++j) {
    if (ds.pu_label[result.rows[j]] == 0) {
      unlabeled_sum += result.probabilities[j];
      ++unlabeled_count;
    }
  }

  auto report = envelope(config);
  report["alpha_true"] = optional_json(hidden_fraction(ds));
  nlohmann::json res = {{"alpha", alpha},
                        {"method", to_string(result.method)},
                        {"scope", to_string(result.scope)},
                        {"n_calibrated", result.rows.size()},
                        {"flips", to_json(result.flips.schedule)},
                        {"mean_calibrated_unlabeled",
                         unlabeled_count ? nlohmann::json(unlabeled_sum /
                                                          static_cast<double>(unlabeled_count))
                                         : nlohmann::json(nullptr)}};

  if (ds.true_label) {
    std::vector<int> truth;
    truth.reserve(result.rows.size());
    for (auto r : result.rows) truth.push_back((*ds.true_label)[r]);
    const auto before = reliability_diagram(
        [&] {
          Probabilities raw;
          raw.reserve(result.rows.size());
          for (auto r : result.rows) raw.push_back(probs[r]);
          return raw;
        }(),
        truth);
    const auto after = reliability_diagram(result.probabilities, truth);
    res["reliability_uncalibrated"] = to_json(before);
    res["reliability_calibrated"] = to_json(after);
    if (!config.out.empty()) {
      write_reliability_csv(after, sibling(config.out, ".reliability.csv"), preamble(config));
    }
  }
  report["result"] = res;

  if (!config.out.empty()) {
    std::ofstream csv_out(sibling(config.out, ".probabilities.csv"));
    if (!csv_out) throw InputError("cannot write calibrated probabilities next to " + config.out);
    for (const auto& line : preamble(config)) csv_out << "# " << line << '\n';
    csv_out << "row,pu_label,probability,calibrated\n";
    for (std::size_t j = 0; j < result.rows.size(); ++j) {
      const auto r = result.rows[j];
      csv_out << r << ',' << ds.pu_label[r] << ',' << csv::format_number(probs[r]) << ','
              << csv::format_number(result.probabilities[j]) << '\n';
    }
  }
  emit(report, config, out);
  return kExitOk;
}

int cmd_improve(const RunConfig& config, std::ostream& out) {
  const auto ds = load_input(config, false);
  ImprovementConfig imp;
  imp.estimator = estimator_config(config);
  imp.calibration.method = config.method;
  imp.threshold = config.threshold;

  const auto n = std::max<std::size_t>(config.repeats, 1);
  std::vector<PairedRow> rows(n);
  for (std::size_t i = 0; i < n; ++i) {
    rows[i].seed = config.seed + i;
    rows[i].result = run_improvement(ds, config.mode, imp, rows[i].seed);
  }

  auto report = envelope(config);
  report["alpha_true"] = optional_json(hidden_fraction(ds));
  nlohmann::json runs = nlohmann::json::array();
  std::size_t auc_wins = 0;
  std::size_t mcc_wins = 0;
  for (const auto& row : rows) {
    auto j = to_json(row.result);
    j["seed"] = row.seed;
    runs.push_back(j);
    const auto& w = row.result.with;
    const auto& wo = row.result.without;
    if (w.auc_roc && wo.auc_roc && *w.auc_roc > *wo.auc_roc) ++auc_wins;
    if (w.mcc && wo.mcc && *w.mcc > *wo.mcc) ++mcc_wins;
  }
  report["result"] = {{"runs", runs}, {"auc_improved", auc_wins}, {"mcc_improved", mcc_wins}};
  if (!config.out.empty()) write_paired_csv(rows, sibling(config.out, ".paired.csv"), preamble(config));
  emit(report, config, out);
  return kExitOk;
}

int cmd_benchmark(const RunConfig& config, std::ostream& out) {
  if (config.alphas.empty()) throw InputError("benchmark needs at least one --alpha");
  if (config.repeats < 2) throw InputError("benchmark needs --repeats of at least 2");
  const LabelMode estimator = config.estimator.value_or(config.mode);
  std::optional<PUDataset> base;
  if (!config.input.empty()) base = load_input(config, true);

  auto est = estimator_config(config);
  est.jobs = 1;

  auto report = envelope(config);
  nlohmann::json levels = nlohmann::json::array();
  std::ostringstream table;
  for (const auto& line : preamble(config)) table << "# " << line << '\n';
  table << "kind,alpha_true,seed,alpha_hat,n,mean,standard_error,ci_low,ci_high,n_failed\n";
  for (double alpha : config.alphas) {
    DatasetSource source = [&, alpha](std::uint64_t seed) {
      return base ? flip_to_unlabeled(*base, alpha, config.mode, seed)
                  : synthesize(config, alpha, seed);
    };
    const auto summary =
        run_repeated(source, config.repeats, estimator, est, config.seed, config.jobs);
    const auto a = csv::format_number(alpha);
    for (std::size_t i = 0; i < summary.seeds.size(); ++i) {
      table << "seed," << a << ',' << summary.seeds[i] << ','
            << (summary.estimates[i] ? csv::format_number(*summary.estimates[i]) : "") << ",,,,,,\n";
    }
    table << "summary," << a << ",,," << (summary.seeds.size() - summary.n_failed) << ','
          << csv::format_number(summary.mean) << ',' << csv::format_number(summary.standard_error)
          << ',' << csv::format_number(summary.ci_low) << ',' << csv::format_number(summary.ci_high)
          << ',' << summary.n_failed << '\n';
    auto level = to_json(summary);
    level["alpha_true"] = alpha;
    level["estimator"] = to_string(estimator);
    levels.push_back(level);
  }
  report["result"] = {{"levels", levels}};
  if (config.out.empty()) {
    out << table.str();
  } else {
    std::ofstream csv_out(config.out);
    if (!csv_out) throw InputError("cannot write '" + config.out + "'");
    csv_out << table.str();
    write_json(report, sibling(config.out, ".json"));
  }
  return kExitOk;
}

// Enum flags are read as text and converted after parsing.
struct EnumFlags {
  std::string mode = "scar";
  std::string estimator;
  std::string bins = "fd";
  std::string method = "isotonic";
  std::string scope = "pu";
};

void apply(const EnumFlags& f, RunConfig& c) {
  c.mode = parse_label_mode(f.mode);
  if (!f.estimator.empty()) c.estimator = parse_label_mode(f.estimator);
  c.bins = parse_bin_rule(f.bins);
  c.method = parse_calibration_method(f.method);
  c.scope = parse_calibration_scope(f.scope);
}

void add_shared_options(CLI::App& app, RunConfig& c, EnumFlags& f) {
  const std::vector<std::string> modes = {"scar", "snar"};
  app.add_option("--input", c.input, "CSV dataset");
  app.add_option("--out", c.out, "Output file (report JSON, dataset CSV or benchmark CSV)");
  app.add_option("--mode", f.mode, "Labeling assumption")->check(CLI::IsMember(modes));
  app.add_option("--estimator", f.estimator, "Benchmark estimator (defaults to --mode)")
      ->check(CLI::IsMember(modes));
  app.add_option("--alpha", c.alphas, "Hidden positive fraction(s); comma separated allowed")
      ->delimiter(',')
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--bins", f.bins, "Bin count rule")
      ->check(CLI::IsMember({"sqrt", "sturges", "rice", "scott", "fd"}));
  app.add_option("--n-bins", c.n_bins, "Fixed bin count (overrides --bins)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{100000}));
  app.add_option("--grid-step", c.grid_step, "Alpha grid spacing")
      ->check(CLI::Range(1e-6, 0.5));
  app.add_option("--seed", c.seed, "Master seed (first seed when repeating)");
  app.add_option("--repeats", c.repeats, "Number of consecutive seeds");
  app.add_option("--jobs", c.jobs, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--method", f.method, "Calibration model")
      ->check(CLI::IsMember({"isotonic", "sigmoid"}));
  app.add_option("--scope", f.scope, "Calibration scope")->check(CLI::IsMember({"pu", "u"}));
  app.add_option("--threshold", c.threshold, "Decision threshold for accuracy, F1 and MCC")
      ->check(CLI::Range(0.0, 1.0));
  app.add_option("--n-clusters", c.n_clusters, "Fixed cluster count for snar mode")
      ->check(CLI::PositiveNumber);
  app.add_option("--k-max", c.k_max, "Largest cluster count tried")->check(CLI::PositiveNumber);
  app.add_option("--label-column", c.label_column, "Label column of --input");
  app.add_option("--one-hot", c.one_hot, "Categorical columns to one-hot encode")->delimiter(',');
  app.add_option("--n-positive", c.n_positive, "Synthetic labeled positives")
      ->check(CLI::PositiveNumber);
  app.add_option("--n-unlabeled", c.n_unlabeled, "Synthetic unlabeled examples")
      ->check(CLI::PositiveNumber);
  app.add_option("--n-features", c.n_features, "Synthetic feature count")
      ->check(CLI::PositiveNumber);
  app.add_option("--n-subclasses", c.n_subclasses, "Synthetic positive subclasses (snar)")
      ->check(CLI::Range(std::size_t{2}, std::size_t{64}));
  app.add_option("--class-sep", c.class_sep, "Synthetic class separation")
      ->check(CLI::PositiveNumber);
  app.set_config("--config", "", "Flat key=value file using the long flag names");
  app.allow_config_extras(CLI::config_extras_mode::error);
}

}  // namespace

nlohmann::json to_json(const RunConfig& c) {
  return {{"command", c.command},
          {"input", c.input},
          {"out", c.out},
          {"mode", to_string(c.mode)},
          {"estimator", c.estimator ? nlohmann::json(to_string(*c.estimator))
                                    : nlohmann::json(nullptr)},
          {"alpha", c.alphas},
          {"bins", to_string(c.bins)},
          {"n_bins", optional_json(c.n_bins)},
          {"grid_step", c.grid_step},
          {"seed", c.seed},
          {"repeats", c.repeats},
          {"jobs", c.jobs},
          {"method", to_string(c.method)},
          {"scope", to_string(c.scope)},
          {"threshold", c.threshold},
          {"n_clusters", optional_json(c.n_clusters)},
          {"k_max", c.k_max},
          {"label_column", c.label_column},
          {"one_hot", c.one_hot},
          {"n_positive", c.n_positive},
          {"n_unlabeled", c.n_unlabeled},
          {"n_features", c.n_features},
          {"n_subclasses", c.n_subclasses},
          {"class_sep", c.class_sep}};
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  RunConfig config;
  EnumFlags flags;
  CLI::App app{"Class-prior estimation for positive-unlabeled data", "puprior"};
  app.set_version_flag("--version", std::string(version()));
  app.require_subcommand(1, 1);
  add_shared_options(app, config, flags);
  const std::map<std::string, std::string> commands = {
      {"generate", "Write a synthetic PU dataset, or hide positives in a labeled CSV"},
      {"estimate", "Estimate the positive fraction among the unlabeled"},
      {"calibrate", "Calibrate out-of-fold probabilities given alpha"},
      {"improve", "Compare classifiers trained without and with label correction"},
      {"benchmark", "Repeat estimation over seeds and alpha levels"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help)->fallthrough();

  // CLI11 wants argv order with the program name first.
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::CallForVersion&) {
    out << version() << '\n';
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInputError;
  }
  config.command = app.get_subcommands().front()->get_name();

  try {
    apply(flags, config);
    if (config.command == "generate") return cmd_generate(config, out);
    if (config.command == "estimate") return cmd_estimate(config, out);
    if (config.command == "calibrate") return cmd_calibrate(config, out);
    if (config.command == "improve") return cmd_improve(config, out);
    return cmd_benchmark(config, out);
  } catch (const InputError& e) {
    err << "input error: " << e.what() << '\n';
    return kExitInputError;
  } catch (const NumericalError& e) {
    err << "numerical error: " << e.what() << '\n';
    return kExitNumericalError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
}

}  // namespace puprior::cli

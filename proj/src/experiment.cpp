#include "gnncert/experiment.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "gnncert/dataset_io.hpp"
#include "gnncert/error.hpp"

namespace gnncert {

namespace fs = std::filesystem;

void ExperimentSpec::validate() const {
  if (dataset.empty()) throw ConfigError("experiment: dataset is required");
  if (seeds.empty()) throw ConfigError("experiment: seeds must be nonempty");
  if (depths.empty()) throw ConfigError("experiment: depth list must be nonempty");
  for (std::size_t l : depths)
    if (l < 2) throw ConfigError("experiment: depth must be > 1, got " + std::to_string(l));
  if (hidden == 0) throw ConfigError("experiment: hidden must be >= 1");
  if (batch == 0) throw ConfigError("experiment: batch must be >= 1");
  if (epochs && *epochs < 1) throw ConfigError("experiment: epochs must be >= 1");
  if (!(lr > 0.0)) throw ConfigError("experiment: lr must be > 0");
  if (!(gamma > 0.0)) throw ConfigError("experiment: gamma must be > 0");
  if (jobs == 0) throw ConfigError("experiment: jobs must be >= 1");
}

int ExperimentSpec::resolved_epochs() const { return epochs.value_or(tu_dir ? 50 : 200); }

TrainConfig ExperimentSpec::train_config(std::size_t depth, std::uint64_t seed) const {
  TrainConfig cfg;
  cfg.epochs = resolved_epochs();
  cfg.batch_size = batch;
  cfg.learning_rate = lr;
  cfg.seed = seed;
  cfg.depth = depth;
  cfg.hidden = hidden;
  cfg.gamma = gamma;
  cfg.train_fraction = kTrainFraction;
  cfg.split_seed = kSplitSeed;
  return cfg;
}

namespace {

std::uint64_t parse_u64(std::string_view s) {
  std::uint64_t v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty())
    throw ConfigError("invalid seed '" + std::string(s) + "'");
  return v;
}

}  // namespace

std::vector<std::uint64_t> parse_seed_list(const std::string& text) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    const auto dash = item.find('-');
    if (dash == std::string::npos) {
      out.push_back(parse_u64(item));
      continue;
    }
    const std::uint64_t lo = parse_u64(std::string_view(item).substr(0, dash));
    const std::uint64_t hi = parse_u64(std::string_view(item).substr(dash + 1));
    if (hi < lo) throw ConfigError("invalid seed range '" + item + "'");
    for (std::uint64_t s = lo; s <= hi; ++s) out.push_back(s);
  }
  if (out.empty()) throw ConfigError("empty seed list '" + text + "'");
  return out;
}

Dataset load_experiment_dataset(const ExperimentSpec& spec) {
  Dataset ds;
  if (spec.tu_dir) {
    TuOptions opts;
    opts.max_graphs = spec.max_graphs;
    opts.seed = spec.data_seed;
    ds = load_tu_dataset(*spec.tu_dir, spec.dataset, opts);
  } else if (fs::is_regular_file(spec.dataset)) {
    ds = read_dataset(spec.dataset);
  } else {
    ds = gen_dataset(spec.dataset, spec.data_seed);
  }
  if (!spec.tu_dir && spec.max_graphs && *spec.max_graphs < ds.size()) {
    std::vector<std::size_t> keep(*spec.max_graphs);
    for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
    ds = subset(ds, keep);
  }
  if (spec.append_ones) ds = append_ones_feature(std::move(ds));
  return ds;
}

Dataset training_split(const Dataset& ds) {
  return subset(ds, split_dataset(ds, kTrainFraction, kSplitSeed).train);
}

Dataset cmd_gen_data(const std::string& preset_name, std::uint64_t seed,
                     const fs::path& out_path) {
  return cmd_gen_data(preset(preset_name), seed, out_path);
}

Dataset cmd_gen_data(const SyntheticSpec& spec, std::uint64_t seed, const fs::path& out_path) {
  Dataset ds = gen_dataset(spec, seed);
  write_dataset(ds, out_path);
  return ds;
}

std::string run_stem(const ExperimentSpec& spec, const std::string& dataset_name, std::size_t depth,
                     std::uint64_t seed) {
  std::string name = dataset_name;
  for (char& c : name)
    if (c == '/' || c == '\\' || c == ' ') c = '_';
  return name + "_" + to_string(spec.model) + "_l" + std::to_string(depth) + "_s" +
         std::to_string(seed);
}

TrainResult cmd_train(const ExperimentSpec& spec, const Dataset& ds, std::size_t depth,
                      std::uint64_t seed) {
  spec.validate();
  TrainResult res = train(ds, spec.train_config(depth, seed), spec.model);
  fs::create_directories(spec.out);
  const std::string stem = run_stem(spec, ds.name, depth, seed);
  write_checkpoint(res.weights, spec.out / (stem + ".ckpt.json"));
  write_file_atomic(spec.out / (stem + ".history.csv"), res.history.to_csv());
  return res;
}

BoundReport cmd_bounds(const Dataset& ds, const ModelWeights& w, double gamma, std::uint64_t seed) {
  return bound_report(training_split(ds), w, gamma, seed);
}

std::vector<CheckReport> cmd_verify(const VerifyOptions& opts) {
  static const std::vector<std::string> kAll = {"perturbation", "structural", "concentration",
                                                "equivalences"};
  const auto& checks = opts.checks.empty() ? kAll : opts.checks;
  std::vector<CheckReport> out;
  for (const std::string& c : checks) {
    if (c == "perturbation") {
      out.push_back(check_perturbation_bounds(ModelKind::Gcn, opts.trials, opts.seed));
      out.push_back(check_perturbation_bounds(ModelKind::Mpgnn, opts.trials, opts.seed));
    } else if (c == "structural") {
      out.push_back(check_structural_lemmas(opts.structural_trials, opts.seed));
    } else if (c == "concentration") {
      out.push_back(check_concentration(8, 1.0, 2, opts.samples, opts.seed));
    } else if (c == "equivalences") {
      out.push_back(check_equivalences(opts.seed));
    } else {
      throw ConfigError("unknown check '" + c +
                        "' (expected perturbation, structural, concentration, equivalences)");
    }
  }
  return out;
}

namespace {

std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, kNotApplicable};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(xs.size() - 1))};
}

std::string fmt(double v, int precision = 6) {
  if (std::isnan(v)) return "";
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

}  // namespace

std::vector<SummaryRow> summarize(const std::vector<BoundReport>& reports) {
  std::map<std::size_t, std::pair<std::vector<double>, std::vector<double>>> by_depth;
  for (const BoundReport& r : reports) {
    auto& [pb, rad] = by_depth[r.l];
    pb.push_back(r.pacbayes.log_value);
    if (r.has_rademacher) rad.push_back(r.rademacher.log_value);
  }
  std::vector<SummaryRow> rows;
  for (const auto& [l, vals] : by_depth) {
    SummaryRow row;
    row.l = l;
    row.runs = vals.first.size();
    std::tie(row.pacbayes_mean, row.pacbayes_std) = mean_std(vals.first);
    if (!vals.second.empty()) std::tie(row.rademacher_mean, row.rademacher_std) = mean_std(vals.second);
    rows.push_back(row);
  }
  return rows;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
  std::ostringstream os;
  os << "l,runs,pacbayes_log_mean,pacbayes_log_std,rademacher_log_mean,rademacher_log_std\n";
  for (const SummaryRow& r : rows)
    os << r.l << ',' << r.runs << ',' << fmt(r.pacbayes_mean, 10) << ',' << fmt(r.pacbayes_std, 10)
       << ',' << fmt(r.rademacher_mean, 10) << ',' << fmt(r.rademacher_std, 10) << '\n';
  return os.str();
}

std::string summary_table(const std::string& dataset, const std::vector<SummaryRow>& rows) {
  const auto cell = [](double mean, double sd) {
    if (std::isnan(mean)) return std::string("-");
    std::ostringstream os;
    os << std::fixed << std::setprecision(2) << mean;
    if (!std::isnan(sd)) os << " ± " << std::setprecision(2) << sd;
    return os.str();
  };
  std::ostringstream os;
  os << dataset << " (log bound values)\n";
  os << std::left << std::setw(4) << "l" << std::setw(20) << "Rademacher" << "PAC-Bayes\n";
  for (const SummaryRow& r : rows)
    os << std::left << std::setw(4) << r.l << std::setw(20)
       << cell(r.rademacher_mean, r.rademacher_std) << cell(r.pacbayes_mean, r.pacbayes_std) << '\n';
  return os.str();
}

CompareResult cmd_compare(const ExperimentSpec& spec) {
  spec.validate();
  const Dataset ds = load_experiment_dataset(spec);
  const fs::path runs_dir = spec.out / "runs";
  fs::create_directories(runs_dir);

  struct Task {
    std::size_t depth;
    std::uint64_t seed;
  };
  std::vector<Task> tasks;
  for (std::size_t l : spec.depths)
    for (std::uint64_t s : spec.seeds) tasks.push_back({l, s});

  std::vector<BoundReport> reports(tasks.size());
  std::vector<std::exception_ptr> errors(tasks.size());
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      try {
        const TrainResult tr = cmd_train(spec, ds, tasks[i].depth, tasks[i].seed);
        reports[i] = cmd_bounds(ds, tr.weights, spec.gamma, tasks[i].seed);
        const std::string stem = run_stem(spec, ds.name, tasks[i].depth, tasks[i].seed);
        write_file_atomic(runs_dir / (stem + ".csv"), reports[i].csv_row() + "\n");
        write_file_atomic(runs_dir / (stem + ".json"), reports[i].to_json().dump(2) + "\n");
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t nthreads = std::min(spec.jobs, tasks.size());
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors)
    if (e) std::rethrow_exception(e);

  std::string merged = BoundReport::csv_header() + "\n";
  for (const BoundReport& r : reports) merged += r.csv_row() + "\n";
  write_file_atomic(spec.out / "compare.csv", merged);

  CompareResult res;
  res.summary = summarize(reports);
  res.reports = std::move(reports);
  write_file_atomic(spec.out / "summary.csv", summary_csv(res.summary));
  return res;
}

}  // namespace gnncert

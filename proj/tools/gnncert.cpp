#include <cstdlib>
#include <iostream>

#include <CLI11.hpp>

#include "gnncert/dataset_io.hpp"
#include "gnncert/error.hpp"
#include "gnncert/experiment.hpp"

using namespace gnncert;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitHypothesis = 3;
constexpr int kExitVerification = 4;

struct DataFlags {
  std::string dataset;
  std::string preset;
  std::string tu_dir;
  std::size_t max_graphs = 0;
  bool append_ones = false;
  std::uint64_t data_seed = 0;
};

struct RunFlags {
  std::string model = "mpgnn";
  std::vector<std::size_t> depths{2};
  std::size_t hidden = 128;
  int epochs = 0;
  double lr = 1e-2;
  std::size_t batch = 128;
  double gamma = 1.0;
  std::string seeds;
  std::size_t jobs = 1;
  std::string out = "out";
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--dataset", f.dataset, "Preset name, dataset JSON path, or TU prefix with --tu-dir");
  cmd->add_option("--preset", f.preset, "Synthetic preset (ER-1..ER-4, SBM-1, SBM-2)");
  cmd->add_option("--tu-dir", f.tu_dir, "Directory holding a TU-format dataset");
  cmd->add_option("--max-graphs", f.max_graphs, "Keep at most this many graphs (0 = all)");
  cmd->add_flag("--append-ones", f.append_ones, "Append a constant-1 feature column");
  cmd->add_option("--data-seed", f.data_seed, "Seed for dataset generation / subsampling");
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--model", f.model, "gcn or mpgnn")->check(CLI::IsMember({"gcn", "mpgnn"}));
  cmd->add_option("--depth", f.depths, "Depth l (repeatable or comma separated)")->delimiter(',');
  cmd->add_option("--hidden", f.hidden, "Hidden width");
  cmd->add_option("--epochs", f.epochs, "Epochs (default 200 synthetic, 50 TU)");
  cmd->add_option("--lr", f.lr, "Adam learning rate");
  cmd->add_option("--batch", f.batch, "Minibatch size");
  cmd->add_option("--gamma", f.gamma, "Margin");
  cmd->add_option("--seeds", f.seeds, "Seed list, e.g. 0,1,2 or 0-2 (env GNNCERT_SEED)");
  cmd->add_option("--jobs", f.jobs, "Parallel (depth, seed) runs");
  cmd->add_option("--out", f.out, "Output directory");
}

std::vector<std::uint64_t> resolve_seeds(const std::string& flag) {
  if (!flag.empty()) return parse_seed_list(flag);
  if (const char* env = std::getenv("GNNCERT_SEED"); env && *env) return parse_seed_list(env);
  return {0};
}

ExperimentSpec make_spec(const DataFlags& d, const RunFlags& r) {
  ExperimentSpec spec;
  if (!d.dataset.empty() && !d.preset.empty())
    throw ConfigError("give either --dataset or --preset, not both");
  spec.dataset = d.dataset.empty() ? d.preset : d.dataset;
  if (!d.tu_dir.empty()) spec.tu_dir = d.tu_dir;
  if (d.max_graphs > 0) spec.max_graphs = d.max_graphs;
  spec.append_ones = d.append_ones;
  spec.data_seed = d.data_seed;
  spec.model = parse_model_kind(r.model);
  spec.depths = r.depths;
  spec.hidden = r.hidden;
  if (r.epochs != 0) spec.epochs = r.epochs;
  spec.lr = r.lr;
  spec.batch = r.batch;
  spec.gamma = r.gamma;
  spec.seeds = resolve_seeds(r.seeds);
  spec.jobs = r.jobs;
  spec.out = r.out;
  spec.validate();
  return spec;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gnncert: GNN training and generalization-bound certificates"};
  app.require_subcommand(1);

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate a synthetic dataset");
  std::string gen_preset, gen_out = "dataset.json", gen_seeds;
  std::size_t gen_nodes = 0, gen_graphs = 200, gen_dim = 16;
  double gen_p = 0.0;
  std::vector<std::size_t> gen_sizes;
  std::vector<double> gen_probs;
  gen->add_option("--preset", gen_preset, "Preset name");
  gen->add_option("--nodes", gen_nodes, "Custom Erdos-Renyi: node count");
  gen->add_option("--p", gen_p, "Custom Erdos-Renyi: edge probability");
  gen->add_option("--sizes", gen_sizes, "Custom block model: block sizes")->delimiter(',');
  gen->add_option("--probs", gen_probs, "Custom block model: row-major probability matrix")
      ->delimiter(',');
  gen->add_option("--graphs", gen_graphs, "Custom: number of graphs");
  gen->add_option("--feature-dim", gen_dim, "Custom: feature dimension");
  gen->add_option("--seeds", gen_seeds, "Seed (first entry used; env GNNCERT_SEED)");
  gen->add_option("--out", gen_out, "Output JSON path");

  // train
  auto* train_cmd = app.add_subcommand("train", "Train a model, write checkpoint and history");
  DataFlags train_data;
  RunFlags train_run;
  add_data_flags(train_cmd, train_data);
  add_run_flags(train_cmd, train_run);

  // bounds
  auto* bounds_cmd = app.add_subcommand("bounds", "Compute certificates for a checkpoint");
  DataFlags bounds_data;
  std::string checkpoint, bounds_out, bounds_seeds;
  double bounds_gamma = 1.0;
  add_data_flags(bounds_cmd, bounds_data);
  bounds_cmd->add_option("--checkpoint", checkpoint, "Checkpoint JSON")->required();
  bounds_cmd->add_option("--gamma", bounds_gamma, "Margin");
  bounds_cmd->add_option("--seeds", bounds_seeds, "Seed recorded in the report");
  bounds_cmd->add_option("--out", bounds_out, "Report JSON path (CSV row goes to stdout)");

  // verify
  auto* verify_cmd = app.add_subcommand("verify", "Run the inequality property checks");
  VerifyOptions vopts;
  std::string verify_seeds, verify_out;
  verify_cmd->add_option("--check", vopts.checks,
                         "perturbation, structural, concentration, equivalences (default all)")
      ->delimiter(',');
  verify_cmd->add_option("--trials", vopts.trials, "Perturbation trials per model");
  verify_cmd->add_option("--structural-trials", vopts.structural_trials, "Structural trials");
  verify_cmd->add_option("--samples", vopts.samples, "Concentration samples");
  verify_cmd->add_option("--seeds", verify_seeds, "Seed (first entry used; env GNNCERT_SEED)");
  verify_cmd->add_option("--out", verify_out, "Write the reports as a JSON array");

  // compare
  auto* compare_cmd = app.add_subcommand("compare", "Train over depths and seeds, compare bounds");
  DataFlags cmp_data;
  RunFlags cmp_run;
  cmp_run.depths = {2, 4};
  cmp_run.model = "mpgnn";
  add_data_flags(compare_cmd, cmp_data);
  add_run_flags(compare_cmd, cmp_run);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      const std::uint64_t seed = resolve_seeds(gen_seeds).front();
      Dataset ds;
      if (!gen_preset.empty()) {
        ds = cmd_gen_data(gen_preset, seed, gen_out);
      } else {
        SyntheticSpec spec;
        spec.num_graphs = gen_graphs;
        spec.feature_dim = gen_dim;
        if (!gen_sizes.empty()) {
          spec.name = "SBM-custom";
          spec.kind = SyntheticSpec::Kind::BlockModel;
          spec.sizes = gen_sizes;
          const std::size_t k = gen_sizes.size();
          if (gen_probs.size() != k * k)
            throw ConfigError("--probs needs " + std::to_string(k * k) + " entries");
          spec.probs = Matrix(k, k, gen_probs);
          spec.nodes = 0;
          for (std::size_t s : gen_sizes) spec.nodes += s;
        } else if (gen_nodes > 0) {
          spec.name = "ER-custom";
          spec.nodes = gen_nodes;
          spec.p = gen_p;
        } else {
          throw ConfigError("gen-data needs --preset, --nodes/--p, or --sizes/--probs");
        }
        spec.validate();
        ds = cmd_gen_data(spec, seed, gen_out);
      }
      std::cout << "wrote " << ds.size() << " graphs (" << ds.name << ") to " << gen_out << '\n';
    } else if (*train_cmd) {
      const ExperimentSpec spec = make_spec(train_data, train_run);
      const Dataset ds = load_experiment_dataset(spec);
      for (std::size_t l : spec.depths) {
        for (std::uint64_t seed : spec.seeds) {
          const TrainResult res = cmd_train(spec, ds, l, seed);
          std::cout << run_stem(spec, ds.name, l, seed) << ": final train_ce "
                    << res.history.train_ce.back() << ", test_error "
                    << res.history.test_error.back() << '\n';
        }
      }
    } else if (*bounds_cmd) {
      RunFlags r;
      r.seeds = bounds_seeds;
      ExperimentSpec spec = make_spec(bounds_data, r);
      const Dataset ds = load_experiment_dataset(spec);
      const ModelWeights w = read_checkpoint(checkpoint);
      const BoundReport rep = cmd_bounds(ds, w, bounds_gamma, spec.seeds.front());
      std::cout << BoundReport::csv_header() << '\n' << rep.csv_row() << '\n';
      if (!bounds_out.empty()) write_file_atomic(bounds_out, rep.to_json().dump(2) + "\n");
    } else if (*verify_cmd) {
      vopts.seed = resolve_seeds(verify_seeds).front();
      const std::vector<CheckReport> reports = cmd_verify(vopts);
      nlohmann::json all = nlohmann::json::array();
      bool ok = true;
      for (const CheckReport& r : reports) {
        std::cout << r.to_json().dump() << '\n';
        all.push_back(r.to_json());
        ok = ok && r.passed();
      }
      if (!verify_out.empty()) write_file_atomic(verify_out, all.dump(2) + "\n");
      if (!ok) return kExitVerification;
    } else if (*compare_cmd) {
      const ExperimentSpec spec = make_spec(cmp_data, cmp_run);
      const CompareResult res = cmd_compare(spec);
      std::cout << summary_table(res.reports.front().dataset, res.summary);
      std::cout << "rows: " << (spec.out / "compare.csv").string() << '\n';
    }
  } catch (const HypothesisViolation& e) {
    std::cerr << "hypothesis violation: " << e.what() << '\n';
    return kExitHypothesis;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const FormatError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "dimension error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

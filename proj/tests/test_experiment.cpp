#include <sys/wait.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "gnncert/dataset_io.hpp"
#include "gnncert/error.hpp"
#include "gnncert/experiment.hpp"

using namespace gnncert;
namespace fs = std::filesystem;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("gnncert_exp_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(GNNCERT_CLI) + " " + args + " >/dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

/// Small synthetic dataset written to disk so experiments stay fast.
fs::path small_dataset(const fs::path& dir) {
  SyntheticSpec spec;
  spec.name = "mini";
  spec.nodes = 12;
  spec.p = 0.3;
  spec.num_graphs = 24;
  spec.feature_dim = 4;
  const fs::path path = dir / "mini.json";
  cmd_gen_data(spec, 1, path);
  return path;
}

}  // namespace

TEST(Seeds, Parse) {
  EXPECT_EQ(parse_seed_list("0,1,2"), (std::vector<std::uint64_t>{0, 1, 2}));
  EXPECT_EQ(parse_seed_list("3-5"), (std::vector<std::uint64_t>{3, 4, 5}));
  EXPECT_EQ(parse_seed_list("7,1-2"), (std::vector<std::uint64_t>{7, 1, 2}));
  EXPECT_THROW(parse_seed_list("a"), ConfigError);
  EXPECT_THROW(parse_seed_list("5-3"), ConfigError);
  EXPECT_THROW(parse_seed_list(""), ConfigError);
}

TEST(Spec, Validation) {
  ExperimentSpec s;
  s.dataset = "ER-1";
  EXPECT_NO_THROW(s.validate());
  EXPECT_EQ(s.resolved_epochs(), 200);
  s.tu_dir = "/nowhere";
  EXPECT_EQ(s.resolved_epochs(), 50);
  s.seeds.clear();
  EXPECT_THROW(s.validate(), ConfigError);
  s.seeds = {0};
  s.depths = {1};
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(Summary, SampleStdOverRuns) {
  std::vector<BoundReport> reports(3);
  const double pb[] = {1.0, 2.0, 4.0}, rad[] = {3.0, 3.0, 6.0};
  for (int i = 0; i < 3; ++i) {
    reports[i].l = 2;
    reports[i].pacbayes.log_value = pb[i];
    reports[i].has_rademacher = true;
    reports[i].rademacher.log_value = rad[i];
  }
  BoundReport single;
  single.l = 4;
  single.pacbayes.log_value = 9.0;
  reports.push_back(single);
  const auto rows = summarize(reports);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0].runs, 3u);
  EXPECT_NEAR(rows[0].pacbayes_mean, 7.0 / 3.0, 1e-15);
  // Sample variance of {1,2,4}: ((4/3)² + (1/3)² + (5/3)²) / 2 = 7/3.
  EXPECT_NEAR(rows[0].pacbayes_std, std::sqrt(7.0 / 3.0), 1e-15);
  EXPECT_NEAR(rows[0].rademacher_std, std::sqrt(3.0), 1e-15);
  EXPECT_TRUE(std::isnan(rows[1].pacbayes_std));
  EXPECT_TRUE(std::isnan(rows[1].rademacher_mean));
  EXPECT_NE(summary_table("X", rows).find("±"), std::string::npos);
}

TEST(GenData, PresetBytesIdenticalAndUnknownPreset) {
  const fs::path dir = fresh_dir("gen");
  const Dataset ds = cmd_gen_data("ER-1", 3, dir / "a.json");
  EXPECT_EQ(ds.size(), 200u);
  EXPECT_EQ(ds.feature_dim, 16u);
  cmd_gen_data("ER-1", 3, dir / "b.json");
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
  EXPECT_THROW(cmd_gen_data("ER-9", 3, dir / "c.json"), ConfigError);
}

TEST(Compare, WritesMergedRowsIdempotently) {
  const fs::path dir = fresh_dir("compare");
  ExperimentSpec spec;
  spec.dataset = small_dataset(dir).string();
  spec.depths = {2, 3};
  spec.seeds = {0, 1};
  spec.hidden = 8;
  spec.epochs = 3;
  spec.batch = 8;
  spec.out = dir / "out";
  const CompareResult a = cmd_compare(spec);
  ASSERT_EQ(a.reports.size(), 4u);
  EXPECT_EQ(a.reports[0].l, 2u);
  EXPECT_EQ(a.reports[1].seed, 1u);
  EXPECT_EQ(a.reports[2].l, 3u);
  const std::string first = slurp(spec.out / "compare.csv");
  EXPECT_EQ(std::count(first.begin(), first.end(), '\n'), 5);
  EXPECT_EQ(first.rfind(BoundReport::csv_header(), 0), 0u);

  spec.jobs = 2;
  cmd_compare(spec);
  EXPECT_EQ(slurp(spec.out / "compare.csv"), first);
  EXPECT_TRUE(fs::exists(spec.out / "summary.csv"));
  EXPECT_TRUE(fs::exists(spec.out / "mini_mpgnn_l3_s1.history.csv"));
}

TEST(Bounds, CheckpointReportMatchesCompare) {
  const fs::path dir = fresh_dir("bounds");
  ExperimentSpec spec;
  spec.dataset = small_dataset(dir).string();
  spec.model = ModelKind::Gcn;
  spec.hidden = 8;
  spec.epochs = 2;
  spec.out = dir;
  const Dataset ds = load_experiment_dataset(spec);
  const TrainResult tr = cmd_train(spec, ds, 2, 5);
  const ModelWeights w = read_checkpoint(dir / (run_stem(spec, ds.name, 2, 5) + ".ckpt.json"));
  EXPECT_EQ(cmd_bounds(ds, w, 1.0, 5).csv_row(), cmd_bounds(ds, tr.weights, 1.0, 5).csv_row());
  EXPECT_EQ(cmd_bounds(ds, w, 1.0, 5).data.m, training_split(ds).size());
}

TEST(Cli, ExitCodes) {
  const fs::path dir = fresh_dir("cli");
  EXPECT_EQ(run_cli("gen-data --preset ER-9 --out " + (dir / "x.json").string()), 2);
  EXPECT_EQ(run_cli("gen-data --preset SBM-2 --out " + (dir / "s.json").string()), 0);
  EXPECT_EQ(run_cli("train --dataset " + (dir / "s.json").string() + " --depth 1"), 2);
  EXPECT_EQ(run_cli("verify --check bogus"), 2);
  EXPECT_EQ(run_cli("verify --check structural --structural-trials 20 --out " +
                    (dir / "v.json").string()),
            0);
  const auto report = nlohmann::json::parse(slurp(dir / "v.json"));
  EXPECT_EQ(report[0]["check"], "structural");
  EXPECT_EQ(run_cli("--no-such-flag"), 2);
}

TEST(Cli, TrainThenBounds) {
  const fs::path dir = fresh_dir("cli_tb");
  const std::string data = small_dataset(dir).string();
  ASSERT_EQ(run_cli("train --dataset " + data + " --model mpgnn --depth 3 --hidden 6 --epochs 2 "
                    "--seeds 4 --out " + dir.string()),
            0);
  const fs::path ckpt = dir / "mini_mpgnn_l3_s4.ckpt.json";
  ASSERT_TRUE(fs::exists(ckpt));
  EXPECT_EQ(run_cli("bounds --dataset " + data + " --checkpoint " + ckpt.string() + " --out " +
                    (dir / "r.json").string()),
            0);
  const auto rep = nlohmann::json::parse(slurp(dir / "r.json"));
  EXPECT_EQ(rep["model"], "mpgnn");
  EXPECT_EQ(rep["l"], 3);
  EXPECT_TRUE(rep.contains("rademacher_case"));
}

TEST(Cli, EnvSeedFallback) {
  const fs::path dir = fresh_dir("cli_env");
  ::setenv("GNNCERT_SEED", "12", 1);
  const int code = run_cli("gen-data --preset ER-2 --out " + (dir / "a.json").string());
  ::unsetenv("GNNCERT_SEED");
  ASSERT_EQ(code, 0);
  cmd_gen_data("ER-2", 12, dir / "b.json");
  EXPECT_EQ(slurp(dir / "a.json"), slurp(dir / "b.json"));
}

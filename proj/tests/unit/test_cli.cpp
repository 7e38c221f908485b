#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "splitlab/cli/commands.hpp"
#include "splitlab/cli/config.hpp"
#include "splitlab/cli/results.hpp"
#include "splitlab/protocols/checkpoint.hpp"

using namespace splitlab;
using namespace splitlab::cli;
namespace fs = std::filesystem;

namespace {

const fs::path kSource = SPLITLAB_SOURCE_DIR;
const fs::path kData = SPLITLAB_TEST_DATA_DIR;

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) {
  std::ofstream out(p);
  out << text;
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / "splitlab_cli_tests";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  fs::remove_all(p);
  return p;
}

std::string config_error(const std::string& toml) {
  try {
    parse_config(toml).validate();
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

const char* kMinimal = R"(
seed = 1
methods = ["centralized"]
[model]
dims = [4, 3, 1]
)";

int call(std::vector<std::string> args, std::string* out_text = nullptr,
         std::string* err_text = nullptr) {
  args.insert(args.begin(), "splitlab");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  std::ostringstream out, err;
  const int code = main_entry(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return code;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

}  // namespace

// Config parsing ------------------------------------------------------------

TEST(Config, SmokeConfigLoads) {
  const auto cfg = load_config(kSource / "configs" / "smoke.toml");
  EXPECT_EQ(cfg.seed, 42u);
  EXPECT_EQ(cfg.methods.size(), 10u);
  EXPECT_EQ(cfg.dims, (std::vector<std::size_t>{16, 8, 1}));
  EXPECT_EQ(cfg.cut_index, 2u);
  EXPECT_EQ(cfg.tail_len, 1u);
  EXPECT_EQ(cfg.train.epochs, 10u);
  EXPECT_EQ(cfg.train.batch_size, 32u);
  EXPECT_DOUBLE_EQ(cfg.train.optimizer.learning_rate, 0.01);
  EXPECT_NO_THROW(cfg.validate());
}

TEST(Config, DefaultsWhenTablesAreOmitted) {
  const auto cfg = parse_config(kMinimal);
  EXPECT_EQ(cfg.train.epochs, proto::TrainConfig{}.epochs);
  EXPECT_EQ(cfg.partition.train_total, 2000u);
  EXPECT_EQ(cfg.data.source, DataSource::synthetic);
  EXPECT_FALSE(cfg.cut_index.has_value());
}

TEST(Config, ErrorsNameTheField) {
  EXPECT_NE(config_error(std::string(kMinimal) + "bogus = 3\n").find("bogus"), std::string::npos);
  EXPECT_NE(config_error("[model]\ndims = [4, 3, 1]\nwidth = 2\n").find("model.width"),
            std::string::npos);
  EXPECT_NE(config_error("[model]\ndims = [4, 3, 2]\n").find("model.dims"), std::string::npos);
  EXPECT_NE(config_error("[model]\ndims = \"wide\"\n").find("model.dims"), std::string::npos);
  EXPECT_NE(config_error(std::string(kMinimal) + "[training]\nbatch_size = 0\n")
                .find("training.batch_size"),
            std::string::npos);
  EXPECT_NE(config_error(std::string(kMinimal) + "[training]\noptimizer = \"rmsprop\"\n")
                .find("training.optimizer"),
            std::string::npos);
  EXPECT_NE(config_error(std::string(kMinimal) + "[partition]\neval_prevalence = 0.0\n")
                .find("partition.eval_prevalence"),
            std::string::npos);
  EXPECT_NE(config_error("methods = [\"sl_fast\"]\n[model]\ndims = [4, 3, 1]\n").find("sl_fast"),
            std::string::npos);
  EXPECT_NE(config_error("[model\n").find("line 1"), std::string::npos);
}

TEST(Config, SplitMethodsNeedACut) {
  EXPECT_EQ(config_error(kMinimal), "");
  const std::string split = "methods = [\"sl_ls_ac\"]\n[model]\ndims = [4, 3, 1]\n";
  EXPECT_NE(config_error(split).find("cut_index"), std::string::npos);
  EXPECT_EQ(config_error(split + "cut_index = 2\n"), "");
  EXPECT_NE(config_error(split + "cut_index = 4\n").find("cut_index"), std::string::npos);

  const std::string nls = "methods = [\"sflv3_nls\"]\n[model]\ndims = [4, 3, 1]\ncut_index = 2\n";
  EXPECT_NE(config_error(nls).find("tail_len"), std::string::npos);
  EXPECT_EQ(config_error(nls + "tail_len = 1\n"), "");
  EXPECT_NE(config_error(nls + "tail_len = 2\n").find("tail_len"), std::string::npos);
}

TEST(Config, CsvPathResolvesAgainstConfigFile) {
  const auto cfg = load_config(kData / "tiny.toml");
  EXPECT_EQ(cfg.data.source, DataSource::csv);
  EXPECT_EQ(cfg.data.csv_path, kData / "tiny.csv");
}

// Exit codes ---------------------------------------------------------------

TEST(ExitCodes, ConfigProblemsExitTwo) {
  const fs::path out = scratch("exit.csv");
  std::string err;
  EXPECT_EQ(call({"run", "--config", (kData / "missing_cut.toml").string(), "--out", out.string()},
                 nullptr, &err),
            kExitConfig);
  EXPECT_NE(err.find("cut_index"), std::string::npos);
  EXPECT_FALSE(fs::exists(out));
  EXPECT_EQ(call({"run", "--config", (kSource / "configs" / "smoke.toml").string(), "--method",
                  "sl_turbo", "--out", out.string()}),
            kExitConfig);
  EXPECT_EQ(call({"run", "--config", (kData / "absent.toml").string()}), kExitConfig);
  EXPECT_EQ(call({"run"}), kExitConfig);
  EXPECT_EQ(call({}), kExitConfig);
}

TEST(ExitCodes, RuntimeFailureExitsOne) {
  const fs::path out = scratch("runtime.csv");
  std::string err;
  EXPECT_EQ(call({"run", "--config", (kData / "tiny.toml").string(), "--out", out.string()},
                 nullptr, &err),
            kExitRuntime);
  EXPECT_NE(err.find("run failed"), std::string::npos);
}

TEST(ExitCodes, HelpExitsZero) {
  std::string out;
  EXPECT_EQ(call({"--help"}, &out), kExitOk);
  EXPECT_NE(out.find("run"), std::string::npos);
}

// Results files -------------------------------------------------------------

TEST(Results, HeaderMatchesGoldenFile) {
  EXPECT_EQ(csv_header() + "\n", slurp(kData / "results_header.csv"));
}

TEST(Results, RowsRoundTripExactly) {
  proto::MetricsReport r;
  r.method = Method::sflv3_nls;
  r.seed = 9;
  r.auroc = 0.1 + 0.2;
  r.wall_s_per_epoch = 1.0 / 3.0;
  r.bytes_train = 123456789012ull;
  r.flops_avg_client = 2.5;
  const fs::path p = scratch("roundtrip.csv");
  append_results(p, std::span(&r, 1));
  append_results(p, std::span(&r, 1));
  const auto t = read_results(p);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][0], "sflv3_nls");
  EXPECT_EQ(std::stod(t.rows[0][2]), r.auroc);
  EXPECT_EQ(std::stod(t.rows[1][7]), r.wall_s_per_epoch);
  EXPECT_EQ(t.rows[1][8], "123456789012");
}

TEST(Results, SchemaDriftIsRejected) {
  const fs::path p = scratch("drift.csv");
  write(p, "method,seed,auroc\ncentralized,1,0.5\n");
  proto::MetricsReport r;
  EXPECT_THROW(append_results(p, std::span(&r, 1)), SchemaError);
  EXPECT_THROW(read_results(p), SchemaError);
  std::string err;
  EXPECT_EQ(call({"report", "--in", p.string()}, nullptr, &err), kExitConfig);
  EXPECT_NE(err.find("schema"), std::string::npos);

  const fs::path short_row = scratch("short_row.csv");
  write(short_row, csv_header() + "\ncentralized,1,0.5\n");
  EXPECT_THROW(read_results(short_row), SchemaError);
  const fs::path text_cell = scratch("text_cell.csv");
  write(text_cell, csv_header() + "\ncentralized,1,high,1,1,1,1,1,1,1,1,1,1,1,1\n");
  EXPECT_THROW(read_results(text_cell), SchemaError);
}

TEST(Report, SingleRowTable) {
  const fs::path p = scratch("single.csv");
  write(p, csv_header() + "\nfl,7,0.75,0.5,0.25,0.125,3,0.01,100,0,0,0,42,9,2\n");
  std::string out;
  EXPECT_EQ(call({"report", "--in", p.string()}, &out), kExitOk);
  const auto l = lines(out);
  ASSERT_EQ(l.size(), 3u);
  EXPECT_EQ(l[0].substr(0, 6), "method");
  EXPECT_EQ(l[1].substr(0, 2), "fl");
  EXPECT_NE(l[1].find("0.75*"), std::string::npos);
  EXPECT_EQ(l[2], "* best value in column");
}

TEST(Report, TiesAreAllFlagged) {
  ResultTable t;
  t.columns = csv_columns();
  t.rows = {{"sl_ls_ac", "1", "0.9", "0.5", "0.4", "0.3", "2", "0.02", "500", "10", "0", "7", "1", "0", "1"},
            {"sl_ls_am", "1", "0.9", "0.6", "0.4", "0.2", "2", "0.01", "500", "10", "0", "7", "2", "0", "2"},
            {"fl", "1", "0.8", "0.6", "0.1", "0.3", "2", "0.03", "800", "0", "0", "0", "9", "5", "2"}};
  const auto f = best_flags(t);
  EXPECT_TRUE(f[0][2] && f[1][2] && !f[2][2]);     // auroc tie
  EXPECT_TRUE(!f[0][3] && f[1][3] && f[2][3]);     // auprc tie
  EXPECT_TRUE(!f[0][7] && f[1][7] && !f[2][7]);    // wall time is a cost
  EXPECT_TRUE(f[0][8] && f[1][8] && !f[2][8]);     // bytes tie
  EXPECT_TRUE(!f[0][9] && !f[1][9] && f[2][9]);    // zero eval bytes wins
  for (const auto& row : f) EXPECT_FALSE(row[0] || row[1] || row[14]);
}

TEST(Report, JsonOutput) {
  const fs::path p = scratch("json_in.csv");
  write(p, csv_header() + "\nfl,7,0.75,0.5,0.25,0.125,3,0.01,100,0,0,0,42,9,2\n" +
               "centralized,7,0.5,0.5,0.5,0.5,3,0.02,0,0,0,80,0,0,3\n");
  const fs::path j = scratch("out.json");
  EXPECT_EQ(call({"report", "--in", p.string(), "--json", j.string()}), kExitOk);
  const auto doc = nlohmann::json::parse(slurp(j));
  ASSERT_EQ(doc.size(), 2u);
  EXPECT_EQ(doc[0]["method"], "fl");
  EXPECT_EQ(doc[0]["seed"], 7);
  EXPECT_EQ(doc[0]["auroc"], 0.75);
  EXPECT_EQ(doc[1]["best"], nlohmann::json({"auprc", "f1", "kappa", "bytes_train", "bytes_eval",
                                            "bytes_model_sync", "flops_avg_client",
                                            "flops_averaging"}));
}

// End to end ------------------------------------------------------------------

TEST(EndToEnd, SmokeRunWritesOneRowPerMethodDeterministically) {
  const fs::path out = scratch("smoke.csv");
  const fs::path ckpt = scratch("ckpt");
  const fs::path cfg_path = scratch("smoke_ckpt.toml");
  write(cfg_path, "checkpoint_dir = \"" + ckpt.generic_string() + "\"\n" +
                      slurp(kSource / "configs" / "smoke.toml"));
  std::string stdout_text;
  ASSERT_EQ(call({"run", "--config", cfg_path.string(), "--out", out.string()}, &stdout_text),
            kExitOk);
  ASSERT_EQ(call({"run", "--config", cfg_path.string(), "--out", out.string()}), kExitOk);
  EXPECT_EQ(lines(stdout_text).size(), 10u);

  const auto t = read_results(out);
  ASSERT_EQ(t.rows.size(), 20u);
  for (std::size_t r = 0; r < 10; ++r) {
    EXPECT_EQ(t.rows[r][0], method_id(kAllMethods[r]));
    for (std::size_t c = 0; c < t.columns.size(); ++c) {
      if (t.columns[c] == "wall_s_per_epoch") continue;
      EXPECT_EQ(t.rows[r][c], t.rows[r + 10][c]) << t.rows[r][0] << " " << t.columns[c];
    }
  }
  for (Method m : kAllMethods) {
    const fs::path file = ckpt / (std::string(method_id(m)) + "_seed42.json");
    ASSERT_TRUE(fs::exists(file)) << file;
    EXPECT_NO_THROW(proto::load_checkpoint(file));
  }
}

TEST(EndToEnd, SeedOverrideChangesResults) {
  const fs::path out = scratch("seeds.csv");
  const std::string cfg = (kSource / "configs" / "smoke.toml").string();
  ASSERT_EQ(call({"run", "--config", cfg, "--method", "fl", "--out", out.string()}), kExitOk);
  ASSERT_EQ(call({"run", "--config", cfg, "--method", "fl", "--seed", "7", "--out", out.string()}),
            kExitOk);
  const auto t = read_results(out);
  ASSERT_EQ(t.rows.size(), 2u);
  EXPECT_EQ(t.rows[0][1], "42");
  EXPECT_EQ(t.rows[1][1], "7");
  EXPECT_NE(t.rows[0][2], t.rows[1][2]);
}

TEST(Timing, FederatedEpochsAreFasterThanSplitOnSmoke) {
  const auto setup = build_setup(load_config(kSource / "configs" / "smoke.toml"));
  // Minimum of several runs, so scheduler noise does not decide the ordering.
  auto fastest = [&](Method m) {
    double best = 1e9;
    for (int i = 0; i < 7; ++i) {
      const auto run = proto::run_method(m, setup);
      for (const auto& e : run.outcome.epochs) EXPECT_GT(e.wall_clock_seconds, 0.0);
      best = std::min(best, run.report.wall_s_per_epoch);
    }
    return best;
  };
  const double fl = fastest(Method::fl);
  const double sl = fastest(Method::sl_ls_ac);
  EXPECT_LT(fl, sl) << "fl " << fl << " s/epoch, sl_ls_ac " << sl << " s/epoch";
}

TEST(ExitCodes, MethodOverrideIsValidatedAfterwards) {
  const fs::path out = scratch("override.csv");
  EXPECT_EQ(call({"run", "--config", (kData / "missing_cut.toml").string(), "--method",
                  "centralized", "--out", out.string()}),
            kExitOk);
  EXPECT_EQ(read_results(out).rows.size(), 1u);
}

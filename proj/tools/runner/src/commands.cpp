#include "splitlab/cli/commands.hpp"

#include <fstream>
#include <ostream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "splitlab/cli/config.hpp"
#include "splitlab/cli/results.hpp"
#include "splitlab/errors.hpp"
#include "splitlab/protocols/checkpoint.hpp"

namespace splitlab::cli {

int run_command(const RunOptions& options, std::ostream& out, std::ostream& err) {
  ExperimentConfig config;
  try {
    config = load_config(options.config);
    if (options.seed) config.seed = *options.seed;
    if (options.method) {
      auto m = parse_method(*options.method);
      if (!m) throw ConfigError("--method: unknown method '" + *options.method + "'");
      config.methods = {*m};
    }
    config.validate();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  }

  try {
    const proto::ExperimentSetup setup = build_setup(config);
    std::vector<proto::MetricsReport> reports;
    for (Method m : config.methods) {
      proto::MethodRun run = proto::run_method(m, setup);
      const auto& r = run.report;
      out << fmt::format("{:<12} auroc={:.4f} auprc={:.4f} f1={:.4f} kappa={:.4f} best_epoch={}\n",
                         method_id(m), r.auroc, r.auprc, r.f1, r.kappa, r.best_epoch);
      if (config.checkpoint_dir && run.outcome.checkpoint) {
        std::filesystem::create_directories(*config.checkpoint_dir);
        proto::save_checkpoint(*run.outcome.checkpoint,
                               *config.checkpoint_dir /
                                   fmt::format("{}_seed{}.json", method_id(m), config.seed));
      }
      reports.push_back(r);
    }
    append_results(options.out, reports);
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "run failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int report_command(const ReportOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const ResultTable table = read_results(options.in);
    out << render_table(table);
    if (options.json) {
      std::ofstream json(*options.json);
      if (!json) throw std::runtime_error("cannot write " + options.json->string());
      json << render_json(table) << '\n';
    }
  } catch (const SchemaError& e) {
    err << "schema error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "report failed: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Split, federated and SplitFed training lab"};
  app.require_subcommand(1);

  RunOptions run;
  std::string method;
  std::uint64_t seed = 0;
  auto* run_cmd = app.add_subcommand("run", "Train the configured methods and append CSV rows");
  run_cmd->add_option("--config", run.config, "Experiment TOML file")->required();
  auto* method_opt = run_cmd->add_option("--method", method, "Run only this method id");
  auto* seed_opt = run_cmd->add_option("--seed", seed, "Override the config seed");
  run_cmd->add_option("--out", run.out, "Results CSV (appended)");

  ReportOptions report;
  std::string json_path;
  auto* report_cmd = app.add_subcommand("report", "Render a results CSV as a table");
  report_cmd->add_option("--in", report.in, "Results CSV")->required();
  auto* json_opt = report_cmd->add_option("--json", json_path, "Also write JSON here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << e.what() << '\n';
    return kExitConfig;
  }

  if (*run_cmd) {
    if (*method_opt) run.method = method;
    if (*seed_opt) run.seed = seed;
    return run_command(run, out, err);
  }
  if (*json_opt) report.json = json_path;
  return report_command(report, out, err);
}

}  // namespace splitlab::cli

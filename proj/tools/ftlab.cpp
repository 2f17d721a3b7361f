// Copyright (c) 2026 ftlab authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end. Stages are independently runnable and cacheable:
//   collect      record training corpora and the test grid
//   train        fit the static/dynamic model ensembles from recorded data
//   eval-ma      one-step force-prediction comparison of the two models
//   eval-control force-tracking comparison of dfc / oracle / vaicam
//   report       render a metrics CSV as an aligned text table
//   reproduce    all stages for every seed, plus pooled summaries
//
// Exit code 0 on success, 2 on configuration/input problems, 3 on numerical
// faults.

#include <cstdint>
#include <iostream>

#include <CLI11.hpp>

#include "ftlab/experiments.hpp"
#include "ftlab/kernels.hpp"
#include "ftlab/metrics.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 1;
  bool single_thread = false;
  unsigned threads = 0;
};

void add_common(CLI::App* cmd, CommonArgs& args, bool needs_out = true) {
  cmd->add_option("--config", args.config_path,
                  "Configuration file (defaults are built in)");
  cmd->add_option("--seed", args.seed, "Master seed");
  if (needs_out) cmd->add_option("--out", args.out_dir, "Output directory");
  cmd->add_flag("--single-thread", args.single_thread,
                "Force deterministic single-threaded execution");
  cmd->add_option("--threads", args.threads, "Worker thread count (0 = auto)");
}

ftlab::xp::ExperimentConfig resolve_config(const CommonArgs& args) {
  ftlab::xp::ExperimentConfig cfg =
      args.config_path.empty() ? ftlab::xp::default_config()
                               : ftlab::xp::load_config(args.config_path);
  if (args.threads != 0) cfg.threads = args.threads;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ftlab: a desk-scale laboratory for learned force tracking"};
  app.require_subcommand(1);

  CommonArgs args;
  std::string report_path;

  auto* collect = app.add_subcommand("collect", "Record corpora + test grid");
  add_common(collect, args);
  auto* train = app.add_subcommand("train", "Train the model ensembles");
  add_common(train, args);
  auto* eval_ma = app.add_subcommand("eval-ma", "Model prediction comparison");
  add_common(eval_ma, args);
  auto* eval_control =
      app.add_subcommand("eval-control", "Controller comparison");
  add_common(eval_control, args);
  auto* reproduce = app.add_subcommand("reproduce", "Run the full pipeline");
  add_common(reproduce, args);
  auto* report = app.add_subcommand("report", "Print a metrics CSV as text");
  report->add_option("csv", report_path, "Metrics CSV file")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (report->parsed()) {
      std::cout << ftlab::xp::table_to_text(
          ftlab::xp::read_table_csv(report_path));
      return 0;
    }

    const auto cfg = resolve_config(args);
    const unsigned threads =
        ftlab::xp::resolve_threads(cfg, args.single_thread);

    if (collect->parsed()) {
      ftlab::xp::stage_collect(cfg, args.seed, args.out_dir, threads);
    } else if (train->parsed()) {
      ftlab::xp::stage_train(cfg, args.seed, args.out_dir, threads);
    } else if (eval_ma->parsed()) {
      ftlab::xp::stage_eval_ma(cfg, args.seed, args.out_dir, threads);
    } else if (eval_control->parsed()) {
      ftlab::xp::stage_eval_control(cfg, args.seed, args.out_dir, threads);
    } else if (reproduce->parsed()) {
      ftlab::xp::reproduce(cfg, args.seed, args.out_dir, threads);
      std::cout << "wrote " << args.out_dir << " (kernels "
                << ftlab::kern::active().name << ", threads " << threads
                << ")\n";
    }
    return 0;
  } catch (const ftlab::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const ftlab::FormatError& e) {
    std::cerr << "format error: " << e.what() << '\n';
    return 2;
  } catch (const ftlab::InputError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
}

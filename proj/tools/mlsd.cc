// tools/mlsd.cc

// Copyright 2026  The MLSD Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

// Command-line driver: validate a config, run pipeline stages, print reports.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>

#include "mlsd/error.h"
#include "mlsd/experiment.h"
#include "mlsd/pipeline.h"

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kRuntime = 2, kStale = 3 };

int verbosity = 0;

void log(int level, const std::string &msg) {
  if (verbosity >= level) std::cerr << msg << '\n';
}

int print_diagnostics(const std::vector<mlsd::Diagnostic> &diags) {
  for (const auto &d : diags) std::cerr << d.code << ": " << d.message << '\n';
  return diags.empty() ? kOk : kValidation;
}

int cmd_validate(const std::string &config) {
  const auto diags = mlsd::validate_config(config);
  if (diags.empty()) log(1, "config is valid");
  return print_diagnostics(diags);
}

int cmd_run(const std::string &config, const std::string &stage_name, bool serial) {
  const auto diags = mlsd::validate_config(config);
  if (!diags.empty()) return print_diagnostics(diags);
  const mlsd::ExperimentConfig cfg = mlsd::load_config(config);
  const mlsd::Stage stage = mlsd::parse_stage(stage_name);
  log(1, "output directory: " + cfg.output_dir.string());
  log(2, "config hash: " + cfg.config_hash);
  const auto outcomes = mlsd::run_stage(cfg, stage, serial ? mlsd::Exec::Serial : mlsd::Exec::Parallel);
  for (const auto &o : outcomes) {
    std::cout << mlsd::stage_name(o.stage) << ": " << (o.cache_hit ? "cached" : "done") << '\n';
    for (const auto &p : o.outputs) log(1, "  " + p.string());
  }
  return kOk;
}

int cmd_report(const std::string &config) {
  const mlsd::ExperimentConfig cfg = mlsd::load_config(config);
  const auto path = cfg.output_dir / "report.json";
  std::ifstream in(path);
  if (!in) throw mlsd::Error("MISSING_REPORT", "no report at " + path.string() + "; run the evaluate stage");
  const auto j = nlohmann::json::parse(in);
  log(2, "config hash: " + j.value("config_hash", std::string("?")));
  std::cout << mlsd::format_report(mlsd::report_from_json(j));
  return kOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Metric-learning few-shot sample selection for stance transfer"};
  app.require_subcommand(1);
  app.add_flag("-v,--verbose", verbosity, "Increase logging (repeatable)");

  std::string config, stage = "all";
  bool serial = false;
  auto *validate = app.add_subcommand("validate", "Check a config file and its inputs");
  validate->add_option("config", config, "Experiment config (JSON)")->required();
  auto *run = app.add_subcommand("run", "Run one pipeline stage or all of them");
  run->add_option("config", config, "Experiment config (JSON)")->required();
  run->add_option("-s,--stage", stage, "mine, train-metric, select, evaluate or all")
      ->check(CLI::IsMember({"mine", "train-metric", "select", "evaluate", "all"}));
  run->add_flag("--serial", serial, "Use the single-threaded kernels");
  auto *report = app.add_subcommand("report", "Print the evaluation report");
  report->add_option("config", config, "Experiment config (JSON)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError &e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kValidation;
  }

  try {
    if (*validate) return cmd_validate(config);
    if (*run) return cmd_run(config, stage, serial);
    return cmd_report(config);
  } catch (const mlsd::Error &e) {
    std::cerr << e.code() << ": " << e.what() << '\n';
    if (e.code() == "STALE_ARTIFACT") return kStale;
    if (e.code() == "BAD_CONFIG" || e.code() == "CONFIG_PARSE" || e.code() == "MISSING_FIELD") return kValidation;
    return kRuntime;
  } catch (const std::exception &e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntime;
  }
}

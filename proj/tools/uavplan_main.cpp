// Copyright 2026 The uavplan Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at

//     https://www.apache.org/licenses/LICENSE-2.0

// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <CLI11.hpp>

#include "uavplan/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"uavplan: joint UAV trajectory and uplink power planning"};
  app.require_subcommand(1);

  uavplan::io::RunConfig rc;

  auto add_planner = [&](const char* name, const char* desc) {
    CLI::App* cmd = app.add_subcommand(name, desc);
    cmd->add_option("--scenario", rc.scenario_path, "scenario JSON file or directory")
        ->required();
    cmd->add_option("--out", rc.out_dir, "output directory")->required();
    cmd->add_option("--max-iters", rc.max_iters, "SCA iteration cap");
    cmd->add_option("--tol", rc.tol, "SCA relative objective tolerance");
    cmd->add_option("--subsolver-tol", rc.subsolver_tol, "interior-point KKT tolerance");
    cmd->add_option("--plim-w", rc.plim_w, "override the propulsion power limit, W");
    cmd->add_option("--seed", rc.seed, "random seed");
    cmd->add_option("--jobs", rc.jobs, "worker threads for scenario directories");
    return cmd;
  };

  add_planner("plan-minrate", "maximize the minimum average rate");
  add_planner("plan-ee", "maximize the fairness energy efficiency");
  add_planner("baseline-circular-minrate", "circular min-rate baseline");
  add_planner("baseline-circular-ee", "circular energy-efficiency baseline");

  CLI::App* ev = app.add_subcommand("eval", "recompute metrics for an emitted plan");
  ev->add_option("--scenario", rc.scenario_path, "scenario JSON file")->required();
  ev->add_option("--plan", rc.plan_csv, "trajectory CSV")->required();
  ev->add_option("--powers", rc.powers_csv, "transmit power CSV")->required();
  ev->add_option("--out", rc.out_dir, "optional output directory");

  CLI::App* vs = app.add_subcommand("verify-surrogates",
                                    "check every surrogate family (three conditions)");
  vs->add_option("--samples", rc.samples, "global-bound samples per family");
  vs->add_option("--seed", rc.seed, "random seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) ? uavplan::io::kExitUsage : uavplan::io::kExitOk;
  }

  rc.command = app.get_subcommands().front()->get_name();
  return uavplan::io::run(rc);
}

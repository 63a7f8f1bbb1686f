// Copyright 2026 The mcbo authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Command-line front end: benchmark runs, task catalog, oracle lookups and
// beta sweeps.  See README.md for the config schema.

#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "mcbo/experiment.hpp"
#include "mcbo/tasks.hpp"

namespace {

nlohmann::json load_json(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw mcbo::Error("cannot open config file " + path);
  return nlohmann::json::parse(f);
}

std::vector<double> parse_doubles(const std::string& csv) {
  std::vector<double> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stod(tok));
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& csv) {
  std::vector<std::uint64_t> out;
  std::stringstream ss(csv);
  std::string tok;
  while (std::getline(ss, tok, ','))
    if (!tok.empty()) out.push_back(std::stoull(tok));
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Model-based causal Bayesian optimization benchmarks"};
  app.require_subcommand(1);

  // --- run ------------------------------------------------------------------
  auto* run = app.add_subcommand("run", "Run benchmark cells and write CSV/JSON results");
  std::string config_path, task, algo = "mcbo", emit = "csv", out_dir = "out";
  std::string seeds_csv = "0", eta = "auto";
  bool noisy = false;
  double beta = 0.5;
  int rounds = 30, jobs = 1;
  int acq_n_mc = -1, acq_restarts = -1, acq_grad_steps = -1, acq_raw = -1;
  int oracle_grid = -1, oracle_n_mc = -1;
  run->add_option("--config", config_path, "JSON experiment config (overrides single-run flags)");
  run->add_option("--task", task, "catalog task name (single-run mode)");
  run->add_flag("--noisy", noisy, "use the noisy task variant");
  run->add_option("--algo", algo, "mcbo | mcbo_hard | ucb_baseline");
  run->add_option("--beta", beta, "confidence multiplier");
  run->add_option("--rounds", rounds, "intervention rounds per seed");
  run->add_option("--seeds", seeds_csv, "comma-separated seed list");
  run->add_option("--eta", eta, "selector family: auto | constant | net");
  run->add_option("--output-dir", out_dir, "output directory");
  run->add_option("--emit", emit, "csv | json | both");
  run->add_option("--jobs", jobs, "parallel (run, seed) cells");
  run->add_option("--acq-n-mc", acq_n_mc, "acquisition noise draws");
  run->add_option("--acq-restarts", acq_restarts, "gradient-ascent restarts");
  run->add_option("--acq-grad-steps", acq_grad_steps, "gradient steps per restart");
  run->add_option("--acq-raw-candidates", acq_raw, "random candidates before refinement");
  run->add_option("--oracle-grid", oracle_grid, "oracle grid points per dimension");
  run->add_option("--oracle-n-mc", oracle_n_mc, "oracle MC rollouts per grid point");

  // --- tasks ----------------------------------------------------------------
  auto* tasks_cmd = app.add_subcommand("tasks", "List the benchmark catalog");
  std::string t_describe;
  tasks_cmd->add_option("--describe", t_describe,
                        "print one task's full JSON definition instead of the list");

  // --- oracle ---------------------------------------------------------------
  auto* oracle_cmd = app.add_subcommand("oracle", "Grid-search the true optimum of a task");
  std::string o_task, o_task_file;
  bool o_noisy = false;
  int o_grid = 25, o_n_mc = 2000;
  long o_budget = 20'000'000;
  oracle_cmd->add_option("--task", o_task, "catalog task name");
  oracle_cmd->add_option("--task-file", o_task_file,
                         "JSON task document (custom system; see README.md)");
  oracle_cmd->add_flag("--noisy", o_noisy, "use the noisy task variant (catalog tasks only)");
  oracle_cmd->add_option("--grid", o_grid, "grid points per dimension");
  oracle_cmd->add_option("--n-mc", o_n_mc, "MC rollouts per grid point");
  oracle_cmd->add_option("--budget", o_budget, "max total grid points");

  // --- sweep ----------------------------------------------------------------
  auto* sweep_cmd = app.add_subcommand("sweep", "Expand runs over a beta grid and rank-select");
  std::string s_config, s_betas = "0.05,0.5,5";
  sweep_cmd->add_option("--config", s_config, "JSON experiment config")->required();
  sweep_cmd->add_option("--betas", s_betas, "comma-separated beta grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) {
      mcbo::ExperimentSpec spec;
      if (!config_path.empty()) {
        spec = mcbo::spec_from_json(load_json(config_path));
      } else {
        if (task.empty()) throw mcbo::Error("run needs --config or --task");
        nlohmann::json j;
        j["runs"] = nlohmann::json::array();
        nlohmann::json r;
        r["task"] = task;
        r["noisy"] = noisy;
        r["algo"] = algo;
        r["beta"] = beta;
        r["rounds"] = rounds;
        r["eta"] = eta;
        nlohmann::json acq = nlohmann::json::object();
        if (acq_n_mc > 0) acq["n_mc"] = acq_n_mc;
        if (acq_restarts > 0) acq["restarts"] = acq_restarts;
        if (acq_grad_steps > 0) acq["grad_steps"] = acq_grad_steps;
        if (acq_raw > 0) acq["raw_candidates"] = acq_raw;
        if (!acq.empty()) r["acq"] = acq;
        nlohmann::json orc = nlohmann::json::object();
        if (oracle_grid > 0) orc["grid_per_dim"] = oracle_grid;
        if (oracle_n_mc > 0) orc["n_mc"] = oracle_n_mc;
        if (!orc.empty()) r["oracle"] = orc;
        r["seeds"] = parse_seeds(seeds_csv);
        j["runs"].push_back(r);
        spec = mcbo::spec_from_json(j);
      }
      spec.output_dir = out_dir;
      spec.jobs = jobs;
      if (emit == "csv")
        spec.emit = mcbo::ExperimentSpec::Emit::Csv;
      else if (emit == "json")
        spec.emit = mcbo::ExperimentSpec::Emit::Json;
      else if (emit == "both")
        spec.emit = mcbo::ExperimentSpec::Emit::Both;
      else
        throw mcbo::Error("emit must be csv, json or both");
      const int failures = mcbo::run_experiment(spec);
      std::cout << (failures == 0 ? "complete" : "partial") << ": results in " << spec.output_dir
                << std::endl;
      return failures == 0 ? 0 : 1;
    }

    if (tasks_cmd->parsed()) {
      if (!t_describe.empty()) {
        std::cout << mcbo::task_definition_json(t_describe).dump(2) << std::endl;
        return 0;
      }
      for (const auto& name : mcbo::task_names()) {
        const mcbo::Scm scm = mcbo::make_task(name);
        std::cout << name << ": " << scm.num_nodes() << " nodes, "
                  << (scm.mode == mcbo::TaskMode::Cbo ? "observe-or-clamp" : "function network")
                  << ", " << scm.layout.total_dim << " action dims";
        if (!scm.candidate_targets.empty())
          std::cout << ", " << scm.candidate_targets.size() << " candidate target sets";
        std::cout << "\n";
      }
      return 0;
    }

    if (oracle_cmd->parsed()) {
      if (o_task.empty() == o_task_file.empty())
        throw mcbo::Error("oracle needs exactly one of --task or --task-file");
      const mcbo::Scm scm = o_task_file.empty() ? mcbo::make_task(o_task, o_noisy)
                                                : mcbo::scm_from_json(load_json(o_task_file));
      mcbo::Rng rng(0xbe57);
      const auto res = mcbo::oracle_best(scm, o_grid, o_n_mc, rng, o_budget);
      nlohmann::json j;
      j["task"] = scm.name;
      j["noisy"] = !scm.noiseless();
      j["optimum"] = res.value;
      j["argmax"] = res.best.to_json();
      std::cout << j.dump(2) << std::endl;
      return 0;
    }

    if (sweep_cmd->parsed()) {
      mcbo::ExperimentSpec spec = mcbo::spec_from_json(load_json(s_config));
      const int failures = mcbo::run_beta_sweep(spec, parse_doubles(s_betas));
      std::cout << (failures == 0 ? "complete" : "partial") << ": results in " << spec.output_dir
                << std::endl;
      return failures == 0 ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return 1;
  }
  return 0;
}

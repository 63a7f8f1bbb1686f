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

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "mcbo/engine.hpp"
#include "mcbo/metrics.hpp"

namespace mcbo {

// One benchmark cell: a task, an algorithm configuration, and the seeds to
// replicate it over.
struct RunSpec {
  std::string task;
  bool noisy = false;
  RunConfig config;                 // config.seed is overwritten per seed
  std::vector<std::uint64_t> seeds;

  // File-name stem: <task>[_noisy]_<algo>_beta<b> with '.' -> 'p'.
  std::string label() const;
};

struct ExperimentSpec {
  std::vector<RunSpec> runs;
  std::string output_dir = "out";
  enum class Emit { Csv, Json, Both };
  Emit emit = Emit::Csv;
  int jobs = 1;
};

// Parses the JSON config documented in README.md.  Unknown algo / task names
// surface as UnknownTask; malformed entries as Error.
ExperimentSpec spec_from_json(const nlohmann::json& j);

// Canonical echo of a spec (used for the manifest and its content hash).
nlohmann::json spec_to_json(const ExperimentSpec& spec);

// Runs every (run, seed) cell, spread over `jobs` threads, and writes:
//   <label>_seed<k>.csv    per-run rounds (schema in README.md); wall_ms is
//                          written as 0 so files are byte-reproducible
//   <label>_seed<k>.json   full records incl. measured wall_ms (emit json/both)
//   <label>_aggregate.csv  mean and stderr curves across seeds
//   manifest.json          resolved config + content hashes + timings + status
// Outputs are independent of `jobs`.  Returns the number of failed cells
// (0 = complete); failures are recorded in the manifest and leave the other
// cells' outputs in place.
int run_experiment(const ExperimentSpec& spec);

// Expands every run over the given beta grid, runs the experiment, then
// writes sweep_summary.csv (final average reward per task x beta) and
// sweep_selection.csv: for each held-out task, the beta minimizing the mean
// rank across the remaining tasks (ties to the smaller beta).
int run_beta_sweep(const ExperimentSpec& spec, const std::vector<double>& betas);

// FNV-1a 64-bit content hash (stable across platforms/runs).
std::uint64_t fnv1a64(const std::string& bytes);

// Shortest-exact decimal formatting used in all CSV output (17 significant
// digits round-trips IEEE doubles).
std::string format_g17(double v);

}  // namespace mcbo

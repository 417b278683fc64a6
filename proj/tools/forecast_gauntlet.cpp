// Copyright 2026 The Forecast Gauntlet Authors
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

#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "gauntlet/commands.hpp"

namespace
{

struct Flags
{
  std::optional<std::string> scenes;
  std::optional<std::string> preds;
  std::optional<std::string> forecasts;
  std::optional<std::string> maps;
  std::optional<std::string> out;
  std::optional<std::string> config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> jobs;
  bool strict{false};
};

void add_flags(CLI::App * cmd, Flags & f)
{
  cmd->add_option("--scenes", f.scenes, "scene file (JSONL)");
  cmd->add_option("--preds", f.preds, "predicted tracks (JSONL)");
  cmd->add_option("--forecasts", f.forecasts, "forecasts (JSONL)");
  cmd->add_option("--maps", f.maps, "raster file or directory of .fmap files");
  cmd->add_option("--out", f.out, "output directory");
  cmd->add_option("--config", f.config, "JSON run configuration");
  cmd->add_option("--seed", f.seed, "random seed");
  cmd->add_option("--jobs", f.jobs, "worker threads")->check(CLI::PositiveNumber);
  cmd->add_flag("--strict", f.strict, "fail on a missing forecast");
}

// Precedence: flag, then config file, then FORECAST_GAUNTLET_JOBS, then 1.
gauntlet::RunConfig resolve(const Flags & f)
{
  gauntlet::RunConfig cfg;
  if (f.config) {gauntlet::load_config_file(*f.config, cfg);}
  if (f.scenes) {cfg.scenes = *f.scenes;}
  if (f.preds) {cfg.preds = *f.preds;}
  if (f.forecasts) {cfg.forecasts = *f.forecasts;}
  if (f.maps) {cfg.maps = *f.maps;}
  if (f.out) {cfg.out = *f.out;}
  if (f.seed) {cfg.seed = *f.seed;}
  if (f.strict) {cfg.strict = true;}
  if (f.jobs) {
    cfg.jobs = *f.jobs;
  } else if (cfg.jobs == 0) {
    cfg.jobs = gauntlet::jobs_from_env().value_or(1);
  }
  return cfg;
}

}  // namespace

int main(int argc, char ** argv)
{
  CLI::App app{"Forecast Gauntlet: motion-forecasting evaluation under detection and tracking errors"};
  app.require_subcommand(1);
  Flags flags;
  auto * evaluate = app.add_subcommand("evaluate", "score forecasts against ground truth");
  auto * sweep = app.add_subcommand("sweep", "perturbation sweep with the cv baseline");
  auto * stratify = app.add_subcommand("stratify", "per-distance-bin and weighted report");
  auto * ablate = app.add_subcommand("map-ablate", "channel ablations and IoU table");
  auto * synth = app.add_subcommand("synth", "write synthetic scenes, forecasts and rasters");
  for (auto * c : {evaluate, sweep, stratify, ablate, synth}) {add_flags(c, flags);}

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError & e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const gauntlet::RunConfig cfg = resolve(flags);
    if (evaluate->parsed()) {
      gauntlet::cmd_evaluate(cfg);
    } else if (sweep->parsed()) {
      gauntlet::cmd_sweep(cfg);
    } else if (stratify->parsed()) {
      gauntlet::cmd_stratify(cfg);
    } else if (ablate->parsed()) {
      gauntlet::cmd_map_ablate(cfg);
    } else if (synth->parsed()) {
      std::cout << gauntlet::cmd_synth(cfg).to_string() << '\n';
    }
  } catch (const gauntlet::ValidationError & e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return 2;
  } catch (const gauntlet::ParseError & e) {
    std::cerr << "parse error: " << e.what() << '\n';
    return 2;
  } catch (const gauntlet::RasterFormatError & e) {
    std::cerr << "raster error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception & e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}

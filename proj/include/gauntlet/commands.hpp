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

// Batch workflows behind the command-line tool: evaluate, sweep, stratify,
// map-ablate and synth. Every command reads a RunConfig and writes its output
// files from a single thread after the parallel part has finished.

#ifndef GAUNTLET__COMMANDS_HPP_
#define GAUNTLET__COMMANDS_HPP_

#include <algorithm>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "gauntlet/io.hpp"
#include "gauntlet/maps.hpp"
#include "gauntlet/metrics.hpp"
#include "gauntlet/parallel.hpp"
#include "gauntlet/perturb.hpp"
#include "gauntlet/report.hpp"
#include "gauntlet/rng.hpp"
#include "gauntlet/synth.hpp"

namespace gauntlet
{

namespace fs = std::filesystem;

/// Level-to-spec mapping of a noise sweep: axis parameter = scale * level.
struct SweepSpec
{
  std::vector<std::string> axes{"fn", "fp", "loc", "ids"};
  std::vector<double> levels{0.0, 0.25, 0.5, 1.0};
  int seeds{5};
  double fn_scale{1.0};
  double fp_scale{1.0};
  double loc_scale{2.0};
  double ids_scale{1.0};
  bool write_reports{true};
};

struct RunConfig
{
  std::optional<fs::path> scenes;
  std::optional<fs::path> preds;
  std::optional<fs::path> forecasts;
  std::optional<fs::path> maps;
  fs::path out{"out"};
  EvalConfig eval;
  PerturbSpec perturb;
  SweepSpec sweep;
  SynthSpec synth;
  std::vector<double> bin_weights;  // empty: inverse bin midpoint
  std::uint64_t seed{0};
  unsigned jobs{0};  // 0: unset, treated as 1
  bool strict{false};
};

// ------------------------------------------------------------------ config

namespace detail
{

using ojson = nlohmann::ordered_json;

inline void reject_unknown(const ojson & obj, const char * section, std::initializer_list<const char *> known)
{
  for (const auto & [key, value] : obj.items()) {
    bool ok = false;
    for (const char * k : known) {ok = ok || key == k;}
    if (!ok) {throw ValidationError("<config>", std::string(section) + key, "unknown key");}
  }
}

template<typename T>
void read_field(const ojson & obj, const char * key, T & dst, const std::string & section)
{
  auto it = obj.find(key);
  if (it == obj.end()) {return;}
  try {
    dst = it->get<T>();
  } catch (const nlohmann::json::exception &) {
    throw ValidationError("<config>", section + key, "wrong value type");
  }
}

inline void read_eval(const ojson & o, EvalConfig & c)
{
  const std::string s = "eval.";
  reject_unknown(
    o, "eval.", {"match_threshold_m", "fde_threshold_m", "k", "miss_radius_m", "horizon_frames",
      "history_frames", "moving_displacement_m", "distance_bins_m", "classes", "miss_criterion"});
  read_field(o, "match_threshold_m", c.match_threshold_m, s);
  read_field(o, "fde_threshold_m", c.fde_threshold_m, s);
  read_field(o, "k", c.k, s);
  read_field(o, "miss_radius_m", c.miss_radius_m, s);
  read_field(o, "horizon_frames", c.horizon_frames, s);
  read_field(o, "history_frames", c.history_frames, s);
  read_field(o, "moving_displacement_m", c.moving_displacement_m, s);
  read_field(o, "distance_bins_m", c.distance_bins_m, s);
  if (o.contains("classes")) {
    std::vector<std::string> names;
    read_field(o, "classes", names, s);
    c.classes.clear();
    for (const auto & n : names) {c.classes.push_back(AgentClass::parse(n));}
  }
  if (o.contains("miss_criterion")) {
    std::string m;
    read_field(o, "miss_criterion", m, s);
    if (m == "fde") {
      c.miss_criterion = MissCriterion::fde;
    } else if (m == "max_pointwise") {
      c.miss_criterion = MissCriterion::max_pointwise;
    } else {
      throw ValidationError("<config>", "eval.miss_criterion", "expected fde or max_pointwise");
    }
  }
}

inline void read_perturb(const ojson & o, PerturbSpec & p)
{
  const std::string s = "perturb.";
  reject_unknown(
    o, "perturb.", {"fn_rate", "fp_rate", "loc_sigma_m", "loc_sigma_per_m", "loc_mode", "ids_rate",
      "ids_radius_m", "fp_min_range_m", "fp_max_range_m", "fp_max_speed_mps",
      "fp_min_confidence", "fp_max_confidence"});
  read_field(o, "fn_rate", p.fn_rate, s);
  read_field(o, "fp_rate", p.fp_rate, s);
  read_field(o, "loc_sigma_m", p.loc_sigma_m, s);
  read_field(o, "loc_sigma_per_m", p.loc_sigma_per_m, s);
  read_field(o, "ids_rate", p.ids_rate, s);
  read_field(o, "ids_radius_m", p.ids_radius_m, s);
  read_field(o, "fp_min_range_m", p.fp_min_range_m, s);
  read_field(o, "fp_max_range_m", p.fp_max_range_m, s);
  read_field(o, "fp_max_speed_mps", p.fp_max_speed_mps, s);
  read_field(o, "fp_min_confidence", p.fp_min_confidence, s);
  read_field(o, "fp_max_confidence", p.fp_max_confidence, s);
  if (o.contains("loc_mode")) {
    std::string m;
    read_field(o, "loc_mode", m, s);
    if (m == "iid") {
      p.loc_mode = LocalizationMode::iid;
    } else if (m == "per_track") {
      p.loc_mode = LocalizationMode::per_track;
    } else {
      throw ValidationError("<config>", "perturb.loc_mode", "expected iid or per_track");
    }
  }
}

inline void read_sweep(const ojson & o, SweepSpec & w)
{
  const std::string s = "sweep.";
  reject_unknown(
    o, "sweep.", {"axes", "levels", "seeds", "fn_scale", "fp_scale", "loc_scale", "ids_scale",
      "write_reports"});
  read_field(o, "axes", w.axes, s);
  read_field(o, "levels", w.levels, s);
  read_field(o, "seeds", w.seeds, s);
  read_field(o, "fn_scale", w.fn_scale, s);
  read_field(o, "fp_scale", w.fp_scale, s);
  read_field(o, "loc_scale", w.loc_scale, s);
  read_field(o, "ids_scale", w.ids_scale, s);
  read_field(o, "write_reports", w.write_reports, s);
  for (const auto & a : w.axes) {
    if (a != "fn" && a != "fp" && a != "loc" && a != "ids") {
      throw ValidationError("<config>", "sweep.axes", "unknown axis '" + a + "'");
    }
  }
  if (w.seeds < 1) {throw ValidationError("<config>", "sweep.seeds", "must be >= 1");}
  for (double l : w.levels) {
    if (!(l >= 0.0 && l <= 1.0)) {throw ValidationError("<config>", "sweep.levels", "outside [0, 1]");}
  }
}

inline void read_synth(const ojson & o, SynthSpec & y)
{
  const std::string s = "synth.";
  reject_unknown(
    o, "synth.", {"num_scenes", "min_agents", "max_agents", "min_speed_mps", "max_speed_mps",
      "min_turn_rate", "max_turn_rate", "layout", "extent_m", "frame_rate_hz", "history_frames",
      "horizon_frames", "min_ego_speed_mps", "max_ego_speed_mps", "lane_width_m",
      "lanes_per_direction", "curve_radius_m", "other_fraction", "map_size_px",
      "map_resolution_m"});
  read_field(o, "num_scenes", y.num_scenes, s);
  read_field(o, "min_agents", y.min_agents, s);
  read_field(o, "max_agents", y.max_agents, s);
  read_field(o, "min_speed_mps", y.min_speed_mps, s);
  read_field(o, "max_speed_mps", y.max_speed_mps, s);
  read_field(o, "min_turn_rate", y.min_turn_rate, s);
  read_field(o, "max_turn_rate", y.max_turn_rate, s);
  read_field(o, "extent_m", y.extent_m, s);
  read_field(o, "frame_rate_hz", y.frame_rate_hz, s);
  read_field(o, "history_frames", y.history_frames, s);
  read_field(o, "horizon_frames", y.horizon_frames, s);
  read_field(o, "min_ego_speed_mps", y.min_ego_speed_mps, s);
  read_field(o, "max_ego_speed_mps", y.max_ego_speed_mps, s);
  read_field(o, "lane_width_m", y.lane_width_m, s);
  read_field(o, "lanes_per_direction", y.lanes_per_direction, s);
  read_field(o, "curve_radius_m", y.curve_radius_m, s);
  read_field(o, "other_fraction", y.other_fraction, s);
  read_field(o, "map_size_px", y.map_size_px, s);
  read_field(o, "map_resolution_m", y.map_resolution_m, s);
  if (o.contains("layout")) {
    std::string l;
    read_field(o, "layout", l, s);
    if (l == "straight") {
      y.layout = LaneLayout::straight;
    } else if (l == "curved") {
      y.layout = LaneLayout::curved;
    } else if (l == "crossing") {
      y.layout = LaneLayout::crossing;
    } else {
      throw ValidationError("<config>", "synth.layout", "expected straight, curved or crossing");
    }
  }
}

inline void read_section(
  const ojson & root, const char * key, const std::function<void(const ojson &)> & fn)
{
  auto it = root.find(key);
  if (it == root.end()) {return;}
  if (!it->is_object()) {throw ValidationError("<config>", key, "expected an object");}
  fn(*it);
}

}  // namespace detail

/// Applies a JSON config document on top of `cfg`. Unknown keys are rejected.
inline void apply_config_json(const nlohmann::ordered_json & root, RunConfig & cfg)
{
  if (!root.is_object()) {throw ValidationError("<config>", "", "expected a JSON object");}
  detail::reject_unknown(
    root, "", {"scenes", "preds", "forecasts", "maps", "out", "eval", "perturb", "sweep", "synth",
      "bin_weights", "seed", "jobs", "strict"});
  auto path = [&](const char * key, std::optional<fs::path> & dst) {
      std::string p;
      if (root.contains(key)) {
        detail::read_field(root, key, p, "");
        dst = p;
      }
    };
  path("scenes", cfg.scenes);
  path("preds", cfg.preds);
  path("forecasts", cfg.forecasts);
  path("maps", cfg.maps);
  if (root.contains("out")) {
    std::string p;
    detail::read_field(root, "out", p, "");
    cfg.out = p;
  }
  detail::read_section(root, "eval", [&](const auto & o) {detail::read_eval(o, cfg.eval);});
  detail::read_section(root, "perturb", [&](const auto & o) {detail::read_perturb(o, cfg.perturb);});
  detail::read_section(root, "sweep", [&](const auto & o) {detail::read_sweep(o, cfg.sweep);});
  detail::read_section(root, "synth", [&](const auto & o) {detail::read_synth(o, cfg.synth);});
  detail::read_field(root, "bin_weights", cfg.bin_weights, "");
  detail::read_field(root, "seed", cfg.seed, "");
  if (root.contains("jobs")) {
    std::int64_t jobs = 0;
    detail::read_field(root, "jobs", jobs, "");
    if (jobs < 1) {throw ValidationError("<config>", "jobs", "must be >= 1");}
    cfg.jobs = static_cast<unsigned>(jobs);
  }
  detail::read_field(root, "strict", cfg.strict, "");
}

inline void load_config_file(const fs::path & file, RunConfig & cfg)
{
  std::ifstream in(file);
  if (!in) {throw ValidationError("<config>", "config", "cannot open " + file.string());}
  nlohmann::ordered_json root;
  try {
    root = nlohmann::ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error & e) {
    throw ValidationError("<config>", "config", e.what());
  }
  apply_config_json(root, cfg);
}

/// Worker count from FORECAST_GAUNTLET_JOBS, if set to a positive integer.
inline std::optional<unsigned> jobs_from_env()
{
  const char * v = std::getenv("FORECAST_GAUNTLET_JOBS");
  if (v == nullptr || *v == '\0') {return std::nullopt;}
  char * end = nullptr;
  const long n = std::strtol(v, &end, 10);
  if (*end != '\0' || n < 1) {
    throw ValidationError("<config>", "FORECAST_GAUNTLET_JOBS", "expected a positive integer");
  }
  return static_cast<unsigned>(n);
}

// ------------------------------------------------------------------ inputs

/// Scenes plus predictions and forecasts grouped by scene id.
struct EvaluationInputs
{
  std::vector<Scene> scenes;
  std::map<std::string, std::vector<PredTrack>> preds;
  std::map<std::string, std::map<AgentId, ForecastSet>> forecasts;
};

namespace detail
{

inline void require_file(const std::optional<fs::path> & p, const char * field)
{
  if (!p) {throw ValidationError("<config>", field, "path is required");}
  if (!fs::exists(*p)) {throw ValidationError("<config>", field, "path does not exist: " + p->string());}
}

inline std::ifstream open_in(const fs::path & p)
{
  std::ifstream in(p, std::ios::binary);
  if (!in) {throw std::runtime_error("cannot open " + p.string());}
  return in;
}

inline std::ofstream open_out(const fs::path & p)
{
  if (p.has_parent_path()) {fs::create_directories(p.parent_path());}
  std::ofstream out(p, std::ios::binary);
  if (!out) {throw std::runtime_error("cannot write " + p.string());}
  return out;
}

}  // namespace detail

/**
 * @brief Cross-checks predictions and forecasts against the scenes: every
 * record must name a known scene, track ids are unique per scene, and a
 * forecast must name a predicted track.
 */
inline EvaluationInputs assemble_inputs(
  std::vector<Scene> scenes, const std::vector<PredRecord> & preds,
  const std::vector<ForecastRecord> & forecasts)
{
  EvaluationInputs in;
  std::map<std::string, const Scene *> by_id;
  for (const auto & s : scenes) {
    if (!by_id.emplace(s.scene_id, &s).second) {
      throw ValidationError(s.scene_id, "scene_id", "duplicate scene");
    }
  }
  std::map<std::string, std::set<AgentId>> seen;
  auto add_forecast = [&](const std::string & sid, const ForecastSet & f) {
      validate(f, sid);
      if (!seen[sid].count(f.track_id)) {
        throw ValidationError(sid, "forecast.track_id", "forecast for unknown track " + std::to_string(f.track_id));
      }
      if (!in.forecasts[sid].emplace(f.track_id, f).second) {
        throw ValidationError(sid, "forecast.track_id", "duplicate forecast for track " + std::to_string(f.track_id));
      }
    };
  for (const auto & r : preds) {
    auto it = by_id.find(r.scene_id);
    if (it == by_id.end()) {throw ValidationError(r.scene_id, "scene_id", "prediction for unknown scene");}
    validate(r.track, *it->second);
    if (!seen[r.scene_id].insert(r.track.track_id).second) {
      throw ValidationError(r.scene_id, "track_id", "duplicate track " + std::to_string(r.track.track_id));
    }
    in.preds[r.scene_id].push_back(r.track);
  }
  for (const auto & r : preds) {
    if (r.forecast) {add_forecast(r.scene_id, *r.forecast);}
  }
  for (const auto & r : forecasts) {
    if (!by_id.count(r.scene_id)) {throw ValidationError(r.scene_id, "scene_id", "forecast for unknown scene");}
    add_forecast(r.scene_id, r.forecast);
  }
  in.scenes = std::move(scenes);
  return in;
}

inline EvaluationInputs load_inputs(const RunConfig & cfg)
{
  detail::require_file(cfg.scenes, "scenes");
  detail::require_file(cfg.preds, "preds");
  if (cfg.forecasts) {detail::require_file(cfg.forecasts, "forecasts");}
  auto s = detail::open_in(*cfg.scenes);
  auto scenes = load_scenes(s);
  auto p = detail::open_in(*cfg.preds);
  auto preds = load_preds(p);
  std::vector<ForecastRecord> forecasts;
  if (cfg.forecasts) {
    auto f = detail::open_in(*cfg.forecasts);
    forecasts = load_forecasts(f);
  }
  return assemble_inputs(std::move(scenes), preds, forecasts);
}

// ------------------------------------------------------------------ evaluate

struct EvaluationOutput
{
  EvaluationPool pool;
  std::vector<std::string> warnings;
};

/// Evaluates every scene on `jobs` workers and merges in scene order.
inline EvaluationOutput evaluate_inputs(
  const EvaluationInputs & in, const EvalConfig & cfg, unsigned jobs, bool strict)
{
  cfg.validate();
  static const std::vector<PredTrack> kNoPreds;
  static const std::map<AgentId, ForecastSet> kNoForecasts;
  auto results = parallel_map(
    in.scenes.size(), jobs, [&](std::size_t i) {
      const Scene & scene = in.scenes[i];
      auto p = in.preds.find(scene.scene_id);
      const auto & preds = p == in.preds.end() ? kNoPreds : p->second;
      auto f = in.forecasts.find(scene.scene_id);
      const auto & fmap = f == in.forecasts.end() ? kNoForecasts : f->second;
      ForecastLookup lookup = [&fmap](AgentId id) -> const ForecastSet * {
          auto it = fmap.find(id);
          return it == fmap.end() ? nullptr : &it->second;
        };
      return evaluate_scene(scene, i, preds, lookup, cfg, strict);
    });
  EvaluationOutput out;
  for (std::size_t i = 0; i < results.size(); ++i) {
    out.pool.merge(results[i]);
    for (AgentId id : results[i].missing_forecasts) {
      out.warnings.push_back(
        "scene '" + in.scenes[i].scene_id + "': no forecast for track " + std::to_string(id) +
        ", counted as a miss");
    }
  }
  return out;
}

inline void write_report_files(const fs::path & stem, const Report & report)
{
  auto j = detail::open_out(fs::path(stem.string() + ".json"));
  j << serialize_report(report);
  auto c = detail::open_out(fs::path(stem.string() + ".csv"));
  write_report_csv(c, report);
}

inline Report cmd_evaluate(const RunConfig & cfg, std::ostream & log = std::cerr)
{
  const auto in = load_inputs(cfg);
  auto result = evaluate_inputs(in, cfg.eval, cfg.jobs, cfg.strict);
  for (const auto & w : result.warnings) {log << "warning: " << w << '\n';}
  Report report = build_report(result.pool, cfg.eval);
  fs::create_directories(cfg.out);
  write_report_files(cfg.out / "report", report);
  return report;
}

inline Report cmd_stratify(const RunConfig & cfg, std::ostream & log = std::cerr)
{
  const auto in = load_inputs(cfg);
  auto result = evaluate_inputs(in, cfg.eval, cfg.jobs, cfg.strict);
  for (const auto & w : result.warnings) {log << "warning: " << w << '\n';}
  Report report;
  report.overall = result.pool.summarize([](const AgentClass &, double) {return true;}, cfg.eval);
  report.per_distance_bin = stratify(result.pool, cfg.eval.distance_bins_m, cfg.eval);
  report.weighted = distance_weighted(report.per_distance_bin, cfg.bin_weights);
  fs::create_directories(cfg.out);
  write_report_files(cfg.out / "stratified", report);
  return report;
}

// ------------------------------------------------------------------ sweep

struct SweepPoint
{
  std::string axis;
  double level{0.0};
  int seed_index{0};
  Report report;
};

/// Perturbation of one sweep point; every seed index shares one stream across levels and axes.
inline PerturbSpec sweep_perturbation(
  const PerturbSpec & base, const SweepSpec & sweep, const std::string & axis, double level,
  std::uint64_t seed, int seed_index)
{
  PerturbSpec p = base;
  p.fn_rate = 0.0;
  p.fp_rate = 0.0;
  p.loc_sigma_m = 0.0;
  p.loc_sigma_per_m = 0.0;
  p.ids_rate = 0.0;
  if (axis == "fn") {
    p.fn_rate = std::min(1.0, sweep.fn_scale * level);
  } else if (axis == "fp") {
    p.fp_rate = sweep.fp_scale * level;
  } else if (axis == "loc") {
    p.loc_sigma_m = sweep.loc_scale * level;
  } else if (axis == "ids") {
    p.ids_rate = std::min(1.0, sweep.ids_scale * level);
  } else {
    throw ValidationError("<config>", "sweep.axes", "unknown axis '" + axis + "'");
  }
  p.seed = derive_seed(seed, "sweep", std::to_string(seed_index));
  return p;
}

/// Perturbs GT tracks, forecasts them with the cv baseline and evaluates.
inline EvaluationPool evaluate_perturbed(
  std::span<const Scene> scenes, const PerturbSpec & spec, const EvalConfig & cfg, unsigned jobs,
  std::vector<ProvenanceEntry> * log = nullptr)
{
  struct Out { SceneEvaluation eval; std::vector<ProvenanceEntry> log; };
  auto results = parallel_map(
    scenes.size(), jobs, [&](std::size_t i) {
      PerturbResult p = apply(scenes[i], spec, cfg);
      std::map<AgentId, ForecastSet> forecasts;
      for (const auto & t : p.tracks) {
        forecasts.emplace(t.track_id, cv_forecast(t, cfg.k, cfg.horizon_frames));
      }
      ForecastLookup lookup = [&forecasts](AgentId id) -> const ForecastSet * {
          auto it = forecasts.find(id);
          return it == forecasts.end() ? nullptr : &it->second;
        };
      return Out{evaluate_scene(scenes[i], i, p.tracks, lookup, cfg, true), std::move(p.log)};
    });
  EvaluationPool pool;
  for (auto & r : results) {
    pool.merge(r.eval);
    if (log) {log->insert(log->end(), r.log.begin(), r.log.end());}
  }
  return pool;
}

inline std::vector<SweepPoint> run_sweep(
  std::span<const Scene> scenes, const SweepSpec & sweep, const PerturbSpec & base,
  const EvalConfig & cfg, std::uint64_t seed, unsigned jobs)
{
  cfg.validate();
  std::vector<SweepPoint> out;
  for (const auto & axis : sweep.axes) {
    for (double level : sweep.levels) {
      for (int s = 0; s < sweep.seeds; ++s) {
        const PerturbSpec spec = sweep_perturbation(base, sweep, axis, level, seed, s);
        const EvaluationPool pool = evaluate_perturbed(scenes, spec, cfg, jobs);
        out.push_back({axis, level, s, build_report(pool, cfg)});
      }
    }
  }
  return out;
}

/// Long-format rows: axis, level, seed, metric, value. Absent metrics have an empty value.
inline void write_sweep_csv(std::ostream & out, std::span<const SweepPoint> points)
{
  out << "axis,level,seed,metric,value\n";
  for (const auto & p : points) {
    const MetricRow & r = p.report.overall;
    auto row = [&](const char * metric, const std::string & value) {
        out << p.axis << ',' << format_number(p.level) << ',' << p.seed_index << ',' << metric << ','
            << value << '\n';
      };
    auto opt = [](const std::optional<double> & v) {return v ? format_number(*v) : std::string();};
    row("map_f", opt(r.map_f));
    row("min_ade", opt(r.min_ade));
    row("min_fde", opt(r.min_fde));
    row("mr", opt(r.mr));
    row("mota", opt(r.mota));
    row("motp", opt(r.motp));
    row("fp", std::to_string(r.fp));
    row("fn", std::to_string(r.fn));
    row("ids", std::to_string(r.ids));
  }
}

/// Scenes from --scenes when given, otherwise generated from the synth spec and seed.
inline std::vector<Scene> scenes_for(const RunConfig & cfg)
{
  if (cfg.scenes) {
    detail::require_file(cfg.scenes, "scenes");
    auto in = detail::open_in(*cfg.scenes);
    return load_scenes(in);
  }
  SynthSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  std::vector<Scene> out;
  for (auto & s : generate(spec)) {out.push_back(std::move(s.scene));}
  return out;
}

inline std::vector<SweepPoint> cmd_sweep(const RunConfig & cfg)
{
  const auto scenes = scenes_for(cfg);
  auto points = run_sweep(scenes, cfg.sweep, cfg.perturb, cfg.eval, cfg.seed, cfg.jobs);
  fs::create_directories(cfg.out);
  {
    auto csv = detail::open_out(cfg.out / "sweep.csv");
    write_sweep_csv(csv, points);
  }
  if (cfg.sweep.write_reports) {
    for (const auto & p : points) {
      write_report_files(
        cfg.out / "reports" /
        (p.axis + "_L" + format_number(p.level) + "_s" + std::to_string(p.seed_index)),
        p.report);
    }
  }
  return points;
}

// ------------------------------------------------------------------ maps

struct AblationRow
{
  std::string map;
  std::string ablation;  // "ch<i>" or "empty"
  std::uint32_t channel{0};
  std::optional<double> iou;
};

/**
 * @brief IoU of every ablated variant against the original, per channel.
 * Channels removed by the ablation itself are reported absent.
 */
inline std::vector<AblationRow> ablation_table(const std::string & name, const RasterMap & original)
{
  std::vector<AblationRow> rows;
  auto score = [&](const std::string & ablation, const RasterMap & variant, auto removed) {
      for (std::uint32_t ch = 0; ch < original.channels; ++ch) {
        rows.push_back({name, ablation, ch, removed(ch) ? std::nullopt : iou(variant, original, ch)});
      }
    };
  for (std::uint32_t ch = 0; ch < original.channels; ++ch) {
    score("ch" + std::to_string(ch), ablate_channel(original, ch), [ch](std::uint32_t c) {return c == ch;});
  }
  score("empty", empty_map(original), [](std::uint32_t) {return true;});
  return rows;
}

inline std::vector<AblationRow> cmd_map_ablate(const RunConfig & cfg)
{
  detail::require_file(cfg.maps, "maps");
  std::vector<fs::path> files;
  if (fs::is_directory(*cfg.maps)) {
    for (const auto & e : fs::directory_iterator(*cfg.maps)) {
      if (e.is_regular_file() && e.path().extension() == ".fmap") {files.push_back(e.path());}
    }
    std::sort(files.begin(), files.end());
  } else {
    files.push_back(*cfg.maps);
  }
  std::vector<RasterMap> maps;
  for (const auto & f : files) {
    auto in = detail::open_in(f);
    maps.push_back(read_raster(in));
  }

  std::vector<AblationRow> table;
  fs::create_directories(cfg.out);
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const std::string stem = files[i].stem().string();
    auto write = [&](const std::string & tag, const RasterMap & m) {
        auto out = detail::open_out(cfg.out / (stem + ".ablate_" + tag + ".fmap"));
        write_raster(out, m);
      };
    for (std::uint32_t ch = 0; ch < maps[i].channels; ++ch) {
      write("ch" + std::to_string(ch), ablate_channel(maps[i], ch));
    }
    write("empty", empty_map(maps[i]));
    auto rows = ablation_table(stem, maps[i]);
    table.insert(table.end(), rows.begin(), rows.end());
  }
  auto csv = detail::open_out(cfg.out / "iou.csv");
  csv << "map,ablation,channel,iou\n";
  for (const auto & r : table) {
    csv << r.map << ',' << r.ablation << ',' << r.channel << ',' << (r.iou ? format_number(*r.iou) : "")
        << '\n';
  }
  return table;
}

// ------------------------------------------------------------------ synth

struct SynthDigest
{
  std::size_t scenes{0};
  std::size_t agents{0};
  std::uint64_t checksum{0};

  std::string to_string() const
  {
    char buf[96];
    std::snprintf(
      buf, sizeof(buf), "scenes=%zu agents=%zu checksum=%016llx", scenes, agents,
      static_cast<unsigned long long>(checksum));
    return buf;
  }
};

/**
 * @brief Writes scenes, perturbed GT-derived predictions, cv forecasts, one
 * raster per scene and the perturbation log. The checksum covers every
 * written byte in write order.
 */
inline SynthDigest cmd_synth(const RunConfig & cfg)
{
  SynthSpec spec = cfg.synth;
  spec.seed = cfg.seed;
  PerturbSpec perturb = cfg.perturb;
  perturb.seed = cfg.seed;
  cfg.eval.validate();
  const auto generated = generate(spec);

  struct Out { std::vector<PredRecord> preds; std::vector<ForecastRecord> forecasts; std::vector<ProvenanceEntry> log; };
  auto per_scene = parallel_map(
    generated.size(), cfg.jobs, [&](std::size_t i) {
      const Scene & scene = generated[i].scene;
      PerturbResult p = apply(scene, perturb, cfg.eval);
      Out o;
      for (auto & t : p.tracks) {
        o.forecasts.push_back({scene.scene_id, cv_forecast(t, cfg.eval.k, spec.horizon_frames)});
        o.preds.push_back({scene.scene_id, std::move(t), std::nullopt});
      }
      o.log = std::move(p.log);
      return o;
    });

  SynthDigest digest;
  std::uint64_t h = fnv1a64({});
  auto emit = [&](const fs::path & path, const std::string & bytes) {
      auto out = detail::open_out(path);
      out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
      h = fnv1a64(path.filename().string(), h);
      h = fnv1a64(bytes, h);
    };

  std::vector<Scene> scenes;
  for (const auto & g : generated) {
    scenes.push_back(g.scene);
    digest.agents += g.scene.gt_tracks.size();
  }
  digest.scenes = scenes.size();
  std::ostringstream s;
  write_scenes(s, scenes);
  emit(cfg.out / "scenes.jsonl", s.str());

  std::ostringstream p;
  std::ostringstream f;
  std::ostringstream l;
  for (const auto & o : per_scene) {
    write_preds(p, o.preds);
    write_forecasts(f, o.forecasts);
    for (const auto & e : o.log) {l << e.to_json_line() << '\n';}
  }
  emit(cfg.out / "preds.jsonl", p.str());
  emit(cfg.out / "forecasts.jsonl", f.str());
  emit(cfg.out / "provenance.jsonl", l.str());
  for (const auto & g : generated) {
    std::ostringstream m;
    write_raster(m, g.map);
    emit(cfg.out / "maps" / (g.scene.scene_id + ".fmap"), m.str());
  }
  digest.checksum = h;
  return digest;
}

}  // namespace gauntlet

#endif  // GAUNTLET__COMMANDS_HPP_

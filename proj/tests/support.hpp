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

// Shared fixtures and independent oracles for the test binaries.

#ifndef GAUNTLET_TESTS__SUPPORT_HPP_
#define GAUNTLET_TESTS__SUPPORT_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "gauntlet/association.hpp"
#include "gauntlet/assignment.hpp"
#include "gauntlet/metrics.hpp"
#include "gauntlet/perturb.hpp"
#include "gauntlet/synth.hpp"

namespace gauntlet::test
{

// ------------------------------------------------------------ assignment

/// Random gated matrix: forbidden with probability p_forbid, integer costs when `ties`.
inline CostMatrix random_costs(std::mt19937_64 & g, std::size_t rows, std::size_t cols, double p_forbid, bool ties)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> small(0, 4);
  CostMatrix m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (u(g) < p_forbid) {continue;}
      m(r, c) = ties ? static_cast<double>(small(g)) : 10.0 * u(g);
    }
  }
  return m;
}

struct OracleResult
{
  std::size_t pairs{0};
  double cost{0.0};
};

/// Exhaustive search over injective row-to-column maps (each row may also stay unmatched).
inline OracleResult oracle_assignment(const CostMatrix & m)
{
  OracleResult best;
  bool have = false;
  std::vector<bool> used(m.cols(), false);
  std::vector<std::optional<std::size_t>> choice(m.rows());
  auto rec = [&](auto && self, std::size_t r) -> void {
      if (r == m.rows()) {
        std::size_t n = 0;
        double cost = 0.0;
        for (std::size_t i = 0; i < m.rows(); ++i) {
          if (choice[i]) {
            ++n;
            cost += m(i, *choice[i]);
          }
        }
        if (!have || n > best.pairs || (n == best.pairs && cost < best.cost)) {
          best = {n, cost};
          have = true;
        }
        return;
      }
      choice[r].reset();
      self(self, r + 1);
      for (std::size_t c = 0; c < m.cols(); ++c) {
        if (used[c] || !m.allowed(r, c)) {continue;}
        used[c] = true;
        choice[r] = c;
        self(self, r + 1);
        used[c] = false;
      }
      choice[r].reset();
    };
  rec(rec, 0);
  return best;
}

/// Structural checks every solver output must satisfy; empty string when valid.
inline std::string check_structure(const CostMatrix & m, const Assignment & a)
{
  std::vector<int> row_seen(m.rows(), 0);
  std::vector<int> col_seen(m.cols(), 0);
  for (const auto & [r, c] : a.pairs) {
    if (r >= m.rows() || c >= m.cols()) {return "pair out of range";}
    if (!m.allowed(r, c)) {return "forbidden pair selected";}
    ++row_seen[r];
    ++col_seen[c];
  }
  for (auto r : a.unmatched_rows) {++row_seen[r];}
  for (auto c : a.unmatched_cols) {++col_seen[c];}
  for (int v : row_seen) {
    if (v != 1) {return "rows not partitioned";}
  }
  for (int v : col_seen) {
    if (v != 1) {return "cols not partitioned";}
  }
  for (auto r : a.unmatched_rows) {
    for (auto c : a.unmatched_cols) {
      if (m.allowed(r, c)) {return "augmentable unmatched pair left";}
    }
  }
  return {};
}

// ------------------------------------------------------------ scenes

inline Scene blank_scene(int num_frames = 17, int reference = 4, std::string id = "fixture")
{
  Scene s;
  s.scene_id = std::move(id);
  s.num_frames = num_frames;
  s.reference_frame = reference;
  s.ego_poses.assign(static_cast<std::size_t>(num_frames), EgoPose{});
  return s;
}

/// Straight-line track p(f) = start + f * step over [first, last].
inline std::vector<Waypoint> line(int first, int last, Vec2 start, Vec2 step)
{
  std::vector<Waypoint> w;
  for (int f = first; f <= last; ++f) {w.push_back({f, start.x + f * step.x, start.y + f * step.y});}
  return w;
}

inline GtTrack gt(AgentId id, std::vector<Waypoint> w, AgentClass cls = AgentClass::car())
{
  return {id, std::move(cls), std::move(w)};
}

inline PredTrack pred(AgentId id, std::vector<Waypoint> w, double conf = 1.0, AgentClass cls = AgentClass::car())
{
  return {id, std::move(cls), conf, std::move(w)};
}

using ForecastMap = std::map<AgentId, ForecastSet>;

inline ForecastMap cv_forecasts(const std::vector<PredTrack> & preds, const EvalConfig & cfg)
{
  ForecastMap out;
  for (const auto & p : preds) {out.emplace(p.track_id, cv_forecast(p, cfg.k, cfg.horizon_frames));}
  return out;
}

inline SceneEvaluation eval_one(
  const Scene & s, const std::vector<PredTrack> & preds, const ForecastMap & f, const EvalConfig & cfg,
  std::size_t index = 0)
{
  ForecastLookup lookup = [&f](AgentId id) -> const ForecastSet * {
      auto it = f.find(id);
      return it == f.end() ? nullptr : &it->second;
    };
  return evaluate_scene(s, index, preds, lookup, cfg, true);
}

inline MetricRow overall(const SceneEvaluation & e, const EvalConfig & cfg)
{
  EvaluationPool pool;
  pool.merge(e);
  return pool.summarize([](const AgentClass &, double) {return true;}, cfg);
}

inline Scene translated(Scene s, Vec2 d)
{
  for (auto & p : s.ego_poses) {
    p.x += d.x;
    p.y += d.y;
  }
  for (auto & t : s.gt_tracks) {
    for (auto & w : t.waypoints) {
      w.x += d.x;
      w.y += d.y;
    }
  }
  return s;
}

inline std::vector<PredTrack> translated(std::vector<PredTrack> preds, Vec2 d)
{
  for (auto & p : preds) {
    for (auto & w : p.waypoints) {
      w.x += d.x;
      w.y += d.y;
    }
  }
  return preds;
}

inline ForecastMap translated(ForecastMap f, Vec2 d)
{
  for (auto & [id, set] : f) {
    for (auto & mode : set.modes) {
      for (auto & p : mode) {
        p.x += d.x;
        p.y += d.y;
      }
    }
  }
  return f;
}

// ------------------------------------------------------------ metric oracles

/// Per-mode loop: mean pointwise distance of the best mode.
inline double oracle_min_ade(const std::vector<Vec2> & gt_future, const std::vector<Trajectory> & modes)
{
  double best = 1e300;
  for (const auto & m : modes) {
    double s = 0.0;
    for (std::size_t i = 0; i < gt_future.size(); ++i) {
      s += std::sqrt(std::pow(m[i].x - gt_future[i].x, 2) + std::pow(m[i].y - gt_future[i].y, 2));
    }
    best = std::min(best, s / static_cast<double>(gt_future.size()));
  }
  return best;
}

inline double oracle_min_fde(const std::vector<Vec2> & gt_future, const std::vector<Trajectory> & modes)
{
  double best = 1e300;
  for (const auto & m : modes) {
    best = std::min(
      best, std::sqrt(std::pow(m.back().x - gt_future.back().x, 2) + std::pow(m.back().y - gt_future.back().y, 2)));
  }
  return best;
}

/// Explicit PR enumeration: interpolated precision sampled at recall 0, 0.01, ..., 1.
inline double oracle_ap(std::vector<std::pair<double, bool>> ranked, std::size_t num_gt)
{
  std::stable_sort(
    ranked.begin(), ranked.end(), [](const auto & a, const auto & b) {return a.first > b.first;});
  std::vector<double> rec;
  std::vector<double> prec;
  std::size_t tp = 0;
  for (std::size_t i = 0; i < ranked.size(); ++i) {
    if (ranked[i].second) {++tp;}
    rec.push_back(static_cast<double>(tp) / static_cast<double>(num_gt));
    prec.push_back(static_cast<double>(tp) / static_cast<double>(i + 1));
  }
  double sum = 0.0;
  for (int step = 0; step <= 100; ++step) {
    double p = 0.0;
    for (std::size_t i = 0; i < rec.size(); ++i) {
      // Integer comparison avoids 0.07 * 100 style rounding.
      const auto hit = static_cast<std::size_t>(std::llround(rec[i] * static_cast<double>(num_gt)));
      if (hit * 100 >= static_cast<std::size_t>(step) * num_gt) {p = std::max(p, prec[i]);}
    }
    sum += p;
  }
  return sum / 101.0;
}

// ------------------------------------------------------------ files

inline std::string slurp(const std::filesystem::path & p)
{
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// Relative path to file contents for every regular file under `root`.
inline std::map<std::string, std::string> tree(const std::filesystem::path & root)
{
  std::map<std::string, std::string> out;
  for (const auto & e : std::filesystem::recursive_directory_iterator(root)) {
    if (e.is_regular_file()) {out[std::filesystem::relative(e.path(), root).string()] = slurp(e.path());}
  }
  return out;
}

}  // namespace gauntlet::test

#endif  // GAUNTLET_TESTS__SUPPORT_HPP_

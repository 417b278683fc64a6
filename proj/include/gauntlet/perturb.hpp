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

// Seeded corruption of curated tracks along four axes: misdetection (FN),
// hallucination (FP), localization noise and identity switches (IDS).
//
// Every random decision is drawn whether or not it takes effect, so for a
// fixed seed a higher rate perturbs a superset of what a lower rate perturbs
// and jitter scales one fixed noise sample. Sweeps over a level are therefore
// coupled, not independent draws.

#ifndef GAUNTLET__PERTURB_HPP_
#define GAUNTLET__PERTURB_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gauntlet/rng.hpp"
#include "gauntlet/scene.hpp"

namespace gauntlet
{

enum class LocalizationMode { iid, per_track };

struct PerturbSpec
{
  double fn_rate{0.0};       // per-track drop probability
  double fp_rate{0.0};       // expected hallucinations per GT track
  double loc_sigma_m{0.0};   // per-axis std of localization noise
  double loc_sigma_per_m{0.0};  // extra std per meter of distance to ego
  LocalizationMode loc_mode{LocalizationMode::iid};
  double ids_rate{0.0};      // per-candidate-pair swap probability
  double ids_radius_m{10.0};
  std::uint64_t seed{0};

  // Hallucinated track distribution.
  double fp_min_range_m{5.0};
  double fp_max_range_m{50.0};
  double fp_max_speed_mps{15.0};
  double fp_min_confidence{0.3};
  double fp_max_confidence{1.0};

  void validate() const
  {
    auto fail = [](const char * field, const char * what) {
        throw ValidationError("<perturb>", field, what);
      };
    if (!(fn_rate >= 0.0 && fn_rate <= 1.0)) {fail("fn_rate", "outside [0, 1]");}
    if (!(fp_rate >= 0.0) || !std::isfinite(fp_rate)) {fail("fp_rate", "must be >= 0");}
    if (!(loc_sigma_m >= 0.0) || !std::isfinite(loc_sigma_m)) {fail("loc_sigma_m", "must be >= 0");}
    if (!(loc_sigma_per_m >= 0.0) || !std::isfinite(loc_sigma_per_m)) {
      fail("loc_sigma_per_m", "must be >= 0");
    }
    if (!(ids_rate >= 0.0 && ids_rate <= 1.0)) {fail("ids_rate", "outside [0, 1]");}
    if (!(ids_radius_m > 0.0)) {fail("ids_radius_m", "must be > 0");}
    if (!(fp_min_range_m >= 0.0 && fp_max_range_m >= fp_min_range_m)) {
      fail("fp_max_range_m", "range must satisfy 0 <= min <= max");
    }
    if (!(fp_max_speed_mps >= 0.0)) {fail("fp_max_speed_mps", "must be >= 0");}
    if (!(fp_min_confidence >= 0.0 && fp_max_confidence <= 1.0 &&
      fp_min_confidence <= fp_max_confidence))
    {
      fail("fp_max_confidence", "confidence range must lie in [0, 1]");
    }
  }
};

/// One injected error: {stage, scene_id, detail}.
struct ProvenanceEntry
{
  std::string stage;
  std::string scene_id;
  nlohmann::ordered_json detail;

  std::string to_json_line() const
  {
    nlohmann::ordered_json o;
    o["stage"] = stage;
    o["scene_id"] = scene_id;
    o["detail"] = detail;
    return o.dump();
  }
};

struct PerturbResult
{
  std::vector<PredTrack> tracks;
  std::vector<ProvenanceEntry> log;
};

/// First frame of the history window ending at the reference frame.
inline int history_start(const Scene & scene, int history_frames)
{
  return std::max(0, scene.reference_frame - history_frames);
}

/// GT tracks present at t0, truncated to the history window, confidence 1.
inline std::vector<PredTrack> gt_as_predictions(const Scene & scene, int history_frames)
{
  const int t0 = scene.reference_frame;
  const int w0 = history_start(scene, history_frames);
  std::vector<PredTrack> out;
  for (const auto & t : scene.gt_tracks) {
    if (!t.position_at(t0)) {continue;}
    PredTrack p;
    p.track_id = t.gt_id;
    p.cls = t.cls;
    p.confidence = 1.0;
    for (const auto & w : t.waypoints) {
      if (w.frame >= w0 && w.frame <= t0) {p.waypoints.push_back(w);}
    }
    out.push_back(std::move(p));
  }
  return out;
}

/// Removes each track independently with probability `fn_rate`.
inline std::vector<PredTrack> drop_agents(
  std::span<const PredTrack> tracks, double fn_rate, Rng & rng,
  std::vector<AgentId> * dropped = nullptr)
{
  std::vector<PredTrack> out;
  for (const auto & t : tracks) {
    if (rng.uniform01() < fn_rate) {
      if (dropped) {dropped->push_back(t.track_id);}
      continue;
    }
    out.push_back(t);
  }
  return out;
}

struct SwapEvent
{
  AgentId track_a{0};
  AgentId track_b{0};
  int frame{0};  // waypoints before this frame were exchanged
};

/**
 * @brief Exchanges the pasts of nearby track pairs.
 *
 * Candidate pairs are those whose t0 centers lie within `radius_m`. Pairs are
 * visited in random order; each is selected with probability `rate` and then
 * swaps all waypoints before a uniform frame in (window start, t0]. A track
 * joins at most one swap.
 */
inline std::vector<PredTrack> swap_identities(
  std::span<const PredTrack> tracks, double rate, double radius_m, const Scene & scene,
  int history_frames, Rng & order_rng, Rng & select_rng, std::vector<SwapEvent> * events = nullptr)
{
  std::vector<PredTrack> out(tracks.begin(), tracks.end());
  const int t0 = scene.reference_frame;
  const int w0 = history_start(scene, history_frames);
  if (t0 <= w0) {return out;}

  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto pi = out[i].position_at(t0);
    for (std::size_t j = i + 1; j < out.size(); ++j) {
      const auto pj = out[j].position_at(t0);
      if (pi && pj && distance(*pi, *pj) <= radius_m) {pairs.emplace_back(i, j);}
    }
  }
  order_rng.shuffle(pairs);

  std::vector<char> used(out.size(), 0);
  const auto span = static_cast<std::uint64_t>(t0 - w0);
  for (const auto & [i, j] : pairs) {
    const bool selected = select_rng.uniform01() < rate;
    const int frame = w0 + 1 + static_cast<int>(select_rng.index(span));
    if (!selected || used[i] || used[j]) {continue;}
    used[i] = used[j] = 1;
    auto split = [frame](const std::vector<Waypoint> & w) {
        auto it = std::lower_bound(
          w.begin(), w.end(), frame, [](const Waypoint & p, int f) {return p.frame < f;});
        return std::make_pair(
          std::vector<Waypoint>(w.begin(), it), std::vector<Waypoint>(it, w.end()));
      };
    auto [tail_a, head_a] = split(out[i].waypoints);
    auto [tail_b, head_b] = split(out[j].waypoints);
    tail_b.insert(tail_b.end(), head_a.begin(), head_a.end());
    tail_a.insert(tail_a.end(), head_b.begin(), head_b.end());
    out[i].waypoints = std::move(tail_b);
    out[j].waypoints = std::move(tail_a);
    if (events) {events->push_back({out[i].track_id, out[j].track_id, frame});}
  }
  return out;
}

/**
 * @brief Adds Gaussian noise to waypoints. The per-axis std at a waypoint is
 * `sigma_m + sigma_per_m * d`, d being its distance to the ego pose of that
 * frame (t0 distance in per-track mode).
 */
inline std::vector<PredTrack> jitter_localization(
  std::span<const PredTrack> tracks, double sigma_m, Rng & rng, const Scene * scene = nullptr,
  double sigma_per_m = 0.0, LocalizationMode mode = LocalizationMode::iid)
{
  std::vector<PredTrack> out(tracks.begin(), tracks.end());
  auto sigma_at = [&](const Waypoint & w) {
      if (scene == nullptr || sigma_per_m == 0.0) {return sigma_m;}
      const auto & ego = scene->ego_poses[static_cast<std::size_t>(w.frame)];
      return sigma_m + sigma_per_m * distance(w.position(), ego.position());
    };
  for (auto & t : out) {
    if (mode == LocalizationMode::per_track) {
      const double zx = rng.normal();
      const double zy = rng.normal();
      const double s = t.waypoints.empty() ? sigma_m : sigma_at(t.waypoints.back());
      for (auto & w : t.waypoints) {
        w.x += s * zx;
        w.y += s * zy;
      }
      continue;
    }
    for (auto & w : t.waypoints) {
      const double zx = rng.normal();
      const double zy = rng.normal();
      const double s = sigma_at(w);
      w.x += s * zx;
      w.y += s * zy;
    }
  }
  return out;
}

/**
 * @brief Appends Poisson(fp_rate * gt_count) fake constant-velocity tracks
 * around the ego. `count_rng` draws the count and `track_rng` the tracks, so
 * the n-th hallucination is the same at every rate.
 */
inline std::vector<PredTrack> hallucinate(
  const Scene & scene, std::span<const PredTrack> tracks, std::size_t gt_count,
  const PerturbSpec & spec, std::span<const AgentClass> classes, int history_frames,
  Rng & count_rng, Rng & track_rng, AgentId first_free_id)
{
  std::vector<PredTrack> out(tracks.begin(), tracks.end());
  const double mean = spec.fp_rate * static_cast<double>(gt_count);
  const std::uint64_t count = mean > 0.0 ? count_rng.poisson(mean) : 0;
  if (count == 0 || classes.empty()) {return out;}
  const int t0 = scene.reference_frame;
  const int w0 = history_start(scene, history_frames);
  const Vec2 ego = scene.ego_poses[static_cast<std::size_t>(t0)].position();
  const double r2_lo = spec.fp_min_range_m * spec.fp_min_range_m;
  const double r2_hi = spec.fp_max_range_m * spec.fp_max_range_m;
  for (std::uint64_t n = 0; n < count; ++n) {
    const double r = std::sqrt(track_rng.uniform(r2_lo, r2_hi));
    const double bearing = track_rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double heading = track_rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double speed = track_rng.uniform(0.0, spec.fp_max_speed_mps);
    const auto cls_index = static_cast<std::size_t>(track_rng.index(classes.size()));
    const double confidence =
      track_rng.uniform(spec.fp_min_confidence, spec.fp_max_confidence);

    const Vec2 p0{ego.x + r * std::cos(bearing), ego.y + r * std::sin(bearing)};
    const double vx = speed * std::cos(heading) / scene.frame_rate_hz;  // per frame
    const double vy = speed * std::sin(heading) / scene.frame_rate_hz;
    PredTrack p;
    p.track_id = first_free_id + static_cast<AgentId>(n);
    p.cls = classes[cls_index];
    p.confidence = confidence;
    for (int f = w0; f <= t0; ++f) {
      const double back = static_cast<double>(t0 - f);
      p.waypoints.push_back({f, p0.x - vx * back, p0.y - vy * back});
    }
    out.push_back(std::move(p));
  }
  return out;
}

/**
 * @brief Converts the scene's GT to predicted tracks and corrupts them in the
 * fixed order drop -> swap -> jitter -> hallucinate. Each stage draws from its
 * own sub-stream derived from (seed, scene_id, stage).
 */
inline PerturbResult apply(const Scene & scene, const PerturbSpec & spec, const EvalConfig & cfg = {})
{
  spec.validate();
  PerturbResult result;
  const std::string & sid = scene.scene_id;
  auto stream = [&](const char * stage) {return Rng::substream(spec.seed, sid, stage);};

  std::vector<PredTrack> tracks = gt_as_predictions(scene, cfg.history_frames);
  const std::size_t gt_count = tracks.size();
  AgentId next_id = 0;
  for (const auto & t : scene.gt_tracks) {next_id = std::max(next_id, t.gt_id + 1);}

  {
    Rng rng = stream("drop");
    std::vector<AgentId> dropped;
    tracks = drop_agents(tracks, spec.fn_rate, rng, &dropped);
    for (AgentId id : dropped) {
      result.log.push_back({"drop", sid, {{"track_id", id}}});
    }
  }
  {
    Rng order = stream("swap.order");
    Rng select = stream("swap.select");
    std::vector<SwapEvent> swaps;
    tracks = swap_identities(
      tracks, spec.ids_rate, spec.ids_radius_m, scene, cfg.history_frames, order, select, &swaps);
    for (const auto & s : swaps) {
      result.log.push_back(
        {"swap", sid, {{"track_a", s.track_a}, {"track_b", s.track_b}, {"frame", s.frame}}});
    }
  }
  if (spec.loc_sigma_m > 0.0 || spec.loc_sigma_per_m > 0.0) {
    Rng rng = stream("jitter");
    const auto before = tracks;
    tracks = jitter_localization(
      tracks, spec.loc_sigma_m, rng, &scene, spec.loc_sigma_per_m, spec.loc_mode);
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      double offset = 0.0;
      for (std::size_t w = 0; w < tracks[i].waypoints.size(); ++w) {
        offset += distance(tracks[i].waypoints[w].position(), before[i].waypoints[w].position());
      }
      const auto n = tracks[i].waypoints.size();
      result.log.push_back(
        {"jitter", sid,
          {{"track_id", tracks[i].track_id}, {"waypoints", n},
            {"mean_offset_m", n ? offset / static_cast<double>(n) : 0.0}}});
    }
  }
  {
    Rng count = stream("hallucinate.count");
    Rng rng = stream("hallucinate.tracks");
    const std::size_t before = tracks.size();
    tracks = hallucinate(
      scene, tracks, gt_count, spec, cfg.classes, cfg.history_frames, count, rng, next_id);
    for (std::size_t i = before; i < tracks.size(); ++i) {
      const auto & t = tracks[i];
      result.log.push_back(
        {"hallucinate", sid,
          {{"track_id", t.track_id}, {"class", t.cls.name()}, {"confidence", t.confidence},
            {"x", t.waypoints.back().x}, {"y", t.waypoints.back().y}}});
    }
  }
  result.tracks = std::move(tracks);
  return result;
}

}  // namespace gauntlet

#endif  // GAUNTLET__PERTURB_HPP_

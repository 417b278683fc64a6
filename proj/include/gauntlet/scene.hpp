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

#ifndef GAUNTLET__SCENE_HPP_
#define GAUNTLET__SCENE_HPP_

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace gauntlet
{

using AgentId = std::int64_t;

/// Thrown when a value violates a domain invariant. Names the scene and field.
class ValidationError : public std::runtime_error
{
public:
  ValidationError(std::string scene_id, std::string field, const std::string & what)
  : std::runtime_error(
      "scene '" + scene_id + "', field '" + field + "': " + what),
    scene_id_(std::move(scene_id)), field_(std::move(field))
  {
  }

  const std::string & scene_id() const noexcept { return scene_id_; }
  const std::string & field() const noexcept { return field_; }

private:
  std::string scene_id_;
  std::string field_;
};

struct Vec2
{
  double x{0.0};
  double y{0.0};

  friend bool operator==(const Vec2 &, const Vec2 &) = default;
};

inline double distance(const Vec2 & a, const Vec2 & b) noexcept
{
  return std::hypot(a.x - b.x, a.y - b.y);
}

/**
 * @brief Agent category. Only car, truck and bus are ever scored; anything
 * else is kept as `other` with its original label.
 */
class AgentClass
{
public:
  enum class Kind : std::uint8_t { car, truck, bus, other };

  AgentClass() = default;
  explicit AgentClass(Kind kind) : kind_(kind) {}

  static AgentClass car() { return AgentClass(Kind::car); }
  static AgentClass truck() { return AgentClass(Kind::truck); }
  static AgentClass bus() { return AgentClass(Kind::bus); }
  static AgentClass other(std::string label)
  {
    AgentClass c(Kind::other);
    c.label_ = std::move(label);
    return c;
  }

  static AgentClass parse(std::string_view name)
  {
    if (name == "car") {return car();}
    if (name == "truck") {return truck();}
    if (name == "bus") {return bus();}
    return other(std::string(name));
  }

  Kind kind() const noexcept { return kind_; }
  bool is_other() const noexcept { return kind_ == Kind::other; }

  std::string name() const
  {
    switch (kind_) {
      case Kind::car: return "car";
      case Kind::truck: return "truck";
      case Kind::bus: return "bus";
      case Kind::other: break;
    }
    return label_;
  }

  friend bool operator==(const AgentClass &, const AgentClass &) = default;
  friend auto operator<=>(const AgentClass &, const AgentClass &) = default;

private:
  Kind kind_{Kind::car};
  std::string label_;
};

inline std::vector<AgentClass> default_scored_classes()
{
  return {AgentClass::car(), AgentClass::truck(), AgentClass::bus()};
}

struct Waypoint
{
  int frame{0};
  double x{0.0};
  double y{0.0};

  Vec2 position() const noexcept { return {x, y}; }
  friend bool operator==(const Waypoint &, const Waypoint &) = default;
};

/// Lookup of the waypoint at `frame` in a contiguous or gap-free-prefix list.
inline std::optional<Vec2> position_at(const std::vector<Waypoint> & waypoints, int frame)
{
  if (waypoints.empty()) {return std::nullopt;}
  const int offset = frame - waypoints.front().frame;
  if (offset >= 0 && offset < static_cast<int>(waypoints.size()) &&
    waypoints[static_cast<std::size_t>(offset)].frame == frame)
  {
    return waypoints[static_cast<std::size_t>(offset)].position();
  }
  // Tracks with gaps (predicted tracks may have them) fall back to a search.
  auto it = std::lower_bound(
    waypoints.begin(), waypoints.end(), frame,
    [](const Waypoint & w, int f) {return w.frame < f;});
  if (it != waypoints.end() && it->frame == frame) {return it->position();}
  return std::nullopt;
}

struct GtTrack
{
  AgentId gt_id{0};
  AgentClass cls;
  std::vector<Waypoint> waypoints;

  std::optional<Vec2> position_at(int frame) const
  {
    return gauntlet::position_at(waypoints, frame);
  }
  friend bool operator==(const GtTrack &, const GtTrack &) = default;
};

/// A perception hypothesis: past track ending at the reference frame.
struct PredTrack
{
  AgentId track_id{0};
  AgentClass cls;
  double confidence{1.0};
  std::vector<Waypoint> waypoints;

  std::optional<Vec2> position_at(int frame) const
  {
    return gauntlet::position_at(waypoints, frame);
  }
  friend bool operator==(const PredTrack &, const PredTrack &) = default;
};

/// k future modes for one predicted track. Point h of a mode is at frame t0 + 1 + h.
struct ForecastSet
{
  AgentId track_id{0};
  std::vector<std::vector<Vec2>> modes;
  std::optional<std::vector<double>> mode_probs;

  std::size_t horizon() const noexcept { return modes.empty() ? 0 : modes.front().size(); }
  friend bool operator==(const ForecastSet &, const ForecastSet &) = default;
};

struct EgoPose
{
  double x{0.0};
  double y{0.0};
  double heading_rad{0.0};

  Vec2 position() const noexcept { return {x, y}; }
  friend bool operator==(const EgoPose &, const EgoPose &) = default;
};

struct Scene
{
  std::string scene_id;
  double frame_rate_hz{2.0};
  int num_frames{0};
  int reference_frame{0};
  std::vector<EgoPose> ego_poses;
  std::vector<GtTrack> gt_tracks;

  const GtTrack * find_gt(AgentId id) const
  {
    for (const auto & t : gt_tracks) {
      if (t.gt_id == id) {return &t;}
    }
    return nullptr;
  }
  friend bool operator==(const Scene &, const Scene &) = default;
};

enum class MissCriterion { fde, max_pointwise };

struct EvalConfig
{
  double match_threshold_m{2.0};
  double fde_threshold_m{4.0};
  int k{5};
  double miss_radius_m{4.0};
  int horizon_frames{12};
  int history_frames{4};
  double moving_displacement_m{2.0};
  std::vector<double> distance_bins_m{0.0, 10.0, 20.0, 30.0, 40.0, 50.0};
  std::vector<AgentClass> classes{default_scored_classes()};
  MissCriterion miss_criterion{MissCriterion::fde};

  bool scores(const AgentClass & c) const
  {
    return std::find(classes.begin(), classes.end(), c) != classes.end();
  }

  void validate() const
  {
    auto positive = [](double v, const char * field) {
        if (!(v > 0.0) || !std::isfinite(v)) {
          throw ValidationError("<config>", field, "must be finite and > 0");
        }
      };
    positive(match_threshold_m, "match_threshold_m");
    positive(fde_threshold_m, "fde_threshold_m");
    positive(miss_radius_m, "miss_radius_m");
    positive(moving_displacement_m, "moving_displacement_m");
    if (k <= 0) {throw ValidationError("<config>", "k", "must be > 0");}
    if (horizon_frames <= 0) {throw ValidationError("<config>", "horizon_frames", "must be > 0");}
    if (history_frames < 0) {throw ValidationError("<config>", "history_frames", "must be >= 0");}
    for (std::size_t i = 1; i < distance_bins_m.size(); ++i) {
      if (!(distance_bins_m[i] > distance_bins_m[i - 1])) {
        throw ValidationError("<config>", "distance_bins_m", "edges must be strictly increasing");
      }
    }
    for (const auto & c : classes) {
      if (c.is_other()) {
        throw ValidationError("<config>", "classes", "only car, truck and bus can be scored");
      }
    }
  }
};

namespace detail
{

inline void check_finite(const Scene & s, const std::string & field, double v)
{
  if (!std::isfinite(v)) {throw ValidationError(s.scene_id, field, "non-finite value");}
}

inline void check_waypoints(
  const Scene & s, const std::string & field, const std::vector<Waypoint> & wps,
  bool contiguous)
{
  for (std::size_t i = 0; i < wps.size(); ++i) {
    const auto & w = wps[i];
    check_finite(s, field, w.x);
    check_finite(s, field, w.y);
    if (w.frame < 0 || w.frame >= s.num_frames) {
      throw ValidationError(s.scene_id, field, "waypoint frame out of range");
    }
    if (i > 0) {
      if (contiguous && w.frame != wps[i - 1].frame + 1) {
        throw ValidationError(s.scene_id, field, "waypoint frames must increase by 1");
      }
      if (!contiguous && w.frame <= wps[i - 1].frame) {
        throw ValidationError(s.scene_id, field, "waypoint frames must be strictly increasing");
      }
    }
  }
}

}  // namespace detail

inline void validate(const Scene & s)
{
  if (!std::isfinite(s.frame_rate_hz) || s.frame_rate_hz <= 0.0) {
    throw ValidationError(s.scene_id, "frame_rate_hz", "must be finite and > 0");
  }
  if (s.num_frames <= 0) {throw ValidationError(s.scene_id, "num_frames", "must be > 0");}
  if (s.reference_frame < 0 || s.reference_frame >= s.num_frames) {
    throw ValidationError(s.scene_id, "reference_frame", "outside [0, num_frames)");
  }
  if (static_cast<int>(s.ego_poses.size()) != s.num_frames) {
    throw ValidationError(s.scene_id, "ego_poses", "ego pose count mismatch");
  }
  for (const auto & p : s.ego_poses) {
    detail::check_finite(s, "ego_poses", p.x);
    detail::check_finite(s, "ego_poses", p.y);
    detail::check_finite(s, "ego_poses", p.heading_rad);
  }
  std::vector<AgentId> ids;
  ids.reserve(s.gt_tracks.size());
  for (const auto & t : s.gt_tracks) {
    const std::string field = "gt_tracks[" + std::to_string(t.gt_id) + "]";
    if (t.waypoints.empty()) {throw ValidationError(s.scene_id, field, "empty track");}
    detail::check_waypoints(s, field, t.waypoints, true);
    ids.push_back(t.gt_id);
  }
  std::sort(ids.begin(), ids.end());
  if (std::adjacent_find(ids.begin(), ids.end()) != ids.end()) {
    throw ValidationError(s.scene_id, "gt_tracks", "duplicate gt_id");
  }
}

/// Checks a predicted track against the scene it belongs to.
inline void validate(const PredTrack & p, const Scene & s)
{
  const std::string field = "track[" + std::to_string(p.track_id) + "]";
  if (!(p.confidence >= 0.0 && p.confidence <= 1.0)) {
    throw ValidationError(s.scene_id, field + ".confidence", "outside [0, 1]");
  }
  if (p.waypoints.empty()) {throw ValidationError(s.scene_id, field, "empty track");}
  detail::check_waypoints(s, field, p.waypoints, false);
  if (p.waypoints.back().frame != s.reference_frame) {
    throw ValidationError(s.scene_id, field, "last waypoint must be at the reference frame");
  }
}

inline void validate(const ForecastSet & f, const std::string & scene_id)
{
  const std::string field = "forecast[" + std::to_string(f.track_id) + "]";
  if (f.modes.empty()) {throw ValidationError(scene_id, field + ".modes", "no modes");}
  const auto h = f.modes.front().size();
  if (h == 0) {throw ValidationError(scene_id, field + ".modes", "empty mode");}
  for (const auto & m : f.modes) {
    if (m.size() != h) {
      throw ValidationError(scene_id, field + ".modes", "modes have different lengths");
    }
    for (const auto & p : m) {
      if (!std::isfinite(p.x) || !std::isfinite(p.y)) {
        throw ValidationError(scene_id, field + ".modes", "non-finite value");
      }
    }
  }
  if (f.mode_probs) {
    if (f.mode_probs->size() != f.modes.size()) {
      throw ValidationError(scene_id, field + ".mode_probs", "one probability per mode required");
    }
    double sum = 0.0;
    for (double p : *f.mode_probs) {
      if (!(p >= 0.0)) {throw ValidationError(scene_id, field + ".mode_probs", "negative");}
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-6) {
      throw ValidationError(scene_id, field + ".mode_probs", "must sum to 1");
    }
  }
}

/**
 * @brief GT agents forming the evaluation population: scored class, track
 * covering every frame of [t0, t0 + horizon], and total displacement over the
 * horizon of at least `moving_displacement_m`.
 */
inline std::vector<AgentId> eligible_gt_agents(const Scene & scene, const EvalConfig & cfg)
{
  std::vector<AgentId> out;
  const int t0 = scene.reference_frame;
  const int end = t0 + cfg.horizon_frames;
  for (const auto & t : scene.gt_tracks) {
    if (!cfg.scores(t.cls)) {continue;}
    if (t.waypoints.empty() || t.waypoints.front().frame > t0 ||
      t.waypoints.back().frame < end)
    {
      continue;
    }
    const auto start = t.position_at(t0);
    const auto finish = t.position_at(end);
    if (!start || !finish) {continue;}
    if (distance(*start, *finish) >= cfg.moving_displacement_m) {out.push_back(t.gt_id);}
  }
  return out;
}

}  // namespace gauntlet

#endif  // GAUNTLET__SCENE_HPP_

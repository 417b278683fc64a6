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

// Synthetic scenes with analytic lane geometry, and the constant-velocity
// baseline forecaster used for self-tests and sweeps.

#ifndef GAUNTLET__SYNTH_HPP_
#define GAUNTLET__SYNTH_HPP_

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gauntlet/maps.hpp"
#include "gauntlet/rng.hpp"
#include "gauntlet/scene.hpp"

namespace gauntlet
{

enum class LaneLayout { straight, curved, crossing };

struct SynthSpec
{
  std::size_t num_scenes{10};
  std::size_t min_agents{3};
  std::size_t max_agents{8};
  double min_speed_mps{2.0};
  double max_speed_mps{12.0};
  double min_turn_rate{0.0};  // rad/s, sign drawn at random
  double max_turn_rate{0.0};
  LaneLayout layout{LaneLayout::straight};
  double extent_m{100.0};     // agents start within +-extent/2 along the road of the ego
  std::uint64_t seed{0};

  double frame_rate_hz{2.0};
  int history_frames{4};
  int horizon_frames{12};
  double min_ego_speed_mps{5.0};
  double max_ego_speed_mps{10.0};
  double lane_width_m{3.5};
  int lanes_per_direction{2};
  double curve_radius_m{80.0};
  double other_fraction{0.0};  // share of agents with a non-scored class

  // Raster stack around the ego at t0.
  std::uint32_t map_size_px{200};
  double map_resolution_m{0.5};

  void validate() const
  {
    auto fail = [](const char * field, const char * what) {
        throw ValidationError("<synth>", field, what);
      };
    if (min_agents > max_agents) {fail("max_agents", "empty agent range");}
    if (!(min_speed_mps >= 0.0 && max_speed_mps >= min_speed_mps && std::isfinite(max_speed_mps))) {
      fail("max_speed_mps", "speed range must be finite, non-empty and >= 0");
    }
    if (!(max_turn_rate >= min_turn_rate && min_turn_rate >= 0.0 && std::isfinite(max_turn_rate))) {
      fail("max_turn_rate", "turn-rate range must be finite and non-empty");
    }
    if (!(extent_m > 0.0 && std::isfinite(extent_m))) {fail("extent_m", "must be > 0");}
    if (!(frame_rate_hz > 0.0)) {fail("frame_rate_hz", "must be > 0");}
    if (history_frames < 1 || horizon_frames < 1) {fail("history_frames", "history and horizon must be >= 1");}
    if (!(min_ego_speed_mps >= 0.0 && max_ego_speed_mps >= min_ego_speed_mps)) {
      fail("max_ego_speed_mps", "empty ego speed range");
    }
    if (lanes_per_direction < 1) {fail("lanes_per_direction", "must be >= 1");}
    if (!(curve_radius_m > lane_width_m * lanes_per_direction * 2.0)) {
      fail("curve_radius_m", "curve radius must exceed the road width");
    }
    if (!(other_fraction >= 0.0 && other_fraction <= 1.0)) {fail("other_fraction", "outside [0, 1]");}
    if (map_size_px == 0 || !(map_resolution_m > 0.0)) {fail("map_size_px", "empty raster");}
  }
};

struct SynthScene
{
  Scene scene;
  RasterMap map;
};

/// Planar constant-turn-rate motion state at time zero.
struct Kinematics
{
  Vec2 p0;
  double heading{0.0};
  double speed{0.0};
  double turn_rate{0.0};

  Vec2 at(double t) const
  {
    if (turn_rate == 0.0) {
      return {p0.x + speed * std::cos(heading) * t, p0.y + speed * std::sin(heading) * t};
    }
    const double r = speed / turn_rate;
    const double h = heading + turn_rate * t;
    return {p0.x + r * (std::sin(h) - std::sin(heading)), p0.y + r * (std::cos(heading) - std::cos(h))};
  }
  double heading_at(double t) const { return heading + turn_rate * t; }
};

namespace detail
{

inline std::vector<Vec2> arc_points(Vec2 center, double radius, double a0, double a1, int n)
{
  std::vector<Vec2> pts;
  for (int i = 0; i <= n; ++i) {
    const double a = a0 + (a1 - a0) * i / n;
    pts.push_back({center.x + radius * std::cos(a), center.y + radius * std::sin(a)});
  }
  return pts;
}

// Straight road along +x through `origin` rotated by `angle`, clipped to +-half_len.
inline void add_straight_road(
  MapGeometry & g, const SynthSpec & s, Vec2 origin, double angle, double half_len,
  double crossing_at)
{
  const double c = std::cos(angle);
  const double sn = std::sin(angle);
  auto P = [&](double u, double v) {return Vec2{origin.x + c * u - sn * v, origin.y + sn * u + c * v};};
  const double half_w = s.lane_width_m * s.lanes_per_direction;
  g.polygons.push_back({kRoadPolygons, {P(-half_len, -half_w), P(half_len, -half_w), P(half_len, half_w), P(-half_len, half_w)}});
  g.polylines.push_back({kRoadDivider, {P(-half_len, 0.0), P(half_len, 0.0)}, 1.0});
  for (int k = 1; k < s.lanes_per_direction; ++k) {
    for (double side : {-1.0, 1.0}) {
      const double v = side * k * s.lane_width_m;
      g.polylines.push_back({kLaneDivider, {P(-half_len, v), P(half_len, v)}, 1.0});
    }
  }
  g.polygons.push_back({kPedCrossing, {P(crossing_at - 2.0, -half_w), P(crossing_at + 2.0, -half_w), P(crossing_at + 2.0, half_w), P(crossing_at - 2.0, half_w)}});
  for (double side : {-1.0, 1.0}) {
    const double v0 = side * half_w;
    const double v1 = side * (half_w + 3.0);
    g.polygons.push_back({kWalkway, {P(-half_len, v0), P(half_len, v0), P(half_len, v1), P(-half_len, v1)}});
  }
}

inline void add_curved_road(MapGeometry & g, const SynthSpec & s, Vec2 center, double a0, double a1)
{
  const double half_w = s.lane_width_m * s.lanes_per_direction;
  const double R = s.curve_radius_m;
  const int n = 96;
  auto band = [&](std::uint32_t ch, double r_in, double r_out) {
      auto outer = arc_points(center, r_out, a0, a1, n);
      auto inner = arc_points(center, r_in, a1, a0, n);
      outer.insert(outer.end(), inner.begin(), inner.end());
      g.polygons.push_back({ch, std::move(outer)});
    };
  band(kRoadPolygons, R - half_w, R + half_w);
  g.polylines.push_back({kRoadDivider, arc_points(center, R, a0, a1, n), 1.0});
  for (int k = 1; k < s.lanes_per_direction; ++k) {
    for (double side : {-1.0, 1.0}) {
      g.polylines.push_back({kLaneDivider, arc_points(center, R + side * k * s.lane_width_m, a0, a1, n), 1.0});
    }
  }
  band(kWalkway, R + half_w, R + half_w + 3.0);
  band(kWalkway, R - half_w - 3.0, R - half_w);
  const double ax = 0.5 * (a0 + a1) + 25.0 / R;
  const double da = 2.0 / R;
  auto cross = arc_points(center, R + half_w, ax - da, ax + da, 4);
  auto back = arc_points(center, R - half_w, ax + da, ax - da, 4);
  cross.insert(cross.end(), back.begin(), back.end());
  g.polygons.push_back({kPedCrossing, std::move(cross)});
}

}  // namespace detail

/**
 * @brief Generates `spec.num_scenes` scenes with their GT raster.
 *
 * The ego drives the first lane right of the road center (on the main road
 * for `crossing`) and passes (0, -lane_width / 2) at t0. Agents get a random lane,
 * direction of travel, along-road offset and speed; positions come from
 * closed-form constant-velocity or constant-turn-rate motion evaluated at
 * t = frame / frame_rate. Scene i draws from its own sub-stream.
 */
inline std::vector<SynthScene> generate(const SynthSpec & spec)
{
  spec.validate();
  std::vector<SynthScene> out;
  out.reserve(spec.num_scenes);
  const int ref = spec.history_frames;
  const int num_frames = spec.history_frames + 1 + spec.horizon_frames;
  const double t_ref = ref / spec.frame_rate_hz;
  const double R = spec.curve_radius_m;
  const Vec2 curve_center{0.0, R};

  for (std::size_t i = 0; i < spec.num_scenes; ++i) {
    char id[32];
    std::snprintf(id, sizeof(id), "synth-%05zu", i);
    Rng rng = Rng::substream(spec.seed, id, "synth");

    Scene scene;
    scene.scene_id = id;
    scene.frame_rate_hz = spec.frame_rate_hz;
    scene.num_frames = num_frames;
    scene.reference_frame = ref;

    // Ego: center of the innermost right lane, at (0, -lane_width/2) at t0.
    const double ego_speed = rng.uniform(spec.min_ego_speed_mps, spec.max_ego_speed_mps);
    const Vec2 ego_ref{0.0, -0.5 * spec.lane_width_m};
    Kinematics ego;
    ego.speed = ego_speed;
    if (spec.layout == LaneLayout::curved) {
      ego.turn_rate = ego_speed / (R + 0.5 * spec.lane_width_m);
    }
    ego.heading = -ego.turn_rate * t_ref;
    ego.p0 = Kinematics{ego_ref, 0.0, ego_speed, ego.turn_rate}.at(-t_ref);
    for (int f = 0; f < num_frames; ++f) {
      const double t = f / spec.frame_rate_hz;
      const Vec2 p = ego.at(t);
      scene.ego_poses.push_back({p.x, p.y, ego.heading_at(t)});
    }

    const auto n_agents = spec.min_agents +
      static_cast<std::size_t>(rng.index(spec.max_agents - spec.min_agents + 1));
    for (std::size_t a = 0; a < n_agents; ++a) {
      const int lane = static_cast<int>(rng.index(static_cast<std::uint64_t>(2 * spec.lanes_per_direction)));
      const double along = rng.uniform(-0.5 * spec.extent_m, 0.5 * spec.extent_m);
      const double speed = rng.uniform(spec.min_speed_mps, spec.max_speed_mps);
      const double turn_mag = rng.uniform(spec.min_turn_rate, spec.max_turn_rate);
      const double turn = rng.bernoulli(0.5) ? turn_mag : -turn_mag;
      const bool on_cross_road = spec.layout == LaneLayout::crossing && rng.bernoulli(0.5);
      const double cls_u = rng.uniform01();
      const bool other = rng.uniform01() < spec.other_fraction;

      // Lanes 0..n-1 are right of center (travel +u), n..2n-1 left (travel -u).
      const int n = spec.lanes_per_direction;
      const bool forward = lane < n;
      const int k = forward ? lane : lane - n;
      const double lateral = (forward ? -1.0 : 1.0) * (k + 0.5) * spec.lane_width_m;

      Kinematics kin;
      kin.speed = speed;
      Vec2 p_ref;
      double heading_ref = 0.0;
      double turn_rate = turn;
      if (spec.layout == LaneLayout::curved) {
        const double radius = R - lateral;  // +lateral points toward the center
        const double angle = -std::numbers::pi / 2 + along / R;
        p_ref = {curve_center.x + radius * std::cos(angle), curve_center.y + radius * std::sin(angle)};
        heading_ref = angle + (forward ? std::numbers::pi / 2 : -std::numbers::pi / 2);
        turn_rate = (forward ? 1.0 : -1.0) * speed / radius;
      } else if (on_cross_road) {
        // Second road along +y through x = 20.
        p_ref = {20.0 - lateral, along};
        heading_ref = forward ? std::numbers::pi / 2 : -std::numbers::pi / 2;
      } else {
        p_ref = {along, lateral};
        heading_ref = forward ? 0.0 : std::numbers::pi;
      }
      kin.turn_rate = turn_rate;
      kin.heading = heading_ref - turn_rate * t_ref;
      {
        Kinematics back{p_ref, heading_ref, speed, turn_rate};
        kin.p0 = back.at(-t_ref);
      }

      GtTrack g;
      g.gt_id = static_cast<AgentId>(a + 1);
      if (other) {
        g.cls = AgentClass::other("construction_vehicle");
      } else if (cls_u < 0.7) {
        g.cls = AgentClass::car();
      } else if (cls_u < 0.9) {
        g.cls = AgentClass::truck();
      } else {
        g.cls = AgentClass::bus();
      }
      for (int f = 0; f < num_frames; ++f) {
        const Vec2 p = kin.at(f / spec.frame_rate_hz);
        g.waypoints.push_back({f, p.x, p.y});
      }
      scene.gt_tracks.push_back(std::move(g));
    }

    // Raster centered on the ego at t0, origin snapped to the pixel lattice.
    const double res = spec.map_resolution_m;
    const double half = 0.5 * spec.map_size_px * res;
    const double ox = res * std::floor((ego_ref.x - half) / res) + 0.5 * res;
    const double oy = res * std::floor((ego_ref.y - half) / res) + 0.5 * res;
    MapGeometry geom;
    const double reach = 2.0 * half + 50.0;
    switch (spec.layout) {
      case LaneLayout::straight:
        detail::add_straight_road(geom, spec, {0.0, 0.0}, 0.0, reach, 25.0);
        break;
      case LaneLayout::crossing:
        detail::add_straight_road(geom, spec, {0.0, 0.0}, 0.0, reach, 25.0);
        detail::add_straight_road(geom, spec, {20.0, 0.0}, std::numbers::pi / 2, reach, -25.0);
        break;
      case LaneLayout::curved: {
          const double span = reach / R;
          detail::add_curved_road(
            geom, spec, curve_center, -std::numbers::pi / 2 - std::min(span, std::numbers::pi),
            -std::numbers::pi / 2 + std::min(span, std::numbers::pi));
          break;
        }
    }
    RasterMap grid = RasterMap::blank(spec.map_size_px, spec.map_size_px, 5, res, ox, oy);
    validate(scene);
    out.push_back({std::move(scene), rasterize(geom, grid)});
  }
  return out;
}

/**
 * @brief Constant-velocity baseline. Velocity comes from the last two
 * waypoints; mode 0 extrapolates it, mode m > 0 rotates it by
 * ceil(m / 2) * 5 degrees, positive for odd m. Modes are equiprobable.
 * A single-waypoint track yields stationary modes.
 */
inline ForecastSet cv_forecast(const PredTrack & track, int k, int horizon_frames)
{
  if (track.waypoints.empty()) {throw std::invalid_argument("cv_forecast needs at least one waypoint");}
  if (k <= 0 || horizon_frames <= 0) {throw std::invalid_argument("k and horizon must be > 0");}
  const Waypoint & last = track.waypoints.back();
  double vx = 0.0;
  double vy = 0.0;
  if (track.waypoints.size() >= 2) {
    const Waypoint & prev = track.waypoints[track.waypoints.size() - 2];
    const double df = static_cast<double>(last.frame - prev.frame);
    vx = (last.x - prev.x) / df;
    vy = (last.y - prev.y) / df;
  }
  ForecastSet f;
  f.track_id = track.track_id;
  for (int m = 0; m < k; ++m) {
    const int step = (m + 1) / 2;
    const double deg = (m % 2 == 1 ? 1.0 : -1.0) * 5.0 * step;
    const double a = deg * std::numbers::pi / 180.0;
    const double c = std::cos(a);
    const double s = std::sin(a);
    const double mx = m == 0 ? vx : c * vx - s * vy;
    const double my = m == 0 ? vy : s * vx + c * vy;
    std::vector<Vec2> mode;
    mode.reserve(static_cast<std::size_t>(horizon_frames));
    for (int h = 1; h <= horizon_frames; ++h) {mode.push_back({last.x + h * mx, last.y + h * my});}
    f.modes.push_back(std::move(mode));
  }
  f.mode_probs = std::vector<double>(static_cast<std::size_t>(k), 1.0 / k);
  return f;
}

inline std::vector<ForecastSet> cv_forecast_all(std::span<const PredTrack> tracks, int k, int horizon_frames)
{
  std::vector<ForecastSet> out;
  out.reserve(tracks.size());
  for (const auto & t : tracks) {out.push_back(cv_forecast(t, k, horizon_frames));}
  return out;
}

}  // namespace gauntlet

#endif  // GAUNTLET__SYNTH_HPP_

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

// Newline-delimited JSON interchange for scenes, predicted tracks and
// forecasts. Serialization is canonical: fixed key order, shortest
// round-trip number formatting, LF line endings.

#ifndef GAUNTLET__IO_HPP_
#define GAUNTLET__IO_HPP_

#include <cstddef>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"

#include "gauntlet/scene.hpp"

namespace gauntlet
{

class ParseError : public std::runtime_error
{
public:
  ParseError(std::size_t line, const std::string & what)
  : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// One line of a `*.preds.jsonl` file. The forecast is optional so tracks and
/// forecasts can also be shipped in separate files.
struct PredRecord
{
  std::string scene_id;
  PredTrack track;
  std::optional<ForecastSet> forecast;

  friend bool operator==(const PredRecord &, const PredRecord &) = default;
};

/// One line of a standalone forecast file.
struct ForecastRecord
{
  std::string scene_id;
  ForecastSet forecast;

  friend bool operator==(const ForecastRecord &, const ForecastRecord &) = default;
};

namespace detail
{

using ojson = nlohmann::ordered_json;

inline const ojson & require(const ojson & obj, const char * key)
{
  auto it = obj.find(key);
  if (it == obj.end()) {throw std::runtime_error(std::string("missing key '") + key + "'");}
  return *it;
}

inline double as_real(const ojson & v, const char * what)
{
  if (!v.is_number()) {throw std::runtime_error(std::string(what) + ": expected a number");}
  return v.get<double>();
}

inline std::int64_t as_int(const ojson & v, const char * what)
{
  if (!v.is_number_integer()) {
    throw std::runtime_error(std::string(what) + ": expected an integer");
  }
  return v.get<std::int64_t>();
}

inline std::string as_string(const ojson & v, const char * what)
{
  if (!v.is_string()) {throw std::runtime_error(std::string(what) + ": expected a string");}
  return v.get<std::string>();
}

inline Vec2 as_xy(const ojson & v, const char * what)
{
  if (!v.is_array() || v.size() != 2) {
    throw std::runtime_error(std::string(what) + ": expected an [x, y] pair");
  }
  return {as_real(v[0], what), as_real(v[1], what)};
}

inline ojson xy_json(double x, double y) { return ojson::array({x, y}); }

/// `xy` arrays start at `start_frame`; `null` entries mark missing frames.
inline std::vector<Waypoint> parse_track_xy(const ojson & obj, bool allow_gaps)
{
  const auto start = as_int(require(obj, "start_frame"), "start_frame");
  const auto & xy = require(obj, "xy");
  if (!xy.is_array()) {throw std::runtime_error("xy: expected an array");}
  std::vector<Waypoint> out;
  out.reserve(xy.size());
  int frame = static_cast<int>(start);
  for (const auto & p : xy) {
    if (p.is_null()) {
      if (!allow_gaps) {throw std::runtime_error("xy: gaps are not allowed in GT tracks");}
    } else {
      const auto v = as_xy(p, "xy");
      out.push_back({frame, v.x, v.y});
    }
    ++frame;
  }
  return out;
}

inline ojson track_xy_json(const std::vector<Waypoint> & wps)
{
  ojson xy = ojson::array();
  if (wps.empty()) {return xy;}
  int frame = wps.front().frame;
  for (const auto & w : wps) {
    for (; frame < w.frame; ++frame) {xy.push_back(nullptr);}
    xy.push_back(xy_json(w.x, w.y));
    ++frame;
  }
  return xy;
}

inline std::vector<std::vector<Vec2>> parse_modes(const ojson & v)
{
  if (!v.is_array()) {throw std::runtime_error("modes: expected an array");}
  std::vector<std::vector<Vec2>> modes;
  modes.reserve(v.size());
  for (const auto & m : v) {
    if (!m.is_array()) {throw std::runtime_error("modes: expected arrays of [x, y]");}
    std::vector<Vec2> pts;
    pts.reserve(m.size());
    for (const auto & p : m) {pts.push_back(as_xy(p, "modes"));}
    modes.push_back(std::move(pts));
  }
  return modes;
}

inline ojson modes_json(const ForecastSet & f)
{
  ojson modes = ojson::array();
  for (const auto & m : f.modes) {
    ojson pts = ojson::array();
    for (const auto & p : m) {pts.push_back(xy_json(p.x, p.y));}
    modes.push_back(std::move(pts));
  }
  return modes;
}

inline std::optional<std::vector<double>> parse_mode_probs(const ojson & obj)
{
  auto it = obj.find("mode_probs");
  if (it == obj.end() || it->is_null()) {return std::nullopt;}
  if (!it->is_array()) {throw std::runtime_error("mode_probs: expected an array");}
  std::vector<double> probs;
  for (const auto & p : *it) {probs.push_back(as_real(p, "mode_probs"));}
  return probs;
}

template<typename Fn>
void for_each_line(std::istream & in, Fn && fn)
{
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {line.pop_back();}
    if (line.find_first_not_of(" \t") == std::string::npos) {continue;}
    ojson obj;
    try {
      obj = ojson::parse(line);
    } catch (const nlohmann::json::parse_error & e) {
      throw ParseError(lineno, e.what());
    }
    if (!obj.is_object()) {throw ParseError(lineno, "expected a JSON object");}
    try {
      fn(obj);
    } catch (const ValidationError &) {
      throw;
    } catch (const std::runtime_error & e) {
      throw ParseError(lineno, e.what());
    }
  }
}

}  // namespace detail

// ---------------------------------------------------------------- scenes

inline Scene scene_from_json(const detail::ojson & obj)
{
  using namespace detail;
  Scene s;
  s.scene_id = as_string(require(obj, "scene_id"), "scene_id");
  s.frame_rate_hz = as_real(require(obj, "frame_rate_hz"), "frame_rate_hz");
  s.num_frames = static_cast<int>(as_int(require(obj, "num_frames"), "num_frames"));
  s.reference_frame =
    static_cast<int>(as_int(require(obj, "reference_frame"), "reference_frame"));
  const auto & poses = require(obj, "ego_poses");
  if (!poses.is_array()) {throw std::runtime_error("ego_poses: expected an array");}
  for (const auto & p : poses) {
    if (!p.is_array() || p.size() != 3) {
      throw std::runtime_error("ego_poses: expected [x, y, heading] triples");
    }
    s.ego_poses.push_back(
      {as_real(p[0], "ego_poses"), as_real(p[1], "ego_poses"), as_real(p[2], "ego_poses")});
  }
  const auto & tracks = require(obj, "gt_tracks");
  if (!tracks.is_array()) {throw std::runtime_error("gt_tracks: expected an array");}
  for (const auto & t : tracks) {
    GtTrack g;
    g.gt_id = as_int(require(t, "gt_id"), "gt_id");
    g.cls = AgentClass::parse(as_string(require(t, "class"), "class"));
    g.waypoints = parse_track_xy(t, false);
    s.gt_tracks.push_back(std::move(g));
  }
  validate(s);
  return s;
}

inline detail::ojson scene_to_json(const Scene & s)
{
  using detail::ojson;
  ojson poses = ojson::array();
  for (const auto & p : s.ego_poses) {poses.push_back(ojson::array({p.x, p.y, p.heading_rad}));}
  ojson tracks = ojson::array();
  for (const auto & t : s.gt_tracks) {
    ojson o;
    o["gt_id"] = t.gt_id;
    o["class"] = t.cls.name();
    o["start_frame"] = t.waypoints.empty() ? 0 : t.waypoints.front().frame;
    o["xy"] = detail::track_xy_json(t.waypoints);
    tracks.push_back(std::move(o));
  }
  ojson o;
  o["scene_id"] = s.scene_id;
  o["frame_rate_hz"] = s.frame_rate_hz;
  o["num_frames"] = s.num_frames;
  o["reference_frame"] = s.reference_frame;
  o["ego_poses"] = std::move(poses);
  o["gt_tracks"] = std::move(tracks);
  return o;
}

/// Single-line canonical serialization, without the trailing newline.
inline std::string serialize_scene(const Scene & s) { return scene_to_json(s).dump(); }

inline std::vector<Scene> load_scenes(std::istream & in)
{
  std::vector<Scene> out;
  detail::for_each_line(in, [&](const detail::ojson & obj) {out.push_back(scene_from_json(obj));});
  return out;
}

inline void write_scenes(std::ostream & out, std::span<const Scene> scenes)
{
  for (const auto & s : scenes) {out << serialize_scene(s) << '\n';}
}

// ----------------------------------------------------------- predictions

inline PredRecord pred_from_json(const detail::ojson & obj)
{
  using namespace detail;
  PredRecord r;
  r.scene_id = as_string(require(obj, "scene_id"), "scene_id");
  r.track.track_id = as_int(require(obj, "track_id"), "track_id");
  r.track.cls = AgentClass::parse(as_string(require(obj, "class"), "class"));
  r.track.confidence = as_real(require(obj, "confidence"), "confidence");
  r.track.waypoints = parse_track_xy(obj, true);
  auto modes = obj.find("modes");
  if (modes != obj.end() && !modes->is_null()) {
    ForecastSet f;
    f.track_id = r.track.track_id;
    f.modes = parse_modes(*modes);
    f.mode_probs = parse_mode_probs(obj);
    validate(f, r.scene_id);
    r.forecast = std::move(f);
  }
  return r;
}

inline detail::ojson pred_to_json(const PredRecord & r)
{
  detail::ojson o;
  o["scene_id"] = r.scene_id;
  o["track_id"] = r.track.track_id;
  o["class"] = r.track.cls.name();
  o["confidence"] = r.track.confidence;
  o["start_frame"] = r.track.waypoints.empty() ? 0 : r.track.waypoints.front().frame;
  o["xy"] = detail::track_xy_json(r.track.waypoints);
  if (r.forecast) {
    o["modes"] = detail::modes_json(*r.forecast);
    if (r.forecast->mode_probs) {o["mode_probs"] = *r.forecast->mode_probs;}
  }
  return o;
}

inline std::string serialize_pred(const PredRecord & r) { return pred_to_json(r).dump(); }

inline std::vector<PredRecord> load_preds(std::istream & in)
{
  std::vector<PredRecord> out;
  detail::for_each_line(in, [&](const detail::ojson & obj) {out.push_back(pred_from_json(obj));});
  return out;
}

inline void write_preds(std::ostream & out, std::span<const PredRecord> preds)
{
  for (const auto & r : preds) {out << serialize_pred(r) << '\n';}
}

// ------------------------------------------------------------- forecasts

inline ForecastRecord forecast_from_json(const detail::ojson & obj)
{
  using namespace detail;
  ForecastRecord r;
  r.scene_id = as_string(require(obj, "scene_id"), "scene_id");
  r.forecast.track_id = as_int(require(obj, "track_id"), "track_id");
  r.forecast.modes = parse_modes(require(obj, "modes"));
  r.forecast.mode_probs = parse_mode_probs(obj);
  validate(r.forecast, r.scene_id);
  return r;
}

inline std::string serialize_forecast(const ForecastRecord & r)
{
  detail::ojson o;
  o["scene_id"] = r.scene_id;
  o["track_id"] = r.forecast.track_id;
  o["modes"] = detail::modes_json(r.forecast);
  if (r.forecast.mode_probs) {o["mode_probs"] = *r.forecast.mode_probs;}
  return o.dump();
}

inline std::vector<ForecastRecord> load_forecasts(std::istream & in)
{
  std::vector<ForecastRecord> out;
  detail::for_each_line(
    in, [&](const detail::ojson & obj) {out.push_back(forecast_from_json(obj));});
  return out;
}

inline void write_forecasts(std::ostream & out, std::span<const ForecastRecord> records)
{
  for (const auto & r : records) {out << serialize_forecast(r) << '\n';}
}

}  // namespace gauntlet

#endif  // GAUNTLET__IO_HPP_

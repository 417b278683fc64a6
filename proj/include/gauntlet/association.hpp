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

#ifndef GAUNTLET__ASSOCIATION_HPP_
#define GAUNTLET__ASSOCIATION_HPP_

#include <algorithm>
#include <cstdint>
#include <map>
#include <span>
#include <unordered_set>
#include <vector>

#include "gauntlet/assignment.hpp"
#include "gauntlet/scene.hpp"

namespace gauntlet
{

struct MatchedPair
{
  AgentId gt_id{0};
  AgentId track_id{0};
  double distance_m{0.0};

  friend bool operator==(const MatchedPair &, const MatchedPair &) = default;
};

/**
 * @brief Correspondence at the reference frame.
 *
 * All scored-class GT agents present at t0 take part in the assignment so a
 * correct detection of a parked or partially observed agent is not counted as
 * a false track; such pairs land in `ignored` and are excluded from scoring.
 */
struct T0Match
{
  std::vector<MatchedPair> pairs;     // eligible GT only
  std::vector<AgentId> missed_gt;     // eligible GT only
  std::vector<AgentId> false_tracks;
  std::vector<MatchedPair> ignored;   // matched to a non-eligible GT agent
};

/// Scored-class predictions ordered by descending confidence, then track id.
inline std::vector<const PredTrack *> scoring_order(
  std::span<const PredTrack> preds, const EvalConfig & cfg)
{
  std::vector<const PredTrack *> out;
  for (const auto & p : preds) {
    if (cfg.scores(p.cls)) {out.push_back(&p);}
  }
  std::stable_sort(
    out.begin(), out.end(), [](const PredTrack * a, const PredTrack * b) {
      if (a->confidence != b->confidence) {return a->confidence > b->confidence;}
      return a->track_id < b->track_id;
    });
  return out;
}

inline T0Match match_t0(const Scene & scene, std::span<const PredTrack> preds, const EvalConfig & cfg)
{
  const int t0 = scene.reference_frame;
  const auto eligible_ids = eligible_gt_agents(scene, cfg);
  const std::unordered_set<AgentId> eligible(eligible_ids.begin(), eligible_ids.end());

  struct Row { AgentId id; Vec2 pos; };
  std::vector<Row> rows;
  for (const auto & t : scene.gt_tracks) {
    if (!cfg.scores(t.cls)) {continue;}
    if (auto p = t.position_at(t0)) {rows.push_back({t.gt_id, *p});}
  }
  struct Col { AgentId id; Vec2 pos; };
  std::vector<Col> cols;
  for (const auto * p : scoring_order(preds, cfg)) {
    if (auto pos = p->position_at(t0)) {cols.push_back({p->track_id, *pos});}
  }

  CostMatrix costs(rows.size(), cols.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    for (std::size_t c = 0; c < cols.size(); ++c) {
      const double d = distance(rows[r].pos, cols[c].pos);
      if (d <= cfg.match_threshold_m) {costs(r, c) = d;}
    }
  }
  const Assignment a = solve(costs);

  T0Match out;
  for (const auto & [r, c] : a.pairs) {
    MatchedPair m{rows[r].id, cols[c].id, costs(r, c)};
    (eligible.count(m.gt_id) ? out.pairs : out.ignored).push_back(m);
  }
  for (std::size_t r : a.unmatched_rows) {
    if (eligible.count(rows[r].id)) {out.missed_gt.push_back(rows[r].id);}
  }
  for (std::size_t c : a.unmatched_cols) {out.false_tracks.push_back(cols[c].id);}
  return out;
}

// ---------------------------------------------------------------- CLEAR-MOT

/// An object involved in a tracking event, located relative to the ego pose of that frame.
struct ObjectRef
{
  AgentId id{0};
  AgentClass cls;
  double ego_distance_m{0.0};
};

struct MotMatch
{
  AgentId gt_id{0};
  AgentId track_id{0};
  double distance_m{0.0};
  AgentClass gt_class;
  double ego_distance_m{0.0};  // of the GT object
};

struct FrameEvents
{
  int frame{0};
  std::vector<MotMatch> matches;
  std::vector<ObjectRef> misses;           // GT objects (FN)
  std::vector<ObjectRef> false_positives;  // predictions (FP)
  std::vector<ObjectRef> switches;         // GT objects whose matched id changed (IDS)

  std::size_t fp_count() const noexcept { return false_positives.size(); }
  std::size_t fn_count() const noexcept { return misses.size(); }
  std::size_t ids_count() const noexcept { return switches.size(); }
};

struct MotEvents
{
  std::vector<FrameEvents> frames;
  std::int64_t fp{0};
  std::int64_t fn{0};
  std::int64_t ids{0};
  std::int64_t gt_total{0};
  double match_distance_sum{0.0};
  std::int64_t match_count{0};
};

/**
 * @brief Frame-by-frame CLEAR-MOT association over the history window
 * [t0 - history_frames, t0].
 *
 * Each frame solves one gated assignment whose costs rank, in order: number
 * of pairs, number of previous-frame correspondences kept, total distance.
 * Keeping a correspondence therefore never costs a match. An identity switch
 * is counted when a GT object is matched to a track other than the one it was
 * most recently matched to, gaps included.
 */
inline MotEvents associate_mot(
  const Scene & scene, std::span<const PredTrack> preds, const EvalConfig & cfg)
{
  MotEvents ev;
  const int t0 = scene.reference_frame;
  const int first = std::max(0, t0 - cfg.history_frames);
  const auto ordered = scoring_order(preds, cfg);

  std::map<AgentId, AgentId> previous;  // correspondences of the previous frame
  std::map<AgentId, AgentId> last_matched;

  for (int f = first; f <= t0; ++f) {
    const Vec2 ego = scene.ego_poses[static_cast<std::size_t>(f)].position();
    struct Obj { AgentId id; AgentClass cls; Vec2 pos; };
    std::vector<Obj> gts;
    for (const auto & t : scene.gt_tracks) {
      if (!cfg.scores(t.cls)) {continue;}
      if (auto p = t.position_at(f)) {gts.push_back({t.gt_id, t.cls, *p});}
    }
    std::vector<Obj> hyps;
    for (const auto * p : ordered) {
      if (auto pos = p->position_at(f)) {hyps.push_back({p->track_id, p->cls, *pos});}
    }

    const double keep_bonus =
      cfg.match_threshold_m * static_cast<double>(std::min(gts.size(), hyps.size())) + 1.0;
    CostMatrix costs(gts.size(), hyps.size());
    for (std::size_t r = 0; r < gts.size(); ++r) {
      auto prev = previous.find(gts[r].id);
      for (std::size_t c = 0; c < hyps.size(); ++c) {
        const double d = distance(gts[r].pos, hyps[c].pos);
        if (d > cfg.match_threshold_m) {continue;}
        const bool carried = prev != previous.end() && prev->second == hyps[c].id;
        costs(r, c) = carried ? d : d + keep_bonus;
      }
    }
    const Assignment a = solve(costs);

    FrameEvents fe;
    fe.frame = f;
    std::map<AgentId, AgentId> current;
    for (const auto & [r, c] : a.pairs) {
      const auto & g = gts[r];
      const auto & h = hyps[c];
      const double d = distance(g.pos, h.pos);
      const double ego_d = distance(g.pos, ego);
      fe.matches.push_back({g.id, h.id, d, g.cls, ego_d});
      auto last = last_matched.find(g.id);
      if (last != last_matched.end() && last->second != h.id) {
        fe.switches.push_back({g.id, g.cls, ego_d});
      }
      last_matched[g.id] = h.id;
      current[g.id] = h.id;
      ev.match_distance_sum += d;
    }
    for (std::size_t r : a.unmatched_rows) {
      fe.misses.push_back({gts[r].id, gts[r].cls, distance(gts[r].pos, ego)});
    }
    for (std::size_t c : a.unmatched_cols) {
      fe.false_positives.push_back({hyps[c].id, hyps[c].cls, distance(hyps[c].pos, ego)});
    }
    previous = std::move(current);

    ev.gt_total += static_cast<std::int64_t>(gts.size());
    ev.match_count += static_cast<std::int64_t>(fe.matches.size());
    ev.fp += static_cast<std::int64_t>(fe.fp_count());
    ev.fn += static_cast<std::int64_t>(fe.fn_count());
    ev.ids += static_cast<std::int64_t>(fe.ids_count());
    ev.frames.push_back(std::move(fe));
  }
  return ev;
}

}  // namespace gauntlet

#endif  // GAUNTLET__ASSOCIATION_HPP_

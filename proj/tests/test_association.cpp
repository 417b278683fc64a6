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

#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "gauntlet/association.hpp"
#include "support.hpp"

namespace gauntlet
{
namespace
{

Scene five_agents()
{
  Scene s = test::blank_scene();
  for (AgentId i = 1; i <= 5; ++i) {
    s.gt_tracks.push_back(test::gt(i, test::line(0, 16, {0.0, 4.0 * static_cast<double>(i)}, {1.0, 0.0})));
  }
  return s;
}

std::vector<PredTrack> exact_preds(const Scene & s, AgentId offset = 100)
{
  std::vector<PredTrack> out;
  for (const auto & t : s.gt_tracks) {
    std::vector<Waypoint> w;
    for (const auto & p : t.waypoints) {
      if (p.frame <= s.reference_frame) {w.push_back(p);}
    }
    out.push_back(test::pred(t.gt_id + offset, w));
  }
  return out;
}

TEST(MatchT0, ExactPredictionsMatchEveryAgent)
{
  const Scene s = five_agents();
  const auto preds = exact_preds(s);
  const auto m = match_t0(s, preds, EvalConfig{});
  ASSERT_EQ(m.pairs.size(), 5u);
  for (const auto & p : m.pairs) {
    EXPECT_EQ(p.track_id, p.gt_id + 100);
    EXPECT_EQ(p.distance_m, 0.0);
  }
  EXPECT_TRUE(m.missed_gt.empty());
  EXPECT_TRUE(m.false_tracks.empty());
}

TEST(MatchT0, GateIsTwoMetersInclusive)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  const std::vector<PredTrack> far{test::pred(7, test::line(0, 4, {0, 2.01}, {1, 0}))};
  auto m = match_t0(s, far, EvalConfig{});
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_EQ(m.missed_gt, (std::vector<AgentId>{1}));
  EXPECT_EQ(m.false_tracks, (std::vector<AgentId>{7}));

  const std::vector<PredTrack> edge{test::pred(7, test::line(0, 4, {0, 2.0}, {1, 0}))};
  m = match_t0(s, edge, EvalConfig{});
  ASSERT_EQ(m.pairs.size(), 1u);
  EXPECT_EQ(m.pairs[0].distance_m, 2.0);
}

TEST(MatchT0, JitteredAgentsAgreeWithBruteForce)
{
  std::mt19937_64 g(3);
  std::normal_distribution<double> n(0.0, 1.0);
  EvalConfig cfg;
  for (int trial = 0; trial < 200; ++trial) {
    Scene s = test::blank_scene();
    for (AgentId i = 1; i <= 5; ++i) {
      s.gt_tracks.push_back(test::gt(i, test::line(0, 16, {0.0, 1.5 * static_cast<double>(i)}, {1.0, 0.0})));
    }
    std::vector<PredTrack> preds;
    for (AgentId i = 1; i <= 5; ++i) {
      preds.push_back(
        test::pred(i + 10, {{4, 4.0 + n(g), 1.5 * static_cast<double>(i) + n(g)}}, 0.5));
    }
    const auto m = match_t0(s, preds, cfg);

    CostMatrix c(5, 5);
    for (std::size_t r = 0; r < 5; ++r) {
      const Vec2 gp = *s.gt_tracks[r].position_at(4);
      for (std::size_t k = 0; k < 5; ++k) {
        const double d = distance(gp, *preds[k].position_at(4));
        if (d <= cfg.match_threshold_m) {c(r, k) = d;}
      }
    }
    const auto oracle = test::oracle_assignment(c);
    ASSERT_EQ(m.pairs.size(), oracle.pairs);
    double total = 0.0;
    for (const auto & p : m.pairs) {total += p.distance_m;}
    ASSERT_NEAR(total, oracle.cost, 1e-9);
    ASSERT_EQ(m.pairs.size() + m.missed_gt.size(), 5u);
    ASSERT_EQ(m.pairs.size() + m.false_tracks.size(), 5u);
  }
}

TEST(MatchT0, NonEligibleMatchesAreIgnoredNotFalse)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {0, 0})));  // parked
  const std::vector<PredTrack> preds{test::pred(5, test::line(0, 4, {0.1, 0}, {0, 0}))};
  const auto m = match_t0(s, preds, EvalConfig{});
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_TRUE(m.false_tracks.empty());
  ASSERT_EQ(m.ignored.size(), 1u);
  EXPECT_TRUE(m.missed_gt.empty());
}

TEST(MatchT0, UnscoredClassesAreDropped)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0}), AgentClass::other("bicycle")));
  const std::vector<PredTrack> preds{test::pred(5, test::line(0, 4, {0, 0}, {1, 0}), 1.0, AgentClass::other("x"))};
  const auto m = match_t0(s, preds, EvalConfig{});
  EXPECT_TRUE(m.pairs.empty());
  EXPECT_TRUE(m.false_tracks.empty());
  EXPECT_TRUE(m.missed_gt.empty());
}

TEST(ClearMot, SwappedIdentitiesGiveTwoSwitches)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  s.gt_tracks.push_back(test::gt(2, test::line(0, 16, {0, 10}, {1, 0})));
  std::vector<Waypoint> a;
  std::vector<Waypoint> b;
  for (int f = 0; f <= 4; ++f) {
    const bool swapped = f >= 2;
    a.push_back({f, static_cast<double>(f), swapped ? 10.0 : 0.0});
    b.push_back({f, static_cast<double>(f), swapped ? 0.0 : 10.0});
  }
  const std::vector<PredTrack> preds{test::pred(10, a), test::pred(20, b)};
  const auto ev = associate_mot(s, preds, EvalConfig{});
  EXPECT_EQ(ev.ids, 2);
  EXPECT_EQ(ev.fp, 0);
  EXPECT_EQ(ev.fn, 0);
  EXPECT_EQ(ev.frames.size(), 5u);
  EXPECT_EQ(ev.frames[2].ids_count(), 2u);
}

TEST(ClearMot, UndetectedAgentIsMissedEveryFrame)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  const auto ev = associate_mot(s, std::vector<PredTrack>{}, EvalConfig{});
  EXPECT_EQ(ev.fn, 5);
  EXPECT_EQ(ev.gt_total, 5);
  EXPECT_EQ(mota(ev.fp, ev.fn, ev.ids, ev.gt_total), 0.0);
}

TEST(ClearMot, SwitchAcrossGapIsCounted)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  const std::vector<PredTrack> preds{
    test::pred(10, test::line(0, 1, {0, 0}, {1, 0})),
    test::pred(20, test::line(3, 4, {0, 0}, {1, 0}))};
  const auto ev = associate_mot(s, preds, EvalConfig{});
  EXPECT_EQ(ev.fn, 1);
  EXPECT_EQ(ev.ids, 1);
}

TEST(ClearMot, KeepsCorrespondenceOverCloserNewcomer)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  // Track 10 follows at 1 m; track 20 appears at frame 3 exactly on the agent.
  const std::vector<PredTrack> preds{
    test::pred(10, test::line(0, 4, {0, 1}, {1, 0})),
    test::pred(20, test::line(3, 4, {0, 0}, {1, 0}))};
  const auto ev = associate_mot(s, preds, EvalConfig{});
  EXPECT_EQ(ev.ids, 0);
  EXPECT_EQ(ev.fp, 2);
  EXPECT_DOUBLE_EQ(ev.match_distance_sum, 5.0);
}

TEST(ClearMot, SwitchesInvariantToTrackRelabeling)
{
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SynthSpec spec;
    spec.num_scenes = 1;
    spec.seed = seed;
    const Scene s = generate(spec).front().scene;
    PerturbSpec ps;
    ps.ids_rate = 0.3;
    ps.fn_rate = 0.2;
    ps.loc_sigma_m = 0.4;
    ps.seed = seed;
    auto preds = apply(s, ps, EvalConfig{}).tracks;
    auto relabeled = preds;
    for (auto & p : relabeled) {p.track_id = 1000000 - p.track_id;}
    const auto a = associate_mot(s, preds, EvalConfig{});
    const auto b = associate_mot(s, relabeled, EvalConfig{});
    EXPECT_EQ(a.ids, b.ids) << "seed " << seed;
    EXPECT_EQ(a.fn, b.fn);
    EXPECT_EQ(a.fp, b.fp);
    EXPECT_EQ(a.match_count, b.match_count);
  }
}

TEST(ClearMot, MatchesPlusMissesEqualGtPresence)
{
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    SynthSpec spec;
    spec.num_scenes = 1;
    spec.seed = seed + 100;
    const Scene s = generate(spec).front().scene;
    PerturbSpec ps;
    ps.fn_rate = 0.3;
    ps.fp_rate = 1.0;
    ps.loc_sigma_m = 1.0;
    ps.seed = seed;
    const auto preds = apply(s, ps, EvalConfig{}).tracks;
    const auto ev = associate_mot(s, preds, EvalConfig{});
    for (const auto & f : ev.frames) {
      std::size_t present = 0;
      for (const auto & t : s.gt_tracks) {present += t.position_at(f.frame) ? 1 : 0;}
      std::size_t hyps = 0;
      for (const auto & p : preds) {hyps += p.position_at(f.frame) ? 1 : 0;}
      EXPECT_EQ(f.matches.size() + f.fn_count(), present);
      EXPECT_EQ(f.matches.size() + f.fp_count(), hyps);
      EXPECT_LE(f.ids_count(), f.matches.size());
    }
  }
}

}  // namespace
}  // namespace gauntlet

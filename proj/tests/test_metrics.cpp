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

#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "gauntlet/metrics.hpp"
#include "support.hpp"

namespace gauntlet
{
namespace
{

std::vector<Vec2> straight(std::size_t n, Vec2 offset = {0, 0})
{
  std::vector<Vec2> out;
  for (std::size_t i = 0; i < n; ++i) {out.push_back({static_cast<double>(i + 1) + offset.x, offset.y});}
  return out;
}

TEST(Displacement, ConstantThreeFourFiveOffset)
{
  const auto gt = straight(12);
  const std::vector<Trajectory> modes{straight(12, {3, 4})};
  EXPECT_DOUBLE_EQ(min_ade(gt, modes), 5.0);
  EXPECT_DOUBLE_EQ(min_fde(gt, modes), 5.0);
}

TEST(Displacement, BestModeIsChosenIndependently)
{
  // Mode 0 is good on average but bad at the end; mode 1 the reverse.
  const auto gt = straight(4);
  Trajectory a = gt;
  a.back().y += 10.0;
  Trajectory b = gt;
  for (std::size_t i = 0; i + 1 < b.size(); ++i) {b[i].y += 5.0;}
  const std::vector<Trajectory> modes{a, b};
  EXPECT_DOUBLE_EQ(min_ade(gt, modes), 2.5);
  EXPECT_DOUBLE_EQ(min_fde(gt, modes), 0.0);
}

TEST(Displacement, MatchesPerModeOracle)
{
  std::mt19937_64 g(5);
  std::normal_distribution<double> n(0.0, 3.0);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t h = 1 + trial % 12;
    std::vector<Vec2> gt;
    for (std::size_t i = 0; i < h; ++i) {gt.push_back({n(g), n(g)});}
    std::vector<Trajectory> modes(1 + trial % 6);
    for (auto & m : modes) {
      for (std::size_t i = 0; i < h; ++i) {m.push_back({gt[i].x + n(g), gt[i].y + n(g)});}
    }
    ASSERT_NEAR(min_ade(gt, modes), test::oracle_min_ade(gt, modes), 1e-12);
    ASSERT_NEAR(min_fde(gt, modes), test::oracle_min_fde(gt, modes), 1e-12);
  }
}

TEST(Displacement, LengthMismatchThrows)
{
  EXPECT_THROW(min_ade(straight(3), {straight(2)}), std::invalid_argument);
  EXPECT_THROW(min_fde(straight(3), {}), std::invalid_argument);
}

TEST(Miss, FinalDisplacementReading)
{
  const auto gt = straight(12);
  EXPECT_FALSE(miss(gt, {straight(12, {0, 2.0})}, 2.0));
  EXPECT_TRUE(miss(gt, {straight(12, {0, 2.01})}, 2.0));
  Trajectory wild = gt;
  wild[3].y = 50.0;
  EXPECT_FALSE(miss(gt, {wild}, 2.0, MissCriterion::fde));
  EXPECT_TRUE(miss(gt, {wild}, 2.0, MissCriterion::max_pointwise));
  EXPECT_FALSE(miss(gt, {wild, gt}, 2.0, MissCriterion::max_pointwise));
}

TEST(Miss, MissRateMatchesBatchOracle)
{
  std::mt19937_64 g(9);
  std::normal_distribution<double> n(0.0, 2.0);
  std::size_t missed = 0;
  std::size_t expected = 0;
  for (int i = 0; i < 400; ++i) {
    const auto gt = straight(12);
    std::vector<Trajectory> modes(3);
    double best_final = 1e300;
    for (auto & m : modes) {
      m = straight(12, {n(g), n(g)});
      best_final = std::min(best_final, distance(m.back(), gt.back()));
    }
    missed += miss(gt, modes, 2.0) ? 1 : 0;
    expected += best_final > 2.0 ? 1 : 0;
  }
  EXPECT_EQ(missed, expected);
}

TEST(Tracking, MotaFormula)
{
  EXPECT_NEAR(mota(155, 0, 0, 10333), 0.985, 5e-4);
  EXPECT_DOUBLE_EQ(mota(0, 0, 0, 10), 1.0);
  EXPECT_DOUBLE_EQ(mota(10, 10, 5, 10), -1.5);
  EXPECT_THROW(mota(1, 0, 0, 0), std::domain_error);
}

TEST(Tracking, MotpIsMeanMatchedDistance)
{
  EXPECT_DOUBLE_EQ(motp(1.0 + 3.0, 2), 2.0);
  EXPECT_THROW(motp(0.0, 0), std::domain_error);
}

TEST(AveragePrecision, MatchesHandEnumeratedCurve)
{
  // Ranks 1..10 with TP pattern T F T T F F T F F T and 6 GT.
  const std::vector<bool> tp{true, false, true, true, false, false, true, false, false, true};
  std::vector<ApEntry> entries;
  std::vector<std::pair<double, bool>> ranked;
  for (std::size_t i = 0; i < tp.size(); ++i) {
    const double conf = 1.0 - 0.05 * static_cast<double>(i);
    entries.push_back({conf, 0, static_cast<AgentId>(i), tp[i]});
    ranked.emplace_back(conf, tp[i]);
  }
  // Envelope: recall 1/6 -> 1, 2/6..3/6 -> 0.75, 4/6 -> 4/7, 5/6 -> 0.5, 1 unreachable.
  double hand = 0.0;
  for (int s = 0; s <= 100; ++s) {
    if (s * 6 <= 100) {
      hand += 1.0;
    } else if (s * 6 <= 300) {
      hand += 0.75;
    } else if (s * 6 <= 400) {
      hand += 4.0 / 7.0;
    } else if (s * 6 <= 500) {
      hand += 0.5;
    }
  }
  hand /= 101.0;
  EXPECT_NEAR(*average_precision(entries, 6), hand, 1e-12);
  EXPECT_NEAR(*average_precision(entries, 6), test::oracle_ap(ranked, 6), 1e-12);
}

TEST(AveragePrecision, RandomRankingsMatchOracle)
{
  std::mt19937_64 g(21);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 300; ++trial) {
    const std::size_t n = trial % 25;
    std::vector<ApEntry> entries;
    std::vector<std::pair<double, bool>> ranked;
    std::size_t tps = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool tp = u(g) < 0.5;
      tps += tp ? 1 : 0;
      const double conf = std::round(u(g) * 20.0) / 20.0;
      entries.push_back({conf, 0, static_cast<AgentId>(i), tp});
      ranked.emplace_back(conf, tp);
    }
    // Oracle breaks ties by insertion order, which equals track id order here.
    const std::size_t num_gt = tps + trial % 4 + (n == 0 ? 1 : 0);
    ASSERT_NEAR(*average_precision(entries, num_gt), test::oracle_ap(ranked, num_gt), 1e-12);
  }
}

TEST(AveragePrecision, AbsentVersusZero)
{
  EXPECT_FALSE(average_precision({}, 0).has_value());
  EXPECT_EQ(average_precision({{0.5, 0, 1, false}}, 0), 0.0);
  EXPECT_EQ(average_precision({}, 3), 0.0);
  EXPECT_DOUBLE_EQ(*average_precision({{0.9, 0, 1, true}}, 1), 1.0);
}

TEST(AveragePrecision, MeanOverDefinedClasses)
{
  const std::vector<std::optional<double>> aps{0.375, 0.354, 0.300};
  EXPECT_NEAR(*map_f(aps), 0.343, 5e-4);
  const std::vector<std::optional<double>> partial{0.5, std::nullopt, 0.25};
  EXPECT_DOUBLE_EQ(*map_f(partial), 0.375);
  const std::vector<std::optional<double>> none{std::nullopt, std::nullopt};
  EXPECT_FALSE(map_f(none).has_value());
}

// ------------------------------------------------------------ scene level

Scene one_agent(double speed_per_frame = 1.0)
{
  Scene s = test::blank_scene();
  s.ego_poses.assign(17, EgoPose{-10.0, 0.0, 0.0});
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {speed_per_frame, 0})));
  return s;
}

ForecastSet single_mode(AgentId id, const Scene & s, Vec2 final_offset)
{
  // Exact future, then the final waypoint displaced.
  ForecastSet f;
  f.track_id = id;
  Trajectory t;
  for (int h = 1; h <= 12; ++h) {t.push_back(*s.gt_tracks[0].position_at(4 + h));}
  t.back().x += final_offset.x;
  t.back().y += final_offset.y;
  f.modes = {t};
  return f;
}

TEST(SceneEvaluation, ForecastTruePositiveThreshold)
{
  const Scene s = one_agent();
  const std::vector<PredTrack> preds{test::pred(7, test::line(0, 4, {0, 0}, {1, 0}))};
  EvalConfig cfg;
  for (const auto & [fde, expected] : {std::pair{5.0, 0.0}, std::pair{3.9, 1.0}}) {
    const test::ForecastMap f{{7, single_mode(7, s, {0, fde})}};
    const auto row = test::overall(test::eval_one(s, preds, f, cfg), cfg);
    ASSERT_TRUE(row.map_f);
    EXPECT_DOUBLE_EQ(*row.map_f, expected) << "fde " << fde;
    EXPECT_DOUBLE_EQ(*row.min_fde, fde);
  }
}

TEST(SceneEvaluation, MissingForecastStrictAndLenient)
{
  const Scene s = one_agent();
  const std::vector<PredTrack> preds{test::pred(7, test::line(0, 4, {0, 0}, {1, 0}))};
  const EvalConfig cfg;
  EXPECT_THROW(test::eval_one(s, preds, {}, cfg), ValidationError);
  const auto e = evaluate_scene(s, 0, preds, ForecastLookup{}, cfg, false);
  EXPECT_EQ(e.missing_forecasts, (std::vector<AgentId>{7}));
  const auto row = test::overall(e, cfg);
  EXPECT_FALSE(row.min_ade.has_value());
  EXPECT_EQ(row.mr, 1.0);
  EXPECT_EQ(row.map_f, 0.0);
}

TEST(SceneEvaluation, ShortForecastHorizonIsRejected)
{
  const Scene s = one_agent();
  const std::vector<PredTrack> preds{test::pred(7, test::line(0, 4, {0, 0}, {1, 0}))};
  auto f = single_mode(7, s, {0, 0});
  f.modes[0].pop_back();
  EXPECT_THROW(test::eval_one(s, preds, {{7, f}}, EvalConfig{}), ValidationError);
}

TEST(SceneEvaluation, TopKUsesMostProbableModes)
{
  const Scene s = one_agent();
  const std::vector<PredTrack> preds{test::pred(7, test::line(0, 4, {0, 0}, {1, 0}))};
  ForecastSet f = single_mode(7, s, {0, 0});
  ForecastSet far = single_mode(7, s, {0, 30});
  f.modes = {far.modes[0], f.modes[0]};
  f.mode_probs = std::vector<double>{0.9, 0.1};
  EvalConfig cfg;
  cfg.k = 1;
  auto row = test::overall(test::eval_one(s, preds, {{7, f}}, cfg), cfg);
  EXPECT_DOUBLE_EQ(*row.min_fde, 30.0);
  cfg.k = 2;
  row = test::overall(test::eval_one(s, preds, {{7, f}}, cfg), cfg);
  EXPECT_DOUBLE_EQ(*row.min_fde, 0.0);
}

TEST(Report, StratifiedBinsPartitionObjects)
{
  SynthSpec spec;
  spec.num_scenes = 30;
  EvalConfig cfg;
  EvaluationPool pool;
  std::size_t idx = 0;
  for (const auto & g : generate(spec)) {
    PerturbSpec ps;
    ps.fn_rate = 0.2;
    ps.fp_rate = 0.3;
    ps.loc_sigma_m = 0.5;
    ps.seed = idx;
    const auto preds = apply(g.scene, ps, cfg).tracks;
    pool.merge(test::eval_one(g.scene, preds, test::cv_forecasts(preds, cfg), cfg, idx++));
  }
  const auto all = pool.summarize([](const AgentClass &, double) {return true;}, cfg);
  const auto bins = stratify(pool, cfg.distance_bins_m, cfg);
  std::int64_t eligible = 0;
  std::int64_t matched = 0;
  std::int64_t ft = 0;
  std::int64_t fp = 0;
  std::int64_t fn = 0;
  std::int64_t gt = 0;
  for (const auto & b : bins) {
    eligible += b.row.eligible_gt;
    matched += b.row.matched;
    ft += b.row.false_tracks;
    fp += b.row.fp;
    fn += b.row.fn;
    gt += b.row.gt_total;
  }
  EXPECT_EQ(eligible, all.eligible_gt);
  EXPECT_EQ(matched, all.matched);
  EXPECT_EQ(ft, all.false_tracks);
  EXPECT_EQ(fp, all.fp);
  EXPECT_EQ(fn, all.fn);
  EXPECT_EQ(gt, all.gt_total);
  EXPECT_GE(bins.size(), 3u);
}

TEST(Report, DistanceWeightedAggregate)
{
  std::vector<BinRow> bins(3);
  bins[0] = {0, 10, {}};
  bins[1] = {10, 20, {}};
  bins[2] = {20, std::numeric_limits<double>::infinity(), {}};
  bins[0].row.min_ade = 1.0;
  bins[1].row.min_ade = 4.0;
  bins[2].row.min_ade = 10.0;
  bins[1].row.mota = 0.5;
  bins[0].row.fp = 3;
  bins[2].row.fp = 4;
  // Inverse midpoints: 1/5, 1/15, 1/20.
  const double w0 = 1.0 / 5.0;
  const double w1 = 1.0 / 15.0;
  const double w2 = 1.0 / 20.0;
  const auto row = distance_weighted(bins);
  EXPECT_NEAR(*row.min_ade, (w0 * 1.0 + w1 * 4.0 + w2 * 10.0) / (w0 + w1 + w2), 1e-12);
  EXPECT_DOUBLE_EQ(*row.mota, 0.5);
  EXPECT_FALSE(row.motp.has_value());
  EXPECT_EQ(row.fp, 7);

  const std::vector<double> custom{1.0, 0.0, 1.0};
  EXPECT_DOUBLE_EQ(*distance_weighted(bins, custom).min_ade, 5.5);
}

TEST(Report, BuildReportHasScoredClassesAndBins)
{
  SynthSpec spec;
  spec.num_scenes = 5;
  EvalConfig cfg;
  EvaluationPool pool;
  std::size_t idx = 0;
  for (const auto & g : generate(spec)) {
    const auto preds = gt_as_predictions(g.scene, cfg.history_frames);
    pool.merge(test::eval_one(g.scene, preds, test::cv_forecasts(preds, cfg), cfg, idx++));
  }
  const Report r = build_report(pool, cfg);
  EXPECT_EQ(r.per_class.size(), cfg.classes.size());
  EXPECT_FALSE(r.per_distance_bin.empty());
  EXPECT_EQ(r.overall.mota, 1.0);
}

}  // namespace
}  // namespace gauntlet

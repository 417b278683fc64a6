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

#include <sstream>
#include <string>
#include <vector>

#include "gauntlet/io.hpp"
#include "gauntlet/scene.hpp"
#include "gauntlet/synth.hpp"
#include "support.hpp"

namespace gauntlet
{
namespace
{

std::string empty_scene_line()
{
  std::string poses;
  for (int i = 0; i < 17; ++i) {poses += std::string(i ? "," : "") + "[0,0,0]";}
  return R"({"scene_id":"s0","frame_rate_hz":2.0,"num_frames":17,"reference_frame":4,"ego_poses":[)" +
         poses + R"(],"gt_tracks":[]})";
}

TEST(SceneIo, LoadsSceneWithoutTracks)
{
  std::istringstream in(empty_scene_line() + "\n");
  const auto scenes = load_scenes(in);
  ASSERT_EQ(scenes.size(), 1u);
  EXPECT_EQ(scenes[0].scene_id, "s0");
  EXPECT_EQ(scenes[0].num_frames, 17);
  EXPECT_TRUE(scenes[0].gt_tracks.empty());
}

TEST(SceneIo, EgoPoseCountMismatchIsRejected)
{
  std::istringstream in(
    R"({"scene_id":"bad","frame_rate_hz":2.0,"num_frames":3,"reference_frame":0,"ego_poses":[[0,0,0]],"gt_tracks":[]})");
  try {
    load_scenes(in);
    FAIL() << "expected a validation error";
  } catch (const ValidationError & e) {
    EXPECT_EQ(e.scene_id(), "bad");
    EXPECT_EQ(e.field(), "ego_poses");
    EXPECT_NE(std::string(e.what()).find("ego pose count mismatch"), std::string::npos);
  }
}

TEST(SceneIo, ParseErrorsCarryLineNumber)
{
  std::istringstream in(empty_scene_line() + "\n{not json\n");
  try {
    load_scenes(in);
    FAIL() << "expected a parse error";
  } catch (const ParseError & e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing(R"({"scene_id":"x"})");
  EXPECT_THROW(load_scenes(missing), ParseError);
}

TEST(SceneIo, InvariantViolationsNameSceneAndField)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, {{0, 0, 0}, {2, 1, 1}}));
  EXPECT_THROW(validate(s), ValidationError);

  Scene dup = test::blank_scene();
  dup.gt_tracks.push_back(test::gt(1, test::line(0, 2, {0, 0}, {1, 0})));
  dup.gt_tracks.push_back(test::gt(1, test::line(0, 2, {0, 5}, {1, 0})));
  EXPECT_THROW(validate(dup), ValidationError);

  Scene ref = test::blank_scene();
  ref.reference_frame = 17;
  EXPECT_THROW(validate(ref), ValidationError);

  Scene bad_frame = test::blank_scene();
  bad_frame.gt_tracks.push_back(test::gt(1, test::line(15, 17, {0, 0}, {1, 0})));
  EXPECT_THROW(validate(bad_frame), ValidationError);
}

TEST(SceneIo, GtTracksMayNotHaveGaps)
{
  std::string line = empty_scene_line();
  line.replace(line.find(R"("gt_tracks":[])"), 14,
    R"("gt_tracks":[{"gt_id":1,"class":"car","start_frame":0,"xy":[[0,0],null,[1,1]]}])");
  std::istringstream in(line);
  EXPECT_THROW(load_scenes(in), ParseError);
}

TEST(SceneIo, GeneratedScenesRoundTripStructurallyAndByteForByte)
{
  SynthSpec spec;
  spec.num_scenes = 5;
  spec.min_agents = 3;
  spec.max_agents = 3;
  spec.layout = LaneLayout::curved;
  spec.max_turn_rate = 0.2;
  std::vector<Scene> scenes;
  for (auto & g : generate(spec)) {scenes.push_back(g.scene);}
  std::ostringstream out;
  write_scenes(out, scenes);
  std::istringstream in(out.str());
  const auto back = load_scenes(in);
  EXPECT_EQ(back, scenes);
  std::ostringstream again;
  write_scenes(again, back);
  EXPECT_EQ(again.str(), out.str());
}

TEST(SceneIo, PredictionsWithGapsAndEmbeddedForecastRoundTrip)
{
  PredRecord r;
  r.scene_id = "s0";
  r.track = test::pred(9, {{1, 0.1, 0.2}, {3, 1.0 / 3.0, -2.5}, {4, 7.0, 8.0}}, 0.25, AgentClass::other("bicycle"));
  ForecastSet f;
  f.track_id = 9;
  f.modes = {{{1, 2}, {3, 4}}, {{5, 6}, {7, 8}}};
  f.mode_probs = std::vector<double>{0.75, 0.25};
  r.forecast = f;
  const std::string line = serialize_pred(r);
  EXPECT_NE(line.find("null"), std::string::npos);
  std::istringstream in(line + "\n");
  const auto back = load_preds(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);
  EXPECT_EQ(serialize_pred(back[0]), line);
  EXPECT_EQ(back[0].track.cls.name(), "bicycle");
}

TEST(SceneIo, ForecastRecordsRoundTripAndValidate)
{
  ForecastRecord r{"s0", {3, {{{0.5, 0.25}}, {{1e-300, -1e300}}}, std::nullopt}};
  std::istringstream in(serialize_forecast(r));
  const auto back = load_forecasts(in);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0], r);

  std::istringstream uneven(R"({"scene_id":"s0","track_id":1,"modes":[[[0,0]],[[0,0],[1,1]]]})");
  EXPECT_THROW(load_forecasts(uneven), ValidationError);
  std::istringstream probs(R"({"scene_id":"s0","track_id":1,"modes":[[[0,0]],[[1,1]]],"mode_probs":[0.5,0.6]})");
  EXPECT_THROW(load_forecasts(probs), ValidationError);
}

TEST(SceneIo, NumbersSurviveRoundTripExactly)
{
  Scene s = test::blank_scene(5, 2);
  s.ego_poses[1] = {0.1 + 0.2, 1e-17, -3.141592653589793};
  s.gt_tracks.push_back(test::gt(4, {{0, 123456.789012345, -0.000123}, {1, 2.0 / 3.0, 5e-324}}));
  std::istringstream in(serialize_scene(s));
  EXPECT_EQ(load_scenes(in).front(), s);
}

TEST(SceneModel, PredictionMustEndAtReferenceFrame)
{
  const Scene s = test::blank_scene();
  EXPECT_NO_THROW(validate(test::pred(1, test::line(0, 4, {0, 0}, {1, 0})), s));
  EXPECT_THROW(validate(test::pred(1, test::line(0, 3, {0, 0}, {1, 0})), s), ValidationError);
  EXPECT_THROW(validate(test::pred(1, test::line(0, 4, {0, 0}, {1, 0}), 1.5), s), ValidationError);
}

TEST(SceneModel, StationaryAgentIsNotEligible)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {3, 3}, {0, 0})));
  EXPECT_TRUE(eligible_gt_agents(s, EvalConfig{}).empty());
}

TEST(SceneModel, TrackEndingBeforeHorizonIsNotEligible)
{
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 15, {0, 0}, {1, 0})));
  EXPECT_TRUE(eligible_gt_agents(s, EvalConfig{}).empty());
}

TEST(SceneModel, ConstantVelocityAgentIsEligible)
{
  // 2 m/s at 2 Hz is 1 m per frame: 12 m over the 12-frame horizon.
  Scene s = test::blank_scene();
  s.gt_tracks.push_back(test::gt(1, test::line(0, 16, {0, 0}, {1, 0})));
  s.gt_tracks.push_back(test::gt(2, test::line(0, 16, {0, 9}, {1, 0}), AgentClass::other("construction_vehicle")));
  EXPECT_EQ(eligible_gt_agents(s, EvalConfig{}), (std::vector<AgentId>{1}));
}

TEST(SceneModel, EligibilityIsMonotoneInDisplacementThreshold)
{
  SynthSpec spec;
  spec.num_scenes = 20;
  spec.min_speed_mps = 0.0;
  spec.max_speed_mps = 3.0;
  for (const auto & g : generate(spec)) {
    EvalConfig cfg;
    cfg.moving_displacement_m = 0.0;
    std::size_t prev = eligible_gt_agents(g.scene, cfg).size();
    for (double th = 0.5; th < 20.0; th += 0.5) {
      cfg.moving_displacement_m = th;
      const auto now = eligible_gt_agents(g.scene, cfg);
      EXPECT_LE(now.size(), prev);
      prev = now.size();
    }
  }
}

TEST(SceneModel, ConfigValidation)
{
  EvalConfig cfg;
  EXPECT_NO_THROW(cfg.validate());
  cfg.distance_bins_m = {0, 10, 10};
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = EvalConfig{};
  cfg.match_threshold_m = 0.0;
  EXPECT_THROW(cfg.validate(), ValidationError);
  cfg = EvalConfig{};
  cfg.classes = {AgentClass::other("tram")};
  EXPECT_THROW(cfg.validate(), ValidationError);
}

TEST(SceneModel, ClassParsing)
{
  EXPECT_EQ(AgentClass::parse("truck"), AgentClass::truck());
  EXPECT_TRUE(AgentClass::parse("emergency_police").is_other());
  EXPECT_EQ(AgentClass::parse("emergency_police").name(), "emergency_police");
  EXPECT_FALSE(EvalConfig{}.scores(AgentClass::other("bus_stop")));
}

}  // namespace
}  // namespace gauntlet

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

#ifndef GAUNTLET__METRICS_HPP_
#define GAUNTLET__METRICS_HPP_

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gauntlet/association.hpp"
#include "gauntlet/scene.hpp"

namespace gauntlet
{

using Trajectory = std::vector<Vec2>;

// ------------------------------------------------------------ displacement

namespace detail
{

inline void check_lengths(std::span<const Vec2> gt, const std::vector<Trajectory> & modes)
{
  if (gt.empty()) {throw std::invalid_argument("ground-truth future is empty");}
  if (modes.empty()) {throw std::invalid_argument("no forecast modes");}
  for (const auto & m : modes) {
    if (m.size() != gt.size()) {
      throw std::invalid_argument("forecast mode length does not match ground-truth horizon");
    }
  }
}

}  // namespace detail

/// Best over modes of the mean per-frame Euclidean distance.
inline double min_ade(std::span<const Vec2> gt_future, const std::vector<Trajectory> & modes)
{
  detail::check_lengths(gt_future, modes);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & m : modes) {
    double sum = 0.0;
    for (std::size_t h = 0; h < gt_future.size(); ++h) {sum += distance(m[h], gt_future[h]);}
    best = std::min(best, sum / static_cast<double>(gt_future.size()));
  }
  return best;
}

/// Best over modes of the final-frame Euclidean distance.
inline double min_fde(std::span<const Vec2> gt_future, const std::vector<Trajectory> & modes)
{
  detail::check_lengths(gt_future, modes);
  double best = std::numeric_limits<double>::infinity();
  for (const auto & m : modes) {best = std::min(best, distance(m.back(), gt_future.back()));}
  return best;
}

/**
 * @brief True when no mode comes within `radius_m` of the ground truth.
 *
 * `fde` tests the final frame; `max_pointwise` requires every frame of a mode
 * to be within the radius for that mode to count as a hit.
 */
inline bool miss(
  std::span<const Vec2> gt_future, const std::vector<Trajectory> & modes, double radius_m,
  MissCriterion criterion = MissCriterion::fde)
{
  detail::check_lengths(gt_future, modes);
  if (!(radius_m > 0.0)) {throw std::invalid_argument("miss radius must be > 0");}
  for (const auto & m : modes) {
    double err = 0.0;
    if (criterion == MissCriterion::fde) {
      err = distance(m.back(), gt_future.back());
    } else {
      for (std::size_t h = 0; h < gt_future.size(); ++h) {
        err = std::max(err, distance(m[h], gt_future[h]));
      }
    }
    if (err <= radius_m) {return false;}
  }
  return true;
}

// ---------------------------------------------------------------- tracking

/// 1 - (FP + FN + IDS) / GT. Can be negative.
inline double mota(std::int64_t fp, std::int64_t fn, std::int64_t ids, std::int64_t gt_total)
{
  if (gt_total <= 0) {throw std::domain_error("MOTA undefined: no ground-truth objects");}
  return 1.0 - static_cast<double>(fp + fn + ids) / static_cast<double>(gt_total);
}

/// Mean matched center distance in meters.
inline double motp(double match_distance_sum, std::int64_t match_count)
{
  if (match_count <= 0) {throw std::domain_error("MOTP undefined: no matches");}
  return match_distance_sum / static_cast<double>(match_count);
}

// ------------------------------------------------------ average precision

/// One ranked prediction for AP computation.
struct ApEntry
{
  double confidence{0.0};
  std::size_t scene_index{0};
  AgentId track_id{0};
  bool true_positive{false};
};

/**
 * @brief 101-point interpolated average precision.
 *
 * Entries are ranked by descending confidence, ties by (scene_index,
 * track_id). Precision at recall r is the maximum precision over all ranks
 * with recall >= r; recall thresholds are compared in exact integer form.
 * Returns nullopt when there is neither ground truth nor any prediction.
 */
inline std::optional<double> average_precision(std::vector<ApEntry> entries, std::size_t num_gt)
{
  if (num_gt == 0) {
    if (entries.empty()) {return std::nullopt;}
    return 0.0;
  }
  std::sort(
    entries.begin(), entries.end(), [](const ApEntry & a, const ApEntry & b) {
      if (a.confidence != b.confidence) {return a.confidence > b.confidence;}
      if (a.scene_index != b.scene_index) {return a.scene_index < b.scene_index;}
      return a.track_id < b.track_id;
    });
  std::vector<std::size_t> tp_at(entries.size());
  std::vector<double> precision(entries.size());
  std::size_t tp = 0;
  for (std::size_t i = 0; i < entries.size(); ++i) {
    tp += entries[i].true_positive ? 1 : 0;
    tp_at[i] = tp;
    precision[i] = static_cast<double>(tp) / static_cast<double>(i + 1);
  }
  // Monotone envelope from the right.
  for (std::size_t i = precision.size(); i-- > 1; ) {
    precision[i - 1] = std::max(precision[i - 1], precision[i]);
  }
  double sum = 0.0;
  std::size_t rank = 0;
  for (std::size_t step = 0; step <= 100; ++step) {
    // First rank whose recall tp/num_gt >= step/100.
    while (rank < entries.size() && tp_at[rank] * 100 < step * num_gt) {++rank;}
    if (rank == entries.size()) {break;}
    sum += precision[rank];
  }
  return sum / 101.0;
}

/// Mean over the classes whose AP is defined.
inline std::optional<double> map_f(std::span<const std::optional<double>> per_class_ap)
{
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto & ap : per_class_ap) {
    if (ap) {
      sum += *ap;
      ++n;
    }
  }
  if (n == 0) {return std::nullopt;}
  return sum / static_cast<double>(n);
}

// ------------------------------------------------------ per-scene scoring

/// Forecast quality of one t0-matched (GT, prediction) pair.
struct ForecastScore
{
  std::size_t scene_index{0};
  AgentId gt_id{0};
  AgentId track_id{0};
  double min_ade_m{0.0};
  double min_fde_m{0.0};
  bool missed{false};
  double confidence{0.0};
  double distance_to_ego_m{0.0};
  AgentClass cls;                 // GT class
  bool forecast_missing{false};   // lenient mode: no forecast, counted as a miss
};

struct FalseTrack
{
  std::size_t scene_index{0};
  AgentId track_id{0};
  AgentClass cls;
  double confidence{0.0};
  double distance_to_ego_m{0.0};
};

struct EligibleGt
{
  std::size_t scene_index{0};
  AgentId gt_id{0};
  AgentClass cls;
  double distance_to_ego_m{0.0};
  bool matched{false};
};

/// TP iff the pair has a forecast whose minFDE is within the threshold.
inline bool is_forecast_tp(const ForecastScore & s, const EvalConfig & cfg)
{
  return !s.forecast_missing && s.min_fde_m <= cfg.fde_threshold_m;
}

/**
 * @brief Forecasting AP for one class. Matched pairs are ranked with their
 * prediction confidence; unmatched predictions of the class are false
 * positives. Recall denominator: eligible GT of the class.
 */
inline std::optional<double> ap_f(
  const AgentClass & cls, std::span<const ForecastScore> scored,
  std::span<const FalseTrack> false_tracks, std::size_t missed_gt, const EvalConfig & cfg)
{
  std::vector<ApEntry> entries;
  std::size_t matched = 0;
  for (const auto & s : scored) {
    if (s.cls != cls) {continue;}
    ++matched;
    entries.push_back({s.confidence, s.scene_index, s.track_id, is_forecast_tp(s, cfg)});
  }
  for (const auto & f : false_tracks) {
    if (f.cls == cls) {entries.push_back({f.confidence, f.scene_index, f.track_id, false});}
  }
  return average_precision(std::move(entries), matched + missed_gt);
}

/// Keeps the k most probable modes (stable), or the first k without probabilities.
inline std::vector<Trajectory> top_k_modes(const ForecastSet & f, int k)
{
  const std::size_t n = std::min<std::size_t>(f.modes.size(), static_cast<std::size_t>(k));
  std::vector<std::size_t> order(f.modes.size());
  std::iota(order.begin(), order.end(), 0);
  if (f.mode_probs) {
    std::stable_sort(
      order.begin(), order.end(),
      [&](std::size_t a, std::size_t b) {return (*f.mode_probs)[a] > (*f.mode_probs)[b];});
  }
  std::vector<Trajectory> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {out.push_back(f.modes[order[i]]);}
  return out;
}

/// Everything measured on one scene; merged across scenes by concatenation.
struct SceneEvaluation
{
  T0Match match;
  MotEvents mot;
  std::vector<ForecastScore> scores;
  std::vector<FalseTrack> false_tracks;
  std::vector<EligibleGt> eligible;
  std::vector<AgentId> missing_forecasts;
};

using ForecastLookup = std::function<const ForecastSet *(AgentId track_id)>;

inline SceneEvaluation evaluate_scene(
  const Scene & scene, std::size_t scene_index, std::span<const PredTrack> preds,
  const ForecastLookup & forecasts, const EvalConfig & cfg, bool strict = false)
{
  SceneEvaluation out;
  out.match = match_t0(scene, preds, cfg);
  out.mot = associate_mot(scene, preds, cfg);

  const int t0 = scene.reference_frame;
  const Vec2 ego = scene.ego_poses[static_cast<std::size_t>(t0)].position();
  std::unordered_map<AgentId, const PredTrack *> by_id;
  for (const auto & p : preds) {by_id.emplace(p.track_id, &p);}

  for (const auto & m : out.match.pairs) {
    const GtTrack * gt = scene.find_gt(m.gt_id);
    const PredTrack * pred = by_id.at(m.track_id);
    ForecastScore s;
    s.scene_index = scene_index;
    s.gt_id = m.gt_id;
    s.track_id = m.track_id;
    s.confidence = pred->confidence;
    s.cls = gt->cls;
    s.distance_to_ego_m = distance(*gt->position_at(t0), ego);

    const ForecastSet * f = forecasts ? forecasts(m.track_id) : nullptr;
    if (f == nullptr) {
      if (strict) {
        throw ValidationError(
          scene.scene_id, "forecast[" + std::to_string(m.track_id) + "]",
          "missing forecast for predicted track");
      }
      s.forecast_missing = true;
      s.missed = true;
      out.missing_forecasts.push_back(m.track_id);
      out.scores.push_back(s);
      continue;
    }
    if (f->horizon() < static_cast<std::size_t>(cfg.horizon_frames)) {
      throw ValidationError(
        scene.scene_id, "forecast[" + std::to_string(m.track_id) + "].modes",
        "forecast horizon shorter than horizon_frames");
    }
    std::vector<Vec2> gt_future;
    for (int h = 1; h <= cfg.horizon_frames; ++h) {gt_future.push_back(*gt->position_at(t0 + h));}
    auto modes = top_k_modes(*f, cfg.k);
    for (auto & mode : modes) {mode.resize(gt_future.size());}
    s.min_ade_m = min_ade(gt_future, modes);
    s.min_fde_m = min_fde(gt_future, modes);
    s.missed = miss(gt_future, modes, cfg.miss_radius_m, cfg.miss_criterion);
    out.scores.push_back(s);
  }
  for (AgentId id : out.match.false_tracks) {
    const PredTrack * p = by_id.at(id);
    out.false_tracks.push_back(
      {scene_index, id, p->cls, p->confidence, distance(*p->position_at(t0), ego)});
  }
  std::unordered_set<AgentId> matched;
  for (const auto & m : out.match.pairs) {matched.insert(m.gt_id);}
  for (AgentId id : eligible_gt_agents(scene, cfg)) {
    const GtTrack * gt = scene.find_gt(id);
    out.eligible.push_back(
      {scene_index, id, gt->cls, distance(*gt->position_at(t0), ego), matched.count(id) > 0});
  }
  return out;
}

// ------------------------------------------------------------------ reports

/// One row of a report. Metrics are absent when undefined for the population.
struct MetricRow
{
  std::optional<double> map_f;
  std::optional<double> min_ade;
  std::optional<double> min_fde;
  std::optional<double> mr;
  std::optional<double> mota;
  std::optional<double> motp;
  std::int64_t fp{0};
  std::int64_t fn{0};
  std::int64_t ids{0};
  std::int64_t gt_total{0};
  std::int64_t eligible_gt{0};
  std::int64_t matched{0};
  std::int64_t missed_gt{0};
  std::int64_t false_tracks{0};

  bool empty() const noexcept
  {
    return eligible_gt == 0 && gt_total == 0 && false_tracks == 0 && fp == 0;
  }
};

struct BinRow
{
  double lo{0.0};
  double hi{std::numeric_limits<double>::infinity()};
  MetricRow row;
};

struct Report
{
  MetricRow overall;
  std::vector<std::pair<AgentClass, MetricRow>> per_class;
  std::vector<BinRow> per_distance_bin;
  std::optional<MetricRow> weighted;  // distance-weighted aggregate, when requested
};

/**
 * @brief Pooled per-object records across scenes. Merging appends in scene
 * order, so any reduction over the pool is independent of how scenes were
 * scheduled.
 */
class EvaluationPool
{
public:
  struct TrackingRecord
  {
    enum class Kind : std::uint8_t { match, miss, false_positive, id_switch };
    Kind kind;
    AgentClass cls;
    double ego_distance_m;
    double match_distance_m;
  };

  void merge(const SceneEvaluation & e)
  {
    scores_.insert(scores_.end(), e.scores.begin(), e.scores.end());
    false_tracks_.insert(false_tracks_.end(), e.false_tracks.begin(), e.false_tracks.end());
    eligible_.insert(eligible_.end(), e.eligible.begin(), e.eligible.end());
    using K = TrackingRecord::Kind;
    for (const auto & f : e.mot.frames) {
      for (const auto & m : f.matches) {
        tracking_.push_back({K::match, m.gt_class, m.ego_distance_m, m.distance_m});
      }
      for (const auto & o : f.misses) {tracking_.push_back({K::miss, o.cls, o.ego_distance_m, 0.0});}
      for (const auto & o : f.false_positives) {
        tracking_.push_back({K::false_positive, o.cls, o.ego_distance_m, 0.0});
      }
      for (const auto & o : f.switches) {
        tracking_.push_back({K::id_switch, o.cls, o.ego_distance_m, 0.0});
      }
    }
  }

  const std::vector<ForecastScore> & scores() const noexcept { return scores_; }
  const std::vector<FalseTrack> & false_tracks() const noexcept { return false_tracks_; }
  const std::vector<EligibleGt> & eligible() const noexcept { return eligible_; }
  const std::vector<TrackingRecord> & tracking() const noexcept { return tracking_; }

  /// Metrics over the objects selected by `keep(class, distance_to_ego)`.
  MetricRow summarize(
    const std::function<bool(const AgentClass &, double)> & keep, const EvalConfig & cfg) const
  {
    MetricRow row;
    std::vector<ForecastScore> scores;
    for (const auto & s : scores_) {
      if (keep(s.cls, s.distance_to_ego_m)) {scores.push_back(s);}
    }
    std::vector<FalseTrack> false_tracks;
    for (const auto & f : false_tracks_) {
      if (keep(f.cls, f.distance_to_ego_m)) {false_tracks.push_back(f);}
    }
    std::map<AgentClass, std::size_t> missed_by_class;
    for (const auto & g : eligible_) {
      if (!keep(g.cls, g.distance_to_ego_m)) {continue;}
      ++row.eligible_gt;
      if (!g.matched) {
        ++row.missed_gt;
        ++missed_by_class[g.cls];
      }
    }
    row.matched = static_cast<std::int64_t>(scores.size());
    row.false_tracks = static_cast<std::int64_t>(false_tracks.size());

    double ade_sum = 0.0;
    double fde_sum = 0.0;
    std::size_t with_forecast = 0;
    std::size_t missed = 0;
    for (const auto & s : scores) {
      if (s.missed) {++missed;}
      if (s.forecast_missing) {continue;}
      ade_sum += s.min_ade_m;
      fde_sum += s.min_fde_m;
      ++with_forecast;
    }
    if (with_forecast > 0) {
      row.min_ade = ade_sum / static_cast<double>(with_forecast);
      row.min_fde = fde_sum / static_cast<double>(with_forecast);
    }
    if (!scores.empty()) {row.mr = static_cast<double>(missed) / static_cast<double>(scores.size());}

    std::vector<std::optional<double>> aps;
    for (const auto & c : cfg.classes) {
      aps.push_back(ap_f(c, scores, false_tracks, missed_by_class[c], cfg));
    }
    row.map_f = map_f(aps);

    double dist_sum = 0.0;
    std::int64_t match_count = 0;
    using K = TrackingRecord::Kind;
    for (const auto & t : tracking_) {
      if (!keep(t.cls, t.ego_distance_m)) {continue;}
      switch (t.kind) {
        case K::match:
          ++match_count;
          ++row.gt_total;
          dist_sum += t.match_distance_m;
          break;
        case K::miss:
          ++row.fn;
          ++row.gt_total;
          break;
        case K::false_positive: ++row.fp; break;
        case K::id_switch: ++row.ids; break;
      }
    }
    if (row.gt_total > 0) {row.mota = mota(row.fp, row.fn, row.ids, row.gt_total);}
    if (match_count > 0) {row.motp = motp(dist_sum, match_count);}
    return row;
  }

private:
  std::vector<ForecastScore> scores_;
  std::vector<FalseTrack> false_tracks_;
  std::vector<EligibleGt> eligible_;
  std::vector<TrackingRecord> tracking_;
};

/**
 * @brief Per-distance-bin rows. Bin i holds objects with edge[i] <= d <
 * edge[i+1]; the last bin is open-ended. Bins with no objects are omitted.
 */
inline std::vector<BinRow> stratify(
  const EvaluationPool & pool, std::span<const double> edges, const EvalConfig & cfg)
{
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {throw std::invalid_argument("bin edges must be strictly increasing");}
  }
  std::vector<BinRow> out;
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const double lo = edges[i];
    const double hi =
      i + 1 < edges.size() ? edges[i + 1] : std::numeric_limits<double>::infinity();
    MetricRow row = pool.summarize(
      [lo, hi](const AgentClass &, double d) {return d >= lo && d < hi;}, cfg);
    if (!row.empty()) {out.push_back({lo, hi, row});}
  }
  return out;
}

/**
 * @brief Weighted mean of per-bin metrics. Default weights are the inverse
 * bin midpoint (lower edge for the open bin), normalized over the bins where
 * each metric is defined. Counts are summed.
 */
inline MetricRow distance_weighted(
  std::span<const BinRow> bins, std::span<const double> weights = {})
{
  MetricRow out;
  std::vector<double> w;
  for (std::size_t i = 0; i < bins.size(); ++i) {
    if (!weights.empty()) {
      w.push_back(i < weights.size() ? weights[i] : 0.0);
      continue;
    }
    const double mid = std::isfinite(bins[i].hi) ? 0.5 * (bins[i].lo + bins[i].hi) : bins[i].lo;
    w.push_back(mid > 0.0 ? 1.0 / mid : 0.0);
  }
  auto combine = [&](std::optional<double> MetricRow::* field) {
      double num = 0.0;
      double den = 0.0;
      for (std::size_t i = 0; i < bins.size(); ++i) {
        const auto & v = bins[i].row.*field;
        if (v && w[i] > 0.0) {
          num += w[i] * *v;
          den += w[i];
        }
      }
      out.*field = den > 0.0 ? std::optional<double>(num / den) : std::nullopt;
    };
  combine(&MetricRow::map_f);
  combine(&MetricRow::min_ade);
  combine(&MetricRow::min_fde);
  combine(&MetricRow::mr);
  combine(&MetricRow::mota);
  combine(&MetricRow::motp);
  for (const auto & b : bins) {
    out.fp += b.row.fp;
    out.fn += b.row.fn;
    out.ids += b.row.ids;
    out.gt_total += b.row.gt_total;
    out.eligible_gt += b.row.eligible_gt;
    out.matched += b.row.matched;
    out.missed_gt += b.row.missed_gt;
    out.false_tracks += b.row.false_tracks;
  }
  return out;
}

inline Report build_report(const EvaluationPool & pool, const EvalConfig & cfg)
{
  Report r;
  r.overall = pool.summarize([](const AgentClass &, double) {return true;}, cfg);
  for (const auto & c : cfg.classes) {
    r.per_class.emplace_back(
      c, pool.summarize([&c](const AgentClass & k, double) {return k == c;}, cfg));
  }
  r.per_distance_bin = stratify(pool, cfg.distance_bins_m, cfg);
  return r;
}

}  // namespace gauntlet

#endif  // GAUNTLET__METRICS_HPP_

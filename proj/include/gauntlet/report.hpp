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

// Report serialization: a JSON document and a flat CSV table.

#ifndef GAUNTLET__REPORT_HPP_
#define GAUNTLET__REPORT_HPP_

#include <charconv>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <system_error>

#include "json.hpp"

#include "gauntlet/io.hpp"
#include "gauntlet/metrics.hpp"

namespace gauntlet
{

/// Shortest decimal that parses back to the same double; "inf" for +infinity.
inline std::string format_number(double v)
{
  if (std::isinf(v)) {return v > 0 ? "inf" : "-inf";}
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  if (res.ec != std::errc{}) {throw std::runtime_error("number formatting failed");}
  return std::string(buf, res.ptr);
}

inline const char * const kReportCsvHeader =
  "scope,class,bin_lo,bin_hi,map_f,min_ade,min_fde,mr,mota,motp,fp,fn,ids,eligible_gt,matched";

namespace detail
{

inline nlohmann::ordered_json row_json(const MetricRow & r)
{
  nlohmann::ordered_json o;
  auto opt = [&o](const char * key, const std::optional<double> & v) {
      o[key] = v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
    };
  opt("map_f", r.map_f);
  opt("min_ade", r.min_ade);
  opt("min_fde", r.min_fde);
  opt("mr", r.mr);
  opt("mota", r.mota);
  opt("motp", r.motp);
  o["fp"] = r.fp;
  o["fn"] = r.fn;
  o["ids"] = r.ids;
  o["gt_total"] = r.gt_total;
  o["eligible_gt"] = r.eligible_gt;
  o["matched"] = r.matched;
  o["missed_gt"] = r.missed_gt;
  o["false_tracks"] = r.false_tracks;
  return o;
}

inline MetricRow row_from_json(const ojson & o)
{
  MetricRow r;
  auto opt = [&o](const char * key) -> std::optional<double> {
      const ojson & v = require(o, key);
      if (v.is_null()) {return std::nullopt;}
      return as_real(v, key);
    };
  r.map_f = opt("map_f");
  r.min_ade = opt("min_ade");
  r.min_fde = opt("min_fde");
  r.mr = opt("mr");
  r.mota = opt("mota");
  r.motp = opt("motp");
  r.fp = as_int(require(o, "fp"), "fp");
  r.fn = as_int(require(o, "fn"), "fn");
  r.ids = as_int(require(o, "ids"), "ids");
  r.gt_total = as_int(require(o, "gt_total"), "gt_total");
  r.eligible_gt = as_int(require(o, "eligible_gt"), "eligible_gt");
  r.matched = as_int(require(o, "matched"), "matched");
  r.missed_gt = as_int(require(o, "missed_gt"), "missed_gt");
  r.false_tracks = as_int(require(o, "false_tracks"), "false_tracks");
  return r;
}

inline void csv_row(
  std::ostream & out, const char * scope, const std::string & cls, const std::string & lo,
  const std::string & hi, const MetricRow & r)
{
  auto opt = [](const std::optional<double> & v) {return v ? format_number(*v) : std::string();};
  out << scope << ',' << cls << ',' << lo << ',' << hi << ',' << opt(r.map_f) << ','
      << opt(r.min_ade) << ',' << opt(r.min_fde) << ',' << opt(r.mr) << ',' << opt(r.mota) << ','
      << opt(r.motp) << ',' << r.fp << ',' << r.fn << ',' << r.ids << ',' << r.eligible_gt << ','
      << r.matched << '\n';
}

}  // namespace detail

inline nlohmann::ordered_json report_to_json(const Report & report)
{
  nlohmann::ordered_json o;
  o["overall"] = detail::row_json(report.overall);
  auto classes = nlohmann::ordered_json::array();
  for (const auto & [cls, row] : report.per_class) {
    nlohmann::ordered_json c;
    c["class"] = cls.name();
    c.update(detail::row_json(row));
    classes.push_back(std::move(c));
  }
  o["per_class"] = std::move(classes);
  auto bins = nlohmann::ordered_json::array();
  for (const auto & b : report.per_distance_bin) {
    nlohmann::ordered_json j;
    j["bin_lo"] = b.lo;
    j["bin_hi"] = std::isinf(b.hi) ? nlohmann::ordered_json("inf") : nlohmann::ordered_json(b.hi);
    j.update(detail::row_json(b.row));
    bins.push_back(std::move(j));
  }
  o["per_distance_bin"] = std::move(bins);
  if (report.weighted) {o["weighted"] = detail::row_json(*report.weighted);}
  return o;
}

inline std::string serialize_report(const Report & report)
{
  return report_to_json(report).dump(2) + "\n";
}

inline Report report_from_json(const detail::ojson & o)
{
  using detail::require;
  Report r;
  r.overall = detail::row_from_json(require(o, "overall"));
  for (const auto & c : require(o, "per_class")) {
    r.per_class.emplace_back(
      AgentClass::parse(detail::as_string(require(c, "class"), "class")), detail::row_from_json(c));
  }
  for (const auto & b : require(o, "per_distance_bin")) {
    BinRow row;
    row.lo = detail::as_real(require(b, "bin_lo"), "bin_lo");
    const auto & hi = require(b, "bin_hi");
    row.hi = hi.is_string() && hi.get<std::string>() == "inf" ?
      std::numeric_limits<double>::infinity() : detail::as_real(hi, "bin_hi");
    row.row = detail::row_from_json(b);
    r.per_distance_bin.push_back(row);
  }
  if (o.contains("weighted")) {r.weighted = detail::row_from_json(o.at("weighted"));}
  return r;
}

/// One CSV row per (scope, class, bin); absent values are empty fields.
inline void write_report_csv(std::ostream & out, const Report & report)
{
  out << kReportCsvHeader << '\n';
  detail::csv_row(out, "overall", "", "", "", report.overall);
  for (const auto & [cls, row] : report.per_class) {
    detail::csv_row(out, "class", cls.name(), "", "", row);
  }
  for (const auto & b : report.per_distance_bin) {
    detail::csv_row(out, "bin", "", format_number(b.lo), format_number(b.hi), b.row);
  }
  if (report.weighted) {detail::csv_row(out, "weighted", "", "", "", *report.weighted);}
}

}  // namespace gauntlet

#endif  // GAUNTLET__REPORT_HPP_

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

#ifndef GAUNTLET__MAPS_HPP_
#define GAUNTLET__MAPS_HPP_

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gauntlet/scene.hpp"

namespace gauntlet
{

/// Channel layout of the default five-channel stack.
enum MapChannel : std::uint32_t
{
  kRoadPolygons = 0,  // lane + road segment + drivable area
  kRoadDivider = 1,
  kLaneDivider = 2,
  kPedCrossing = 3,
  kWalkway = 4,
};

/**
 * @brief Multi-channel bird's-eye-view occupancy raster.
 *
 * Pixel (row r, col c) has its center at origin + (c, r) * resolution. Cells
 * are stored channel-major, then row-major.
 */
struct RasterMap
{
  std::uint32_t width{200};
  std::uint32_t height{200};
  std::uint32_t channels{5};
  double resolution_m_per_px{0.5};
  double origin_x{0.0};
  double origin_y{0.0};
  std::vector<std::uint8_t> data;

  static RasterMap blank(
    std::uint32_t width, std::uint32_t height, std::uint32_t channels, double resolution,
    double origin_x, double origin_y)
  {
    RasterMap m{width, height, channels, resolution, origin_x, origin_y, {}};
    m.data.assign(static_cast<std::size_t>(width) * height * channels, 0);
    return m;
  }

  std::size_t index(std::uint32_t ch, std::uint32_t row, std::uint32_t col) const
  {
    return (static_cast<std::size_t>(ch) * height + row) * width + col;
  }
  std::uint8_t at(std::uint32_t ch, std::uint32_t row, std::uint32_t col) const
  {
    return data[index(ch, row, col)];
  }
  std::uint8_t & at(std::uint32_t ch, std::uint32_t row, std::uint32_t col)
  {
    return data[index(ch, row, col)];
  }

  std::span<const std::uint8_t> channel(std::uint32_t ch) const
  {
    return {data.data() + static_cast<std::size_t>(ch) * width * height,
      static_cast<std::size_t>(width) * height};
  }

  Vec2 pixel_center(std::uint32_t row, std::uint32_t col) const
  {
    return {origin_x + col * resolution_m_per_px, origin_y + row * resolution_m_per_px};
  }

  bool same_geometry(const RasterMap & o) const
  {
    return width == o.width && height == o.height && channels == o.channels &&
           resolution_m_per_px == o.resolution_m_per_px && origin_x == o.origin_x &&
           origin_y == o.origin_y;
  }

  friend bool operator==(const RasterMap &, const RasterMap &) = default;
};

/// Vector geometry in global meters, grouped by target channel.
struct MapGeometry
{
  struct Polygon
  {
    std::uint32_t channel{0};
    std::vector<Vec2> vertices;
  };
  struct Polyline
  {
    std::uint32_t channel{0};
    std::vector<Vec2> points;
    double stroke_px{1.0};
  };
  std::vector<Polygon> polygons;
  std::vector<Polyline> polylines;
};

namespace detail
{

inline void fill_polygon(RasterMap & m, std::uint32_t ch, const std::vector<Vec2> & poly)
{
  const double res = m.resolution_m_per_px;
  std::vector<double> xs;
  for (std::uint32_t r = 0; r < m.height; ++r) {
    const double yc = m.origin_y + r * res;
    xs.clear();
    for (std::size_t i = 0; i < poly.size(); ++i) {
      const Vec2 & a = poly[i];
      const Vec2 & b = poly[(i + 1) % poly.size()];
      // Half-open in y so shared vertices are counted once.
      if ((a.y <= yc && yc < b.y) || (b.y <= yc && yc < a.y)) {
        xs.push_back(a.x + (yc - a.y) * (b.x - a.x) / (b.y - a.y));
      }
    }
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k + 1 < xs.size(); k += 2) {
      // Pixel centers with xs[k] <= xc < xs[k+1].
      auto c = static_cast<std::int64_t>(std::ceil((xs[k] - m.origin_x) / res)) - 1;
      c = std::max<std::int64_t>(c, 0);
      for (; c < static_cast<std::int64_t>(m.width); ++c) {
        const double xc = m.origin_x + static_cast<double>(c) * res;
        if (xc < xs[k]) {continue;}
        if (xc >= xs[k + 1]) {break;}
        m.at(ch, r, static_cast<std::uint32_t>(c)) = 255;
      }
    }
  }
}

inline double segment_distance(const Vec2 & p, const Vec2 & a, const Vec2 & b)
{
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  return std::hypot(p.x - (a.x + t * dx), p.y - (a.y + t * dy));
}

inline void stroke_polyline(RasterMap & m, const MapGeometry::Polyline & line)
{
  const double res = m.resolution_m_per_px;
  const double half = 0.5 * line.stroke_px * res;
  auto clamp_col = [&](double v) {
      return static_cast<std::int64_t>(std::clamp(v, 0.0, static_cast<double>(m.width) - 1.0));
    };
  auto clamp_row = [&](double v) {
      return static_cast<std::int64_t>(std::clamp(v, 0.0, static_cast<double>(m.height) - 1.0));
    };
  for (std::size_t i = 0; i + 1 < line.points.size(); ++i) {
    const Vec2 & a = line.points[i];
    const Vec2 & b = line.points[i + 1];
    const double c0 = std::floor((std::min(a.x, b.x) - half - m.origin_x) / res);
    const double c1 = std::ceil((std::max(a.x, b.x) + half - m.origin_x) / res);
    const double r0 = std::floor((std::min(a.y, b.y) - half - m.origin_y) / res);
    const double r1 = std::ceil((std::max(a.y, b.y) + half - m.origin_y) / res);
    if (c1 < 0 || r1 < 0 || c0 >= m.width || r0 >= m.height) {continue;}
    for (auto r = clamp_row(r0); r <= clamp_row(r1); ++r) {
      for (auto c = clamp_col(c0); c <= clamp_col(c1); ++c) {
        const auto pr = static_cast<std::uint32_t>(r);
        const auto pc = static_cast<std::uint32_t>(c);
        if (segment_distance(m.pixel_center(pr, pc), a, b) <= half) {m.at(line.channel, pr, pc) = 255;}
      }
    }
  }
}

}  // namespace detail

/**
 * @brief Binary (0/255) rasterization onto the grid of `grid` (its content is
 * ignored). Polygons are scanline-filled with the pixel-center rule; polylines
 * set every pixel whose center lies within half the stroke width.
 */
inline RasterMap rasterize(const MapGeometry & geometry, const RasterMap & grid)
{
  RasterMap m = RasterMap::blank(
    grid.width, grid.height, grid.channels, grid.resolution_m_per_px, grid.origin_x,
    grid.origin_y);
  for (const auto & poly : geometry.polygons) {
    if (poly.vertices.size() < 3) {throw std::invalid_argument("degenerate polygon: fewer than 3 vertices");}
    if (poly.channel >= m.channels) {throw std::out_of_range("polygon channel out of range");}
    detail::fill_polygon(m, poly.channel, poly.vertices);
  }
  for (const auto & line : geometry.polylines) {
    if (line.channel >= m.channels) {throw std::out_of_range("polyline channel out of range");}
    if (line.points.size() < 2) {throw std::invalid_argument("degenerate polyline: fewer than 2 points");}
    detail::stroke_polyline(m, line);
  }
  return m;
}

/// Copy with one channel zeroed.
inline RasterMap ablate_channel(const RasterMap & map, std::uint32_t channel)
{
  if (channel >= map.channels) {throw std::out_of_range("ablated channel out of range");}
  RasterMap out = map;
  const std::size_t plane = static_cast<std::size_t>(map.width) * map.height;
  std::fill_n(out.data.begin() + static_cast<std::ptrdiff_t>(channel * plane), plane, 0);
  return out;
}

/// All-zero raster with the geometry of `like`.
inline RasterMap empty_map(const RasterMap & like)
{
  return RasterMap::blank(
    like.width, like.height, like.channels, like.resolution_m_per_px, like.origin_x,
    like.origin_y);
}

/**
 * @brief Intersection over union of the binarized (>= 128) channel.
 * nullopt when both masks are empty.
 */
inline std::optional<double> iou(const RasterMap & pred, const RasterMap & gt, std::uint32_t channel)
{
  if (!pred.same_geometry(gt)) {throw std::invalid_argument("raster geometry mismatch");}
  if (channel >= pred.channels) {throw std::out_of_range("channel out of range");}
  const auto a = pred.channel(channel);
  const auto b = gt.channel(channel);
  std::size_t inter = 0;
  std::size_t uni = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const bool pa = a[i] >= 128;
    const bool pb = b[i] >= 128;
    inter += (pa && pb) ? 1 : 0;
    uni += (pa || pb) ? 1 : 0;
  }
  if (uni == 0) {return std::nullopt;}
  return static_cast<double>(inter) / static_cast<double>(uni);
}

/**
 * @brief Warps ego-frame rasters into one global raster by nearest-neighbor
 * resampling and per-cell maximum.
 *
 * The output grid is axis-aligned, shares the first map's resolution and is
 * anchored on the global position of the first map's origin pixel.
 */
inline RasterMap accumulate(std::span<const RasterMap> maps, std::span<const EgoPose> poses)
{
  if (maps.size() != poses.size()) {throw std::invalid_argument("one ego pose per map required");}
  if (maps.empty()) {return RasterMap::blank(0, 0, 0, 0.5, 0.0, 0.0);}
  const double res = maps.front().resolution_m_per_px;
  const std::uint32_t channels = maps.front().channels;
  for (const auto & m : maps) {
    if (m.resolution_m_per_px != res || m.channels != channels) {
      throw std::invalid_argument("accumulated maps must share resolution and channel count");
    }
  }
  auto to_global = [](const EgoPose & p, double ex, double ey) {
      const double c = std::cos(p.heading_rad);
      const double s = std::sin(p.heading_rad);
      return Vec2{p.x + c * ex - s * ey, p.y + s * ex + c * ey};
    };
  auto to_ego = [](const EgoPose & p, const Vec2 & g) {
      const double c = std::cos(p.heading_rad);
      const double s = std::sin(p.heading_rad);
      const double dx = g.x - p.x;
      const double dy = g.y - p.y;
      return Vec2{c * dx + s * dy, -s * dx + c * dy};
    };

  const Vec2 anchor = to_global(poses[0], maps[0].origin_x, maps[0].origin_y);
  struct Box { double x0, y0, x1, y1; };
  std::vector<Box> boxes;
  double gx0 = anchor.x, gy0 = anchor.y, gx1 = anchor.x, gy1 = anchor.y;
  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto & m = maps[i];
    const double w = m.width == 0 ? 0.0 : (m.width - 1) * res;
    const double h = m.height == 0 ? 0.0 : (m.height - 1) * res;
    Box b{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
      -std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (const auto & [ex, ey] : std::array<std::array<double, 2>, 4>{
          {{m.origin_x, m.origin_y}, {m.origin_x + w, m.origin_y},
            {m.origin_x, m.origin_y + h}, {m.origin_x + w, m.origin_y + h}}})
    {
      const Vec2 g = to_global(poses[i], ex, ey);
      b.x0 = std::min(b.x0, g.x);
      b.y0 = std::min(b.y0, g.y);
      b.x1 = std::max(b.x1, g.x);
      b.y1 = std::max(b.y1, g.y);
    }
    boxes.push_back(b);
    gx0 = std::min(gx0, b.x0);
    gy0 = std::min(gy0, b.y0);
    gx1 = std::max(gx1, b.x1);
    gy1 = std::max(gy1, b.y1);
  }
  constexpr double eps = 1e-9;
  const auto c_min = static_cast<std::int64_t>(std::floor((gx0 - anchor.x) / res + eps));
  const auto r_min = static_cast<std::int64_t>(std::floor((gy0 - anchor.y) / res + eps));
  const auto c_max = static_cast<std::int64_t>(std::ceil((gx1 - anchor.x) / res - eps));
  const auto r_max = static_cast<std::int64_t>(std::ceil((gy1 - anchor.y) / res - eps));
  RasterMap out = RasterMap::blank(
    static_cast<std::uint32_t>(c_max - c_min + 1), static_cast<std::uint32_t>(r_max - r_min + 1),
    channels, res, anchor.x + static_cast<double>(c_min) * res,
    anchor.y + static_cast<double>(r_min) * res);

  for (std::size_t i = 0; i < maps.size(); ++i) {
    const auto & m = maps[i];
    if (m.width == 0 || m.height == 0) {continue;}
    const Box & b = boxes[i];
    const auto oc0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((b.x0 - out.origin_x) / res)) - 1);
    const auto or0 = std::max<std::int64_t>(0, static_cast<std::int64_t>(std::floor((b.y0 - out.origin_y) / res)) - 1);
    const auto oc1 = std::min<std::int64_t>(out.width - 1, static_cast<std::int64_t>(std::ceil((b.x1 - out.origin_x) / res)) + 1);
    const auto or1 = std::min<std::int64_t>(out.height - 1, static_cast<std::int64_t>(std::ceil((b.y1 - out.origin_y) / res)) + 1);
    for (auto r = or0; r <= or1; ++r) {
      for (auto c = oc0; c <= oc1; ++c) {
        const Vec2 g = out.pixel_center(static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
        const Vec2 e = to_ego(poses[i], g);
        const auto sc = std::llround((e.x - m.origin_x) / res);
        const auto sr = std::llround((e.y - m.origin_y) / res);
        if (sc < 0 || sr < 0 || sc >= m.width || sr >= m.height) {continue;}
        for (std::uint32_t ch = 0; ch < channels; ++ch) {
          auto & dst = out.at(ch, static_cast<std::uint32_t>(r), static_cast<std::uint32_t>(c));
          dst = std::max(dst, m.at(ch, static_cast<std::uint32_t>(sr), static_cast<std::uint32_t>(sc)));
        }
      }
    }
  }
  return out;
}

// ------------------------------------------------------------ file format
//
// "FMAP", version 0x01, u32 width, u32 height, u32 channels, f32 resolution,
// f32 origin_x, f32 origin_y (all little-endian), then the cells.

class RasterFormatError : public std::runtime_error
{
public:
  RasterFormatError(std::size_t offset, const std::string & what)
  : std::runtime_error("raster byte offset " + std::to_string(offset) + ": " + what),
    offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }

private:
  std::size_t offset_;
};

namespace detail
{

inline void put_u32(std::ostream & out, std::uint32_t v)
{
  const char b[4] = {static_cast<char>(v & 0xFF), static_cast<char>((v >> 8) & 0xFF),
    static_cast<char>((v >> 16) & 0xFF), static_cast<char>((v >> 24) & 0xFF)};
  out.write(b, 4);
}

inline std::uint32_t get_u32(std::istream & in, std::size_t & offset, const char * field)
{
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char *>(b), 4)) {
    throw RasterFormatError(offset, std::string("truncated header reading ") + field);
  }
  offset += 4;
  return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
         (static_cast<std::uint32_t>(b[2]) << 16) | (static_cast<std::uint32_t>(b[3]) << 24);
}

}  // namespace detail

inline void write_raster(std::ostream & out, const RasterMap & m)
{
  out.write("FMAP", 4);
  out.put(static_cast<char>(0x01));
  detail::put_u32(out, m.width);
  detail::put_u32(out, m.height);
  detail::put_u32(out, m.channels);
  detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.resolution_m_per_px)));
  detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.origin_x)));
  detail::put_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(m.origin_y)));
  out.write(reinterpret_cast<const char *>(m.data.data()), static_cast<std::streamsize>(m.data.size()));
}

inline RasterMap read_raster(std::istream & in)
{
  std::size_t offset = 0;
  char magic[4];
  if (!in.read(magic, 4) || std::string(magic, 4) != "FMAP") {
    throw RasterFormatError(0, "bad magic, expected \"FMAP\"");
  }
  offset = 4;
  const int version = in.get();
  if (version != 0x01) {throw RasterFormatError(offset, "unsupported version");}
  offset += 1;
  RasterMap m;
  m.width = detail::get_u32(in, offset, "width");
  m.height = detail::get_u32(in, offset, "height");
  m.channels = detail::get_u32(in, offset, "channels");
  const std::size_t res_offset = offset;
  m.resolution_m_per_px = std::bit_cast<float>(detail::get_u32(in, offset, "resolution"));
  m.origin_x = std::bit_cast<float>(detail::get_u32(in, offset, "origin_x"));
  m.origin_y = std::bit_cast<float>(detail::get_u32(in, offset, "origin_y"));
  if (!(m.resolution_m_per_px > 0.0) || !std::isfinite(m.resolution_m_per_px)) {
    throw RasterFormatError(res_offset, "resolution must be finite and > 0");
  }
  const std::size_t cells = static_cast<std::size_t>(m.width) * m.height * m.channels;
  m.data.resize(cells);
  if (!in.read(reinterpret_cast<char *>(m.data.data()), static_cast<std::streamsize>(cells))) {
    throw RasterFormatError(
      offset + static_cast<std::size_t>(in.gcount()), "truncated cell data");
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw RasterFormatError(offset + cells, "trailing bytes after cell data");
  }
  return m;
}

}  // namespace gauntlet

#endif  // GAUNTLET__MAPS_HPP_

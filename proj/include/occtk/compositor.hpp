// Copyright 2026 The occtk Authors.
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

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/error.hpp"
#include "occtk/image.hpp"
#include "occtk/occluder.hpp"
#include "occtk/track.hpp"

namespace occtk {

/// Integer pixel rect, half-open: pixels with x0 <= x < x1, y0 <= y < y1.
struct PixelRect {
  int x0 = 0;
  int y0 = 0;
  int x1 = 0;
  int y1 = 0;

  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
  bool empty() const { return x1 <= x0 || y1 <= y0; }
  std::int64_t area() const { return empty() ? 0 : std::int64_t(width()) * height(); }
  bool contains(int x, int y) const { return x >= x0 && x < x1 && y >= y0 && y < y1; }

  PixelRect intersect(const PixelRect& o) const {
    return {std::max(x0, o.x0), std::max(y0, o.y0), std::min(x1, o.x1), std::min(y1, o.y1)};
  }

  friend bool operator==(const PixelRect&, const PixelRect&) = default;
};

/// Rasterization convention used everywhere a real-valued box meets the
/// pixel grid: pixel p falls inside [a, b) iff a <= p < b, so the pixel
/// range is [ceil(a), ceil(b)).
inline PixelRect rasterize_box(const BoundingBox& b) {
  return {static_cast<int>(std::ceil(b.x)), static_cast<int>(std::ceil(b.y)),
          static_cast<int>(std::ceil(b.x + b.w)), static_cast<int>(std::ceil(b.y + b.h))};
}

inline PixelRect frame_rect(int width, int height) { return {0, 0, width, height}; }

/// Fully determines one synthesis run. An empty occluder_id means "sample
/// from the catalog with `seed`"; the sampled id is reported back in the
/// result so the run can be replayed exactly.
struct OcclusionSpec {
  double degree = 0.5;  // in (0, 1]; the binding size ratio vs. the actor box
  std::string occluder_id;
  std::uint64_t seed = 0;
  enum class Anchor { bbox_center } anchor = Anchor::bbox_center;
};

/// What happened on one frame: where the occluder landed after clipping and
/// how much of it was visible. Pre-clip target dims are kept so the realized
/// degree can be measured afterwards.
struct Placement {
  int frame_index = 0;
  PixelRect dest;           // clipped to the frame; empty when fully clipped
  int origin_x = 0;         // where the scaled occluder's (0,0) landed,
  int origin_y = 0;         //   before clipping
  int target_w = 0;         // scaled occluder dims before border clipping
  int target_h = 0;
  double scale_factor = 0;  // uniform scale applied to the asset
  std::int64_t visible_opaque_pixels = 0;   // alpha > 0 and inside the frame
  std::int64_t opaque_pixels_in_bbox = 0;   // of those, inside the actor box
  std::int64_t bbox_pixel_area = 0;         // rasterized bbox ∩ frame

  bool fully_clipped() const { return dest.empty(); }
};

inline void to_json(nlohmann::json& j, const Placement& p) {
  j = nlohmann::json{{"frame_index", p.frame_index},
                     {"dest", {{"x", p.dest.x0}, {"y", p.dest.y0}, {"w", p.dest.width()}, {"h", p.dest.height()}}},
                     {"origin_x", p.origin_x},
                     {"origin_y", p.origin_y},
                     {"target_w", p.target_w},
                     {"target_h", p.target_h},
                     {"scale_factor", p.scale_factor},
                     {"visible_opaque_pixels", p.visible_opaque_pixels},
                     {"opaque_pixels_in_bbox", p.opaque_pixels_in_bbox},
                     {"bbox_pixel_area", p.bbox_pixel_area}};
}

inline void from_json(const nlohmann::json& j, Placement& p) {
  p.frame_index = j.at("frame_index").get<int>();
  const auto& d = j.at("dest");
  p.dest.x0 = d.at("x").get<int>();
  p.dest.y0 = d.at("y").get<int>();
  p.dest.x1 = p.dest.x0 + d.at("w").get<int>();
  p.dest.y1 = p.dest.y0 + d.at("h").get<int>();
  p.origin_x = j.at("origin_x").get<int>();
  p.origin_y = j.at("origin_y").get<int>();
  p.target_w = j.at("target_w").get<int>();
  p.target_h = j.at("target_h").get<int>();
  p.scale_factor = j.at("scale_factor").get<double>();
  p.visible_opaque_pixels = j.at("visible_opaque_pixels").get<std::int64_t>();
  p.opaque_pixels_in_bbox = j.at("opaque_pixels_in_bbox").get<std::int64_t>();
  p.bbox_pixel_area = j.at("bbox_pixel_area").get<std::int64_t>();
}

enum class ColorResample { bilinear, nearest };

struct ScaledOccluder {
  ImageRgba image;      // alpha resampled nearest-neighbor, color per config
  double scale = 0;     // the uniform factor s
};

namespace detail {

inline std::uint8_t bilinear_channel(const ImageRgba& src, double sx, double sy, int channel) {
  const int x0 = static_cast<int>(std::floor(sx));
  const int y0 = static_cast<int>(std::floor(sy));
  const double fx = sx - x0;
  const double fy = sy - y0;
  auto clampx = [&](int v) { return std::clamp(v, 0, src.width - 1); };
  auto clampy = [&](int v) { return std::clamp(v, 0, src.height - 1); };
  auto ch = [&](int x, int y) -> double {
    const Rgba& p = src.at(clampx(x), clampy(y));
    switch (channel) {
      case 0: return p.r;
      case 1: return p.g;
      case 2: return p.b;
      default: return p.a;
    }
  };
  const double top = ch(x0, y0) * (1 - fx) + ch(x0 + 1, y0) * fx;
  const double bot = ch(x0, y0 + 1) * (1 - fx) + ch(x0 + 1, y0 + 1) * fx;
  const double v = top * (1 - fy) + bot * fy;
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

}  // namespace detail

/// Scale the asset so it fits within the degree-scaled actor box, aspect
/// preserved, with the binding dimension exactly at `degree`:
///   s = degree * min(bbox.w / asset.w, bbox.h / asset.h)
/// Target dims round to the nearest pixel. Alpha is always resampled
/// nearest-neighbor so "opaque" stays a crisp yes/no for the metrics;
/// color defaults to bilinear.
inline ScaledOccluder scale_occluder(const OccluderAsset& asset, const BoundingBox& bbox,
                                     double degree,
                                     ColorResample resample = ColorResample::bilinear) {
  if (!(degree > 0.0 && degree <= 1.0)) {
    raise(Errc::degenerate_scale, "degree must be in (0, 1], got " + std::to_string(degree));
  }
  if (!bbox.valid()) raise(Errc::empty_box, "invalid bounding box");
  const int src_w = asset.image.width;
  const int src_h = asset.image.height;
  const double s = degree * std::min(bbox.w / src_w, bbox.h / src_h);
  const int dst_w = static_cast<int>(std::lround(s * src_w));
  const int dst_h = static_cast<int>(std::lround(s * src_h));
  if (dst_w <= 0 || dst_h <= 0) {
    raise(Errc::degenerate_scale, asset.id + ": target rounds to " + std::to_string(dst_w) + "x" +
                                      std::to_string(dst_h));
  }

  ScaledOccluder out;
  out.scale = s;
  out.image = ImageRgba(dst_w, dst_h, {0, 0, 0, 0});
  const double rx = static_cast<double>(src_w) / dst_w;
  const double ry = static_cast<double>(src_h) / dst_h;
  for (int dy = 0; dy < dst_h; ++dy) {
    for (int dx = 0; dx < dst_w; ++dx) {
      // Center-aligned mapping: dest pixel center lands at (dx+0.5)*rx in source units.
      const double cx = (dx + 0.5) * rx;
      const double cy = (dy + 0.5) * ry;
      const int nx = std::clamp(static_cast<int>(cx), 0, src_w - 1);
      const int ny = std::clamp(static_cast<int>(cy), 0, src_h - 1);
      Rgba& d = out.image.at(dx, dy);
      d.a = asset.image.at(nx, ny).a;
      if (resample == ColorResample::nearest) {
        const Rgba& srcp = asset.image.at(nx, ny);
        d.r = srcp.r;
        d.g = srcp.g;
        d.b = srcp.b;
      } else {
        const double sx = cx - 0.5;
        const double sy = cy - 0.5;
        d.r = detail::bilinear_channel(asset.image, sx, sy, 0);
        d.g = detail::bilinear_channel(asset.image, sx, sy, 1);
        d.b = detail::bilinear_channel(asset.image, sx, sy, 2);
      }
    }
  }
  return out;
}

/// Alpha-over in place: out = a*occ + (1-a)*src per channel, a = alpha/255,
/// rounded to nearest. Pixels with alpha 0 are never touched, so they stay
/// bit-identical to the input. The occluder is clipped at the frame borders;
/// a fully clipped placement leaves the frame unchanged and records zero
/// visible pixels.
inline Placement composite_frame(Frame& frame, const ImageRgba& scaled_occluder, double center_x,
                                 double center_y, int frame_index = 0) {
  const int ow = scaled_occluder.width;
  const int oh = scaled_occluder.height;
  const int x0 = static_cast<int>(std::lround(center_x - ow / 2.0));
  const int y0 = static_cast<int>(std::lround(center_y - oh / 2.0));

  Placement placement;
  placement.frame_index = frame_index;
  placement.origin_x = x0;
  placement.origin_y = y0;
  placement.target_w = ow;
  placement.target_h = oh;

  const PixelRect full{x0, y0, x0 + ow, y0 + oh};
  const PixelRect clipped = full.intersect(frame_rect(frame.width, frame.height));
  if (clipped.empty()) {
    placement.dest = {0, 0, 0, 0};
    return placement;
  }
  placement.dest = clipped;

  for (int y = clipped.y0; y < clipped.y1; ++y) {
    for (int x = clipped.x0; x < clipped.x1; ++x) {
      const Rgba& occ = scaled_occluder.at(x - x0, y - y0);
      if (occ.a == 0) continue;
      ++placement.visible_opaque_pixels;
      const double a = occ.a / 255.0;
      Rgba& dst = frame.at(x, y);
      dst.r = static_cast<std::uint8_t>(std::lround(a * occ.r + (1 - a) * dst.r));
      dst.g = static_cast<std::uint8_t>(std::lround(a * occ.g + (1 - a) * dst.g));
      dst.b = static_cast<std::uint8_t>(std::lround(a * occ.b + (1 - a) * dst.b));
      dst.a = static_cast<std::uint8_t>(std::lround(a * occ.a + (1 - a) * dst.a));
    }
  }
  return placement;
}

struct SynthesisResult {
  std::vector<Frame> frames;
  std::vector<Placement> placements;  // one entry per frame that had a box
  std::string occluder_id;
};

/// Fig-style tracking occlusion for a whole clip: one occluder per clip,
/// re-scaled against each frame's box and composited at its center. Frames
/// without a box pass through untouched. Deterministic under
/// (spec, catalog ordering).
inline SynthesisResult synthesize_clip(const std::vector<Frame>& frames, const ActorTrack& track,
                                       const OcclusionSpec& spec, const OccluderCatalog& catalog,
                                       ColorResample resample = ColorResample::bilinear) {
  if (static_cast<int>(frames.size()) != track.frame_count) {
    raise(Errc::dimension_mismatch,
          track.clip_id + ": " + std::to_string(frames.size()) + " frames but track declares " +
              std::to_string(track.frame_count));
  }
  const OccluderAsset* asset = nullptr;
  if (spec.occluder_id.empty()) {
    asset = &sample_occluder(catalog, spec.seed);
  } else {
    asset = catalog.find(spec.occluder_id);
    if (asset == nullptr) raise(Errc::unknown_occluder, spec.occluder_id);
  }

  SynthesisResult result;
  result.occluder_id = asset->id;
  result.frames = frames;
  for (int f = 0; f < track.frame_count; ++f) {
    const auto& maybe_box = track.boxes[static_cast<std::size_t>(f)];
    if (!maybe_box.has_value()) continue;
    const BoundingBox& box = *maybe_box;
    try {
      ScaledOccluder scaled = scale_occluder(*asset, box, spec.degree, resample);
      Frame& frame = result.frames[static_cast<std::size_t>(f)];
      Placement placement =
          composite_frame(frame, scaled.image, box.center_x(), box.center_y(), f);
      placement.scale_factor = scaled.scale;

      // Record how much of the visible occluder actually covers the actor
      // box, and the box's pixel area, so clip metrics need no rasters.
      const PixelRect box_px = rasterize_box(box).intersect(frame_rect(frame.width, frame.height));
      placement.bbox_pixel_area = box_px.area();
      if (!placement.fully_clipped() && !box_px.empty()) {
        const PixelRect overlap = placement.dest.intersect(box_px);
        for (int y = overlap.y0; y < overlap.y1; ++y) {
          for (int x = overlap.x0; x < overlap.x1; ++x) {
            if (scaled.image.at(x - placement.origin_x, y - placement.origin_y).a > 0) {
              ++placement.opaque_pixels_in_bbox;
            }
          }
        }
      }
      result.placements.push_back(placement);
    } catch (const Error& e) {
      raise(e.code(), track.clip_id + " frame " + std::to_string(f) + ": " + e.what());
    }
  }
  return result;
}

}  // namespace occtk

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

#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/compositor.hpp"
#include "occtk/error.hpp"
#include "occtk/image.hpp"
#include "occtk/track.hpp"

namespace occtk {

/// The three occlusion factors for one synthesized clip.
///   degree          — the size ratio the clip was synthesized at
///   area ratio      — fraction of the actor box covered by opaque occluder
///   duration ratio  — fraction of clip frames in which the actor is occluded
struct OcclusionMetrics {
  double degree = 0;
  std::vector<double> area_ratio_per_frame;  // one entry per frame with a box
  double mean_area_ratio = 0;
  double duration_ratio = 0;
};

inline void to_json(nlohmann::json& j, const OcclusionMetrics& m) {
  j = nlohmann::json{{"degree", m.degree},
                     {"area_ratio_per_frame", m.area_ratio_per_frame},
                     {"mean_area_ratio", m.mean_area_ratio},
                     {"duration_ratio", m.duration_ratio}};
}

inline void from_json(const nlohmann::json& j, OcclusionMetrics& m) {
  m.degree = j.at("degree").get<double>();
  m.area_ratio_per_frame = j.at("area_ratio_per_frame").get<std::vector<double>>();
  m.mean_area_ratio = j.at("mean_area_ratio").get<double>();
  m.duration_ratio = j.at("duration_ratio").get<double>();
}

/// Fraction of the actor's box covered by opaque occluder pixels on one
/// frame: |{opaque occluder pixels} ∩ bbox ∩ frame| / |bbox ∩ frame|.
/// `scaled_occluder` is the same raster that was composited; the placement's
/// recorded pre-clip origin says where its (0,0) sits in frame space.
inline double occlusion_area_ratio(const BoundingBox& bbox, const Placement& placement,
                                   const ImageRgba& scaled_occluder, int frame_width,
                                   int frame_height) {
  if (!bbox.valid()) raise(Errc::empty_box, "invalid bounding box");
  const PixelRect box_px = rasterize_box(bbox).intersect(frame_rect(frame_width, frame_height));
  if (box_px.empty()) raise(Errc::empty_box, "bounding box does not intersect the frame");

  std::int64_t covered = 0;
  for (int dy = 0; dy < scaled_occluder.height; ++dy) {
    for (int dx = 0; dx < scaled_occluder.width; ++dx) {
      if (scaled_occluder.at(dx, dy).a == 0) continue;
      if (box_px.contains(placement.origin_x + dx, placement.origin_y + dy)) ++covered;
    }
  }
  return static_cast<double>(covered) / static_cast<double>(box_px.area());
}

/// Fraction of clip frames in which the occluder both shows up and overlaps
/// the actor box. Denominator is the whole clip, not just detected frames.
/// Placements must carry the in-box counts recorded by synthesize_clip.
inline double occlusion_duration_ratio(int frame_count, const std::vector<Placement>& placements) {
  if (frame_count < 1) raise(Errc::empty_track, "clip has no frames");
  int occluded_frames = 0;
  for (const Placement& p : placements) {
    if (p.visible_opaque_pixels > 0 && p.opaque_pixels_in_bbox > 0) ++occluded_frames;
  }
  return static_cast<double>(occluded_frames) / static_cast<double>(frame_count);
}

inline double occlusion_duration_ratio(const ActorTrack& track,
                                       const std::vector<Placement>& placements) {
  return occlusion_duration_ratio(track.frame_count, placements);
}

/// The degree actually realized on one frame, from the pre-clip target dims:
/// max(target_w / bbox.w, target_h / bbox.h). Within one-pixel rounding of
/// the requested degree when nothing degenerated.
inline double measured_occlusion_degree(const BoundingBox& bbox, const Placement& placement) {
  if (!bbox.valid()) raise(Errc::empty_box, "invalid bounding box");
  if (placement.target_w <= 0 || placement.target_h <= 0) {
    raise(Errc::degenerate_scale, "placement has no target dims");
  }
  return std::max(placement.target_w / bbox.w, placement.target_h / bbox.h);
}

/// Clip-level rollup from the counts recorded at synthesis time. Frames
/// whose box misses the frame entirely contribute a 0 ratio.
inline OcclusionMetrics compute_clip_metrics(int frame_count,
                                             const std::vector<Placement>& placements,
                                             double specified_degree) {
  OcclusionMetrics m;
  m.degree = specified_degree;
  m.area_ratio_per_frame.reserve(placements.size());
  for (const Placement& p : placements) {
    const double ratio = p.bbox_pixel_area > 0
                             ? static_cast<double>(p.opaque_pixels_in_bbox) /
                                   static_cast<double>(p.bbox_pixel_area)
                             : 0.0;
    m.area_ratio_per_frame.push_back(ratio);
  }
  if (!m.area_ratio_per_frame.empty()) {
    m.mean_area_ratio =
        std::accumulate(m.area_ratio_per_frame.begin(), m.area_ratio_per_frame.end(), 0.0) /
        static_cast<double>(m.area_ratio_per_frame.size());
  }
  m.duration_ratio = occlusion_duration_ratio(frame_count, placements);
  return m;
}

inline OcclusionMetrics compute_clip_metrics(const ActorTrack& track,
                                             const std::vector<Placement>& placements,
                                             double specified_degree) {
  return compute_clip_metrics(track.frame_count, placements, specified_degree);
}

}  // namespace occtk

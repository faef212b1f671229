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

// Minimal library walkthrough: build a clip in memory, occlude it at the
// three standard degrees, and print the resulting occlusion factors.

#include <cstdio>

#include "occtk/compositor.hpp"
#include "occtk/metrics.hpp"
#include "occtk/occluder.hpp"
#include "occtk/track.hpp"

int main() {
  using namespace occtk;

  // A 20-frame 128x96 clip with a flat gray background.
  std::vector<Frame> frames(20, Frame(128, 96, {90, 90, 90, 255}));

  // The actor walks left to right; boxes present on every frame.
  ActorTrack track;
  track.clip_id = "demo";
  track.fps = 20;
  track.frame_count = 20;
  for (int f = 0; f < 20; ++f) {
    track.boxes.push_back(BoundingBox{20.0 + f, 24.0, 40.0, 48.0});
  }

  // One fully opaque 30x30 occluder.
  ImageRgba cutout(30, 30, {200, 60, 40, 255});
  OccluderCatalog catalog;
  catalog.add(make_occluder("demo/red_block.png", OccluderCategory::custom, cutout,
                            /*min_opaque_pixels=*/100));

  for (double degree : {0.25, 0.50, 0.75}) {
    OcclusionSpec spec;
    spec.degree = degree;
    spec.seed = 7;
    const SynthesisResult result = synthesize_clip(frames, track, spec, catalog);
    const OcclusionMetrics m = compute_clip_metrics(track, result.placements, degree);
    std::printf("degree %.2f -> mean area ratio %.4f, duration ratio %.2f, occluder %s\n",
                degree, m.mean_area_ratio, m.duration_ratio, result.occluder_id.c_str());
  }
  return 0;
}

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

#include <catch2/catch_amalgamated.hpp>

#include "occtk/compositor.hpp"
#include "occtk/metrics.hpp"
#include "occtk/prng.hpp"
#include "oracles.hpp"

using occtk::BoundingBox;
using occtk::Errc;
using occtk::Error;
using occtk::ImageRgba;
using occtk::Placement;

namespace {

/// Placement for an occluder raster whose top-left corner lands at
/// (origin_x, origin_y) in frame space.
Placement placement_at(int origin_x, int origin_y, int target_w, int target_h, int frame_w,
                       int frame_h, int frame_index = 0) {
  Placement p;
  p.frame_index = frame_index;
  p.origin_x = origin_x;
  p.origin_y = origin_y;
  p.target_w = target_w;
  p.target_h = target_h;
  p.dest = occtk::PixelRect{origin_x, origin_y, origin_x + target_w, origin_y + target_h}
               .intersect(occtk::frame_rect(frame_w, frame_h));
  return p;
}

/// Placement for an occluder centered on the box, as synthesis would do it.
Placement placement_centered(const BoundingBox& box, int target_w, int target_h, int frame_w,
                             int frame_h) {
  const int x0 = static_cast<int>(std::lround(box.center_x() - target_w / 2.0));
  const int y0 = static_cast<int>(std::lround(box.center_y() - target_h / 2.0));
  return placement_at(x0, y0, target_w, target_h, frame_w, frame_h);
}

}  // namespace

TEST_CASE("a 50x50 opaque occluder inside a 100x100 box covers a quarter") {
  const BoundingBox box{0, 0, 100, 100};
  const ImageRgba occ(50, 50, {0, 0, 0, 255});
  const Placement p = placement_centered(box, 50, 50, 200, 200);
  CHECK(occtk::occlusion_area_ratio(box, p, occ, 200, 200) == 0.25);
}

TEST_CASE("an occluder entirely outside the box covers nothing") {
  const BoundingBox box{0, 0, 20, 20};
  const ImageRgba occ(10, 10, {0, 0, 0, 255});
  const Placement p = placement_at(60, 60, 10, 10, 200, 200);
  CHECK(occtk::occlusion_area_ratio(box, p, occ, 200, 200) == 0.0);
}

TEST_CASE("partial overlap counts exact pixels: 600 of 10000") {
  // A 20x30 opaque occluder overlapping a 100x100 box by a 20x30 region
  // entirely inside it: 600 covered pixels of 10000.
  const BoundingBox box{0, 0, 100, 100};
  const ImageRgba occ(20, 30, {0, 0, 0, 255});
  const Placement p = placement_at(80, 10, 20, 30, 200, 200);
  const double got = occtk::occlusion_area_ratio(box, p, occ, 200, 200);
  CHECK(got == Catch::Approx(600.0 / 10000.0));
  CHECK(got == oracle::area_ratio(200, 200, box, occ, 80, 10));

  // Push it half out of the box: only the in-box half counts.
  const Placement half_out = placement_at(90, 10, 20, 30, 200, 200);
  CHECK(occtk::occlusion_area_ratio(box, half_out, occ, 200, 200) ==
        Catch::Approx(300.0 / 10000.0));
}

TEST_CASE("area ratio equals the brute-force oracle on random small cases") {
  occtk::SplitMix64 rng(555);
  int checked = 0;
  for (int trial = 0; trial < 600; ++trial) {
    const int fw = 8 + static_cast<int>(rng.uniform_index(25));
    const int fh = 8 + static_cast<int>(rng.uniform_index(25));
    const int ow = 1 + static_cast<int>(rng.uniform_index(16));
    const int oh = 1 + static_cast<int>(rng.uniform_index(16));
    ImageRgba occ(ow, oh);
    for (auto& px : occ.pixels) {
      px.a = rng.uniform_index(3) == 0 ? 0 : static_cast<std::uint8_t>(1 + rng.uniform_index(255));
    }
    const BoundingBox box{rng.uniform01() * fw - 4, rng.uniform01() * fh - 4,
                          1 + rng.uniform01() * fw, 1 + rng.uniform01() * fh};
    const int ox = static_cast<int>(rng.uniform_index(fw + 10)) - 5;
    const int oy = static_cast<int>(rng.uniform_index(fh + 10)) - 5;
    const Placement p = placement_at(ox, oy, ow, oh, fw, fh);
    double got;
    try {
      got = occtk::occlusion_area_ratio(box, p, occ, fw, fh);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::empty_box);
      continue;
    }
    REQUIRE(got == oracle::area_ratio(fw, fh, box, occ, ox, oy));  // exact
    ++checked;
  }
  CHECK(checked > 400);
}

TEST_CASE("boxes that miss the frame are EmptyBox") {
  const ImageRgba occ(4, 4, {0, 0, 0, 255});
  const Placement p = placement_at(10, 10, 4, 4, 64, 48);
  try {
    occtk::occlusion_area_ratio(BoundingBox{500, 500, 10, 10}, p, occ, 64, 48);
    FAIL("expected EmptyBox");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::empty_box);
  }
  CHECK_THROWS_AS(occtk::occlusion_area_ratio(BoundingBox{0, 0, -5, 10}, p, occ, 64, 48), Error);
}

TEST_CASE("duration ratio counts occluded frames over all frames") {
  occtk::ActorTrack track;
  track.clip_id = "t";
  track.fps = 30;

  auto occluded_placement = [](int f) {
    Placement p;
    p.frame_index = f;
    p.visible_opaque_pixels = 10;
    p.opaque_pixels_in_bbox = 5;
    return p;
  };

  SECTION("all 30 frames occluded -> 1.0") {
    track.frame_count = 30;
    std::vector<Placement> ps;
    for (int f = 0; f < 30; ++f) ps.push_back(occluded_placement(f));
    CHECK(occtk::occlusion_duration_ratio(track, ps) == 1.0);
  }
  SECTION("15 of 30 -> 0.5") {
    track.frame_count = 30;
    std::vector<Placement> ps;
    for (int f = 0; f < 15; ++f) ps.push_back(occluded_placement(f));
    CHECK(occtk::occlusion_duration_ratio(track, ps) == 0.5);
  }
  SECTION("7 of 21 -> 1/3, against an independent counting loop") {
    track.frame_count = 21;
    std::vector<Placement> ps;
    for (int f = 0; f < 21; ++f) {
      Placement p = occluded_placement(f);
      if (f % 3 != 0) p.opaque_pixels_in_bbox = 0;  // visible but missing the actor
      ps.push_back(p);
    }
    int counted = 0;
    for (const auto& p : ps) {
      if (p.visible_opaque_pixels > 0 && p.opaque_pixels_in_bbox > 0) ++counted;
    }
    REQUIRE(counted == 7);
    CHECK(occtk::occlusion_duration_ratio(track, ps) == Catch::Approx(counted / 21.0));
  }
  SECTION("empty placement list -> 0") {
    track.frame_count = 10;
    CHECK(occtk::occlusion_duration_ratio(track, {}) == 0.0);
  }
}

TEST_CASE("measured degree reads back the specified degree") {
  SECTION("square asset, degree 0.75, box 40x40 -> 30x30 target") {
    const BoundingBox box{0, 0, 40, 40};
    const Placement p = placement_centered(box, 30, 30, 200, 200);
    CHECK(occtk::measured_occlusion_degree(box, p) == Catch::Approx(0.75));
  }
  SECTION("degree 0.25 on a 9x9 box rounds to a 2x2 target -> 2/9") {
    const BoundingBox box{0, 0, 9, 9};
    const auto expected = oracle::scale(100, 100, 9, 9, 0.25);
    REQUIRE(expected.target_w == 2);
    const Placement p = placement_centered(box, expected.target_w, expected.target_h, 50, 50);
    CHECK(occtk::measured_occlusion_degree(box, p) == Catch::Approx(2.0 / 9.0));
  }
}

TEST_CASE("synthesize-then-measure round trip honors the rounding bound") {
  occtk::SplitMix64 rng(808);
  for (int trial = 0; trial < 150; ++trial) {
    const int aw = 2 + static_cast<int>(rng.uniform_index(120));
    const int ah = 2 + static_cast<int>(rng.uniform_index(120));
    const double bw = 6 + rng.uniform01() * 120;
    const double bh = 6 + rng.uniform01() * 120;
    const BoundingBox box{10, 10, bw, bh};
    for (double degree : {0.25, 0.50, 0.75}) {
      occtk::OccluderAsset asset = occtk::make_occluder(
          "a", occtk::OccluderCategory::custom, ImageRgba(aw, ah, {0, 0, 0, 255}), 1);
      occtk::ScaledOccluder scaled;
      try {
        scaled = occtk::scale_occluder(asset, box, degree);
      } catch (const Error&) {
        continue;  // degenerate rounding, out of scope for the bound
      }
      const Placement p =
          placement_centered(box, scaled.image.width, scaled.image.height, 4000, 4000);
      const double measured = occtk::measured_occlusion_degree(box, p);
      CHECK(std::abs(measured - degree) <= 1.0 / std::min(bw, bh) + 1e-12);
    }
  }
}

TEST_CASE("synthesis counts agree with the standalone area computation") {
  // Dual route: opaque_pixels_in_bbox recorded during synthesis must equal
  // what occlusion_area_ratio recomputes from the raster, frame by frame.
  occtk::SplitMix64 rng(616);
  occtk::OccluderCatalog catalog;
  {
    ImageRgba cutout(30, 22, {0, 0, 0, 0});
    for (int y = 0; y < 22; ++y) {
      for (int x = 0; x < 30; ++x) {
        if ((x * 31 + y * 17) % 5 != 0) cutout.at(x, y) = {90, 120, 150, 255};
      }
    }
    catalog.add(occtk::make_occluder("patchy", occtk::OccluderCategory::custom, cutout, 1));
  }
  for (int trial = 0; trial < 20; ++trial) {
    const int frames_n = 1 + static_cast<int>(rng.uniform_index(5));
    std::vector<occtk::Frame> frames(frames_n, occtk::Frame(80, 60, {5, 5, 5, 255}));
    occtk::ActorTrack track;
    track.clip_id = "dual";
    track.fps = 10;
    track.frame_count = frames_n;
    for (int f = 0; f < frames_n; ++f) {
      track.boxes.push_back(BoundingBox{rng.uniform01() * 70 - 5, rng.uniform01() * 50 - 5,
                                        8 + rng.uniform01() * 40, 8 + rng.uniform01() * 40});
    }
    occtk::OcclusionSpec spec;
    spec.degree = 0.25 + rng.uniform01() * 0.75;
    occtk::SynthesisResult result;
    try {
      result = occtk::synthesize_clip(frames, track, spec, catalog);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_scale);
      continue;
    }
    for (const Placement& p : result.placements) {
      const BoundingBox& box = *track.boxes[p.frame_index];
      const auto scaled = occtk::scale_occluder(catalog.assets[0], box, spec.degree);
      double ratio;
      try {
        ratio = occtk::occlusion_area_ratio(box, p, scaled.image, 80, 60);
      } catch (const Error& e) {
        CHECK(e.code() == Errc::empty_box);
        CHECK(p.bbox_pixel_area == 0);
        continue;
      }
      REQUIRE(p.bbox_pixel_area > 0);
      CHECK(ratio == static_cast<double>(p.opaque_pixels_in_bbox) /
                         static_cast<double>(p.bbox_pixel_area));
    }
  }
}

TEST_CASE("clip metrics json round-trips") {
  occtk::OcclusionMetrics m;
  m.degree = 0.5;
  m.area_ratio_per_frame = {0.1, 0.2, 0.3};
  m.mean_area_ratio = 0.2;
  m.duration_ratio = 0.75;
  const nlohmann::json j = m;
  const auto back = j.get<occtk::OcclusionMetrics>();
  CHECK(back.degree == m.degree);
  CHECK(back.area_ratio_per_frame == m.area_ratio_per_frame);
  CHECK(back.mean_area_ratio == m.mean_area_ratio);
  CHECK(back.duration_ratio == m.duration_ratio);
}

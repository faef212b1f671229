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
using occtk::Frame;
using occtk::ImageRgba;
using occtk::OccluderCatalog;
using occtk::OccluderCategory;
using occtk::OcclusionSpec;
using occtk::Placement;
using occtk::Rgba;

namespace {

occtk::OccluderAsset asset_of(ImageRgba img, const std::string& id = "a") {
  return occtk::make_occluder(id, OccluderCategory::custom, std::move(img), 1);
}

ImageRgba random_rgba(occtk::SplitMix64& rng, int w, int h, bool random_alpha) {
  ImageRgba img(w, h);
  for (auto& p : img.pixels) {
    p.r = static_cast<std::uint8_t>(rng.uniform_index(256));
    p.g = static_cast<std::uint8_t>(rng.uniform_index(256));
    p.b = static_cast<std::uint8_t>(rng.uniform_index(256));
    p.a = random_alpha ? static_cast<std::uint8_t>(rng.uniform_index(256)) : 255;
  }
  return img;
}

}  // namespace

TEST_CASE("scale law: exact ratio cases") {
  // 100x50 asset in a 200x200 box at degree 0.5: width binds at exactly 0.5.
  auto a = asset_of(ImageRgba(100, 50, {1, 2, 3, 255}));
  auto scaled = occtk::scale_occluder(a, BoundingBox{0, 0, 200, 200}, 0.5);
  CHECK(scaled.image.width == 100);
  CHECK(scaled.image.height == 50);
  CHECK(scaled.scale == Catch::Approx(1.0));

  auto b = asset_of(ImageRgba(100, 100, {1, 2, 3, 255}));
  auto scaled_b = occtk::scale_occluder(b, BoundingBox{0, 0, 100, 100}, 0.25);
  CHECK(scaled_b.image.width == 25);
  CHECK(scaled_b.image.height == 25);
}

TEST_CASE("scale law matches the closed-form oracle") {
  auto a = asset_of(ImageRgba(300, 120, {9, 9, 9, 255}));
  const auto scaled = occtk::scale_occluder(a, BoundingBox{0, 0, 160, 90}, 0.75);
  const auto expected = oracle::scale(300, 120, 160, 90, 0.75);
  CHECK(expected.s == Catch::Approx(0.4));
  CHECK(scaled.scale == Catch::Approx(expected.s));
  CHECK(scaled.image.width == expected.target_w);  // 120
  CHECK(scaled.image.height == expected.target_h);  // 48
  CHECK(scaled.image.width == 120);
  CHECK(scaled.image.height == 48);
}

TEST_CASE("scale law on random shapes stays within one-pixel rounding") {
  occtk::SplitMix64 rng(7);
  for (int trial = 0; trial < 200; ++trial) {
    const int aw = 1 + static_cast<int>(rng.uniform_index(200));
    const int ah = 1 + static_cast<int>(rng.uniform_index(200));
    const double bw = 4 + rng.uniform01() * 150;
    const double bh = 4 + rng.uniform01() * 150;
    const double degree = 0.25 + rng.uniform01() * 0.75;
    auto a = asset_of(ImageRgba(aw, ah, {0, 0, 0, 255}));
    occtk::ScaledOccluder scaled;
    try {
      scaled = occtk::scale_occluder(a, BoundingBox{0, 0, bw, bh}, degree);
    } catch (const Error& e) {
      CHECK(e.code() == Errc::degenerate_scale);
      continue;
    }
    const auto expected = oracle::scale(aw, ah, bw, bh, degree);
    CHECK(scaled.image.width == expected.target_w);
    CHECK(scaled.image.height == expected.target_h);
    const double realized =
        std::max(scaled.image.width / bw, scaled.image.height / bh);
    CHECK(std::abs(realized - degree) <= 1.0 / std::min(bw, bh) + 1e-12);
  }
}

TEST_CASE("degenerate targets raise DegenerateScale; bad degrees rejected") {
  auto a = asset_of(ImageRgba(1000, 10, {0, 0, 0, 255}));
  try {
    // Binding dimension makes the short side round to zero.
    occtk::scale_occluder(a, BoundingBox{0, 0, 30, 30}, 0.25);
    FAIL("expected DegenerateScale");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::degenerate_scale);
  }
  CHECK_THROWS_AS(occtk::scale_occluder(a, BoundingBox{0, 0, 100, 100}, 1.5), Error);
  CHECK_THROWS_AS(occtk::scale_occluder(a, BoundingBox{0, 0, 100, 100}, 0.0), Error);
  CHECK_THROWS_AS(occtk::scale_occluder(a, BoundingBox{0, 0, 100, 100}, -0.25), Error);
}

TEST_CASE("alpha 255 replaces pixels exactly; alpha 0 is identity") {
  Frame frame(100, 100, {7, 8, 9, 255});
  const Frame original = frame;

  ImageRgba opaque(10, 10, {200, 100, 50, 255});
  const Placement p = occtk::composite_frame(frame, opaque, 50, 50);
  CHECK(p.visible_opaque_pixels == 100);
  CHECK(p.dest == occtk::PixelRect{45, 45, 55, 55});
  for (int y = 0; y < 100; ++y) {
    for (int x = 0; x < 100; ++x) {
      if (p.dest.contains(x, y)) {
        CHECK(frame.at(x, y) == Rgba{200, 100, 50, 255});
      } else {
        CHECK(frame.at(x, y) == original.at(x, y));
      }
    }
  }

  Frame frame2 = original;
  ImageRgba clear(10, 10, {200, 100, 50, 0});
  const Placement p2 = occtk::composite_frame(frame2, clear, 50, 50);
  CHECK(p2.visible_opaque_pixels == 0);
  CHECK(frame2 == original);
}

TEST_CASE("corner placement clips to a quarter") {
  Frame frame(100, 100, {0, 0, 0, 255});
  ImageRgba opaque(10, 10, {255, 255, 255, 255});
  const Placement p = occtk::composite_frame(frame, opaque, 0, 0);
  CHECK(p.dest == occtk::PixelRect{0, 0, 5, 5});
  CHECK(p.visible_opaque_pixels == 25);
}

TEST_CASE("fully clipped placements leave the frame alone") {
  Frame frame(50, 50, {1, 1, 1, 255});
  const Frame original = frame;
  ImageRgba opaque(10, 10, {255, 0, 0, 255});
  const Placement p = occtk::composite_frame(frame, opaque, -100, -100);
  CHECK(p.fully_clipped());
  CHECK(p.visible_opaque_pixels == 0);
  CHECK(frame == original);
}

TEST_CASE("compositor matches the brute-force oracle on random cases") {
  occtk::SplitMix64 rng(31337);
  for (int trial = 0; trial < 300; ++trial) {
    const int fw = 1 + static_cast<int>(rng.uniform_index(32));
    const int fh = 1 + static_cast<int>(rng.uniform_index(32));
    const int ow = 1 + static_cast<int>(rng.uniform_index(32));
    const int oh = 1 + static_cast<int>(rng.uniform_index(32));
    Frame frame = random_rgba(rng, fw, fh, false);
    const ImageRgba occ = random_rgba(rng, ow, oh, true);
    const double cx = rng.uniform01() * (fw + 20) - 10;
    const double cy = rng.uniform01() * (fh + 20) - 10;

    const auto expected = oracle::composite(frame, occ, cx, cy);
    const Placement p = occtk::composite_frame(frame, occ, cx, cy);

    REQUIRE(frame == expected.frame);  // bit-exact, every pixel
    CHECK(p.visible_opaque_pixels == expected.visible_opaque);
    if (!p.fully_clipped()) {
      CHECK(p.dest.x0 == expected.dest_x0);
      CHECK(p.dest.y0 == expected.dest_y0);
      CHECK(p.dest.x1 == expected.dest_x1);
      CHECK(p.dest.y1 == expected.dest_y1);
    }
  }
}

namespace {

struct ClipFixture {
  std::vector<Frame> frames;
  occtk::ActorTrack track;
  OccluderCatalog catalog;
};

ClipFixture constant_box_clip(int frames = 6, BoundingBox box = {30, 20, 40, 40}) {
  ClipFixture fx;
  fx.frames.assign(frames, Frame(120, 90, {10, 20, 30, 255}));
  fx.track.clip_id = "fx";
  fx.track.fps = 30;
  fx.track.frame_count = frames;
  fx.track.boxes.assign(frames, box);
  fx.catalog.add(occtk::make_occluder("block", OccluderCategory::backpack,
                                      ImageRgba(24, 24, {250, 40, 40, 255}), 1));
  return fx;
}

}  // namespace

TEST_CASE("only frames with a box are modified") {
  ClipFixture fx = constant_box_clip(4);
  fx.track.boxes[1] = std::nullopt;
  fx.track.boxes[2] = std::nullopt;
  fx.track.boxes[3] = std::nullopt;

  OcclusionSpec spec;
  spec.degree = 0.5;
  const auto result = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
  REQUIRE(result.placements.size() == 1);
  CHECK(result.placements[0].frame_index == 0);
  CHECK(result.frames[0] != fx.frames[0]);
  for (int f = 1; f < 4; ++f) CHECK(result.frames[f] == fx.frames[f]);
}

TEST_CASE("a constant box gives identical placements on every frame") {
  const ClipFixture fx = constant_box_clip();
  OcclusionSpec spec;
  spec.degree = 0.5;
  const auto result = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
  REQUIRE(result.placements.size() == fx.frames.size());
  for (const Placement& p : result.placements) {
    CHECK(p.dest == result.placements[0].dest);
    CHECK(p.visible_opaque_pixels == result.placements[0].visible_opaque_pixels);
    CHECK(p.scale_factor == result.placements[0].scale_factor);
  }
}

TEST_CASE("a shrinking box halves the scale factor, per the oracle") {
  ClipFixture fx = constant_box_clip(2);
  fx.track.boxes[0] = BoundingBox{30, 20, 40, 40};
  fx.track.boxes[1] = BoundingBox{30, 20, 20, 20};

  OcclusionSpec spec;
  spec.degree = 0.5;
  const auto result = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
  REQUIRE(result.placements.size() == 2);
  const auto s0 = oracle::scale(24, 24, 40, 40, 0.5);
  const auto s1 = oracle::scale(24, 24, 20, 20, 0.5);
  CHECK(result.placements[0].scale_factor == Catch::Approx(s0.s));
  CHECK(result.placements[1].scale_factor == Catch::Approx(s1.s));
  CHECK(result.placements[1].scale_factor ==
        Catch::Approx(result.placements[0].scale_factor / 2.0));
}

TEST_CASE("synthesis is deterministic and the off-pixel identity holds") {
  const ClipFixture fx = constant_box_clip();
  OcclusionSpec spec;
  spec.degree = 0.75;
  spec.seed = 99;
  const auto first = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
  const auto second = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
  REQUIRE(first.frames.size() == second.frames.size());
  for (std::size_t f = 0; f < first.frames.size(); ++f) {
    CHECK(first.frames[f] == second.frames[f]);
  }
  CHECK(first.occluder_id == second.occluder_id);
}

TEST_CASE("mean area ratio grows with degree when nothing clips") {
  const ClipFixture fx = constant_box_clip();
  double previous = -1;
  for (double degree : {0.25, 0.5, 0.75}) {
    OcclusionSpec spec;
    spec.degree = degree;
    const auto result = occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
    const auto m = occtk::compute_clip_metrics(fx.track, result.placements, degree);
    CHECK(m.mean_area_ratio > previous);
    previous = m.mean_area_ratio;
  }
}

TEST_CASE("frame count mismatch and unknown occluder ids are errors") {
  const ClipFixture fx = constant_box_clip(3);
  OcclusionSpec spec;
  spec.degree = 0.5;
  std::vector<Frame> short_frames(fx.frames.begin(), fx.frames.end() - 1);
  CHECK_THROWS_AS(occtk::synthesize_clip(short_frames, fx.track, spec, fx.catalog), Error);

  spec.occluder_id = "not_there";
  try {
    occtk::synthesize_clip(fx.frames, fx.track, spec, fx.catalog);
    FAIL("expected UnknownOccluder");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::unknown_occluder);
  }
}

TEST_CASE("placement json round-trips") {
  Placement p;
  p.frame_index = 3;
  p.dest = {4, 5, 14, 20};
  p.target_w = 12;
  p.target_h = 17;
  p.scale_factor = 0.375;
  p.visible_opaque_pixels = 101;
  p.opaque_pixels_in_bbox = 88;
  p.bbox_pixel_area = 1600;
  const nlohmann::json j = p;
  const Placement back = j.get<Placement>();
  CHECK(back.frame_index == p.frame_index);
  CHECK(back.dest == p.dest);
  CHECK(back.target_w == p.target_w);
  CHECK(back.target_h == p.target_h);
  CHECK(back.scale_factor == p.scale_factor);
  CHECK(back.visible_opaque_pixels == p.visible_opaque_pixels);
  CHECK(back.opaque_pixels_in_bbox == p.opaque_pixels_in_bbox);
  CHECK(back.bbox_pixel_area == p.bbox_pixel_area);
}

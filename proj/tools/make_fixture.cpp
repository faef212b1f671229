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

// Regenerates the bundled two-clip fixture under data/fixture. Everything is
// a fixed formula of (clip, frame, x, y), so the output bytes never change.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "occtk/image.hpp"
#include "occtk/image_io.hpp"

namespace fs = std::filesystem;
using occtk::Frame;
using occtk::ImageGray;
using occtk::ImageRgba;
using occtk::Rgba;

namespace {

constexpr int kWidth = 64;
constexpr int kHeight = 48;

Frame make_frame(int clip, int f) {
  Frame frame(kWidth, kHeight);
  for (int y = 0; y < kHeight; ++y) {
    for (int x = 0; x < kWidth; ++x) {
      // A drifting plaid: distinct per clip, per frame, fully deterministic.
      const int r = (x * 3 + f * 5 + clip * 40) % 256;
      const int g = (y * 4 + f * 7) % 256;
      const int b = ((x + y) * 2 + clip * 90) % 256;
      frame.at(x, y) = {static_cast<std::uint8_t>(r), static_cast<std::uint8_t>(g),
                        static_cast<std::uint8_t>(b), 255};
    }
  }
  return frame;
}

struct Box {
  double x, y, w, h;
};

Box clip_a_box(int f) { return {16.0 + 0.5 * f, 12.0, 24.0, 24.0}; }

Box clip_b_box(int f) {
  const double w = 28.0 - 0.8 * f;  // shrinking actor
  return {18.0, 10.0 + 0.4 * f, w, w};
}

void write_track(const fs::path& path, const std::string& clip_id, double fps, int frames,
                 Box (*box_fn)(int), int skip_frame) {
  std::ofstream out(path, std::ios::binary);
  out << clip_id << "," << fps << "," << frames << "\n";
  for (int f = 0; f < frames; ++f) {
    if (f == skip_frame) continue;  // detector miss, repaired by interpolation
    const Box b = box_fn(f);
    out << f << "," << b.x << "," << b.y << "," << b.w << "," << b.h << "\n";
  }
}

void write_clip(const fs::path& root, const std::string& clip_id, int clip, int frames, double fps,
                Box (*box_fn)(int), int skip_frame) {
  std::vector<Frame> imgs;
  imgs.reserve(frames);
  for (int f = 0; f < frames; ++f) imgs.push_back(make_frame(clip, f));
  occtk::save_clip_frames(root / "clips" / clip_id, imgs, fps);
  write_track(root / "tracks" / (clip_id + ".csv"), clip_id, fps, frames, box_fn, skip_frame);

  // Actor masks: the box region, for counterfactual runs.
  const fs::path mask_dir = root / "masks" / clip_id;
  fs::create_directories(mask_dir);
  for (int f = 0; f < frames; ++f) {
    const Box b = box_fn(f);
    ImageGray mask(kWidth, kHeight, 0);
    for (int y = 0; y < kHeight; ++y) {
      for (int x = 0; x < kWidth; ++x) {
        if (x >= b.x && x < b.x + b.w && y >= b.y && y < b.y + b.h) mask.at(x, y) = 255;
      }
    }
    ImageRgba mask_rgb(kWidth, kHeight);
    for (int y = 0; y < kHeight; ++y) {
      for (int x = 0; x < kWidth; ++x) {
        const std::uint8_t v = mask.at(x, y);
        mask_rgb.at(x, y) = {v, v, v, 255};
      }
    }
    char name[32];
    std::snprintf(name, sizeof(name), "%06d.png", f);
    occtk::encode_png(mask_dir / name, mask_rgb);
  }
}

void write_occluders(const fs::path& root) {
  // Fully opaque block, 32x32.
  {
    ImageRgba img(32, 32, {0, 0, 0, 0});
    for (int y = 0; y < 32; ++y) {
      for (int x = 0; x < 32; ++x) {
        img.at(x, y) = {static_cast<std::uint8_t>(200 - 3 * y), static_cast<std::uint8_t>(40 + 5 * x),
                        60, 255};
      }
    }
    fs::create_directories(root / "occluders" / "backpack");
    occtk::encode_png(root / "occluders" / "backpack" / "block.png", img, /*keep_alpha=*/true);
  }
  // Elliptical blob with transparent corners, 40x28.
  {
    ImageRgba img(40, 28, {0, 0, 0, 0});
    for (int y = 0; y < 28; ++y) {
      for (int x = 0; x < 40; ++x) {
        const double dx = (x - 19.5) / 19.5;
        const double dy = (y - 13.5) / 13.5;
        if (dx * dx + dy * dy <= 1.0) {
          img.at(x, y) = {120, static_cast<std::uint8_t>(80 + 4 * y), 30, 255};
        }
      }
    }
    fs::create_directories(root / "occluders" / "dog");
    occtk::encode_png(root / "occluders" / "dog" / "blob.png", img, /*keep_alpha=*/true);
  }
}

}  // namespace

int main(int argc, char** argv) {
  const fs::path root = argc > 1 ? fs::path(argv[1]) : fs::path("data/fixture");
  fs::create_directories(root / "tracks");

  write_clip(root, "clip_pan", 0, 12, 12.0, clip_a_box, /*skip_frame=*/5);
  write_clip(root, "clip_zoom", 1, 10, 10.0, clip_b_box, /*skip_frame=*/-1);
  write_occluders(root);

  {
    nlohmann::json manifest{
        {"clips",
         {{{"clip_id", "clip_pan"},
           {"frames_dir", "clips/clip_pan"},
           {"track_file", "tracks/clip_pan.csv"},
           {"mask_dir", "masks/clip_pan"},
           {"action_class", "walking the dog"}},
          {{"clip_id", "clip_zoom"},
           {"frames_dir", "clips/clip_zoom"},
           {"track_file", "tracks/clip_zoom.csv"},
           {"mask_dir", "masks/clip_zoom"},
           {"action_class", "juggling soccer ball"}}}}};
    std::ofstream out(root / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }
  {
    std::ofstream out(root / "classes.csv", std::ios::binary);
    out << "clip_id,action_class\n";
    out << "clip_pan,walking the dog\n";
    out << "clip_zoom,juggling soccer ball\n";
  }
  std::printf("fixture written under %s\n", root.string().c_str());
  return 0;
}

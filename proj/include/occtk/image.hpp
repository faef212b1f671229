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

#include <cstdint>
#include <vector>

#include "occtk/error.hpp"

namespace occtk {

struct Rgba {
  std::uint8_t r = 0;
  std::uint8_t g = 0;
  std::uint8_t b = 0;
  std::uint8_t a = 0;

  friend bool operator==(const Rgba&, const Rgba&) = default;
};

/// Row-major RGBA raster. Video frames use a = 255 throughout; occluder
/// cut-outs carry a real alpha channel.
struct ImageRgba {
  int width = 0;
  int height = 0;
  std::vector<Rgba> pixels;

  ImageRgba() = default;
  ImageRgba(int w, int h, Rgba fill = {0, 0, 0, 255})
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) raise(Errc::dimension_mismatch, "image dimensions must be positive");
  }

  Rgba& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  const Rgba& at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool in_bounds(int x, int y) const {
    return x >= 0 && y >= 0 && x < width && y < height;
  }

  std::int64_t opaque_pixel_count() const {
    std::int64_t n = 0;
    for (const Rgba& p : pixels) n += (p.a > 0);
    return n;
  }

  friend bool operator==(const ImageRgba&, const ImageRgba&) = default;
};

/// Single-channel raster, used for segmentation masks (0/1 after binarization).
struct ImageGray {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  ImageGray() = default;
  ImageGray(int w, int h, std::uint8_t fill = 0)
      : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {
    if (w <= 0 || h <= 0) raise(Errc::dimension_mismatch, "image dimensions must be positive");
  }

  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }

  friend bool operator==(const ImageGray&, const ImageGray&) = default;
};

using Frame = ImageRgba;

}  // namespace occtk
